"""Job configuration, dispatch, and machine readable reports.

A job is a JSON document with a mode and mode specific inputs.  Scalar
conventions, shared by every mode:

* complex numbers are ``[re, im]`` pairs (plain numbers are accepted
  where the imaginary part is zero),
* exact rationals are ``[num, den]`` pairs,
* polynomials are ascending coefficient lists; each coefficient is a
  number, an ``[re, im]`` pair, or an exact quadruple
  ``[re_num, re_den, im_num, im_den]``,
* a polynomial matrix is a list of rows of such coefficient lists.

Float coefficients are turned into exact Gaussian rationals by continued
fraction approximation with denominators bounded by ``max_denominator``
(default one million); integer pairs and quadruples are taken exactly.

Antiholomorphic inputs (the plus seeds of a Toda job) are written as
polynomials in the conjugate variable, consistent with the rest of the
package, where the minus derivative is d/dz and the plus derivative is
d/dzbar.

Grids are square point lattices: ``nx`` by ``ny`` points centered at
``center``, scaled so every point lies within distance ``radius`` of the
center, traversed row by row.  Every requested point appears in the
report exactly once; points that cannot be processed carry a status tag
instead of data.

Exit codes: 0 when every point succeeded and every residual is within
``residual_tol``; 1 when any point failed or any residual is too large;
2 for configuration problems.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, GaussDecompositionFailed, TodaframesError
from .frenet import (
    build_osculating,
    frame_at,
    induced_metric,
    kahler_check,
    linear_fullness,
    verify_frame_equations,
)
from .grading import GradationSpec, build_grading, cartan_grading_operator, degree_of_block, eigen_check
from .linalg import BlockStructure, HermitianMetric, gauss_decompose
from .poly import GaussianRational, Poly, PolyMatrix
from .toda import (
    TodaProblem,
    residual_stencil,
    solution_gamma_field,
    solve,
    toda_residual,
    zero_curvature_check,
)

__all__ = [
    "SPEC_VERSION",
    "GridSpec",
    "IntegrationSpec",
    "JobConfig",
    "PointRecord",
    "Report",
    "Tolerances",
    "emit",
    "main",
    "parse_config",
    "parse_report",
    "run",
]

SPEC_VERSION = "1"
MODES = ("frenet", "verify-frenet", "toda-solve", "verify-toda", "gauss", "grading")
THREADS_VAR = "TODAFRAMES_THREADS"
RANK_DROP_RADIUS = 1e-3


# ---------------------------------------------------------------------------
# configuration


@dataclass
class GridSpec:
    center: complex = 0.0
    radius: float = 1.0
    nx: int = 3
    ny: int = 3

    def points(self) -> list[complex]:
        half = self.radius / math.sqrt(2.0)
        xs = [0.0] if self.nx == 1 else list(np.linspace(-half, half, self.nx))
        ys = [0.0] if self.ny == 1 else list(np.linspace(-half, half, self.ny))
        return [complex(self.center) + complex(x, y) for y in ys for x in xs]


@dataclass
class Tolerances:
    rank_tol: float = 1e-10
    fd_step: float = 1e-4
    residual_tol: float = 1e-5


@dataclass
class IntegrationSpec:
    basepoint: complex = 0.0
    steps: int = 1000


@dataclass
class JobConfig:
    mode: str
    curve: PolyMatrix | None = None
    gradation: GradationSpec | None = None
    metric: HermitianMetric | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    integration: IntegrationSpec = field(default_factory=IntegrationSpec)
    gamma_minus: PolyMatrix | None = None
    gamma_plus: PolyMatrix | None = None
    c_minus: PolyMatrix | None = None
    c_plus: PolyMatrix | None = None
    g0: np.ndarray | None = None
    hermitian_mode: bool = True
    gap: int = 1
    matrices: tuple[np.ndarray, ...] = ()
    count: int = 0
    seed: int = 0
    max_denominator: int = 10**6


def _as_number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    return float(v)


def _as_int(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


def _as_complex(v, path: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(_as_number(v[0], path), _as_number(v[1], path))
    raise ConfigError(path, f"expected a number or [re, im] pair, got {v!r}")


def _as_gaussian(v, path: str, maxden: int) -> GaussianRational:
    if isinstance(v, bool):
        raise ConfigError(path, "booleans are not numbers")
    if isinstance(v, int):
        return GaussianRational(v)
    if isinstance(v, float):
        return GaussianRational.from_complex(complex(v), maxden)
    if isinstance(v, list) and len(v) == 2:
        if all(isinstance(x, int) and not isinstance(x, bool) for x in v):
            return GaussianRational(v[0], v[1])
        return GaussianRational.from_complex(_as_complex(v, path), maxden)
    if isinstance(v, list) and len(v) == 4:
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
            raise ConfigError(path, "exact quadruples must be integers")
        try:
            return GaussianRational(Fraction(v[0], v[1]), Fraction(v[2], v[3]))
        except ZeroDivisionError:
            raise ConfigError(path, "zero denominator") from None
    raise ConfigError(
        path, f"expected a number, [re, im] pair, or exact quadruple, got {v!r}"
    )


def _as_poly(v, path: str, maxden: int) -> Poly:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return Poly([_as_gaussian(v, path, maxden)])
    if isinstance(v, list):
        return Poly([_as_gaussian(c, f"{path}[{k}]", maxden) for k, c in enumerate(v)])
    raise ConfigError(path, f"expected a coefficient list, got {v!r}")


def _as_poly_matrix(v, path: str, maxden: int) -> PolyMatrix:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ConfigError(path, "expected a list of rows")
    try:
        return PolyMatrix(
            [
                [_as_poly(e, f"{path}[{i}][{j}]", maxden) for j, e in enumerate(row)]
                for i, row in enumerate(v)
            ]
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _as_complex_matrix(v, path: str) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ConfigError(path, "expected a list of rows")
    rows = [
        [_as_complex(e, f"{path}[{i}][{j}]") for j, e in enumerate(row)]
        for i, row in enumerate(v)
    ]
    if any(len(r) != len(rows[0]) for r in rows):
        raise ConfigError(path, "ragged rows")
    return np.array(rows, dtype=complex)


def _as_gradation(v, path: str, labels_required: bool) -> GradationSpec:
    if not isinstance(v, dict):
        raise ConfigError(path, "expected an object with 'sizes' and 'labels'")
    unknown = set(v) - {"sizes", "labels"}
    if unknown:
        raise ConfigError(path, f"unknown keys {sorted(unknown)}")
    if "sizes" not in v:
        raise ConfigError(f"{path}.sizes", "required")
    sizes = tuple(_as_int(s, f"{path}.sizes") for s in v["sizes"])
    if "labels" in v:
        labels = tuple(_as_int(s, f"{path}.labels") for s in v["labels"])
    elif labels_required:
        raise ConfigError(f"{path}.labels", "required")
    else:
        labels = (1,) * (len(sizes) - 1)
    try:
        return GradationSpec(BlockStructure(sizes), labels)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


_TOP_KEYS = {
    "mode",
    "curve",
    "gradation",
    "metric_h",
    "grid",
    "tolerances",
    "integration",
    "seeds",
    "hermitian_mode",
    "gap",
    "matrices",
    "count",
    "seed",
    "max_denominator",
}


def parse_config(raw: dict) -> JobConfig:
    """Validate a configuration mapping and build the typed job."""
    if not isinstance(raw, dict):
        raise ConfigError("", "configuration must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
    cfg = JobConfig(mode=mode)

    if "max_denominator" in raw:
        cfg.max_denominator = _as_int(raw["max_denominator"], "max_denominator")
        if cfg.max_denominator < 1:
            raise ConfigError("max_denominator", "must be positive")
    maxden = cfg.max_denominator

    if "grid" in raw:
        g = raw["grid"]
        if not isinstance(g, dict):
            raise ConfigError("grid", "expected an object")
        unknown = set(g) - {"center", "radius", "nx", "ny"}
        if unknown:
            raise ConfigError(f"grid.{sorted(unknown)[0]}", "unknown key")
        cfg.grid = GridSpec(
            center=_as_complex(g.get("center", 0.0), "grid.center"),
            radius=_as_number(g.get("radius", 1.0), "grid.radius"),
            nx=_as_int(g.get("nx", 3), "grid.nx"),
            ny=_as_int(g.get("ny", 3), "grid.ny"),
        )
        if cfg.grid.radius <= 0:
            raise ConfigError("grid.radius", "must be positive")
        if cfg.grid.nx < 1 or cfg.grid.ny < 1:
            raise ConfigError("grid.nx", "point counts must be at least 1")

    if "tolerances" in raw:
        t = raw["tolerances"]
        if not isinstance(t, dict):
            raise ConfigError("tolerances", "expected an object")
        unknown = set(t) - {"rank_tol", "fd_step", "residual_tol"}
        if unknown:
            raise ConfigError(f"tolerances.{sorted(unknown)[0]}", "unknown key")
        cfg.tolerances = Tolerances(
            rank_tol=_as_number(t.get("rank_tol", 1e-10), "tolerances.rank_tol"),
            fd_step=_as_number(t.get("fd_step", 1e-4), "tolerances.fd_step"),
            residual_tol=_as_number(
                t.get("residual_tol", 1e-5), "tolerances.residual_tol"
            ),
        )
        for name in ("rank_tol", "fd_step", "residual_tol"):
            if getattr(cfg.tolerances, name) <= 0:
                raise ConfigError(f"tolerances.{name}", "must be positive")

    if "integration" in raw:
        it = raw["integration"]
        if not isinstance(it, dict):
            raise ConfigError("integration", "expected an object")
        unknown = set(it) - {"basepoint", "steps"}
        if unknown:
            raise ConfigError(f"integration.{sorted(unknown)[0]}", "unknown key")
        cfg.integration = IntegrationSpec(
            basepoint=_as_complex(it.get("basepoint", 0.0), "integration.basepoint"),
            steps=_as_int(it.get("steps", 1000), "integration.steps"),
        )
        if cfg.integration.steps < 1:
            raise ConfigError("integration.steps", "must be at least 1")

    if "curve" in raw:
        cfg.curve = _as_poly_matrix(raw["curve"], "curve", maxden)
    if "gradation" in raw:
        cfg.gradation = _as_gradation(
            raw["gradation"], "gradation", labels_required=(mode == "grading")
        )
    if "metric_h" in raw:
        try:
            cfg.metric = HermitianMetric(_as_complex_matrix(raw["metric_h"], "metric_h"))
        except ValueError as exc:
            raise ConfigError("metric_h", str(exc)) from None
    if "hermitian_mode" in raw:
        if not isinstance(raw["hermitian_mode"], bool):
            raise ConfigError("hermitian_mode", "expected true or false")
        cfg.hermitian_mode = raw["hermitian_mode"]
    if "gap" in raw:
        cfg.gap = _as_int(raw["gap"], "gap")
        if cfg.gap < 1:
            raise ConfigError("gap", "must be a positive integer")
    if "seed" in raw:
        cfg.seed = _as_int(raw["seed"], "seed")
    if "count" in raw:
        cfg.count = _as_int(raw["count"], "count")
        if cfg.count < 0:
            raise ConfigError("count", "must be nonnegative")
    if "matrices" in raw:
        if not isinstance(raw["matrices"], list):
            raise ConfigError("matrices", "expected a list of matrices")
        cfg.matrices = tuple(
            _as_complex_matrix(m, f"matrices[{i}]") for i, m in enumerate(raw["matrices"])
        )

    if "seeds" in raw:
        s = raw["seeds"]
        if not isinstance(s, dict):
            raise ConfigError("seeds", "expected an object")
        unknown = set(s) - {"gamma_minus", "gamma_plus", "c_minus", "c_plus", "g0"}
        if unknown:
            raise ConfigError(f"seeds.{sorted(unknown)[0]}", "unknown key")
        for name in ("gamma_minus", "gamma_plus", "c_minus", "c_plus"):
            if name in s:
                setattr(cfg, name, _as_poly_matrix(s[name], f"seeds.{name}", maxden))
        if "g0" in s:
            cfg.g0 = _as_complex_matrix(s["g0"], "seeds.g0")

    return cfg


def _thread_count() -> int:
    value = os.environ.get(THREADS_VAR, "")
    if not value:
        return 1
    try:
        threads = int(value)
    except ValueError:
        raise ConfigError(THREADS_VAR, f"not an integer: {value!r}") from None
    if threads < 1:
        raise ConfigError(THREADS_VAR, "must be at least 1")
    return threads


def _map_indexed(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# reports


@dataclass(eq=True)
class PointRecord:
    z: complex
    status: str
    residuals: dict[str, float]
    values: dict[str, float]

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(eq=False)
class Report:
    spec_version: str
    mode: str
    generated_at: str
    summary: dict
    points: list[PointRecord]

    def __eq__(self, other):
        """Content comparison; the timestamp is presentation only."""
        if not isinstance(other, Report):
            return NotImplemented
        return (
            self.spec_version == other.spec_version
            and self.mode == other.mode
            and self.summary == other.summary
            and self.points == other.points
        )

    def to_dict(self) -> dict:
        return {
            "spec_version": self.spec_version,
            "mode": self.mode,
            "generated_at": self.generated_at,
            "summary": self.summary,
            "points": [
                {
                    "z": [p.z.real, p.z.imag],
                    "status": p.status,
                    "residuals": p.residuals,
                    "values": p.values,
                }
                for p in self.points
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        points = [
            PointRecord(
                z=complex(p["z"][0], p["z"][1]),
                status=p["status"],
                residuals=dict(p["residuals"]),
                values=dict(p["values"]),
            )
            for p in data["points"]
        ]
        return cls(
            spec_version=data["spec_version"],
            mode=data["mode"],
            generated_at=data["generated_at"],
            summary=data["summary"],
            points=points,
        )

    @property
    def max_residual(self) -> float:
        worst = 0.0
        for p in self.points:
            for v in p.residuals.values():
                worst = max(worst, v)
        return worst

    def exit_code(self) -> int:
        tol = self.summary.get("residual_tol", 1e-5)
        if any(not p.ok for p in self.points):
            return 1
        if self.max_residual > tol:
            return 1
        return 0


def parse_report(data: bytes | str) -> Report:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return Report.from_dict(json.loads(data))


def _indexed_names(names: set[str], prefix: str) -> list[str]:
    pat = re.compile(re.escape(prefix) + r"(\d+)$")
    found = [(int(m.group(1)), n) for n in names if (m := pat.fullmatch(n))]
    return [n for _, n in sorted(found)]


def emit(report: Report, format: str = "json") -> bytes:
    """Serialize a report; json nests, csv flattens one row per point."""
    if format == "json":
        text = json.dumps(report.to_dict(), sort_keys=True, indent=2)
        return (text + "\n").encode("utf-8")
    if format != "csv":
        raise ValueError(f"unknown format {format!r}")

    res_names = sorted({n for p in report.points for n in p.residuals})
    val_names = {n for p in report.points for n in p.values}
    g_cols = _indexed_names(val_names, "g_")
    ln_cols = _indexed_names(val_names, "ln_det_beta_")
    other = sorted(val_names - set(g_cols) - set(ln_cols))
    header = (
        ["z_re", "z_im"]
        + [f"residual:{n}" for n in res_names]
        + g_cols
        + ln_cols
        + other
        + ["status"]
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for p in report.points:
        row = [repr(p.z.real), repr(p.z.imag)]
        row += [repr(p.residuals[n]) if n in p.residuals else "" for n in res_names]
        for n in g_cols + ln_cols + other:
            row.append(repr(p.values[n]) if n in p.values else "")
        row.append(p.status)
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


# ---------------------------------------------------------------------------
# mode pipelines


def _ln_det(block: np.ndarray) -> float:
    return float(np.linalg.slogdet(block)[1])


def _rank_drop_roots(poly: Poly) -> np.ndarray:
    if poly.degree < 1:
        return np.empty(0, dtype=complex)
    coeffs = [c.to_complex() for c in poly.coeffs]
    return np.roots(list(reversed(coeffs)))


def _run_frenet(cfg: JobConfig, verify: bool) -> tuple[dict, list[PointRecord]]:
    if cfg.curve is None:
        raise ConfigError("curve", "required for frenet modes")
    try:
        seq = build_osculating(cfg.curve)
    except TodaframesError as exc:
        raise ConfigError("curve", str(exc)) from None
    n = cfg.curve.rows
    h = cfg.metric if cfg.metric is not None else HermitianMetric.identity(n)
    if h.n != n:
        raise ConfigError("metric_h", f"size {h.n} does not match the curve ({n} rows)")
    roots = _rank_drop_roots(seq.rank_drop)
    fd = cfg.tolerances.fd_step
    t = seq.t

    def one(z: complex) -> PointRecord:
        if roots.size and np.min(np.abs(roots - z)) < RANK_DROP_RADIUS:
            return PointRecord(z, "excluded: near a rank drop point", {}, {})
        try:
            data = frame_at(seq, h, z)
            residuals = {"b_solve": data.b_solve_residual}
            values: dict[str, float] = {}
            for a in range(t):
                values[f"g_{a}"] = induced_metric(data, a)
            for a in range(t + 1):
                values[f"ln_det_beta_{a}"] = _ln_det(data.betas[a])
            if verify:
                frame = verify_frame_equations(seq, h, z, fd)
                for a in range(t + 1):
                    residuals[f"frame_minus_{a}"] = frame.minus[a]
                    residuals[f"frame_plus_{a}"] = frame.plus[a]
                for a, v in enumerate(kahler_check(seq, h, z, fd)):
                    residuals[f"kahler_{a}"] = v
            return PointRecord(z, "ok", residuals, values)
        except TodaframesError as exc:
            return PointRecord(z, f"failed: {type(exc).__name__}: {exc}", {}, {})

    records = _map_indexed(one, cfg.grid.points(), _thread_count())
    summary = {
        "partition": list(seq.partition.sizes),
        "linear_full": linear_fullness(seq, n),
        "rank_drop": [
            [c.re.numerator, c.re.denominator, c.im.numerator, c.im.denominator]
            for c in seq.rank_drop.coeffs
        ],
        "residual_tol": cfg.tolerances.residual_tol,
        "points_total": len(records),
        "points_ok": sum(1 for r in records if r.ok),
    }
    return summary, records


def _build_problem(cfg: JobConfig) -> TodaProblem:
    if cfg.gradation is None:
        raise ConfigError("gradation", "required for toda modes")
    if cfg.c_minus is None:
        raise ConfigError("seeds.c_minus", "required for toda modes")
    n = cfg.gradation.n
    h = cfg.metric if cfg.metric is not None else HermitianMetric.identity(n)
    try:
        if cfg.hermitian_mode:
            if cfg.c_plus is not None:
                raise ConfigError(
                    "seeds.c_plus", "derived automatically in hermitian mode"
                )
            return TodaProblem.hermitian_problem(cfg.gradation, cfg.gap, cfg.c_minus, h)
        if cfg.c_plus is None:
            raise ConfigError("seeds.c_plus", "required outside hermitian mode")
        return TodaProblem(
            gradation=cfg.gradation,
            gap=cfg.gap,
            c_minus=cfg.c_minus,
            c_plus=cfg.c_plus,
            h=h,
            hermitian_mode=False,
        )
    except ValueError as exc:
        raise ConfigError("seeds", str(exc)) from None


def _run_toda(cfg: JobConfig, with_curvature: bool) -> tuple[dict, list[PointRecord]]:
    problem = _build_problem(cfg)
    if cfg.gamma_minus is None:
        raise ConfigError("seeds.gamma_minus", "required for toda modes")
    if not cfg.hermitian_mode and cfg.gamma_plus is None:
        raise ConfigError("seeds.gamma_plus", "required outside hermitian mode")
    pts = cfg.grid.points()
    fd = cfg.tolerances.fd_step
    bp, steps = cfg.integration.basepoint, cfg.integration.steps
    try:
        sol = solve(
            problem,
            cfg.gamma_minus,
            pts,
            g0=cfg.g0,
            basepoint=bp,
            steps=steps,
            gamma_plus=cfg.gamma_plus,
        )
    except (ValueError, TodaframesError) as exc:
        raise ConfigError("seeds", str(exc)) from None
    field_fn = solution_gamma_field(
        problem, cfg.gamma_minus, basepoint=bp, steps=steps, gamma_plus=cfg.gamma_plus
    )
    try:
        warm_pts: list[complex] = []
        for i in sol.ok_indices:
            warm_pts.extend(residual_stencil(sol.grid[i], fd))
        field_fn.warm(warm_pts)
    except TodaframesError:
        pass  # per point warming below isolates the failing stencils

    if cfg.g0 is not None:
        h_eff = cfg.g0.conj().T @ cfg.g0
    else:
        h_eff = problem.h.matrix
    blocks = problem.blocks
    count = blocks.count
    c_blocks = [
        cfg.c_minus.submatrix(
            range(blocks.slice(a + 1).start, blocks.slice(a + 1).stop),
            range(blocks.slice(a).start, blocks.slice(a).stop),
        )
        for a in range(count - 1)
    ]

    def one(i: int) -> PointRecord:
        z = sol.grid[i]
        if sol.failures[i] is not None:
            return PointRecord(z, f"failed: {sol.failures[i]}", {}, {})
        gamma, phi = sol.gamma[i], sol.phi[i]
        scale = max(1e-300, float(np.linalg.norm(gamma)))
        residuals = {
            "hermiticity": float(np.linalg.norm(gamma - gamma.conj().T)) / scale,
            "phi_relation": float(np.linalg.norm(phi.conj().T @ h_eff @ phi - gamma))
            / scale,
        }
        values: dict[str, float] = {}
        betas = [gamma[blocks.slice(a), blocks.slice(a)] for a in range(count)]
        for a in range(count):
            values[f"ln_det_beta_{a}"] = _ln_det(betas[a])
        for a in range(count - 1):
            b = c_blocks[a].evaluate(z)
            values[f"g_{a}"] = float(
                np.real(
                    np.trace(
                        np.linalg.solve(betas[a], b.conj().T) @ betas[a + 1] @ b
                    )
                )
            )
        try:
            field_fn.warm(residual_stencil(z, fd))
            for a, v in enumerate(toda_residual(problem, field_fn, z, fd)):
                residuals[f"toda_{a}"] = v
            if with_curvature:
                residuals["zero_curvature"] = zero_curvature_check(
                    problem, field_fn, z, fd
                )
        except TodaframesError as exc:
            return PointRecord(
                z, f"failed: stencil: {type(exc).__name__}: {exc}", residuals, values
            )
        return PointRecord(z, "ok", residuals, values)

    records = _map_indexed(one, range(len(pts)), _thread_count())
    summary = {
        "hermitian_mode": cfg.hermitian_mode,
        "failure_fraction": sum(1 for r in records if not r.ok) / max(1, len(records)),
        "residual_tol": cfg.tolerances.residual_tol,
        "points_total": len(records),
        "points_ok": sum(1 for r in records if r.ok),
    }
    return summary, records


def _random_test_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    # rejection keeps the samples comfortably decomposable
    while True:
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        m += n * np.eye(n)
        if np.linalg.cond(m) < 1e3:
            return m


def _run_gauss(cfg: JobConfig) -> tuple[dict, list[PointRecord]]:
    if cfg.gradation is None:
        raise ConfigError("gradation", "required for gauss mode")
    blocks = cfg.gradation.blocks
    mats = list(cfg.matrices)
    if not mats and cfg.count:
        rng = np.random.default_rng(cfg.seed)
        mats = [_random_test_matrix(rng, blocks.n) for _ in range(cfg.count)]
    if not mats:
        raise ConfigError("matrices", "provide matrices or a positive count")

    def one(i: int) -> PointRecord:
        z = complex(i, 0.0)
        m = mats[i]
        if m.shape != (blocks.n, blocks.n):
            return PointRecord(z, f"failed: shape {m.shape} does not match blocks", {}, {})
        try:
            factors = gauss_decompose(m, blocks)
        except GaussDecompositionFailed as exc:
            return PointRecord(z, f"failed: GaussDecompositionFailed: {exc}", {}, {})
        rel = float(
            np.linalg.norm(factors.recompose() - m) / max(1e-300, np.linalg.norm(m))
        )
        return PointRecord(z, "ok", {"recompose": rel}, {})

    records = _map_indexed(one, range(len(mats)), _thread_count())
    summary = {
        "blocks": list(blocks.sizes),
        "residual_tol": cfg.tolerances.residual_tol,
        "points_total": len(records),
        "points_ok": sum(1 for r in records if r.ok),
    }
    return summary, records


def _run_grading(cfg: JobConfig) -> tuple[dict, list[PointRecord]]:
    if cfg.gradation is None:
        raise ConfigError("gradation", "required for grading mode")
    spec = cfg.gradation
    op = build_grading(spec)
    trace = sum(k * r for k, r in zip(spec.blocks.sizes, op.rho))

    def one(a: int) -> PointRecord:
        worst = 0.0
        for b in range(spec.count):
            x = np.zeros((spec.n, spec.n), dtype=complex)
            x[spec.blocks.slice(a).start, spec.blocks.slice(b).start] = 1.0
            worst = max(worst, eigen_check(op, x, degree_of_block(spec, a, b)))
        return PointRecord(
            complex(a, 0.0), "ok", {"eigen": worst}, {"rho": float(op.rho[a])}
        )

    records = _map_indexed(one, range(spec.count), _thread_count())
    cartan = cartan_grading_operator(spec)
    summary = {
        "rho": [[r.numerator, r.denominator] for r in op.rho],
        "traceless": trace == 0,
        "cartan_match": tuple(cartan) == tuple(op.diagonal),
        "labels": list(spec.labels),
        "blocks": list(spec.blocks.sizes),
        "residual_tol": cfg.tolerances.residual_tol,
        "points_total": len(records),
        "points_ok": len(records),
    }
    return summary, records


def run(config: JobConfig | dict) -> Report:
    """Dispatch one job and collect its report."""
    cfg = parse_config(config) if isinstance(config, dict) else config
    if cfg.mode == "frenet":
        summary, records = _run_frenet(cfg, verify=False)
    elif cfg.mode == "verify-frenet":
        summary, records = _run_frenet(cfg, verify=True)
    elif cfg.mode == "toda-solve":
        summary, records = _run_toda(cfg, with_curvature=False)
    elif cfg.mode == "verify-toda":
        summary, records = _run_toda(cfg, with_curvature=True)
    elif cfg.mode == "gauss":
        summary, records = _run_gauss(cfg)
    elif cfg.mode == "grading":
        summary, records = _run_grading(cfg)
    else:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
    return Report(
        spec_version=SPEC_VERSION,
        mode=cfg.mode,
        generated_at=datetime.now(timezone.utc).isoformat(),
        summary=summary,
        points=records,
    )


# ---------------------------------------------------------------------------
# entry point


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="todaframes",
        description=(
            "Frenet frames of polynomial Grassmannian curves and the "
            "associated nonabelian Toda systems. Derivative convention: "
            "the minus derivative is d/dz, the plus derivative is d/dzbar."
        ),
    )
    parser.add_argument("mode", choices=MODES)
    parser.add_argument("--config", required=True, help="path to a JSON job file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    args = parser.parse_args(argv)

    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    if not isinstance(raw, dict):
        print("config must be a JSON object", file=sys.stderr)
        return 2
    if "mode" in raw and raw["mode"] != args.mode:
        print(
            f"config mode {raw['mode']!r} conflicts with requested {args.mode!r}",
            file=sys.stderr,
        )
        return 2
    raw["mode"] = args.mode

    try:
        report = run(raw)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    data = emit(report, args.format)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return report.exit_code()
