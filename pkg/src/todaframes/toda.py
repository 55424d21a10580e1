"""Nonabelian Toda systems attached to a block gradation of gl(n).

The field of the system is the block diagonal matrix gamma, and the data
consists of a holomorphic matrix c_minus of pure negative degree and an
antiholomorphic c_plus of the opposite degree.  Antiholomorphic objects
are stored as polynomial matrices in the conjugate variable: a stored
matrix q represents the map z -> q(zbar), which keeps every coefficient
exact and plays well with conjugate transposition of polynomial matrices.

The solution procedure transports two triangular factors from a basepoint
(a matrix linear ODE integrated with the classical fourth order scheme),
Gauss decomposes their quotient, and assembles gamma together with the
frame map phi.  In hermitian mode the plus data is derived from the minus
data, the quotient is hermitian positive definite, and the assembled
gamma is hermitian with phi^dagger h phi = gamma.

Derivative convention, as everywhere in the package: the minus derivative
is d/dz, the plus derivative is d/dzbar.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    GaussDecompositionFailed,
    IntegrationDiverged,
    SingularBeta,
)
from .grading import GradationSpec, degree_of_block
from .linalg import COND_LIMIT, BlockStructure, HermitianMetric, gauss_decompose
from .poly import PolyMatrix
from .wirtinger import DEFAULT_STEP, d_minus, d_plus, memoized

__all__ = [
    "MU_NORM_LIMIT",
    "TodaProblem",
    "TodaSolution",
    "check_phi_relation",
    "integrate_mu",
    "residual_stencil",
    "solution_gamma_field",
    "solve",
    "toda_residual",
    "zero_curvature_check",
]

MU_NORM_LIMIT = 1e12


def _nonzero_blocks_pure_degree(m: PolyMatrix, spec: GradationSpec, degree: int, name: str):
    blocks = spec.blocks
    if m.shape != (spec.n, spec.n):
        raise ValueError(f"{name} must be {spec.n} by {spec.n}, got {m.shape}")
    for a in range(blocks.count):
        for b in range(blocks.count):
            if degree_of_block(spec, a, b) == degree:
                continue
            sa, sb = blocks.slice(a), blocks.slice(b)
            for i in range(sa.start, sa.stop):
                for j in range(sb.start, sb.stop):
                    if not m.entry(i, j).is_zero:
                        raise ValueError(
                            f"{name} has a nonzero entry in block ({a}, {b}) of "
                            f"degree {degree_of_block(spec, a, b)}, expected pure "
                            f"degree {degree}"
                        )


def _check_gap(spec: GradationSpec, gap: int):
    degrees = {
        degree_of_block(spec, a, b)
        for a in range(spec.count)
        for b in range(spec.count)
    }
    positive = sorted(d for d in degrees if d > 0)
    if positive and positive[0] < gap:
        raise ValueError(
            f"gradation has a nonzero subspace in degree {positive[0]}, "
            f"inside the required trivial band 0 < degree < {gap}"
        )


def _require_block_diagonal(m: PolyMatrix, blocks: BlockStructure, name: str):
    if m.shape != (blocks.n, blocks.n):
        raise ValueError(f"{name} must be {blocks.n} by {blocks.n}, got {m.shape}")
    for a in range(blocks.count):
        for b in range(blocks.count):
            if a == b:
                continue
            sa, sb = blocks.slice(a), blocks.slice(b)
            for i in range(sa.start, sa.stop):
                for j in range(sb.start, sb.stop):
                    if not m.entry(i, j).is_zero:
                        raise ValueError(f"{name} must be block diagonal")


@dataclass(frozen=True)
class TodaProblem:
    """Gradation, gap, the two constant-degree matrices, and the metric.

    c_minus is holomorphic (a plain polynomial matrix of z) and purely of
    degree -gap in the gradation.  c_plus is stored in the conjugate
    variable: the matrix q kept here acts as z -> q(zbar) and is purely of
    degree +gap.  In hermitian mode c_plus is minus the conjugate
    transpose of c_minus pointwise, which in the stored representation is
    an exact polynomial identity.
    """

    gradation: GradationSpec
    gap: int
    c_minus: PolyMatrix
    c_plus: PolyMatrix
    h: HermitianMetric
    hermitian_mode: bool = False

    def __post_init__(self):
        if self.gap < 1:
            raise ValueError("gap must be a positive integer")
        _check_gap(self.gradation, self.gap)
        _nonzero_blocks_pure_degree(self.c_minus, self.gradation, -self.gap, "c_minus")
        _nonzero_blocks_pure_degree(self.c_plus, self.gradation, self.gap, "c_plus")
        if self.h.n != self.gradation.n:
            raise ValueError("metric size does not match the gradation")
        if self.hermitian_mode:
            expected = self.c_minus.conjugate_transpose().scale(-1)
            if self.c_plus != expected:
                raise ValueError("hermitian mode requires c_plus = -(c_minus)^dagger")

    @classmethod
    def hermitian_problem(
        cls,
        gradation: GradationSpec,
        gap: int,
        c_minus: PolyMatrix,
        h: HermitianMetric | None = None,
    ) -> "TodaProblem":
        """Problem with the plus data derived from the minus data."""
        metric = HermitianMetric.identity(gradation.n) if h is None else h
        return cls(
            gradation=gradation,
            gap=gap,
            c_minus=c_minus,
            c_plus=c_minus.conjugate_transpose().scale(-1),
            h=metric,
            hermitian_mode=True,
        )

    @property
    def blocks(self) -> BlockStructure:
        return self.gradation.blocks

    @property
    def n(self) -> int:
        return self.gradation.n

    def c_minus_at(self, z: complex) -> np.ndarray:
        return self.c_minus.evaluate(z)

    def c_plus_at(self, z: complex) -> np.ndarray:
        return self.c_plus.evaluate(np.conj(z))


def _transport_many(
    gamma_rep: PolyMatrix,
    c_rep: PolyMatrix,
    start: complex,
    ends: np.ndarray,
    steps: int,
    chunk: int = 64,
) -> np.ndarray:
    """Transport factors along straight paths, batched over endpoints.

    Solves mu' = mu * A with A = gamma c gamma^{-1} evaluated along the
    segment, mu(start) = I, by the classical fourth order scheme with the
    midpoint node shared between the two middle stages.
    """
    ends = np.asarray(ends, dtype=complex).ravel()
    total = ends.size
    k = gamma_rep.rows
    out = np.empty((total, k, k), dtype=complex)
    svals = np.linspace(0.0, 1.0, 2 * steps + 1)
    hstep = 1.0 / steps
    eye = np.eye(k, dtype=complex)
    for lo in range(0, total, chunk):
        sub = ends[lo : lo + chunk]
        nodes = start + svals[None, :] * (sub - start)[:, None]
        flat = nodes.ravel()
        gm = gamma_rep.evaluate_many(flat)
        cm = c_rep.evaluate_many(flat)
        try:
            gminv = np.linalg.inv(gm)
        except np.linalg.LinAlgError as exc:
            raise IntegrationDiverged(
                "transport coefficient matrix is singular on the path"
            ) from exc
        coeff = (gm @ cm @ gminv).reshape(sub.size, 2 * steps + 1, k, k)
        coeff = coeff * (sub - start)[:, None, None, None]
        mu = np.broadcast_to(eye, (sub.size, k, k)).copy()
        for i in range(steps):
            a0 = coeff[:, 2 * i]
            a1 = coeff[:, 2 * i + 1]
            a2 = coeff[:, 2 * i + 2]
            k1 = mu @ a0
            k2 = (mu + (0.5 * hstep) * k1) @ a1
            k3 = (mu + (0.5 * hstep) * k2) @ a1
            k4 = (mu + hstep * k3) @ a2
            mu = mu + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(mu)) or np.abs(mu).max() > MU_NORM_LIMIT:
            raise IntegrationDiverged(
                f"transport norm exceeded {MU_NORM_LIMIT:g} before the endpoint"
            )
        out[lo : lo + sub.size] = mu
    return out


def _mu_minus_path(problem, gamma_minus, waypoints, steps) -> np.ndarray:
    mu = np.eye(problem.n, dtype=complex)
    for p, q in zip(waypoints[:-1], waypoints[1:]):
        leg = _transport_many(gamma_minus, problem.c_minus, p, np.array([q]), steps)[0]
        mu = mu @ leg
    return mu


def _mu_plus_path(problem, gamma_plus, waypoints, steps) -> np.ndarray:
    mu = np.eye(problem.n, dtype=complex)
    conj_points = [np.conj(p) for p in waypoints]
    for p, q in zip(conj_points[:-1], conj_points[1:]):
        leg = _transport_many(gamma_plus, problem.c_plus, p, np.array([q]), steps)[0]
        mu = mu @ leg
    return mu


def integrate_mu(
    problem: TodaProblem,
    gamma_minus: PolyMatrix,
    basepoint: complex,
    z: complex,
    steps: int = 1000,
    via: Sequence[complex] = (),
    gamma_plus: PolyMatrix | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Both transport factors at z, integrated from the basepoint.

    The path is straight unless intermediate waypoints are given, in which
    case the legs are integrated in order and composed; the holomorphic
    integrand makes the result path independent, which the tests exercise.
    In hermitian mode the plus factor is the inverse conjugate transpose
    of the minus factor; otherwise a block diagonal antiholomorphic seed
    gamma_plus (stored in the conjugate variable) is required.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    _require_block_diagonal(gamma_minus, problem.blocks, "gamma_minus")
    waypoints = [complex(basepoint), *map(complex, via), complex(z)]
    mu_minus = _mu_minus_path(problem, gamma_minus, waypoints, steps)
    if problem.hermitian_mode:
        mu_plus = np.linalg.inv(mu_minus.conj().T)
    else:
        if gamma_plus is None:
            raise ValueError("gamma_plus is required outside hermitian mode")
        _require_block_diagonal(gamma_plus, problem.blocks, "gamma_plus")
        mu_plus = _mu_plus_path(problem, gamma_plus, waypoints, steps)
    return mu_minus, mu_plus


@dataclass(frozen=True)
class TodaSolution:
    """Per point output of the solution procedure.

    Failed points keep their slot: the matrices are None there and the
    failure string records what went wrong, so a grid report can show
    every requested point exactly once.
    """

    grid: tuple[complex, ...]
    blocks: BlockStructure
    hermitian_mode: bool
    gamma: tuple[np.ndarray | None, ...]
    phi: tuple[np.ndarray | None, ...]
    mu_minus: tuple[np.ndarray | None, ...]
    mu_plus: tuple[np.ndarray | None, ...]
    failures: tuple[str | None, ...]

    @property
    def ok_indices(self) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.failures) if f is None)

    @property
    def failure_fraction(self) -> float:
        if not self.grid:
            return 0.0
        return 1.0 - len(self.ok_indices) / len(self.grid)

    def hermiticity_residuals(self) -> tuple[float | None, ...]:
        """Relative defect of gamma from being hermitian, per point."""
        out: list[float | None] = []
        for g in self.gamma:
            if g is None:
                out.append(None)
            else:
                scale = max(1.0, float(np.linalg.norm(g)))
                out.append(float(np.linalg.norm(g - g.conj().T)) / scale)
        return tuple(out)

    def min_block_eigenvalues(self) -> tuple[float | None, ...]:
        """Smallest eigenvalue over the diagonal blocks of gamma, per point.

        Meaningful for hermitian solutions, where positivity of the blocks
        is the geometric regularity condition; reported, never enforced.
        """
        out: list[float | None] = []
        for g in self.gamma:
            if g is None:
                out.append(None)
                continue
            worst = np.inf
            for a in range(self.blocks.count):
                s = self.blocks.slice(a)
                block = g[s, s]
                sym = 0.5 * (block + block.conj().T)
                worst = min(worst, float(np.min(np.linalg.eigvalsh(sym))))
            out.append(worst)
        return tuple(out)


def solve(
    problem: TodaProblem,
    gamma_minus: PolyMatrix,
    grid: Sequence[complex],
    g0: np.ndarray | None = None,
    basepoint: complex = 0.0,
    steps: int = 1000,
    gamma_plus: PolyMatrix | None = None,
) -> TodaSolution:
    """Run the full solution procedure over a grid of points.

    Transports are batched over the grid (straight paths from the
    basepoint), the quotient of the factors is Gauss decomposed per point,
    and gamma and phi are assembled from the outputs.  The constant g0 is
    a factor of the metric, g0^dagger g0 = h (defaulting to the Cholesky
    factor); phi is built with its inverse on the left, which is what
    makes phi^dagger h phi = gamma in hermitian mode.  Gauss cell failures
    are recorded per point and leave the other points intact.
    """
    _require_block_diagonal(gamma_minus, problem.blocks, "gamma_minus")
    if not problem.hermitian_mode:
        if gamma_plus is None:
            raise ValueError("gamma_plus is required outside hermitian mode")
        _require_block_diagonal(gamma_plus, problem.blocks, "gamma_plus")
    if g0 is None:
        g0 = problem.h.cholesky_factor()
    g0 = np.asarray(g0, dtype=complex)
    residual = np.linalg.norm(g0.conj().T @ g0 - problem.h.matrix)
    if residual > 1e-9 * max(1.0, float(np.linalg.norm(problem.h.matrix))):
        raise ValueError("g0 must factor the metric: g0^dagger g0 = h")
    g0inv = np.linalg.inv(g0)

    pts = [complex(p) for p in grid]
    mu_m_all: list[np.ndarray | None] = [None] * len(pts)
    mu_p_all: list[np.ndarray | None] = [None] * len(pts)
    failures: list[str | None] = [None] * len(pts)
    try:
        batch = _transport_many(
            gamma_minus, problem.c_minus, complex(basepoint), np.array(pts), steps
        )
        for i in range(len(pts)):
            mu_m_all[i] = batch[i]
    except IntegrationDiverged:
        # isolate the failing points
        for i, p in enumerate(pts):
            try:
                mu_m_all[i] = _mu_minus_path(problem, gamma_minus, [complex(basepoint), p], steps)
            except IntegrationDiverged as exc:
                failures[i] = f"integration: {exc}"
    if problem.hermitian_mode:
        for i, mu in enumerate(mu_m_all):
            if mu is not None:
                mu_p_all[i] = np.linalg.inv(mu.conj().T)
    else:
        try:
            batch = _transport_many(
                gamma_plus,
                problem.c_plus,
                np.conj(complex(basepoint)),
                np.conj(np.array(pts)),
                steps,
            )
            for i in range(len(pts)):
                mu_p_all[i] = batch[i]
        except IntegrationDiverged:
            for i, p in enumerate(pts):
                if failures[i] is not None:
                    continue
                try:
                    mu_p_all[i] = _mu_plus_path(problem, gamma_plus, [complex(basepoint), p], steps)
                except IntegrationDiverged as exc:
                    failures[i] = f"integration: {exc}"

    gammas: list[np.ndarray | None] = [None] * len(pts)
    phis: list[np.ndarray | None] = [None] * len(pts)
    for i, z in enumerate(pts):
        if failures[i] is not None:
            continue
        mu_m, mu_p = mu_m_all[i], mu_p_all[i]
        gm_z = gamma_minus.evaluate(z)
        if problem.hermitian_mode:
            quotient = mu_m.conj().T @ mu_m
            gp_inv = gm_z.conj().T
        else:
            quotient = np.linalg.inv(mu_p) @ mu_m
            gp_inv = np.linalg.inv(gamma_plus.evaluate(np.conj(z)))
        try:
            factors = gauss_decompose(quotient, problem.blocks)
        except GaussDecompositionFailed as exc:
            failures[i] = f"gauss: {exc}"
            continue
        gammas[i] = gp_inv @ factors.eta @ gm_z
        phis[i] = g0inv @ mu_m @ factors.n_plus @ gm_z

    return TodaSolution(
        grid=tuple(pts),
        blocks=problem.blocks,
        hermitian_mode=problem.hermitian_mode,
        gamma=tuple(gammas),
        phi=tuple(phis),
        mu_minus=tuple(mu_m_all),
        mu_plus=tuple(mu_p_all),
        failures=tuple(failures),
    )


def solution_gamma_field(
    problem: TodaProblem,
    gamma_minus: PolyMatrix,
    basepoint: complex = 0.0,
    steps: int = 1000,
    gamma_plus: PolyMatrix | None = None,
) -> Callable[[complex], np.ndarray]:
    """The solution gamma as a cached field for derivative stencils.

    The returned callable solves per point on demand; its warm(points)
    attribute batch transports many points at once and fills the cache,
    which turns residual grids from hundreds of integrations into a
    handful of vectorized ones.  Failures inside a stencil raise rather
    than record: a field with holes cannot be differentiated honestly.
    """
    sol_kwargs = dict(basepoint=basepoint, steps=steps, gamma_plus=gamma_plus)
    cache: dict[complex, np.ndarray] = {}

    def compute(points: Sequence[complex]) -> None:
        fresh = list(dict.fromkeys(complex(p) for p in points if complex(p) not in cache))
        if not fresh:
            return
        sol = solve(problem, gamma_minus, fresh, **sol_kwargs)
        for p, g, fail in zip(sol.grid, sol.gamma, sol.failures):
            if fail is not None:
                raise GaussDecompositionFailed(
                    -1, f"gamma field undefined at {p:g} ({fail})"
                )
            cache[p] = g

    def field(z: complex) -> np.ndarray:
        key = complex(z)
        if key not in cache:
            compute([key])
        return cache[key]

    field.warm = compute
    return field


def residual_stencil(z: complex, fd_step: float = DEFAULT_STEP) -> list[complex]:
    """Every point a residual check may query around z.

    Mirrors the nested central difference stencils used by toda_residual
    and zero_curvature_check, including the exact floating point
    arithmetic, so warming a field over these points makes the checks pure
    cache lookups.
    """
    z = complex(z)
    outer = [z + fd_step, z - fd_step, z + 1j * fd_step, z - 1j * fd_step]
    pts = [z, *outer]
    for w in outer:
        pts.extend([w + fd_step, w - fd_step, w + 1j * fd_step, w - 1j * fd_step])
    return pts


def _block_cond_guard(g: np.ndarray, blocks: BlockStructure, z: complex):
    for a in range(blocks.count):
        s = blocks.slice(a)
        cond = np.linalg.cond(g[s, s])
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularBeta(
                f"gamma block {a} at z={z:g} has condition {cond:.3e}"
            )


def toda_residual(
    problem: TodaProblem,
    gamma_field: Callable[[complex], np.ndarray],
    z: complex,
    fd_step: float = DEFAULT_STEP,
) -> tuple[float, ...]:
    """Defect of the Toda equations at a point, one norm per block.

    The equations are checked in matrix form: the plus derivative of
    gamma^{-1} (d gamma) must match the commutator of c_minus with the
    gamma conjugate of c_plus.  Both sides are block diagonal, and the
    defect is reported blockwise.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    field = memoized(gamma_field)
    center = field(z)
    _block_cond_guard(center, problem.blocks, z)

    def slope(w: complex) -> np.ndarray:
        return np.linalg.inv(field(w)) @ d_minus(field, w, fd_step)

    lhs = d_plus(slope, z, fd_step)
    cm = problem.c_minus_at(z)
    cx = np.linalg.inv(center) @ problem.c_plus_at(z) @ center
    defect = lhs - (cm @ cx - cx @ cm)
    out = []
    for a in range(problem.blocks.count):
        s = problem.blocks.slice(a)
        out.append(float(np.linalg.norm(defect[s, s])))
    return tuple(out)


def zero_curvature_check(
    problem: TodaProblem,
    gamma_field: Callable[[complex], np.ndarray],
    z: complex,
    fd_step: float = DEFAULT_STEP,
) -> float:
    """Curvature norm of the connection built from gamma and the c data.

    The connection has omega_minus = gamma^{-1} (d gamma) + c_minus and
    omega_plus = gamma^{-1} c_plus gamma; its curvature vanishes exactly
    when the Toda equations hold, so this is an independent cross check of
    toda_residual on the same field.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    field = memoized(gamma_field)
    center = field(z)
    _block_cond_guard(center, problem.blocks, z)

    def omega_minus(w: complex) -> np.ndarray:
        return np.linalg.inv(field(w)) @ d_minus(field, w, fd_step) + problem.c_minus_at(w)

    def omega_plus(w: complex) -> np.ndarray:
        g = field(w)
        return np.linalg.inv(g) @ problem.c_plus_at(w) @ g

    om, op = omega_minus(z), omega_plus(z)
    curvature = (
        d_plus(omega_minus, z, fd_step)
        - d_minus(omega_plus, z, fd_step)
        + op @ om
        - om @ op
    )
    return float(np.linalg.norm(curvature))


def check_phi_relation(
    solution: TodaSolution,
    problem: TodaProblem,
    g0: np.ndarray | None = None,
) -> float:
    """Worst relative defect of phi^dagger h phi = gamma over the grid.

    The metric is recovered from g0 when one is supplied (h = g0^dagger
    g0), matching whatever factor was used during assembly; failed points
    are skipped.
    """
    if g0 is not None:
        g0 = np.asarray(g0, dtype=complex)
        h = g0.conj().T @ g0
    else:
        h = problem.h.matrix
    worst = 0.0
    seen = False
    for i in solution.ok_indices:
        seen = True
        phi = solution.phi[i]
        gamma = solution.gamma[i]
        defect = np.linalg.norm(phi.conj().T @ h @ phi - gamma)
        worst = max(worst, float(defect / max(1e-300, np.linalg.norm(gamma))))
    if not seen:
        raise ValueError("no successfully solved points to check")
    return worst
