"""Osculating sequences and Frenet frames of polynomial curves.

A polynomial column set of constant rank k spans, at every point of the
plane, a k dimensional subspace, a curve in the Grassmannian of C^n.
Differentiating in z and adjoining the genuinely new directions yields the
next osculating level; repeating until the rank stops growing gives the
osculating sequence xi_0, ..., xi_t with the defining relation

    dxi_a/dz = sum over b <= a+1 of xi_b B_{ba},

where the coefficients B are polynomial matrices found exactly by the
adjunction machinery of the poly module.  Orthogonalizing the levels
against a hermitian metric h produces the Frenet frame phi_0, ..., phi_t
and the gram blocks beta_a; the frame satisfies first order equations in
both Wirtinger directions whose data (beta, B, D) feed the Toda module.

Derivative convention, fixed package wide: the minus derivative is d/dz
and the plus derivative is d/dzbar.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import SingularBeta, ZeroFunction
from .linalg import COND_LIMIT, BlockStructure, HermitianMetric
from .poly import (
    Poly,
    PolyMatrix,
    RationalMatrix,
    adjoin_columns,
    constant_rank_reduce,
    minor_gcd,
    poly_gcd_many,
)
from .wirtinger import DEFAULT_STEP, d_minus, d_plus, d_plus_d_minus, memoized

__all__ = [
    "ConnectionCoefficients",
    "FrameResiduals",
    "FrenetPointData",
    "OsculatingSequence",
    "build_osculating",
    "connection_coefficients",
    "frame_at",
    "induced_metric",
    "kahler_check",
    "linear_fullness",
    "verify_frame_equations",
]


@dataclass(frozen=True)
class OsculatingSequence:
    """Levels xi_a, their derivative coefficients, and the rank partition.

    bcoeffs[a][b] is the polynomial matrix B_{ba} (shape k_b by k_a) in the
    expansion of the z derivative of level a; only b <= a+1 occur, and
    B_{t+1,t} is identically zero (the chain has terminated).  rank_drop is
    a monic polynomial whose roots are exactly the points where the input
    column set drops below its generic rank; it is 1 for constant rank
    input.  reduction holds the exact change of basis from the input
    columns to xi_0 when a reduction was necessary.
    """

    xis: tuple[PolyMatrix, ...]
    bcoeffs: tuple[tuple[PolyMatrix, ...], ...]
    partition: BlockStructure
    rank_drop: Poly
    reduction: RationalMatrix | None = None

    @property
    def t(self) -> int:
        return len(self.xis) - 1

    @property
    def n(self) -> int:
        return self.xis[0].rows

    @property
    def total(self) -> int:
        return self.partition.n

    def b_block(self, b: int, a: int) -> PolyMatrix:
        """B_{ba}, the zero matrix when b > a+1 or the chain has ended."""
        sizes = self.partition.sizes
        if not (0 <= a <= self.t and 0 <= b <= self.t):
            raise IndexError(f"no level pair ({b}, {a}) in a chain of length {self.t + 1}")
        if b < len(self.bcoeffs[a]):
            return self.bcoeffs[a][b]
        return PolyMatrix.zeros(sizes[b], sizes[a])

    def c_minus_matrix(self) -> PolyMatrix:
        """Block subdiagonal matrix of the B_{a+1,a}, the holomorphic half
        of the Toda connection for this curve."""
        k = self.total
        sizes = self.partition.sizes
        entries = [[Poly.zero() for _ in range(k)] for _ in range(k)]
        for a in range(self.t):
            blk = self.bcoeffs[a][a + 1]
            r0 = self.partition.offsets[a + 1]
            c0 = self.partition.offsets[a]
            for i in range(sizes[a + 1]):
                for j in range(sizes[a]):
                    entries[r0 + i][c0 + j] = blk.entry(i, j)
        return PolyMatrix(entries)


@dataclass(frozen=True)
class FrenetPointData:
    """The frame and its first order data at one point."""

    z: complex
    partition: BlockStructure
    phis: tuple[np.ndarray, ...]
    betas: tuple[np.ndarray, ...]
    b_sub: tuple[np.ndarray, ...]
    d_super: tuple[np.ndarray, ...]
    b_solve_residual: float

    @property
    def t(self) -> int:
        return len(self.phis) - 1

    @property
    def phi(self) -> np.ndarray:
        """All frame blocks side by side, n by (k_0 + ... + k_t)."""
        return np.hstack(self.phis)

    @property
    def gamma(self) -> np.ndarray:
        """Block diagonal of the gram blocks beta_a."""
        k = self.partition.n
        out = np.zeros((k, k), dtype=complex)
        for a, beta in enumerate(self.betas):
            s = self.partition.slice(a)
            out[s, s] = beta
        return out


@dataclass(frozen=True)
class FrameResiduals:
    """Norms of the frame equation defects at a point, per level."""

    z: complex
    minus: tuple[float, ...]
    plus: tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max(self.minus + self.plus)


@dataclass(frozen=True)
class ConnectionCoefficients:
    """First order connection data of the curve at a point.

    lambda_minus is block diagonal plus block subdiagonal, lambda_plus
    strictly block superdiagonal.  The four index arrays act on mixed
    fiber/horizontal tensors: index order (nu, alpha, beta, mu) with
    alpha, beta fiber indices (size k_0) and mu, nu horizontal ones
    (everything past the first block).
    """

    lambda_minus: np.ndarray
    lambda_plus: np.ndarray
    big_lambda_minus: np.ndarray
    big_lambda_plus: np.ndarray


def _minor_gcd_at_rank(m: PolyMatrix, r: int) -> Poly:
    """Monic gcd of all r by r minors of m."""
    if r <= 0 or r > min(m.rows, m.cols):
        raise ValueError(f"no {r} by {r} minors in a {m.rows} by {m.cols} matrix")
    minors = []
    for rows_idx in combinations(range(m.rows), r):
        for cols_idx in combinations(range(m.cols), r):
            minors.append(m.submatrix(rows_idx, cols_idx).det())
    return poly_gcd_many(minors)


def build_osculating(xi: PolyMatrix) -> OsculatingSequence:
    """Osculating sequence of a polynomial column set.

    The input should have constant rank; if the exact certificate fails, a
    warning is issued and the columns are replaced by a constant rank set
    with the same generic span (the change of basis is kept on the result).
    Levels are built by adjoining the z derivatives of the previous level,
    so every B coefficient is an exact polynomial and the defining relation
    holds identically, not just numerically.
    """
    cols = xi.columns()
    if all(c.is_zero for c in cols):
        raise ZeroFunction("cannot build an osculating sequence of the zero curve")
    cert = minor_gcd(cols) if len(cols) <= xi.rows else Poly.zero()
    reduction = None
    if cert == Poly.one():
        gs = cols
    else:
        warnings.warn(
            "input columns do not have constant rank; reducing to a constant rank set",
            stacklevel=2,
        )
        gs, reduction = constant_rank_reduce(cols)
    if len(gs) == len(cols) and cert == Poly.one():
        rank_drop = Poly.one()
    else:
        rank_drop = _minor_gcd_at_rank(xi, len(gs))

    levels: list[list[PolyMatrix]] = [list(gs)]
    cumulative: list[PolyMatrix] = list(gs)
    raw_coeffs: list[list[list[Poly]]] = []
    while True:
        current = levels[-1]
        derivs = [c.derivative() for c in current]
        extended, coeffs = adjoin_columns(cumulative, derivs)
        new = extended[len(cumulative):]
        raw_coeffs.append(coeffs)
        cumulative = extended
        if not new:
            break
        levels.append(list(new))

    sizes = tuple(len(lv) for lv in levels)
    t = len(sizes) - 1
    assert all(sizes[a] >= sizes[a + 1] for a in range(t)), "ranks must not grow"
    starts = [0]
    for k in sizes:
        starts.append(starts[-1] + k)
    bcoeffs = []
    for a in range(t + 1):
        upto = min(a + 1, t)
        per_b = []
        for b in range(upto + 1):
            rows = []
            for beta in range(sizes[b]):
                idx = starts[b] + beta
                rows.append(
                    [
                        raw_coeffs[a][alpha][idx] if idx < len(raw_coeffs[a][alpha]) else Poly()
                        for alpha in range(sizes[a])
                    ]
                )
            per_b.append(PolyMatrix(rows))
        bcoeffs.append(tuple(per_b))

    return OsculatingSequence(
        xis=tuple(PolyMatrix.from_columns(lv) for lv in levels),
        bcoeffs=tuple(bcoeffs),
        partition=BlockStructure(sizes),
        rank_drop=rank_drop,
        reduction=reduction,
    )


def frame_at(
    seq: OsculatingSequence, h: HermitianMetric, z: complex, cond_limit: float = COND_LIMIT
) -> FrenetPointData:
    """Frenet frame data at a single point.

    phi_0 is xi_0 itself and each later block is the previous projector
    chain applied to its level, so the blocks are h orthogonal.  The B
    blocks are recovered numerically from the evaluated derivative
    relation by least squares; the system is exactly solvable, so the
    recorded solve residual stays at rounding level and large values flag
    a broken sequence.
    """
    metric = h if isinstance(h, HermitianMetric) else HermitianMetric(h)
    hm = metric.matrix
    n = seq.n
    t = seq.t
    xs = [seq.xis[a].evaluate(z) for a in range(t + 1)]

    phis: list[np.ndarray] = []
    betas: list[np.ndarray] = []
    proj = np.eye(n, dtype=complex)
    for a in range(t + 1):
        phi_a = xs[a] if a == 0 else proj @ xs[a]
        beta_a = phi_a.conj().T @ hm @ phi_a
        cond = np.linalg.cond(beta_a)
        if not np.isfinite(cond) or cond > cond_limit:
            raise SingularBeta(
                f"gram block {a} at z={z:g} has condition {cond:.3e}"
            )
        phis.append(phi_a)
        betas.append(beta_a)
        proj = (np.eye(n, dtype=complex) - phi_a @ np.linalg.inv(beta_a) @ phi_a.conj().T @ hm) @ proj

    b_sub: list[np.ndarray] = []
    solve_residual = 0.0
    for a in range(t):
        stacked = np.hstack(xs[: a + 2])
        rhs = seq.xis[a].derivative().evaluate(z)
        sol, *_ = np.linalg.lstsq(stacked, rhs, rcond=None)
        solve_residual = max(solve_residual, float(np.linalg.norm(stacked @ sol - rhs)))
        lo = seq.partition.offsets[a + 1]
        hi = lo + seq.partition.sizes[a + 1]
        b_sub.append(sol[lo:hi, :])
    d_super = [-b.conj().T for b in b_sub]

    return FrenetPointData(
        z=complex(z),
        partition=seq.partition,
        phis=tuple(phis),
        betas=tuple(betas),
        b_sub=tuple(b_sub),
        d_super=tuple(d_super),
        b_solve_residual=solve_residual,
    )


def _frame_field(seq, h, cond_limit=COND_LIMIT) -> Callable[[complex], FrenetPointData]:
    return memoized(lambda w: frame_at(seq, h, w, cond_limit=cond_limit))


def verify_frame_equations(
    seq: OsculatingSequence,
    h: HermitianMetric,
    z: complex,
    fd_step: float = DEFAULT_STEP,
) -> FrameResiduals:
    """Defect norms of the two frame equations at a point.

    The minus equation expresses the z derivative of each block through
    its own gram block and the next block; the plus equation (zbar
    derivative) reaches back to the previous block through D.  Both are
    checked with central difference Wirtinger stencils, every stencil
    point sharing one frame evaluation.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    field = _frame_field(seq, h)
    data = field(z)
    t = data.t

    res_minus = []
    res_plus = []
    for a in range(t + 1):
        dphi_m = d_minus(lambda w, a=a: field(w).phis[a], z, fd_step)
        dbeta_m = d_minus(lambda w, a=a: field(w).betas[a], z, fd_step)
        rhs = data.phis[a] @ np.linalg.inv(data.betas[a]) @ dbeta_m
        if a < t:
            rhs = rhs + data.phis[a + 1] @ data.b_sub[a]
        res_minus.append(float(np.linalg.norm(dphi_m - rhs)))

        dphi_p = d_plus(lambda w, a=a: field(w).phis[a], z, fd_step)
        if a == 0:
            rhs_p = np.zeros_like(dphi_p)
        else:
            rhs_p = (
                data.phis[a - 1]
                @ np.linalg.inv(data.betas[a - 1])
                @ data.d_super[a - 1]
                @ data.betas[a]
            )
        res_plus.append(float(np.linalg.norm(dphi_p - rhs_p)))

    return FrameResiduals(z=complex(z), minus=tuple(res_minus), plus=tuple(res_plus))


def induced_metric(data: FrenetPointData, a: int) -> float:
    """Metric coefficient of the a-th associated curve at the point.

    Defined through the rank increment into level a+1, so a must be below
    the top level; the top curve has no increment.
    """
    if not (0 <= a < data.t):
        raise IndexError(f"metric index {a} outside [0, {data.t})")
    b = data.b_sub[a]
    val = np.trace(
        np.linalg.inv(data.betas[a]) @ b.conj().T @ data.betas[a + 1] @ b
    )
    return float(np.real(val))


def kahler_check(
    seq: OsculatingSequence,
    h: HermitianMetric,
    z: complex,
    fd_step: float = DEFAULT_STEP,
) -> tuple[float, ...]:
    """Per level defect of the potential identity at a point.

    The mixed second derivative of ln det beta_a must equal g_a − g_{a−1},
    with the boundary values g_{−1} = g_t = 0.  The mixed derivative uses
    the five point Laplacian over a shared memoized frame field.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    field = _frame_field(seq, h)
    data = field(z)
    t = data.t
    gs = [induced_metric(data, a) for a in range(t)]

    out = []
    for a in range(t + 1):
        lhs = d_plus_d_minus(
            lambda w, a=a: float(np.linalg.slogdet(field(w).betas[a])[1]), z, fd_step
        )
        rhs = (gs[a] if a < t else 0.0) - (gs[a - 1] if a >= 1 else 0.0)
        out.append(abs(float(np.real(lhs)) - rhs))
    return tuple(out)


def connection_coefficients(
    data: FrenetPointData, dbetas: Sequence[np.ndarray] | np.ndarray
) -> ConnectionCoefficients:
    """Connection coefficients assembled from point data and beta slopes.

    dbetas holds the minus derivative of every gram block, lowest level
    first; the lowest one alone suffices only for a single level curve, so
    a bare matrix is accepted exactly in that case.  lambda_minus carries
    the gram slopes on the diagonal and B below it, lambda_plus carries
    the D data above it, and the four index arrays couple the first block
    (fiber) to the rest (horizontal).
    """
    if isinstance(dbetas, np.ndarray):
        if data.t != 0:
            raise ValueError(
                "a single beta slope determines the connection only for a "
                "single level curve; pass one slope per level"
            )
        dbetas = [dbetas]
    dbetas = [np.asarray(d, dtype=complex) for d in dbetas]
    if len(dbetas) != data.t + 1:
        raise ValueError(f"need {data.t + 1} beta slopes, got {len(dbetas)}")

    part = data.partition
    k = part.n
    lam_m = np.zeros((k, k), dtype=complex)
    lam_p = np.zeros((k, k), dtype=complex)
    for a in range(data.t + 1):
        s = part.slice(a)
        lam_m[s, s] = np.linalg.inv(data.betas[a]) @ dbetas[a]
    for a in range(data.t):
        lam_m[part.slice(a + 1), part.slice(a)] = data.b_sub[a]
        lam_p[part.slice(a), part.slice(a + 1)] = (
            np.linalg.inv(data.betas[a]) @ data.d_super[a] @ data.betas[a + 1]
        )

    k0 = part.sizes[0]
    nh = k - k0
    fiber_slope = np.linalg.inv(data.betas[0]) @ dbetas[0]
    lam_m_h = lam_m[k0:, k0:]
    lam_p_h = lam_p[k0:, k0:]
    eye_f = np.eye(k0, dtype=complex)
    eye_h = np.eye(nh, dtype=complex)
    big_m = np.einsum("ab,nm->nabm", eye_f, lam_m_h) - np.einsum(
        "ab,nm->nabm", fiber_slope, eye_h
    )
    big_p = np.einsum("ab,nm->nabm", eye_f, lam_p_h)

    return ConnectionCoefficients(
        lambda_minus=lam_m,
        lambda_plus=lam_p,
        big_lambda_minus=big_m,
        big_lambda_plus=big_p,
    )


def linear_fullness(seq: OsculatingSequence, n: int) -> bool:
    """Whether the osculating flag eventually fills C^n."""
    return seq.total == n
