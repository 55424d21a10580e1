"""Exact polynomial linear algebra over the Gaussian rationals.

Scalars are Gaussian rationals, pairs of ``fractions.Fraction`` values in
lowest terms.  Polynomials are tuples of such scalars in ascending degree
with no trailing zeros, so equality of representations is equality of
polynomials.  Matrices over the polynomial ring come with the operations
needed to manufacture constant rank column sets:

* ``factor_zeros`` divides a column by the monic gcd of its entries,
* ``constant_rank_reduce`` replaces a column set by a constant rank set
  spanning the same module, together with the exact change of basis,
* ``rank_complete`` extends a constant rank set to a full frame whose
  determinant is a nonzero constant,
* ``dual_frame`` returns the exact inverse rows of a full frame.

Constant rank of a set of l columns is certified exactly: the monic gcd of
all l by l minors must equal 1, which rules out a common zero anywhere in
the plane.  The reduction loop repairs a candidate column by subtracting an
interpolating combination modulo the squarefree part of the minor gcd and
factoring the common zeros out; each pass strictly lowers the gcd degree,
so the pass count is capped by the initial degree and a cap overrun is a
hard error rather than a silent fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import AlreadyFull, NotConstantRank, SingularFrame, ZeroFunction

__all__ = [
    "GaussianRational",
    "Poly",
    "RationalFunc",
    "PolyMatrix",
    "RationalMatrix",
    "differentiate",
    "factor_zeros",
    "adjoin_columns",
    "constant_rank_reduce",
    "rank_complete",
    "dual_frame",
    "minor_gcd",
    "poly_gcd",
    "poly_gcd_many",
]


class GaussianRational:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def from_complex(cls, z: complex, max_denominator: int = 10**6) -> "GaussianRational":
        return cls(
            Fraction(float(np.real(z))).limit_denominator(max_denominator),
            Fraction(float(np.imag(z))).limit_denominator(max_denominator),
        )

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return NotImplemented

    @property
    def is_zero(self) -> bool:
        return not self.re and not self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        norm = o.re * o.re + o.im * o.im
        if not norm:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / norm,
            (self.im * o.re - self.re * o.im) / norm,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        if not self.im:
            return f"GR({self.re})"
        return f"GR({self.re}, {self.im})"


_GR_ZERO = GaussianRational()
_GR_ONE = GaussianRational(1)


def _as_scalar(value) -> GaussianRational:
    """Coerce ints, Fractions, (re, im) pairs and GaussianRationals."""
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return GaussianRational(Fraction(value[0]), Fraction(value[1]))
    raise TypeError(f"cannot build an exact scalar from {value!r}")


class Poly:
    """A polynomial in one variable over the Gaussian rationals."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_as_scalar(c) for c in coeffs]
        while cs and cs[-1].is_zero:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def of(cls, *coeffs) -> "Poly":
        return cls(coeffs)

    @classmethod
    def zero(cls) -> "Poly":
        return cls(())

    @classmethod
    def one(cls) -> "Poly":
        return cls((_GR_ONE,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((_GR_ZERO, _GR_ONE))

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial at -1."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> GaussianRational:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [_GR_ZERO] * (n - len(self.coeffs))
        b = list(other.coeffs) + [_GR_ZERO] * (n - len(other.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return Poly()
        out = [_GR_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out)

    __rmul__ = __mul__

    def scale(self, s) -> "Poly":
        s = _as_scalar(s)
        return Poly(c * s for c in self.coeffs)

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        quo = [_GR_ZERO] * (dq + 1)
        inv_lead = _GR_ONE / other.lead
        for k in range(dq, -1, -1):
            c = rem[k + other.degree] * inv_lead
            quo[k] = c
            if not c.is_zero:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        return Poly(quo), Poly(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Poly":
        quo, rem = divmod(self, other)
        if not rem.is_zero:
            raise ValueError("exact polynomial division left a remainder")
        return quo

    def monic(self) -> "Poly":
        if self.is_zero:
            return self
        return self.scale(_GR_ONE / self.lead)

    def derivative(self) -> "Poly":
        return Poly(c * m for m, c in enumerate(self.coeffs) if m >= 1)

    def conjugate_coeffs(self) -> "Poly":
        """Coefficientwise conjugate q, so q(conj(z)) = conj(self(z))."""
        return Poly(c.conjugate() for c in self.coeffs)

    def squarefree_part(self) -> "Poly":
        if self.degree < 1:
            return self.monic()
        return self.exact_div(poly_gcd(self, self.derivative())).monic()

    def evaluate(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c.to_complex()
        return acc

    def evaluate_exact(self, c: GaussianRational) -> GaussianRational:
        acc = _GR_ZERO
        for a in reversed(self.coeffs):
            acc = acc * c + a
        return acc

    def __eq__(self, other):
        try:
            other = _as_poly(other)
        except TypeError:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if self.is_zero:
            return "Poly(0)"
        parts = []
        for m, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            if c.im:
                s = f"({c.re}{'+' if c.im > 0 else '-'}{abs(c.im)}i)"
            else:
                s = f"{c.re}"
            parts.append(s if m == 0 else (f"{s}*z" if m == 1 else f"{s}*z^{m}"))
        return "Poly(" + " + ".join(parts) + ")"


def _as_poly(value) -> Poly:
    if isinstance(value, Poly):
        return value
    return Poly((_as_scalar(value),))


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm; gcd(0, 0) = 0."""
    a, b = _as_poly(a), _as_poly(b)
    while not b.is_zero:
        a, b = b, a % b
        b = b.monic() if not b.is_zero else b
    return a.monic()


def poly_gcd_many(ps: Iterable[Poly]) -> Poly:
    g = Poly()
    for p in ps:
        g = poly_gcd(g, p)
        if g.degree == 0:
            break
    return g


class RationalFunc:
    """A reduced ratio of polynomials with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_poly(num)
        den = Poly.one() if den is None else _as_poly(den)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            num, den = Poly(), Poly.one()
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num.exact_div(g), den.exact_div(g)
            lead = den.lead
            num, den = num.scale(_GR_ONE / lead), den.scale(_GR_ONE / lead)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunc is immutable")

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den == Poly.one()

    def to_poly(self) -> Poly:
        if not self.is_polynomial:
            raise ValueError(f"{self!r} is not a polynomial")
        return self.num

    def evaluate(self, z: complex) -> complex:
        return self.num.evaluate(z) / self.den.evaluate(z)

    def __add__(self, other):
        o = _as_rational(other)
        return RationalFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_rational(other))

    def __rsub__(self, other):
        return _as_rational(other) - self

    def __mul__(self, other):
        o = _as_rational(other)
        return RationalFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_rational(other)
        if o.is_zero:
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return _as_rational(other) / self

    def __eq__(self, other):
        try:
            o = _as_rational(other)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        if self.is_polynomial:
            return f"RF({self.num!r})"
        return f"RF({self.num!r} / {self.den!r})"


def _as_rational(value) -> RationalFunc:
    if isinstance(value, RationalFunc):
        return value
    return RationalFunc(_as_poly(value))


class PolyMatrix:
    """A rows by cols matrix of polynomials."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        rows = tuple(tuple(_entry_as_poly(e) for e in row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("PolyMatrix needs at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged rows in PolyMatrix")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", width)

    def __setattr__(self, name, value):
        raise AttributeError("PolyMatrix is immutable")

    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls([[Poly.one() if i == j else Poly.zero() for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PolyMatrix":
        return cls([[Poly.zero()] * cols for _ in range(rows)])

    @classmethod
    def column(cls, entries: Sequence) -> "PolyMatrix":
        return cls([[e] for e in entries])

    @classmethod
    def from_columns(cls, columns: Sequence["PolyMatrix"]) -> "PolyMatrix":
        if not columns:
            raise ValueError("need at least one column")
        rows = columns[0].rows
        if any(c.rows != rows for c in columns):
            raise ValueError("column height mismatch")
        return cls(
            [[col.entries[i][j] for col in columns for j in range(col.cols)] for i in range(rows)]
        )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    def entry(self, i: int, j: int) -> Poly:
        return self.entries[i][j]

    def column_at(self, j: int) -> "PolyMatrix":
        return PolyMatrix([[row[j]] for row in self.entries])

    def columns(self) -> list["PolyMatrix"]:
        return [self.column_at(j) for j in range(self.cols)]

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "PolyMatrix":
        return PolyMatrix([[self.entries[i][j] for j in col_idx] for i in row_idx])

    def hstack(self, other: "PolyMatrix") -> "PolyMatrix":
        if other.rows != self.rows:
            raise ValueError("row count mismatch in hstack")
        return PolyMatrix([list(a) + list(b) for a, b in zip(self.entries, other.entries)])

    def derivative(self) -> "PolyMatrix":
        return PolyMatrix([[e.derivative() for e in row] for row in self.entries])

    def conjugate_transpose(self) -> "PolyMatrix":
        """q with q(conj(z)) equal to the conjugate transpose of self(z)."""
        return PolyMatrix(
            [[self.entries[i][j].conjugate_coeffs() for i in range(self.rows)] for j in range(self.cols)]
        )

    def scale(self, s) -> "PolyMatrix":
        return PolyMatrix([[e * s for e in row] for row in self.entries])

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return PolyMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self + other.scale(-1)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Poly()
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def evaluate(self, z: complex) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = e.evaluate(z)
        return out

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at a 1d array of points, returning shape (len, rows, cols)."""
        pts = np.asarray(points, dtype=complex).ravel()
        deg = max((e.degree for row in self.entries for e in row), default=-1)
        out = np.zeros((pts.size, self.rows, self.cols), dtype=complex)
        if deg < 0:
            return out
        coeff = np.zeros((deg + 1, self.rows, self.cols), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                for m, c in enumerate(e.coeffs):
                    coeff[m, i, j] = c.to_complex()
        for m in range(deg, -1, -1):
            out = out * pts[:, None, None] + coeff[m]
        return out

    def evaluate_exact(self, c: GaussianRational) -> list[list[GaussianRational]]:
        return [[e.evaluate_exact(c) for e in row] for row in self.entries]

    def det(self) -> Poly:
        """Exact determinant by fraction free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non square matrix")
        n = self.rows
        m = [list(row) for row in self.entries]
        sign = 1
        prev = Poly.one()
        for k in range(n - 1):
            if m[k][k].is_zero:
                for r in range(k + 1, n):
                    if not m[r][k].is_zero:
                        m[k], m[r] = m[r], m[k]
                        sign = -sign
                        break
                else:
                    return Poly()
            pivot = m[k][k]
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]).exact_div(prev)
                m[i][k] = Poly()
            prev = pivot
        return m[n - 1][n - 1] if sign == 1 else -m[n - 1][n - 1]

    def to_coeff_lists(self) -> list[list[list[list[int]]]]:
        """Entries as lists of [re_num, re_den, im_num, im_den] coefficients."""
        return [
            [
                [
                    [c.re.numerator, c.re.denominator, c.im.numerator, c.im.denominator]
                    for c in e.coeffs
                ]
                for e in row
            ]
            for row in self.entries
        ]

    @classmethod
    def from_coeff_lists(cls, rows: Sequence[Sequence[Sequence]]) -> "PolyMatrix":
        out = []
        for row in rows:
            out_row = []
            for entry in row:
                coeffs = []
                for c in entry:
                    if len(c) != 4:
                        raise ValueError(
                            "coefficient must be [re_num, re_den, im_num, im_den]"
                        )
                    coeffs.append(
                        GaussianRational(Fraction(c[0], c[1]), Fraction(c[2], c[3]))
                    )
                out_row.append(Poly(coeffs))
            out.append(out_row)
        return cls(out)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols})"


def _entry_as_poly(e) -> Poly:
    """Matrix entry coercion: a list or tuple is an ascending coefficient list.

    Individual coefficients may still be (re, im) pairs; a constant complex
    entry is spelled GaussianRational(re, im) or [(re, im)].
    """
    if isinstance(e, Poly):
        return e
    if isinstance(e, (list, tuple)):
        return Poly(e)
    return _as_poly(_as_scalar(e))


class RationalMatrix:
    """A matrix of rational functions, mainly for dual frames."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        rows = tuple(tuple(_as_rational(e) for e in row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("RationalMatrix needs at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged rows in RationalMatrix")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", width)

    def __setattr__(self, name, value):
        raise AttributeError("RationalMatrix is immutable")

    @classmethod
    def from_poly_matrix(cls, m: PolyMatrix) -> "RationalMatrix":
        return cls([[RationalFunc(e) for e in row] for row in m.entries])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def entry(self, i: int, j: int) -> RationalFunc:
        return self.entries[i][j]

    def evaluate(self, z: complex) -> np.ndarray:
        out = np.empty((self.rows, self.cols), dtype=complex)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[i, j] = e.evaluate(z)
        return out

    def __matmul__(self, other) -> "RationalMatrix":
        if isinstance(other, PolyMatrix):
            other = RationalMatrix.from_poly_matrix(other)
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = RationalFunc(Poly())
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return RationalMatrix(out)

    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        one, zero = RationalFunc(Poly.one()), RationalFunc(Poly())
        return all(
            self.entries[i][j] == (one if i == j else zero)
            for i in range(self.rows)
            for j in range(self.cols)
        )

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols})"


def differentiate(m: PolyMatrix) -> PolyMatrix:
    """Entrywise formal derivative."""
    return m.derivative()


def _require_column(f: PolyMatrix, name: str = "column"):
    if f.cols != 1:
        raise ValueError(f"{name} must have a single column, got {f.cols}")


def factor_zeros(f: PolyMatrix) -> tuple[PolyMatrix, Poly]:
    """Write the column f as g * d with d the monic gcd of the entries.

    The entries of g then have no common zero.  Raises ZeroFunction on an
    identically zero column.
    """
    _require_column(f)
    if f.is_zero:
        raise ZeroFunction("cannot factor an identically zero column")
    d = poly_gcd_many(e for row in f.entries for e in row)
    g = PolyMatrix([[row[0].exact_div(d)] for row in f.entries])
    return g, d


def _maximal_minors(columns: Sequence[PolyMatrix]) -> list[Poly]:
    """All size len(columns) minors of the stacked column matrix."""
    m = PolyMatrix.from_columns(columns)
    size = m.cols
    if size > m.rows:
        return []
    out = []
    for rows_idx in combinations(range(m.rows), size):
        out.append(m.submatrix(rows_idx, range(size)).det())
    return out


def _minor_gcd(columns: Sequence[PolyMatrix]) -> Poly:
    return poly_gcd_many(_maximal_minors(columns))


def minor_gcd(columns: Sequence[PolyMatrix]) -> Poly:
    """Monic gcd of all maximal minors of the stacked columns.

    Equal to 1 exactly when the columns have full rank at every point of
    the plane.  Returns the zero polynomial when there are more columns
    than rows, since there are no maximal minors to take.
    """
    cols = list(columns)
    if not cols:
        raise ValueError("need at least one column")
    for c in cols:
        _require_column(c)
    return _minor_gcd(cols)


def _solve_exact_gaussian(a_rows, rhs):
    """Particular solution of an exact consistent linear system.

    a_rows is a list of rows of GaussianRational, rhs a list of the same
    length.  Free variables are set to zero.  Returns None when the system
    is inconsistent.
    """
    rows = [list(r) + [b] for r, b in zip(a_rows, rhs)]
    ncols = len(a_rows[0]) if a_rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = _GR_ONE / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero:
                factor = rows[i][c]
                rows[i] = [v - factor * w for v, w in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    for i in range(r, len(rows)):
        if not rows[i][ncols].is_zero:
            return None
    x = [_GR_ZERO] * ncols
    for i, c in enumerate(pivots):
        x[c] = rows[i][ncols]
    return x


def _solve_in_span(columns: Sequence[PolyMatrix], f: PolyMatrix) -> list[Poly]:
    """Exact coefficients writing f as a combination of the columns.

    Solved over the rational function field; the result must reduce to
    polynomials, which holds whenever the columns form a constant rank set
    containing f in its span.
    """
    n = f.rows
    j = len(columns)
    a = [[RationalFunc(columns[b].entry(i, 0)) for b in range(j)] for i in range(n)]
    rhs = [RationalFunc(f.entry(i, 0)) for i in range(n)]
    rows = [row + [r] for row, r in zip(a, rhs)]
    pivots = []
    r = 0
    for c in range(j):
        pr = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c]
        rows[r] = [v / inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero:
                factor = rows[i][c]
                rows[i] = [v - factor * w for v, w in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    for i in range(r, len(rows)):
        if not rows[i][j].is_zero:
            raise NotConstantRank("dependent column solve hit an inconsistent system")
    x = [RationalFunc(Poly())] * j
    for i, c in enumerate(pivots):
        x[c] = rows[i][j]
    out = []
    for v in x:
        if not v.is_polynomial:
            raise NotConstantRank(
                "combination coefficients are not polynomial; the base set is not constant rank"
            )
        out.append(v.to_poly())
    return out


def _interpolating_combination(columns, g, modulus):
    """Polynomials b with g congruent to sum(columns[b] * b) mod modulus.

    The linear system couples the coefficients of each b (degree below the
    modulus degree) through multiplication modulo the squarefree modulus.
    Solvability is guaranteed because the columns stay independent at every
    zero of the modulus while g falls in their span there.
    """
    n = g.rows
    j = len(columns)
    dr = modulus.degree
    # unknown ordering: b[beta] coefficient m at index beta * dr + m
    a_rows = []
    rhs = []
    for i in range(n):
        red_cols = []
        for b in range(j):
            base = columns[b].entry(i, 0)
            for m in range(dr):
                prod = (base * Poly([_GR_ZERO] * m + [_GR_ONE])) % modulus
                cs = list(prod.coeffs) + [_GR_ZERO] * (dr - len(prod.coeffs))
                red_cols.append(cs)
        target = g.entry(i, 0) % modulus
        tc = list(target.coeffs) + [_GR_ZERO] * (dr - len(target.coeffs))
        for s in range(dr):
            a_rows.append([red_cols[u][s] for u in range(j * dr)])
            rhs.append(tc[s])
    sol = _solve_exact_gaussian(a_rows, rhs)
    if sol is None:
        raise NotConstantRank("interpolation system is inconsistent")
    return [Poly(sol[b * dr : (b + 1) * dr]) for b in range(j)]


def _adjoin_one(columns: list[PolyMatrix], f: PolyMatrix):
    """Express f over the constant rank set, extending the set if needed.

    Returns ("dependent", coeffs) with len(columns) polynomial coefficients,
    or ("independent", new_column, coeffs, factor) meaning
    f = sum(columns * coeffs) + new_column * factor and the extended set is
    again constant rank, certified exactly.
    """
    j = len(columns)
    if f.is_zero:
        return "dependent", [Poly()] * j
    if j >= f.rows or all(m.is_zero for m in _maximal_minors(columns + [f])):
        return "dependent", _solve_in_span(columns, f)
    g, d = factor_zeros(f)
    coeffs = [Poly()] * j
    prefix = d
    e = _minor_gcd(columns + [g])
    cap = e.degree + 1
    passes = 0
    while e.degree > 0:
        if passes >= cap:
            raise NotConstantRank(
                "constant rank correction loop exceeded the zero order cap"
            )
        passes += 1
        modulus = e.squarefree_part()
        bs = _interpolating_combination(columns, g, modulus)
        h = g
        for b, col in zip(bs, columns):
            h = h - col.scale(b)
        if h.is_zero:
            raise NotConstantRank("correction loop collapsed a rank increasing column")
        g, dprime = factor_zeros(h)
        for i, b in enumerate(bs):
            coeffs[i] = coeffs[i] + prefix * b
        prefix = prefix * dprime
        e = _minor_gcd(columns + [g])
    return "independent", g, coeffs, prefix


def adjoin_columns(
    base: Sequence[PolyMatrix], new: Sequence[PolyMatrix]
) -> tuple[list[PolyMatrix], list[list[Poly]]]:
    """Adjoin columns to a constant rank set, keeping it constant rank.

    Returns the extended set and, for every adjoined input column, its
    polynomial coefficients over the extended set (padded with zeros for
    columns introduced later).  The base set is trusted to be constant rank.
    """
    columns = list(base)
    raw = []
    for f in new:
        _require_column(f)
        result = _adjoin_one(columns, f)
        if result[0] == "dependent":
            raw.append(list(result[1]))
        else:
            _, g, coeffs, prefix = result
            columns.append(g)
            raw.append(list(coeffs) + [prefix])
    total = len(columns)
    coeff_cols = [cs + [Poly()] * (total - len(cs)) for cs in raw]
    return columns, coeff_cols


def constant_rank_reduce(
    fs: Sequence[PolyMatrix],
) -> tuple[list[PolyMatrix], RationalMatrix]:
    """Replace columns by a constant rank set with the same span.

    Returns (gs, d) with every f equal to the combination of gs by the
    matching column of d.  The output set is certified exactly: the monic
    gcd of its maximal minors is 1.  d is upper triangular whenever the
    leading columns already carry the rank.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one column")
    for f in fs:
        _require_column(f)
    if all(f.is_zero for f in fs):
        raise ZeroFunction("all columns are identically zero")
    gs, coeff_cols = adjoin_columns([], fs)
    cert = _minor_gcd(gs)
    if cert != Poly.one():
        raise NotConstantRank(f"certificate gcd is {cert!r}, expected 1")
    d = RationalMatrix(
        [[RationalFunc(coeff_cols[a][b]) for a in range(len(fs))] for b in range(len(gs))]
    )
    return gs, d


def rank_complete(gs: Sequence[PolyMatrix], n: int) -> list[PolyMatrix]:
    """Columns completing a constant rank set to a constant rank n frame.

    The completed square frame has a determinant that is a nonzero
    constant, which is asserted exactly.
    """
    gs = list(gs)
    if not gs:
        raise ValueError("need at least one column")
    k = len(gs)
    if any(g.rows != n for g in gs):
        raise ValueError("column height does not match the ambient dimension")
    if k == n:
        raise AlreadyFull(f"set already spans C^{n}")
    if k > n:
        raise ValueError("more columns than the ambient dimension")
    if _minor_gcd(gs) != Poly.one():
        raise NotConstantRank("base set is not constant rank")
    origin = GaussianRational()
    basis_rows = [[g.entry(i, 0).evaluate_exact(origin) for g in gs] for i in range(n)]
    chosen = []
    columns = list(gs)
    for i in range(n):
        if len(columns) == n:
            break
        candidate_rows = [
            row + [(_GR_ONE if r == i else _GR_ZERO)] for r, row in enumerate(basis_rows)
        ]
        if _exact_rank(candidate_rows) <= _exact_rank(basis_rows):
            continue
        unit = PolyMatrix([[Poly.one() if r == i else Poly.zero()] for r in range(n)])
        result = _adjoin_one(columns, unit)
        if result[0] != "independent":
            raise NotConstantRank("completion candidate unexpectedly dependent")
        g_new = result[1]
        columns.append(g_new)
        chosen.append(g_new)
        basis_rows = [
            row + [g_new.entry(r, 0).evaluate_exact(origin)] for r, row in enumerate(basis_rows)
        ]
    if len(columns) != n:
        raise NotConstantRank("failed to complete to a full frame")
    full_det = PolyMatrix.from_columns(columns).det()
    if full_det.degree != 0:
        raise NotConstantRank(f"completed frame determinant {full_det!r} is not constant")
    return chosen


def _exact_rank(rows) -> int:
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    for c in range(ncols):
        pr = next((i for i in range(rank, len(m)) if not m[i][c].is_zero), None)
        if pr is None:
            continue
        m[rank], m[pr] = m[pr], m[rank]
        inv = _GR_ONE / m[rank][c]
        m[rank] = [v * inv for v in m[rank]]
        for i in range(len(m)):
            if i != rank and not m[i][c].is_zero:
                factor = m[i][c]
                m[i] = [v - factor * w for v, w in zip(m[i], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def dual_frame(fs: Sequence[PolyMatrix]) -> RationalMatrix:
    """Rows of the exact inverse of a full polynomial frame.

    Row i pairs to 1 against column i and to 0 against the others.  Raises
    SingularFrame when the determinant vanishes identically; a determinant
    with isolated zeros yields rational rows with poles there.
    """
    fs = list(fs)
    n = len(fs)
    for f in fs:
        _require_column(f)
    if any(f.rows != n for f in fs):
        raise ValueError("need n columns of height n")
    frame = PolyMatrix.from_columns(fs)
    det = frame.det()
    if det.is_zero:
        raise SingularFrame("frame determinant vanishes identically")
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            # inverse entry (i, j) is the (j, i) cofactor over the determinant
            minor_rows = [r for r in range(n) if r != j]
            minor_cols = [c for c in range(n) if c != i]
            minor = frame.submatrix(minor_rows, minor_cols).det() if n > 1 else Poly.one()
            sign = 1 if (i + j) % 2 == 0 else -1
            row.append(RationalFunc(minor if sign == 1 else -minor, det))
        rows.append(row)
    return RationalMatrix(rows)
