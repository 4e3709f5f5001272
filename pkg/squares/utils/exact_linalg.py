"""
Exact integer and rational linear algebra.

Everything here runs on Python ints and fractions.Fraction; nothing is ever
rounded. Matrices are small (at most a few dozen rows), so clarity wins over
asymptotics, except for the incremental helpers at the bottom which sit in
the hot loops of the subset and partition searches.
"""

import logging
import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import isprime, nextprime

from squares.exceptions import ValidationError

logger = logging.getLogger(__name__)

Rational = Fraction


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix stored row-major."""

    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValidationError(
                f"IntMatrix expects {self.rows}x{self.cols}={self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        data = [tuple(int(v) for v in row) for row in rows]
        if cols is None:
            cols = len(data[0]) if data else 0
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ValidationError(f"row {i} has {len(row)} entries, expected {cols}")
        return cls(len(data), cols, tuple(v for row in data for v in row))

    @classmethod
    def identity(cls, size: int) -> "IntMatrix":
        return cls.from_rows([[int(i == j) for j in range(size)] for i in range(size)], size)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> List[List[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def select_rows(self, indices: Iterable[int]) -> "IntMatrix":
        return IntMatrix.from_rows([self.row(i) for i in indices], self.cols)

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(
            [[self[i, j] for i in range(self.rows)] for j in range(self.cols)], self.rows
        )

    def multiply_vector(self, vector: Sequence) -> List:
        if len(vector) != self.cols:
            raise ValidationError(f"vector of length {len(vector)} does not match {self.cols} columns")
        return [sum(a * x for a, x in zip(self.row(i), vector)) for i in range(self.rows)]

    def to_rational(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, tuple(Fraction(v) for v in self.entries))


@dataclass(frozen=True)
class RatMatrix:
    """Dense rational matrix stored row-major."""

    rows: int
    cols: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValidationError(
                f"RatMatrix expects {self.rows}x{self.cols}={self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], cols: Optional[int] = None) -> "RatMatrix":
        data = [tuple(Fraction(v) for v in row) for row in rows]
        if cols is None:
            cols = len(data[0]) if data else 0
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ValidationError(f"row {i} has {len(row)} entries, expected {cols}")
        return cls(len(data), cols, tuple(v for row in data for v in row))

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> List[List[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.entries)


# -----------------------------
# Ranks and normal forms
# -----------------------------
def _bareiss_rank(rows: List[List[int]], ncols: int) -> int:
    """Fraction-free elimination; every intermediate entry is a minor of the input."""
    a = [list(r) for r in rows]
    nrows = len(a)
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        pivot = next((i for i in range(rank, nrows) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        p = a[rank][col]
        top = a[rank]
        for i in range(rank + 1, nrows):
            row = a[i]
            f = row[col]
            for j in range(col + 1, ncols):
                row[j] = (p * row[j] - f * top[j]) // prev
            row[col] = 0
        prev = p
        rank += 1
    return rank


def rank_over_rationals(m: IntMatrix) -> int:
    """
    Rank of an integer matrix over Q.

    Args:
        m: The matrix

    Returns:
        The rank, computed by Bareiss elimination (no fractions are formed)
    """
    return _bareiss_rank(m.to_rows(), m.cols)


def determinant(m: IntMatrix) -> int:
    """Exact determinant of a square integer matrix via Bareiss elimination."""
    if m.rows != m.cols:
        raise ValidationError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    if n == 0:
        return 1
    a = m.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        pivot = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot is None:
            return 0
        if pivot != k:
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        p = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (p * a[i][j] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = p
    return sign * a[n - 1][n - 1]


def hermite_normal_form(m: IntMatrix) -> IntMatrix:
    """
    Row-style Hermite normal form.

    The first nonzero entry of each row is positive and strictly to the right
    of the one above it; entries above a pivot lie in [0, pivot). Zero rows
    are kept at the bottom so the shape is unchanged.

    Args:
        m: The matrix

    Returns:
        The unique HNF of the row lattice of m
    """
    a = m.to_rows()
    nrows, ncols = m.rows, m.cols
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        found = False
        while True:
            nonzero = [i for i in range(r, nrows) if a[i][col] != 0]
            if not nonzero:
                break
            found = True
            piv = min(nonzero, key=lambda i: abs(a[i][col]))
            a[r], a[piv] = a[piv], a[r]
            clean = True
            for i in range(r + 1, nrows):
                if a[i][col]:
                    q = a[i][col] // a[r][col]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    if a[i][col]:
                        clean = False
            if clean:
                break
        if not found:
            continue
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
        p = a[r][col]
        for i in range(r):
            q = a[i][col] // p
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
    return IntMatrix.from_rows(a, ncols)


def hnf_pivots(h: IntMatrix) -> List[int]:
    """First nonzero entry of every nonzero row of a matrix in echelon form."""
    pivots = []
    for i in range(h.rows):
        lead = next((v for v in h.row(i) if v != 0), None)
        if lead is not None:
            pivots.append(lead)
    return pivots


def _require_prime(p: int) -> None:
    if isinstance(p, bool) or not isinstance(p, numbers.Integral) or not isprime(p):
        raise ValidationError(f"p must be a prime, got {p!r}")


def _rank_mod(rows: List[List[int]], ncols: int, p: int) -> int:
    a = [[v % p for v in row] for row in rows]
    nrows = len(a)
    rank = 0
    for col in range(ncols):
        if rank == nrows:
            break
        pivot = next((i for i in range(rank, nrows) if a[i][col]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        inv = pow(a[rank][col], -1, p)
        top = [(v * inv) % p for v in a[rank]]
        a[rank] = top
        for i in range(rank + 1, nrows):
            f = a[i][col]
            if f:
                a[i] = [(x - f * y) % p for x, y in zip(a[i], top)]
        rank += 1
    return rank


def rank_mod_p(m: IntMatrix, p: int) -> int:
    """
    Rank of m with entries reduced modulo a prime p.

    Raises:
        ValidationError: If p is not prime
    """
    _require_prime(p)
    return _rank_mod(m.to_rows(), m.cols, int(p))


# -----------------------------
# Solving and interpolation
# -----------------------------
def _gauss_jordan(a: List[List[Fraction]]) -> Optional[List[List[Fraction]]]:
    """Reduce the square left block of an augmented matrix to the identity, or None if singular."""
    n = len(a)
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        top = a[col]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], top)]
    return a


def solve_exact(a: RatMatrix, b: Sequence) -> Optional[List[Fraction]]:
    """
    Solve a·x = b exactly.

    Args:
        a: Square rational matrix
        b: Right-hand side

    Returns:
        The unique solution, or None when a is singular

    Raises:
        ValidationError: If a is not square or b has the wrong length
    """
    if a.rows != a.cols:
        raise ValidationError(f"solve_exact needs a square matrix, got {a.rows}x{a.cols}")
    if len(b) != a.rows:
        raise ValidationError(f"right-hand side has length {len(b)}, expected {a.rows}")
    augmented = [list(a.row(i)) + [Fraction(b[i])] for i in range(a.rows)]
    reduced = _gauss_jordan(augmented)
    if reduced is None:
        return None
    return [row[-1] for row in reduced]


def inverse_exact(a: RatMatrix) -> Optional[RatMatrix]:
    """Inverse of a square rational matrix, or None if it is singular."""
    if a.rows != a.cols:
        raise ValidationError(f"inverse_exact needs a square matrix, got {a.rows}x{a.cols}")
    n = a.rows
    augmented = [list(a.row(i)) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    reduced = _gauss_jordan(augmented)
    if reduced is None:
        return None
    return RatMatrix.from_rows([row[n:] for row in reduced], n)


def interpolate_poly(points: Sequence[Tuple[int, Fraction]], degree: int) -> List[Fraction]:
    """
    Exact polynomial interpolation through degree+1 points.

    Args:
        points: (abscissa, value) pairs with distinct abscissae
        degree: Target degree bound

    Returns:
        Coefficients, constant term first

    Raises:
        ValidationError: On a wrong number of points or duplicate abscissae
    """
    if len(points) != degree + 1:
        raise ValidationError(f"need exactly {degree + 1} points for degree {degree}, got {len(points)}")
    xs = [Fraction(x) for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValidationError(f"duplicate abscissae in {sorted(x for x, _ in points)}")

    # Newton divided differences, then expand the Newton basis into monomials
    table = [Fraction(y) for _, y in points]
    n = len(xs)
    newton = [table[0]]
    for level in range(1, n):
        table = [(table[i + 1] - table[i]) / (xs[i + level] - xs[i]) for i in range(n - level)]
        newton.append(table[0])

    coefficients = [Fraction(0)] * n
    basis = [Fraction(1)]
    for k in range(n):
        for i, c in enumerate(basis):
            coefficients[i] += newton[k] * c
        # basis *= (x - xs[k])
        shifted = [Fraction(0)] + basis
        for i, c in enumerate(basis):
            shifted[i] -= xs[k] * c
        basis = shifted
    return coefficients


def evaluate_poly(coefficients: Sequence[Fraction], x) -> Fraction:
    """Horner evaluation; coefficients are constant term first."""
    value = Fraction(0)
    for c in reversed(coefficients):
        value = value * x + c
    return value


def denominator_lcm_of(values: Iterable[Fraction]) -> int:
    result = 1
    for v in values:
        result = math.lcm(result, Fraction(v).denominator)
    return result


# -----------------------------
# Incremental helpers for the search loops
# -----------------------------
def exact_modulus(rows: Sequence[Sequence[int]], size: int) -> int:
    """
    A prime larger than every k×k minor (k ≤ size) of the given rows.

    Ranks computed modulo this prime agree with ranks over Q, because every
    minor is bounded by Hadamard's inequality.
    """
    norm = max((math.isqrt(sum(v * v for v in row)) + 1 for row in rows), default=1)
    bound = max(norm, 2) ** max(size, 1)
    return int(nextprime(bound))


class ModularSpan:
    """
    Reduced echelon basis of a span over the field with p elements.

    Instances are immutable; with_vector returns a new span so a depth-first
    search can keep one per node without copying on the way back up.
    """

    __slots__ = ('p', 'basis', 'rank')

    def __init__(self, p: int, basis: Optional[Dict[int, Tuple[int, ...]]] = None):
        self.p = p
        self.basis = basis or {}
        self.rank = len(self.basis)

    def reduce(self, vector: Sequence[int]) -> List[int]:
        p = self.p
        v = [x % p for x in vector]
        for col, row in self.basis.items():
            f = v[col]
            if f:
                v = [(x - f * y) % p for x, y in zip(v, row)]
        return v

    def contains(self, vector: Sequence[int]) -> bool:
        return not any(self.reduce(vector))

    def with_vector(self, vector: Sequence[int]) -> "ModularSpan":
        p = self.p
        v = self.reduce(vector)
        col = next((j for j, x in enumerate(v) if x), None)
        if col is None:
            return self
        inv = pow(v[col], -1, p)
        new_row = tuple((x * inv) % p for x in v)
        basis = {}
        for c, row in self.basis.items():
            f = row[col]
            if f:
                row = tuple((x - f * y) % p for x, y in zip(row, new_row))
            basis[c] = row
        basis[col] = new_row
        return ModularSpan(p, basis)


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    return x, y, g


class LatticeEchelon:
    """
    Integer row-echelon basis of the lattice spanned by the vectors added so far.

    The absolute values of the pivots equal the pivots of the lattice's
    Hermite normal form, and the number of rows is the rank over Q.
    """

    __slots__ = ('width', 'rows')

    def __init__(self, width: int, rows: Optional[Dict[int, Tuple[int, ...]]] = None):
        self.width = width
        self.rows = rows or {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def pivots(self) -> List[int]:
        return [abs(row[col]) for col, row in sorted(self.rows.items())]

    def with_vector(self, vector: Sequence[int]) -> "LatticeEchelon":
        rows = dict(self.rows)
        vec = list(vector)
        width = self.width
        for j in range(width):
            if not vec[j]:
                continue
            row = rows.get(j)
            if row is None:
                rows[j] = tuple(vec)
                return LatticeEchelon(width, rows)
            a = row[j]
            b = vec[j]
            if b % a == 0:
                q = b // a
                vec = [x - q * y for x, y in zip(vec, row)]
            else:
                x, y, g = _xgcd(a, b)
                ag = a // g
                mbg = -b // g
                new_row = tuple(x * r + y * v for r, v in zip(row, vec))
                vec = [mbg * r + ag * v for r, v in zip(row, vec)]
                rows[j] = new_row
        return LatticeEchelon(width, rows)
