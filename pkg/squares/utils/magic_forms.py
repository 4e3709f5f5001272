"""
Linear-form systems describing n×n Z-magic squares.

A system Ψ = (ψ_1, …, ψ_t) maps parameters x ∈ Z^d to the t = n² cells of a
magic square, cell by cell in row-major order. For n = 3 and n = 4 the
systems are fixed tables; for n ≥ 5 they are generated from the elephant
skeleton by completing each unit skeleton assignment to a magic square.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from squares.exceptions import MagicSquaresError, ValidationError
from squares.utils.exact_linalg import (
    IntMatrix,
    determinant,
    inverse_exact,
    rank_over_rationals,
)

logger = logging.getLogger(__name__)

# Ψ(a,b,c) for 3×3 squares, cell by cell; a is the centre
MAGIC3_FORMS = (
    (1, 1, 0),
    (1, -1, -1),
    (1, 0, 1),
    (1, -1, 1),
    (1, 0, 0),
    (1, 1, -1),
    (1, 0, -1),
    (1, 1, 1),
    (1, -1, 0),
)
MAGIC3_SKELETON = (5, 1, 3)
MAGIC3_UNIT_POINT = (1, 0, 0)

# Columns are the basis squares carried by skeleton cells 1, 2, 3, 4, 5, 6, 7, 9
MAGIC4_FORMS = (
    (1, 0, 0, 0, 0, 0, 0, 0),
    (0, 1, 0, 0, 0, 0, 0, 0),
    (0, 0, 1, 0, 0, 0, 0, 0),
    (0, 0, 0, 1, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 0, 0),
    (0, 0, 0, 0, 0, 1, 0, 0),
    (0, 0, 0, 0, 0, 0, 1, 0),
    (1, 1, 1, 1, -1, -1, -1, 0),
    (0, 0, 0, 0, 0, 0, 0, 1),
    (1, 0, 0, -1, 1, 0, -1, 1),
    (0, 1, 1, 2, -1, -1, 0, -1),
    (0, 0, 0, 0, 0, 1, 1, -1),
    (0, 1, 1, 1, -1, 0, 0, -1),
    (0, 0, 1, 2, -1, -1, 1, -1),
    (1, 0, -1, -1, 1, 1, -1, 1),
    (0, 0, 0, -1, 1, 0, 0, 1),
)
MAGIC4_SKELETON = (1, 2, 3, 4, 5, 6, 7, 9)


@dataclass(frozen=True)
class LinearForm:
    """A homogeneous linear form; cell_index is its 1-based row-major cell (0 if it has none)."""

    coefficients: Tuple[int, ...]
    cell_index: int = 0

    def __post_init__(self):
        if not any(self.coefficients):
            raise ValidationError(f"linear form for cell {self.cell_index} has all coefficients zero")

    def evaluate(self, x: Sequence):
        if len(x) != len(self.coefficients):
            raise ValidationError(f"point of dimension {len(x)} does not match form of dimension {len(self.coefficients)}")
        return sum(a * v for a, v in zip(self.coefficients, x))

    @property
    def is_trivial(self) -> bool:
        """True for a standard basis vector."""
        return sorted(self.coefficients) == [0] * (len(self.coefficients) - 1) + [1]


@dataclass(frozen=True)
class FormSystem:
    """
    A system of t linear forms in d variables.

    n is None for systems that do not describe magic squares (test polytopes).
    skeleton lists the cells whose forms carry the variables, in variable order.
    """

    forms: Tuple[LinearForm, ...]
    skeleton: Tuple[int, ...] = ()
    unit_point: Optional[Tuple[int, ...]] = None
    n: Optional[int] = None

    def __post_init__(self):
        if not self.forms:
            raise ValidationError("a form system needs at least one form")
        width = len(self.forms[0].coefficients)
        for form in self.forms:
            if len(form.coefficients) != width:
                raise ValidationError(f"form for cell {form.cell_index} has {len(form.coefficients)} coefficients, expected {width}")
        if self.unit_point is not None and len(self.unit_point) != width:
            raise ValidationError(f"unit point has dimension {len(self.unit_point)}, expected {width}")
        if len(set(self.skeleton)) != len(self.skeleton):
            raise ValidationError(f"skeleton cells are not distinct: {self.skeleton}")

    @classmethod
    def from_matrix(
        cls,
        rows: Sequence[Sequence[int]],
        skeleton: Sequence[int] = (),
        unit_point: Optional[Sequence[int]] = None,
        n: Optional[int] = None,
    ) -> "FormSystem":
        forms = tuple(LinearForm(tuple(int(v) for v in row), i + 1) for i, row in enumerate(rows))
        return cls(
            forms=forms,
            skeleton=tuple(int(c) for c in skeleton),
            unit_point=None if unit_point is None else tuple(int(v) for v in unit_point),
            n=n,
        )

    @property
    def d(self) -> int:
        return len(self.forms[0].coefficients)

    @property
    def t(self) -> int:
        return len(self.forms)

    @cached_property
    def rows(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(form.coefficients for form in self.forms)

    def coefficient_matrix(self) -> IntMatrix:
        return IntMatrix.from_rows(self.rows, self.d)

    def evaluate(self, x: Sequence) -> List:
        if len(x) != self.d:
            raise ValidationError(f"point of dimension {len(x)} does not match system dimension {self.d}")
        return [sum(a * v for a, v in zip(row, x)) for row in self.rows]

    def form_index(self, cell: int) -> int:
        """0-based position of the form describing a 1-based cell."""
        for i, form in enumerate(self.forms):
            if form.cell_index == cell:
                return i
        raise ValidationError(f"no form describes cell {cell}")

    @cached_property
    def skeleton_form_indices(self) -> Tuple[int, ...]:
        return tuple(self.form_index(cell) for cell in self.skeleton)

    @property
    def trivial_cells(self) -> Tuple[int, ...]:
        return tuple(form.cell_index for form in self.forms if form.is_trivial)

    @cached_property
    def _skeleton_inverse(self) -> Tuple[Tuple[int, ...], ...]:
        if len(self.skeleton) != self.d:
            raise ValidationError(f"skeleton has {len(self.skeleton)} cells, a box needs {self.d}")
        inverse = inverse_exact(self.coefficient_matrix().select_rows(self.skeleton_form_indices).to_rational())
        if inverse is None or not inverse.is_integral():
            raise ValidationError("skeleton forms are not a unimodular block")
        return tuple(tuple(int(v) for v in row) for row in inverse.to_rows())

    def variable_box(self, N: int) -> Tuple[List[int], List[int]]:
        """
        Integer bounds on every variable over K(N).

        Each variable is an integer combination of the skeleton forms, and each
        skeleton form lies in [0, N].
        """
        lows, highs = [], []
        for row in self._skeleton_inverse:
            lows.append(N * sum(v for v in row if v < 0))
            highs.append(N * sum(v for v in row if v > 0))
        return lows, highs

    def as_square(self, values: Sequence) -> List[List]:
        if self.n is None or len(values) != self.n * self.n:
            raise ValidationError(f"cannot arrange {len(values)} values as a square of side {self.n}")
        n = self.n
        return [list(values[r * n:(r + 1) * n]) for r in range(n)]

    def to_dict(self) -> Dict:
        return {
            'n': self.n,
            'd': self.d,
            't': self.t,
            'skeleton': list(self.skeleton),
            'unit_point': None if self.unit_point is None else list(self.unit_point),
            'coefficients': [list(row) for row in self.rows],
        }

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON form; any change to the basis changes the hash."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class ConstraintMatrix:
    """The 2n×n² matrix A with A·x = 0 exactly for magic squares x."""

    n: int
    matrix: IntMatrix
    labels: Tuple[str, ...] = field(default=())

    def annihilates(self, square_values: Sequence[int]) -> bool:
        return not any(self.matrix.multiply_vector(square_values))


def _require_side(n: int, minimum: int = 3) -> None:
    if not isinstance(n, int) or n < minimum:
        raise ValidationError(f"side length must be an integer >= {minimum}, got {n!r}")


# -----------------------------
# Constraint matrix and certificates
# -----------------------------
def build_constraint_matrix(n: int) -> ConstraintMatrix:
    """
    Rows in order: row i vs row i+1, column i vs column i+1, main diagonal vs
    anti-diagonal, first column vs main diagonal.
    """
    _require_side(n)
    size = n * n
    rows, labels = [], []
    for i in range(n - 1):
        row = [0] * size
        for c in range(n):
            row[i * n + c] += 1
            row[(i + 1) * n + c] -= 1
        rows.append(row)
        labels.append(f"A{i + 1}")
    for i in range(n - 1):
        row = [0] * size
        for r in range(n):
            row[r * n + i] += 1
            row[r * n + i + 1] -= 1
        rows.append(row)
        labels.append(f"B{i + 1}")
    row = [0] * size
    for k in range(n):
        row[k * n + k] += 1
        row[k * n + (n - 1 - k)] -= 1
    rows.append(row)
    labels.append("C")
    row = [0] * size
    for k in range(n):
        row[k * n] += 1
        row[k * n + k] -= 1
    rows.append(row)
    labels.append("D")
    return ConstraintMatrix(n=n, matrix=IntMatrix.from_rows(rows, size), labels=tuple(labels))


def certificate_vectors(n: int) -> List[Tuple[int, ...]]:
    """
    2n squares; square k satisfies the first k-1 rows of A and violates row k.

    Type a_i is ones on the first i rows, type b_i ones on the first i
    columns, c is ones off the main diagonal and d is ones on both diagonals.
    """
    _require_side(n)
    vectors = []
    for i in range(1, n):
        vectors.append(tuple(int(r < i) for r in range(n) for _ in range(n)))
    for i in range(1, n):
        vectors.append(tuple(int(c < i) for _ in range(n) for c in range(n)))
    vectors.append(tuple(int(r != c) for r in range(n) for c in range(n)))
    vectors.append(tuple(int(r == c) + int(r + c == n - 1) for r in range(n) for c in range(n)))
    return vectors


# -----------------------------
# Elephant skeleton (n >= 5)
# -----------------------------
def elephant_skeleton(n: int) -> Tuple[int, ...]:
    """Skeleton cells (1-based, row-major) in variable order."""
    _require_side(n, 5)
    cells = [c + 1 for c in range(n)]
    for r in range(1, n - 2):
        cells.extend(r * n + c + 1 for c in range(n - 1))
    skipped = {1, n - 3, n - 1}
    cells.extend((n - 2) * n + c + 1 for c in range(n) if c not in skipped)
    return tuple(cells)


def complete_skeleton(n: int, values: Sequence[int]) -> List[List[int]]:
    """
    The unique Z-magic square carrying the given skeleton values.

    Cells are filled in a fixed order: last cells of rows 2..n-2 from row
    sums, most of the last row from column sums, the corner from the main
    diagonal, (n-1, 2) from the anti-diagonal, then (n-1, n), (n, 2),
    (n-1, n-2) and finally (n, n-2), which is computed from its column and
    checked against its row.

    Args:
        n: Side length, at least 5
        values: d = n² - 2n integers in skeleton order

    Returns:
        The completed square as a list of rows
    """
    _require_side(n, 5)
    d = n * n - 2 * n
    if len(values) != d:
        raise ValidationError(f"expected {d} skeleton values for n={n}, got {len(values)}")

    grid: List[List[Optional[int]]] = [[None] * n for _ in range(n)]
    for cell, value in zip(elephant_skeleton(n), values):
        r, c = divmod(cell - 1, n)
        grid[r][c] = int(value)

    S = sum(grid[0])
    last = n - 1

    def row_rest(r, c):
        return S - sum(grid[r][k] for k in range(n) if k != c)

    def col_rest(r, c):
        return S - sum(grid[k][c] for k in range(n) if k != r)

    for r in range(1, n - 2):
        grid[r][last] = row_rest(r, last)
    for c in range(n - 1):
        if c not in (1, n - 3):
            grid[last][c] = col_rest(last, c)
    grid[last][last] = S - sum(grid[k][k] for k in range(n - 1))
    grid[n - 2][1] = S - sum(grid[k][n - 1 - k] for k in range(n) if k != n - 2)
    grid[n - 2][last] = col_rest(n - 2, last)
    grid[last][1] = col_rest(last, 1)
    grid[n - 2][n - 3] = row_rest(n - 2, n - 3)
    grid[last][n - 3] = col_rest(last, n - 3)

    if grid[last][n - 3] != row_rest(last, n - 3):
        raise MagicSquaresError(f"skeleton completion is inconsistent for n={n}: {values}")
    return grid  # type: ignore[return-value]


# -----------------------------
# Systems
# -----------------------------
def build_system(n: int) -> FormSystem:
    """
    The Z-basis linear-form system for n×n magic squares.

    Args:
        n: Side length, at least 3

    Returns:
        FormSystem with t = n² forms in d = n² - 2n variables
    """
    _require_side(n)
    if n == 3:
        return FormSystem.from_matrix(MAGIC3_FORMS, MAGIC3_SKELETON, MAGIC3_UNIT_POINT, n=3)
    if n == 4:
        return FormSystem.from_matrix(MAGIC4_FORMS, MAGIC4_SKELETON, (1,) * 8, n=4)

    skeleton = elephant_skeleton(n)
    d = len(skeleton)
    columns = []
    for j in range(d):
        unit = [0] * d
        unit[j] = 1
        square = complete_skeleton(n, unit)
        columns.append([v for row in square for v in row])
    rows = [[columns[j][cell] for j in range(d)] for cell in range(n * n)]
    logger.debug(f"Generated elephant-basis system for n={n} (d={d})")
    return FormSystem.from_matrix(rows, skeleton, (1,) * d, n=n)


def verify_z_basis(system: FormSystem) -> bool:
    """
    True iff the system is a Z-basis parametrisation of n×n magic squares.

    Checks that every coefficient column is magic, that the skeleton forms
    are a unimodular block (for a trivial skeleton: distinct standard basis
    vectors) and that the coefficient matrix has rank d.
    """
    n = system.n
    if n is None or system.t != n * n or system.d != n * n - 2 * n:
        logger.info(f"System shape t={system.t}, d={system.d} does not match a side length")
        return False
    if [form.cell_index for form in system.forms] != list(range(1, n * n + 1)):
        logger.info("Forms are not ordered by cell index")
        return False

    constraint = build_constraint_matrix(n)
    for j in range(system.d):
        column = [row[j] for row in system.rows]
        if not constraint.annihilates(column):
            logger.info(f"Basis square {j + 1} is not magic")
            return False

    if len(system.skeleton) != system.d:
        logger.info(f"Skeleton has {len(system.skeleton)} cells, expected {system.d}")
        return False
    block = system.coefficient_matrix().select_rows(system.skeleton_form_indices)
    if abs(determinant(block)) != 1:
        logger.info("Skeleton forms are not a unimodular block")
        return False

    if rank_over_rationals(system.coefficient_matrix()) != system.d:
        logger.info("Coefficient matrix is rank deficient")
        return False
    return True


def is_magic(square: Sequence[Sequence[int]]) -> bool:
    n = len(square)
    target = sum(square[0])
    lines = [list(row) for row in square]
    lines += [[square[r][c] for r in range(n)] for c in range(n)]
    lines.append([square[k][k] for k in range(n)])
    lines.append([square[k][n - 1 - k] for k in range(n)])
    return all(sum(line) == target for line in lines)


# -----------------------------
# Distinct entries
# -----------------------------
def _siamese(m: int) -> List[List[int]]:
    square = [[0] * m for _ in range(m)]
    r, c = 0, m // 2
    for value in range(1, m * m + 1):
        square[r][c] = value
        nr, nc = (r - 1) % m, (c + 1) % m
        if square[nr][nc]:
            nr, nc = (r + 1) % m, c
        r, c = nr, nc
    return square


def normal_magic_square(n: int) -> List[List[int]]:
    """
    A magic square holding 1..n² exactly once.

    Odd n uses the Siamese walk, n divisible by 4 complements the diagonals of
    every 4×4 block, and n ≡ 2 (mod 4) uses Strachey's four-quadrant method.
    """
    _require_side(n)
    if n % 2 == 1:
        square = _siamese(n)
    elif n % 4 == 0:
        square = [[0] * n for _ in range(n)]
        for r in range(n):
            for c in range(n):
                value = r * n + c + 1
                i, j = r % 4, c % 4
                if i == j or i + j == 3:
                    value = n * n + 1 - value
                square[r][c] = value
    else:
        m = n // 2
        k = (n - 2) // 4
        base = _siamese(m)
        offsets = ((0, 2), (3, 1))  # quadrant offsets in units of m²: [[A, C], [D, B]]
        square = [[0] * n for _ in range(n)]
        for qr in range(2):
            for qc in range(2):
                for r in range(m):
                    for c in range(m):
                        square[qr * m + r][qc * m + c] = base[r][c] + offsets[qr][qc] * m * m
        middle = m // 2
        for r in range(m):
            swap_cols = list(range(k))
            if r == middle:
                swap_cols = list(range(1, k + 1))
            for c in swap_cols:
                square[r][c], square[r + m][c] = square[r + m][c], square[r][c]
            for c in range(n - k + 1, n):
                square[r][c], square[r + m][c] = square[r + m][c], square[r][c]
    if not is_magic(square):
        raise MagicSquaresError(f"normal magic square construction failed for n={n}")
    return square


def pairwise_independence_check(n: int, method: str = 'witness') -> bool:
    """
    Every equation x_i = x_j is independent of the 2n magic constraints.

    With method='witness' a normal magic square (all entries distinct, A·x = 0)
    certifies every pair at once; method='rank' checks rank(A + row) = 2n + 1
    pair by pair.
    """
    _require_side(n)
    constraint = build_constraint_matrix(n)
    size = n * n
    if method == 'witness':
        values = [v for row in normal_magic_square(n) for v in row]
        return constraint.annihilates(values) and len(set(values)) == size
    if method == 'rank':
        base = constraint.matrix.to_rows()
        target = 2 * n + 1
        for i in range(size):
            for j in range(i + 1, size):
                extra = [0] * size
                extra[i], extra[j] = 1, -1
                if rank_over_rationals(IntMatrix.from_rows(base + [extra], size)) != target:
                    logger.info(f"x_{i + 1} = x_{j + 1} is implied by the magic constraints")
                    return False
        return True
    raise ValidationError(f"unknown method {method!r}; expected 'witness' or 'rank'")
