"""
Ehrhart quasipolynomials of K(N).

E(N) counts the integer points of K(N). For a rational polytope it is a
quasipolynomial of degree d whose period divides the denominator lcm of the
vertices. Reciprocity gives E(−N) = (−1)^d · E°(N), and because every form is
1 at the unit point, the interior count is E°(N) = E(N − 2). Negative
abscissae therefore cost no extra counting, which roughly halves the
largest direct count an interpolation needs.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from squares.cache_utils import cache_counts
from squares.exceptions import BudgetExceeded, MagicSquaresError, ValidationError
from squares.utils.exact_linalg import evaluate_poly, interpolate_poly
from squares.utils.lattice_walk import ValueFilter, count_lattice_points, iterate_lattice_points
from squares.utils.magic_forms import FormSystem

logger = logging.getLogger(__name__)

DIRECT = 'direct'
RECIPROCITY = 'reciprocity'


@dataclass(frozen=True)
class CountEntry:
    N: int
    count: int
    provenance: str = DIRECT


@dataclass
class CountTable:
    """Exact counts E(N), each tagged with how it was obtained."""

    n: Optional[int]
    entries: Dict[int, CountEntry] = field(default_factory=dict)

    def add(self, N: int, count: int, provenance: str = DIRECT) -> None:
        self.entries[N] = CountEntry(N, int(count), provenance)

    def get(self, N: int) -> Optional[int]:
        entry = self.entries.get(N)
        return None if entry is None else entry.count

    def sorted_entries(self) -> List[CountEntry]:
        return [self.entries[N] for N in sorted(self.entries)]

    def validate(self) -> None:
        """
        Raises:
            MagicSquaresError: If E(0) ≠ 1 or counts decrease for N ≥ 0
        """
        if 0 in self.entries and self.entries[0].count != 1:
            raise MagicSquaresError(f"E(0) must be 1, got {self.entries[0].count}")
        previous = None
        for entry in self.sorted_entries():
            if entry.N < 0:
                continue
            if previous is not None and entry.count < previous.count:
                raise MagicSquaresError(f"counts decrease from E({previous.N})={previous.count} to E({entry.N})={entry.count}")
            previous = entry

    def to_json_lines(self) -> str:
        return "\n".join(
            json.dumps({'n': self.n, 'N': e.N, 'count': e.count, 'provenance': e.provenance}) for e in self.sorted_entries()
        )

    @classmethod
    def from_json_lines(cls, text: str) -> "CountTable":
        table = None
        for line in text.splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if table is None:
                table = cls(n=record.get('n'))
            table.add(int(record['N']), int(record['count']), record.get('provenance', DIRECT))
        return table or cls(n=None)


@dataclass(frozen=True)
class Quasipolynomial:
    """coefficients[r] holds the constant-first coefficients used when N ≡ r (mod period)."""

    degree: int
    period: int
    coefficients: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.coefficients) != self.period:
            raise ValidationError(f"expected {self.period} residue classes, got {len(self.coefficients)}")
        for r, branch in enumerate(self.coefficients):
            if len(branch) != self.degree + 1:
                raise ValidationError(f"residue {r} has {len(branch)} coefficients, expected {self.degree + 1}")

    def evaluate(self, N: int) -> Fraction:
        return evaluate_poly(self.coefficients[N % self.period], N)

    def __call__(self, N: int) -> Fraction:
        return self.evaluate(N)

    def leading_coefficients(self) -> List[Fraction]:
        return [branch[-1] for branch in self.coefficients]


# -----------------------------
# Counting
# -----------------------------
def count_points(system: FormSystem, N: int, jobs: int = 1, use_cache: bool = True) -> int:
    """
    Number of x ∈ Z^d with 0 ≤ ψ_i(x) ≤ N for every form.

    Raises:
        ValidationError: If N is negative
    """
    if N < 0:
        raise ValidationError(f"count_points needs N >= 0, got {N}")
    if not use_cache:
        return count_lattice_points(system, N, jobs)
    return _cached_lattice_count(system, N, jobs)


@cache_counts()
def _cached_lattice_count(system: FormSystem, N: int, jobs: int) -> int:
    return count_lattice_points(system, N, jobs)


def _require_unit_point(system: FormSystem) -> None:
    if system.unit_point is None or any(v != 1 for v in system.evaluate(system.unit_point)):
        raise ValidationError("the interior shift needs a unit point at which every form equals 1")


def interior_count(system: FormSystem, N: int, jobs: int = 1) -> int:
    """
    Number of integer points with 0 < ψ_i(x) < N for every form.

    Shifting by the unit point turns the open condition into 0 ≤ ψ_i ≤ N − 2.

    Raises:
        ValidationError: If N < 1 or the system has no unit point
    """
    if N < 1:
        raise ValidationError(f"interior_count needs N >= 1, got {N}")
    _require_unit_point(system)
    if N == 1:
        return 0
    return count_points(system, N - 2, jobs)


def enumerate_points(system: FormSystem, N: int, value_filter: Optional[ValueFilter] = None) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """
    Integer points of K(N) in numpy blocks of (points, form values).

    Args:
        system: The form system
        N: Dilation
        value_filter: Optional elementwise mask on form values; a point is
            kept only if every one of its values passes
    """
    if N < 0:
        raise ValidationError(f"enumerate_points needs N >= 0, got {N}")
    return iterate_lattice_points(system, N, value_filter)


def direct_table(system: FormSystem, N_max: int, jobs: int = 1) -> CountTable:
    """Direct counts for every N in 0..N_max."""
    table = CountTable(n=system.n)
    for N in range(N_max + 1):
        table.add(N, count_points(system, N, jobs), DIRECT)
        logger.info(f"E({N}) = {table.get(N)}")
    table.validate()
    return table


# -----------------------------
# Interpolation
# -----------------------------
def _abscissa_cost(x: int, reciprocal: bool) -> Optional[int]:
    """Largest direct N needed to know E(x); -1 when free, None when unavailable."""
    if x >= 0:
        return x
    if not reciprocal:
        return None
    if x == -1:
        return -1
    return -x - 2


def plan_abscissae(degree: int, period: int, reciprocal: bool = True) -> List[List[int]]:
    """
    degree+1 abscissae per residue class, chosen greedily to keep the largest
    direct count small.
    """
    plan = []
    for r in range(period):
        candidates = []
        reach = (degree + 2) * period + 2
        for x in range(-reach, reach + 1):
            if x % period != r:
                continue
            cost = _abscissa_cost(x, reciprocal)
            if cost is not None:
                candidates.append((cost, x))
        candidates.sort()
        plan.append(sorted(x for _, x in candidates[:degree + 1]))
    return plan


def required_values(degree: int, period: int) -> int:
    return (degree + 1) * period


def interpolate_quasipolynomial(
    system: FormSystem,
    period: int,
    jobs: int = 1,
    max_direct_N: Optional[int] = None,
    table: Optional[CountTable] = None,
) -> Quasipolynomial:
    """
    Exact Ehrhart quasipolynomial of degree d and the given period.

    Args:
        system: The form system
        period: A multiple of the true period, usually the vertex denominator lcm
        jobs: Worker threads for the direct counts
        max_direct_N: Largest direct count allowed; defaults to MAGIC_MAX_DIRECT_N
        table: If given, every count used is recorded in it

    Raises:
        BudgetExceeded: If some residue class needs a direct count beyond the budget
    """
    if period < 1:
        raise ValidationError(f"period must be positive, got {period}")
    budget = settings.MAGIC_MAX_DIRECT_N if max_direct_N is None else max_direct_N
    degree = system.d
    reciprocal = system.unit_point is not None
    if reciprocal:
        _require_unit_point(system)
    plan = plan_abscissae(degree, period, reciprocal)
    needed = sorted({_abscissa_cost(x, reciprocal) for xs in plan for x in xs} - {-1})
    if needed and needed[-1] > budget:
        raise BudgetExceeded(
            f"interpolation with period {period} needs direct counts up to N={needed[-1]}, budget is {budget}"
        )
    logger.info(f"Interpolating degree {degree}, period {period}: direct counts for N in 0..{needed[-1] if needed else 0}")

    table = table if table is not None else CountTable(n=system.n)
    for N in needed:
        if table.get(N) is None:
            table.add(N, count_points(system, N, jobs), DIRECT)
            logger.info(f"E({N}) = {table.get(N)}")

    sign = -1 if degree % 2 else 1
    branches = []
    for xs in plan:
        points = []
        for x in xs:
            if x >= 0:
                value = table.get(x)
            elif x == -1:
                value = 0
                table.add(x, 0, RECIPROCITY)
            else:
                value = sign * table.get(-x - 2)
                table.add(x, value, RECIPROCITY)
            points.append((x, Fraction(value)))
        branches.append(tuple(interpolate_poly(points, degree)))
    return Quasipolynomial(degree=degree, period=period, coefficients=tuple(branches))


def volume(qp: Quasipolynomial) -> Fraction:
    """
    The common leading coefficient, which is the volume of K(1).

    Raises:
        MagicSquaresError: If the branches disagree
    """
    leading = set(qp.leading_coefficients())
    if len(leading) != 1:
        raise MagicSquaresError(f"residue branches disagree on the leading coefficient: {sorted(leading)}")
    return leading.pop()


def reciprocity_check(qp: Quasipolynomial, N_values: Iterable[int]) -> List[int]:
    """The N for which qp(−N) ≠ (−1)^d · qp(N − 2)."""
    sign = -1 if qp.degree % 2 else 1
    return [N for N in N_values if qp.evaluate(-N) != sign * qp.evaluate(N - 2)]


def out_of_sample_check(system: FormSystem, qp: Quasipolynomial, N_values: Sequence[int], jobs: int = 1) -> List[int]:
    """The N for which qp(N) differs from a direct count."""
    return [N for N in N_values if qp.evaluate(N) != count_points(system, N, jobs)]
