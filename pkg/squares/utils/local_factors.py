"""
Local factors β_p of the singular series.

β_p = E_{m ∈ Z_p^d} ∏_i Λ_p(ψ_i(m)) where Λ_p(0) = 0 and Λ_p(b) = p/(p−1)
otherwise, so β_p = (count/p^d)·(p/(p−1))^t with count the number of m at
which no form vanishes mod p. Inclusion-exclusion over subsets S of forms
gives count = Σ_S (−1)^|S| p^(d − rank_p(S)).

Above the stability threshold every mod-p rank equals the rank over Q, so
the count is one integer polynomial in p.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from sympy import isprime, nextprime

from squares.exceptions import GuardViolation, ValidationError
from squares.utils.exact_linalg import LatticeEchelon, ModularSpan, evaluate_poly
from squares.utils.magic_forms import FormSystem

logger = logging.getLogger(__name__)

SUBSET_MAX_FORMS = 16
DIRECT_MAX_POINTS = 10 ** 7
DIRECT_CHUNK = 1 << 18


@dataclass(frozen=True)
class RankSpectrum:
    """
    counts[k][r] is the number of k-subsets of forms of rank r.

    modulus is None for ranks over Q. max_pivot is the largest HNF pivot
    over all subsets (Q only). Instances are immutable; rank_spectrum hands
    the same cached object to every caller.
    """

    t: int
    d: int
    counts: Mapping[int, Mapping[int, int]] = field(default_factory=lambda: MappingProxyType({}))
    modulus: Optional[int] = None
    max_pivot: Optional[int] = None

    @classmethod
    def from_tallies(
        cls, t: int, d: int, tallies: Counter, modulus: Optional[int] = None, max_pivot: Optional[int] = None
    ) -> "RankSpectrum":
        """Build from a Counter keyed by (size, rank)."""
        nested: Dict[int, Dict[int, int]] = {}
        for (size, rank), count in sorted(tallies.items()):
            nested.setdefault(size, {})[rank] = count
        counts = MappingProxyType({size: MappingProxyType(by_rank) for size, by_rank in nested.items()})
        return cls(t=t, d=d, counts=counts, modulus=modulus, max_pivot=max_pivot)

    def at(self, size: int) -> Dict[int, int]:
        return dict(sorted(self.counts.get(size, {}).items()))

    def total(self, size: int) -> int:
        return sum(self.counts.get(size, {}).values())

    def as_dict(self) -> Dict[int, Dict[int, int]]:
        return {size: dict(by_rank) for size, by_rank in self.counts.items()}


@dataclass(frozen=True)
class StableLocalPolynomial:
    """count(p) = Σ coefficients[k]·p^k for every prime p ≥ p0."""

    coefficients: Tuple[int, ...]
    p0: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, p: int) -> int:
        return int(evaluate_poly(self.coefficients, p))

    def descending(self) -> List[int]:
        return list(reversed(self.coefficients))

    def __str__(self) -> str:
        terms = []
        for power in range(self.degree, -1, -1):
            c = self.coefficients[power]
            if c == 0:
                continue
            sign = '-' if c < 0 else '+'
            magnitude = abs(c)
            if power == 0:
                body = str(magnitude)
            else:
                body = ('' if magnitude == 1 else str(magnitude)) + ('p' if power == 1 else f'p^{power}')
            terms.append((sign, body))
        if not terms:
            return '0'
        first_sign, first_body = terms[0]
        text = ('-' if first_sign == '-' else '') + first_body
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text


@dataclass(frozen=True)
class LocalFactor:
    p: int
    nonvanishing_count: int
    beta: Fraction


def _require_prime(p: int) -> None:
    if isinstance(p, bool) or not isprime(p):
        raise ValidationError(f"{p} is not a prime")


def _guard(system: FormSystem) -> None:
    if system.t > SUBSET_MAX_FORMS:
        raise GuardViolation(
            f"subset inclusion-exclusion is limited to t <= {SUBSET_MAX_FORMS} forms (got t={system.t}); "
            "use direct_nonvanishing_count for small p"
        )


# -----------------------------
# Subset walks
# -----------------------------
@lru_cache(maxsize=8)
def rank_spectrum(system: FormSystem) -> RankSpectrum:
    """
    Rank over Q of every nonempty subset of forms, with the largest HNF pivot.

    Raises:
        GuardViolation: If t > 16
    """
    _guard(system)
    rows = system.rows
    t, d = system.t, system.d
    tallies: Counter = Counter()
    largest = [1]

    def walk(last: int, echelon: LatticeEchelon, size: int) -> None:
        for j in range(last + 1, t):
            child = echelon.with_vector(rows[j])
            tallies[size + 1, child.rank] += 1
            largest[0] = max(largest[0], max(child.pivots(), default=1))
            walk(j, child, size + 1)

    walk(-1, LatticeEchelon(d), 0)
    spectrum = RankSpectrum.from_tallies(t, d, tallies, max_pivot=largest[0])
    logger.info(f"Rank spectrum over Q for t={t}: max HNF pivot {spectrum.max_pivot}")
    return spectrum


def modular_rank_spectrum(system: FormSystem, p: int) -> RankSpectrum:
    """
    Rank mod p of every nonempty subset.

    Once a subset reaches rank d, every superset also has rank d and is
    credited without being visited.
    """
    _guard(system)
    _require_prime(p)
    p = int(p)
    rows = system.rows
    t, d = system.t, system.d
    tallies: Counter = Counter()

    def walk(last: int, span: ModularSpan, size: int) -> None:
        for j in range(last + 1, t):
            child = span.with_vector(rows[j])
            if child.rank == d:
                free = t - 1 - j
                for extra in range(free + 1):
                    tallies[size + 1 + extra, d] += math.comb(free, extra)
                continue
            tallies[size + 1, child.rank] += 1
            walk(j, child, size + 1)

    walk(-1, ModularSpan(p), 0)
    return RankSpectrum.from_tallies(t, d, tallies, modulus=p)


def _alternating_sum(spectrum: RankSpectrum, p: int) -> int:
    total = p ** spectrum.d
    for size, by_rank in spectrum.counts.items():
        sign = -1 if size % 2 else 1
        for rank, count in by_rank.items():
            total += sign * count * p ** (spectrum.d - rank)
    return total


def stability_threshold(system: FormSystem) -> int:
    """Smallest prime strictly greater than every HNF pivot of every subset."""
    return int(nextprime(rank_spectrum(system).max_pivot))


def nonvanishing_count(system: FormSystem, p: int) -> int:
    """
    Number of m ∈ Z_p^d with ψ_i(m) ≢ 0 (mod p) for every form, by
    inclusion-exclusion over mod-p ranks.

    Raises:
        ValidationError: If p is not prime
        GuardViolation: If t > 16
    """
    count = _alternating_sum(modular_rank_spectrum(system, p), p)
    logger.debug(f"Nonvanishing count at p={p}: {count}")
    return count


def stable_polynomial(system: FormSystem) -> StableLocalPolynomial:
    """
    The integer polynomial giving the nonvanishing count for p ≥ p0.

    Raises:
        GuardViolation: If t > 16
    """
    spectrum = rank_spectrum(system)
    d = system.d
    coefficients = [0] * (d + 1)
    coefficients[d] = 1
    for size, by_rank in spectrum.counts.items():
        sign = -1 if size % 2 else 1
        for rank, count in by_rank.items():
            coefficients[d - rank] += sign * count
    return StableLocalPolynomial(coefficients=tuple(coefficients), p0=stability_threshold(system))


def local_factor(system: FormSystem, p: int, use_stable: bool = True) -> LocalFactor:
    """
    β_p as an exact rational.

    Args:
        system: The form system
        p: A prime
        use_stable: Take the count from the stable polynomial when p ≥ p0
    """
    _require_prime(p)
    p = int(p)
    if use_stable and system.t <= SUBSET_MAX_FORMS:
        stable = stable_polynomial(system)
        count = stable.evaluate(p) if p >= stable.p0 else nonvanishing_count(system, p)
    elif system.t <= SUBSET_MAX_FORMS:
        count = nonvanishing_count(system, p)
    else:
        count = direct_nonvanishing_count(system, p)
    beta = Fraction(count, p ** system.d) * Fraction(p, p - 1) ** system.t
    return LocalFactor(p=p, nonvanishing_count=count, beta=beta)


def local_factor_table(system: FormSystem, primes: List[int]) -> List[LocalFactor]:
    return [local_factor(system, p) for p in primes]


# -----------------------------
# Checks
# -----------------------------
def direct_nonvanishing_count(system: FormSystem, p: int) -> int:
    """
    The nonvanishing count by scanning all of Z_p^d.

    Raises:
        GuardViolation: If p^d > 10^7
    """
    _require_prime(p)
    p = int(p)
    d = system.d
    size = p ** d
    if size > DIRECT_MAX_POINTS:
        raise GuardViolation(f"direct enumeration of Z_{p}^{d} ({size} points) exceeds {DIRECT_MAX_POINTS}")
    coefficients = np.array(system.rows, dtype=np.int64).T % p
    powers = p ** np.arange(d, dtype=np.int64)
    count = 0
    for start in range(0, size, DIRECT_CHUNK):
        codes = np.arange(start, min(start + DIRECT_CHUNK, size), dtype=np.int64)
        points = (codes[:, np.newaxis] // powers[np.newaxis, :]) % p
        values = (points @ coefficients) % p
        count += int(np.count_nonzero(np.all(values != 0, axis=1)))
    return count


def structural_expansion(n: int) -> Tuple[int, int]:
    """Leading two coefficients of the stable count polynomial for side n."""
    if n < 3:
        raise ValidationError(f"side must be at least 3, got {n}")
    return 1, -n * n


def positivity_witness(system: FormSystem, p: int) -> bool:
    """True iff no form vanishes mod p at the unit point, which makes β_p > 0."""
    _require_prime(p)
    if system.unit_point is None:
        raise ValidationError("positivity_witness needs a unit point")
    return all(v % p != 0 for v in system.evaluate(system.unit_point))
