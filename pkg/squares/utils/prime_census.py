"""
Empirical census of magic squares with prime entries in [0, N].

For n = 3 the nine entries are a ± b, a ± c, a ± b ± c and a, with a the
centre. Fixing a prime centre, b and c must each keep a ± b (resp. a ± c)
prime, so the census pairs up those admissible offsets and tests the four
corners. For n = 4 the lattice walk runs with a primality filter applied
as each form completes.

Work is split into shards (centres for n = 3, values of the first walked
variable for n = 4) and run on a thread pool in batches of `jobs`. A census
that runs out of time raises BudgetExceeded with a token from which the next
call resumes.
"""

import base64
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath
import numpy as np
from django.conf import settings

from squares.exceptions import BudgetExceeded, ValidationError
from squares.utils.lattice_walk import LatticeWalker
from squares.utils.magic_forms import build_system
from squares.utils.singular_series import predicted_count

logger = logging.getLogger(__name__)

CENSUS_SIDES = (3, 4)
WALK_SHARD_SIZE = 8


@dataclass(frozen=True)
class CensusResult:
    n: int
    N: int
    total_count: int
    distinct_entries_count: int
    predicted: Optional[mpmath.mpf] = None
    ratio: Optional[mpmath.mpf] = None

    @property
    def distinct_fraction(self) -> Optional[Fraction]:
        if self.total_count == 0:
            return None
        return Fraction(self.distinct_entries_count, self.total_count)


@dataclass(frozen=True)
class RepeatedEntryReport:
    N: int
    total: int
    distinct: int
    repeats: int
    ratio: Fraction


def sieve_primes(N: int) -> np.ndarray:
    """Boolean table is_prime[0..N]."""
    if N < 0:
        raise ValidationError(f"sieve_primes needs N >= 0, got {N}")
    is_prime = np.ones(N + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(N) + 1):
        if is_prime[p]:
            is_prime[p * p:N + 1:p] = False
    return is_prime


def _distinct_rows(values: np.ndarray) -> np.ndarray:
    """Mask of rows whose entries are pairwise distinct."""
    ordered = np.sort(values, axis=1)
    return np.all(np.diff(ordered, axis=1) != 0, axis=1)


def _prime_mask(is_prime: np.ndarray, values: np.ndarray) -> np.ndarray:
    inside = (values >= 0) & (values < is_prime.size)
    return inside & is_prime[np.clip(values, 0, is_prime.size - 1)]


# -----------------------------
# Resume tokens
# -----------------------------
def encode_resume_token(n: int, N: int, next_shard: int, total: int, distinct: int) -> str:
    payload = json.dumps({'n': n, 'N': N, 'next_shard': next_shard, 'total': total, 'distinct': distinct})
    return base64.urlsafe_b64encode(payload.encode('utf-8')).decode('ascii')


def decode_resume_token(token: str, n: int, N: int) -> Tuple[int, int, int]:
    """
    Returns:
        (next_shard, total, distinct)

    Raises:
        ValidationError: If the token is malformed or belongs to another census
    """
    try:
        state = json.loads(base64.urlsafe_b64decode(token.encode('ascii')).decode('utf-8'))
        next_shard, total, distinct = int(state['next_shard']), int(state['total']), int(state['distinct'])
    except (ValueError, KeyError, TypeError) as e:
        raise ValidationError(f"malformed resume token: {str(e)}")
    if state.get('n') != n or state.get('N') != N:
        raise ValidationError(f"resume token is for n={state.get('n')}, N={state.get('N')}, not n={n}, N={N}")
    return next_shard, total, distinct


# -----------------------------
# Shards
# -----------------------------
def _centre_shard(a: int, is_prime: np.ndarray) -> Tuple[int, int]:
    """Prime 3×3 squares with centre a, as (total, distinct)."""
    offsets = np.arange(-a, a + 1, dtype=np.int64)
    admissible = offsets[_prime_mask(is_prime, a + offsets) & _prime_mask(is_prime, a - offsets)]
    if admissible.size == 0:
        return 0, 0
    b, c = np.meshgrid(admissible, admissible, indexing='ij')
    b, c = b.ravel(), c.ravel()
    corners = np.stack([a + b + c, a - b - c, a - b + c, a + b - c], axis=1)
    keep = np.all(_prime_mask(is_prime, corners), axis=1)
    b, c = b[keep], c[keep]
    if b.size == 0:
        return 0, 0
    entries = np.stack([a + b, a - b - c, a + c, a - b + c, np.full_like(b, a), a + b - c, a - c, a + b + c, a - b], axis=1)
    return int(b.size), int(np.count_nonzero(_distinct_rows(entries)))


def _walk_shard(walker: LatticeWalker, values: np.ndarray) -> Tuple[int, int]:
    total = distinct = 0
    for _, form_values in walker.blocks(values):
        total += form_values.shape[0]
        distinct += int(np.count_nonzero(_distinct_rows(form_values)))
    return total, distinct


def census(
    n: int,
    N: int,
    budget_seconds: Optional[float] = None,
    resume_token: Optional[str] = None,
    constant=None,
    method: Optional[str] = None,
    jobs: int = 1,
) -> CensusResult:
    """
    Count n×n magic squares whose entries are all primes in [0, N].

    Args:
        n: 3 or 4
        N: Bound on the entries
        budget_seconds: Wall-clock budget; 0 or None for MAGIC_CENSUS_BUDGET_SECONDS
        resume_token: Token from a previous BudgetExceeded
        constant: 𝔖_n, to report the predicted count and ratio
        method: 'centre' (n = 3 only) or 'walk'; defaults to 'centre' for n = 3
        jobs: Worker threads; shards run in batches of this size and the
            budget is checked between batches

    Raises:
        ValidationError: On unsupported n, negative N or a foreign token
        BudgetExceeded: When the budget runs out; carries the partial result
            and a resume token
    """
    if n not in CENSUS_SIDES:
        raise ValidationError(f"census supports n in {CENSUS_SIDES}, got n={n}")
    if N < 0:
        raise ValidationError(f"census needs N >= 0, got {N}")
    method = method or ('centre' if n == 3 else 'walk')
    if method not in ('centre', 'walk') or (method == 'centre' and n != 3):
        raise ValidationError(f"unknown census method {method!r} for n={n}")
    budget = settings.MAGIC_CENSUS_BUDGET_SECONDS if budget_seconds is None else budget_seconds

    is_prime = sieve_primes(N)
    if method == 'centre':
        shards = [int(a) for a in np.flatnonzero(is_prime)]

        def run(index):
            return _centre_shard(shards[index], is_prime)
    else:
        walker = LatticeWalker(build_system(n), N, value_filter=lambda v: _prime_mask(is_prime, v), closed_tail=False)
        first = walker.first_values()
        shards = [first[i:i + WALK_SHARD_SIZE] for i in range(0, first.size, WALK_SHARD_SIZE)]

        def run(index):
            return _walk_shard(walker, shards[index])

    start, total, distinct = (0, 0, 0) if resume_token is None else decode_resume_token(resume_token, n, N)
    workers = max(1, jobs)
    started = time.monotonic()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        # one batch of `workers` shards at a time, merged in shard order
        for batch_start in range(start, len(shards), workers):
            indices = range(batch_start, min(batch_start + workers, len(shards)))
            for index, (shard_total, shard_distinct) in zip(indices, executor.map(run, indices)):
                total += shard_total
                distinct += shard_distinct
                logger.debug(f"Census shard {index}: {shard_total} squares, {shard_distinct} with distinct entries")
            following = indices[-1] + 1
            if budget and following < len(shards) and time.monotonic() - started > budget:
                token = encode_resume_token(n, N, following, total, distinct)
                partial = CensusResult(n=n, N=N, total_count=total, distinct_entries_count=distinct)
                logger.warning(f"Census n={n}, N={N} stopped at shard {following}/{len(shards)} after {budget}s")
                raise BudgetExceeded(
                    f"census budget of {budget}s exhausted at shard {following} of {len(shards)}", partial=partial, resume_token=token
                )

    result = CensusResult(n=n, N=N, total_count=total, distinct_entries_count=distinct)
    if constant is not None and N > 1:
        predicted = predicted_count(n, N, constant)
        result = replace(result, predicted=predicted, ratio=mpmath.mpf(total) / predicted)
    logger.info(f"Census n={n}, N={N}: {total} prime magic squares, {distinct} with distinct entries")
    return result


def census_oracle(N: int) -> Tuple[int, int]:
    """Plain triple loop over (a, b, c) for n = 3; returns (total, distinct)."""
    is_prime = sieve_primes(N)

    def prime(v):
        return 0 <= v <= N and bool(is_prime[v])

    total = distinct = 0
    for a in range(N + 1):
        if not prime(a):
            continue
        for b in range(-a, a + 1):
            if not (prime(a + b) and prime(a - b)):
                continue
            for c in range(-a, a + 1):
                if not (prime(a + c) and prime(a - c)):
                    continue
                entries = [a + b, a - b - c, a + c, a - b + c, a, a + b - c, a - c, a + b + c, a - b]
                if all(prime(v) for v in entries):
                    total += 1
                    distinct += len(set(entries)) == 9
    return total, distinct


def repeated_entry_bound_check(n: int, N: int) -> RepeatedEntryReport:
    """
    Z-magic squares in [0, N] with a repeated entry, divided by N^(d−1).

    Raises:
        ValidationError: If n is not 3
    """
    if n != 3:
        raise ValidationError(f"repeated_entry_bound_check is defined for n=3, got n={n}")
    if N < 0:
        raise ValidationError(f"N must be non-negative, got {N}")
    system = build_system(n)
    walker = LatticeWalker(system, N, closed_tail=False)
    total = distinct = 0
    for _, values in walker.blocks():
        total += values.shape[0]
        distinct += int(np.count_nonzero(_distinct_rows(values)))
    repeats = total - distinct
    ratio = Fraction(repeats, max(N, 1) ** (system.d - 1))
    return RepeatedEntryReport(N=N, total=total, distinct=distinct, repeats=repeats, ratio=ratio)


def distinct_fractions(n: int, N_values: List[int]) -> List[Optional[Fraction]]:
    return [census(n, N).distinct_fraction for N in N_values]
