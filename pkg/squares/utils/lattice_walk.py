"""
Level-by-level enumeration of the integer points of K(N).

The walk fixes one variable per level. A level holds a frontier of partial
assignments as an int64 matrix of partial form values, one row per state.
Before a variable is fixed, every form touching it narrows its range using
the box bounds of the variables still free. Forms that become complete at a
level are then exact.

When the last two variables meet every form either alone or through one
common diagonal direction (y + z or y − z), each state left at the end is
finished in closed form: the lattice points of a rectangle inside a diagonal
band. Otherwise the last variable is counted as an interval length.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from squares.exceptions import ValidationError
from squares.utils.magic_forms import FormSystem

logger = logging.getLogger(__name__)

CHUNK_ROWS = 1 << 20
SHARDS_PER_JOB = 4

ValueFilter = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class WalkPlan:
    """
    Variable order for a walk.

    tail is (y, z, kappa) when the last two variables are counted in closed
    form along the direction y + kappa·z.
    """

    order: Tuple[int, ...]
    tail: Optional[Tuple[int, int, int]] = None

    @property
    def variables(self) -> Tuple[int, ...]:
        return self.order + (self.tail[:2] if self.tail else ())


def _tail_kind(rows, y: int, z: int) -> Optional[int]:
    """kappa if every form meets (y, z) as (0,0), (a,0), (0,b) or m·(1,kappa); else None."""
    kappa = None
    for row in rows:
        a, b = row[y], row[z]
        if a == 0 or b == 0:
            continue
        if b == a:
            kind = 1
        elif b == -a:
            kind = -1
        else:
            return None
        if kappa is None:
            kappa = kind
        elif kappa != kind:
            return None
    return kappa if kappa is not None else 1


def _greedy_order(rows, variables: List[int]) -> Tuple[int, ...]:
    """Fix variables so that forms complete as early as possible."""
    supports = [frozenset(j for j, c in enumerate(row) if c) for row in rows]
    chosen: List[int] = []
    remaining = list(variables)
    while remaining:
        def score(v):
            fixed = set(chosen) | {v}
            completed = sum(1 for s in supports if v in s and s <= fixed)
            touched = sum(1 for s in supports if v in s)
            return (completed, touched, -v)

        best = max(remaining, key=score)
        chosen.append(best)
        remaining.remove(best)
    return tuple(chosen)


@lru_cache(maxsize=32)
def plan_walk(system: FormSystem, closed_tail: bool = True) -> WalkPlan:
    rows = system.rows
    d = system.d
    tail = None
    if closed_tail and d >= 2:
        best = None
        for y, z in itertools.combinations(range(d), 2):
            kappa = _tail_kind(rows, y, z)
            if kappa is None:
                continue
            diagonals = sum(1 for row in rows if row[y] and row[z])
            if best is None or diagonals > best[0]:
                best = (diagonals, (y, z, kappa))
        if best is not None:
            tail = best[1]
    walked = [j for j in range(d) if tail is None or j not in tail[:2]]
    plan = WalkPlan(order=_greedy_order(rows, walked), tail=tail)
    logger.debug(f"Walk plan for d={d}: order {plan.order}, tail {plan.tail}")
    return plan


def _coefficient_interval(a: int, low_sum: np.ndarray, high_sum: np.ndarray, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integers u with 0 ≤ a·u + S ≤ N for some S in [low_sum, high_sum]."""
    if a > 0:
        return -(high_sum // a), (N - low_sum) // a
    a = -a
    return -((N - low_sum) // a), high_sum // a


def _band_prefix(k: np.ndarray, yl, yh, zl, W) -> np.ndarray:
    """Number of (y, z) in [yl, yh] × [zl, zl + W − 1] with y + z ≤ k."""
    q = k - zl + 1

    def cumulative(x):
        return np.where(x <= 0, 0, np.where(x <= W, x * (x + 1) // 2, W * (W + 1) // 2 + (x - W) * W))

    return cumulative(q - yl) - cumulative(q - yh - 1)


class LatticeWalker:
    """
    Walks the integer points of {x : 0 ≤ ψ_i(x) ≤ N}.

    Args:
        system: The form system
        N: Dilation, non-negative
        value_filter: Optional mask applied to the values of forms as they
            complete; only points whose every value passes are kept
        closed_tail: Use the closed-form count for the last two variables
            when the system allows it (counting only)
    """

    def __init__(self, system: FormSystem, N: int, value_filter: Optional[ValueFilter] = None, closed_tail: bool = True):
        if N < 0:
            raise ValidationError(f"N must be non-negative, got {N}")
        self.system = system
        self.N = N
        self.value_filter = value_filter
        self.plan = plan_walk(system, closed_tail and value_filter is None)
        self.coefficients = np.array(system.rows, dtype=np.int64)
        lows, highs = system.variable_box(N)
        self.lows = np.array(lows, dtype=np.int64)
        self.highs = np.array(highs, dtype=np.int64)

        t = system.t
        variables = self.plan.variables
        self.rest_min: List[np.ndarray] = []
        self.rest_max: List[np.ndarray] = []
        self.touching: List[List[int]] = []
        self.completed: List[List[int]] = []
        supports = [set(int(j) for j in np.flatnonzero(row)) for row in self.coefficients]
        for k, v in enumerate(self.plan.order):
            later = list(variables[k + 1:])
            low_terms = np.minimum(self.coefficients[:, later] * self.lows[later], self.coefficients[:, later] * self.highs[later])
            high_terms = np.maximum(self.coefficients[:, later] * self.lows[later], self.coefficients[:, later] * self.highs[later])
            self.rest_min.append(low_terms.sum(axis=1) if later else np.zeros(t, dtype=np.int64))
            self.rest_max.append(high_terms.sum(axis=1) if later else np.zeros(t, dtype=np.int64))
            self.touching.append([int(i) for i in np.flatnonzero(self.coefficients[:, v])])
            fixed = set(variables[:k + 1])
            self.completed.append([i for i in range(t) if v in supports[i] and supports[i] <= fixed])

        if self.plan.tail:
            y, z, _ = self.plan.tail
            self.tail_forms = []
            for i in range(t):
                a, b = int(self.coefficients[i, y]), int(self.coefficients[i, z])
                if a and b:
                    self.tail_forms.append((i, a, 's'))
                elif a:
                    self.tail_forms.append((i, a, 'y'))
                elif b:
                    self.tail_forms.append((i, b, 'z'))

    # -----------------------------
    # Level expansion
    # -----------------------------
    def _bounds(self, k: int, partial: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        v = self.plan.order[k]
        m = partial.shape[0]
        lo = np.full(m, self.lows[v], dtype=np.int64)
        hi = np.full(m, self.highs[v], dtype=np.int64)
        for i in self.touching[k]:
            column = partial[:, i]
            l, h = _coefficient_interval(
                int(self.coefficients[i, v]), column + self.rest_min[k][i], column + self.rest_max[k][i], self.N
            )
            np.maximum(lo, l, out=lo)
            np.minimum(hi, h, out=hi)
        return lo, hi

    def _expand(self, k: int, partial: np.ndarray, points: Optional[np.ndarray], lo, hi):
        v = self.plan.order[k]
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        source = np.repeat(np.arange(partial.shape[0]), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        values = np.repeat(lo, counts) + (np.arange(total, dtype=np.int64) - starts)
        new_partial = partial[source] + np.outer(values, self.coefficients[:, v])
        new_points = None
        if points is not None:
            new_points = points[source]
            new_points[:, v] = values
        if self.value_filter is not None and self.completed[k] and total:
            keep = np.all(self.value_filter(new_partial[:, self.completed[k]]), axis=1)
            new_partial = new_partial[keep]
            if new_points is not None:
                new_points = new_points[keep]
        return new_partial, new_points

    def _split(self, counts: np.ndarray) -> List[slice]:
        """Slices of states whose expansions stay near CHUNK_ROWS rows each."""
        cumulative = np.cumsum(counts)
        cuts = np.searchsorted(cumulative, np.arange(CHUNK_ROWS, int(cumulative[-1]), CHUNK_ROWS), side='right')
        inner = sorted(set(int(c) for c in cuts if 0 < c < len(counts))) or [len(counts) // 2]
        bounds = [0] + inner + [len(counts)]
        return [slice(a, b) for a, b in zip(bounds, bounds[1:])]

    # -----------------------------
    # Counting
    # -----------------------------
    def _tail_counts(self, partial: np.ndarray) -> np.ndarray:
        y, z, kappa = self.plan.tail
        m = partial.shape[0]
        N = self.N
        yl = np.full(m, self.lows[y], dtype=np.int64)
        yh = np.full(m, self.highs[y], dtype=np.int64)
        zl = np.full(m, self.lows[z], dtype=np.int64)
        zh = np.full(m, self.highs[z], dtype=np.int64)
        sl = yl + (zl if kappa == 1 else -zh)
        sh = yh + (zh if kappa == 1 else -zl)
        for i, a, kind in self.tail_forms:
            column = partial[:, i]
            l, h = _coefficient_interval(a, column, column, N)
            if kind == 'y':
                np.maximum(yl, l, out=yl)
                np.minimum(yh, h, out=yh)
            elif kind == 'z':
                np.maximum(zl, l, out=zl)
                np.minimum(zh, h, out=zh)
            else:
                np.maximum(sl, l, out=sl)
                np.minimum(sh, h, out=sh)
        if kappa == -1:
            # y - z = -((-y) + z)
            yl, yh = -yh, -yl
            sl, sh = -sh, -sl
        np.maximum(sl, yl + zl, out=sl)
        np.minimum(sh, yh + zh, out=sh)
        valid = (yl <= yh) & (zl <= zh) & (sl <= sh)
        W = zh - zl + 1
        counts = _band_prefix(sh, yl, yh, zl, W) - _band_prefix(sl - 1, yl, yh, zl, W)
        return np.where(valid, counts, 0)

    def _count_from(self, k: int, partial: np.ndarray) -> int:
        levels = len(self.plan.order)
        if partial.shape[0] == 0:
            return 0
        if k == levels:
            if self.plan.tail:
                return int(self._tail_counts(partial).sum())
            return int(partial.shape[0])
        lo, hi = self._bounds(k, partial)
        counts = np.maximum(hi - lo + 1, 0)
        if k == levels - 1 and not self.plan.tail and self.value_filter is None:
            return int(counts.sum())
        if int(counts.sum()) > CHUNK_ROWS and partial.shape[0] > 1:
            return sum(self._count_from(k, partial[part]) for part in self._split(counts))
        expanded, _ = self._expand(k, partial, None, lo, hi)
        return self._count_from(k + 1, expanded)

    def first_values(self) -> np.ndarray:
        """Feasible values of the first walked variable, in increasing order."""
        if not self.plan.order:
            return np.zeros(0, dtype=np.int64)
        start = np.zeros((1, self.system.t), dtype=np.int64)
        lo, hi = self._bounds(0, start)
        return np.arange(int(lo[0]), int(hi[0]) + 1, dtype=np.int64)

    def _seed(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """States after fixing the first variable to each of values."""
        v0 = self.plan.order[0]
        partial = np.outer(values, self.coefficients[:, v0])
        points = np.zeros((values.size, self.system.d), dtype=np.int64)
        points[:, v0] = values
        if self.value_filter is not None and self.completed[0]:
            keep = np.all(self.value_filter(partial[:, self.completed[0]]), axis=1)
            partial, points = partial[keep], points[keep]
        return partial, points

    def count(self, jobs: int = 1) -> int:
        """
        Exact number of integer points.

        The first variable's values are split into shards that are counted
        independently; the result does not depend on jobs.
        """
        if not self.plan.order:
            return int(self._tail_counts(np.zeros((1, self.system.t), dtype=np.int64)).sum())
        values = self.first_values()
        if values.size == 0:
            return 0
        shards = [s for s in np.array_split(values, max(1, jobs) * SHARDS_PER_JOB) if s.size]

        def run(shard: np.ndarray) -> int:
            partial, _ = self._seed(shard)
            return self._count_from(1, partial)

        with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
            totals = list(executor.map(run, shards))
        logger.debug(f"Walk N={self.N}: {len(shards)} shards, totals {totals}")
        return sum(totals)

    # -----------------------------
    # Enumeration
    # -----------------------------
    def _blocks_from(self, k: int, partial: np.ndarray, points: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        if partial.shape[0] == 0:
            return
        if k == len(self.plan.order):
            yield points, partial
            return
        lo, hi = self._bounds(k, partial)
        counts = np.maximum(hi - lo + 1, 0)
        if int(counts.sum()) > CHUNK_ROWS and partial.shape[0] > 1:
            for part in self._split(counts):
                yield from self._blocks_from(k, partial[part], points[part])
            return
        expanded, expanded_points = self._expand(k, partial, points, lo, hi)
        yield from self._blocks_from(k + 1, expanded, expanded_points)

    def blocks(self, first_values: Optional[np.ndarray] = None) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """
        Yield (points, values) blocks covering every integer point once.

        points has one row per point in the original variable order; values
        holds the t form values of each point.

        Args:
            first_values: Restrict the first walked variable to these values
        """
        if self.plan.tail:
            raise ValidationError("enumeration needs a walk without a closed-form tail")
        values = self.first_values() if first_values is None else np.asarray(first_values, dtype=np.int64)
        if values.size == 0:
            return
        partial, points = self._seed(values)
        yield from self._blocks_from(1, partial, points)


def count_lattice_points(system: FormSystem, N: int, jobs: int = 1) -> int:
    return LatticeWalker(system, N).count(jobs)


def iterate_lattice_points(system: FormSystem, N: int, value_filter: Optional[ValueFilter] = None) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    return LatticeWalker(system, N, value_filter=value_filter, closed_tail=False).blocks()
