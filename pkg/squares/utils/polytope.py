"""
Vertices of K(1) = {x : 0 ≤ ψ_i(x) ≤ 1 for every form ψ_i}.

Every vertex is the solution of d linearly independent tight constraints.
A form's two slabs are parallel, so a tight set picks d forms and a side
(0 or 1) for each. For every invertible d-subset the exact inverse is
computed once and all 2^d sides are tested together with numpy.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from squares.exceptions import GuardViolation, ValidationError
from squares.utils.exact_linalg import denominator_lcm_of, inverse_exact, solve_exact
from squares.utils.magic_forms import FormSystem

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_DIMENSION = 8


def format_rational(value) -> str:
    """'p/q', or 'k' for integers."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, order=True)
class Vertex:
    coordinates: Tuple[Fraction, ...]

    def to_strings(self) -> List[str]:
        return [format_rational(c) for c in self.coordinates]

    @classmethod
    def parse(cls, text: str) -> "Vertex":
        return cls(tuple(Fraction(part.strip()) for part in text.split(',')))


@dataclass(frozen=True)
class VertexSet:
    """Deduplicated vertices in lexicographic order."""

    vertices: Tuple[Vertex, ...]
    denominator_lcm: int

    @classmethod
    def from_vertices(cls, vertices: Iterable[Vertex]) -> "VertexSet":
        ordered = tuple(sorted(set(vertices)))
        lcm = denominator_lcm_of(c for v in ordered for c in v.coordinates)
        return cls(vertices=ordered, denominator_lcm=lcm)

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, coordinates) -> bool:
        key = coordinates if isinstance(coordinates, Vertex) else Vertex(tuple(Fraction(c) for c in coordinates))
        return key in set(self.vertices)


def contains(system: FormSystem, x: Sequence, N: int = 1) -> bool:
    """
    True iff 0 ≤ ψ_i(x) ≤ N for every form.

    Raises:
        ValidationError: If x has the wrong dimension
    """
    values = system.evaluate([Fraction(v) for v in x])
    return all(0 <= v <= N for v in values)


def denominator_lcm(vertex_set: VertexSet) -> int:
    return vertex_set.denominator_lcm


def _side_vectors(d: int) -> np.ndarray:
    """All 2^d 0/1 column vectors as a d × 2^d matrix."""
    codes = np.arange(1 << d, dtype=np.int64)
    return (codes[np.newaxis, :] >> np.arange(d, dtype=np.int64)[:, np.newaxis]) & 1


def _vertices_of_subsets(system: FormSystem, subsets: Sequence[Tuple[int, ...]], sides: np.ndarray) -> Set[Vertex]:
    coefficient = system.coefficient_matrix()
    forms = np.array(system.rows, dtype=np.int64)
    found: Set[Vertex] = set()
    for subset in subsets:
        inverse = inverse_exact(coefficient.select_rows(subset).to_rational())
        if inverse is None:
            continue
        scale = denominator_lcm_of(inverse.entries)
        q = np.array([[int(v * scale) for v in inverse.row(i)] for i in range(inverse.rows)], dtype=np.int64)

        # ψ(x) = (F·Q·b)/scale must lie in [0, 1]
        values = (forms @ q) @ sides
        feasible = np.all((values >= 0) & (values <= scale), axis=0)
        if not feasible.any():
            continue
        points = np.unique((q @ sides[:, feasible]).T, axis=0)
        for point in points:
            found.add(Vertex(tuple(Fraction(int(v), scale) for v in point)))
    return found


def enumerate_vertices(system: FormSystem, jobs: int = 1) -> VertexSet:
    """
    All vertices of K(1), exactly.

    Args:
        system: Form system with d ≤ 8
        jobs: Worker threads; subsets are split into that many chunks

    Raises:
        GuardViolation: If d > 8
    """
    d = system.d
    if d > EXHAUSTIVE_MAX_DIMENSION:
        raise GuardViolation(
            f"exhaustive vertex enumeration is limited to d <= {EXHAUSTIVE_MAX_DIMENSION} (got d={d}); "
            "use sample_vertices"
        )
    subsets = list(itertools.combinations(range(system.t), d))
    sides = _side_vectors(d)
    workers = max(1, jobs)
    chunk = math.ceil(len(subsets) / workers)
    chunks = [subsets[i:i + chunk] for i in range(0, len(subsets), chunk)]
    logger.info(f"Enumerating vertices: {len(subsets)} form subsets x {sides.shape[1]} sides, {len(chunks)} chunks")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(lambda part: _vertices_of_subsets(system, part, sides), chunks))

    merged: Set[Vertex] = set()
    for part in results:
        merged |= part
    vertex_set = VertexSet.from_vertices(merged)
    logger.info(f"Found {len(vertex_set)} vertices, denominator lcm {vertex_set.denominator_lcm}")
    return vertex_set


def volume_lower_bound(system: FormSystem) -> Fraction:
    """
    Volume of a simplex inside K(1), a positive lower bound on its volume.

    The simplex has vertices u/2 and u/2 + e_j/(2n), where u is the unit
    point. It fits because every coefficient is at most n in absolute value.

    Raises:
        ValidationError: If the system has no side length or unit point, or
            the simplex is not contained in K(1)
    """
    if system.n is None or system.unit_point is None:
        raise ValidationError("volume_lower_bound needs a magic-square system with a unit point")
    d, n = system.d, system.n
    centre = [Fraction(v, 2) for v in system.unit_point]
    corners = [centre]
    for j in range(d):
        corner = list(centre)
        corner[j] += Fraction(1, 2 * n)
        corners.append(corner)
    for corner in corners:
        if not contains(system, corner, 1):
            raise ValidationError(f"simplex corner {[format_rational(c) for c in corner]} lies outside K(1)")
    return Fraction(1, (2 * n) ** d * math.factorial(d))


def sample_vertices(system: FormSystem, samples: int, seed: Optional[int] = None) -> VertexSet:
    """
    Vertices found from random tight sets.

    Used beyond the exhaustive guard; the denominator lcm of the result is a
    lower bound on the Ehrhart period.
    """
    if samples < 0:
        raise ValidationError(f"samples must be non-negative, got {samples}")
    rng = np.random.default_rng(seed)
    coefficient = system.coefficient_matrix()
    found: Set[Vertex] = set()
    singular = 0
    for _ in range(samples):
        subset = sorted(int(i) for i in rng.choice(system.t, size=system.d, replace=False))
        sides = [int(b) for b in rng.integers(0, 2, size=system.d)]
        solution = solve_exact(coefficient.select_rows(subset).to_rational(), sides)
        if solution is None:
            singular += 1
            continue
        if contains(system, solution, 1):
            found.add(Vertex(tuple(solution)))
    logger.info(f"Sampled {samples} tight sets: {len(found)} distinct vertices, {singular} singular")
    return VertexSet.from_vertices(found)
