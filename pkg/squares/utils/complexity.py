"""
Cauchy–Schwarz complexity of a system of linear forms.

The i-complexity is the least s such that the forms other than ψ_i split
into s+1 blocks, none of whose linear spans over Q contains ψ_i. The system
complexity is the maximum over i.

Small systems (t ≤ 16) are searched exhaustively. Larger ones are elephant
systems for n ≥ 5, and for those the two-block partitions from the
constructive proof are built and verified instead.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from squares.exceptions import GuardViolation, MagicSquaresError, ValidationError
from squares.utils.exact_linalg import (
    IntMatrix,
    ModularSpan,
    RatMatrix,
    exact_modulus,
    rank_over_rationals,
)
from squares.utils.magic_forms import FormSystem, LinearForm

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_FORMS = 16


@dataclass(frozen=True)
class PartitionCertificate:
    form_index: int
    blocks: Tuple[Tuple[int, ...], ...]

    @property
    def s(self) -> int:
        return len(self.blocks) - 1


@dataclass
class ComplexityReport:
    """s is None when some form is a multiple of another (infinite complexity)."""

    s: Optional[int]
    certificates: List[PartitionCertificate] = field(default_factory=list)
    lower_bound_witness: Optional[int] = None
    mode: str = 'exhaustive'

    @property
    def is_infinite(self) -> bool:
        return self.s is None


@dataclass(frozen=True)
class NontrivialReduction:
    """
    Reduced row echelon form of the nontrivial coefficient block.

    The reduction runs over Q, so matrix is a RatMatrix; as_int_matrix gives
    the same rows scaled to primitive integer rows.
    """

    matrix: RatMatrix
    pivot_columns: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivot_columns)

    @property
    def integral(self) -> bool:
        return self.matrix.is_integral()

    def as_int_matrix(self) -> IntMatrix:
        """Each row times the lcm of its denominators, divided by the gcd of the result."""
        rows = []
        for row in self.matrix.to_rows():
            scale = math.lcm(*(v.denominator for v in row))
            ints = [int(v * scale) for v in row]
            common = math.gcd(*ints) or 1
            rows.append([v // common for v in ints])
        return IntMatrix.from_rows(rows, self.matrix.cols)


def in_affine_span(target: LinearForm, forms: Sequence[LinearForm]) -> bool:
    """
    True iff target is a rational combination of forms.

    All forms here are homogeneous, so the affine span is the linear span.
    """
    if not forms:
        return False
    width = len(target.coefficients)
    rows = [f.coefficients for f in forms]
    base = rank_over_rationals(IntMatrix.from_rows(rows, width))
    return rank_over_rationals(IntMatrix.from_rows(rows + [target.coefficients], width)) == base


def _check_partition(system: FormSystem, cert: PartitionCertificate) -> None:
    i = cert.form_index
    if not 0 <= i < system.t:
        raise ValidationError(f"form index {i} out of range for t={system.t}")
    seen = set()
    for block in cert.blocks:
        if not block:
            raise ValidationError(f"certificate for form {i} has an empty block")
        for j in block:
            if j == i or not 0 <= j < system.t or j in seen:
                raise ValidationError(f"certificate for form {i} has a bad or repeated index {j}")
            seen.add(j)
    if len(seen) != system.t - 1:
        raise ValidationError(f"certificate for form {i} covers {len(seen)} of {system.t - 1} other forms")


def _block_excludes(rows, block: Sequence[int], target: Sequence[int], modulus: int) -> bool:
    span = ModularSpan(modulus)
    for j in block:
        span = span.with_vector(rows[j])
    return not span.contains(target)


def verify_certificate(system: FormSystem, cert: PartitionCertificate, modulus: Optional[int] = None) -> bool:
    """
    True iff ψ_i lies in the span of none of the certificate's blocks.

    Raises:
        ValidationError: If the blocks are not a partition of the other forms
    """
    _check_partition(system, cert)
    rows = system.rows
    modulus = modulus or exact_modulus(rows, system.d)
    target = rows[cert.form_index]
    return all(_block_excludes(rows, block, target, modulus) for block in cert.blocks)


# -----------------------------
# Exhaustive search
# -----------------------------
def _search_partition(rows, i: int, block_limit: int, modulus: int) -> Optional[List[List[int]]]:
    """Depth-first over restricted-growth strings with at most block_limit blocks."""
    target = rows[i]
    others = [j for j in range(len(rows)) if j != i]
    empty = ModularSpan(modulus)
    spans: List[ModularSpan] = []
    members: List[List[int]] = []

    def place(k: int) -> bool:
        if k == len(others):
            return True
        j = others[k]
        for b in range(len(spans)):
            grown = spans[b].with_vector(rows[j])
            if grown.contains(target):
                continue
            previous = spans[b]
            spans[b] = grown
            members[b].append(j)
            if place(k + 1):
                return True
            spans[b] = previous
            members[b].pop()
        if len(spans) < block_limit:
            fresh = empty.with_vector(rows[j])
            if not fresh.contains(target):
                spans.append(fresh)
                members.append([j])
                if place(k + 1):
                    return True
                spans.pop()
                members.pop()
        return False

    return members if place(0) else None


def _split_to(blocks: List[List[int]], count: int) -> List[List[int]]:
    """Split blocks until there are count of them; sub-blocks of a valid block stay valid."""
    blocks = [list(b) for b in blocks]
    while len(blocks) < count:
        largest = max(range(len(blocks)), key=lambda b: len(blocks[b]))
        if len(blocks[largest]) < 2:
            break
        blocks.append([blocks[largest].pop()])
    return blocks


def _guard(system: FormSystem) -> None:
    if system.t > EXHAUSTIVE_MAX_FORMS:
        raise GuardViolation(
            f"exhaustive partition search is limited to t <= {EXHAUSTIVE_MAX_FORMS} forms (got t={system.t}); "
            "use certificate mode"
        )


def i_certificate(system: FormSystem, i: int, s_max: int, modulus: Optional[int] = None) -> Optional[PartitionCertificate]:
    """The certificate for the least admissible s ≤ s_max, or None."""
    _guard(system)
    if not 0 <= i < system.t:
        raise ValidationError(f"form index {i} out of range for t={system.t}")
    rows = system.rows
    modulus = modulus or exact_modulus(rows, system.d)
    for s in range(s_max + 1):
        found = _search_partition(rows, i, s + 1, modulus)
        if found is not None:
            blocks = _split_to(found, s + 1)
            logger.debug(f"Form {i}: partition into {len(blocks)} blocks found at s={s}")
            return PartitionCertificate(form_index=i, blocks=tuple(tuple(sorted(b)) for b in blocks))
    return None


def i_complexity(system: FormSystem, i: int, s_max: int) -> Optional[int]:
    """
    Least s ≤ s_max admitting a valid partition certificate for form i.

    Raises:
        GuardViolation: If t > 16
    """
    cert = i_certificate(system, i, s_max)
    return None if cert is None else cert.s


# -----------------------------
# Constructive certificates (n >= 5)
# -----------------------------
def _elephant_certificates(system: FormSystem, modulus: int) -> List[PartitionCertificate]:
    n = system.n
    trivial = list(system.skeleton_form_indices)
    trivial_set = set(trivial)
    nontrivial = [j for j in range(system.t) if j not in trivial_set]
    anchors = {trivial[0], trivial[2]}
    nth = trivial[n - 1]
    rows = system.rows

    certificates = []
    for i in range(system.t):
        if i in trivial_set and i != nth:
            blocks = [[j for j in trivial if j != i], list(nontrivial)]
        elif i == nth:
            blocks = None
            rest = [j for j in trivial if j not in anchors and j != i]
            for dropped in nontrivial:
                first = sorted(anchors) + [j for j in nontrivial if j != dropped]
                second = rest + [dropped]
                if all(_block_excludes(rows, b, rows[i], modulus) for b in (first, second)):
                    blocks = [first, second]
                    break
            if blocks is None:
                raise MagicSquaresError(f"no two-block certificate found for the n-th trivial form (n={n})")
        else:
            blocks = [sorted(anchors) + [j for j in nontrivial if j != i], [j for j in trivial if j not in anchors]]
        cert = PartitionCertificate(form_index=i, blocks=tuple(tuple(sorted(b)) for b in blocks))
        if not verify_certificate(system, cert, modulus):
            raise MagicSquaresError(f"constructed certificate for form {i} does not verify (n={n})")
        certificates.append(cert)
    return certificates


def system_complexity(system: FormSystem, jobs: int = 1) -> ComplexityReport:
    """
    Complexity of the whole system.

    Args:
        system: The form system
        jobs: Worker threads for the per-form searches

    Returns:
        ComplexityReport with one certificate per form
    """
    rows = system.rows
    modulus = exact_modulus(rows, system.d)

    if system.t <= EXHAUSTIVE_MAX_FORMS:
        s_max = max(system.t - 2, 0)
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
            certs = list(executor.map(lambda i: i_certificate(system, i, s_max, modulus), range(system.t)))
        if any(c is None for c in certs):
            infinite = [i for i, c in enumerate(certs) if c is None]
            logger.info(f"Forms {infinite} have no admissible partition; complexity is infinite")
            return ComplexityReport(s=None, certificates=[c for c in certs if c is not None], mode='exhaustive')
        s = max(c.s for c in certs)
        witness = next(c.form_index for c in certs if c.s == s)
        logger.info(f"Exhaustive complexity for t={system.t}: s={s} (witness form {witness})")
        return ComplexityReport(s=s, certificates=certs, lower_bound_witness=witness, mode='exhaustive')

    if system.n is None or system.n < 5:
        raise GuardViolation(f"certificate mode needs an elephant system (n >= 5), got n={system.n}")
    certs = _elephant_certificates(system, modulus)

    # s >= 1: the first form lies in the span of all the others
    witness = 0
    others = [j for j in range(system.t) if j != witness]
    if _block_excludes(rows, others, rows[witness], modulus):
        raise MagicSquaresError(f"form {witness} is independent of the others; lower bound fails (n={system.n})")
    logger.info(f"Certificate-mode complexity for n={system.n}: s=1 ({len(certs)} certificates verified)")
    return ComplexityReport(s=1, certificates=certs, lower_bound_witness=witness, mode='certificate')


def row_reduce_nontrivial(system: FormSystem) -> NontrivialReduction:
    """
    Reduced row echelon form of the 2n × d block of nontrivial forms.

    Its pivot columns are 2n distinct standard basis columns, which shows the
    nontrivial forms are linearly independent. Pivots of absolute value 1
    are preferred so the result stays integral when that is possible; when
    it does not, NontrivialReduction.as_int_matrix gives the integer form.

    Raises:
        ValidationError: If the system is not an elephant system (n < 5)
    """
    if system.n is None or system.n < 5:
        raise ValidationError(f"row reduction of the nontrivial block needs n >= 5, got n={system.n}")
    trivial = set(system.skeleton_form_indices)
    a = [[Fraction(v) for v in system.rows[j]] for j in range(system.t) if j not in trivial]
    nrows, ncols = len(a), system.d
    pivots = []
    r = 0
    for col in range(ncols):
        if r == nrows:
            break
        candidates = [i for i in range(r, nrows) if a[i][col] != 0]
        if not candidates:
            continue
        unit = [i for i in candidates if abs(a[i][col]) == 1]
        piv = (unit or candidates)[0]
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][col]
        a[r] = [v * inv for v in a[r]]
        for i in range(nrows):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
    return NontrivialReduction(matrix=RatMatrix.from_rows(a, ncols), pivot_columns=tuple(pivots))
