"""
The singular series 𝔖_n = vol(K_n(1)) · ∏_p β_p for n = 3 and 4.

Below the stability threshold the factors are exact rationals and go into
the prefactor together with the volume. From p0 on, β_p comes from the
stable polynomial and the product is truncated at P_max in mpmath with
guard digits. The tail beyond P_max is bounded with |β_p − 1| ≤ C/p², where
C is the largest |β_p − 1|·p² observed on [p0, 1000].
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath
from django.conf import settings
from sympy import primerange

from squares.exceptions import PrecisionError, ValidationError
from squares.utils.ehrhart import interpolate_quasipolynomial, volume as qp_volume
from squares.utils.local_factors import local_factor, stable_polynomial
from squares.utils.magic_forms import build_system
from squares.utils.polytope import enumerate_vertices

logger = logging.getLogger(__name__)

SUPPORTED_SIDES = (3, 4)
GUARD_DIGITS = 15
TAIL_SAMPLE_LIMIT = 1000


@dataclass(frozen=True)
class SingularSeriesResult:
    n: int
    volume: Fraction
    exceptional_prefactor: Fraction
    p0: int
    P_max: int
    precision: int
    truncated_product: mpmath.mpf
    tail_relative: mpmath.mpf
    tail_error_estimate: mpmath.mpf
    value: mpmath.mpf


def _require_side(n: int) -> None:
    if n not in SUPPORTED_SIDES:
        raise ValidationError(f"the singular series is available for n in {SUPPORTED_SIDES}, got n={n}")


def polytope_volume(n: int, jobs: int = 1) -> Fraction:
    """Exact volume of K_n(1) from its Ehrhart quasipolynomial."""
    _require_side(n)
    system = build_system(n)
    period = enumerate_vertices(system, jobs).denominator_lcm
    return qp_volume(interpolate_quasipolynomial(system, period, jobs))


def exceptional_prefactor(n: int, volume: Optional[Fraction] = None, jobs: int = 1) -> Fraction:
    """
    vol(K_n(1)) times every β_p with p below the stability threshold.

    Args:
        n: 3 or 4
        volume: The exact volume if already known; computed otherwise

    Raises:
        ValidationError: If n is not 3 or 4
    """
    _require_side(n)
    system = build_system(n)
    volume = polytope_volume(n, jobs) if volume is None else Fraction(volume)
    p0 = stable_polynomial(system).p0
    prefactor = volume
    for p in primerange(2, p0):
        prefactor *= local_factor(system, int(p)).beta
    return prefactor


def _stable_beta(coefficients, d: int, t: int, p: int) -> mpmath.mpf:
    count = sum(c * p ** k for k, c in enumerate(coefficients))
    return mpmath.mpf(count) / mpmath.mpf(p) ** d * (mpmath.mpf(p) / (p - 1)) ** t


def singular_constant(
    n: int,
    P_max: Optional[int] = None,
    precision: Optional[int] = None,
    tolerance: Optional[float] = None,
    volume: Optional[Fraction] = None,
    jobs: int = 1,
) -> SingularSeriesResult:
    """
    Evaluate 𝔖_n with a truncated Euler product.

    Args:
        n: 3 or 4
        P_max: Largest prime in the product; defaults to MAGIC_P_MAX
        precision: Decimal digits; defaults to MAGIC_PRECISION
        tolerance: Requested absolute accuracy, if any
        volume: Exact volume of K_n(1) if already known

    Raises:
        ValidationError: If n is unsupported or P_max < 2
        PrecisionError: If tolerance is finer than the working precision
    """
    _require_side(n)
    P_max = settings.MAGIC_P_MAX if P_max is None else P_max
    precision = settings.MAGIC_PRECISION if precision is None else precision
    if P_max < 2:
        raise ValidationError(f"P_max must be at least 2, got {P_max}")
    if precision < 1:
        raise ValidationError(f"precision must be positive, got {precision}")
    if tolerance is not None and tolerance < 10.0 ** (-precision):
        raise PrecisionError(f"tolerance {tolerance} is finer than {precision} digits allow")

    system = build_system(n)
    stable = stable_polynomial(system)
    d, t, p0 = system.d, system.t, stable.p0
    volume = polytope_volume(n, jobs) if volume is None else Fraction(volume)
    prefactor = exceptional_prefactor(n, volume)

    with mpmath.workdps(precision + GUARD_DIGITS):
        product = mpmath.mpf(1)
        for p in primerange(p0, P_max + 1):
            product *= _stable_beta(stable.coefficients, d, t, int(p))

        constant = max(
            (abs(_stable_beta(stable.coefficients, d, t, int(p)) - 1) * int(p) ** 2 for p in primerange(p0, TAIL_SAMPLE_LIMIT + 1)),
            default=mpmath.mpf(0),
        )
        last = max(P_max, p0 - 1)
        tail_relative = constant / (last - 1)
        value = mpmath.mpf(prefactor.numerator) / prefactor.denominator * product
        tail_absolute = value * mpmath.expm1(tail_relative)

    logger.info(f"S_{n} ~ {mpmath.nstr(value, precision)} (P_max={P_max}, relative tail {mpmath.nstr(tail_relative, 3)})")
    if tolerance is not None and tail_absolute > tolerance:
        logger.warning(f"Tail estimate {mpmath.nstr(tail_absolute, 3)} exceeds tolerance {tolerance}; raise P_max")

    return SingularSeriesResult(
        n=n,
        volume=volume,
        exceptional_prefactor=prefactor,
        p0=p0,
        P_max=P_max,
        precision=precision,
        truncated_product=product,
        tail_relative=tail_relative,
        tail_error_estimate=tail_absolute,
        value=value,
    )


def predicted_count(n: int, N, constant=None) -> mpmath.mpf:
    """
    𝔖_n · N^d / (ln N)^t, the leading-order count of prime magic squares.

    Args:
        n: 3 or 4
        N: Bound on the entries, N > 1
        constant: 𝔖_n if already known; computed with default settings otherwise
    """
    _require_side(n)
    if N <= 1:
        raise ValidationError(f"predicted_count needs N > 1, got {N}")
    d, t = n * n - 2 * n, n * n
    if constant is None:
        constant = singular_constant(n).value
    N = mpmath.mpf(N)
    return mpmath.mpf(constant) * N ** d / mpmath.log(N) ** t
