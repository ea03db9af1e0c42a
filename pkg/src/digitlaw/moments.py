"""Moments of a uniform base-q digit and the normal reference curves."""
import functools
import math
import operator
from dataclasses import dataclass
from fractions import Fraction

from .errors import UsageError

#: Shevtsova's constant in the Berry-Esseen inequality for i.i.d. summands.
BERRY_ESSEEN_CONSTANT = 0.4748

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class MomentSet:
    q: int
    mu: float
    sigma2: float
    sigma: float
    alpha3: float


@functools.lru_cache(maxsize=64)
def digit_moments(q):
    """Mean, variance and third absolute central moment of a uniform digit.

    All three are accumulated as exact rationals over j = 0 .. q-1 and
    rounded once. For even q the third moment is cross-checked against the
    closed form q(q^2 - 2)/32.
    """
    try:
        q = operator.index(q)
    except TypeError:
        raise UsageError(f"base must be an integer, got {q!r}") from None
    if q < 2:
        raise UsageError(f"base must be >= 2, got {q}")
    mu = Fraction(q - 1, 2)
    sigma2 = sum((Fraction(j) - mu) ** 2 for j in range(q)) / q
    alpha3 = sum(abs(Fraction(j) - mu) ** 3 for j in range(q)) / q
    assert sigma2 == Fraction(q * q - 1, 12)
    if q % 2 == 0:
        assert alpha3 == Fraction(q * (q * q - 2), 32)
    return MomentSet(q=q, mu=float(mu), sigma2=float(sigma2),
                     sigma=math.sqrt(float(sigma2)), alpha3=float(alpha3))


def berry_esseen_bound(q, n):
    """Uniform bound on |F_n(x) - Phi(x)| for the normalised digit sum."""
    if n < 1:
        raise UsageError(f"n must be >= 1, got {n}")
    m = digit_moments(q)
    return BERRY_ESSEEN_CONSTANT * m.alpha3 / (m.sigma ** 3) / math.sqrt(n)


def normal_cdf(x):
    # erfc keeps full relative precision in the lower tail, so Phi(-8) ~ 6e-16
    # comes out right; absolute error is at the 1e-16 level everywhere.
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_pdf(x):
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def expected_freq_variance(n, q=10):
    """Binomial variance p(1-p)/n of one digit's observed frequency, p = 1/q."""
    if n <= 0:
        raise UsageError(f"n must be positive, got {n}")
    p = 1.0 / q
    return p * (1.0 - p) / n
