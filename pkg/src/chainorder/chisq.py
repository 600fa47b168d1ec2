"""Chi-square survival function via the regularized incomplete gamma.

Lower series for ``x < a + 1``, modified-Lentz continued fraction for the
upper tail otherwise (Numerical Recipes ``gser`` / ``gcf``). Pure Python, so
results do not depend on which special-function library is installed.
"""

from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    if x == 0.0:
        return 0.0
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_fraction(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if a <= 0:
        raise ValueError(f"shape must be positive, got {a}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x < a + 1.0:
        return 1.0 - _lower_series(a, x)
    return _upper_fraction(a, x)


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma ``P(a, x)``."""
    if a <= 0:
        raise ValueError(f"shape must be positive, got {a}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x < a + 1.0:
        return _lower_series(a, x)
    return 1.0 - _upper_fraction(a, x)


def _check_dof(dof: int) -> None:
    if int(dof) != dof or dof < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {dof}")


def chi2_survival(x: float, dof: int) -> float:
    """``P(V >= x)`` for ``V`` chi-square with ``dof`` degrees of freedom."""
    _check_dof(dof)
    if x < 0:
        raise ValueError(f"chi-square statistic must be nonnegative, got {x}")
    if math.isinf(x):
        return 0.0
    return gamma_q(dof / 2.0, x / 2.0)


def chi2_cdf(x: float, dof: int) -> float:
    """``P(V <= x)``.

    Uses the lower series everywhere it is numerically safe, so it is an
    independent route from :func:`chi2_survival` in the upper tail.
    """
    _check_dof(dof)
    if x < 0:
        raise ValueError(f"chi-square statistic must be nonnegative, got {x}")
    if math.isinf(x):
        return 1.0
    if x / 2.0 > 600.0:
        # exp(x/2) overflows inside the series
        return gamma_p(dof / 2.0, x / 2.0)
    return _lower_series(dof / 2.0, x / 2.0)
