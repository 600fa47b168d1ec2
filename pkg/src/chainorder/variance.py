"""Delta-method variance approximations for the likelihood and divergence terms.

Two scalar building blocks are compared:

* ``L(x) = x ln x``, the per-cell term of the log likelihood;
* ``G(x, h, v) = (x - h v)**2 / (h v)``, the per-cell term of the chi-square
  divergence, with ``h`` and ``v`` the row and column marginals.

Derivatives are exact (symbolic). The variance formulas are second-order
Taylor approximations with the remainder evaluated at an interpolated point
``mean + c * (x - mean)``, ``0 < c < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chainorder.counts import SymbolSequence, build_counts, sandwich_joint


def _check_open_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name}={value!r} must lie in (0, 1)")


def L_value(x: float, check: bool = True) -> float:
    """``x ln x`` on ``(0, 1)``; ``check=False`` allows probing the boundary ``x = 1``."""
    if check:
        _check_open_unit("x", x)
    return x * math.log(x)


def L_grad(x: float, check: bool = True) -> float:
    if check:
        _check_open_unit("x", x)
    return 1.0 + math.log(x)


def L_hess(x: float, check: bool = True) -> float:
    if check:
        _check_open_unit("x", x)
    return 1.0 / x


@dataclass(frozen=True)
class GPoint:
    x: float
    h: float
    v: float

    def __post_init__(self):
        for name in ("x", "h", "v"):
            _check_open_unit(name, getattr(self, name))


def G_value(p: GPoint) -> float:
    hv = p.h * p.v
    return (p.x - hv) ** 2 / hv


def G_grad(p: GPoint) -> np.ndarray:
    x, h, v = p.x, p.h, p.v
    return np.array([
        2.0 * x / (h * v) - 2.0,
        -(x**2) / (v * h**2) + v,
        -(x**2) / (h * v**2) + h,
    ])


def G_hess(p: GPoint) -> np.ndarray:
    """Hessian in the order ``(x, h, v)``.

    Note ``d2G/dh2 = 2 x**2 / (h**3 v)``, positive, and likewise for ``v``.
    """
    x, h, v = p.x, p.h, p.v
    xx = 2.0 / (h * v)
    hh = 2.0 * x**2 / (h**3 * v)
    vv = 2.0 * x**2 / (h * v**3)
    xh = -2.0 * x / (h**2 * v)
    xv = -2.0 * x / (h * v**2)
    hv = x**2 / (h**2 * v**2) + 1.0
    return np.array([[xx, xh, xv], [xh, hh, hv], [xv, hv, vv]])


def G_curvature(p: GPoint) -> float:
    """``(1/(h v)**2) * (4 + x**4/v**4 + 4 x**3/v**3 - 8 x/v)``.

    The reduced sum of products of second derivatives. At ``h = 1/m``,
    ``v = m x`` it equals ``(4 + 1/m**4 + 4/m**3 - 8/m) / x**2``, which
    tends to ``4 / x**2`` only as ``m`` grows.
    """
    x, h, v = p.x, p.h, p.v
    r = x / v
    return (4.0 + r**4 + 4.0 * r**3 - 8.0 * r) / (h * v) ** 2


def _interpolated(x: float, mean: float, c: float, name: str) -> float:
    point = mean + c * (x - mean)
    if point <= 0.0:
        raise ValueError(f"interpolated point {point!r} must be positive ({name})")
    return point


def delta_variance_L(x: float, mean: float, var: float, c_l: float) -> float:
    """``(1 + ln x)**2 var + var**2 / (mean + c_l (x - mean))**2``."""
    _check_open_unit("x", x)
    _check_open_unit("mean", mean)
    _check_open_unit("c_l", c_l)
    if var < 0:
        raise ValueError(f"variance must be nonnegative, got {var}")
    point = _interpolated(x, mean, c_l, "c_l")
    return (1.0 + math.log(x)) ** 2 * var + var**2 / point**2


def delta_variance_G(x: float, mean: float, var: float, c_g: float) -> float:
    """``4 var**2 / (mean + c_g (x - mean))**2``.

    The bracket is the ``x`` coordinate of the point between the mean and
    the observation where the second-order remainder is taken.
    """
    _check_open_unit("x", x)
    _check_open_unit("mean", mean)
    _check_open_unit("c_g", c_g)
    if var < 0:
        raise ValueError(f"variance must be nonnegative, got {var}")
    point = _interpolated(x, mean, c_g, "c_g")
    return 4.0 * var**2 / point**2


def total_variance(per_cell) -> float:
    """Sum of all per-cell variances, in row-major order."""
    arr = np.asarray(per_cell, dtype=float)
    if np.any(arr < 0):
        raise ValueError("per-cell variances must be nonnegative")
    return math.fsum(arr.ravel().tolist())


@dataclass(frozen=True)
class DeltaVarianceReport:
    """Per-cell and total delta-method variances for one context.

    Cells are ``(i, k)`` with ``1 <= i, k <= m-1``; entries are NaN where the
    empirical value or mean sits outside ``(0, 1)``. Totals skip NaN cells.
    """

    context: tuple[int, ...]
    x: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    per_cell_variance_L: np.ndarray
    per_cell_variance_G: np.ndarray
    c_l: float
    c_g: float
    blocks: int

    @property
    def total_L(self) -> float:
        return total_variance(self.per_cell_variance_L[~np.isnan(self.per_cell_variance_L)])

    @property
    def total_G(self) -> float:
        return total_variance(self.per_cell_variance_G[~np.isnan(self.per_cell_variance_G)])

    def to_csv(self) -> str:
        lines = ["i,k,x,mean,var,sigma2_L,sigma2_G"]
        size = self.x.shape[0]
        for i in range(size):
            for k in range(size):
                vals = (self.x[i, k], self.mean[i, k], self.var[i, k],
                        self.per_cell_variance_L[i, k], self.per_cell_variance_G[i, k])
                lines.append(f"{i + 1},{k + 1}," + ",".join(repr(float(v)) for v in vals))
        lines.append(f"total,,,,,{self.total_L!r},{self.total_G!r}")
        return "\n".join(lines) + "\n"


def block_moments(
    seq: SymbolSequence, context, blocks: int = 20
) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance across non-overlapping blocks of the flank joint ``J_a``.

    Blocks where the context has no flanked occurrence are skipped. Variance
    uses ``ddof=1``.
    """
    if blocks < 2:
        raise ValueError(f"need at least 2 blocks, got {blocks}")
    size = seq.n // blocks
    need = len(context) + 2
    if size < need:
        raise ValueError(f"blocks of length {size} cannot hold words of length {need}")
    samples = []
    for b in range(blocks):
        part = SymbolSequence(seq.symbols[b * size : (b + 1) * size], seq.m)
        joint, total = sandwich_joint(build_counts(part, need), context)
        if total > 0:
            samples.append(joint)
    if len(samples) < 2:
        raise ValueError(f"context {tuple(context)} is flanked in fewer than 2 blocks")
    stack = np.stack(samples)
    return stack.mean(axis=0), stack.var(axis=0, ddof=1)


def diagnose(
    seq: SymbolSequence, context, blocks: int = 20, c_l: float = 0.5, c_g: float = 0.5
) -> DeltaVarianceReport:
    """Plug block-estimated moments of ``J_a(i, k)`` into both variance formulas."""
    context = tuple(int(s) for s in context)
    m = seq.m
    joint, _ = sandwich_joint(build_counts(seq, len(context) + 2), context)
    mean, var = block_moments(seq, context, blocks)
    cells = (m - 1, m - 1)
    out_L = np.full(cells, np.nan)
    out_G = np.full(cells, np.nan)
    for i in range(m - 1):
        for k in range(m - 1):
            x, mu, s2 = joint[i, k], mean[i, k], var[i, k]
            if 0.0 < x < 1.0 and 0.0 < mu < 1.0:
                out_L[i, k] = delta_variance_L(x, mu, s2, c_l)
                out_G[i, k] = delta_variance_G(x, mu, s2, c_g)
    return DeltaVarianceReport(
        context=context,
        x=joint[: m - 1, : m - 1],
        mean=mean[: m - 1, : m - 1],
        var=var[: m - 1, : m - 1],
        per_cell_variance_L=out_L,
        per_cell_variance_G=out_G,
        c_l=c_l,
        c_g=c_g,
        blocks=blocks,
    )
