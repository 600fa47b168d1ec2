"""Global Dependency Level (GDL) order estimator.

For each context ``a`` of length ``eta`` the symbols immediately before and
after ``a`` form an ``m x m`` contingency table. Its chi-square divergence,
scaled by ``2 ln ln n`` and averaged over contexts with weights ``N(a)/n``, is
mapped through the chi-square survival function with ``(m-1)**2`` degrees of
freedom. Values near 1 mean the flanking symbols look independent given
``eta`` symbols of memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from chainorder.chisq import chi2_survival
from chainorder.counts import CountTable, encode, sandwich_counts
from chainorder.errors import InfeasibleError


def _pearson_from_joint(raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Chi-square divergence for a stack of raw count tables of shape (..., m, m)."""
    total = raw.sum(axis=(-2, -1))
    safe_total = np.where(total > 0, total, 1)
    joint = raw / safe_total[..., None, None]
    rows = joint.sum(axis=-1)
    cols = joint.sum(axis=-2)
    expected = rows[..., :, None] * cols[..., None, :]
    support = expected > 0
    cell = np.where(support, (joint - expected) ** 2 / np.where(support, expected, 1.0), 0.0)
    return total * cell.sum(axis=(-2, -1)), total


def delta2_all(table: CountTable, eta: int) -> tuple[np.ndarray, np.ndarray]:
    """Divergence and flank totals ``M_a`` for every context of length ``eta``."""
    return _pearson_from_joint(sandwich_counts(table, eta).astype(float))


def delta2(table: CountTable, context: Sequence[int]) -> float:
    """Chi-square divergence between the symbols flanking ``context``.

    ``M_a * sum_{i,k} (J(i,k) - H(i) V(k))**2 / (H(i) V(k))`` with ``J`` the
    normalized flank table and ``H``, ``V`` its marginals; 0 when ``M_a = 0``.
    """
    raw = sandwich_counts(table, len(context))[encode(context, table.m)].astype(float)
    value, _ = _pearson_from_joint(raw)
    return float(value)


@dataclass(frozen=True)
class GdlProfile:
    B: int
    n: int
    m: int
    gdl: np.ndarray
    per_eta_statistic: np.ndarray
    # per-eta divergence of every context (index = packed code); for reporting
    local: tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)

    @property
    def dof(self) -> int:
        return (self.m - 1) ** 2

    @property
    def saturated(self) -> bool:
        return decode_order(self.gdl)[1]

    def rounded(self) -> np.ndarray:
        return round_profile(self.gdl)


def gdl_profile(table: CountTable, B: int, min_count: int = 0) -> GdlProfile:
    """GDL values for ``eta = 0..B``.

    ``min_count > 0`` drops contexts whose flank total ``M_a`` is below it;
    the default keeps every context that occurs.
    """
    n = table.n
    if n <= math.e:
        raise InfeasibleError(f"n={n} is too small: ln(ln(n)) must be positive (need n >= 3)")
    if B < 0:
        raise ValueError(f"B must be >= 0, got {B}")
    if B + 2 > table.max_len:
        raise InfeasibleError(f"B={B} needs a count table with max_len >= {B + 2}")
    scale = 2.0 * math.log(math.log(n))
    dof = (table.m - 1) ** 2
    stats = np.zeros(B + 1)
    local = []
    for eta in range(B + 1):
        d2, totals = delta2_all(table, eta)
        keep = totals > 0
        if min_count > 0:
            keep &= totals >= min_count
        weights = table.level(eta) / n
        stats[eta] = float(np.sum(np.where(keep, weights * d2, 0.0))) / scale
        local.append(d2)
    gdl = np.array([chi2_survival(s, dof) for s in stats])
    return GdlProfile(B=B, n=n, m=table.m, gdl=gdl, per_eta_statistic=stats, local=tuple(local))


def round_profile(values) -> np.ndarray:
    """Nearest point of ``{0,1}**(B+1)``; exact halves go to 1."""
    return (np.asarray(values, dtype=float) >= 0.5).astype(np.int64)


def transition_index(bits) -> int:
    """Last ``i`` with ``bits[i] == 0`` and ``bits[i+1] == 1``; -1 for all ones.

    Raises ``ValueError`` when there is no such ``i`` and the vector is not
    all ones.
    """
    bits = np.asarray(bits)
    if np.all(bits == 1):
        return -1
    hits = np.flatnonzero((bits[:-1] == 0) & (bits[1:] == 1))
    if hits.size == 0:
        raise ValueError("profile has no 0 -> 1 transition")
    return int(hits[-1])


def decode_order(profile) -> tuple[int, bool]:
    """Order estimate and saturation flag from a GDL profile.

    Rounds the profile to the nearest binary vector and returns one plus the
    position of the last 0 -> 1 step (0 if every value rounds to 1). With no
    such step the dependence never dies out inside the search window, so the
    bound ``B`` is returned with ``saturated=True``.
    """
    values = profile.gdl if isinstance(profile, GdlProfile) else profile
    bits = round_profile(values)
    try:
        return transition_index(bits) + 1, False
    except ValueError:
        return bits.size - 1, True
