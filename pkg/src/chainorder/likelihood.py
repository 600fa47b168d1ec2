"""Maximized log likelihood and the AIC / BIC / EDC order criteria."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from chainorder.counts import CountTable
from chainorder.errors import InfeasibleError

CRITERIA = ("aic", "bic", "edc")


def log_likelihood(table: CountTable, eta: int) -> float:
    """Maximized order-``eta`` log likelihood (natural log).

    ``sum_a sum_j N(a j) * ln(N(a j) / S_a)`` where ``S_a = sum_j N(a j)`` is
    the number of occurrences of ``a`` that have a successor. Zero counts
    contribute nothing.
    """
    if eta < 0 or eta + 1 > table.max_len:
        raise ValueError(f"order {eta} needs 0 <= eta and max_len >= {eta + 1}")
    m = table.m
    joint = table.level(eta + 1).reshape(-1, m)
    totals = joint.sum(axis=1, keepdims=True)
    mask = joint > 0
    ratio = np.where(mask, joint, 1) / np.where(totals > 0, totals, 1)
    return float(np.sum(joint[mask] * np.log(ratio[mask])))


CONVENTIONS = ("free-parameters", "printed")


def penalty(m: int, n: int, eta: int, convention: str = "free-parameters") -> dict[str, float]:
    """Complexity penalties added to ``-2 log L`` for each criterion.

    ``"free-parameters"`` (default) charges for the ``m**eta * (m-1)`` free
    transition probabilities of an order-``eta`` chain:

        AIC: 2 k     BIC: k ln(n)     EDC: 2 k ln(ln(n))

    ``"printed"`` uses base ``m**(eta+1) * 2(m-1)`` with factors 1,
    ``ln(n)/2`` and ``ln(ln(n)) / (2(m-1))``. It over-penalizes AIC by a
    factor ``m`` and lets EDC fall below AIC for moderate ``n``.
    """
    if convention == "free-parameters":
        k = m**eta * (m - 1)
        return {
            "aic": 2.0 * k,
            "bic": k * math.log(n),
            "edc": 2.0 * k * math.log(math.log(n)),
        }
    if convention == "printed":
        base = m ** (eta + 1) * 2 * (m - 1)
        return {
            "aic": float(base),
            "bic": base * math.log(n) / 2.0,
            "edc": base * math.log(math.log(n)) / (2.0 * (m - 1)),
        }
    raise ValueError(f"unknown penalty convention {convention!r}; expected one of {CONVENTIONS}")


def _check_n(n: int) -> None:
    if n <= math.e:
        raise InfeasibleError(f"n={n} is too small: ln(ln(n)) must be positive (need n >= 3)")


@dataclass(frozen=True)
class CriterionCurve:
    B: int
    n: int
    m: int
    log_lik: np.ndarray
    aic: np.ndarray
    bic: np.ndarray
    edc: np.ndarray
    convention: str = "free-parameters"

    def values(self, which: str) -> np.ndarray:
        key = which.lower()
        if key not in CRITERIA:
            raise ValueError(f"unknown criterion {which!r}; expected one of {CRITERIA}")
        return getattr(self, key)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eta", "log_lik", "aic", "bic", "edc"])
        for eta in range(self.B + 1):
            w.writerow(
                [eta]
                + [repr(float(v[eta])) for v in (self.log_lik, self.aic, self.bic, self.edc)]
            )
        return buf.getvalue()


def criteria(table: CountTable, B: int, convention: str = "free-parameters") -> CriterionCurve:
    """Evaluate log likelihood and all three penalized criteria for ``eta = 0..B``."""
    if B < 0:
        raise ValueError(f"B must be >= 0, got {B}")
    if B + 1 > table.max_len:
        raise InfeasibleError(f"B={B} needs a count table with max_len >= {B + 1}")
    _check_n(table.n)
    ll = np.array([log_likelihood(table, eta) for eta in range(B + 1)])
    pens = [penalty(table.m, table.n, eta, convention) for eta in range(B + 1)]
    return CriterionCurve(
        B=B,
        n=table.n,
        m=table.m,
        log_lik=ll,
        aic=-2.0 * ll + np.array([p["aic"] for p in pens]),
        bic=-2.0 * ll + np.array([p["bic"] for p in pens]),
        edc=-2.0 * ll + np.array([p["edc"] for p in pens]),
        convention=convention,
    )


def argmin_first(values) -> int:
    """Index of the minimum, ties going to the smallest index."""
    return int(np.argmin(np.asarray(values, dtype=float)))


def estimate_order(curve: CriterionCurve, which: str) -> int:
    return argmin_first(curve.values(which))
