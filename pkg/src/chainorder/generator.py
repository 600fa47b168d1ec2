"""Order-kappa transition tensors (mixture transition distribution) and sampling."""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from chainorder.counts import SymbolSequence, encode
from chainorder.errors import InputError

TOL = 1e-12
DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class MTDSpec:
    """Mixture-transition parameters.

    ``lam[t]`` weights the ``t``-th symbol of the conditioning word (oldest
    first) and ``R`` is column-stochastic: ``R[j, i]`` is the probability of
    moving to ``j+1`` from ``i+1``.
    """

    m: int
    kappa: int
    lam: tuple[float, ...]
    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        lam = tuple(float(v) for v in self.lam)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "lam", lam)
        if self.m < 2:
            raise InputError(f"alphabet size must be >= 2, got {self.m}")
        if self.kappa < 1:
            raise InputError(f"mixture order must be >= 1, got {self.kappa}")
        if len(lam) != self.kappa:
            raise InputError(f"lambda has {len(lam)} weights, expected kappa={self.kappa}")
        if any(v < 0 for v in lam):
            raise InputError(f"lambda weights must be nonnegative: {lam}")
        if abs(sum(lam) - 1.0) > TOL:
            raise InputError(f"lambda weights sum to {sum(lam)!r}, not 1")
        if R.shape != (self.m, self.m):
            raise InputError(f"R has shape {R.shape}, expected ({self.m}, {self.m})")
        if np.any(R < 0):
            raise InputError("R has negative entries")
        sums = R.sum(axis=0)
        for col, s in enumerate(sums, 1):
            if abs(s - 1.0) > TOL:
                raise InputError(f"column {col} of R sums to {s!r}, not 1")


@dataclass(frozen=True)
class TransitionTensor:
    """Conditional laws ``q[code] = P(next | context)`` for every context of length ``kappa``.

    Rows are indexed by packed context code (oldest symbol most significant).
    """

    m: int
    kappa: int
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.shape != (self.m**self.kappa, self.m):
            raise InputError(
                f"transition table has shape {q.shape}, expected ({self.m**self.kappa}, {self.m})"
            )
        if np.any(q < 0):
            raise InputError("transition probabilities must be nonnegative")
        sums = q.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > TOL)
        if bad.size:
            raise InputError(f"transition row {int(bad[0]) + 1} sums to {sums[bad[0]]!r}, not 1")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    def row(self, context: Sequence[int]) -> np.ndarray:
        if len(context) != self.kappa:
            raise ValueError(f"context must have length {self.kappa}")
        return self.q[encode(context, self.m)]


def build_tensor(spec: MTDSpec) -> TransitionTensor:
    """``q[(i_1..i_kappa)](j) = sum_t lam[t] * R[j, i_t]``."""
    m, kappa = spec.m, spec.kappa
    q = np.zeros((m**kappa, m))
    for code, word in enumerate(itertools.product(range(m), repeat=kappa)):
        for t, i in enumerate(word):
            q[code] += spec.lam[t] * spec.R[:, i]
    return TransitionTensor(m=m, kappa=kappa, q=q)


def sample_chain(
    tensor: TransitionTensor, n: int, seed: int, burn_in: int = DEFAULT_BURN_IN
) -> SymbolSequence:
    """Draw ``n`` symbols from the chain after a burn-in.

    The first ``kappa`` symbols are uniform on ``1..m``; they and the next
    ``burn_in`` steps are discarded. Uses numpy's PCG64 seeded with ``seed``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    m, kappa = tensor.m, tensor.kappa
    rng = np.random.Generator(np.random.PCG64(seed))
    init = rng.integers(0, m, size=kappa)
    total = burn_in + n
    uniforms = rng.random(total).tolist()

    cdfs = np.cumsum(tensor.q, axis=1)
    cdfs[:, -1] = 1.0
    cdf_rows = cdfs.tolist()
    top = m ** (kappa - 1) if kappa > 0 else 1
    code = 0
    for s in init.tolist():
        code = code * m + s

    out = [0] * total
    last = m - 1
    for step, u in enumerate(uniforms):
        j = bisect.bisect_right(cdf_rows[code], u)
        if j > last:
            j = last
        out[step] = j
        if kappa:
            code = (code % top) * m + j
    return SymbolSequence(np.asarray(out[burn_in:], dtype=np.int64) + 1, m)


def _matrix(value: Any, m: int, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        if arr.size != m * m:
            raise InputError(f"{what} needs {m * m} entries, got {arr.size}")
        arr = arr.reshape(m, m)
    return arr


def tensor_from_config(cfg: Mapping[str, Any]) -> TransitionTensor:
    """Build a tensor from a generator config mapping.

    Either ``{m, kappa, lambda, R}`` (``R`` row-major, ``m*m`` entries or
    nested, columns summing to 1) or ``{m, kappa, rows}`` with ``m**kappa``
    explicit rows.
    """
    try:
        m = int(cfg["m"])
    except (KeyError, TypeError, ValueError):
        raise InputError("generator config needs an integer 'm'") from None
    if "rows" in cfg:
        rows = np.asarray(cfg["rows"], dtype=float)
        if rows.ndim != 2:
            raise InputError("'rows' must be a list of probability vectors")
        kappa = int(cfg.get("kappa", 0))
        return TransitionTensor(m=m, kappa=kappa, q=rows)
    missing = [k for k in ("kappa", "lambda", "R") if k not in cfg]
    if missing:
        raise InputError(f"generator config is missing {missing} (or give 'rows')")
    spec = MTDSpec(
        m=m,
        kappa=int(cfg["kappa"]),
        lam=tuple(cfg["lambda"]),
        R=_matrix(cfg["R"], m, "R"),
    )
    return build_tensor(spec)
