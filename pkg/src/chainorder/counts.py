"""Symbol sequences and overlapping substring counts.

Words are packed into base-``m`` integers (first symbol most significant,
symbols shifted to ``0..m-1``), so the counts for every word of length ``l``
live in one dense array of size ``m**l`` indexed by the packed code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from chainorder.errors import InfeasibleError, InputError

# Dense count arrays above this many cells are refused rather than allocated.
MAX_DENSE_CELLS = 1 << 24


@dataclass(frozen=True)
class SymbolSequence:
    """A finite-alphabet sample with symbols coded ``1..m``."""

    symbols: np.ndarray
    m: int

    def __post_init__(self):
        arr = np.asarray(self.symbols, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError("a symbol sequence must be a non-empty 1-d array")
        if self.m < 2:
            raise InputError(f"alphabet size must be >= 2, got {self.m}")
        lo, hi = int(arr.min()), int(arr.max())
        if lo < 1 or hi > self.m:
            bad = int(np.flatnonzero((arr < 1) | (arr > self.m))[0])
            raise InputError(
                f"symbol {int(arr[bad])} at position {bad + 1} is outside 1..{self.m}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "symbols", arr)

    @property
    def n(self) -> int:
        return int(self.symbols.size)

    def __len__(self) -> int:
        return self.n

    @classmethod
    def from_iterable(cls, symbols: Sequence[int], m: int | None = None) -> "SymbolSequence":
        arr = np.asarray(list(symbols), dtype=np.int64)
        if m is None:
            m = max(int(arr.max()), 2) if arr.size else 2
        return cls(arr, m)


def encode(word: Sequence[int], m: int) -> int:
    """Pack a 1-based word into its base-``m`` code."""
    code = 0
    for s in word:
        code = code * m + (int(s) - 1)
    return code


def decode(code: int, length: int, m: int) -> tuple[int, ...]:
    """Inverse of :func:`encode` for a word of known length."""
    out = []
    for _ in range(length):
        code, r = divmod(code, m)
        out.append(r + 1)
    return tuple(reversed(out))


@dataclass(frozen=True)
class CountTable:
    """Occurrence counts ``N(w | X)`` for all words of length ``0..max_len``.

    ``levels[l]`` is an int64 array of length ``m**l``; ``levels[0] == [n]``.
    Occurrences are counted at every start position ``1..n-l+1`` (overlapping,
    no wrap-around).
    """

    m: int
    n: int
    max_len: int
    levels: tuple[np.ndarray, ...] = field(repr=False)

    def level(self, length: int) -> np.ndarray:
        if not 0 <= length <= self.max_len:
            raise ValueError(f"word length {length} outside 0..{self.max_len}")
        return self.levels[length]

    def count(self, word: Sequence[int]) -> int:
        return int(self.level(len(word))[encode(word, self.m)])

    def __getitem__(self, word: Sequence[int]) -> int:
        return self.count(word)

    def as_dict(self, include_zero: bool = False) -> dict[tuple[int, ...], int]:
        out = {}
        for length, arr in enumerate(self.levels):
            for code in range(arr.size) if include_zero else np.flatnonzero(arr):
                out[decode(int(code), length, self.m)] = int(arr[code])
        return out


def count_levels(symbols: np.ndarray, m: int, max_len: int) -> list[np.ndarray]:
    """Word counts for a batch of equal-length samples.

    ``symbols`` has shape ``(batch, n)`` with entries in ``1..m`` (not
    validated here). Returns ``levels`` with ``levels[l]`` of shape
    ``(batch, m**l)``; ``levels[0]`` holds ``n`` for every row.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    batch, n = symbols.shape
    x = symbols - 1
    levels = [np.full((batch, 1), n, dtype=np.int64)]
    codes = np.zeros((batch, n + 1), dtype=np.int64)
    rows = np.arange(batch, dtype=np.int64)[:, None]
    for length in range(1, max_len + 1):
        size = m**length
        # codes[:, j] packs x[:, j : j + length]
        codes = codes[:, : n - length + 1] * m + x[:, length - 1 :]
        flat = np.bincount((codes + rows * size).ravel(), minlength=batch * size)
        levels.append(flat.astype(np.int64, copy=False).reshape(batch, size))
    return levels


def build_counts(seq: SymbolSequence, max_len: int) -> CountTable:
    """Count every word of length up to ``max_len`` in ``seq``."""
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    n, m = seq.n, seq.m
    if max_len > n:
        raise InfeasibleError(
            f"words of length {max_len} need a sample of at least n={max_len}, got n={n}"
        )
    if m**max_len > MAX_DENSE_CELLS:
        raise InfeasibleError(
            f"m**max_len = {m}**{max_len} exceeds the dense table limit {MAX_DENSE_CELLS}"
        )
    levels = []
    for arr in count_levels(seq.symbols[None, :], m, max_len):
        arr = arr[0]
        arr.setflags(write=False)
        levels.append(arr)
    return CountTable(m=m, n=n, max_len=max_len, levels=tuple(levels))


def next_distribution(table: CountTable, context: Sequence[int]) -> np.ndarray:
    """Empirical successor distribution ``N(a j) / N(a)`` for ``j = 1..m``.

    Components may sum to less than one when ``a`` ends the sample; a context
    that never occurs yields the zero vector.
    """
    eta = len(context)
    if eta + 1 > table.max_len:
        raise ValueError(f"context length {eta} needs max_len >= {eta + 1}")
    total = table.count(context)
    if total == 0:
        return np.zeros(table.m)
    base = encode(context, table.m) * table.m
    return table.level(eta + 1)[base : base + table.m] / total


def sandwich_counts(table: CountTable, eta: int) -> np.ndarray:
    """Raw counts ``C[a, i, k] = N(i a k)`` for every context of length ``eta``.

    Returns an array of shape ``(m**eta, m, m)`` indexed by packed context code.
    """
    if eta + 2 > table.max_len:
        raise ValueError(f"context length {eta} needs max_len >= {eta + 2}")
    m = table.m
    return table.level(eta + 2).reshape(m, m**eta, m).transpose(1, 0, 2)


def sandwich_joint(table: CountTable, context: Sequence[int]) -> tuple[np.ndarray, int]:
    """Joint law of the symbols flanking ``context``.

    Returns ``(J, M)`` with ``M = sum_{s,t} N(s a t)`` and
    ``J[i-1, k-1] = N(i a k) / M`` (all zeros when ``M == 0``).
    """
    eta = len(context)
    raw = sandwich_counts(table, eta)[encode(context, table.m)]
    total = int(raw.sum())
    if total == 0:
        return np.zeros((table.m, table.m)), 0
    return raw / total, total


# --------------------------------------------------------------------------
# sequence files


def parse_sequence(
    text: str, m: int | None = None, alphabet: str | None = None
) -> SymbolSequence:
    """Parse whitespace-separated integers, or a character string under ``alphabet``.

    With ``alphabet`` (e.g. ``"acgt"``) each character maps to its 1-based
    position; whitespace is ignored. Errors name the 1-based line and column.
    """
    symbols: list[int] = []
    if alphabet is not None:
        if len(set(alphabet)) != len(alphabet):
            raise InputError(f"alphabet {alphabet!r} has repeated characters")
        lookup = {ch: i + 1 for i, ch in enumerate(alphabet)}
        if m is None:
            m = len(alphabet)
        for lineno, line in enumerate(text.splitlines(), 1):
            for col, ch in enumerate(line, 1):
                if ch.isspace():
                    continue
                if ch not in lookup or lookup[ch] > m:
                    raise InputError(f"line {lineno}, column {col}: symbol {ch!r} not in alphabet")
                symbols.append(lookup[ch])
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            col = 0
            for token in line.split():
                col = line.index(token, col) + 1
                try:
                    value = int(token)
                except ValueError:
                    raise InputError(
                        f"line {lineno}, column {col}: {token!r} is not an integer symbol"
                    ) from None
                if value < 1 or (m is not None and value > m):
                    hi = m if m is not None else "m"
                    raise InputError(
                        f"line {lineno}, column {col}: symbol {value} outside 1..{hi}"
                    )
                symbols.append(value)
                col += len(token) - 1
    if not symbols:
        raise InputError("sequence is empty")
    return SymbolSequence.from_iterable(symbols, m)


def read_sequence(
    path: str | Path, m: int | None = None, alphabet: str | None = None
) -> SymbolSequence:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return parse_sequence(text, m=m, alphabet=alphabet)


def format_sequence(seq: SymbolSequence, per_line: int = 50) -> str:
    s = [str(v) for v in seq.symbols.tolist()]
    return "".join(" ".join(s[i : i + per_line]) + "\n" for i in range(0, len(s), per_line))


def write_sequence(path: str | Path, seq: SymbolSequence) -> None:
    Path(path).write_text(format_sequence(seq), encoding="utf-8")
