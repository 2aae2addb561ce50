"""Distance spectra: distinct pairwise distances and their multiplicities.

Every distance is derived from one canonical dot product per pair,
``a.x*b.x + a.y*b.y + a.z*b.z``. In exact mode two pairs share a distance
when their dot products, rounded to multiples of 1e-12, fall in the same
run of consecutive integers. Each distance is reported through the smallest
dot product in its run; the chordal value is then ``sqrt(2 - 2 dot)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from . import _kernels
from ._parallel import ordered_map, pair_offset, row_blocks
from .generators import PointSet, _point_array

MODES = ("chordal", "dot")

SORT_PAIR_LIMIT = 60_000_000
HASH_SLOT_LIMIT = 1 << 28


@dataclass(frozen=True)
class Quantization:
    """``width is None`` means exact merging; otherwise half-open bins."""

    width: Optional[float] = None

    def __post_init__(self):
        if self.width is not None and not self.width > 0:
            raise ValueError(f"grid width must be > 0, got {self.width}")

    @property
    def is_exact(self) -> bool:
        return self.width is None

    def label(self) -> str:
        return "exact" if self.width is None else f"grid:{self.width!r}"


EXACT = Quantization()

QuantizationLike = Union[Quantization, str, float, None]


def parse_quantization(q: QuantizationLike, N: int) -> Quantization:
    """Accept ``"exact"``, ``"grid"`` (width 1/N), ``"grid:<w>"`` or a width."""
    if q is None or isinstance(q, Quantization):
        return q or EXACT
    if isinstance(q, (int, float)):
        return Quantization(float(q))
    text = str(q).strip().lower()
    if text == "exact":
        return EXACT
    if text == "grid":
        return Quantization(1.0 / N)
    if text.startswith("grid:"):
        return Quantization(float(text[5:]))
    raise ValueError(f"unrecognized quantization {q!r}")


@dataclass(frozen=True, eq=False)
class DistanceSpectrum:
    values: np.ndarray
    multiplicities: np.ndarray
    mode: str
    quantization: Quantization
    N: int
    family_label: str = "custom"
    seed: int = 0

    def __len__(self):
        return self.values.shape[0]

    @property
    def entries(self):
        return list(zip(self.values.tolist(), self.multiplicities.tolist()))

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())


def _run_starts(keys: np.ndarray) -> np.ndarray:
    return np.concatenate([[0], np.flatnonzero(np.diff(keys)) + 1]).astype(np.int64)


def _keys_by_sort(P: np.ndarray, threads: int):
    n = P.shape[0]
    dots = np.empty(n * (n - 1) // 2)

    def fill(block):
        r0, r1 = block
        a, b = pair_offset(n, r0), pair_offset(n, r1)
        _kernels.pair_dots(P, r0, r1, dots[a:b])

    ordered_map(fill, row_blocks(n), threads)
    dots.sort()
    # rint(d * scale) is monotone in d, so sorted dots give sorted keys
    return _kernels.sorted_key_runs(dots)


def _hash_rows(P: np.ndarray, r0: int, r1: int):
    size = 1 << 16
    keys = np.full(size, _kernels._EMPTY, dtype=np.int64)
    counts = np.zeros(size, dtype=np.int64)
    mins = np.empty(size)
    used = 0
    row = r0
    while row < r1:
        row, used = _kernels.hash_dot_keys(P, row, r1, keys, counts, mins, used)
        if row < r1:
            size *= 2
            if size > HASH_SLOT_LIMIT:
                raise MemoryError(
                    f"more than {HASH_SLOT_LIMIT // 2} distinct dot products; "
                    "set too large for exact spectra at desk scale"
                )
            keys, counts, mins = _kernels.rehash(keys, counts, mins, size)
    occ = keys != _kernels._EMPTY
    return keys[occ], counts[occ], mins[occ]


def _keys_by_hash(P: np.ndarray, threads: int):
    n = P.shape[0]
    blocks = row_blocks(n, max(1, n * (n - 1) // 2 // max(threads, 1) + 1))
    parts = ordered_map(lambda b: _hash_rows(P, *b), blocks, threads)
    keys = np.concatenate([p[0] for p in parts])
    counts = np.concatenate([p[1] for p in parts])
    mins = np.concatenate([p[2] for p in parts])
    order = np.lexsort((mins, keys))
    keys, counts, mins = keys[order], counts[order], mins[order]
    starts = _run_starts(keys)
    return keys[starts], np.add.reduceat(counts, starts), mins[starts]


def dot_key_counts(P: np.ndarray, threads: int = 1, method: str = "auto"):
    """Distinct rounded dot keys over unordered pairs.

    Returns sorted keys, their pair counts and the smallest dot product
    under each key.
    """
    n = P.shape[0]
    if method == "auto":
        method = "sort" if n * (n - 1) // 2 <= SORT_PAIR_LIMIT else "hash"
    if method == "sort":
        return _keys_by_sort(P, threads)
    if method == "hash":
        return _keys_by_hash(P, threads)
    raise ValueError(f"unknown method {method!r}")


def merge_adjacent_keys(keys: np.ndarray, counts: np.ndarray, rep: Optional[np.ndarray] = None):
    """Merge runs of consecutive integer keys.

    Each run keeps its first key and, if given, the first entry of ``rep``.
    """
    if keys.shape[0] == 0:
        return (keys, counts) if rep is None else (keys, counts, rep)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(keys) > 1) + 1])
    merged = (keys[starts], np.add.reduceat(counts, starts))
    return merged if rep is None else merged + (rep[starts],)


def dot_to_chordal(d):
    return np.sqrt(np.maximum(0.0, 2.0 - 2.0 * np.asarray(d, dtype=float)))


def _grid_merge(values: np.ndarray, mult: np.ndarray, w: float):
    bins = np.floor(values / w).astype(np.int64)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(bins)) + 1])
    return (bins[starts] + 0.5) * w, np.add.reduceat(mult, starts)


def distance_spectrum(
    A,
    mode: str = "chordal",
    quantization: QuantizationLike = "exact",
    threads: int = 1,
    method: str = "auto",
) -> DistanceSpectrum:
    """Distinct distances of ``A`` with ordered-pair multiplicities.

    Multiplicities count ordered pairs ``(a, b)``, ``a != b``, so they sum to
    ``N**2 - N``. Grid mode bins the exact-mode values into half-open bins
    ``[k w, (k+1) w)`` represented by their midpoints.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    P = _point_array(A)
    n = P.shape[0]
    if n < 2:
        raise ValueError("distance_spectrum needs N >= 2")
    q = parse_quantization(quantization, n)
    _, counts, dots = merge_adjacent_keys(*dot_key_counts(P, threads, method))
    dots = np.clip(dots, -1.0, 1.0)
    mult = 2 * counts
    if mode == "chordal":
        values = dot_to_chordal(dots)[::-1]
        mult = mult[::-1]
    else:
        values = dots
    if not q.is_exact:
        values, mult = _grid_merge(values, mult, q.width)
    label, seed = ("custom", 0)
    if isinstance(A, PointSet):
        label, seed = A.family_label, A.seed
    return DistanceSpectrum(
        np.ascontiguousarray(values), np.ascontiguousarray(mult), mode, q, n, label, seed
    )


def requantize(S: DistanceSpectrum, quantization: QuantizationLike) -> DistanceSpectrum:
    """Re-bin an exact spectrum onto a grid without recomputing pairs."""
    if not S.quantization.is_exact:
        raise ValueError("requantize expects an exact-mode spectrum")
    q = parse_quantization(quantization, S.N)
    if q.is_exact:
        return S
    values, mult = _grid_merge(S.values, S.multiplicities, q.width)
    return DistanceSpectrum(values, mult, S.mode, q, S.N, S.family_label, S.seed)


def distinct_count(A, mode: str = "chordal", quantization: QuantizationLike = "exact", threads: int = 1) -> int:
    """Number of distinct distances, the left-hand side of the counting bound."""
    return len(distance_spectrum(A, mode, quantization, threads))


def cauchy_schwarz_bound(S: DistanceSpectrum) -> float:
    """(sum m)^2 / sum m^2, a lower bound for the number of entries."""
    m = [int(x) for x in S.multiplicities]
    return sum(m) ** 2 / sum(x * x for x in m)
