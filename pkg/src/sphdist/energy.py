"""Discrete energies I_beta and the ratio #distances * I_1 / N."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from . import _kernels
from ._parallel import ordered_map, row_blocks
from .distance_set import cauchy_schwarz_bound, distance_spectrum, requantize
from .generators import PointSet, _point_array, generate

METRICS = ("angular", "chordal")


class DuplicatePointError(ValueError):
    def __init__(self, i: int, j: int):
        super().__init__(f"points {i} and {j} coincide; energies need distinct points")
        self.i = i
        self.j = j


class FitDegenerateError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyReport:
    beta: float
    value: float
    N: int
    metric: str


def discrete_energy(A, beta: float = 1.0, metric: str = "angular", threads: int = 1) -> EnergyReport:
    """(1/N^2) * sum over ordered pairs a != b of dist(a, b)**(-beta).

    Row blocks are summed with Neumaier compensation and combined with
    ``math.fsum``, so the value does not depend on ``threads``.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    P = _point_array(A)
    n = P.shape[0]
    if n < 2:
        raise ValueError("discrete_energy needs N >= 2")
    chordal = metric == "chordal"
    parts = ordered_map(
        lambda b: _kernels.energy_rows(P, b[0], b[1], float(beta), chordal),
        row_blocks(n),
        threads,
    )
    terms = []
    for s, c, i, j in parts:
        if i >= 0:
            raise DuplicatePointError(int(i), int(j))
        terms.extend((s, c))
    value = 2.0 * math.fsum(terms) / (n * n)
    return EnergyReport(float(beta), value, n, metric)


@dataclass(frozen=True)
class GrowthFit:
    family_label: str
    sizes: tuple
    values: tuple
    model: str
    parameter: float
    intercept: float
    residual: float


def fit_growth(sizes: Sequence[int], values: Sequence[float], model: str = "log", family_label: str = "custom") -> GrowthFit:
    """Least-squares fit of I ~ s ln N + c (``log``) or I ~ c N^p (``power``).

    ``residual`` is the RMS misfit on the fitted axes.
    """
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.asarray(values, dtype=float)
    if np.ptp(y) == 0.0:
        raise FitDegenerateError(f"all energies equal ({y[0]!r}); growth fit is degenerate")
    if model == "log":
        target = y
    elif model == "power":
        if np.any(y <= 0):
            raise ValueError("power fit needs positive values")
        target = np.log(y)
    else:
        raise ValueError(f"model must be 'log' or 'power', got {model!r}")
    slope, icpt = np.polyfit(x, target, 1)
    resid = float(np.sqrt(np.mean((target - (slope * x + icpt)) ** 2)))
    return GrowthFit(family_label, tuple(int(s) for s in sizes), tuple(float(v) for v in y), model, float(slope), float(icpt), resid)


FamilyHandle = Union[str, Callable[[int, int], PointSet]]


def energy_growth_fit(
    family: FamilyHandle,
    sizes: Sequence[int],
    seed: int = 0,
    model: str = "log",
    threads: int = 1,
) -> GrowthFit:
    """Generate the family at each size, compute I_1, and fit its growth.

    The fit uses the realized cardinality of each generated set as N.
    """
    sizes = list(sizes)
    if len(sizes) < 4:
        raise ValueError("a growth fit needs at least 4 sizes")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    make = (lambda N, s: generate(family, N, s)) if isinstance(family, str) else family
    label = family if isinstance(family, str) else getattr(family, "__name__", "custom")
    Ns, Is = [], []
    for N in sizes:
        A = make(N, seed)
        Ns.append(A.N)
        Is.append(discrete_energy(A, 1.0, "angular", threads).value)
    return fit_growth(Ns, Is, model, label)


@dataclass(frozen=True)
class VerificationRecord:
    family_label: str
    seed: int
    N: int
    distinct_count: int
    I1: float
    ratio: float
    distinct_grid: Optional[int] = None
    ratio_grid: Optional[float] = None
    cs_bound: Optional[float] = None


def theorem_ratio(A: PointSet, threads: int = 1, grid_width: Optional[float] = None) -> VerificationRecord:
    """Exact distinct count times I_1 (angular) over N, plus the grid variant.

    The grid variant bins chordal distances at ``grid_width`` (default 1/N).
    """
    P = _point_array(A)
    n = P.shape[0]
    spec = distance_spectrum(A, "chordal", "exact", threads)
    d = len(spec)
    I1 = discrete_energy(A, 1.0, "angular", threads).value
    w = grid_width if grid_width is not None else 1.0 / n
    dg = len(requantize(spec, w))
    label = A.family_label if isinstance(A, PointSet) else "custom"
    seed = A.seed if isinstance(A, PointSet) else 0
    return VerificationRecord(label, seed, n, d, I1, d * I1 / n, dg, dg * I1 / n, cauchy_schwarz_bound(spec))
