"""Seeded experiment driver behind the command line."""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import measures as M
from .distance_set import distinct_count, parse_quantization
from .energy import GrowthFit, VerificationRecord, discrete_energy, fit_growth, theorem_ratio
from .generators import FAMILIES, FAMILY_MIN_SIZE, generate

MEASURE_SIZE_CAP = 64
SEEDLESS_FAMILIES = {"great_circle"}


class ConfigError(ValueError):
    pass


def _int_list(value) -> Tuple[int, ...]:
    if isinstance(value, str):
        parts = [p for p in re.split(r"[,\s]+", value.strip()) if p]
        return tuple(int(float(p)) for p in parts)
    return tuple(int(v) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    family: str = "great_circle"
    sizes: Tuple[int, ...] = (4,)
    seeds: Tuple[int, ...] = (0,)
    metric: str = "angular"
    quantization: str = "exact"
    delta_policy: str = "1/N"
    out: Optional[str] = None
    threads: int = 1
    beta: float = 1.0
    mode: str = "chordal"

    def __post_init__(self):
        object.__setattr__(self, "sizes", _int_list(self.sizes))
        object.__setattr__(self, "seeds", _int_list(self.seeds))
        object.__setattr__(self, "threads", int(self.threads))
        object.__setattr__(self, "beta", float(self.beta))
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; valid families: {', '.join(sorted(FAMILIES))}")
        if not self.sizes:
            raise ConfigError("sizes must be non-empty")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ConfigError(f"sizes must be strictly increasing, got {self.sizes}")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        lo = FAMILY_MIN_SIZE[self.family]
        if self.sizes[0] < lo:
            raise ConfigError(f"family {self.family!r} needs sizes >= {lo}, got {self.sizes[0]}")
        if self.metric not in ("angular", "chordal"):
            raise ConfigError(f"metric must be angular or chordal, got {self.metric!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        parse_quantization(self.quantization, 2)

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        clean = {}
        for k, v in values.items():
            key = k.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {k!r}")
            if v is not None:
                clean[key] = v
        return cls(**clean)


def read_config_file(path) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out: Dict[str, str] = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def delta_for(policy: str, N: int) -> float:
    """``"1/N"``, ``"c/N"`` or a fixed number."""
    p = policy.replace(" ", "")
    m = re.fullmatch(r"([0-9.eE+-]*)/N", p)
    if m:
        c = float(m.group(1)) if m.group(1) else 1.0
        return c / N
    return float(p)


@dataclass
class MeasureRow:
    family: str
    seed: int
    N: int
    delta: float
    mass: float
    plancherel: float
    support_bound: float
    distinct_dot: int
    l2_I: float
    l2_II: float
    l2_III: float
    l2_IV: float
    I1: float
    chain: float
    C_env: float
    energy_nu: float
    I1_chordal: float

    @classmethod
    def header(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list:
        return [getattr(self, f.name) for f in fields(self)]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: List[VerificationRecord] = field(default_factory=list)
    measure_rows: List[MeasureRow] = field(default_factory=list)
    growth_fits: Dict[str, GrowthFit] = field(default_factory=dict)
    c_min: Optional[float] = None
    c_min_run: Optional[Tuple[str, int, int]] = None
    C_env: Optional[float] = None
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _check(report: ExperimentReport, cond: bool, message: str):
    if not cond:
        report.violations.append(message)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Generate every (size, seed) set and record #distances, I_1 and their ratio."""
    report = ExperimentReport(config)
    q = parse_quantization(config.quantization, 2)
    cache: Dict[int, VerificationRecord] = {}
    for N in config.sizes:
        for seed in config.seeds:
            if config.family in SEEDLESS_FAMILIES and N in cache:
                rec = replace(cache[N], seed=seed)
            else:
                A = generate(config.family, N, seed)
                w = None if q.is_exact else q.width
                if config.quantization.strip().lower() == "grid":
                    w = 1.0 / A.N
                rec = replace(theorem_ratio(A, config.threads, w), seed=seed)
                cache[N] = rec
            report.records.append(rec)
            tag = f"{config.family} N={rec.N} seed={seed}"
            _check(report, rec.cs_bound <= rec.distinct_count, f"cauchy_schwarz_bound <= distinct_count ({tag})")
            _check(report, rec.I1 >= (1 - 1 / rec.N) / math.pi, f"I1 >= (1 - 1/N)/pi ({tag})")
            _check(report, rec.ratio > 0, f"ratio > 0 ({tag})")
    best = min(report.records, key=lambda r: r.ratio)
    report.c_min = best.ratio
    report.c_min_run = (best.family_label, best.seed, best.N)
    if len(config.sizes) >= 4:
        Ns = sorted({r.N for r in report.records})
        if len(Ns) >= 4:
            by_N = {n: [r.I1 for r in report.records if r.N == n] for n in Ns}
            I = [float(np.mean(by_N[n])) for n in Ns]
            for model in ("log", "power"):
                try:
                    report.growth_fits[model] = fit_growth(Ns, I, model, config.family)
                except ValueError as exc:
                    report.violations.append(f"growth fit ({model}): {exc}")
    return report


def measure_run(A, delta: float, threads: int = 1) -> MeasureRow:
    """Every measure-side quantity for one point set."""
    n = A.N
    hist = M.nu_density(A, delta, "dot", threads=threads)
    samples = M.nu_fourier(hist)
    env = M.fourier_envelope(A, delta, samples.lambdas)
    l2 = M.envelope_l2(A, delta)
    chord_hist = M.nu_density(A, delta, "chordal", threads=threads)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", M.DiagonalDominatedWarning)
        e_nu = M.energy_from_nu(A, delta, hist=chord_hist)
    return MeasureRow(
        family=A.family_label,
        seed=A.seed,
        N=n,
        delta=delta,
        mass=hist.total_mass,
        plancherel=M.plancherel_check(hist, samples),
        support_bound=M.support_count_bound(hist, delta),
        distinct_dot=distinct_count(A, "dot", "exact", threads),
        l2_I=l2.I,
        l2_II=l2.II,
        l2_III=l2.III,
        l2_IV=l2.IV,
        I1=discrete_energy(A, 1.0, "angular", threads).value,
        chain=M.counting_chain(hist, samples),
        C_env=M.envelope_ratio(samples, env),
        energy_nu=e_nu,
        I1_chordal=discrete_energy(A, 1.0, "chordal", threads).value,
    )


def measure_contracts(r: MeasureRow) -> List[str]:
    tag = f"{r.family} N={r.N} seed={r.seed}"
    closed = 4.0 / (r.N**2 * r.delta**2)
    checks = [
        (abs(r.mass - 1.0) <= 1e-3, "nu mass = 1 +- 1e-3"),
        (r.plancherel <= 0.05, "Plancherel discrepancy <= 0.05"),
        (r.support_bound <= r.distinct_dot, "support_count_bound <= distinct_count"),
        (abs(r.l2_I + r.l2_II - closed) <= 0.01 * closed, "int I^2 + int II^2 within 1% of 4/(N^2 delta^2)"),
        (r.l2_III <= 2 * r.I1, "int III^2 <= 2 I1"),
        (r.l2_IV <= 2 * r.I1, "int IV^2 <= 2 I1"),
        (r.chain >= 0.5, "|supp nu| * int |nu_hat|^2 >= 1/2"),
        (r.C_env <= 100, "C_env <= 100"),
        (abs(r.energy_nu - r.I1_chordal) <= 5, "|energy_from_nu - I1(chordal)| <= 5"),
    ]
    return [f"{msg} ({tag})" for ok, msg in checks if not ok]


def run_measure_suite(config: ExperimentConfig) -> ExperimentReport:
    """Measure-side checks for each (size, seed); sizes are capped at 64."""
    if max(config.sizes) > MEASURE_SIZE_CAP:
        raise ConfigError(
            f"measure suite sizes must be <= {MEASURE_SIZE_CAP} (desk-scale cap), got {max(config.sizes)}"
        )
    report = ExperimentReport(config)
    for N in config.sizes:
        for seed in config.seeds:
            A = generate(config.family, N, seed)
            delta = delta_for(config.delta_policy, A.N)
            row = measure_run(A, delta, config.threads)
            row.seed = seed
            report.measure_rows.append(row)
            report.violations.extend(measure_contracts(row))
    report.C_env = max(r.C_env for r in report.measure_rows)
    return report
