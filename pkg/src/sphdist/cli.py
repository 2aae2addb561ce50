"""Command line: ``sphdist <subcommand> [flags]``.

Each subcommand writes one output file (``--out``; defaults to
``<subcommand>.csv``) and prints a short summary. The exit status is 0 when
every checked contract held, 1 when one failed (the first is named on
stderr) and 2 on bad input.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import io as sio
from . import measures as M
from .distance_set import cauchy_schwarz_bound, distance_spectrum
from .energy import discrete_energy
from .generators import FAMILIES, generate, sphere_partition
from .harness import (
    ConfigError,
    MeasureRow,
    ExperimentConfig,
    delta_for,
    read_config_file,
    run_experiment,
    run_measure_suite,
)
from .sphere import sample_uniform, to_spherical

COMMANDS = ("generate", "spectrum", "energy", "verify", "measure", "partition-check")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; command-line flags override it")
    p.add_argument("--family", help=f"one of: {', '.join(sorted(FAMILIES))}")
    p.add_argument("--sizes", help="comma-separated N values, e.g. 100,1000")
    p.add_argument("--seeds", help="comma-separated integer seeds")
    p.add_argument("--metric", choices=("angular", "chordal"))
    p.add_argument("--quantization", help="exact | grid | grid:<width>")
    p.add_argument("--delta-policy", dest="delta_policy", help="1/N, c/N or a fixed number")
    p.add_argument("--out", help="output path")
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphdist", description="Distinct distances and energies on S^2.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "spectrum":
            p.add_argument("--points", help="read the set from a point file instead of generating it")
            p.add_argument("--mode", choices=("chordal", "dot"))
        if name == "energy":
            p.add_argument("--points", help="read the set from a point file instead of generating it")
            p.add_argument("--beta", type=float)
        if name == "measure":
            p.add_argument("--dump", help="directory for per-run histogram/Fourier/envelope CSVs")
        if name == "partition-check":
            p.add_argument("--samples", type=int, default=100_000, help="uniform probe points")
            p.add_argument("--partition-out", help="directory for partition cell files")
    return parser


def load_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in ("family", "sizes", "seeds", "metric", "quantization", "delta_policy", "out", "threads", "beta", "mode"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return ExperimentConfig.from_mapping(values)


def _write(path: str, text: str):
    Path(path).write_text(text)


def _finish(violations: List[str]) -> int:
    if violations:
        print(f"contract violated: {violations[0]}", file=sys.stderr)
        if len(violations) > 1:
            print(f"({len(violations) - 1} more)", file=sys.stderr)
        return 1
    print("all contracts held")
    return 0


def cmd_generate(cfg: ExperimentConfig, args) -> int:
    combos = [(N, s) for N in cfg.sizes for s in cfg.seeds]
    out = Path(cfg.out or "generate.txt")
    if len(combos) > 1:
        out.mkdir(parents=True, exist_ok=True)
    for N, seed in combos:
        A = generate(cfg.family, N, seed)
        target = out / f"{cfg.family}_N{N}_s{seed}.txt" if len(combos) > 1 else out
        sio.write_points(target, A)
        print(f"{cfg.family} N={N} seed={seed}: {A.N} points -> {target}")
    return 0


def _one_set(cfg, args):
    if getattr(args, "points", None):
        return sio.read_points(args.points)
    if len(cfg.sizes) != 1 or len(cfg.seeds) != 1:
        raise ConfigError("this subcommand takes one set: pass a single size and seed, or --points")
    return generate(cfg.family, cfg.sizes[0], cfg.seeds[0])


def cmd_spectrum(cfg: ExperimentConfig, args) -> int:
    A = _one_set(cfg, args)
    S = distance_spectrum(A, cfg.mode, cfg.quantization, cfg.threads)
    _write(cfg.out or "spectrum.csv", sio.dumps_spectrum(S))
    cs = cauchy_schwarz_bound(S)
    print(f"{A.family_label} N={A.N}: {len(S)} distinct {cfg.mode} values ({S.quantization.label()}), "
          f"Cauchy-Schwarz bound {cs:.6g}")
    return _finish([] if cs <= len(S) and S.total == A.N * (A.N - 1) else ["spectrum counting identities"])


def cmd_energy(cfg: ExperimentConfig, args) -> int:
    if getattr(args, "points", None):
        sets = [sio.read_points(args.points)]
    else:
        sets = [generate(cfg.family, N, s) for N in cfg.sizes for s in cfg.seeds]
    rows, bad = [], []
    for A in sets:
        rep = discrete_energy(A, cfg.beta, cfg.metric, cfg.threads)
        rows.append((A.family_label, A.seed, A.N, rep.beta, rep.metric, rep.value))
        print(f"{A.family_label} N={A.N} seed={A.seed}: I_{rep.beta:g} ({rep.metric}) = {rep.value:.10g}")
        if cfg.beta == 1.0 and cfg.metric == "angular" and rep.value < (1 - 1 / A.N) / math.pi:
            bad.append(f"I1 >= (1 - 1/N)/pi ({A.family_label} N={A.N})")
    _write(cfg.out or "energy.csv", sio.dumps_table(["family", "seed", "N", "beta", "metric", "I"], rows))
    return _finish(bad)


def cmd_verify(cfg: ExperimentConfig, args) -> int:
    rep = run_experiment(cfg)
    _write(cfg.out or "verify.csv", sio.dumps_records(rep.records))
    print(f"{len(rep.records)} runs; c_min = {rep.c_min:.6g} at family={rep.c_min_run[0]} "
          f"seed={rep.c_min_run[1]} N={rep.c_min_run[2]}")
    for model, fit in rep.growth_fits.items():
        name = "log-slope" if model == "log" else "power exponent"
        print(f"I1 growth {name}: {fit.parameter:.6g} (residual {fit.residual:.3g})")
    return _finish(rep.violations)


def cmd_measure(cfg: ExperimentConfig, args) -> int:
    rep = run_measure_suite(cfg)
    rows = [r.row() for r in rep.measure_rows]
    _write(cfg.out or "measure.csv", sio.dumps_table(MeasureRow.header(), rows))
    if args.dump:
        d = Path(args.dump)
        d.mkdir(parents=True, exist_ok=True)
        for N in cfg.sizes:
            for seed in cfg.seeds:
                A = generate(cfg.family, N, seed)
                delta = delta_for(cfg.delta_policy, A.N)
                hist = M.nu_density(A, delta, "dot", threads=cfg.threads)
                samples = M.nu_fourier(hist)
                env = M.fourier_envelope(A, delta, samples.lambdas)
                stem = f"{cfg.family}_N{N}_s{seed}"
                (d / f"{stem}_hist.csv").write_text(sio.dumps_histogram(hist))
                (d / f"{stem}_fourier.csv").write_text(sio.dumps_fourier(samples))
                (d / f"{stem}_envelope.csv").write_text(sio.dumps_envelope(env, np.abs(samples.values)))
    for r in rep.measure_rows:
        print(f"N={r.N} seed={r.seed} delta={r.delta:.4g}: mass={r.mass:.6f} plancherel={r.plancherel:.2e} "
              f"support_bound={r.support_bound:.4g}/{r.distinct_dot} C_env={r.C_env:.4g}")
    print(f"C_env over all runs: {rep.C_env:.6g}")
    return _finish(rep.violations)


def cmd_partition_check(cfg: ExperimentConfig, args) -> int:
    rows, bad = [], []
    probe = sample_uniform(cfg.seeds[0], args.samples)
    for N in cfg.sizes:
        part = sphere_partition(N)
        s = part.side
        corners = np.concatenate([c.corners() for c in part.cells])
        pts = np.concatenate([probe, corners])
        half = part.multiplicity(probe, closed=False)
        located = part.locate(probe)
        closed = part.multiplicity(pts, closed=True)
        diam = max(c.angular_diameter() for c in part.cells)
        rows.append((N, len(part), diam, 4 * s, int(half.min()), int(half.max()), int(closed.max())))
        print(f"N={N}: {len(part)} cells, max diameter {diam:.4g} (limit {4 * s:.4g}), "
              f"half-open multiplicity {half.min()}..{half.max()}, closed max {closed.max()}")
        if not (half.min() == half.max() == 1):
            bad.append(f"half-open cells tile S^2 (N={N})")
        colat, lon = to_spherical(probe)
        hits = np.array([part.cells[c].contains(colat[i : i + 1], lon[i : i + 1])[0] for i, c in enumerate(located[:2000])])
        if not hits.all():
            bad.append(f"locate agrees with half-open membership (N={N})")
        if closed.max() > 4:
            bad.append(f"closed-cell multiplicity <= 4 (N={N})")
        if not N / 4 <= len(part) <= 4 * N:
            bad.append(f"cell count within factor 4 of N (N={N})")
        if diam > 4 * s:
            bad.append(f"cell diameter <= 4 sqrt(4 pi/N) (N={N})")
        if args.partition_out:
            d = Path(args.partition_out)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"partition_N{N}.txt").write_text(sio.dumps_partition(part))
    _write(cfg.out or "partition-check.csv", sio.dumps_table(
        ["N", "cells", "max_diameter", "diameter_limit", "half_open_min", "half_open_max", "closed_max"], rows))
    return _finish(bad)


HANDLERS = {
    "generate": cmd_generate,
    "spectrum": cmd_spectrum,
    "energy": cmd_energy,
    "verify": cmd_verify,
    "measure": cmd_measure,
    "partition-check": cmd_partition_check,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return HANDLERS[args.command](cfg, args)
    except (ConfigError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
