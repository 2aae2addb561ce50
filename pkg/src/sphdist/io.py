"""Text and CSV formats.

Floats are written with ``repr`` (shortest round-trip form), so equal bits
always give equal bytes and every file reads back exactly.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, TextIO, Tuple, Union

import numpy as np

from .distance_set import DistanceSpectrum, parse_quantization
from .energy import VerificationRecord
from .generators import CurvedRectangle, PointSet, SpherePartition

PathLike = Union[str, Path]


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    if x is None:
        return ""
    return str(x)


def _meta_lines(meta: Dict[str, object]) -> List[str]:
    return [f"# {k}={fmt(v)}" for k, v in meta.items()]


def _parse_meta(lines: Iterable[str]) -> Tuple[Dict[str, str], List[str]]:
    meta: Dict[str, str] = {}
    body: List[str] = []
    for line in lines:
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            for part in s[1:].split(","):
                if "=" in part:
                    k, v = part.split("=", 1)
                    meta[k.strip()] = v.strip()
        else:
            body.append(s)
    return meta, body


def dumps_points(A: PointSet) -> str:
    lines = _meta_lines({"family": A.family_label, "seed": A.seed, "N": A.N})
    lines += [" ".join(repr(float(c)) for c in row) for row in A.points]
    return "\n".join(lines) + "\n"


def write_points(path: PathLike, A: PointSet) -> None:
    Path(path).write_text(dumps_points(A))


def loads_points(text: str) -> PointSet:
    meta, body = _parse_meta(text.splitlines())
    P = np.array([[float(v) for v in line.split()] for line in body], dtype=float)
    A = PointSet(P, meta.get("family", "custom"), int(meta.get("seed", 0)))
    if "N" in meta and int(meta["N"]) != A.N:
        raise ValueError(f"header says N={meta['N']} but file holds {A.N} points")
    return A


def read_points(path: PathLike) -> PointSet:
    return loads_points(Path(path).read_text())


def dumps_partition(part: SpherePartition) -> str:
    lines = _meta_lines({"target_N": part.target_N, "cells": len(part)})
    lines.append("# band,cell,colat0,colat1,lon0,lon1")
    for (b, k), c in zip(part.cell_ids(), part.cells):
        lines.append(" ".join([str(b), str(k)] + [repr(v) for v in (c.colat0, c.colat1, c.lon0, c.lon1)]))
    return "\n".join(lines) + "\n"


def loads_partition(text: str) -> SpherePartition:
    meta, body = _parse_meta(text.splitlines())
    cells, bands = [], []
    for line in body:
        f = line.split()
        bands.append(int(f[0]))
        cells.append(CurvedRectangle(*map(float, f[2:6])))
    counts = np.bincount(bands)
    edges = [cells[0].colat0]
    start = 0
    for n in counts:
        edges.append(cells[start].colat1)
        start += n
    return SpherePartition(np.array(edges), counts.astype(np.int64), int(meta["target_N"]), cells)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = _io.StringIO()
    for c in comments:
        buf.write(c + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def dumps_spectrum(S: DistanceSpectrum) -> str:
    comment = "# " + ",".join(
        f"{k}={v}"
        for k, v in [
            ("mode", S.mode),
            ("quantization", S.quantization.label()),
            ("N", S.N),
            ("family", S.family_label),
            ("seed", S.seed),
        ]
    )
    rows = zip(S.values.tolist(), S.multiplicities.tolist())
    return _csv_text(["value", "multiplicity"], rows, [comment])


def loads_spectrum(text: str) -> DistanceSpectrum:
    meta, body = _parse_meta(text.splitlines())
    rows = list(csv.reader(body[1:]))
    N = int(meta["N"])
    return DistanceSpectrum(
        np.array([float(r[0]) for r in rows]),
        np.array([int(r[1]) for r in rows], dtype=np.int64),
        meta["mode"],
        parse_quantization(meta["quantization"], N),
        N,
        meta.get("family", "custom"),
        int(meta.get("seed", 0)),
    )


RECORD_HEADER = ["family", "seed", "N", "distinct", "I1", "ratio", "distinct_grid", "ratio_grid"]


def dumps_records(records: Sequence[VerificationRecord]) -> str:
    rows = [
        (r.family_label, r.seed, r.N, r.distinct_count, r.I1, r.ratio, r.distinct_grid, r.ratio_grid)
        for r in records
    ]
    return _csv_text(RECORD_HEADER, rows)


def loads_records(text: str) -> List[VerificationRecord]:
    reader = csv.DictReader(_io.StringIO(text))
    out = []
    for r in reader:
        dg = r.get("distinct_grid") or None
        rg = r.get("ratio_grid") or None
        out.append(
            VerificationRecord(
                r["family"], int(r["seed"]), int(r["N"]), int(r["distinct"]), float(r["I1"]), float(r["ratio"]),
                None if dg is None else int(dg), None if rg is None else float(rg),
            )
        )
    return out


def dumps_histogram(hist) -> str:
    comment = f"# domain={hist.domain},delta={hist.delta!r},bin_width={hist.bin_width!r},N={hist.N}"
    return _csv_text(["t", "mass"], zip(hist.centers.tolist(), hist.masses.tolist()), [comment])


def dumps_fourier(samples) -> str:
    rows = zip(samples.lambdas.tolist(), samples.values.real.tolist(), samples.values.imag.tolist())
    return _csv_text(["lambda", "re", "im"], rows)


def dumps_envelope(env, nu_hat_abs) -> str:
    rows = zip(
        env.lambdas.tolist(), env.I.tolist(), env.II.tolist(), env.III.tolist(), env.IV.tolist(),
        env.total.tolist(), np.asarray(nu_hat_abs).tolist(),
    )
    return _csv_text(["lambda", "I", "II", "III", "IV", "envelope", "nu_hat_abs"], rows)


def dumps_table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return _csv_text(header, rows)


def loads_table(text: str) -> List[Dict[str, str]]:
    return list(csv.DictReader(_io.StringIO(text)))
