import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphdist import io as sio
from sphdist import measures as M
from sphdist.distance_set import distance_spectrum
from sphdist.energy import theorem_ratio
from sphdist.generators import generate, sphere_partition
from sphdist.sphere import sample_uniform


@given(st.integers(0, 10_000), st.integers(2, 50))
def test_points_round_trip_bitwise(seed, n):
    from sphdist.generators import PointSet

    A = PointSet(sample_uniform(seed, n), "uniform", seed)
    B = sio.loads_points(sio.dumps_points(A))
    assert np.array_equal(A.points, B.points)
    assert (B.family_label, B.seed) == ("uniform", seed)


def test_points_file(tmp_path):
    A = generate("homogeneous", 50, 3)
    sio.write_points(tmp_path / "a.txt", A)
    assert np.array_equal(sio.read_points(tmp_path / "a.txt").points, A.points)
    bad = sio.dumps_points(A).replace("# N=", "# N=1")
    with pytest.raises(ValueError):
        sio.loads_points(bad)


def test_partition_round_trip():
    part = sphere_partition(300)
    text = sio.dumps_partition(part)
    back = sio.loads_partition(text)
    assert len(back) == len(part)
    assert np.array_equal(back.band_cells, part.band_cells)
    assert np.array_equal(back.band_edges, part.band_edges)
    assert all(a == b for a, b in zip(back.cells, part.cells))
    assert sio.dumps_partition(back) == text
    first = text.splitlines()[3].split()
    assert first[:2] == ["0", "0"] and len(first) == 6


@pytest.mark.parametrize("q", ["exact", "grid", "grid:0.01"])
def test_spectrum_round_trip(q):
    S = distance_spectrum(generate("concentrated", 100, 1), quantization=q)
    T = sio.loads_spectrum(sio.dumps_spectrum(S))
    assert np.array_equal(S.values, T.values) and np.array_equal(S.multiplicities, T.multiplicities)
    assert (T.mode, T.quantization, T.N, T.family_label, T.seed) == (
        S.mode, S.quantization, S.N, S.family_label, S.seed,
    )


def test_records_round_trip():
    recs = [theorem_ratio(generate(f, 64, 2)) for f in ("great_circle", "homogeneous")]
    back = sio.loads_records(sio.dumps_records(recs))
    for a, b in zip(recs, back):
        assert (a.family_label, a.N, a.distinct_count, a.I1, a.ratio, a.distinct_grid, a.ratio_grid) == (
            b.family_label, b.N, b.distinct_count, b.I1, b.ratio, b.distinct_grid, b.ratio_grid,
        )
    assert sio.dumps_records(back) == sio.dumps_records(recs)


def test_measure_tables_parse():
    A = generate("homogeneous", 8, 0)
    h = M.nu_density(A, 0.1)
    s = M.nu_fourier(h)
    env = M.fourier_envelope(A, 0.1, s.lambdas)
    rows = sio.loads_table(sio.dumps_histogram(h).split("\n", 1)[1])
    assert len(rows) == len(h.masses) and float(rows[3]["mass"]) == h.masses[3]
    f = sio.loads_table(sio.dumps_fourier(s))
    assert complex(float(f[5]["re"]), float(f[5]["im"])) == s.values[5]
    e = sio.loads_table(sio.dumps_envelope(env, np.abs(s.values)))
    assert list(e[0]) == ["lambda", "I", "II", "III", "IV", "envelope", "nu_hat_abs"]
    assert float(e[-1]["envelope"]) == env.total[-1]
