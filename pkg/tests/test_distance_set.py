import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphdist.distance_set import (
    Quantization,
    cauchy_schwarz_bound,
    distance_spectrum,
    distinct_count,
    dot_key_counts,
    merge_adjacent_keys,
    parse_quantization,
    requantize,
)
from sphdist.generators import PointSet, generate, great_circle_equispaced, homogeneous_set
from sphdist.sphere import Rotation, apply_rotation, sample_uniform

from conftest import naive_spectrum

PLATONIC = {
    "tetrahedron": [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]],
    "octahedron": [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
    "cube": [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)],
}
_g = (1 + math.sqrt(5)) / 2
PLATONIC["icosahedron"] = [
    p for a in (-1, 1) for b in (-_g, _g) for p in ([0, a, b], [a, b, 0], [b, 0, a])
]


def test_square_spectrum(square):
    S = distance_spectrum(square)
    assert len(S) == 2
    assert S.values == pytest.approx([math.sqrt(2), 2.0], abs=1e-12)
    assert list(S.multiplicities) == [8, 4]
    assert cauchy_schwarz_bound(S) == pytest.approx(1.8)
    assert distinct_count(square) == 2


def test_antipodal_and_triangle(antipodal):
    S = distance_spectrum(antipodal)
    assert S.entries == [(2.0, 2)]
    assert cauchy_schwarz_bound(S) == 1.0
    T = distance_spectrum(great_circle_equispaced(3))
    assert len(T) == 1 and cauchy_schwarz_bound(T) == 1.0
    assert T.values[0] == pytest.approx(math.sqrt(3), abs=1e-12)


@pytest.mark.parametrize("name", sorted(PLATONIC))
def test_platonic_solids_match_oracle(name):
    P = np.array(PLATONIC[name], dtype=float)
    P = apply_rotation(Rotation.random(3), P / np.linalg.norm(P, axis=1, keepdims=True))
    S = distance_spectrum(P)
    want = naive_spectrum(P)
    assert list(S.multiplicities) == [m for _, m in want]
    assert S.values == pytest.approx([v for v, _ in want], abs=1e-10)


def test_great_circle_floor_half():
    for N in range(2, 101):
        assert distinct_count(great_circle_equispaced(N)) == N // 2


def test_dot_mode_is_mirror_of_chordal():
    A = homogeneous_set(40, 2)
    c = distance_spectrum(A, "chordal")
    d = distance_spectrum(A, "dot")
    assert np.all(np.diff(d.values) > 0) and np.all(np.diff(c.values) > 0)
    assert np.array_equal(c.multiplicities, d.multiplicities[::-1])
    assert np.allclose(c.values, np.sqrt(2 - 2 * d.values[::-1]), atol=1e-12)


@given(st.integers(0, 10_000), st.integers(2, 60))
def test_spectrum_matches_naive_oracle(seed, n):
    P = sample_uniform(seed, n)
    S = distance_spectrum(P)
    want = naive_spectrum(P)
    assert list(S.multiplicities) == [m for _, m in want]
    assert np.allclose(S.values, [v for v, _ in want], rtol=0, atol=1e-13)
    assert S.total == n * n - n
    assert cauchy_schwarz_bound(S) <= len(S)


@given(st.integers(0, 10_000), st.integers(2, 80), st.floats(1e-4, 0.5))
def test_grid_never_exceeds_exact(seed, n, w):
    P = sample_uniform(seed, n)
    S = distance_spectrum(P)
    G = distance_spectrum(P, quantization=w)
    assert len(G) <= len(S)
    assert G.total == S.total
    assert np.all(np.diff(G.values) > 0)
    R = requantize(S, w)
    assert np.array_equal(R.values, G.values) and np.array_equal(R.multiplicities, G.multiplicities)


def test_sort_and_hash_agree():
    P = generate("homogeneous", 300, 1).points
    for a, b in zip(dot_key_counts(P, method="sort"), dot_key_counts(P, method="hash")):
        assert np.array_equal(a, b)
    G = great_circle_equispaced(257).points
    for t in (1, 3):
        for a, b in zip(dot_key_counts(G, threads=t, method="hash"), dot_key_counts(G, method="sort")):
            assert np.array_equal(a, b)


def test_threads_do_not_change_spectrum():
    A = generate("concentrated", 400, 2)
    base = distance_spectrum(A, threads=1)
    for t in (2, 4, 8):
        S = distance_spectrum(A, threads=t)
        assert np.array_equal(S.values, base.values)
        assert np.array_equal(S.multiplicities, base.multiplicities)


def test_merge_adjacent_keys():
    k = np.array([1, 2, 3, 7, 9, 10], dtype=np.int64)
    c = np.array([1, 1, 1, 2, 1, 1], dtype=np.int64)
    mk, mc = merge_adjacent_keys(k, c)
    assert list(mk) == [1, 7, 9] and list(mc) == [3, 2, 2]
    _, _, rep = merge_adjacent_keys(k, c, k * 0.5)
    assert list(rep) == [0.5, 3.5, 4.5]


def test_quantization_parsing():
    assert parse_quantization("exact", 10).is_exact
    assert parse_quantization("grid", 10).width == pytest.approx(0.1)
    assert parse_quantization("grid:0.25", 10).width == 0.25
    assert parse_quantization(0.5, 10).width == 0.5
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            Quantization(bad)
    with pytest.raises(ValueError):
        parse_quantization("fuzzy", 10)
    with pytest.raises(ValueError):
        distance_spectrum(great_circle_equispaced(4), quantization=-0.1)
    with pytest.raises(ValueError):
        distance_spectrum(great_circle_equispaced(4), mode="angular")


def test_rotation_invariance_of_count():
    A = great_circle_equispaced(60)
    R = Rotation.random(5)
    assert distinct_count(PointSet(apply_rotation(R, A.points))) == distinct_count(A)
