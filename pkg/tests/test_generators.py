import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphdist.generators import (
    FAMILIES,
    CurvedRectangle,
    PointSet,
    concentrated_rectangle_set,
    generate,
    great_circle_equispaced,
    homogeneous_set,
    maximal_separated_set,
    min_pairwise_angle,
    rectangle_bounds,
    sphere_partition,
)
from sphdist.sphere import sample_uniform, to_spherical

from conftest import naive_spectrum


def brute_min_angle(P):
    G = np.clip(P @ P.T, -1, 1)
    np.fill_diagonal(G, -1)
    return float(np.arccos(G.max()))


def test_pointset_validation():
    with pytest.raises(ValueError):
        PointSet([[1.0, 0, 0]])
    with pytest.raises(ValueError):
        PointSet([[1.0, 0, 0], [1.0, 0, 0]])
    A = PointSet([[1.0, 0, 0], [0, 2.0, 0]])
    assert A.N == 2 and np.allclose(A.points[1], [0, 1, 0])
    with pytest.raises(ValueError):
        A.points[0, 0] = 3.0


def test_great_circle_small_cases():
    A = great_circle_equispaced(2)
    assert np.allclose(A.points[0], -A.points[1], atol=1e-15)
    sq = naive_spectrum(great_circle_equispaced(4).points)
    assert [(round(v, 12), m) for v, m in sq] == [(round(math.sqrt(2), 12), 8), (2.0, 4)]
    hexa = naive_spectrum(great_circle_equispaced(6).points)
    assert np.allclose([v for v, _ in hexa], [1.0, math.sqrt(3), 2.0])
    with pytest.raises(ValueError):
        great_circle_equispaced(1)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_maximal_separated_set(seed):
    sep = 0.1
    A = maximal_separated_set(sep, seed)
    assert 4 / sep**2 <= A.N <= 16 / sep**2
    assert brute_min_angle(A.points) >= sep
    assert min_pairwise_angle(A) == pytest.approx(brute_min_angle(A.points), abs=1e-7)


def test_maximal_separated_set_deterministic_and_validated():
    a, b = maximal_separated_set(0.3, 7), maximal_separated_set(0.3, 7)
    assert np.array_equal(a.points, b.points)
    for bad in (0.0, -0.1, math.pi / 4 + 1e-3):
        with pytest.raises(ValueError):
            maximal_separated_set(bad, 0)


def test_separated_cardinality_scales_with_area():
    ratios = []
    for seed in range(4):
        ratios.append(maximal_separated_set(0.1, seed).N / maximal_separated_set(0.2, seed).N)
    assert 2 <= np.mean(ratios) <= 8


def test_concentrated_rectangle():
    N = 400
    A = concentrated_rectangle_set(N, 3)
    assert 100 <= A.N <= 1600
    c0, c1, l0, l1 = rectangle_bounds(N)
    colat, lon = to_spherical(A.points)
    lon = np.where(lon > math.pi, lon - 2 * math.pi, lon)
    assert np.all((colat >= c0 - 1e-12) & (colat <= c1 + 1e-12))
    assert np.all((lon >= l0 - 1e-12) & (lon <= l1 + 1e-12))
    assert brute_min_angle(A.points) >= 1.0 / N
    with pytest.raises(ValueError):
        concentrated_rectangle_set(15, 0)


def test_partition_counts_and_errors():
    part = sphere_partition(100)
    assert 50 <= len(part) <= 200
    # oracle: recount cells per band from the band edges directly
    s = math.sqrt(4 * math.pi / 100)
    expect = 2 + sum(
        math.ceil(2 * math.pi * math.sin(0.5 * (part.band_edges[b] + part.band_edges[b + 1])) / s)
        for b in range(1, len(part.band_edges) - 2)
    )
    assert len(part) == expect
    with pytest.raises(ValueError):
        sphere_partition(7)


@pytest.mark.parametrize("N", [8, 50, 100, 1000])
def test_partition_tiles_and_diameters(N):
    part = sphere_partition(N)
    P = sample_uniform(11, 100_000)
    half = part.multiplicity(P, closed=False)
    assert np.all(half == 1)
    colat, lon = to_spherical(P)
    loc = part.locate(P)
    for i in range(0, len(P), 997):
        assert part.cells[loc[i]].contains(colat[i : i + 1], lon[i : i + 1])[0]
    corners = np.concatenate([c.corners() for c in part.cells])
    closed = part.multiplicity(np.concatenate([P, corners]), closed=True)
    assert closed.max() <= 4
    assert N / 4 <= len(part) <= 4 * N
    assert max(c.angular_diameter() for c in part.cells) <= 4 * part.side


def test_cell_area_mass_is_balanced():
    part = sphere_partition(200)
    area = np.array([(math.cos(c.colat0) - math.cos(c.colat1)) * (c.lon1 - c.lon0) for c in part.cells])
    assert area.sum() == pytest.approx(4 * math.pi, rel=1e-12)
    assert area.max() / area.min() < 4


def test_curved_rectangle_membership():
    r = CurvedRectangle(1.0, 1.2, 0.5, 0.7)
    c = np.array([1.0, 1.1, 1.2, 1.1])
    l = np.array([0.6, 0.5, 0.6, 0.7])
    assert list(r.contains(c, l)) == [True, True, False, False]
    assert list(r.contains(c, l, closed=True)) == [True, True, True, True]
    with pytest.raises(ValueError):
        CurvedRectangle(1.2, 1.0, 0.0, 0.1)


@pytest.mark.parametrize("N", [8, 100, 1000])
def test_homogeneous_one_point_per_cell(N):
    A = homogeneous_set(N, 4)
    part = sphere_partition(N)
    assert A.N == len(part)
    assert np.array_equal(part.locate(A.points), np.arange(len(part)))
    assert np.array_equal(A.points, homogeneous_set(N, 4).points)
    assert brute_min_angle(A.points) > 0


def test_generate_registry():
    with pytest.raises(KeyError, match="great_circle"):
        generate("nope", 10, 0)
    with pytest.raises(ValueError):
        generate("homogeneous", 4, 0)
    for fam in FAMILIES:
        A = generate(fam, 64, 1)
        assert A.family_label == fam and A.N >= 2


@given(st.integers(2, 300))
def test_great_circle_min_angle(N):
    assert min_pairwise_angle(great_circle_equispaced(N)) == pytest.approx(2 * math.pi / N, rel=1e-9)
