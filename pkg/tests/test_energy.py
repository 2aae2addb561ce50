import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphdist.energy import (
    DuplicatePointError,
    FitDegenerateError,
    discrete_energy,
    energy_growth_fit,
    fit_growth,
    theorem_ratio,
)
from sphdist.generators import generate, great_circle_equispaced, homogeneous_set
from sphdist.sphere import sample_uniform

from conftest import naive_energy


def test_known_energies(antipodal, square):
    assert discrete_energy(antipodal).value == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert discrete_energy(square).value == pytest.approx(5 / (4 * math.pi), rel=1e-15)
    assert discrete_energy(square, metric="chordal").value == pytest.approx(
        (8 / math.sqrt(2) + 4 / 2) / 16, rel=1e-15
    )


@given(st.integers(2, 200))
def test_beta_zero_counts_pairs(N):
    A = great_circle_equispaced(N)
    # the pair count is summed exactly, so the only rounding is the final division
    assert discrete_energy(A, 0.0).value == (N - 1) / N
    assert discrete_energy(A, 0.0).value == pytest.approx(1 - 1 / N, rel=1e-15)


@given(st.integers(0, 5000), st.integers(2, 40), st.sampled_from([0.5, 1.0, 2.0]))
def test_energy_matches_naive(seed, n, beta):
    P = sample_uniform(seed, n)
    for metric in ("angular", "chordal"):
        assert discrete_energy(P, beta, metric).value == pytest.approx(naive_energy(P, beta, metric), rel=1e-11)


@given(st.integers(0, 5000), st.integers(2, 120))
def test_chord_arc_energy_comparability(seed, n):
    P = sample_uniform(seed, n)
    a = discrete_energy(P).value
    c = discrete_energy(P, metric="chordal").value
    assert a <= c * (1 + 1e-9)
    assert c <= math.pi / 2 * a * (1 + 1e-9)


def test_duplicate_points_named():
    P = np.array([[1.0, 0, 0], [0, 1.0, 0], [1.0, 0, 0]])
    with pytest.raises(DuplicatePointError) as e:
        discrete_energy(P)
    assert (e.value.i, e.value.j) == (0, 2)
    with pytest.raises(ValueError):
        discrete_energy(great_circle_equispaced(4), beta=-1)
    with pytest.raises(ValueError):
        discrete_energy(great_circle_equispaced(4), metric="taxicab")


def test_energy_thread_invariance():
    A = generate("homogeneous", 3000, 1)
    base = discrete_energy(A).value
    for t in (2, 4, 8):
        assert discrete_energy(A, threads=t).value == base


def test_fit_growth_recovers_models():
    N = np.array([100, 1000, 10000, 100000])
    f = fit_growth(N, 0.3 * np.log(N) + 2, "log")
    assert f.parameter == pytest.approx(0.3) and f.intercept == pytest.approx(2)
    g = fit_growth(N, 3 * N**0.5, "power")
    assert g.parameter == pytest.approx(0.5) and g.residual < 1e-12
    with pytest.raises(FitDegenerateError):
        fit_growth(N, np.ones(4))
    with pytest.raises(ValueError):
        fit_growth(N, np.ones(4) * np.arange(4), "cubic")


def test_energy_growth_fit_contracts():
    with pytest.raises(ValueError):
        energy_growth_fit("great_circle", [10, 100, 1000])
    with pytest.raises(ValueError):
        energy_growth_fit("great_circle", [10, 100, 50, 1000])
    f = energy_growth_fit("great_circle", [100, 200, 400, 800])
    assert f.model == "log" and f.sizes == (100, 200, 400, 800)
    # harmonic-sum oracle: I1 of N equispaced points is (2/N^2) sum_k N/(2 pi k / N) folded
    for N, v in zip(f.sizes, f.values):
        k = np.arange(1, N)
        theta = np.minimum(2 * math.pi * k / N, 2 * math.pi - 2 * math.pi * k / N)
        assert v == pytest.approx(N * np.sum(1 / theta) / N**2, rel=1e-12)


def test_theorem_ratio_records(antipodal, square):
    r = theorem_ratio(antipodal)
    assert r.distinct_count == 1 and r.ratio == pytest.approx(1 / (4 * math.pi))
    r = theorem_ratio(square)
    assert r.ratio == pytest.approx(5 / (8 * math.pi)) and r.cs_bound == pytest.approx(1.8)
    r = theorem_ratio(great_circle_equispaced(1000))
    assert r.distinct_count == 500 and r.ratio >= 0.1
    h = theorem_ratio(homogeneous_set(100, 0))
    assert h.distinct_grid <= h.distinct_count
