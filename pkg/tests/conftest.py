import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def naive_spectrum(P, tol=1.5e-12):
    """Sorted (chordal value, ordered multiplicity) by a plain double loop.

    Each pair's dot product is formed as ax*bx + ay*by + az*bz; sorted dot
    products closer than ``tol`` to their neighbour are one distance.
    """
    P = [tuple(map(float, p)) for p in np.asarray(P, dtype=float)]
    n = len(P)
    dots = []
    for i in range(n):
        for j in range(n):
            if i != j:
                a, b = P[i], P[j]
                dots.append(a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
    dots.sort()
    groups = []
    for d in dots:
        if groups and d - groups[-1][2] <= tol:
            groups[-1][1] += 1
            groups[-1][2] = d
        else:
            groups.append([d, 1, d])
    out = [(math.sqrt(max(0.0, 2.0 - 2.0 * min(d0, 1.0))), m) for d0, m, _ in groups]
    return sorted(out)


def naive_energy(P, beta=1.0, metric="angular"):
    P = np.asarray(P, dtype=float)
    n = len(P)
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            c = np.clip(P[i] @ P[j], -1, 1)
            d = np.arccos(c) if metric == "angular" else np.linalg.norm(P[i] - P[j])
            s += d**-beta
    return s / n**2


@pytest.fixture
def square():
    from sphdist import great_circle_equispaced

    return great_circle_equispaced(4)


@pytest.fixture
def antipodal():
    from sphdist import great_circle_equispaced

    return great_circle_equispaced(2)
