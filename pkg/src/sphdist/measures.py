"""Smoothed measures behind the counting bound.

A point set ``A`` is blurred into a probability measure ``mu`` made of
smooth cap bumps of radius ``2 delta``; ``nu`` is the law of ``x . y`` (or
``|x - y|``) for ``x, y`` drawn independently from ``mu``. The functions
here discretize ``nu``, take its Fourier transform, compare it with the
four-term decay majorant, and evaluate the support/L2 counting chain.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import _kernels
from ._parallel import ordered_map
from .generators import PointSet
from .sphere import Rotation, UnitVector, as_points

DOMAINS = {"dot": (-1.0, 1.0), "chordal": (0.0, 2.0)}
SUPPORT_CONSTANT = 8.0
DEFAULT_RADIAL_NODES = 8
DEFAULT_AZIMUTHAL_NODES = 32
_PAIRS_PER_CHUNK = 32


class ResolutionError(ValueError):
    """Requested frequency or bin width exceeds what the grid resolves."""


class DiagonalDominatedWarning(UserWarning):
    pass


def _g(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def profile(r):
    """C-infinity step: 1 on [0, 1], 0 on [2, inf), built from exp(-1/s)."""
    r = np.asarray(r, dtype=float)
    a = _g(2.0 - r)
    b = _g(r - 1.0)
    return a / (a + b)


@dataclass(frozen=True)
class CapBump:
    """Smooth bump equal to 1 on the delta-cap around ``center``, 0 beyond 2 delta."""

    center: UnitVector
    delta: float

    def __post_init__(self):
        if not isinstance(self.center, UnitVector):
            object.__setattr__(self, "center", UnitVector(*np.asarray(self.center, dtype=float)))
        if not 0.0 < self.delta <= math.pi / 8:
            raise ValueError(f"delta must lie in (0, pi/8], got {self.delta}")

    def __call__(self, omega):
        return cap_bump_eval(self, omega)


def cap_bump_eval(h: CapBump, omega):
    """profile(theta(omega, center) / delta); scalar in, float out."""
    W = as_points(omega.as_array() if isinstance(omega, UnitVector) else omega)
    a = h.center.as_array()
    c = np.cross(W, a)
    theta = np.arctan2(np.sqrt(np.einsum("ij,ij->i", c, c)), W @ a)
    v = profile(theta / h.delta)
    return float(v[0]) if v.shape[0] == 1 and np.ndim(omega) <= 1 else v


def _frame(center) -> np.ndarray:
    """Rotation matrix taking the north pole to ``center``."""
    return Rotation.taking((0.0, 0.0, 1.0), center).matrix


def _cap_nodes(delta: float, n_radial: int, n_azimuth: int, phase: float = 0.0):
    """Reference nodes around the north pole and weights h(psi) sin(psi) dpsi dalpha.

    Gauss-Legendre in the polar angle on [0, delta] and [delta, 2 delta],
    periodic trapezoid in azimuth.
    """
    x, w = np.polynomial.legendre.leggauss(n_radial)
    psi = np.concatenate([(x + 1) * delta / 2, delta + (x + 1) * delta / 2])
    wpsi = np.concatenate([w, w]) * delta / 2
    alpha = phase + 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    P, Aa = np.meshgrid(psi, alpha, indexing="ij")
    nodes = np.stack([np.sin(P) * np.cos(Aa), np.sin(P) * np.sin(Aa), np.cos(P)], axis=-1)
    weights = (profile(P / delta) * np.sin(P)) * wpsi[:, None] * (2 * np.pi / n_azimuth)
    return nodes.reshape(-1, 3), weights.reshape(-1)


def required_nodes(lam: float, delta: float) -> int:
    return max(16, 8 * math.ceil(abs(lam) * delta))


def _cap_fourier_at(h: CapBump, lam: float, omega_local: np.ndarray, n: int) -> complex:
    nodes, w = _cap_nodes(h.delta, n, n)
    phase = -2.0 * np.pi * lam * (nodes @ omega_local)
    return complex(np.sum(w * np.exp(1j * phase)))


def cap_fourier(
    h: CapBump,
    lam: float,
    omega,
    nodes: Optional[int] = None,
    refine: bool = True,
    rtol: float = 1e-6,
    max_doublings: int = 5,
) -> complex:
    """Fourier transform of the surface measure h dsigma at the point lam * omega.

    ``nodes`` is the per-dimension count (polar nodes per radial piece and
    azimuthal nodes); it must be at least max(16, 8 ceil(lam delta)). With
    ``refine`` the count is doubled until two successive values agree to
    ``rtol`` relative, measured against max(|value|, 1e-6 delta^2).
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    need = required_nodes(lam, h.delta)
    n = need if nodes is None else int(nodes)
    if n < need:
        raise ResolutionError(f"{n} nodes cannot resolve lambda={lam} at delta={h.delta}; need >= {need}")
    w = omega.as_array() if isinstance(omega, UnitVector) else np.asarray(omega, dtype=float)
    w = w / np.linalg.norm(w)
    local = _frame(h.center.as_array()).T @ w
    value = _cap_fourier_at(h, lam, local, n)
    if not refine:
        return value
    floor = 1e-6 * h.delta**2
    for _ in range(max_doublings):
        n *= 2
        new = _cap_fourier_at(h, lam, local, n)
        if abs(new - value) <= rtol * max(abs(new), floor):
            return new
        value = new
    raise ResolutionError(f"cap_fourier did not converge at lambda={lam} with {n} nodes")


@dataclass(frozen=True, eq=False)
class DensityHistogram:
    domain: str
    lo: float
    hi: float
    bin_width: float
    masses: np.ndarray
    delta: float
    N: int

    @property
    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.masses.shape[0]) + 0.5) * self.bin_width

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.bin_width

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.masses))


def _histogram_inputs(A, delta, n_radial, n_azimuth):
    P = A.points if isinstance(A, PointSet) else as_points(A)
    ref1, w = _cap_nodes(delta, n_radial, n_azimuth)
    ref2, _ = _cap_nodes(delta, n_radial, n_azimuth, phase=np.pi / n_azimuth)
    frames = np.stack([_frame(p) for p in P])
    X = np.ascontiguousarray(np.einsum("cij,mj->cmi", frames, ref1))
    Y = np.ascontiguousarray(np.einsum("cij,mj->cmi", frames, ref2))
    n = P.shape[0]
    W = np.ascontiguousarray(np.broadcast_to(w / (n * w.sum()), (n, w.shape[0])))
    return P, X, Y, W


def nu_density(
    A,
    delta: float,
    domain: str = "dot",
    bin_width: Optional[float] = None,
    threads: int = 1,
    n_radial: int = DEFAULT_RADIAL_NODES,
    n_azimuth: int = DEFAULT_AZIMUTHAL_NODES,
) -> DensityHistogram:
    """Binned law of the dot product (or chord) of two independent mu-points.

    ``mu`` gives every cap mass 1/N; same-cap pairs are included. The bin
    width defaults to delta/4 and is shrunk so that bins tile the domain.
    Caps are discretized with product quadrature; the second factor uses
    azimuthally staggered nodes so that no node pair coincides.
    """
    if domain not in DOMAINS:
        raise ValueError(f"domain must be one of {tuple(DOMAINS)}, got {domain!r}")
    if not 0.0 < delta <= math.pi / 8:
        raise ValueError(f"delta must lie in (0, pi/8], got {delta}")
    if bin_width is None:
        bin_width = delta / 4
    if bin_width > delta / 4 * (1 + 1e-12):
        raise ResolutionError(f"bin width {bin_width} is coarser than delta/4 = {delta / 4}")
    lo, hi = DOMAINS[domain]
    nbins = math.ceil((hi - lo) / bin_width - 1e-9)
    width = (hi - lo) / nbins
    P, X, Y, W = _histogram_inputs(A, delta, n_radial, n_azimuth)
    n = P.shape[0]
    ia, ib = np.triu_indices(n)
    pairs = np.stack([ia, ib, np.where(ia == ib, 1, 2)], axis=1).astype(np.int64)
    chunks = [pairs[k : k + _PAIRS_PER_CHUNK] for k in range(0, pairs.shape[0], _PAIRS_PER_CHUNK)]
    chordal = domain == "chordal"

    def run(chunk):
        out = np.zeros(nbins)
        _kernels.pair_histogram(X, Y, W, chunk, lo, width, nbins, chordal, out)
        return out

    masses = np.zeros(nbins)
    for part in ordered_map(run, chunks, threads):
        masses += part
    return DensityHistogram(domain, lo, hi, width, masses, float(delta), n)


@dataclass(frozen=True, eq=False)
class FourierSamples:
    lambdas: np.ndarray
    values: np.ndarray

    @property
    def step(self) -> float:
        return float(self.lambdas[1] - self.lambdas[0])


def nu_fourier(hist: DensityHistogram, lambda_max: Optional[float] = None, step: Optional[float] = None) -> FourierSamples:
    """nu_hat(lam) = sum over bins of mass * exp(2 pi i lam t) on a symmetric grid.

    ``lambda_max`` defaults to, and may not exceed, the bin-grid Nyquist
    frequency 1/(2 bin_width). ``step`` defaults to 1/(2 * domain length).
    Negative frequencies are filled by conjugation.
    """
    nyquist = 1.0 / (2.0 * hist.bin_width)
    if lambda_max is None:
        lambda_max = nyquist
    if lambda_max > nyquist * (1 + 1e-9):
        raise ResolutionError(f"lambda_max={lambda_max} exceeds 1/(2 bin width) = {nyquist}")
    if step is None:
        step = 1.0 / (2.0 * (hist.hi - hist.lo))
    if step <= 0:
        raise ValueError("step must be > 0")
    K = max(1, int(round(lambda_max / step)))
    pos = step * np.arange(K + 1)
    t = hist.centers
    vals = np.empty(K + 1, dtype=complex)
    for k0 in range(0, K + 1, 256):
        lam = pos[k0 : k0 + 256, None]
        vals[k0 : k0 + 256] = np.exp(2j * np.pi * lam * t[None, :]) @ hist.masses
    vals[0] = math.fsum(hist.masses)
    lambdas = np.concatenate([-pos[:0:-1], pos])
    values = np.concatenate([np.conj(vals[:0:-1]), vals])
    return FourierSamples(lambdas, values)


def plancherel_check(hist: DensityHistogram, samples: FourierSamples) -> float:
    """Relative gap between sum p^2 dt and the trapezoid sum of |nu_hat|^2 dlam."""
    nyquist = 1.0 / (2.0 * hist.bin_width)
    lam = samples.lambdas
    if lam[-1] < nyquist * (1 - 1e-9):
        raise ResolutionError(f"samples stop at {lam[-1]}; Plancherel needs lambda_max >= {nyquist}")
    if not np.allclose(np.diff(lam), samples.step, rtol=1e-9, atol=0):
        raise ValueError("Fourier samples must lie on a uniform grid")
    lhs = float(np.sum(hist.density**2) * hist.bin_width)
    a2 = np.abs(samples.values) ** 2
    rhs = float((np.sum(a2) - 0.5 * (a2[0] + a2[-1])) * samples.step)
    return abs(lhs - rhs) / lhs


def l2_fourier(samples: FourierSamples) -> float:
    a2 = np.abs(samples.values) ** 2
    return float((np.sum(a2) - 0.5 * (a2[0] + a2[-1])) * samples.step)


def _support_mask(hist: DensityHistogram, mass_threshold: float) -> np.ndarray:
    return hist.masses > mass_threshold


def self_pair_bins(hist: DensityHistogram) -> slice:
    """Bins reachable by same-cap pairs: angle <= 4 delta."""
    if hist.domain == "dot":
        k = int(math.floor((math.cos(4 * hist.delta) - hist.lo) / hist.bin_width))
        return slice(max(k, 0), hist.masses.shape[0])
    k = int(math.floor(2 * math.sin(2 * hist.delta) / hist.bin_width))
    return slice(0, k + 1)


def support_measure(hist: DensityHistogram, mass_threshold: float = 1e-12, exclude_self: bool = False) -> float:
    """Lebesgue measure of the bins carrying mass above ``mass_threshold``.

    With ``exclude_self`` the bins reachable by same-cap pairs (next to
    t = 1 for dot, t = 0 for chordal) are left out.
    """
    mask = _support_mask(hist, mass_threshold).copy()
    if exclude_self:
        mask[self_pair_bins(hist)] = False
    return float(np.count_nonzero(mask)) * hist.bin_width


def support_count_bound(hist: DensityHistogram, delta: Optional[float] = None, mass_threshold: float = 1e-12) -> float:
    """|supp nu| / (8 delta), excluding the same-cap interval.

    Each off-diagonal cap pair spreads over at most 8 delta in either
    variable, so this never exceeds the number of distinct distances.
    """
    d = hist.delta if delta is None else delta
    return support_measure(hist, mass_threshold, exclude_self=True) / (SUPPORT_CONSTANT * d)


def counting_chain(hist: DensityHistogram, samples: FourierSamples, mass_threshold: float = 1e-12) -> float:
    """|supp nu| * int |nu_hat|^2; at least 1 by Cauchy-Schwarz and Plancherel."""
    return support_measure(hist, mass_threshold) * l2_fourier(samples)


@dataclass(frozen=True, eq=False)
class EnvelopeBound:
    lambdas: np.ndarray
    I: np.ndarray
    II: np.ndarray
    III: np.ndarray
    IV: np.ndarray
    cutoffs: np.ndarray
    delta: float
    N: int

    @property
    def total(self) -> np.ndarray:
        return self.I + self.II + self.III + self.IV


def _check_delta(N: int, delta: float):
    if delta < 1.0 / (2 * N) * (1 - 1e-12):
        raise ValueError(f"delta={delta} is below 1/(2N) = {1 / (2 * N)}")


def _sorted_angles(A) -> np.ndarray:
    P = A.points if isinstance(A, PointSet) else as_points(A)
    return np.sort(_kernels.angles_upper(P))


class _Envelope:
    """Evaluates the four majorant terms from sorted pair angles."""

    def __init__(self, theta: np.ndarray, N: int, delta: float):
        if np.any(theta <= 0):
            raise ValueError("coincident points: pair angle 0")
        self.theta = theta
        self.N = N
        self.delta = delta
        inv2 = theta**-2.0
        # suffix[k] = sum of theta^-2 over sorted indices >= k
        self.suffix = np.concatenate([np.cumsum(inv2[::-1])[::-1], [0.0]])

    def terms(self, lam):
        lam = np.abs(np.asarray(lam, dtype=float))
        N, d = self.N, self.delta
        cut = d**-2
        inside = lam <= cut
        I = np.where(inside, 1.0 / N, 0.0)
        with np.errstate(divide="ignore"):
            II = np.where(inside, 0.0, 1.0 / (N * np.where(inside, 1.0, lam) * d * d))
            inv = np.where(lam > 0, 1.0 / np.where(lam > 0, lam, 1.0), np.inf)
        k = np.searchsorted(self.theta, inv, side="right")
        # each unordered angle stands for two ordered pairs
        III = 2.0 * k / N**2
        IV = np.where(lam > 0, 2.0 * self.suffix[k] / (N**2 * np.where(lam > 0, lam, 1.0) ** 2), 0.0)
        return I, II, III, IV


def fourier_envelope(A, delta: float, lam) -> EnvelopeBound:
    """Four-term majorant for |nu_hat(lam)|.

    I = 1/N and II = 1/(N lam delta^2) split at |lam| = delta^-2; III counts
    ordered pairs with |lam| <= 1/theta(a, b) and IV adds (lam theta)^-2 for
    the rest, both normalized by N^2.
    """
    P = A.points if isinstance(A, PointSet) else as_points(A)
    N = P.shape[0]
    _check_delta(N, delta)
    theta = _sorted_angles(P)
    env = _Envelope(theta, N, delta)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    I, II, III, IV = env.terms(lam)
    return EnvelopeBound(lam, I, II, III, IV, 1.0 / theta[::-1], float(delta), N)


def envelope_ratio(samples: FourierSamples, env: EnvelopeBound) -> float:
    """max |nu_hat| / envelope over the sampled frequencies."""
    if env.lambdas.shape != samples.lambdas.shape or not np.array_equal(env.lambdas, samples.lambdas):
        raise ValueError("envelope and samples must share the frequency grid")
    return float(np.max(np.abs(samples.values) / env.total))


class EnvelopeL2(NamedTuple):
    I: float
    II: float
    III: float
    IV: float


_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _gl_segments(f, a: np.ndarray, b: np.ndarray) -> float:
    """Sum of 8-point Gauss-Legendre integrals of ``f`` over [a_k, b_k]."""
    if a.shape[0] == 0:
        return 0.0
    half = (b - a)[:, None] / 2
    x = (a + b)[:, None] / 2 + half * _GL_X[None, :]
    vals = f(x.ravel()).reshape(x.shape)
    return math.fsum((vals * _GL_W[None, :] * half).ravel())


def envelope_l2(A, delta: float) -> EnvelopeL2:
    """Integrals over the real line of I^2, II^2, III^2 and IV^2.

    Piecewise Gauss-Legendre over the breakpoints delta^-2 and 1/theta(a, b);
    the tails beyond the last breakpoint use the substitution u = 1/lam.
    """
    P = A.points if isinstance(A, PointSet) else as_points(A)
    N = P.shape[0]
    _check_delta(N, delta)
    env = _Envelope(_sorted_angles(P), N, delta)
    cut = delta**-2
    term = lambda idx: (lambda x: env.terms(x)[idx] ** 2)

    def tail(idx, start):
        # int_start^inf f(lam) dlam = int_0^{1/start} f(1/u) u^-2 du
        g = lambda u: term(idx)(1.0 / u) / (u * u)
        return _gl_segments(g, np.array([0.0]), np.array([1.0 / start]))

    iI = 2 * _gl_segments(term(0), np.array([0.0]), np.array([cut]))
    iII = 2 * tail(1, cut)
    c = np.unique(1.0 / env.theta)
    edges = np.concatenate([[0.0], c])
    iIII = 2 * _gl_segments(term(2), edges[:-1], edges[1:])
    iIV = 2 * (_gl_segments(term(3), c[:-1], c[1:]) + tail(3, c[-1]))
    return EnvelopeL2(iI, iII, iIII, iIV)


def energy_from_nu(
    A,
    delta: float,
    bin_width: Optional[float] = None,
    threads: int = 1,
    hist: Optional[DensityHistogram] = None,
) -> float:
    """sum over chordal bins of mass / t, the smoothed analogue of I_1 (chordal).

    It exceeds the discrete energy by the same-cap share, about 1/(N delta).
    Warns with :class:`DiagonalDominatedWarning` when that share is at
    least 90% of the value.
    """
    if hist is None:
        hist = nu_density(A, delta, "chordal", bin_width, threads)
    elif hist.domain != "chordal":
        raise ValueError("energy_from_nu needs a chordal-domain histogram")
    t = hist.centers
    value = math.fsum(hist.masses[t > 0] / t[t > 0])
    P = A.points if isinstance(A, PointSet) else as_points(A)
    self_hist = nu_density(P[:1], delta, "chordal", hist.bin_width)
    diag = math.fsum(self_hist.masses / self_hist.centers) / P.shape[0]
    if diag >= 0.9 * value:
        warnings.warn(
            f"same-cap pairs contribute {diag:.4g} of {value:.4g}; value is diagonal-dominated",
            DiagonalDominatedWarning,
            stacklevel=2,
        )
    return value
