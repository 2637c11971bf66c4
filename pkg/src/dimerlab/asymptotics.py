"""Exponent solvers, regression harnesses, and pure-model closed forms.

Moment equations are solved on closed-form moments (never Monte Carlo);
the regression helpers fit power laws and stretched exponentials on data
produced by the spectrum and correlations modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import spectrum
from .disorder import DisorderLaw, Marginal, log_variance
from .matprod import dh_stream, lyapunov


# ---------------------------------------------------------------------------
# Fitting harnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    intercept: float
    stderr: float
    r_squared: float
    window: tuple

    def __post_init__(self):
        if not self.window:
            raise ValueError("empty fit window")


def _ols(x: np.ndarray, y: np.ndarray, window: tuple) -> ExponentFit:
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two points to fit")
    xm = x - x.mean()
    sxx = float(np.dot(xm, xm))
    if sxx == 0.0:
        raise ValueError("degenerate abscissas")
    slope = float(np.dot(xm, y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ssr = float(np.dot(resid, resid))
    sst = float(np.dot(y - y.mean(), y - y.mean()))
    stderr = math.sqrt(ssr / (n - 2) / sxx) if n > 2 else 0.0
    r2 = 1.0 if sst == 0.0 else max(0.0, 1.0 - ssr / sst)
    return ExponentFit(slope, intercept, stderr, min(r2, 1.0), window)


def fit_power_law(points, window: tuple = None) -> ExponentFit:
    """Least-squares slope of log y against log x, restricted to x in window."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (x, y) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive data")
    if window is not None:
        keep = (x >= window[0]) & (x <= window[1])
        x, y = x[keep], y[keep]
    if x.shape[0] < 2:
        raise ValueError("fewer than two points in the window")
    used = (float(x.min()), float(x.max()))
    return _ols(np.log(x), np.log(y), used)


def fit_stretched(points) -> ExponentFit:
    """Slope of -log|cov| against sqrt(y); the slope is the decay rate."""
    pts = np.asarray(points, dtype=float)
    y, mag = pts[:, 0], pts[:, 1]
    if np.any(mag <= 0) or np.any(y <= 0):
        raise ValueError("stretched fit needs positive rows and magnitudes")
    return _ols(np.sqrt(y), -np.log(mag), (float(y.min()), float(y.max())))


# ---------------------------------------------------------------------------
# Gamma solvers (gaseous layering)
# ---------------------------------------------------------------------------

def gamma_c(law: DisorderLaw) -> float:
    """(E w2^2 * E w2^-2)^(1/4); > 1 whenever w2 is random."""
    return (law.w2.moment(2.0) * law.w2.moment(-2.0)) ** 0.25


def _alpha_gap(law: DisorderLaw, gamma: float, a: float) -> float:
    return 4.0 * a * math.log(gamma) - math.log(
        law.w2.moment(2.0 * a) * law.w2.moment(-2.0 * a))


def alpha_gamma(law: DisorderLaw, gamma: float) -> float:
    """Positive root a of gamma^(4a) = E w2^(2a) * E w2^(-2a), or +inf.

    The gap a -> 4a log(gamma) - log(moment product) starts positive (slope
    4 log gamma at 0) and crosses zero at most once; past the cap tied to
    the support there is no crossing.
    """
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    var = log_variance(law)
    a_max = 50.0 / var
    a = max(math.log(gamma) / var, 1e-6)
    while _alpha_gap(law, gamma, a) > 0.0:
        a *= 2.0
        if a > a_max:
            return math.inf
    lo = a / 2.0
    while _alpha_gap(law, gamma, lo) <= 0.0:
        lo /= 2.0
        if lo < 1e-15:
            raise ArithmeticError("no positive bracket for alpha")
    return float(brentq(lambda t: _alpha_gap(law, gamma, t), lo, a, xtol=1e-14))


def beta_gamma(law: DisorderLaw, gamma: float) -> float:
    """max(1 + 1/(2 alpha), 3/2); exactly 3/2 at alpha = +inf."""
    a = alpha_gamma(law, gamma)
    if math.isinf(a):
        return 1.5
    return max(1.0 + 0.5 / a, 1.5)


def gamma_for_alpha(law: DisorderLaw, alpha: float) -> float:
    """The gamma at which alpha_gamma takes the given finite value."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return (law.w2.moment(2.0 * alpha) * law.w2.moment(-2.0 * alpha)) ** (1.0 / (4.0 * alpha))


@dataclass(frozen=True)
class GammaAnalysis:
    gamma: float
    alpha: float
    beta: float
    gamma_c: float

    @staticmethod
    def analyze(law: DisorderLaw, gamma: float) -> "GammaAnalysis":
        a = alpha_gamma(law, gamma)
        b = 1.5 if math.isinf(a) else max(1.0 + 0.5 / a, 1.5)
        return GammaAnalysis(gamma, a, b, gamma_c(law))


# ---------------------------------------------------------------------------
# Free-energy gap probes (shared spectral curve)
# ---------------------------------------------------------------------------

def _gap_weights(curve: spectrum.SpectralCurve, hi: float) -> np.ndarray:
    t = curve.thetas
    w = np.zeros_like(t)
    w[1:] += 0.5 * np.diff(t)
    w[:-1] += 0.5 * np.diff(t)
    return w * (t <= hi)


def free_energy_gap(curve: spectrum.SpectralCurve, H1: float):
    """F(H1) - F(0) = (1/pi) * integral over [0, theta_c] of (H1 - L(theta)).

    Returns (gap, error); the error covers only the curve nodes below
    theta_c, since the rest of the integral cancels in the difference.
    """
    H1 = abs(H1)
    theta_c = spectrum.invert_curve(curve, H1)
    if theta_c == 0.0:
        return 0.0, 0.0
    gap = (H1 * theta_c - float(curve.interp.integrate(0.0, theta_c))) / math.pi
    w = _gap_weights(curve, theta_c)
    mc = float(np.sqrt(np.sum((w * curve.stderr) ** 2)) / math.pi)
    t = np.clip(curve.thetas, 0.0, theta_c)
    lin = np.trapezoid(np.interp(t, curve.thetas, curve.iso), t)
    quad = abs(float(curve.interp.integrate(0.0, theta_c)) - lin) / math.pi
    return gap, mc + quad


@dataclass(frozen=True)
class ProbeRow:
    H1: float
    probe: float
    gap: float
    gap_error: float
    excluded: bool


def essential_singularity_probe(law: DisorderLaw, H1_grid,
                                budget: spectrum.Budget = None, seed: int = 0,
                                curve: spectrum.SpectralCurve = None):
    """Rows (H1, -H1 * log(F(H1) - F(0))); the trend target is Var(log w2).

    Grid points whose free-energy gap is indistinguishable from the Monte
    Carlo noise are flagged excluded.
    """
    if curve is None:
        curve = spectrum.build_spectral_curve(0.0, 1.0, law,
                                              budget=budget or spectrum.Budget(),
                                              seed=seed)
    rows = []
    for h in H1_grid:
        gap, err = free_energy_gap(curve, h)
        bad = gap <= err or gap <= 0.0
        probe = math.nan if bad else -h * math.log(gap)
        rows.append(ProbeRow(float(h), probe, gap, err, bad))
    return rows


def pt_exponent(results, h_c: float = None, window: tuple = None) -> ExponentFit:
    """Exponent of F(H1) - H1/2 against (H_c - H1) near the frozen boundary.

    results come from spectrum.free_energy_curve; h_c defaults to the
    smallest frozen field in the data.
    """
    results = list(results)
    if h_c is None:
        frozen = [r.H1 for r in results if r.phase_label == "frozen"]
        if not frozen:
            raise ValueError("no frozen point in the data; pass h_c explicitly")
        h_c = min(frozen)
    pts = []
    for r in results:
        x = h_c - r.H1
        yv = r.value - r.H1 / 2.0
        if x > 0.0 and yv > max(r.combined_error, 0.0):
            pts.append((x, yv))
    if len(pts) < 2:
        raise ValueError("too few points above noise below H_c")
    return fit_power_law(pts, window=window)


def gas_transition_exponent(law: DisorderLaw, gamma: float,
                            budget: spectrum.Budget = None, seed: int = 0,
                            curve: spectrum.SpectralCurve = None,
                            t_grid=None) -> ExponentFit:
    """Exponent of F_gamma(H1) - F_gamma(0) against H1 - log(gamma).

    Target beta_gamma(law, gamma); the gap opens at H1 = log(gamma), the
    edge of the affine region.
    """
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    if curve is None:
        curve = spectrum.build_spectral_curve(0.0, gamma, law,
                                              budget=budget or spectrum.Budget(),
                                              seed=seed)
    lg = math.log(gamma)
    span = curve.h_c - lg
    if span <= 0:
        raise ValueError("log(gamma) is not below H_c; no transition window")
    if t_grid is None:
        t_grid = np.geomspace(0.08 * span, 0.5 * span, 10)
    pts = []
    for t in t_grid:
        gap, err = free_energy_gap(curve, lg + t)
        if gap > err and gap > 0.0:
            pts.append((float(t), gap))
    if len(pts) < 2:
        raise ValueError("gap indistinguishable from noise on the whole grid")
    return fit_power_law(pts)


@dataclass(frozen=True)
class DeltaGammaProbe:
    rows: list          # (H2, delta estimate, stderr)
    fit: ExponentFit
    conjectured_exponent: float
    prefactor_sign: int
    label: str = "conjecture-probe"


def delta_gamma_probe(law: DisorderLaw, gamma: float, H2_grid,
                      budget: spectrum.Budget = None, seed: int = 0,
                      experimental: bool = False) -> DeltaGammaProbe:
    """Fit of |Delta_gamma(H2) - log gamma| against |H2| (conjectural scaling).

    Never asserted; callers must opt in with experimental=True and results
    carry the conjecture-probe label.
    """
    if not experimental:
        raise ValueError("conjecture probe requires experimental=True")
    budget = budget or spectrum.Budget()
    a = alpha_gamma(law, gamma)
    lg = math.log(gamma)
    rows = []
    pts = []
    signs = []
    for i, h2 in enumerate(H2_grid):
        est = spectrum.delta(float(h2), law, budget=budget, seed=(seed, i), gamma=gamma)
        rows.append((float(h2), est.value, est.stderr))
        dev = est.value - lg
        if abs(dev) > max(3.0 * est.stderr, 1e-14):
            pts.append((abs(float(h2)), abs(dev)))
            signs.append(1 if dev > 0 else -1)
    fit = fit_power_law(pts) if len(pts) >= 2 else None
    sign = int(np.sign(sum(signs))) if signs else 0
    return DeltaGammaProbe(rows, fit, 2.0 * min(a, 1.0), sign)


# ---------------------------------------------------------------------------
# Small-coupling (two-scale) Lyapunov benchmark
# ---------------------------------------------------------------------------

def dh_benchmark(z_marginal: Marginal, eps_grid, budget: spectrum.Budget = None,
                 seed: int = 0) -> ExponentFit:
    """Lyapunov exponent of [[1, eps], [eps Z, Z]] against eps on a log grid.

    Requires E log Z < 0 so the exponent vanishes at eps = 0; the slope
    target is 2 min(alpha, 1) with E Z^alpha = 1.
    """
    if z_marginal.mean_log() >= 0.0:
        raise ValueError("need E log Z < 0")
    budget = budget or spectrum.Budget()
    pts = []
    for i, eps in enumerate(eps_grid):
        eps = float(eps)
        if eps <= 0:
            raise ValueError("eps grid must be positive")
        est = lyapunov(dh_stream(z_marginal, eps), budget.base_steps,
                       seed=(seed, i), blocks=budget.blocks, burn_in=budget.burn_in)
        pts.append((eps, est.value))
    return fit_power_law(pts)


def dh_z_alpha(z_marginal: Marginal) -> float:
    """The positive root of E Z^a = 1, or +inf when Z < 1 almost surely."""
    if z_marginal.mean_log() >= 0.0:
        raise ValueError("need E log Z < 0")
    if z_marginal.support[1] < 1.0:
        return math.inf
    g = lambda a: math.log(z_marginal.moment(a))
    a = 1e-6
    while g(a) < 0.0:
        a *= 2.0
        if a > 1e6:
            return math.inf
    return float(brentq(g, a / 2.0, a, xtol=1e-14))


def dh_z_law_alpha_half() -> Marginal:
    """Smoothed Z law (log Z uniform) tuned so E sqrt(Z) = 1 exactly."""
    b = 2.0

    def gap(a):
        return 2.0 * (math.exp(b / 2.0) - math.exp(a / 2.0)) / (b - a) - 1.0

    a = float(brentq(gap, -40.0, -2.0 - 1e-9, xtol=1e-13))
    return Marginal.log_uniform(math.exp(a), math.exp(b))


def dh_z_law_alpha_inf() -> Marginal:
    """Z < 1 almost surely: log Z uniform on [-2, -1]."""
    return Marginal.log_uniform(math.exp(-2.0), math.exp(-1.0))


# ---------------------------------------------------------------------------
# Pure-model closed forms
# ---------------------------------------------------------------------------

def pure_lyapunov(theta: float, w1: float = 1.0) -> float:
    s = w1 * math.sin(theta)
    return math.log(s + math.sqrt(1.0 + s * s))


def pure_h_c(w1: float = 1.0) -> float:
    return math.log(w1 + math.sqrt(1.0 + w1 * w1))


def pure_endpoint_curvature(w1: float = 1.0) -> float:
    """Coefficient c in L(pi/2) - L(theta) ~ c (theta - pi/2)^2."""
    return w1 / (2.0 * math.sqrt(1.0 + w1 * w1))


def _characteristic_mean(H1: float, H2: float, gamma: float, w1: float, n: int) -> float:
    """Mean of log|P| over the torus |z1| = e^(2 H1), |z2| = e^(2 H2)."""
    ph = (np.arange(n) + 0.5) * (2.0 * math.pi / n)  # half-offset dodges contour zeros
    z1 = math.exp(2.0 * H1) * np.exp(1j * ph)[:, None]
    z2 = math.exp(2.0 * H2) * np.exp(1j * ph)[None, :]
    p = z1 + 1.0 / z1 + w1 * w1 * (z2 + 1.0 / z2) + gamma ** 2 + gamma ** -2 + 2.0 * w1 * w1
    return float(np.mean(np.log(np.abs(p))))


@dataclass(frozen=True)
class PureFreeEnergy:
    value: float
    refinement_error: float


def pure_free_energy(H1: float, H2: float, gamma: float = 1.0, w1: float = 1.0,
                     n: int = 1024) -> PureFreeEnergy:
    """F for constant weights as 1/4 of the torus average of log|P|.

    The 1/4 matches the per-vertex normalization of the transfer-matrix
    route (checked against (1/pi) integral of max(L, H1) to 7 digits); one
    grid refinement supplies the reported error.
    """
    c = _characteristic_mean(H1, H2, gamma, w1, n)
    f = _characteristic_mean(H1, H2, gamma, w1, 2 * n)
    return PureFreeEnergy(f / 4.0, abs(f - c) / 4.0)


def pure_closed_forms(theta: float = None, H1: float = None, H2: float = None,
                      gamma: float = 1.0, w1: float = 1.0) -> dict:
    """Bundle of the closed forms at a spectral angle and/or a phase point."""
    out = {"h_c": pure_h_c(w1), "endpoint_curvature": pure_endpoint_curvature(w1)}
    if theta is not None:
        out["lyapunov"] = pure_lyapunov(theta, w1)
    if H1 is not None and H2 is not None:
        fe = pure_free_energy(H1, H2, gamma=gamma, w1=w1)
        out["free_energy"] = fe.value
        out["free_energy_error"] = fe.refinement_error
    return out
