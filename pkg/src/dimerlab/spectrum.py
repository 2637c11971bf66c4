"""The spectral curve theta -> L(theta, H2), its inverse, and free energies.

The free energy is (1/pi) * integral over [0, pi/2] of max(L(theta,H2), |H1|):
the curve is estimated at a theta grid, projected onto the monotone cone
(the curve is strictly increasing), interpolated, and integrated with the
max-kink located explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .disorder import DisorderLaw
from .matprod import LyapEstimate, dimer_stream, lyapunov, v_stream


@dataclass(frozen=True)
class Budget:
    """Per-node sampling budget for curve construction."""

    base_steps: int = 200_000
    blocks: int = 32
    burn_in: int = 2048
    small_theta_factor_cap: float = 64.0

    def steps_for(self, theta: float) -> int:
        # convergence near theta=0 is logarithmically slow; spend more there
        if theta >= 0.1:
            f = 1.0
        else:
            f = min(self.small_theta_factor_cap, max(1.0, math.log10(0.1 / theta) ** 2 * 4.0))
        return int(self.base_steps * f)


@dataclass(frozen=True)
class PhasePoint:
    H1: float
    H2: float
    gamma: float = 1.0

    def canonical(self) -> "PhasePoint":
        """The model is even in H1 and in H2; fold into the first quadrant."""
        return PhasePoint(abs(self.H1), abs(self.H2), self.gamma)


@dataclass
class SpectralCurve:
    H2: float
    gamma: float
    law: DisorderLaw
    thetas: np.ndarray          # strictly increasing, thetas[0]=0, last=pi/2
    raw: np.ndarray             # Monte Carlo node values
    stderr: np.ndarray
    iso: np.ndarray             # monotone-regressed values
    seed: int = 0
    _interp: PchipInterpolator = field(default=None, repr=False)

    @property
    def interp(self) -> PchipInterpolator:
        if self._interp is None:
            self._interp = PchipInterpolator(self.thetas, self.iso)
        return self._interp

    @property
    def delta(self) -> float:
        return float(self.iso[0])

    @property
    def h_c(self) -> float:
        return float(self.iso[-1])

    def max_adjustment_sigmas(self) -> float:
        """Largest |iso - raw| in units of the node stderr (regression slack)."""
        s = np.maximum(self.stderr, 1e-15)
        return float(np.max(np.abs(self.iso - self.raw) / s))


def isotonic_fit(values, weights) -> np.ndarray:
    """Weighted pool-adjacent-violators projection onto nondecreasing sequences."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    means, wsums, counts = [], [], []
    for x, wi in zip(v, w):
        means.append(x)
        wsums.append(wi)
        counts.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2c, c2 = means.pop(), wsums.pop(), counts.pop()
            means[-1] = (means[-1] * wsums[-1] + m2 * w2c) / (wsums[-1] + w2c)
            wsums[-1] += w2c
            counts[-1] += c2
    out = np.empty_like(v)
    i = 0
    for m, c in zip(means, counts):
        out[i:i + c] = m
        i += c
    return out


def default_theta_grid(n_coarse: int = 20, n_fine: int = 10, theta_min: float = 1e-3) -> np.ndarray:
    """Uniform nodes on [0.1, pi/2] plus geometric nodes down to theta_min."""
    coarse = np.linspace(0.1, math.pi / 2, n_coarse)
    fine = np.geomspace(theta_min, 0.1, n_fine + 1)[:-1]
    return np.concatenate([fine, coarse])


def delta(H2: float, law: DisorderLaw, budget: Budget = Budget(), seed: int = 0,
          gamma: float = 1.0) -> LyapEstimate:
    """L(0, H2): the Lyapunov exponent of the real matrices V^{2 sinh H2}.

    Exact without sampling at H2=0 (0 for gamma=1, log gamma otherwise).
    """
    if H2 == 0.0:
        return LyapEstimate(0.0 if gamma == 1.0 else math.log(gamma), 0.0, 0, "exact")
    x = 2.0 * math.sinh(abs(H2))
    stream = v_stream(law, x)
    if gamma != 1.0:
        base = stream.draw

        def draw(rng, n, offset):
            a, b, c, d = base(rng, n, offset)
            y = np.arange(offset, offset + n)
            f = gamma ** (2.0 * (y % 2) - 1.0)
            # w2 -> f*w2 maps (a,b,c) = (x w1/w2, -w2, 1/w2) entrywise
            return a / f, b * f, c / f, d

        stream = type(stream)(draw, is_real=True)
    n = budget.steps_for(min(0.1, x))
    return lyapunov(stream, n, seed=seed, blocks=budget.blocks, burn_in=budget.burn_in)


def build_spectral_curve(H2: float, gamma: float, law: DisorderLaw,
                         theta_grid=None, budget: Budget = Budget(),
                         seed: int = 0) -> SpectralCurve:
    """Estimate the curve on the grid, pin theta=0 via the V-matrix route,
    pin nothing else, and attach the monotone regression."""
    if theta_grid is None:
        theta_grid = default_theta_grid()
    thetas = np.asarray(sorted(set(float(t) for t in theta_grid) | {math.pi / 2}))
    if thetas[0] <= 0.0:
        raise ValueError("grid must be strictly inside (0, pi/2]")
    d0 = delta(H2, law, budget=budget, seed=seed, gamma=gamma)
    vals = [d0.value]
    errs = [d0.stderr]
    for i, th in enumerate(thetas):
        est = lyapunov(dimer_stream(law, th, H2, gamma=gamma), budget.steps_for(th),
                       seed=(seed, i), blocks=budget.blocks, burn_in=budget.burn_in)
        vals.append(est.value)
        errs.append(est.stderr)
    thetas = np.concatenate([[0.0], thetas])
    raw = np.array(vals)
    err = np.array(errs)
    iso = isotonic_fit(raw, 1.0 / np.maximum(err, 1e-12) ** 2)
    return SpectralCurve(H2, gamma, law, thetas, raw, err, iso, seed=_seed_int(seed))


def _seed_int(seed) -> int:
    if isinstance(seed, (tuple, list)):
        return int(seed[0])
    return int(seed)


def h_c(H2: float, gamma: float, law: DisorderLaw, budget: Budget = Budget(),
        seed: int = 0) -> LyapEstimate:
    """L(pi/2, H2), the frozen-boundary field."""
    return lyapunov(dimer_stream(law, math.pi / 2, H2, gamma=gamma),
                    budget.steps_for(math.pi / 2), seed=seed,
                    blocks=budget.blocks, burn_in=budget.burn_in)


def invert_curve(curve: SpectralCurve, h: float) -> float:
    """theta with L(theta) = h on the monotone interpolant; clamps to the
    endpoints when h is outside (delta, h_c)."""
    if h <= curve.delta:
        return 0.0
    if h >= curve.h_c:
        return math.pi / 2
    f = curve.interp
    return float(brentq(lambda t: f(t) - h, 0.0, math.pi / 2, xtol=1e-14))


@dataclass(frozen=True)
class FreeEnergyResult:
    value: float
    quadrature_error: float
    mc_error: float
    phase_label: str
    theta_c: float
    H1: float
    H2: float
    gamma: float = 1.0

    @property
    def combined_error(self) -> float:
        return self.quadrature_error + self.mc_error


def _mc_error_on(curve: SpectralCurve, lo: float) -> float:
    """Propagated node-stderr on (1/pi) * integral over [lo, pi/2] (nodes
    independent, trapezoid weights)."""
    t = curve.thetas
    w = np.zeros_like(t)
    w[1:] += 0.5 * np.diff(t)
    w[:-1] += 0.5 * np.diff(t)
    w = w * (t >= lo)
    return float(np.sqrt(np.sum((w * curve.stderr) ** 2)) / math.pi)


def _quad_error_on(curve: SpectralCurve, lo: float) -> float:
    """Interpolation-error proxy: |pchip - piecewise-linear| integral."""
    t, v = curve.thetas, curve.iso
    hi = math.pi / 2
    lin = np.trapezoid(np.interp(np.clip(t, lo, hi), t, v), np.clip(t, lo, hi))
    pch = curve.interp.integrate(lo, hi)
    return float(abs(pch - lin) / math.pi)


def free_energy_from_curve(curve: SpectralCurve, H1: float) -> FreeEnergyResult:
    H1 = abs(H1)
    if H1 >= curve.h_c:
        return FreeEnergyResult(H1 / 2.0, 0.0, 0.0, "frozen", math.pi / 2,
                                H1, curve.H2, curve.gamma)
    theta_c = invert_curve(curve, H1)
    integral = H1 * theta_c + float(curve.interp.integrate(theta_c, math.pi / 2))
    value = integral / math.pi
    label = "flat-C-region" if H1 <= curve.delta else "liquid"
    return FreeEnergyResult(value, _quad_error_on(curve, theta_c),
                            _mc_error_on(curve, theta_c), label, theta_c,
                            H1, curve.H2, curve.gamma)


def free_energy(point: PhasePoint, law: DisorderLaw, budget: Budget = Budget(),
                seed: int = 0, curve: SpectralCurve = None) -> FreeEnergyResult:
    p = point.canonical()
    if curve is None:
        curve = build_spectral_curve(p.H2, p.gamma, law, budget=budget, seed=seed)
    return free_energy_from_curve(curve, p.H1)


def free_energy_curve(H1_grid, H2: float, gamma: float, law: DisorderLaw,
                      budget: Budget = Budget(), seed: int = 0,
                      curve: SpectralCurve = None) -> list[FreeEnergyResult]:
    """One shared spectral curve (one disorder budget), many fields."""
    if curve is None:
        curve = build_spectral_curve(abs(H2), gamma, law, budget=budget, seed=seed)
    return [free_energy_from_curve(curve, h1) for h1 in H1_grid]
