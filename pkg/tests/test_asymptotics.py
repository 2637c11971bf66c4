import math

import numpy as np
import pytest

from dimerlab import asymptotics as A
from dimerlab import spectrum
from dimerlab.disorder import Marginal, canonical_log_uniform, canonical_two_point
from dimerlab.spectrum import SpectralCurve


def pure_curve(n=120, stderr=1e-9):
    thetas = np.linspace(0.0, math.pi / 2, n)
    vals = np.array([A.pure_lyapunov(t) for t in thetas])
    law = canonical_two_point(0.5)
    return SpectralCurve(0.0, 1.0, law, thetas, vals, np.full(n, stderr), vals.copy())


# -- fits -------------------------------------------------------------------

def test_fit_power_law_exact():
    x = np.geomspace(1.0, 100.0, 12)
    fit = A.fit_power_law(np.stack([x, 3.0 * x ** 1.5], axis=1))
    assert fit.exponent == pytest.approx(1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_power_law_window():
    x = np.geomspace(1.0, 100.0, 20)
    y = x ** 2.0
    y[x > 50] = 1.0  # corrupt the tail, then window it away
    fit = A.fit_power_law(np.stack([x, y], axis=1), window=(1.0, 50.0))
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        A.fit_power_law([(1.0, -1.0), (2.0, 1.0)])


def test_fit_stretched_exact():
    y = np.array([9.0, 25.0, 49.0, 100.0, 225.0])
    mag = 0.7 * np.exp(-2.0 * np.sqrt(y))
    fit = A.fit_stretched(np.stack([y, mag], axis=1))
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


# -- gamma solvers ----------------------------------------------------------

def test_gamma_c_closed_form():
    # E w2^2 = E w2^-2 = cosh(2 sigma), so gamma_c = sqrt(cosh(2 sigma))
    law = canonical_two_point(1.0)
    assert A.gamma_c(law) == pytest.approx(math.cosh(2.0) ** 0.5, rel=1e-14)


def test_alpha_at_gamma_c_is_one():
    for law in (canonical_two_point(1.0), canonical_log_uniform(1.2)):
        a = A.alpha_gamma(law, A.gamma_c(law))
        assert a == pytest.approx(1.0, abs=1e-10)


def test_alpha_round_trip():
    law = canonical_log_uniform(1.5)
    for target in (0.5, 1.0, 2.5):
        g = A.gamma_for_alpha(law, target)
        assert A.alpha_gamma(law, g) == pytest.approx(target, abs=1e-10)
    # closed form at alpha = 1/2: gamma = sinh(s)/s
    assert A.gamma_for_alpha(law, 0.5) == pytest.approx(math.sinh(1.5) / 1.5, rel=1e-12)


def test_alpha_infinite_past_support():
    # two-point sigma=1: gamma > e drives the moment equation out of reach
    law = canonical_two_point(1.0)
    g = 1.5 * A.gamma_c(law)
    assert math.log(g) > 1.0
    assert math.isinf(A.alpha_gamma(law, g))
    assert A.beta_gamma(law, g) == 1.5


def test_beta_formula():
    law = canonical_log_uniform(1.5)
    g = A.gamma_for_alpha(law, 0.5)
    assert A.beta_gamma(law, g) == pytest.approx(2.0, abs=1e-9)
    ga = A.GammaAnalysis.analyze(law, g)
    assert ga.beta == pytest.approx(2.0, abs=1e-9)
    assert ga.gamma_c == pytest.approx(A.gamma_c(law))
    with pytest.raises(ValueError):
        A.alpha_gamma(law, 1.0)


# -- free-energy gap probes -------------------------------------------------

def test_free_energy_gap_pure():
    curve = pure_curve()
    gap, err = A.free_energy_gap(curve, 0.4)
    # direct quadrature of (H1 - L)_+ on [0, theta_c]
    th = np.linspace(0.0, spectrum.invert_curve(curve, 0.4), 20001)
    direct = np.trapezoid(0.4 - np.array([A.pure_lyapunov(t) for t in th]), th) / math.pi
    assert gap == pytest.approx(direct, abs=1e-6)
    assert A.free_energy_gap(curve, 0.0) == (0.0, 0.0)


def test_pt_exponent_pure_calibration():
    curve = pure_curve(n=400)
    h_c = curve.h_c
    grid = np.linspace(0.55 * h_c, 0.98 * h_c, 14)
    results = [spectrum.free_energy_from_curve(curve, h) for h in grid]
    fit = A.pt_exponent(results, h_c=h_c)
    assert fit.exponent == pytest.approx(1.5, abs=0.02)
    with pytest.raises(ValueError):
        A.pt_exponent(results)  # no frozen point, h_c not given


def test_essential_probe_pure_contrast_diverges():
    # pure model: gap ~ (H1)^{5/2}/const, so -H1 log(gap) -> 0, i.e. the
    # disordered target Var(log w2) is never approached; probe decreases to 0
    curve = pure_curve(n=400)
    rows = A.essential_singularity_probe(canonical_two_point(0.5),
                                         [0.5, 0.4, 0.3, 0.2, 0.1], curve=curve)
    vals = [r.probe for r in rows if not r.excluded]
    assert len(vals) >= 4
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_gas_transition_pure_exponent():
    # synthetic gas curve L = log(gamma) + c theta^2: the gap opens with the
    # exact 3/2 power, so the fit calibrates the pipeline
    lg = math.log(1.2)
    thetas = np.linspace(0.0, math.pi / 2, 400)
    vals = lg + 0.3 * thetas ** 2
    law = canonical_two_point(0.5)
    curve = SpectralCurve(0.0, 1.2, law, thetas, vals, np.full(400, 1e-9), vals.copy())
    fit = A.gas_transition_exponent(law, 1.2, curve=curve)
    assert fit.exponent == pytest.approx(1.5, abs=0.02)


# -- DH benchmark -----------------------------------------------------------

def test_dh_z_laws():
    z_half = A.dh_z_law_alpha_half()
    assert z_half.moment(0.5) == pytest.approx(1.0, abs=1e-12)
    assert z_half.mean_log() < 0.0
    assert A.dh_z_alpha(z_half) == pytest.approx(0.5, abs=1e-10)
    z_inf = A.dh_z_law_alpha_inf()
    assert z_inf.support[1] < 1.0
    assert math.isinf(A.dh_z_alpha(z_inf))
    with pytest.raises(ValueError):
        A.dh_z_alpha(Marginal.two_point(1.0, 2.0, 0.9))


def test_dh_benchmark_smoke():
    z = A.dh_z_law_alpha_inf()
    fit = A.dh_benchmark(z, [2.0 ** -k for k in range(2, 6)],
                         budget=spectrum.Budget(base_steps=400_000), seed=0)
    assert fit.exponent == pytest.approx(2.0, abs=0.3)


# -- delta-gamma conjecture probe -------------------------------------------

def test_delta_probe_requires_opt_in():
    law = canonical_two_point(1.0)
    with pytest.raises(ValueError):
        A.delta_gamma_probe(law, 1.5, [0.1, 0.01])


# -- pure closed forms ------------------------------------------------------

def test_pure_closed_forms():
    assert A.pure_h_c() == pytest.approx(math.log(1 + math.sqrt(2)), rel=1e-15)
    assert A.pure_lyapunov(math.pi / 2) == A.pure_h_c()
    assert A.pure_lyapunov(0.0) == 0.0
    # endpoint curvature: L(pi/2) - L(pi/2 - e) ~ c e^2
    e = 1e-4
    c = (A.pure_h_c() - A.pure_lyapunov(math.pi / 2 - e)) / e ** 2
    assert c == pytest.approx(A.pure_endpoint_curvature(), rel=1e-4)
    out = A.pure_closed_forms(theta=0.5, H1=0.2, H2=0.1)
    assert set(out) >= {"h_c", "endpoint_curvature", "lyapunov", "free_energy"}


def test_pure_free_energy_consistency():
    # double-integral value equals the Lyapunov-route integral
    curve = pure_curve(n=400)
    for h1 in (0.0, 0.25, 0.6):
        fe = A.pure_free_energy(h1, 0.0)
        lyap_route = spectrum.free_energy_from_curve(curve, h1).value
        assert fe.value == pytest.approx(lyap_route, abs=5e-6)
        assert fe.refinement_error < 1e-6


def test_pure_free_energy_frozen_affine():
    h = A.pure_h_c() + 0.3
    fe = A.pure_free_energy(h, 0.0)
    assert fe.value == pytest.approx(h / 2.0, abs=1e-9)
