import math

import numpy as np
import pytest

from dimerlab.asymptotics import pure_lyapunov
from dimerlab.disorder import canonical_two_point, sample_layers
from dimerlab.matprod import (ProductAccumulator, boundary_vector, boundary_vectors,
                              constant_stream, dh_stream, dimer_stream, lyapunov,
                              make_dimer_matrix, make_V_matrix, v_stream)


def test_make_matrices():
    m = make_dimer_matrix(0.5, 0.0, 1.0, 2.0)
    assert m[0, 0] == pytest.approx(2.0 * math.sin(0.5))
    assert m[0, 1] == 4.0 and m[1, 0] == 1.0 and m[1, 1] == 0.0
    v = make_V_matrix(0.3, 1.5, 2.0)
    assert np.linalg.det(v) == pytest.approx(1.0, rel=1e-14)


def test_accumulator_tracks_norm():
    acc = ProductAccumulator()
    mats = [np.array([[2.0, 1.0], [1.0, 1.0]], dtype=complex) for _ in range(40)]
    for m in mats:
        acc.absorb(m)
    direct = np.linalg.matrix_power(mats[0], 40)
    assert acc.log_norm == pytest.approx(math.log(np.abs(direct).sum()), rel=1e-12)
    assert acc.trace().value().real == pytest.approx(np.trace(direct).real, rel=1e-10)


def test_constant_stream_lyapunov():
    m = np.array([[2.0, 1.0], [1.0, 1.0]])
    rho = (3.0 + math.sqrt(5.0)) / 2.0
    est = lyapunov(constant_stream(m), 20_000, seed=0)
    assert est.value == pytest.approx(math.log(rho), abs=1e-6)
    assert est.stderr < 1e-6


def test_pure_dimer_stream_matches_closed_form():
    law = canonical_two_point(1e-12)  # effectively constant but non-degenerate
    for theta in (0.3, 1.0, math.pi / 2):
        est = lyapunov(dimer_stream(law, theta, 0.0), 50_000, seed=1)
        assert est.value == pytest.approx(pure_lyapunov(theta), abs=1e-6)


def test_trace_method_agrees():
    law = canonical_two_point(0.5)
    s = dimer_stream(law, 0.8, 0.0)
    a = lyapunov(s, 200_000, seed=3, method="norm")
    b = lyapunov(s, 200_000, seed=3, method="trace")
    assert b.value == pytest.approx(a.value, abs=5 * a.stderr + 1e-4)


def test_seed_conventions():
    law = canonical_two_point(0.5)
    s = dimer_stream(law, 0.7, 0.0)
    a = lyapunov(s, 10_000, seed=5)
    b = lyapunov(s, 10_000, seed=(5,))
    c = lyapunov(s, 10_000, seed=(5, 1))
    assert a.value == b.value
    assert a.value != c.value
    with pytest.raises(ValueError):
        lyapunov(s, 10_000, blocks=10)


def test_gamma_modulation_shifts_exponent():
    # at theta ~ 0 the modulated exponent is log(gamma)
    law = canonical_two_point(0.5)
    est = lyapunov(dimer_stream(law, 1e-5, 0.0, gamma=1.8), 400_000, seed=2)
    assert est.value == pytest.approx(math.log(1.8), abs=5e-3)


def test_dh_stream_shape():
    from dimerlab.disorder import Marginal
    z = Marginal.two_point(0.5, 1.2, 0.3)
    a, b, c, d = dh_stream(z, 0.25).draw(np.random.default_rng(0), 10, 0)
    assert np.all(a == 1.0) and np.all(b == 0.25)
    assert np.allclose(c, 0.25 * d)


def test_boundary_vector_pure_fixed_point():
    # constant weights: the limit direction is the attracting eigenvector of
    # [[2 sin(theta), w2^2], [1, 0]]
    law = canonical_two_point(1e-13)
    layers = sample_layers(law, -3000, 3000, seed=0)
    for theta in (0.2, 0.9):
        om = 2.0 * math.sin(theta)
        zstar = (om + math.sqrt(om * om + 4.0)) / 2.0
        vec, diam = boundary_vector(theta, "forward", layers, 0, tol=1e-11)
        assert diam < 1e-11
        assert vec[0] / vec[1] == pytest.approx(zstar, rel=1e-9)
        # backward (adjoint) limit has the same ratio for symmetric weights
        vecb, diamb = boundary_vector(theta, "backward", layers, 0, tol=1e-11)
        assert diamb < 1e-11
        assert vecb[0] / vecb[1] == pytest.approx(zstar, rel=1e-9)


def test_boundary_vectors_batch_matches_single():
    law = canonical_two_point(0.5)
    layers = sample_layers(law, -4000, 4000, seed=9)
    thetas = np.array([0.15, 0.6, 1.3])
    bv = boundary_vectors(thetas, "forward", layers, 5, tol=1e-10)
    assert bv.vectors.shape == (3, 2)
    assert np.all(bv.diam_bound < 1e-10)
    for i, th in enumerate(thetas):
        v, _ = boundary_vector(float(th), "forward", layers, 5, tol=1e-10)
        assert np.allclose(bv.vectors[i], v, rtol=1e-12)


def test_boundary_vectors_rejects_zero_theta():
    law = canonical_two_point(0.5)
    layers = sample_layers(law, -100, 100, seed=0)
    with pytest.raises(ValueError):
        boundary_vectors([0.0, 0.5], "forward", layers, 0)
    with pytest.raises(ValueError):
        boundary_vectors([0.5], "sideways", layers, 0)


def test_v_stream_unimodular():
    law = canonical_two_point(0.4)
    a, b, c, d = v_stream(law, 0.7).draw(np.random.default_rng(1), 64, 0)
    assert np.allclose(a * d - b * c, 1.0, rtol=1e-13)
