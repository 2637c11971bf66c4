import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dimerlab.poincare import (Homography, HyperbolicDisk, contraction_bound,
                               contraction_bound_pair, contraction_from_diameter,
                               disk_image, hyperbolic_distance, image_of_halfplane,
                               pair_initial_diameter, trace_norm_ratio)

pos = st.floats(0.05, 20.0, allow_nan=False)
im = st.floats(-10.0, 10.0, allow_nan=False)
points = st.builds(complex, pos, im)
transfer = st.builds(Homography.from_omega_alpha, st.builds(complex, pos, im), pos)


def test_distance_basics():
    assert hyperbolic_distance(1.0, 1.0) == 0.0
    d = hyperbolic_distance(1.0, 2.0)
    assert d == pytest.approx(2.0 * math.atanh(1.0 / 3.0), rel=1e-14)
    with pytest.raises(ValueError):
        hyperbolic_distance(-1.0, 1.0)


@given(points, points, points)
def test_triangle_inequality(a, b, c):
    dab = hyperbolic_distance(a, b)
    dbc = hyperbolic_distance(b, c)
    dac = hyperbolic_distance(a, c)
    assert dac <= dab + dbc + 1e-10


@given(transfer, points, points)
def test_schwarz_pick(h, z1, z2):
    w1, w2 = h(z1), h(z2)
    assert w1.real > 0 and w2.real > 0
    assert hyperbolic_distance(w1, w2) <= hyperbolic_distance(z1, z2) + 1e-9


@given(transfer, transfer, points, points)
@settings(max_examples=200)
def test_pair_contraction_bound(h1, h2, z1, z2):
    """The composed pair contracts by at most (1 + 2 Re(om1) Re(om2)/alpha1)^-1."""
    g = h1.compose(h2)
    d0 = hyperbolic_distance(z1, z2)
    if d0 < 1e-9:
        return
    tau = contraction_bound_pair(h1, h2)
    d1 = hyperbolic_distance(g(z1), g(z2))
    assert d1 <= tau * d0 * (1.0 + 1e-9) + 1e-12


def test_disk_diameter_formula():
    disk = HyperbolicDisk(2.0 + 1.0j, 0.5)
    assert disk.diameter() == pytest.approx(2.0 * math.atanh(0.25), rel=1e-14)
    # tangent disk has infinite diameter
    assert HyperbolicDisk(1.0, 1.0).diameter() == math.inf
    with pytest.raises(ValueError):
        HyperbolicDisk(1.0, 1.5)


def test_diameter_is_achieved_on_horizontal_axis():
    disk = HyperbolicDisk(3.0 + 2.0j, 1.2)
    d_axis = hyperbolic_distance(disk.center - disk.radius, disk.center + disk.radius)
    assert d_axis == pytest.approx(disk.diameter(), rel=1e-12)
    # no sampled pair exceeds it
    rng = np.random.default_rng(0)
    r = disk.radius * np.sqrt(rng.random(300))
    ph = rng.uniform(0, 2 * np.pi, 300)
    zs = disk.center + r * np.exp(1j * ph)
    for i in range(0, 300, 2):
        assert hyperbolic_distance(zs[i], zs[i + 1]) <= disk.diameter() + 1e-9


@given(transfer, st.builds(complex, st.floats(1.0, 5.0), st.floats(-2.0, 2.0)),
       st.floats(0.1, 0.9))
@settings(max_examples=200)
def test_disk_image_is_exact(h, center, rfrac):
    disk = HyperbolicDisk(center, rfrac * center.real)
    img = disk_image(h, disk)
    ph = np.linspace(0.0, 2 * np.pi, 17)
    boundary = disk.center + disk.radius * np.exp(1j * ph)
    mapped = np.array([h(b) for b in boundary])
    assert np.allclose(np.abs(mapped - img.center), img.radius, rtol=1e-8, atol=1e-10)


def test_image_of_halfplane_pair_formula():
    m1 = Homography.from_omega_alpha(1.5 + 0.4j, 0.8)
    m2 = Homography.from_omega_alpha(2.0 - 0.1j, 1.1)
    disk = image_of_halfplane([m1, m2])
    # closed form D(om1 + al1/(2 Re om2), al1/(2 Re om2))
    r = 0.8 / (2.0 * 2.0)
    assert disk.center == pytest.approx((1.5 + 0.4j) + r, rel=1e-12)
    assert disk.radius == pytest.approx(r, rel=1e-12)
    # interior points of the half-plane land inside the disk
    for z in (0.01 + 5j, 3.0, 0.2 - 7j, 100.0):
        w = m1(m2(z))
        assert abs(w - disk.center) <= disk.radius * (1 + 1e-9)


def test_pair_initial_diameter_matches_disk():
    om1, al1, om2 = 1.2 + 0.3j, 0.9, 1.7 - 0.5j
    m1 = Homography.from_omega_alpha(om1, al1)
    m2 = Homography.from_omega_alpha(om2, 1.3)
    disk = image_of_halfplane([m1, m2])
    assert pair_initial_diameter(om1, al1, om2) == pytest.approx(disk.diameter(), rel=1e-12)
    # and equals 2 artanh of the contraction bound
    tau = contraction_bound(om1, al1, om2)
    assert pair_initial_diameter(om1, al1, om2) == pytest.approx(2 * math.atanh(tau), rel=1e-14)


def test_contraction_from_diameter():
    assert contraction_from_diameter(0.0) == 0.0
    assert contraction_from_diameter(2.0) == pytest.approx(math.tanh(1.0), rel=1e-15)


def test_trace_norm_ratio():
    assert trace_norm_ratio(((1.0, 0.0), (0.0, 1.0))) == pytest.approx(1.0)
    h = Homography(2.0, 1.0, 1.0, 1.0)
    assert trace_norm_ratio(h) == pytest.approx(3.0 / 5.0, rel=1e-14)
    # |Tr| <= l1 norm always
    rng = np.random.default_rng(5)
    for _ in range(50):
        a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert trace_norm_ratio(((a, b), (c, d))) <= 1.0 + 1e-15


def test_trace_lower_constant_values():
    from dimerlab.poincare import trace_lower_constant
    # sharp at R = 0: maps fixing 1 force A proportional to [[1,1],[1,1]]
    assert trace_lower_constant(0.0) == pytest.approx(0.5, rel=1e-15)
    assert trace_lower_constant(2.0) < trace_lower_constant(1.0) < 0.5
    with pytest.raises(ValueError):
        trace_lower_constant(-0.1)


def test_trace_lower_constant_bounds_random_products():
    from dimerlab.poincare import (ball_radius_about_one, trace_lower_constant,
                                   _halfplane_image_under)
    rng = np.random.default_rng(7)
    for _ in range(300):
        k = int(rng.integers(2, 6))
        acc = None
        for _ in range(k):
            m = Homography.from_omega_alpha(
                complex(rng.uniform(0.3, 3.0), rng.uniform(-0.5, 0.5)),
                float(rng.uniform(0.2, 3.0)))
            acc = m if acc is None else acc.compose(m)
        star = Homography(np.conj(acc.a), np.conj(acc.c), np.conj(acc.b), np.conj(acc.d))
        R = max(ball_radius_about_one(_halfplane_image_under(acc)),
                ball_radius_about_one(_halfplane_image_under(star)))
        c = trace_lower_constant(R)
        ratio = trace_norm_ratio(acc)
        assert c - 1e-12 <= ratio <= 1.0 + 1e-12
