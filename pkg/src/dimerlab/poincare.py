"""Hyperbolic geometry of the right half-plane {Re z > 0} and homography actions.

Transfer matrices act on the half-plane as Mobius maps and contract its
metric; the closed-form distance, disk images, and pairwise contraction
bounds here supply certified stopping rules for matrix-product iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = complex("inf")


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    """d(z1,z2) = 2 artanh(|z1-z2| / |z1+conj(z2)|) on {Re z > 0}."""
    z1, z2 = complex(z1), complex(z2)
    if z1.real <= 0.0 or z2.real <= 0.0:
        raise ValueError("points must have strictly positive real part")
    num = abs(z1 - z2)
    den = abs(z1 + z2.conjugate())
    if num == 0.0:
        return 0.0
    return 2.0 * math.atanh(num / den)


@dataclass(frozen=True)
class Homography:
    """z -> (a z + b)/(c z + d), ad - bc != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise ValueError("degenerate homography")

    @staticmethod
    def from_omega_alpha(omega: complex, alpha: float) -> "Homography":
        """The transfer form [[omega, alpha], [1, 0]], acting as z -> omega + alpha/z."""
        return Homography(omega, alpha, 1.0, 0.0)

    def __call__(self, z):
        if z == _INF:
            return self.a / self.c if self.c != 0 else _INF
        den = self.c * z + self.d
        if den == 0:
            return _INF
        return (self.a * z + self.b) / den

    def compose(self, other: "Homography") -> "Homography":
        """self after other (matrix product)."""
        return Homography(self.a * other.a + self.b * other.c,
                          self.a * other.b + self.b * other.d,
                          self.c * other.a + self.d * other.c,
                          self.c * other.b + self.d * other.d)


@dataclass(frozen=True)
class HyperbolicDisk:
    """Euclidean disk contained in the closed right half-plane."""

    center: complex
    radius: float

    def __post_init__(self):
        if self.radius > self.center.real + 1e-12:
            raise ValueError("disk not contained in the closed half-plane")

    def diameter(self) -> float:
        """Hyperbolic diameter 2 artanh(R / Re(center)); inf if tangent to the boundary."""
        r = self.radius / self.center.real
        if r >= 1.0:
            return math.inf
        return 2.0 * math.atanh(r)


def disk_image(h: Homography, disk: HyperbolicDisk) -> HyperbolicDisk:
    """Mobius image of a disk not meeting the pole, as a disk."""
    a, b, c, d = h.a, h.b, h.c, h.d
    z0, r = disk.center, disk.radius
    if c == 0:
        s = a / d
        return HyperbolicDisk(s * z0 + b / d, abs(s) * r)
    pole = -d / c
    q = abs(z0 - pole) ** 2 - r * r
    if q <= 0:
        raise ValueError("pole inside the disk; image is not a disk")
    # image of circle |z - z0| = r under w = 1/(z - pole):
    c0 = (z0 - pole).conjugate() / q
    rr = r / q
    # then w -> (a/c) + ((b c - a d)/c^2) * w'
    scale = (b * c - a * d) / (c * c)
    return HyperbolicDisk(a / c + scale * c0, abs(scale) * rr)


def image_of_halfplane(ms) -> HyperbolicDisk | complex:
    """Image of the open half-plane under the composition of transfer maps.

    Each element of ms must be Homography.from_omega_alpha form with
    Re(omega) >= 0, alpha > 0.  A single map gives the half-plane
    {Re z > Re(omega)}, returned as its boundary abscissa (complex omega);
    two or more maps give a genuine disk.
    """
    ms = list(ms)
    if not ms:
        raise ValueError("empty sequence")
    for m in ms:
        if m.c != 1.0 or m.d != 0.0 or m.a.real < 0 or m.b.real <= 0 or m.b.imag != 0:
            raise ValueError("maps must be of the form [[omega, alpha], [1, 0]]")
    if len(ms) == 1:
        return ms[0].a  # half-plane {Re z > Re(omega)}
    m1, m2 = ms[0], ms[1]
    om1, al1 = m1.a, m1.b.real
    om2 = m2.a
    if om1.real <= 0 or om2.real <= 0:
        raise ValueError("first two maps need Re(omega) > 0 for a bounded image")
    disk = HyperbolicDisk(om1 + al1 / (2.0 * om2.real), al1 / (2.0 * om2.real))
    # remaining maps are appended inside: image = (m1 m2 ... mk)(H), so each
    # new half-plane image must be pushed through the accumulated product.
    acc = m1.compose(m2)
    for m in ms[2:]:
        om, al = m.a, m.b.real
        if om.real <= 0:
            raise ValueError("Re(omega) > 0 required past the second map")
        # m(H) = {Re z > Re(om)} contains the disk D(om + al/(2 Re om')..) for
        # any next map; cheapest exact update: image of m(H) under acc equals
        # image of H under acc*m, and acc*m has >= 2 factors, so reuse the
        # two-map disk formula on the last two factors pushed through the rest.
        acc = acc.compose(m)
        disk = _halfplane_image_under(acc)
    return disk


def _halfplane_image_under(h: Homography) -> HyperbolicDisk:
    """Image of {Re z > 0} under h, assuming it is a bounded disk."""
    p0 = h(0.0)
    p1 = h(complex(0.0, 1.0))
    p2 = h(_INF)
    return _circle_through(p0, p1, p2)


def _circle_through(p0: complex, p1: complex, p2: complex) -> HyperbolicDisk:
    """Circle through three points (the image of the boundary line)."""
    # solve |z - c|^2 equal at the three points; linear system in (Re c, Im c)
    ax, ay = p0.real, p0.imag
    bx, by = p1.real, p1.imag
    cx, cy = p2.real, p2.imag
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        raise ValueError("collinear boundary image (half-plane, not a disk)")
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / d
    center = complex(ux, uy)
    return HyperbolicDisk(center, abs(center - p0))


def contraction_bound_pair(m1: Homography, m2: Homography) -> float:
    """Upper bound (1 + 2 Re(om1) Re(om2) / alpha1)^{-1} for the contraction
    rate of the composed pair of transfer maps."""
    om1, al1 = m1.a, m1.b.real
    om2 = m2.a
    return contraction_bound(om1, al1, om2)


def contraction_bound(omega1: complex, alpha1: float, omega2: complex) -> float:
    if omega1.real <= 0 or omega2.real <= 0 or alpha1 <= 0:
        raise ValueError("need Re(omega) > 0 and alpha > 0")
    return 1.0 / (1.0 + 2.0 * omega1.real * omega2.real / alpha1)


def pair_initial_diameter(omega1: complex, alpha1: float, omega2: complex) -> float:
    """Hyperbolic diameter of the image of the half-plane under one pair."""
    t = contraction_bound(omega1, alpha1, omega2)
    return 2.0 * math.atanh(t)


def contraction_from_diameter(diam: float) -> float:
    """If the image has hyperbolic diameter D the map contracts by <= tanh(D/2)."""
    return math.tanh(0.5 * diam)


def trace_lower_constant(R: float) -> float:
    """Explicit c(R) with c(R) ||A||_1 <= |Tr A| whenever the maps of A and
    A* send the half-plane into the hyperbolic ball of radius R about 1.

    The ball about 1 pins |z| in [e^-R, e^R] and |arg z| <= phi with
    sin(phi) = tanh(R); entry ratios of A then live in the ball of radius
    2R, so the angle between a and d is at most 2*phi and
    |a+d| >= 2 sqrt(|a||d|) sech(R), while ||A||_1 <= |d| (1+e^R)^2 and
    |a||d| >= |d|^2 e^{-2R}.  Sharp (1/2) at R = 0.
    """
    if R < 0:
        raise ValueError("R must be nonnegative")
    return 2.0 / (math.cosh(R) * math.exp(R) * (1.0 + math.exp(R)) ** 2)


def ball_radius_about_one(disk: HyperbolicDisk) -> float:
    """Upper bound on sup of d(1, z) over the disk: distance to the center
    plus half the hyperbolic diameter."""
    return hyperbolic_distance(1.0, disk.center) + 0.5 * disk.diameter()


def trace_norm_ratio(m) -> float:
    """|Tr A| / ||A||_1 for a 2x2 given as ((a,b),(c,d)) or Homography."""
    if isinstance(m, Homography):
        a, b, c, d = m.a, m.b, m.c, m.d
    else:
        (a, b), (c, d) = m
    n1 = abs(a) + abs(b) + abs(c) + abs(d)
    return abs(a + d) / n1
