"""Infinite-volume dimer-dimer covariances at H2 = 0 for one quenched realization.

Both edges are horizontal; the reference edge sits at the origin with its
black vertex on the right, the other at horizontal offset x in row y > 0 with
its black vertex on the left.  The covariance is a product of theta-integrals
whose integrands are ratios of renormalized transfer-matrix products and
limit boundary vectors; panels of Gauss nodes, geometric toward the
concentration point, do the quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, spectrum
from .disorder import DisorderLaw, LayeredSample, sample_layers
from .matprod import boundary_vectors


@dataclass(frozen=True)
class EdgePair:
    """Horizontal offset x and row y > 0 of the far edge."""

    x: int
    y: int

    def __post_init__(self):
        if self.y < 1:
            raise ValueError("row offset y must be a positive integer")


@dataclass(frozen=True)
class CovResult:
    value: float
    quad_error: float
    vec_tol: float
    seed: int

    @property
    def sign(self) -> int:
        return 0 if self.value == 0.0 else int(math.copysign(1.0, self.value))

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class QuadSpec:
    """Panelled Gauss quadrature: geometric panels toward the concentration
    endpoint, a full-order and a half-order pass for the error estimate."""

    panels_per_decade: int = 4
    order: int = 10
    coarse_order: int = 5
    theta_floor_scale: float = 1e-3
    vec_tol: float = 1e-10
    max_layers: int = 10_000
    buffer: int = 200

    @property
    def layer_margin(self) -> int:
        """Rows to sample on each side of the pair for the vector iterations."""
        return self.max_layers + self.buffer + 512


def _gauss_panels(edges: np.ndarray, order: int):
    """Gauss-Legendre nodes/weights on each [edges[i], edges[i+1]] panel."""
    x, w = np.polynomial.legendre.leggauss(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    nodes = (0.5 * (b - a) * x[None, :] + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w[None, :]).ravel()
    return nodes, weights


def _geometric_edges(lo: float, hi: float, per_decade: int) -> np.ndarray:
    n = max(1, int(math.ceil(math.log10(hi / lo) * per_decade)))
    return np.geomspace(lo, hi, n + 1)


def _cos_phase(x: int, thetas: np.ndarray) -> np.ndarray:
    return np.cos(x * thetas - 0.5 * math.pi * (x % 4))


def _signed_sum(weights, cosf, log_mag):
    """sum(w * cos * exp(log_mag)) with the largest magnitude factored out."""
    finite = np.isfinite(log_mag)
    if not np.any(finite):
        return 0.0
    m = float(np.max(log_mag[finite]))
    t = np.zeros_like(log_mag)
    t[finite] = np.exp(log_mag[finite] - m)
    return math.exp(m) * float(np.sum(weights * cosf * t))


def _abs_sum(weights, log_mag, extra=None):
    finite = np.isfinite(log_mag)
    if not np.any(finite):
        return 0.0
    m = float(np.max(log_mag[finite]))
    t = np.zeros_like(log_mag)
    t[finite] = np.exp(log_mag[finite] - m)
    if extra is not None:
        t = t * extra
    return math.exp(m) * float(np.sum(np.abs(weights) * t))


def _interior_product(thetas: np.ndarray, layers: LayeredSample, y_lo: int, y_hi: int):
    """Per-node renormalized product M_{y_lo} ... M_{y_hi} (rows inclusive)."""
    nn = thetas.shape[0]
    m00 = np.ones(nn)
    m01 = np.zeros(nn)
    m10 = np.zeros(nn)
    m11 = np.ones(nn)
    if y_hi < y_lo:
        return m00, m01, m10, m11, np.zeros(nn)
    w1, w2 = layers.rows(y_lo, y_hi + 1)
    om = 2.0 * np.sin(thetas)
    dlog = _kernels.interior_chunk_real(m00, m01, m10, m11, om,
                                        np.ascontiguousarray(w1),
                                        np.ascontiguousarray(w2))
    return m00, m01, m10, m11, dlog


def _ratio_terms(thetas, layers, y: int, spec: QuadSpec):
    """log of <e1,V_<0><V_>y,e1> / <M_0..M_y V_>y, V_<0> per node, plus the
    per-node hyperbolic diameter bound of the two vector iterations."""
    kw = dict(tol=spec.vec_tol, buffer=spec.buffer, max_layers=spec.max_layers)
    fw = boundary_vectors(thetas, "forward", layers, y, **kw)
    bw = boundary_vectors(thetas, "backward", layers, 0, **kw)
    m00, m01, m10, m11, dlog = _interior_product(thetas, layers, 0, y)
    pv0 = m00 * fw.vectors[:, 0] + m01 * fw.vectors[:, 1]
    pv1 = m10 * fw.vectors[:, 0] + m11 * fw.vectors[:, 1]
    den = pv0 * bw.vectors[:, 0] + pv1 * bw.vectors[:, 1]
    with np.errstate(divide="ignore"):
        log_core = (np.log(bw.vectors[:, 0]) + np.log(fw.vectors[:, 0])
                    - dlog - np.log(den))
    diam = fw.diam_bound + bw.diam_bound
    return log_core, diam


def _vec_weight(diam: np.ndarray) -> np.ndarray:
    # relative node error ~ diameter for certified nodes, order one otherwise
    return np.minimum(diam, 1.0)


def covariance_H1_zero(pair: EdgePair, layers: LayeredSample,
                       quad_spec: QuadSpec = QuadSpec()) -> CovResult:
    """Squared-integral covariance at H1 = H2 = 0.

    The sign is (-1)^(y+1) times the sign of w1(y)*w1(0) exactly; the
    theta-integral concentrates near 0 at the scale exp(-c sqrt(y)), so the
    panels extend geometrically down to theta_floor_scale * exp(-sqrt(y)).
    """
    y = pair.y
    t_min = quad_spec.theta_floor_scale * math.exp(-math.sqrt(y))
    edges = _geometric_edges(t_min, math.pi / 2, quad_spec.panels_per_decade)
    nf, wf = _gauss_panels(edges, quad_spec.order)
    nc, wc = _gauss_panels(edges, quad_spec.coarse_order)
    thetas = np.concatenate([nf, nc])
    log_core, diam = _ratio_terms(thetas, layers, y, quad_spec)
    _, w2r = layers.rows(0, y)
    log_mag = log_core + float(np.sum(np.log(w2r)))
    cosf = _cos_phase(pair.x, thetas)
    kf = nf.shape[0]
    I_f = _signed_sum(wf, cosf[:kf], log_mag[:kf])
    I_c = _signed_sum(wc, cosf[kf:], log_mag[kf:])
    vec_I = _abs_sum(wf, log_mag[:kf], extra=_vec_weight(diam[:kf]))
    w1y = layers.row(y)[0]
    w10 = layers.row(0)[0]
    pref = 4.0 / math.pi ** 2 * (-1.0) ** (y + 1) * w1y * w10
    value = pref * I_f * I_f
    quad_error = abs(pref) * abs(I_f * I_f - I_c * I_c)
    vec_err = abs(pref) * ((abs(I_f) + vec_I) ** 2 - I_f * I_f)
    return CovResult(value, quad_error, vec_err, layers.seed)


def covariance_liquid(pair: EdgePair, H1: float, layers: LayeredSample,
                      curve: spectrum.SpectralCurve,
                      quad_spec: QuadSpec = QuadSpec()) -> CovResult:
    """Three-integral covariance for H1 in (0, H_c) at H2 = 0.

    All three integrands concentrate at theta_c where the field H1 crosses
    the spectral curve; panels are geometric in the distance to theta_c.
    """
    if not 0.0 < H1 < curve.h_c:
        raise ValueError("H1 must lie strictly inside (0, H_c)")
    theta_c = spectrum.invert_curve(curve, H1)
    if not 0.0 < theta_c < math.pi / 2:
        raise ValueError("theta_c degenerate; H1 must be inside (delta, H_c)")
    y = pair.y
    # outer integrals over [theta_c, pi/2], nodes dense toward theta_c
    span = math.pi / 2 - theta_c
    u_min = span * 1e-6 / (1.0 + y)
    u_edges = _geometric_edges(u_min, span, quad_spec.panels_per_decade)
    nf_u, wf_u = _gauss_panels(u_edges, quad_spec.order)
    nc_u, wc_u = _gauss_panels(u_edges, quad_spec.coarse_order)
    thetas = theta_c + np.concatenate([nf_u, nc_u])
    log_core, diam = _ratio_terms(thetas, layers, y, quad_spec)
    _, w2r = layers.rows(0, y)
    sum_log_w2 = float(np.sum(np.log(w2r)))
    cosf = _cos_phase(pair.x, thetas)
    kf = nf_u.shape[0]
    log1 = log_core + sum_log_w2 + H1 * y
    log3 = log_core + sum_log_w2 - H1 * y
    I1_f = _signed_sum(wf_u, cosf[:kf], log1[:kf])
    I1_c = _signed_sum(wc_u, cosf[kf:], log1[kf:])
    I3_f = _signed_sum(wf_u, cosf[:kf], log3[:kf])
    I3_c = _signed_sum(wc_u, cosf[kf:], log3[kf:])
    vec_w = _vec_weight(diam[:kf])
    vec_I1 = _abs_sum(wf_u, log1[:kf], extra=vec_w)
    vec_I3 = _abs_sum(wf_u, log3[:kf], extra=vec_w)
    # middle integral over [0, theta_c], nodes dense toward theta_c from below
    v_min = theta_c * 1e-6 / (1.0 + y)
    v_edges = _geometric_edges(v_min, theta_c, quad_spec.panels_per_decade)
    nf_v, wf_v = _gauss_panels(v_edges, quad_spec.order)
    nc_v, wc_v = _gauss_panels(v_edges, quad_spec.coarse_order)
    phis = theta_c - np.concatenate([nf_v, nc_v])
    # interior matrices cover rows 1..y-1 but the normalizer runs over rows
    # 0..y-1 (verified against the exact finite-torus covariance)
    m00, _, _, _, dlog2 = _interior_product(phis, layers, 1, y - 1)
    with np.errstate(divide="ignore"):
        log2 = dlog2 + np.log(m00) - H1 * y - sum_log_w2
    cosf2 = _cos_phase(pair.x, phis)
    kv = nf_v.shape[0]
    I2_f = _signed_sum(wf_v, cosf2[:kv], log2[:kv])
    I2_c = _signed_sum(wc_v, cosf2[kv:], log2[kv:])
    sy = (-1.0) ** (y + 1)
    B_f = sy * I2_f + I3_f
    B_c = sy * I2_c + I3_c
    w1y = layers.row(y)[0]
    w10 = layers.row(0)[0]
    pref = 4.0 / math.pi ** 2 * sy * w1y * w10
    value = pref * I1_f * B_f
    quad_error = abs(pref) * abs(I1_f * B_f - I1_c * B_c)
    vec_err = abs(pref) * ((abs(I1_f) + vec_I1) * (abs(B_f) + vec_I3)
                           - abs(I1_f) * abs(B_f))
    return CovResult(value, quad_error, vec_err, layers.seed)


def _resolve_x(x_rule, y: int) -> int:
    if x_rule in ("zero", None):
        return 0
    if callable(x_rule):
        return int(x_rule(y))
    return int(x_rule)


def decay_profile(H1: float, law: DisorderLaw, seed: int, y_list,
                  x_rule="zero", quad_spec: QuadSpec = QuadSpec(),
                  curve: spectrum.SpectralCurve = None,
                  budget: spectrum.Budget = None):
    """Covariance magnitudes along increasing rows y for one realization.

    x_rule is "zero", a constant offset, or a callable y -> x.  Returns a
    list of (y, CovResult); the disorder realization is shared across rows.
    """
    y_list = [int(y) for y in y_list]
    if any(b <= a for a, b in zip(y_list, y_list[1:])):
        raise ValueError("y_list must be strictly increasing")
    if H1 < 0.0:
        raise ValueError("H1 must be nonnegative")
    margin = quad_spec.layer_margin
    layers = sample_layers(law, -margin, max(y_list) + margin + 1, seed)
    if H1 > 0.0 and curve is None:
        curve = spectrum.build_spectral_curve(
            0.0, 1.0, law, budget=budget or spectrum.Budget(), seed=seed)
    out = []
    for y in y_list:
        pair = EdgePair(_resolve_x(x_rule, y), y)
        if H1 == 0.0:
            out.append((y, covariance_H1_zero(pair, layers, quad_spec)))
        else:
            out.append((y, covariance_liquid(pair, H1, layers, curve, quad_spec)))
    return out
