"""Renormalized products of random 2x2 matrices and Lyapunov estimators.

The transfer matrices of the model are [[2 w1 sin(theta + i H2), w2^2], [1, 0]];
their top Lyapunov exponent as a function of the angle is the spectral curve
everything else is built from.  Estimation runs a single long product per
node with per-step renormalization; error bars come from batch means.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .disorder import DisorderLaw, LayeredSample
from .poincare import contraction_bound
from .signlog import LogScaled

_STREAM_KEY = 1 << 20  # salt separating estimator streams from layer sampling


def make_dimer_matrix(theta: float, H2: float, w1: float, w2: float) -> np.ndarray:
    """[[2 w1 sin(theta + i H2), w2^2], [1, 0]] as a complex 2x2 array."""
    top = 2.0 * w1 * cmath.sin(complex(theta, H2))
    return np.array([[top, w2 * w2], [1.0, 0.0]], dtype=complex)


def make_V_matrix(x: float, w1: float, w2: float) -> np.ndarray:
    """[[x w1/w2, -w2], [1/w2, 0]]; real with determinant 1."""
    return np.array([[x * w1 / w2, -w2], [1.0 / w2, 0.0]])


@dataclass
class ProductAccumulator:
    """Running 2x2 product, kept at unit l1 norm, with the log scale factored out."""

    current: np.ndarray = None
    log_scale: float = 0.0
    steps: int = 0

    def __post_init__(self):
        if self.current is None:
            self.current = np.eye(2, dtype=complex)

    def absorb(self, m: np.ndarray) -> None:
        p = self.current @ m
        s = np.abs(p).sum()
        if s == 0.0:
            raise FloatingPointError("product collapsed to zero")
        self.current = p / s
        self.log_scale += math.log(s)
        self.steps += 1

    @property
    def log_norm(self) -> float:
        """log of the l1 norm of the true (unrenormalized) product."""
        return self.log_scale + math.log(np.abs(self.current).sum())

    def trace(self) -> LogScaled:
        return LogScaled.from_parts(self.log_scale, np.trace(self.current))

    def top_left(self) -> LogScaled:
        return LogScaled.from_parts(self.log_scale, self.current[0, 0])

    def entry(self, i: int, j: int) -> LogScaled:
        return LogScaled.from_parts(self.log_scale, self.current[i, j])


@dataclass(frozen=True)
class LyapEstimate:
    value: float
    stderr: float
    steps: int
    method: str = "norm"


@dataclass(frozen=True)
class MatrixStream:
    """i.i.d. stream of 2x2 matrices in array-of-entries form.

    draw(rng, n, offset) returns four arrays (a, b, c, d) for matrices
    [[a,b],[c,d]]; offset is the global step index of the first draw (used
    by streams with deterministic period-2 modulation).
    """

    draw: callable
    is_real: bool = True


def dimer_stream(law: DisorderLaw, theta: float, H2: float, gamma: float = 1.0) -> MatrixStream:
    """Stream of dimer transfer matrices; gamma > 1 applies the period-2
    modulation w2 -> w2 * gamma^(2(y mod 2) - 1)."""
    omega = 2.0 * cmath.sin(complex(theta, H2))
    real = omega.imag == 0.0
    if real:
        omega = omega.real

    def draw(rng, n, offset):
        w1 = law.w1.sample(rng, n)
        w2 = law.w2.sample(rng, n)
        if gamma != 1.0:
            y = np.arange(offset, offset + n)
            w2 = w2 * gamma ** (2.0 * (y % 2) - 1.0)
        a = omega * w1
        b = w2 * w2
        c = np.ones(n)
        d = np.zeros(n)
        return a, b, c, d

    return MatrixStream(draw, is_real=real)


def v_stream(law: DisorderLaw, x: float) -> MatrixStream:
    """Stream of the real unimodular matrices [[x w1/w2, -w2], [1/w2, 0]]."""

    def draw(rng, n, offset):
        w1 = law.w1.sample(rng, n)
        w2 = law.w2.sample(rng, n)
        return x * w1 / w2, -w2, 1.0 / w2, np.zeros(n)

    return MatrixStream(draw, is_real=True)


def dh_stream(z_marginal, eps: float) -> MatrixStream:
    """Stream of [[1, eps], [eps Z, Z]] for the small-coupling benchmark."""

    def draw(rng, n, offset):
        z = z_marginal.sample(rng, n)
        return np.ones(n), np.full(n, eps), eps * z, z

    return MatrixStream(draw, is_real=True)


def constant_stream(m: np.ndarray) -> MatrixStream:
    m = np.asarray(m)
    real = not np.iscomplexobj(m) or np.all(m.imag == 0)
    mm = m.real if real else m

    def draw(rng, n, offset):
        a = np.full(n, mm[0, 0])
        b = np.full(n, mm[0, 1])
        c = np.full(n, mm[1, 0])
        d = np.full(n, mm[1, 1])
        return a, b, c, d

    return MatrixStream(draw, is_real=real)


def lyapunov(stream: MatrixStream, n_steps: int, seed: int = 0, blocks: int = 32,
             burn_in: int = 1024, method: str = "norm") -> LyapEstimate:
    """Top Lyapunov exponent of the stream from one long renormalized product.

    value = (log_scale + log l1-norm)/steps after a burn-in; stderr is the
    batch-means standard error over `blocks` contiguous batches.  The trace
    method evaluates (1/n) log|Tr| of the same product.
    """
    if blocks < 30:
        raise ValueError("need at least 30 blocks for batch means")
    block = max(2, (n_steps // blocks) & ~1)  # even so period-2 streams stay aligned
    burn_in = (burn_in + 1) & ~1
    key = tuple(int(s) for s in seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    rng = np.random.default_rng((*key, _STREAM_KEY))
    if stream.is_real:
        m = np.array([1.0, 0.0, 0.0, 1.0])
        kern = _kernels.prod_chunk_real
    else:
        m = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)
        kern = _kernels.prod_chunk_complex
    offset = 0
    if burn_in:
        arrs = stream.draw(rng, burn_in, offset)
        kern(m, *_cast(arrs, stream.is_real))
        offset += burn_in
    gains = np.empty(blocks)
    log_scale = 0.0
    for k in range(blocks):
        arrs = stream.draw(rng, block, offset)
        dlog = kern(m, *_cast(arrs, stream.is_real))
        offset += block
        gains[k] = dlog / block
        log_scale += dlog
    steps = blocks * block
    l1 = np.abs(m).sum() if not stream.is_real else abs(m[0]) + abs(m[1]) + abs(m[2]) + abs(m[3])
    stderr = float(np.std(gains, ddof=1) / math.sqrt(blocks))
    if method == "norm":
        value = (log_scale + math.log(l1)) / steps
    elif method == "trace":
        tr = m[0] + m[3]
        if abs(tr) == 0.0:
            raise ArithmeticError("zero trace (degenerate angle); use the norm method")
        value = (log_scale + math.log(abs(tr))) / steps
    else:
        raise ValueError(f"unknown method {method!r}")
    return LyapEstimate(float(value), stderr, steps, method)


def _cast(arrs, is_real):
    dt = np.float64 if is_real else np.complex128
    return tuple(np.ascontiguousarray(np.broadcast_to(a, arrs[0].shape), dtype=dt)
                 for a in arrs)


def lyapunov_gamma(theta: float, H2: float, gamma: float, law: DisorderLaw,
                   n_steps: int, seed: int = 0, blocks: int = 32) -> LyapEstimate:
    """Half the Lyapunov exponent of the period-2 modulated pair products,
    i.e. the per-row exponent of the modulated stream."""
    if gamma < 1.0:
        raise ValueError("gamma >= 1 by convention")
    est = lyapunov(dimer_stream(law, theta, H2, gamma=gamma), n_steps, seed=seed, blocks=blocks)
    return est


@dataclass(frozen=True)
class BoundaryVectors:
    """Limit direction vectors for a set of angles, with certification data."""

    vectors: np.ndarray    # (n_nodes, 2) positive, unit l2 norm
    diam_bound: np.ndarray  # certified hyperbolic diameter bound per node
    layers_used: int


def boundary_vectors(thetas, direction: str, layers: LayeredSample, start_y: int,
                     tol: float = 1e-10, buffer: int = 200,
                     max_layers: int = 10_000, chunk: int = 256) -> BoundaryVectors:
    """Common-realization boundary vectors for all angles at once.

    forward:  limit of M_{start_y+1} ... M_N applied to a vector (rows upward);
    backward: limit of M*_{start_y-1} ... M*_{start_y-N} (adjoint products,
    rows downward).  Stops once the pairwise contraction bounds certify the
    image diameter < tol at every node (plus `buffer` extra rows), or at
    max_layers with the uncertified diameter reported.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if np.any(thetas <= 0.0):
        raise ValueError("theta must be positive for convergence")
    adjoint = direction == "backward"
    if not adjoint and direction != "forward":
        raise ValueError("direction must be forward or backward")
    om = 2.0 * np.sin(thetas)
    nn = om.shape[0]
    m00 = np.ones(nn)
    m01 = np.zeros(nn)
    m10 = np.zeros(nn)
    m11 = np.ones(nn)
    log_tau = np.zeros(nn)   # accumulated sum of log(1+q) over disjoint pairs
    first_q = None
    used = 0
    extra_left = None
    chunk = (chunk + 1) & ~1
    while used < max_layers:
        n = min(chunk, max_layers - used)
        n = n if n % 2 == 0 else n + 1
        if adjoint:
            y_hi = start_y - used
            w1, w2 = layers.rows(y_hi - n, y_hi)
            w1, w2 = w1[::-1].copy(), w2[::-1].copy()
        else:
            y_lo = start_y + 1 + used
            w1, w2 = layers.rows(y_lo, y_lo + n)
            w1, w2 = np.ascontiguousarray(w1), np.ascontiguousarray(w2)
        lt = _kernels.boundary_chunk_real(m00, m01, m10, m11, om, w1, w2, adjoint)
        if first_q is None:
            alpha = w2[1] ** 2 if adjoint else w2[0] ** 2
            first_q = 2.0 * om * om * w1[0] * w1[1] / alpha
        log_tau += lt
        used += n
        diam = _diam_bound(first_q, log_tau)
        if extra_left is not None:
            extra_left -= n
            if extra_left <= 0:
                break
        elif np.all(diam < tol):
            extra_left = buffer
    diam = _diam_bound(first_q, log_tau)
    v0 = m00 + m01
    v1 = m10 + m11
    norm = np.hypot(v0, v1)
    vecs = np.stack([np.abs(v0) / norm, np.abs(v1) / norm], axis=1)
    return BoundaryVectors(vecs, diam, used)


def _diam_bound(first_q, log_tau):
    """Diameter after the first pair, shrunk by every later pair's factor."""
    t1 = 1.0 / (1.0 + first_q)
    with np.errstate(divide="ignore"):
        # t1 = 1 (first_q = 0) legitimately yields an infinite diameter
        d0 = 2.0 * np.arctanh(t1)
    log_first = np.log1p(first_q)
    return d0 * np.exp(-(log_tau - log_first))


def boundary_vector(theta: float, direction: str, layers: LayeredSample, start_y: int,
                    tol: float = 1e-10, **kw):
    """Single-angle convenience wrapper; returns (vector, certified diameter)."""
    bv = boundary_vectors([theta], direction, layers, start_y, tol=tol, **kw)
    return bv.vectors[0], float(bv.diam_bound[0])
