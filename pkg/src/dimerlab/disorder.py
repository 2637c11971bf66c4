"""Layered disorder laws for the weights (w1, w2) and their exact log-moments.

A law is a pair of independent marginals with compact support in (0, inf).
The w2 marginal is normalized so that E[log w2] = 0 exactly; everything
downstream (Lyapunov exponents, free energies) assumes this normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

# Rows are drawn in fixed blocks so that row y is a pure function of
# (law, seed, y): block m covers y in [m*B, (m+1)*B) and gets its own
# counter-based stream keyed by (seed, m).  Disjoint ranges stay consistent.
_BLOCK = 2048
_BLOCK_KEY_OFFSET = 1 << 48  # keeps the block key nonnegative for SeedSequence


@dataclass(frozen=True)
class Marginal:
    """One compactly supported positive marginal.

    kinds:
      constant        params = (value,)
      two-point       params = (v_lo, v_hi, p_hi)   P(v_hi)=p_hi
      log-uniform     params = (v_lo, v_hi)         log w uniform on [log v_lo, log v_hi]
      finite-discrete params = (values..., probs...) interleaved via the
                      factory below; stored as two tuples
    """

    kind: str
    values: tuple = ()
    probs: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "two-point", "log-uniform", "finite-discrete"):
            raise ValueError(f"unknown marginal kind {self.kind!r}")
        if any(v <= 0 for v in self.values):
            raise ValueError("marginal support must be strictly positive")
        if self.kind == "finite-discrete":
            if len(self.values) != len(self.probs) or not self.values:
                raise ValueError("finite-discrete needs matching values/probs")
            if abs(sum(self.probs) - 1.0) > 1e-12 or any(p < 0 for p in self.probs):
                raise ValueError("probs must be nonnegative and sum to 1")
        if self.kind == "two-point" and not (0.0 < self.probs[0] < 1.0):
            raise ValueError("two-point needs p in (0,1)")

    # -- constructors ----------------------------------------------------
    @staticmethod
    def constant(v: float) -> "Marginal":
        return Marginal("constant", (float(v),))

    @staticmethod
    def two_point(v_lo: float, v_hi: float, p_hi: float = 0.5) -> "Marginal":
        return Marginal("two-point", (float(v_lo), float(v_hi)), (float(p_hi),))

    @staticmethod
    def two_point_sigma(sigma: float) -> "Marginal":
        """log w in {-sigma, +sigma} with equal probability (already centered)."""
        return Marginal.two_point(math.exp(-sigma), math.exp(sigma), 0.5)

    @staticmethod
    def log_uniform(v_lo: float, v_hi: float) -> "Marginal":
        if not v_lo < v_hi:
            raise ValueError("log-uniform needs v_lo < v_hi")
        return Marginal("log-uniform", (float(v_lo), float(v_hi)))

    @staticmethod
    def log_uniform_sigma(s: float) -> "Marginal":
        """log w uniform on [-s, s]; Var(log w) = s^2/3."""
        return Marginal.log_uniform(math.exp(-s), math.exp(s))

    @staticmethod
    def finite_discrete(values, probs) -> "Marginal":
        return Marginal("finite-discrete", tuple(float(v) for v in values),
                        tuple(float(p) for p in probs))

    # -- exact moments ---------------------------------------------------
    @property
    def support(self):
        return min(self.values), max(self.values)

    def _atoms(self):
        if self.kind == "constant":
            return np.array(self.values), np.array([1.0])
        if self.kind == "two-point":
            p = self.probs[0]
            return np.array(self.values), np.array([1.0 - p, p])
        if self.kind == "finite-discrete":
            return np.array(self.values), np.array(self.probs)
        return None

    def mean_log(self) -> float:
        if self.kind == "log-uniform":
            a, b = np.log(self.values)
            return 0.5 * (a + b)
        v, p = self._atoms()
        return float(np.dot(p, np.log(v)))

    def var_log(self) -> float:
        if self.kind == "log-uniform":
            a, b = np.log(self.values)
            return (b - a) ** 2 / 12.0
        v, p = self._atoms()
        lv = np.log(v)
        m = np.dot(p, lv)
        return float(np.dot(p, (lv - m) ** 2))

    def moment(self, t: float) -> float:
        """E[w^t], closed form for every kind."""
        if t == 0.0:
            return 1.0
        if self.kind == "log-uniform":
            a, b = np.log(self.values)
            return float((math.exp(t * b) - math.exp(t * a)) / (t * (b - a)))
        v, p = self._atoms()
        return float(np.dot(p, np.asarray(v, dtype=float) ** t))

    def scaled(self, c: float) -> "Marginal":
        """The marginal of c*w."""
        if c <= 0:
            raise ValueError("scale must be positive")
        return replace(self, values=tuple(c * v for v in self.values))

    def is_deterministic(self) -> bool:
        return self.var_log() == 0.0

    # -- sampling --------------------------------------------------------
    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "constant":
            rng.random(n)  # burn a draw so stream layout is kind-independent
            return np.full(n, self.values[0])
        if self.kind == "two-point":
            lo, hi = self.values
            return np.where(rng.random(n) < self.probs[0], hi, lo)
        if self.kind == "log-uniform":
            a, b = np.log(self.values)
            return np.exp(rng.uniform(a, b, n))
        v, p = self._atoms()
        # inverse-cdf on a single uniform per draw keeps the stream layout flat
        cdf = np.cumsum(p)
        return np.asarray(v)[np.searchsorted(cdf, rng.random(n), side="right").clip(0, len(v) - 1)]


@dataclass(frozen=True)
class DisorderLaw:
    """Independent marginals for w1 and w2; w2 must be normalized and random."""

    w1: Marginal
    w2: Marginal
    normalization: float = 1.0  # multiplier already applied to w2

    @property
    def support_lo(self) -> float:
        return min(self.w1.support[0], self.w2.support[0])

    @property
    def support_hi(self) -> float:
        return max(self.w1.support[1], self.w2.support[1])

    def var_log_w2(self) -> float:
        return self.w2.var_log()


def normalize_law(law: DisorderLaw) -> DisorderLaw:
    """Scale w2 so E[log w2] = 0 exactly; reject deterministic w2."""
    if law.w2.is_deterministic():
        raise ValueError("w2 must be non-deterministic")
    if law.support_lo <= 0:
        raise ValueError("support must be positive")
    c = math.exp(-law.w2.mean_log())
    return DisorderLaw(law.w1, law.w2.scaled(c), normalization=law.normalization * c)


def log_variance(law: DisorderLaw) -> float:
    """Var(log w2) of a normalized law."""
    if abs(law.w2.mean_log()) > 1e-12:
        raise ValueError("law is not normalized; call normalize_law first")
    return law.w2.var_log()


def canonical_two_point(sigma: float, w1: float = 1.0) -> DisorderLaw:
    """The workhorse test law: w1 constant, log w2 in {-sigma, +sigma}."""
    return DisorderLaw(Marginal.constant(w1), Marginal.two_point_sigma(sigma))


def canonical_log_uniform(s: float, w1: float = 1.0) -> DisorderLaw:
    """Smoothed law: w1 constant, log w2 uniform on [-s, s]."""
    return DisorderLaw(Marginal.constant(w1), Marginal.log_uniform_sigma(s))


@dataclass(frozen=True)
class LayeredSample:
    """One quenched realization of rows (w1(y), w2(y)) for y in [y_lo, y_hi)."""

    law: DisorderLaw
    seed: int
    y_lo: int
    y_hi: int
    w1: np.ndarray = field(repr=False, default=None)
    w2: np.ndarray = field(repr=False, default=None)

    def row(self, y: int):
        i = y - self.y_lo
        return self.w1[i], self.w2[i]

    def rows(self, y_from: int, y_to: int):
        """Arrays for y in [y_from, y_to)."""
        i, j = y_from - self.y_lo, y_to - self.y_lo
        if i < 0 or j > self.y_hi - self.y_lo:
            raise ValueError("requested rows outside the sampled range")
        return self.w1[i:j], self.w2[i:j]


def _block_rows(law: DisorderLaw, seed: int, m: int):
    rng = np.random.default_rng((int(seed), m + _BLOCK_KEY_OFFSET))
    w1 = law.w1.sample(rng, _BLOCK)
    w2 = law.w2.sample(rng, _BLOCK)
    return w1, w2


def sample_layers(law: DisorderLaw, y_lo: int, y_hi: int, seed: int) -> LayeredSample:
    """Rows for y in [y_lo, y_hi); pure function of (law, seed, y) per row."""
    if y_hi <= y_lo:
        raise ValueError("empty y range")
    m_lo = y_lo // _BLOCK
    m_hi = (y_hi - 1) // _BLOCK
    w1_parts, w2_parts = [], []
    for m in range(m_lo, m_hi + 1):
        b1, b2 = _block_rows(law, seed, m)
        lo = max(y_lo - m * _BLOCK, 0)
        hi = min(y_hi - m * _BLOCK, _BLOCK)
        w1_parts.append(b1[lo:hi])
        w2_parts.append(b2[lo:hi])
    return LayeredSample(law, seed, y_lo, y_hi,
                         np.concatenate(w1_parts), np.concatenate(w2_parts))


def gamma_modulated_view(sample: LayeredSample, gamma: float) -> LayeredSample:
    """w2(y) -> w2(y) * gamma^(2*(y mod 2) - 1): gamma on odd rows, 1/gamma on even."""
    if gamma < 1.0:
        raise ValueError("gamma >= 1 by convention")
    y = np.arange(sample.y_lo, sample.y_hi)
    factor = gamma ** (2.0 * (y % 2) - 1.0)
    return LayeredSample(sample.law, sample.seed, sample.y_lo, sample.y_hi,
                         sample.w1, sample.w2 * factor)
