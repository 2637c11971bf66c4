"""Exact finite-torus dimer computations.

The torus is (Z/2L) x (Z/2N) with L even and N odd; a vertex (x,y) is black
iff x+y is odd.  Horizontal edges carry w1(y) e^{-+H2} (black-left / black-
right) and vertical edges w2(y) e^{+-H1} (black-bottom / black-top).  The
partition function is a signed half-sum of four determinants, each of which
factorizes over Fourier blocks handled by 2x2 transfer-matrix products.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .disorder import LayeredSample
from .signlog import LogScaled, cancellation_level, log_cosh, logsum

TAUS = ((0, 0), (0, 1), (1, 0), (1, 1))
_I_POW = (1.0 + 0.0j, 1j, -1.0 + 0.0j, -1j)  # exact integer powers of i


def ipow(n: int) -> complex:
    return _I_POW[n % 4]


@dataclass(frozen=True)
class TorusSpec:
    L: int
    N: int

    def __post_init__(self):
        if self.L < 2 or self.L % 2:
            raise ValueError("L must be even and >= 2")
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError("N must be odd and >= 3 (N=1 doubles vertical edges)")

    @property
    def n_vertices(self) -> int:
        return 4 * self.L * self.N

    @property
    def y_min(self) -> int:
        return -self.N + 1

    @property
    def y_max(self) -> int:
        return self.N


def is_black(x: int, y: int) -> bool:
    return (x + y) % 2 == 1


@dataclass
class WeightField:
    torus: TorusSpec
    w1: np.ndarray  # indexed by y = -N+1 .. N
    w2: np.ndarray
    H1: float = 0.0
    H2: float = 0.0

    def __post_init__(self):
        n = 2 * self.torus.N
        self.w1 = np.asarray(self.w1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        if self.w1.shape != (n,) or self.w2.shape != (n,):
            raise ValueError("need one (w1, w2) row per y in (-N, N]")
        if np.any(self.w1 <= 0) or np.any(self.w2 <= 0):
            raise ValueError("weights must be positive")

    @staticmethod
    def from_layers(torus: TorusSpec, layers: LayeredSample, H1: float, H2: float) -> "WeightField":
        w1, w2 = layers.rows(torus.y_min, torus.y_max + 1)
        return WeightField(torus, w1, w2, H1, H2)

    @staticmethod
    def uniform(torus: TorusSpec, H1: float = 0.0, H2: float = 0.0,
                w1: float = 1.0, w2: float = 1.0) -> "WeightField":
        n = 2 * torus.N
        return WeightField(torus, np.full(n, w1), np.full(n, w2), H1, H2)

    def idx(self, y: int) -> int:
        return y - self.torus.y_min

    def w1_at(self, y: int) -> float:
        return float(self.w1[self.idx(y)])

    def w2_at(self, y: int) -> float:
        return float(self.w2[self.idx(y)])

    def edge_weight(self, u, v) -> float:
        """Weight of the torus edge {u, v} (vertices as (x, y) with wrap)."""
        (x1, y1), (x2, y2) = u, v
        L2, N2 = 2 * self.torus.L, 2 * self.torus.N
        dx = (x2 - x1) % L2
        dy = (y2 - y1) % N2
        if dy == 0 and dx in (1, L2 - 1):
            if dx == L2 - 1:  # make u the left endpoint
                (x1, y1), (x2, y2) = (x2, y2), (x1, y1)
            s = -1.0 if is_black(x1, y1) else 1.0
            return self.w1_at(y1) * math.exp(s * self.H2)
        if dx == 0 and dy in (1, N2 - 1):
            if dy == N2 - 1:  # make u the bottom endpoint
                (x1, y1), (x2, y2) = (x2, y2), (x1, y1)
            s = 1.0 if is_black(x1, y1) else -1.0
            return self.w2_at(y1) * math.exp(s * self.H1)
        raise ValueError(f"{u} and {v} are not neighbors")


# ---------------------------------------------------------------------------
# Fourier blocks and transfer-matrix scans
# ---------------------------------------------------------------------------

def fourier_indices(L: int, tau1: int) -> np.ndarray:
    """k in {-L/2+1, ..., L/2} shifted by -tau1/2."""
    return np.arange(-L // 2 + 1, L // 2 + 1) - tau1 / 2.0


def _z_diag(wf: WeightField, theta: float) -> np.ndarray:
    return 2.0 * wf.w1 * cmath.cos(complex(theta, wf.H2))


@dataclass
class BlockScan:
    """Renormalized prefix/suffix products of R_y = [[z(y), w2(y)^2], [1, 0]]."""

    theta: float
    prefix: np.ndarray       # (2N+1, 2, 2) complex, unit l1 norm
    prefix_log: np.ndarray
    suffix: np.ndarray
    suffix_log: np.ndarray
    trace_term: LogScaled
    sign_term_log: float     # log of 2 cosh(2 N H1) * prod w2

    def det(self, tau2: int) -> LogScaled:
        sign = LogScaled(self.sign_term_log, 1.0 if tau2 == 0 else -1.0)
        terms = [self.trace_term, sign]
        total = logsum(terms)
        # a sector determinant can vanish identically (critical torus); below
        # double precision the residual phase is noise, so call it exact zero
        if cancellation_level(terms, total) > 13.0:
            return LogScaled(float("-inf"), 0.0)
        return total


def block_scan(wf: WeightField, theta: float) -> BlockScan:
    n = 2 * wf.torus.N
    z = _z_diag(wf, theta)
    b = wf.w2 ** 2
    pref = np.empty((n + 1, 2, 2), dtype=complex)
    pref_log = np.empty(n + 1)
    suf = np.empty((n + 1, 2, 2), dtype=complex)
    suf_log = np.empty(n + 1)
    m = np.eye(2, dtype=complex)
    lg = 0.0
    pref[0], pref_log[0] = m, lg
    for j in range(n):
        r = np.array([[z[j], b[j]], [1.0, 0.0]])
        m = m @ r
        s = np.abs(m).sum()
        m = m / s
        lg += math.log(s)
        pref[j + 1], pref_log[j + 1] = m, lg
    m = np.eye(2, dtype=complex)
    lg = 0.0
    suf[n], suf_log[n] = m, lg
    for j in range(n - 1, -1, -1):
        r = np.array([[z[j], b[j]], [1.0, 0.0]])
        m = r @ m
        s = np.abs(m).sum()
        m = m / s
        lg += math.log(s)
        suf[j], suf_log[j] = m, lg
    trace_term = LogScaled.from_parts(pref_log[n], np.trace(pref[n]))
    sign_log = math.log(2.0) + log_cosh(2.0 * wf.torus.N * wf.H1) + float(np.sum(np.log(wf.w2)))
    return BlockScan(theta, pref, pref_log, suf, suf_log, trace_term, sign_log)


def block_det(wf: WeightField, theta: float, tau2: int) -> LogScaled:
    return block_scan(wf, theta).det(tau2)


def tridiagonal_minor(wf: WeightField, theta: float, y_from: int, y_to: int) -> LogScaled:
    """D = <R_{y_from} ... R_{y_to} e1, e1> via the two-term recursion
    D(y) = z(y) D(y+1) + w2(y)^2 D(y+2); empty range gives 1."""
    if y_to < y_from - 1:
        raise ValueError("invalid range")
    z = _z_diag(wf, theta)
    d1, l1 = 1.0 + 0.0j, 0.0  # D(y+1)
    d2, l2 = 0.0j, 0.0        # D(y+2)
    for y in range(y_to, y_from - 1, -1):
        j = wf.idx(y)
        # align scales before combining
        if d2 == 0.0:
            d, lg = z[j] * d1, l1
        else:
            m = max(l1, l2)
            d = z[j] * d1 * math.exp(l1 - m) + wf.w2[j] ** 2 * d2 * math.exp(l2 - m)
            lg = m
        s = abs(d)
        if s == 0.0:
            d2, l2 = d1, l1
            d1, l1 = 0.0j, lg
            continue
        d2, l2 = d1, l1
        d1, l1 = d / s, lg + math.log(s)
    return LogScaled.from_parts(l1, d1)


def dense_block_matrix(wf: WeightField, theta: float, tau2: int) -> np.ndarray:
    """The 2N x 2N Fourier-block matrix, for oracles and boundary entries."""
    n = 2 * wf.torus.N
    m = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(m, _z_diag(wf, theta))
    for j in range(n - 1):
        m[j, j + 1] = 1j * wf.w2[j] * math.exp(-wf.H1)
        m[j + 1, j] = 1j * wf.w2[j] * math.exp(wf.H1)
    s = -1.0 if tau2 else 1.0
    m[0, n - 1] += s * 1j * wf.w2[n - 1] * math.exp(wf.H1)
    m[n - 1, 0] += s * 1j * wf.w2[n - 1] * math.exp(-wf.H1)
    return m


def det_K_tau(wf: WeightField, tau) -> LogScaled:
    """det K_tau as the product of its Fourier block determinants (real)."""
    tau1, tau2 = tau
    out = LogScaled(0.0, 1.0)
    for k in fourier_indices(wf.torus.L, tau1):
        out = out * block_det(wf, math.pi * k / wf.torus.L, tau2)
    sign, lg = out.real_sign(imag_tol=1e-7)
    return LogScaled(lg, sign)


# ---------------------------------------------------------------------------
# Sign calibration and partition function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignVector:
    """c(tau) in {-1, +1}: three equal, one opposite."""

    c: tuple  # ordered as TAUS

    def __post_init__(self):
        if sorted(self.c) not in ([-1, 1, 1, 1], [-1, -1, -1, 1]):
            raise ValueError("need the three-equal-one-opposite pattern")

    def of(self, tau) -> int:
        return self.c[TAUS.index(tuple(tau))]

    @property
    def odd_one_out(self):
        target = -1 if sum(self.c) > 0 else 1
        return TAUS[self.c.index(target)]


def _candidate_signs():
    for i in range(4):
        for s in (1, -1):
            c = [s] * 4
            c[i] = -s
            yield SignVector(tuple(c))


@lru_cache(maxsize=1)
def calibrate_signs(seed: int = 20240801) -> SignVector:
    """Pick the sign pattern that reproduces brute-force Z at L=2, N=3 for
    several random fields and field strengths; cached per process."""
    rng = np.random.default_rng(seed)
    torus = TorusSpec(2, 3)
    instances = []
    for _ in range(3):
        w1 = rng.uniform(0.5, 2.0, 6)
        w2 = rng.uniform(0.5, 2.0, 6)
        for h1, h2 in ((0.0, 0.0), (0.35, 0.0), (0.2, 0.45)):
            instances.append(WeightField(torus, w1, w2, h1, h2))
    survivors = []
    for cand in _candidate_signs():
        ok = True
        for wf in instances:
            z_blocks = _assemble_z(wf, cand)[0]
            z_brute = brute_force_partition(wf)
            if z_blocks.is_zero or abs(z_blocks.value().real / z_brute - 1.0) > 1e-8:
                ok = False
                break
        if ok:
            survivors.append(cand)
    if len(survivors) != 1:
        raise RuntimeError(f"sign calibration found {len(survivors)} consistent patterns")
    return survivors[0]


def _assemble_z(wf: WeightField, signs: SignVector):
    dets = [det_K_tau(wf, tau) for tau in TAUS]
    terms = [LogScaled(d.log, d.unit * signs.of(tau)) for d, tau in zip(dets, TAUS)]
    total = logsum(terms).scale(-math.log(2.0))
    flag = cancellation_level(terms, total) > 6.0
    return total, flag


def partition_function_blocks(wf: WeightField, signs: SignVector = None):
    """log Z as a LogScaled positive real, plus a near-cancellation flag."""
    if signs is None:
        signs = calibrate_signs()
    total, flag = _assemble_z(wf, signs)
    sign, lg = total.real_sign(imag_tol=1e-7)
    if sign <= 0:
        raise ArithmeticError("partition function came out nonpositive; sign calibration broken")
    return LogScaled(lg, 1.0), flag


def finite_free_energy_density(wf: WeightField, signs: SignVector = None) -> float:
    z, _ = partition_function_blocks(wf, signs)
    return z.log / wf.torus.n_vertices


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def _vertices(torus: TorusSpec):
    return [(x, y) for y in range(torus.y_min, torus.y_max + 1)
            for x in range(1, 2 * torus.L + 1)]


def _neighbors(torus: TorusSpec, x: int, y: int):
    L2 = 2 * torus.L
    xm = x - 1 if x > 1 else L2
    xp = x + 1 if x < L2 else 1
    ym = y - 1 if y > torus.y_min else torus.y_max
    yp = y + 1 if y < torus.y_max else torus.y_min
    return ((xm, y), (xp, y), (x, ym), (x, yp))


def brute_force_matchings(wf: WeightField):
    """Yields (weight, matching) over all perfect matchings; exponential cost."""
    torus = wf.torus
    if torus.n_vertices > 36:
        raise ValueError("brute force capped at 36 vertices")
    verts = _vertices(torus)
    order = {v: i for i, v in enumerate(verts)}
    adj = {v: [(u, wf.edge_weight(v, u)) for u in _neighbors(torus, *v)] for v in verts}
    matched = [False] * len(verts)
    pairs = []

    def rec(weight):
        try:
            i = matched.index(False)
        except ValueError:
            yield weight, tuple(pairs)
            return
        v = verts[i]
        matched[i] = True
        for u, wuv in adj[v]:
            j = order[u]
            if not matched[j]:
                matched[j] = True
                pairs.append((v, u))
                yield from rec(weight * wuv)
                pairs.pop()
                matched[j] = False
        matched[i] = False

    yield from rec(1.0)


def brute_force_partition(wf: WeightField) -> float:
    return math.fsum(w for w, _ in brute_force_matchings(wf))


def brute_force_edge_stats(wf: WeightField, edges):
    """(Z, P(edge present) per edge, P(all edges present)) by enumeration."""
    keys = [frozenset(e) for e in edges]
    z = 0.0
    singles = [0.0] * len(keys)
    joint = 0.0
    for w, pairs in brute_force_matchings(wf):
        present = {frozenset(p) for p in pairs}
        z += w
        hit = 0
        for i, k in enumerate(keys):
            if k in present:
                singles[i] += w
                hit += 1
        if hit == len(keys):
            joint += w
    return z, [s / z for s in singles], joint / z


# ---------------------------------------------------------------------------
# Dense oracle matrices
# ---------------------------------------------------------------------------

def K_entry(wf: WeightField, tau, white, black) -> complex:
    """The Kasteleyn matrix element K_tau(white, black); 0 if not adjacent."""
    tau1, tau2 = tau
    (x, y), (xb, yb) = white, black
    torus = wf.torus
    L2, N2 = 2 * torus.L, 2 * torus.N
    if is_black(x, y) or not is_black(xb, yb):
        raise ValueError("need (white, black) vertices in that order")
    if yb == y and (xb - x) % L2 == L2 - 1:
        return wf.w1_at(y) * math.exp(-wf.H2) * (-1.0 if tau1 and x == 1 else 1.0)
    if yb == y and (xb - x) % L2 == 1:
        return wf.w1_at(y) * math.exp(wf.H2) * (-1.0 if tau1 and x == L2 else 1.0)
    if xb == x and (yb - y) % N2 == N2 - 1:
        return 1j * wf.w2_at(yb) * math.exp(wf.H1) * (-1.0 if tau2 and y == torus.y_min else 1.0)
    if xb == x and (yb - y) % N2 == 1:
        return 1j * wf.w2_at(y) * math.exp(-wf.H1) * (-1.0 if tau2 and y == torus.y_max else 1.0)
    return 0.0


def dense_kasteleyn(wf: WeightField, tau):
    """(matrix, whites, blacks) with rows/cols sorted by (y, x)."""
    verts = _vertices(wf.torus)
    whites = [v for v in verts if not is_black(*v)]
    blacks = [v for v in verts if is_black(*v)]
    m = np.zeros((len(whites), len(blacks)), dtype=complex)
    for i, w in enumerate(whites):
        for u in _neighbors(wf.torus, *w):
            j = blacks.index(u)
            m[i, j] = K_entry(wf, tau, w, u)
    return m, whites, blacks


# ---------------------------------------------------------------------------
# Inverse Kasteleyn
# ---------------------------------------------------------------------------

def _pair_sum(scan: BlockScan, i_left: int, i_right: int) -> LogScaled:
    """sum_a <prefix e1, e_a> <suffix e_a, e1> with prefix = first i_left rows
    and suffix starting at row index i_right (0-based, inclusive)."""
    a = scan.prefix[i_left]
    b = scan.suffix[i_right]
    val = a[0, 0] * b[0, 0] + a[1, 0] * b[0, 1]
    return LogScaled.from_parts(scan.prefix_log[i_left] + scan.suffix_log[i_right], val)


def block_inverse_entry(wf: WeightField, theta: float, tau2: int, y: int, yp: int,
                        scan: BlockScan = None) -> complex:
    """(K^{tau2}_theta)^{-1}[y, y']; cofactor formulas for interior rows,
    dense fallback on the boundary."""
    torus = wf.torus
    lo, hi = torus.y_min, torus.y_max
    if scan is None:
        scan = block_scan(wf, theta)
    interior = lo < y < hi and lo < yp < hi
    if not interior:
        m = dense_block_matrix(wf, theta, tau2)
        return complex(np.linalg.inv(m)[wf.idx(y), wf.idx(yp)])
    det = scan.det(tau2)
    if det.is_zero:
        raise ArithmeticError("singular Fourier block; perturb H1")
    if y == yp:
        minor = _pair_sum(scan, wf.idx(y), wf.idx(y) + 1)
    else:
        if y < yp:
            u, v, h1 = y, yp, wf.H1
        else:
            u, v, h1 = yp, y, -wf.H1  # transpose identity K(H1)^T = K(-H1)
        delta = v - u
        w2log_in = float(np.sum(np.log(wf.w2[wf.idx(u):wf.idx(v)])))
        w2log_all = float(np.sum(np.log(wf.w2)))
        term1 = (_pair_sum(scan, wf.idx(u), wf.idx(v) + 1)
                 .scale(-h1 * delta + w2log_in)) * LogScaled(0.0, ipow(delta))
        interior_prod = tridiagonal_minor(wf, theta, u + 1, v - 1)
        term2 = (interior_prod.scale(h1 * (2 * torus.N - delta) + w2log_all - w2log_in)
                 * LogScaled(0.0, -((-1.0) ** tau2) * ipow(-delta)))
        minor = logsum([term1, term2])
    sign = (-1.0) ** (y + yp)
    return sign * (minor / det).value()


def inverse_kasteleyn_entry(wf: WeightField, tau, black, white,
                            scans: dict = None) -> complex:
    """K_tau^{-1}(black, white) via the Fourier sum over the tau1 index set."""
    tau1, tau2 = tau
    (x, y), (xp, yp) = black, white
    L = wf.torus.L
    total = 0.0j
    for k in fourier_indices(L, tau1):
        # the plane-wave basis e^{i pi k x / L} puts the block for index k at
        # angle -pi k / L with this matrix convention (verified against dense)
        theta = -math.pi * k / L
        scan = None
        if scans is not None:
            scan = scans.get(theta)
            if scan is None:
                scan = scans[theta] = block_scan(wf, theta)
        total += (cmath.exp(1j * math.pi * k * (x - xp) / L)
                  * block_inverse_entry(wf, theta, tau2, y, yp, scan=scan))
    return total / L


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------

def _tau_weights(wf: WeightField, signs: SignVector):
    """q_tau = c(tau) det K_tau / (2 Z); sums to 1."""
    dets = [det_K_tau(wf, tau) for tau in TAUS]
    terms = [LogScaled(d.log, d.unit * signs.of(tau)) for d, tau in zip(dets, TAUS)]
    total = logsum(terms)
    return [0.0 if t.is_zero else (t / total).value().real for t in terms]


def edge_probability(wf: WeightField, black, white, signs: SignVector = None) -> float:
    """P(edge {black, white} is occupied)."""
    if signs is None:
        signs = calibrate_signs()
    q = _tau_weights(wf, signs)
    scans_by_tau1 = {}
    total = 0.0j
    for qt, tau in zip(q, TAUS):
        if qt == 0.0:  # singular sector carries no weight
            continue
        scans = scans_by_tau1.setdefault(tau[0], {})
        kk = K_entry(wf, tau, white, black)
        total += qt * kk * inverse_kasteleyn_entry(wf, tau, black, white, scans=scans)
    return total.real


def finite_covariance(wf: WeightField, edge_a, edge_b, signs: SignVector = None) -> float:
    """Cov(1_{edge_a}, 1_{edge_b}) for two edges given as (black, white) pairs."""
    if signs is None:
        signs = calibrate_signs()
    q = _tau_weights(wf, signs)
    b1, w1v = edge_a
    b2, w2v = edge_b
    scans_by_tau1 = {}
    joint = 0.0j
    p1 = 0.0j
    p2 = 0.0j
    for qt, tau in zip(q, TAUS):
        if qt == 0.0:  # singular sector carries no weight
            continue
        scans = scans_by_tau1.setdefault(tau[0], {})
        k1 = K_entry(wf, tau, w1v, b1)
        k2 = K_entry(wf, tau, w2v, b2)
        i11 = inverse_kasteleyn_entry(wf, tau, b1, w1v, scans=scans)
        i22 = inverse_kasteleyn_entry(wf, tau, b2, w2v, scans=scans)
        i12 = inverse_kasteleyn_entry(wf, tau, b1, w2v, scans=scans)
        i21 = inverse_kasteleyn_entry(wf, tau, b2, w1v, scans=scans)
        joint += qt * k1 * k2 * (i11 * i22 - i12 * i21)
        p1 += qt * k1 * i11
        p2 += qt * k2 * i22
    return (joint - p1 * p2).real
