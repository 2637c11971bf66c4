"""Numba hot loops for renormalized 2x2 matrix products.

The running product is right-multiplied by one matrix per step and divided
by the cheap entrywise scale sum(|Re|)+sum(|Im|); the factored-out logs are
returned so callers can reconstruct the true norm exactly.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def prod_chunk_real(m, a, b, c, d):
    """Absorb matrices [[a_i, b_i], [c_i, d_i]] into m (float64[4]); returns
    the accumulated log of the factored-out scales."""
    m00, m01, m10, m11 = m[0], m[1], m[2], m[3]
    dlog = 0.0
    for i in range(a.shape[0]):
        ai, bi, ci, di = a[i], b[i], c[i], d[i]
        n00 = m00 * ai + m01 * ci
        n01 = m00 * bi + m01 * di
        n10 = m10 * ai + m11 * ci
        n11 = m10 * bi + m11 * di
        s = abs(n00) + abs(n01) + abs(n10) + abs(n11)
        inv = 1.0 / s
        m00 = n00 * inv
        m01 = n01 * inv
        m10 = n10 * inv
        m11 = n11 * inv
        dlog += np.log(s)
    m[0], m[1], m[2], m[3] = m00, m01, m10, m11
    return dlog


@njit(cache=True)
def prod_chunk_complex(m, a, b, c, d):
    """Complex version of prod_chunk_real; m is complex128[4]."""
    m00, m01, m10, m11 = m[0], m[1], m[2], m[3]
    dlog = 0.0
    for i in range(a.shape[0]):
        ai, bi, ci, di = a[i], b[i], c[i], d[i]
        n00 = m00 * ai + m01 * ci
        n01 = m00 * bi + m01 * di
        n10 = m10 * ai + m11 * ci
        n11 = m10 * bi + m11 * di
        s = (abs(n00.real) + abs(n00.imag) + abs(n01.real) + abs(n01.imag)
             + abs(n10.real) + abs(n10.imag) + abs(n11.real) + abs(n11.imag))
        inv = 1.0 / s
        m00 = n00 * inv
        m01 = n01 * inv
        m10 = n10 * inv
        m11 = n11 * inv
        dlog += np.log(s)
    m[0], m[1], m[2], m[3] = m00, m01, m10, m11
    return dlog


@njit(cache=True)
def boundary_chunk_real(m00, m01, m10, m11, om, w1, w2, adjoint):
    """Advance per-node products by the chunk of rows (w1, w2).

    Forward rows multiply by [[om*w1_i, w2_i^2], [1, 0]]; adjoint rows by
    the transposed form [[om*w1_i, 1], [w2_i^2, 0]].  om is per-node.
    Also accumulates, per node, the log of the pairwise contraction factors
    1/(1+q) with q = 2*om^2*w1_1*w1_2/alpha, alpha = w2^2 of the first
    (forward) or second (adjoint) row of each pair; rows here are taken in
    consecutive disjoint pairs starting from an even global offset.
    """
    nn = m00.shape[0]
    nsteps = w1.shape[0]
    logtau = np.zeros(nn)
    for i in range(nsteps):
        w1i = w1[i]
        bi = w2[i] * w2[i]
        for j in range(nn):
            ai = om[j] * w1i
            if adjoint:
                n00 = m00[j] * ai + m01[j] * bi
                n01 = m00[j]
                n10 = m10[j] * ai + m11[j] * bi
                n11 = m10[j]
            else:
                n00 = m00[j] * ai + m01[j]
                n01 = m00[j] * bi
                n10 = m10[j] * ai + m11[j]
                n11 = m10[j] * bi
            s = abs(n00) + abs(n01) + abs(n10) + abs(n11)
            inv = 1.0 / s
            m00[j] = n00 * inv
            m01[j] = n01 * inv
            m10[j] = n10 * inv
            m11[j] = n11 * inv
    # pairwise contraction factors over disjoint pairs (0,1), (2,3), ...
    for i in range(0, nsteps - 1, 2):
        if adjoint:
            alpha = w2[i + 1] * w2[i + 1]
        else:
            alpha = w2[i] * w2[i]
        p = 2.0 * w1[i] * w1[i + 1] / alpha
        for j in range(nn):
            q = p * om[j] * om[j]
            logtau[j] += np.log(1.0 + q)
    return logtau


@njit(cache=True)
def interior_chunk_real(m00, m01, m10, m11, om, w1, w2):
    """Forward rows only, per-node, returning per-node accumulated log scale."""
    nn = m00.shape[0]
    dlog = np.zeros(nn)
    for i in range(w1.shape[0]):
        w1i = w1[i]
        bi = w2[i] * w2[i]
        for j in range(nn):
            ai = om[j] * w1i
            n00 = m00[j] * ai + m01[j]
            n01 = m00[j] * bi
            n10 = m10[j] * ai + m11[j]
            n11 = m10[j] * bi
            s = abs(n00) + abs(n01) + abs(n10) + abs(n11)
            inv = 1.0 / s
            m00[j] = n00 * inv
            m01[j] = n01 * inv
            m10[j] = n10 * inv
            m11[j] = n11 * inv
            dlog[j] += np.log(s)
    return dlog
