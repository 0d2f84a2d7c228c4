"""Compiled inner loops for the scattering solver and its oracle.

Small complex matrices (n <= 4) are handled with explicit loops; calling
BLAS per sector would cost more than the arithmetic itself.
"""
import cmath

import numpy as np
from scipy.special import bernoulli, factorial

try:
    import numba

    jit = numba.njit(cache=True, nogil=True, inline="always")
except ImportError:  # pragma: no cover - pure python fallback is very slow
    def jit(f):
        return f


def _dtn_series(degree=15):
    # sqrt(z) coth(sqrt z) and sqrt(z) csch(sqrt z) as power series in z
    n = np.arange(degree + 1)
    b = bernoulli(2 * degree)[2 * n]
    denom = factorial(2 * n, exact=False)
    coth = 4.0**n * b / denom
    csch = (2.0 - 4.0**n) * b / denom
    return coth.astype(complex), csch.astype(complex)


COTH_SERIES, CSCH_SERIES = _dtn_series()


@jit
def _matmul(a, b, out):
    n = a.shape[0]
    m = b.shape[1]
    for i in range(n):
        for j in range(m):
            s = 0j
            for k in range(a.shape[1]):
                s += a[i, k] * b[k, j]
            out[i, j] = s


@jit
def _solve(a, b, out, lu):
    """out = a^-1 b by Gaussian elimination with partial pivoting."""
    n = a.shape[0]
    m = b.shape[1]
    lu[:, :] = a
    out[:, :] = b
    for k in range(n):
        p = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            v = abs(lu[i, k])
            if v > best:
                best = v
                p = i
        if p != k:
            for j in range(n):
                t = lu[k, j]
                lu[k, j] = lu[p, j]
                lu[p, j] = t
            for j in range(m):
                t = out[k, j]
                out[k, j] = out[p, j]
                out[p, j] = t
        piv = lu[k, k]
        for i in range(k + 1, n):
            f = lu[i, k] / piv
            if f != 0:
                for j in range(k + 1, n):
                    lu[i, j] -= f * lu[k, j]
                for j in range(m):
                    out[i, j] -= f * out[k, j]
    for k in range(n - 1, -1, -1):
        for j in range(m):
            s = out[k, j]
            for i in range(k + 1, n):
                s -= lu[k, i] * out[i, j]
            out[k, j] = s / lu[k, k]


@jit
def _series_blocks(z, z2, z3, coef, blk, k):
    n = z.shape[0]
    c0 = coef[4 * k]
    c1 = coef[4 * k + 1]
    c2 = coef[4 * k + 2]
    c3 = coef[4 * k + 3]
    for i in range(n):
        for j in range(n):
            blk[i, j] = c1 * z[i, j] + c2 * z2[i, j] + c3 * z3[i, j]
        blk[i, i] += c0


@jit
def _series(z, z2, z3, z4, coef, out, blk, tmp):
    # Paterson-Stockmeyer with blocks of four terms, degree 15
    _series_blocks(z, z2, z3, coef, out, 3)
    for k in range(2, -1, -1):
        _matmul(z4, out, tmp)
        _series_blocks(z, z2, z3, coef, blk, k)
        n = z.shape[0]
        for i in range(n):
            for j in range(n):
                out[i, j] = tmp[i, j] + blk[i, j]


@jit
def propagate(w, h, y, p, coth_c, csch_c):
    """Carry the log-derivative ``y`` and amplitude map ``p`` through sectors.

    ``w[i]`` is the constant matrix of sector i (phi'' = w phi) in the order
    of propagation; each sector has length ``h``.  Propagation runs towards
    decreasing x in the frame where ``y`` was set up, i.e. for a sector [a, b]
    with known ``phi'(b) = y phi(b)`` the new ``y`` is the log-derivative at a
    and ``p`` is right-multiplied by the map phi(a) -> phi(b).
    Returns the number of sector maps that needed scaling and doubling.
    """
    nsec = w.shape[0]
    n = w.shape[1]
    z = np.empty((n, n), np.complex128)
    z2 = np.empty((n, n), np.complex128)
    z3 = np.empty((n, n), np.complex128)
    z4 = np.empty((n, n), np.complex128)
    y1 = np.empty((n, n), np.complex128)
    y2 = np.empty((n, n), np.complex128)
    blk = np.empty((n, n), np.complex128)
    tmp = np.empty((n, n), np.complex128)
    s = np.empty((n, n), np.complex128)
    g = np.empty((n, n), np.complex128)
    lu = np.empty((n, n), np.complex128)
    doubled = 0
    for isec in range(nsec):
        nrm = 0.0
        for i in range(n):
            r = 0.0
            for j in range(n):
                v = w[isec, i, j]
                r += abs(v.real) + abs(v.imag)
            if r > nrm:
                nrm = r
        nrm *= h * h
        nd = 0
        while nrm > 1.0:
            nrm *= 0.25
            nd += 1
        if nd > 0:
            doubled += 1
        h0 = h / 2.0**nd
        for i in range(n):
            for j in range(n):
                z[i, j] = w[isec, i, j] * (h0 * h0)
        _matmul(z, z, z2)
        _matmul(z2, z, z3)
        _matmul(z2, z2, z4)
        _series(z, z2, z3, z4, coth_c, y1, blk, tmp)
        _series(z, z2, z3, z4, csch_c, y2, blk, tmp)
        for i in range(n):
            for j in range(n):
                y1[i, j] /= h0
                y2[i, j] /= h0
        for _ in range(nd):
            # sector of twice the length: y2' = y2 (2 y1)^-1 y2, y1' = y1 - y2'
            for i in range(n):
                for j in range(n):
                    s[i, j] = 2.0 * y1[i, j]
            _solve(s, y2, g, lu)
            _matmul(y2, g, tmp)
            for i in range(n):
                for j in range(n):
                    y1[i, j] -= tmp[i, j]
                    y2[i, j] = tmp[i, j]
        # phi(b) = (y1 - y)^-1 y2 phi(a);  y(a) = -y1 + y2 (y1 - y)^-1 y2
        for i in range(n):
            for j in range(n):
                s[i, j] = y1[i, j] - y[i, j]
        _solve(s, y2, g, lu)
        _matmul(y2, g, tmp)
        for i in range(n):
            for j in range(n):
                y[i, j] = tmp[i, j] - y1[i, j]
        _matmul(p, g, tmp)
        for i in range(n):
            for j in range(n):
                p[i, j] = tmp[i, j]
    return doubled


@jit
def layered_reflection(ksq, d, k_in, k_out):
    """Reflection and transmission amplitudes of a stack of constant layers.

    ``ksq[j]`` is the squared local wavenumber of layer j and ``d[j]`` its
    thickness; ``k_in``/``k_out`` are the semi-infinite media.  Amplitudes are
    referenced at the first and last interfaces.  Uses the reflection
    recursion from the far side, which stays bounded for evanescent layers.
    """
    nl = ksq.shape[0]
    k = np.empty(nl + 2, np.complex128)
    k[0] = k_in
    k[nl + 1] = k_out
    for j in range(nl):
        kj = cmath.sqrt(ksq[j])
        if kj.imag < 0 or (kj.imag == 0 and kj.real < 0):
            kj = -kj
        k[j + 1] = kj
    gam = np.zeros(nl + 2, np.complex128)
    ph = np.ones(nl + 2, np.complex128)  # exp(2 i k d) of each layer
    for j in range(nl):
        ph[j + 1] = cmath.exp(2j * k[j + 1] * d[j])
    for j in range(nl, -1, -1):
        rho = (k[j] - k[j + 1]) / (k[j] + k[j + 1])
        e = gam[j + 1] * ph[j + 1]
        gam[j] = (rho + e) / (1.0 + rho * e)
    t = 1.0 + 0j
    for j in range(nl + 1):
        half = cmath.exp(1j * k[j + 1] * d[j]) if j < nl else 1.0 + 0j
        t *= (1.0 + gam[j]) * half / (1.0 + gam[j + 1] * ph[j + 1])
    return gam[0], t
