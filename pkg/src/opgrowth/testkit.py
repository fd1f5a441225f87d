"""Independent oracles used by the test suite and the acceptance gate.

Everything here recomputes quantities through a *different* route than the
production modules: dense matrices on short periodic chains instead of sparse
thermodynamic-limit orbits, permutation-expansion determinants instead of
elimination, high-order finite differences instead of series recurrences.
Keep it that way -- these functions exist to catch bugs in the fast paths,
so they must not share code with them.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

import numpy as np

from .lindblad import IsingParams
from .scalars import ExactComplex

# ---------------------------------------------------------------------------
# dense periodic-chain Lindbladian (float64)


def dense_site_matrices(L: int):
    """Per-site X and Z as dense 2^L x 2^L arrays (bit i of the index = site i)."""
    dim = 1 << L
    idx = np.arange(dim)
    xs, zs = [], []
    for i in range(L):
        flip = idx ^ (1 << i)
        X = np.zeros((dim, dim))
        X[flip, idx] = 1.0
        z = 1.0 - 2.0 * ((idx >> i) & 1)
        zs.append(z)
        xs.append(X)
    return xs, zs


def dense_ising_moments(params: IsingParams, L: int, n_max: int) -> list:
    """Moments (O|L^n|O)/L for O = sum_i X_i on a periodic L-site chain.

    Valid against the thermodynamic-limit computation while the operator light
    cone (n+1 sites after n applications) fits without wrapping, i.e. for
    n <= L - 2.
    """
    dim = 1 << L
    xs, zs = dense_site_matrices(L)
    H = np.zeros((dim, dim))
    jxx, hz, hx, eta = (float(params.jxx), float(params.hz), float(params.hx), float(params.eta))
    for i in range(L):
        j = (i + 1) % L
        H += jxx * (xs[i] @ xs[j])
        H += hz * np.diag(zs[i])
        H += hx * xs[i]
    O0 = sum(xs)
    # dephasing: L_d(O)[s,t] = 2i*eta*hamming(s,t) * O[s,t]
    idx = np.arange(dim)
    ham = np.zeros((dim, dim))
    xor = idx[:, None] ^ idx[None, :]
    for b in range(L):
        ham += (xor >> b) & 1
    mu = []
    On = O0.astype(complex)
    norm = dim * L
    for n in range(n_max + 1):
        mu.append(np.sum(np.conj(O0) * On) / norm)
        if n == n_max:
            break
        On = (H @ On - On @ H) + 2j * eta * ham * On
    return mu


def dense_orbit_coefficient(L: int, op_matrix, pauli_matrix) -> complex:
    """Coefficient of a given Pauli-string matrix inside a dense operator."""
    dim = 1 << L
    return complex(np.sum(np.conj(pauli_matrix) * op_matrix) / dim)


def dense_apply(params: IsingParams, L: int, op_matrix):
    """One application of the dense Lindbladian (same convention as production)."""
    dim = 1 << L
    xs, zs = dense_site_matrices(L)
    H = np.zeros((dim, dim))
    for i in range(L):
        j = (i + 1) % L
        H += float(params.jxx) * (xs[i] @ xs[j])
        H += float(params.hz) * np.diag(zs[i])
        H += float(params.hx) * xs[i]
    idx = np.arange(dim)
    xor = idx[:, None] ^ idx[None, :]
    ham = np.zeros((dim, dim))
    for b in range(L):
        ham += (xor >> b) & 1
    O = op_matrix.astype(complex)
    return (H @ O - O @ H) + 2j * float(params.eta) * ham * O


# ---------------------------------------------------------------------------
# dense periodic-chain Lindbladian (exact rationals, small L only)


def _ec(x) -> ExactComplex:
    return x if isinstance(x, ExactComplex) else ExactComplex(Fraction(x))


def _ec_matmul(A, B):
    n = len(A)
    zero = ExactComplex(0)
    out = [[zero] * n for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        row = out[i]
        for k in range(n):
            a = Ai[k]
            if not a:
                continue
            Bk = B[k]
            for j in range(n):
                b = Bk[j]
                if b:
                    row[j] = row[j] + a * b
    return out


def exact_ising_moments(params: IsingParams, L: int, n_max: int) -> list:
    """Exact-rational version of :func:`dense_ising_moments` (L <= 6 is sane)."""
    dim = 1 << L
    zero = ExactComplex(0)

    def mat():
        return [[zero] * dim for _ in range(dim)]

    xs = []
    for i in range(L):
        X = mat()
        for s in range(dim):
            X[s ^ (1 << i)][s] = ExactComplex(1)
        xs.append(X)
    H = mat()
    for i in range(L):
        j = (i + 1) % L
        XX = _ec_matmul(xs[i], xs[j])
        for s in range(dim):
            for t in range(dim):
                if XX[s][t]:
                    H[s][t] = H[s][t] + _ec(params.jxx) * XX[s][t]
            H[s][s] = H[s][s] + _ec(params.hz) * ExactComplex(1 - 2 * ((s >> i) & 1))
            H[s][s ^ (1 << i)] = H[s][s ^ (1 << i)] + _ec(params.hx)
    O0 = mat()
    for i in range(L):
        for s in range(dim):
            O0[s ^ (1 << i)][s] = O0[s ^ (1 << i)][s] + ExactComplex(1)

    two_i_eta = ExactComplex(0, 2 * Fraction(params.eta))
    mu = []
    On = [row[:] for row in O0]
    norm = Fraction(dim * L)
    for n in range(n_max + 1):
        acc = ExactComplex(0)
        for s in range(dim):
            for t in range(dim):
                if O0[s][t] and On[s][t]:
                    acc = acc + O0[s][t].conjugate() * On[s][t]
        mu.append(ExactComplex(acc.re / norm, acc.im / norm))
        if n == n_max:
            break
        HO = _ec_matmul(H, On)
        OH = _ec_matmul(On, H)
        nxt = mat()
        for s in range(dim):
            for t in range(dim):
                v = HO[s][t] - OH[s][t]
                if params.eta and On[s][t]:
                    v = v + two_i_eta * ExactComplex((s ^ t).bit_count()) * On[s][t]
                nxt[s][t] = v
        On = nxt
    return mu


# ---------------------------------------------------------------------------
# misc oracles


def permutation_determinant(M) -> object:
    """Determinant by direct permutation expansion; fine up to ~7x7."""
    n = len(M)
    total = None
    for perm in permutations(range(n)):
        sign = 1
        seen = [False] * n
        for i in range(n):
            if seen[i]:
                continue
            j = i
            length = 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
        term = M[0][perm[0]]
        for i in range(1, n):
            term = term * M[i][perm[i]]
        if sign < 0:
            term = -term
        total = term if total is None else total + term
    return total


def fornberg_weights(nodes, m: int):
    """Exact finite-difference weights at x=0 for derivatives 0..m on integer nodes.

    Returns W with W[j][k] = weight of f(nodes[j]) in the k-th derivative.
    Classic one-pass recursion over grid points, done in rationals.
    """
    n = len(nodes)
    nodes = [Fraction(x) for x in nodes]
    W = [[Fraction(0)] * (m + 1) for _ in range(n)]
    W[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = nodes[0]
    for i in range(1, n):
        mn = min(i, m)
        c2 = Fraction(1)
        c5 = c4
        c4 = nodes[i]
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    W[i][k] = c1 * (k * W[i - 1][k - 1] - c5 * W[i - 1][k]) / c2
                W[i][0] = -c1 * c5 * W[i - 1][0] / c2
            for k in range(mn, 0, -1):
                W[j][k] = (c4 * W[j][k] - k * W[j][k - 1]) / c3
            W[j][0] = c4 * W[j][0] / c3
        c1 = c2
    return W


def finite_difference_derivatives(f, n_max: int, bits: int = 768, h_exp: int = -20) -> list:
    """d^n f / dt^n at t=0 for n <= n_max, by a wide centered stencil at high precision.

    f maps an mpfr to an mpfr/mpc.  Step h = 2**h_exp keeps the weights exact
    dyadics; the stencil order is padded well past n_max so truncation error is
    negligible next to the (bits - n*|h_exp|) surviving digits.
    """
    import gmpy2

    from .scalars import working_precision

    half = n_max // 2 + 5
    nodes = list(range(-half, half + 1))
    W = fornberg_weights(nodes, n_max)
    with working_precision(bits):
        h = gmpy2.mpfr(2) ** h_exp
        samples = [f(j * h) for j in nodes]
        derivs = []
        for k in range(n_max + 1):
            acc = gmpy2.mpfr(0)
            for j, node in enumerate(nodes):
                w = W[j][k]
                if w:
                    acc += (gmpy2.mpfr(w.numerator) / w.denominator) * samples[j]
            derivs.append(acc / h**k)
    return derivs
