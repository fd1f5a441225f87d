"""Moment sequences -> Lanczos products b_n c_n.

Two independent routes are kept deliberately separate so that each can verify
the other on every dataset:

* determinant route: bc_n = K_n K_{n-2} / K_{n-1}^2 with K_n the (n+1)x(n+1)
  Hankel determinant det[mu_{i+j}] and K_{-1} = 1.  For exact scalars all
  leading principal minors fall out of one fraction-free (Bareiss)
  elimination; for big floats each minor gets its own partially pivoted
  elimination (pivoting would scramble the minor structure of a single pass).

* recursive route: the classical moment-to-recurrence table
  sigma_{k,l} = sigma_{k-1,l+1} - a_{k-1} sigma_{k-1,l} - bc_{k-1} sigma_{k-2,l}
  seeded with sigma_{0,l} = mu_l, from which a_k and bc_k are read off.  This
  route also produces the diagonal coefficients a_n, which the determinant
  identity does not.

A vanishing K_n means the underlying (complex, possibly indefinite) measure
supports fewer recursion steps than requested; both routes raise
:class:`MomentDegeneracyError` at the first such index with the valid prefix
attached, rather than dividing through garbage.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import gmpy2

from .moments import MomentSequence
from .scalars import (
    BIG,
    DEFAULT_BITS,
    EXACT,
    ExactComplex,
    abs2,
    is_zero,
    make_complex,
    working_precision,
)


class MomentDegeneracyError(RuntimeError):
    """K_index = 0: the moment sequence degenerates at that recursion depth."""

    def __init__(self, index: int, partial_bc: list):
        self.index = index
        self.partial_bc = partial_bc
        super().__init__(
            f"Hankel determinant K_{index} vanishes; bc defined only below n={index}"
        )


class PrecisionLadderError(RuntimeError):
    """The doubling-precision ladder hit its cap before results stabilized."""


@dataclass
class HankelWorkspace:
    """Determinant-route state: minors K_{-1}..K_N alongside the bc they imply."""

    moments: MomentSequence
    K: List[object]  # K[i] holds K_{i-1}, so K[0] = K_{-1} = 1
    bc: List[object]  # bc[n] = b_n c_n for n >= 1; bc[0] is a kind-zero
    bits: Optional[int]

    def K_at(self, n: int):
        return self.K[n + 1]


def _ctx(kind: str, bits: Optional[int]):
    return working_precision(bits or DEFAULT_BITS) if kind == BIG else nullcontext()


def _hankel_matrix(m: MomentSequence, N: int):
    if len(m.mu) < 2 * N + 1:
        raise ValueError(f"need moments mu_0..mu_{2*N}, got {len(m.mu)} entries")
    return [[m.mu[i + j] for j in range(N + 1)] for i in range(N + 1)]


def _bareiss_minors(M) -> Tuple[list, Optional[int]]:
    """All leading principal minors of an exact matrix by fraction-free elimination.

    Returns (minors, first_zero_index); elimination stops at a zero pivot,
    which for a Hankel matrix is exactly the degeneracy condition.
    """
    n = len(M)
    minors = []
    prev = ExactComplex(1)
    for k in range(n):
        piv = M[k][k]
        minors.append(piv)
        if k == n - 1 or not piv:
            return minors, (k if not piv else None)
        for i in range(k + 1, n):
            Mi = M[i]
            Mk = M[k]
            mik = Mi[k]
            for j in range(k + 1, n):
                Mi[j] = (piv * Mi[j] - mik * Mk[j]) / prev
        prev = piv
    return minors, None


def _pivoted_det(M):
    """Determinant of an mpc matrix by partially pivoted elimination."""
    n = len(M)
    M = [row[:] for row in M]
    det = gmpy2.mpc(1)
    for k in range(n):
        piv_row = max(range(k, n), key=lambda r: abs2(M[r][k]))
        if is_zero(M[piv_row][k]):
            return gmpy2.mpc(0)
        if piv_row != k:
            M[k], M[piv_row] = M[piv_row], M[k]
            det = -det
        piv = M[k][k]
        det *= piv
        inv = 1 / piv
        for i in range(k + 1, n):
            f = M[i][k] * inv
            if is_zero(f):
                continue
            Mi = M[i]
            Mk = M[k]
            for j in range(k + 1, n):
                Mi[j] -= f * Mk[j]
    return det


def hankel_workspace(m: MomentSequence, N: int) -> HankelWorkspace:
    """Compute K_{-1}..K_N and the bc they determine (determinant route)."""
    kind = m.kind
    with _ctx(kind, m.bits):
        one = make_complex(kind, 1)
        if kind == EXACT:
            minors, zero_at = _bareiss_minors(_hankel_matrix(m, N))
        else:
            mat = _hankel_matrix(m, N)
            minors = []
            zero_at = None
            for n in range(N + 1):
                sub = [row[: n + 1] for row in mat[: n + 1]]
                Kn = _pivoted_det(sub)
                minors.append(Kn)
                if is_zero(Kn):
                    zero_at = n
                    break
        K = [one] + minors  # prepend K_{-1} = 1
        bc = [make_complex(kind, 0)]
        top = zero_at if zero_at is not None else N + 1
        for n in range(1, top):
            # bc_n = K_n K_{n-2} / K_{n-1}^2  (lists are offset by one)
            bc.append(K[n + 1] * K[n - 1] / (K[n] * K[n]))
        if zero_at is not None:
            raise MomentDegeneracyError(zero_at, bc)
        return HankelWorkspace(moments=m, K=K, bc=bc, bits=m.bits)


def from_moments_det(m: MomentSequence, N: int) -> list:
    """bc_1..bc_N from Hankel determinants; bc[0] is a placeholder zero."""
    return hankel_workspace(m, N).bc


def from_moments_recursive(m: MomentSequence, N: int) -> Tuple[list, list]:
    """(bc, a) from the sigma-table recurrence; a has entries a_0..a_{N-1}."""
    if len(m.mu) < 2 * N + 1:
        raise ValueError(f"need moments mu_0..mu_{2*N}, got {len(m.mu)} entries")
    kind = m.kind
    with _ctx(kind, m.bits):
        zero = make_complex(kind, 0)
        mu = list(m.mu)
        L = 2 * N + 1
        sig_prev = [zero] * L  # sigma_{-1, l} = 0
        sig = mu[:]  # sigma_{0, l}
        if is_zero(sig[0]):
            raise MomentDegeneracyError(0, [zero])
        a = [mu[1] / mu[0]]
        bc = [zero]
        w_prev = sig[0]
        for k in range(1, N + 1):
            g_prev = bc[k - 1]
            a_prev = a[k - 1]
            new = [zero] * L
            for l in range(k, 2 * N - k + 1):
                v = sig[l + 1] - a_prev * sig[l]
                if k >= 2 and not is_zero(g_prev):
                    v = v - g_prev * sig_prev[l]
                new[l] = v
            w_k = new[k]
            if is_zero(w_k):
                raise MomentDegeneracyError(k, bc)
            bc.append(w_k / w_prev)
            if k < N:
                a.append(new[k + 1] / new[k] - sig[k] / sig[k - 1])
            sig_prev, sig = sig, new
            w_prev = w_k
        return bc, a


# ---------------------------------------------------------------------------
# file interface


def load_moments_csv(path: str, bits: int = DEFAULT_BITS, model: str = "tabulated") -> MomentSequence:
    """Read a moments.csv (columns n, mu_re, mu_im) into a big-float sequence.

    The decimal strings are converted exactly at the requested precision; rows
    must be a contiguous 0..N block.
    """
    import csv as _csv

    entries = []
    with open(path) as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames is None or not {"n", "mu_re", "mu_im"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns n, mu_re, mu_im")
        for row in reader:
            entries.append((int(row["n"]), row["mu_re"], row["mu_im"]))
    entries.sort()
    if not entries or [n for n, _, _ in entries] != list(range(len(entries))):
        raise ValueError(f"{path}: moment rows must cover n = 0..N without gaps")
    with working_precision(bits):
        mu = [gmpy2.mpc(gmpy2.mpfr(re), gmpy2.mpfr(im)) for _, re, im in entries]
    return MomentSequence(mu=mu, model=model, kind=BIG, bits=bits, meta={"source": path})


# ---------------------------------------------------------------------------
# adaptive precision ladder


@dataclass
class AdaptiveResult:
    bc: list
    bits_used: Optional[int]  # None for a single exact pass
    rungs: List[int] = field(default_factory=list)
    route: str = "recursive"


def adaptive_precision_run(
    m_generator: Callable[[int], MomentSequence],
    N: int,
    target_digits: int = 10,
    start_bits: int = DEFAULT_BITS,
    cap_bits: int = 1 << 20,
    route: str = "recursive",
) -> AdaptiveResult:
    """Double the working precision until bc_1..bc_N are ladder-stable.

    `m_generator(bits)` must re-emit the same moment sequence at any requested
    precision.  Exact-rational generators short-circuit to a single pass.
    Raises :class:`PrecisionLadderError` if the cap is hit first.
    """

    def compute(mseq):
        if route == "det":
            return from_moments_det(mseq, N)
        if route == "recursive":
            return from_moments_recursive(mseq, N)[0]
        raise ValueError(f"unknown route {route!r}")

    first = m_generator(start_bits)
    if first.kind == EXACT:
        return AdaptiveResult(bc=compute(first), bits_used=None, rungs=[], route=route)

    bits = start_bits
    prev = compute(first)
    rungs = [bits]
    while True:
        if 2 * bits > cap_bits:
            raise PrecisionLadderError(
                f"no {target_digits}-digit stability below the {cap_bits}-bit cap"
            )
        bits *= 2
        rungs.append(bits)
        cur = compute(m_generator(bits))
        with working_precision(bits):
            scale = max(abs(c) for c in cur[1:]) if N >= 1 else gmpy2.mpfr(1)
            tol = gmpy2.mpfr(10) ** (-target_digits)
            floor = scale * tol
            stable = all(
                abs(cur[n] - prev[n]) <= tol * max(abs(cur[n]), floor)
                for n in range(1, N + 1)
            )
        if stable:
            return AdaptiveResult(bc=cur, bits_used=bits, rungs=rungs, route=route)
        prev = cur
