"""Bi-orthonormal Lanczos recursion for the (non-Hermitian) open-system generator.

The two coupled Krylov chains

    |A_n) = (L - a_{n-1})|O_{n-1}) - c_{n-1}|O_{n-2}),   |O_n) = |A_n)/b_n
    |B_n) = (L_adj - a*_{n-1})|Ot_{n-1}) - b_{n-1}|Ot_{n-2}),  (Ot_n| = (B_n|/c_n

with a_n = (Ot_n|L|O_n), b_n = sqrt((A_n|A_n)), c_n = (B_n|A_n)/b_n put the
generator into tridiagonal form with diagonal a_n and off-diagonals b_n, c_n.
At eta = 0 the chains coincide (b_n = c_n, a_n = 0) and the scheme reduces to
the ordinary Lanczos recursion, which the implementation exploits by running a
single chain.

Big-float operators run the normalized recursion verbatim.  Exact-rational
operators run the mathematically identical *monic* rescaling

    V_n = (L - a_{n-1}) V_{n-1} - (b c)_{n-1} V_{n-2}      (same for W with L_adj)

which needs no square roots, so a_n and the products bc_n = w_n / w_{n-1}
(w_n = (W_n|V_n)) come out exactly; b_n = sqrt((V_n|V_n)/(V_{n-1}|V_{n-1}))
and c_n = bc_n / b_n are then reported as 160-bit floats.

No re-bi-orthogonalization happens by default; drift is monitored through the
Gram-matrix defect on validation runs (`keep_basis=True`).
"""

from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import gmpy2

from . import lindblad, opspace
from .lindblad import LindbladianSpec
from .opspace import TIOperator, add_scaled, inner, norm2
from .scalars import BIG, EXACT, conj, is_zero, make_complex, working_precision

REPORT_BITS = 160  # precision of derived b, c floats in exact mode

BREAKDOWN_TOL_BIG = 1e-20


@dataclass
class LanczosData:
    """Coefficients of one bi-Lanczos run.

    Index convention: ``a[n]`` is a_n for 0 <= n < n_done; ``b``, ``c`` and
    ``bc`` hold entries 1..n_done with a zero at slot 0 (the b_0 = c_0 = 0
    convention that starts the recursion).  In exact mode ``a`` and ``bc`` are
    exact scalars while ``b`` and ``c`` are 160-bit floats derived from them.
    """

    a: List[object]
    b: List[object]
    c: List[object]
    bc: List[object]
    n_max: int
    n_done: int
    kind: str
    bits: Optional[int]
    prune_rel: float
    breakdown: Optional[Tuple[int, str]] = None
    basis: Optional[Tuple[list, list]] = None  # (right chain, left chain)

    def sqrt_bc_abs(self) -> List[float]:
        """|sqrt(b_n c_n)| for n >= 1 (principal branch magnitude)."""
        out = [0.0]
        for n in range(1, self.n_done + 1):
            out.append(math.sqrt(abs(complex(self.bc[n]))))
        return out


def _check_normalized(o0: TIOperator):
    nn = norm2(o0)
    if o0.kind == EXACT:
        if nn != 1:
            raise ValueError(f"initial operator density must satisfy (O|O)=1, got {nn}")
    elif abs(float(nn) - 1.0) > 1e-10:
        raise ValueError(f"initial operator density must satisfy (O|O)=1, got {float(nn)}")


def bilanczos_run(
    spec: LindbladianSpec,
    o0: TIOperator,
    n_max: int,
    tol: Optional[float] = None,
    prune_rel: float = opspace.PRUNE_REL_DEFAULT,
    rebiorthogonalize: bool = False,
    keep_basis: bool = False,
) -> LanczosData:
    """Run the bi-orthonormal Lanczos recursion for n_max steps (or to breakdown)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    _check_normalized(o0)
    if o0.kind == EXACT:
        return _run_exact_monic(spec, o0, n_max, keep_basis)
    return _run_big_normalized(
        spec, o0, n_max,
        tol=BREAKDOWN_TOL_BIG if tol is None else tol,
        prune_rel=prune_rel,
        rebiorthogonalize=rebiorthogonalize,
        keep_basis=keep_basis,
    )


def _run_big_normalized(spec, o0, n_max, tol, prune_rel, rebiorthogonalize, keep_basis):
    bits = o0.bits
    closed = spec.eta == 0
    with working_precision(bits):
        zero_op = TIOperator.zero(BIG, bits)
        O_prev, O_cur = zero_op, o0
        T_prev, T_cur = zero_op, o0  # the tilde chain
        a: list = []
        mzero = gmpy2.mpc(0)
        b = [gmpy2.mpfr(0)]
        c = [mzero]
        bc = [mzero]
        right = [o0]
        left = [o0]
        breakdown = None
        for n in range(1, n_max + 1):
            LO = opspace.prune(lindblad.apply(spec, O_cur), prune_rel)
            a_prev = inner(T_cur, LO)
            A = add_scaled(add_scaled(LO, -a_prev, O_cur), -c[n - 1], O_prev)
            if not closed:
                LT = opspace.prune(lindblad.apply_adjoint(spec, T_cur), prune_rel)
                B = add_scaled(add_scaled(LT, -conj(a_prev), T_cur), -b[n - 1], T_prev)
            if rebiorthogonalize:
                for m in range(len(right)):
                    A = add_scaled(A, -inner(left[m], A), right[m])
                    if not closed:
                        B = add_scaled(B, -inner(right[m], B), left[m])
            a.append(a_prev)
            nrm2 = norm2(A)
            if nrm2 <= gmpy2.mpfr(tol) ** 2:
                breakdown = (n, "A-norm collapsed")
                break
            b_n = gmpy2.sqrt(nrm2)
            if closed:
                w = gmpy2.mpc(nrm2)
            else:
                w = inner(B, A)
            c_n = w / b_n
            if abs(w) <= gmpy2.mpfr(tol) * b_n:
                breakdown = (n, "(B|A) overlap collapsed")
                break
            b.append(b_n)
            c.append(c_n)
            bc.append(b_n * c_n)
            O_prev, O_cur = O_cur, opspace.scaled(A, 1 / b_n)
            if closed:
                T_prev, T_cur = O_prev, O_cur
            else:
                T_prev, T_cur = T_cur, opspace.scaled(B, 1 / conj(c_n))
            if keep_basis or rebiorthogonalize:
                right.append(O_cur)
                left.append(T_cur)
        n_done = len(b) - 1
        return LanczosData(
            a=a[:n_done] if breakdown else a,
            b=b, c=c, bc=bc,
            n_max=n_max, n_done=n_done,
            kind=BIG, bits=bits, prune_rel=prune_rel,
            breakdown=breakdown,
            basis=(right, left) if keep_basis else None,
        )


def _run_exact_monic(spec, o0, n_max, keep_basis):
    zero_op = TIOperator.zero(EXACT)
    V_prev, V_cur = zero_op, o0
    W_prev, W_cur = zero_op, o0
    ezero = make_complex(EXACT, 0)
    a: list = []
    bc = [ezero]
    norms = [Fraction(1)]  # (V_n|V_n)
    w_cur = inner(W_cur, V_cur)  # w_0 = 1
    right = [o0]
    left = [o0]
    breakdown = None
    closed = spec.eta == 0
    for n in range(1, n_max + 1):
        LV = lindblad.apply(spec, V_cur)
        a_prev = inner(W_cur, LV) / w_cur
        V_next = add_scaled(add_scaled(LV, -a_prev, V_cur), -bc[n - 1], V_prev)
        if closed:
            W_next = V_next
        else:
            LW = lindblad.apply_adjoint(spec, W_cur)
            W_next = add_scaled(
                add_scaled(LW, -conj(a_prev), W_cur), -conj(bc[n - 1]), W_prev
            )
        a.append(a_prev)
        N_n = norm2(V_next)
        if N_n == 0:
            breakdown = (n, "A-norm collapsed")
            break
        w_next = inner(W_next, V_next)
        if is_zero(w_next):
            breakdown = (n, "(B|A) overlap collapsed")
            break
        bc.append(w_next / w_cur)
        norms.append(N_n)
        V_prev, V_cur = V_cur, V_next
        W_prev, W_cur = W_cur, W_next
        w_cur = w_next
        if keep_basis:
            right.append(V_cur)
            left.append(W_cur)
    n_done = len(bc) - 1
    # derived floats: b_n = sqrt(N_n / N_{n-1}), c_n = bc_n / b_n
    b = [gmpy2.mpfr(0)]
    c = [gmpy2.mpc(0)]
    with working_precision(REPORT_BITS):
        for n in range(1, n_done + 1):
            ratio = norms[n] / norms[n - 1]
            b_n = gmpy2.sqrt(gmpy2.mpfr(ratio.numerator) / ratio.denominator)
            bc_n = gmpy2.mpc(
                gmpy2.mpfr(bc[n].re.numerator) / bc[n].re.denominator,
                gmpy2.mpfr(bc[n].im.numerator) / bc[n].im.denominator,
            )
            b.append(b_n)
            c.append(bc_n / b_n)
    return LanczosData(
        a=a[:n_done] if breakdown else a,
        b=b, c=c, bc=bc,
        n_max=n_max, n_done=n_done,
        kind=EXACT, bits=None, prune_rel=0.0,
        breakdown=breakdown,
        basis=(right, left) if keep_basis else None,
    )


# ---------------------------------------------------------------------------
# validation helpers


def gram_defect(data: LanczosData, spec: Optional[LindbladianSpec] = None) -> float:
    """max_{m != n} |(Ot_m|O_n)| over the stored basis (0 for perfect bi-orthogonality).

    In exact mode the stored chains are the monic ones, whose off-diagonal
    pairings also vanish identically, so the same check applies.
    """
    if data.basis is None:
        raise ValueError("run with keep_basis=True to check the Gram matrix")
    right, left = data.basis
    ctx = working_precision(data.bits) if data.kind == BIG else nullcontext()
    worst = 0.0
    with ctx:
        for m in range(len(left)):
            for n in range(len(right)):
                if m == n:
                    continue
                worst = max(worst, abs(complex(inner(left[m], right[n]))))
    return worst


def tridiagonality_defect(data: LanczosData, spec: LindbladianSpec) -> float:
    """max |(Ot_m|L|O_n)| over |m - n| >= 2, relative to max |bc|."""
    if data.basis is None:
        raise ValueError("run with keep_basis=True to check tridiagonality")
    right, left = data.basis
    ctx = working_precision(data.bits) if data.kind == BIG else nullcontext()
    worst = 0.0
    with ctx:
        applied = [lindblad.apply(spec, v) for v in right]
        for m in range(len(left)):
            for n in range(len(applied)):
                if abs(m - n) < 2:
                    continue
                worst = max(worst, abs(complex(inner(left[m], applied[n]))))
    scale = max(abs(complex(x)) for x in data.bc[1:]) if data.n_done else 1.0
    return worst / max(scale, 1e-300)


# ---------------------------------------------------------------------------
# deviation-point detection


def detect_np(
    bc: Sequence,
    J: float = 1.0,
    epsilon: float = 1.0,
    mode: str = "syk",
    fit_points: int = 6,
) -> Optional[int]:
    """First iteration where the Lanczos products leave the linear-growth law.

    ``bc`` uses the package convention bc[n] = b_n c_n with a placeholder at 0.

    * mode="syk": first n with |bc_n / J^2 - n(n-1)| > epsilon.
    * mode="fit": first n where |sqrt(bc_n)| strays from the line fitted
      through the first `fit_points` points by more than epsilon * slope.

    Returns None if no deviation occurs in range.
    """
    vals = [complex(x) for x in bc]
    N = len(vals) - 1
    if mode == "syk":
        for n in range(1, N + 1):
            if abs(vals[n] / J**2 - n * (n - 1)) > epsilon:
                return n
        return None
    if mode == "fit":
        k = min(fit_points, N)
        if k < 2:
            raise ValueError("fit mode needs at least two points")
        ys = [math.sqrt(abs(v)) for v in vals]
        xs = list(range(1, k + 1))
        xbar = sum(xs) / k
        ybar = sum(ys[1 : k + 1]) / k
        sxx = sum((x - xbar) ** 2 for x in xs)
        sxy = sum((x - xbar) * (ys[x] - ybar) for x in xs)
        slope = sxy / sxx
        intercept = ybar - slope * xbar
        if slope <= 0:
            raise ValueError("no growing linear regime to deviate from")
        for n in range(1, N + 1):
            if abs(ys[n] - (intercept + slope * n)) > epsilon * slope:
                return n
        return None
    raise ValueError(f"unknown detection mode {mode!r}")


def detect_np_reference(
    bc: Sequence,
    bc_closed: Sequence,
    epsilon: float = 0.08,
) -> Optional[int]:
    """Deviation point of |sqrt(bc)| from the closed-system (eta=0) curve.

    The spin-chain Lanczos staircase is curved and alternates between even and
    odd n already at eta = 0, so "deviation from linear growth" is measured
    against the computed eta=0 curve of the same model: the first n where
    | |sqrt(bc_n)| - |sqrt(bc_n^closed)| | exceeds epsilon times the mean
    linear slope of the closed curve.  Returns None when the curves stay
    together over the computed range.
    """
    N = min(len(bc), len(bc_closed)) - 1
    if N < 2:
        raise ValueError("need at least two coefficients")
    y = [math.sqrt(abs(complex(v))) for v in bc[: N + 1]]
    y0 = [math.sqrt(abs(complex(v))) for v in bc_closed[: N + 1]]
    xs = list(range(1, N + 1))
    xbar = sum(xs) / N
    ybar = sum(y0[1:]) / N
    slope = sum((x - xbar) * (y0[x] - ybar) for x in xs) / sum((x - xbar) ** 2 for x in xs)
    if slope <= 0:
        raise ValueError("closed-system curve shows no linear growth")
    for n in range(1, N + 1):
        if abs(y[n] - y0[n]) > epsilon * slope:
            return n
    return None
