"""Moment sequences mu_n for the three model families.

Convention: mu_n = (1/i^n) d^n C/dt^n |_{t=0} = (O|L^n|O), with mu_0 = 1 for a
normalized initial operator.  For Hermitian-dephasing generators the even
moments are real and the odd ones purely imaginary; at eta = 0 all odd moments
vanish.

Families:

* large-q SYK with linear-Majorana dephasing: C(t) = 1 + (2/q) ln sech(a t + b)
  with a = J sqrt((eta/2J)^2 + 1), b = arcsinh(eta/2J).  Every derivative of C
  is exactly linear in 2/q, so the moments are computed from the Taylor
  coefficients of tanh about b via the ODE recurrence tanh' = 1 - tanh^2 (no
  series truncation error, only rounding, which a guard-precision re-run
  checks).  The additive constant (2/q) ln sech b is dropped so that mu_0 = 1
  exactly; Lanczos products are invariant under that normalization.

* dissipative Ising chain: mu_n = (O|L^n O) evaluated sparsely in the
  thermodynamic limit (module :mod:`opgrowth.lindblad`), splitting L^n across
  the inner product so only depth-ceil(n/2) vectors are ever built.

* single-particle hopping toy model: hop right with amplitude J, stay with
  amplitude i*eta*p at site p.  Two independent routes: the closed-form
  Stirling-number sum, and a transfer (trajectory-sum) evaluation; they agree
  exactly in rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import gmpy2

from . import lindblad, opspace
from .opspace import TIOperator
from .scalars import (
    BIG,
    DEFAULT_BITS,
    EXACT,
    ExactComplex,
    imag_part,
    real_part,
    working_precision,
)


class PrecisionInsufficientError(RuntimeError):
    """Working precision cannot support the requested digits."""


@dataclass(frozen=True)
class SYKParams:
    """Large-q SYK parameters; only 2/q, J and eta enter the correlator."""

    q: float
    J: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.J <= 0:
            raise ValueError("J must be > 0")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        a, b = self.alpha_beta_float()
        if abs(a - self.J * math.cosh(b)) > 1e-12 * a:
            raise AssertionError("alpha = J*cosh(beta) identity violated")

    def alpha_beta_float(self):
        x = self.eta / (2 * self.J)
        return self.J * math.sqrt(x * x + 1), math.asinh(x)

    def alpha_beta(self):
        """(alpha, beta) as mpfr at the active working precision."""
        x = gmpy2.mpfr(self.eta) / (2 * gmpy2.mpfr(self.J))
        return self.J * gmpy2.sqrt(x * x + 1), gmpy2.asinh(x)


@dataclass(frozen=True)
class ToyParams:
    J: Fraction = Fraction(1)
    eta: Fraction = Fraction(0)

    def __post_init__(self):
        if self.J <= 0:
            raise ValueError("J must be > 0")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")


@dataclass
class MomentSequence:
    """mu_0..mu_N plus the bookkeeping needed to interpret them."""

    mu: List[object]
    model: str
    kind: str
    bits: Optional[int] = None
    note: str = "mu_n = (1/i^n) d^n C/dt^n at t=0"
    meta: dict = field(default_factory=dict)
    truncated_at: Optional[int] = None

    def __len__(self):
        return len(self.mu)

    def parity_defect(self) -> float:
        """max over n of the out-of-parity component, relative to |mu_n|."""
        worst = 0.0
        for n, m in enumerate(self.mu):
            re, im = float(real_part(m)), float(imag_part(m))
            mag = max(abs(re), abs(im), 1e-300)
            bad = abs(im) if n % 2 == 0 else abs(re)
            worst = max(worst, bad / mag)
        return worst


# ---------------------------------------------------------------------------
# large-q SYK


def _tanh_series(beta, n_terms: int):
    """Taylor coefficients of tanh(beta + u) about u = 0, orders 0..n_terms-1."""
    T = [gmpy2.tanh(beta)]
    for k in range(n_terms - 1):
        conv = gmpy2.mpfr(0)
        for j in range(k + 1):
            conv += T[j] * T[k - j]
        nxt = ((1 if k == 0 else 0) - conv) / (k + 1)
        T.append(nxt)
    return T


def _syk_mu(p: SYKParams, N: int):
    """mu_0..mu_N as mpc at the active precision."""
    alpha, beta = p.alpha_beta()
    T = _tanh_series(beta, max(N, 1))
    two_over_q = 2 / gmpy2.mpfr(p.q)
    mu = [gmpy2.mpc(1)]
    apow = gmpy2.mpfr(1)
    fact = gmpy2.mpfr(1)
    for n in range(1, N + 1):
        apow *= alpha
        if n > 1:
            fact *= n - 1
        r = -two_over_q * apow * fact * T[n - 1]
        rem = n % 4  # (-i)^n cycle: 1, -i, -1, i
        if rem == 0:
            mu.append(gmpy2.mpc(r))
        elif rem == 1:
            mu.append(gmpy2.mpc(0, -r))
        elif rem == 2:
            mu.append(gmpy2.mpc(-r))
        else:
            mu.append(gmpy2.mpc(0, r))
    return mu


def syk_moments(p: SYKParams, N: int, bits: int = DEFAULT_BITS) -> MomentSequence:
    """Moments of the normalized large-q SYK correlator, with a guard-run check."""
    if N < 0:
        raise ValueError("N must be >= 0")
    with working_precision(bits):
        mu = _syk_mu(p, N)
    with working_precision(bits + 96):
        mu_guard = _syk_mu(p, N)
    # both runs agree to the target precision or the digits are not real
    digits = max(1, int(bits * 0.30103) - 6)
    tol = gmpy2.mpfr(10) ** (-digits)
    with working_precision(bits + 96):
        for n in range(N + 1):
            a, b = mu[n], mu_guard[n]
            scale = max(abs(a), gmpy2.mpfr(1e-300))
            if abs(a - b) / scale > tol:
                raise PrecisionInsufficientError(
                    f"mu_{n} differs between {bits} and guard precision beyond 10^-{digits}"
                )
    return MomentSequence(
        mu=mu,
        model="syk",
        kind=BIG,
        bits=bits,
        meta={"q": p.q, "J": p.J, "eta": p.eta},
    )


def syk_bc_closed_form(p: SYKParams, n: int, bits: int = 256):
    """First-order-in-1/q closed form for b_n c_n (mpfr at `bits`)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    with working_precision(bits):
        J2 = gmpy2.mpfr(p.J) ** 2
        if n == 1:
            return 2 * J2 / p.q
        _, beta = p.alpha_beta()
        sign = 1 if (n + 1) % 2 == 0 else -1
        osc = 1 + sign * (
            n * gmpy2.cosh((2 * n - 2) * beta) + (n - 1) * gmpy2.cosh(2 * n * beta)
        )
        return J2 * (n * (n - 1) + osc / p.q)


# ---------------------------------------------------------------------------
# dissipative Ising chain (thermodynamic limit)


def ising_moments(
    spec: lindblad.LindbladianSpec,
    o0: TIOperator,
    N: int,
    max_terms: Optional[int] = None,
    prune_rel: float = opspace.PRUNE_REL_DEFAULT,
) -> MomentSequence:
    """mu_n = (O|L^n O) for n <= N, splitting powers across the inner product.

    Builds L^j O for j <= ceil(N/2) and (L_adj)^i O for i <= floor(N/2); if a
    vector would exceed `max_terms` strings the sequence is returned truncated
    with `truncated_at` set.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    k_right = (N + 1) // 2
    k_left = N // 2
    truncated_at = None

    def ladder(step_fn, depth):
        nonlocal truncated_at
        vecs = [o0]
        for _ in range(depth):
            nxt = opspace.prune(step_fn(spec, vecs[-1]), prune_rel)
            if max_terms is not None and nxt.n_terms() > max_terms:
                return vecs, True
            vecs.append(nxt)
        return vecs, False

    right, trunc_r = ladder(lindblad.apply, k_right)
    left, trunc_l = ladder(lindblad.apply_adjoint, k_left)
    have_right = len(right) - 1
    have_left = len(left) - 1
    reach = have_right + have_left
    if trunc_r or trunc_l or reach < N:
        truncated_at = reach + 1
    mu = []
    for n in range(min(N, reach) + 1):
        i = max(0, n - have_right)
        j = n - i
        mu.append(opspace.inner(left[i], right[j]))
    return MomentSequence(
        mu=mu,
        model="ising",
        kind=o0.kind,
        bits=o0.bits,
        meta=dict(spec.to_config()),
        truncated_at=truncated_at,
    )


# ---------------------------------------------------------------------------
# toy hopping model


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind via S(n,k) = k S(n-1,k) + S(n-1,k-1)."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got S({n},{k})")
    row = [1]  # S(0, 0)
    for m in range(1, n + 1):
        nxt = [0] * (m + 1)
        for j in range(1, m + 1):
            nxt[j] = j * (row[j] if j < m else 0) + row[j - 1]
        row = nxt
    return row[k]


_I_CYCLE = (
    ExactComplex(1),
    ExactComplex(0, 1),
    ExactComplex(-1),
    ExactComplex(0, -1),
)


def toy_moments_formula(p: ToyParams, N: int) -> MomentSequence:
    """Closed-form toy moments: sum_k S(n,2k) (i eta)^(n-2k) J^(2k) (2k)!  (exact)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    # one Stirling table pass for all n
    mu = [ExactComplex(1)]
    row = [1]  # S(0,0)
    for n in range(1, N + 1):
        nxt = [0] * (n + 1)
        for j in range(1, n + 1):
            nxt[j] = j * (row[j] if j < n else 0) + row[j - 1]
        row = nxt
        total = ExactComplex(0)
        for k in range(1, n // 2 + 1):
            mag = (
                Fraction(row[2 * k])
                * p.eta ** (n - 2 * k)
                * p.J ** (2 * k)
                * math.factorial(2 * k)
            )
            total = total + _I_CYCLE[(n - 2 * k) % 4] * ExactComplex(mag)
        mu.append(total)
    return MomentSequence(
        mu=mu, model="toy", kind=EXACT, meta={"J": str(p.J), "eta": str(p.eta)}
    )


def toy_moments_oracle(p: ToyParams, N: int) -> MomentSequence:
    """Transfer evaluation of the hopping process of the toy generator.

    Maintains the coefficient vector over chain positions; each step hops
    right with amplitude J and stays with amplitude i*eta*p, and the moment is
    read off against <0|p> = p! for even p (the position basis is not
    orthogonal).  Independent route to :func:`toy_moments_formula`.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    c = [ExactComplex(1)]
    mu = [ExactComplex(1)]
    J = ExactComplex(p.J)
    i_eta = ExactComplex(0, p.eta)
    for n in range(1, N + 1):
        nxt = [ExactComplex(0)] * (n + 1)
        for pos, amp in enumerate(c):
            if not amp:
                continue
            nxt[pos + 1] = nxt[pos + 1] + J * amp
            if pos:
                nxt[pos] = nxt[pos] + i_eta * ExactComplex(pos) * amp
        c = nxt
        total = ExactComplex(0)
        for pos in range(0, n + 1, 2):
            if c[pos]:
                total = total + c[pos] * ExactComplex(math.factorial(pos))
        mu.append(total)
    return MomentSequence(
        mu=mu, model="toy", kind=EXACT, meta={"J": str(p.J), "eta": str(p.eta)}
    )


# ---------------------------------------------------------------------------
# dissipative / closed moment ratio


@dataclass
class RatioData:
    """r_n = mu~_{2n} / mu_{2n}; values[n] is r_n with values[0] = 1."""

    values: List[object]
    abs_values: List[float]
    first_sign_change: Optional[int]
    max_parity_defect: float


def moment_ratio(dissipative: MomentSequence, closed: MomentSequence) -> RatioData:
    """Ratio of even moments with and without dissipation (real by parity)."""
    if dissipative.model != closed.model:
        raise ValueError(
            f"ratio across families: {dissipative.model} vs {closed.model}"
        )
    if dissipative.kind != closed.kind:
        raise ValueError("scalar kinds differ between the two sequences")
    n_pairs = (min(len(dissipative.mu), len(closed.mu)) - 1) // 2
    values = []
    defect = 0.0
    from .scalars import is_zero

    for n in range(n_pairs + 1):
        num = dissipative.mu[2 * n]
        den = closed.mu[2 * n]
        if is_zero(den):
            raise ZeroDivisionError(f"closed even moment mu_{2*n} vanishes")
        if dissipative.kind == EXACT:
            r = num / den
        else:
            with working_precision(dissipative.bits or DEFAULT_BITS):
                r = num / den
        re, im = float(real_part(r)), float(imag_part(r))
        if re or im:
            defect = max(defect, abs(im) / max(abs(re), abs(im)))
        values.append(real_part(r))
    first = None
    for n in range(1, len(values)):
        if (values[n] < 0) != (values[n - 1] < 0):
            first = n
            break
    return RatioData(
        values=values,
        abs_values=[abs(float(v)) for v in values],
        first_sign_change=first,
        max_parity_defect=defect,
    )
