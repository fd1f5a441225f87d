"""Spectral function phi(omega) = int_0^inf cos(omega t) C(t) dt and its tail.

Half-line cosine transform only: open-system propagation is defined for
positive times, so no symmetrization of C is ever assumed.  Dephasing gives C
a nonvanishing odd part at t=0, which turns the closed-system exponential
decay of phi into an omega^{-2} tail with coefficient -i*mu_1; the two regimes
meet at a crossover frequency that grows only logarithmically in 1/eta.

Correlator families:

* ``syk_resummed`` -- C(t) = [cosh(a t + b)/cosh b]^(-2/q), decaying for a > 0;
  this is the family all transform experiments run on.
* ``syk_log``      -- C(t) = 1 + (2/q)[ln sech(a t + b) - ln sech b]; useful
  for moments/tail coefficients but *unbounded below* at large t, so the
  transform refuses it.
* ``tabulated``    -- sampled (t, C) data, trapezoid-limited accuracy.
* ``callable``     -- any decaying C(t) callable (tests, extensions).

Quadrature: fixed-order Gauss-Legendre panels, at least 20 panels per
oscillation period 2*pi/omega, integrated to a T where |C| has dropped below
`tail_eps` * |C(0)|.  The float64 engine vectorizes over panels; the mp engine
(gmpy2) exists because the closed-system slope check needs phi down to ~1e-26,
far below what absolute float64 cancellation allows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import gmpy2
import numpy as np

from .moments import SYKParams
from .scalars import working_precision


class NonDecayingError(ValueError):
    """The correlator does not decay; the half-line transform is ill-defined."""


class RegimeNotFoundError(RuntimeError):
    """No fit window reaches the required quality for the requested regime."""


@dataclass(frozen=True)
class CorrelatorSpec:
    family: str
    params: Optional[SYKParams] = None
    table: Optional[Tuple[Sequence[float], Sequence[float]]] = None
    fn: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.family in ("syk_log", "syk_resummed"):
            if self.params is None:
                raise ValueError(f"{self.family} needs SYKParams")
        elif self.family == "tabulated":
            if self.table is None:
                raise ValueError("tabulated family needs (t, C) samples")
        elif self.family == "callable":
            if self.fn is None:
                raise ValueError("callable family needs a function")
        else:
            raise ValueError(f"unknown correlator family {self.family!r}")

    # -- float64 evaluation --------------------------------------------------

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        if self.family == "syk_resummed":
            a, b = self.params.alpha_beta_float()
            # log-space to dodge cosh overflow at large a*t
            x = a * t + b
            log_cosh = np.abs(x) + np.log1p(np.exp(-2 * np.abs(x))) - math.log(2.0)
            return np.exp((-2.0 / self.params.q) * (log_cosh - _log_cosh_f(b)))
        if self.family == "syk_log":
            a, b = self.params.alpha_beta_float()
            x = a * t + b
            log_cosh = np.abs(x) + np.log1p(np.exp(-2 * np.abs(x))) - math.log(2.0)
            return 1.0 - (2.0 / self.params.q) * (log_cosh - _log_cosh_f(b))
        if self.family == "tabulated":
            ts, cs = self.table
            return np.interp(t, ts, cs)
        t = np.atleast_1d(t)
        try:
            vals = np.asarray(self.fn(t), dtype=float)
            if vals.shape == t.shape:
                return vals
        except (TypeError, ValueError):
            pass
        return np.asarray([self.fn(x) for x in t], dtype=float)

    def evaluate_mp(self, t):
        """Single-point mpfr evaluation at the active precision."""
        if self.family == "syk_resummed":
            a, b = self.params.alpha_beta()
            return gmpy2.exp(
                (-2 / gmpy2.mpfr(self.params.q))
                * (_log_cosh_mp(a * t + b) - _log_cosh_mp(b))
            )
        if self.family == "syk_log":
            a, b = self.params.alpha_beta()
            return 1 - (2 / gmpy2.mpfr(self.params.q)) * (
                _log_cosh_mp(a * t + b) - _log_cosh_mp(b)
            )
        raise ValueError(f"mp engine supports SYK families only, not {self.family}")


def _log_cosh_f(x: float) -> float:
    return abs(x) + math.log1p(math.exp(-2 * abs(x))) - math.log(2.0)


def _log_cosh_mp(x):
    ax = abs(x)
    return ax + gmpy2.log1p(gmpy2.exp(-2 * ax)) - gmpy2.log(2)


@dataclass
class SpectralCurve:
    """Sampled phi(omega) plus the tail/crossover annotations."""

    omega: np.ndarray
    phi: np.ndarray
    log_phi: np.ndarray  # natural log of phi (accurate even when phi underflows reporting)
    tail_coefficient: Optional[float] = None
    omega_star_fit: Optional[float] = None
    omega_star_formula: Optional[float] = None
    engine: str = "float64"
    bits: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")


# ---------------------------------------------------------------------------
# integration horizon and refusal


def _decay_horizon(spec: CorrelatorSpec, tail_eps: float, t_cap: float = 1e6) -> float:
    """Smallest T (by doubling + bisection) with |C(T)| <= tail_eps * |C(0)|."""
    c0 = abs(float(spec.evaluate(np.asarray([0.0]))[0]))
    if c0 == 0:
        raise ValueError("C(0) = 0; nothing to transform")
    target = tail_eps * c0
    if spec.family == "tabulated":
        ts, cs = spec.table
        t_end = float(ts[-1])
        if abs(float(cs[-1])) > max(target, 1e-8 * c0):
            raise NonDecayingError("tabulated correlator has not decayed by the last sample")
        return t_end
    lo, hi = 0.0, 1.0
    while abs(float(spec.evaluate(np.asarray([hi]))[0])) > target:
        lo, hi = hi, hi * 2
        if hi > t_cap:
            raise NonDecayingError(
                f"|C(t)| stayed above {tail_eps} * C(0) out to t = {t_cap:g}"
            )
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if abs(float(spec.evaluate(np.asarray([mid]))[0])) > target:
            lo = mid
        else:
            hi = mid
    return hi


# ---------------------------------------------------------------------------
# phi


def phi(
    spec: CorrelatorSpec,
    omega_grid: Sequence[float],
    panels_per_period: int = 20,
    order: int = 12,
    tail_eps: float = 1e-16,
    engine: str = "float64",
    bits: int = 320,
    refine: int = 1,
) -> SpectralCurve:
    """Cosine transform of C on the half line, panel-resolved per oscillation.

    `refine` scales the panel count (refine=2 halves every panel width; the
    convergence contract is |phi_refined - phi| < 1e-10 pointwise).
    """
    omega = np.asarray(sorted(float(w) for w in omega_grid))
    if omega.size == 0:
        raise ValueError("empty omega grid")
    T = _decay_horizon(spec, tail_eps)
    if engine == "float64":
        phis = _phi_float64(spec, omega, T, panels_per_period * refine, order)
        logs = np.where(phis > 0, np.log(np.maximum(phis, 1e-320)), np.nan)
        curve = SpectralCurve(omega=omega, phi=phis, log_phi=logs, engine="float64")
    elif engine == "mp":
        phis_mp = _phi_mp(spec, omega, T, panels_per_period * refine, max(order, 16), bits)
        with working_precision(bits):
            logs = np.asarray(
                [float(gmpy2.log(p)) if p > 0 else math.nan for p in phis_mp]
            )
        phis = np.asarray([float(p) for p in phis_mp])
        curve = SpectralCurve(
            omega=omega, phi=phis, log_phi=logs, engine="mp", bits=bits
        )
    else:
        raise ValueError(f"unknown engine {engine!r}")
    try:
        curve.tail_coefficient = tail_coefficient(spec)
    except ValueError:
        curve.tail_coefficient = None
    curve.meta = {
        "T": T,
        "panels_per_period": panels_per_period * refine,
        "order": max(order, 16) if engine == "mp" else order,
        "tail_eps": tail_eps,
        "family": spec.family,
    }
    return curve


def _phi_float64(spec, omega, T, panels_per_period, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    out = np.empty_like(omega, dtype=float)
    for k, w in enumerate(omega):
        width = T / 40 if w <= 0 else min(T / 40, (2 * math.pi / w) / panels_per_period)
        n_panels = max(40, int(math.ceil(T / width)))
        edges = np.linspace(0.0, T, n_panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        wt = (half[:, None] * weights[None, :]).ravel()
        vals = spec.evaluate(t) * np.cos(w * t)
        out[k] = float(np.dot(wt, vals))
    return out


def _legendre_newton(order, bits):
    seeds, _ = np.polynomial.legendre.leggauss(order)
    with working_precision(bits + 64):
        xs, ws = [], []
        for s in seeds:
            x = gmpy2.mpfr(s)
            for _ in range(8):
                p_prev, p = gmpy2.mpfr(1), x
                for k in range(1, order):
                    p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
                dp = order * (x * p - p_prev) / (x * x - 1)
                x -= p / dp
            p_prev, p = gmpy2.mpfr(1), x
            for k in range(1, order):
                p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
            dp = order * (x * p - p_prev) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
    return xs, ws


def _phi_mp(spec, omega, T, panels_per_period, order, bits):
    xs, ws = _legendre_newton(order, bits)
    out = []
    with working_precision(bits):
        T_mp = gmpy2.mpfr(T)
        two_pi = 2 * gmpy2.const_pi()
        for w in omega:
            w_mp = gmpy2.mpfr(w)
            if w <= 0:
                width = T_mp / 40
            else:
                width = min(T_mp / 40, (two_pi / w_mp) / panels_per_period)
            n_panels = max(40, int(gmpy2.ceil(T_mp / width)))
            h = T_mp / n_panels
            half = h / 2
            acc = gmpy2.mpfr(0)
            for i in range(n_panels):
                mid = (2 * i + 1) * half
                for x, gw in zip(xs, ws):
                    t = mid + half * x
                    acc += gw * gmpy2.cos(w_mp * t) * spec.evaluate_mp(t)
            out.append(acc * half)
    return out


# ---------------------------------------------------------------------------
# tail and crossover


def tail_coefficient(spec: CorrelatorSpec) -> float:
    """-i*mu_1, the predicted coefficient of the omega^{-2} tail (real, >= 0).

    Equals -C'(0) for a normalized correlator; purely a t=0 property, so it is
    defined even for families the transform itself refuses.
    """
    if spec.family in ("syk_log", "syk_resummed"):
        a, b = spec.params.alpha_beta_float()
        return (2.0 * a / spec.params.q) * math.tanh(b)
    if spec.family == "tabulated":
        ts, cs = spec.table
        k = min(6, len(ts))
        coeffs = np.polyfit(np.asarray(ts[:k], dtype=float), np.asarray(cs[:k], dtype=float), k - 2)
        deriv = np.polyder(coeffs)
        return float(-np.polyval(deriv, ts[0]))
    h = 1e-5
    c = [spec.fn(i * h) for i in range(5)]
    dC = (-25 * c[0] + 48 * c[1] - 36 * c[2] + 16 * c[3] - 3 * c[4]) / (12 * h)
    return -dC


def crossover_formula(p: SYKParams) -> float:
    """Asymptotic crossover frequency (2/pi) ln[z (ln z)^2], z = 4q/(eta pi^2), J=1."""
    if p.J != 1:
        raise ValueError("the crossover formula is normalized to J = 1")
    if p.eta <= 0:
        raise ValueError("crossover needs eta > 0")
    z = 4.0 * p.q / (p.eta * math.pi**2)
    if z <= 1.0:
        raise ValueError(f"outside the asymptotic regime: 4q/(eta pi^2) = {z:g} <= 1")
    inner = z * math.log(z) ** 2
    if inner <= 1.0:
        raise ValueError(f"nonpositive log: z (ln z)^2 = {inner:g} <= 1")
    return (2.0 / math.pi) * math.log(inner)


@dataclass
class CrossoverFit:
    omega_star: float
    exp_window: Tuple[float, float]
    pow_window: Tuple[float, float]
    exp_slope: float
    exp_intercept: float
    pow_slope: float
    pow_intercept: float
    r2_exp: float
    r2_pow: float


def _window_fits(x, y, min_points):
    """All contiguous-window LSQ fits of y against x: list of (i, j, slope, icpt, r2)."""
    n = len(x)
    out = []
    cx = np.concatenate([[0.0], np.cumsum(x)])
    cy = np.concatenate([[0.0], np.cumsum(y)])
    cxx = np.concatenate([[0.0], np.cumsum(x * x)])
    cxy = np.concatenate([[0.0], np.cumsum(x * y)])
    cyy = np.concatenate([[0.0], np.cumsum(y * y)])
    for i in range(n):
        for j in range(i + min_points - 1, n):
            m = j - i + 1
            sx = cx[j + 1] - cx[i]
            sy = cy[j + 1] - cy[i]
            sxx = cxx[j + 1] - cxx[i]
            sxy = cxy[j + 1] - cxy[i]
            syy = cyy[j + 1] - cyy[i]
            vxx = sxx - sx * sx / m
            vxy = sxy - sx * sy / m
            vyy = syy - sy * sy / m
            if vxx <= 0 or vyy <= 0:
                continue
            slope = vxy / vxx
            icpt = (sy - slope * sx) / m
            r2 = (vxy * vxy) / (vxx * vyy)
            out.append((i, j, slope, icpt, r2))
    return out


def crossover_fit(curve: SpectralCurve, min_points: int = 6, r2_min: float = 0.98) -> float:
    return crossover_fit_report(curve, min_points, r2_min).omega_star


def crossover_fit_report(
    curve: SpectralCurve, min_points: int = 6, r2_min: float = 0.98
) -> CrossoverFit:
    """Locate the exponential->power-law crossover by intersecting two fitted lines.

    Exponential regime: log phi linear in omega, spanning >= 2 decades of phi.
    Power regime: log phi linear in log omega with slope within 0.35 of -2,
    spanning >= 1 decade.  Among windows passing the R^2 >= r2_min bar, the
    pair (exponential strictly left of power) covering the most grid points
    wins; the returned abscissa solves a_e + s_e w = a_p + s_p ln w.
    """
    good = np.isfinite(curve.log_phi)
    w = curve.omega[good]
    y = curve.log_phi[good]
    if len(w) < 2 * min_points:
        raise RegimeNotFoundError("too few positive samples to fit two regimes")
    ln10 = math.log(10.0)
    exp_fits = [
        f
        for f in _window_fits(w, y, min_points)
        if f[2] < 0 and f[4] >= r2_min and (y[f[0]] - y[f[1]]) >= 2 * ln10
    ]
    pow_fits = [
        f
        for f in _window_fits(np.log(w), y, min_points)
        if abs(f[2] + 2.0) <= 0.35 and f[4] >= r2_min and (y[f[0]] - y[f[1]]) >= ln10
    ]
    if not exp_fits:
        raise RegimeNotFoundError("no exponential-regime window reaches R^2 >= 0.98")
    if not pow_fits:
        raise RegimeNotFoundError("no power-law window (slope near -2) reaches R^2 >= 0.98")
    best = None
    # longest exponential window ending before each index, precomputed
    n = len(w)
    best_exp_upto = [None] * n
    for f in exp_fits:
        j = f[1]
        cur = best_exp_upto[j]
        if cur is None or (f[1] - f[0], f[4]) > (cur[1] - cur[0], cur[4]):
            best_exp_upto[j] = f
    for j in range(1, n):
        a, b = best_exp_upto[j - 1], best_exp_upto[j]
        if b is None or (a is not None and (a[1] - a[0], a[4]) > (b[1] - b[0], b[4])):
            best_exp_upto[j] = a
    for pf in pow_fits:
        i = pf[0]
        if i == 0:
            continue
        ef = best_exp_upto[i - 1]
        if ef is None:
            continue
        score = (ef[1] - ef[0] + pf[1] - pf[0], ef[4] + pf[4])
        if best is None or score > best[0]:
            best = (score, ef, pf)
    if best is None:
        raise RegimeNotFoundError("no exponential window sits left of a power-law window")
    _, ef, pf = best

    def gap(omega_val):
        return (ef[3] + ef[2] * omega_val) - (pf[3] + pf[2] * math.log(omega_val))

    lo, hi = w[ef[0]], w[-1] * 2
    if gap(lo) < 0 or gap(hi) > 0:
        raise RegimeNotFoundError("fitted regime lines do not intersect in range")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return CrossoverFit(
        omega_star=0.5 * (lo + hi),
        exp_window=(float(w[ef[0]]), float(w[ef[1]])),
        pow_window=(float(w[pf[0]]), float(w[pf[1]])),
        exp_slope=ef[2],
        exp_intercept=ef[3],
        pow_slope=pf[2],
        pow_intercept=pf[3],
        r2_exp=ef[4],
        r2_pow=pf[4],
    )
