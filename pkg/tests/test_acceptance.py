"""Acceptance gate: every release-blocking criterion, at its stated tolerance.

Each test prints one PASS/FAIL line with the measured numbers (run with
``pytest tests/test_acceptance.py -v -s`` to watch them stream).  The heavy
pieces (depth-20 big-float chain propagation, the multiprecision spectral
slope) sit at the end; the whole module runs in a few minutes on two cores.
"""

import math
from fractions import Fraction

import gmpy2
import numpy as np

from opgrowth import testkit
from opgrowth.bilanczos import bilanczos_run, detect_np, detect_np_reference
from opgrowth.hankel import adaptive_precision_run, from_moments_det, from_moments_recursive
from opgrowth.lindblad import IsingParams, LindbladianSpec, initial_x_density
from opgrowth.moments import (
    SYKParams,
    ToyParams,
    ising_moments,
    moment_ratio,
    syk_bc_closed_form,
    syk_moments,
    toy_moments_formula,
    toy_moments_oracle,
)
from opgrowth.scalars import BIG, working_precision
from opgrowth.spectral import (
    CorrelatorSpec,
    crossover_fit_report,
    crossover_formula,
    phi,
    tail_coefficient,
)


def report(tag: str, ok: bool, detail: str):
    print(f"[{tag}] {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    assert ok, f"{tag}: {detail}"


# ---------------------------------------------------------------------------


def test_A1_bilanczos_equals_hankel_on_dissipative_ising():
    """bc from the direct bi-Lanczos recursion == bc from Hankel determinants
    of the directly computed moments, eta = 0.1, n <= 12, rel tol 1e-8."""
    spec = LindbladianSpec.ising(IsingParams(eta=Fraction(1, 10)))
    o0 = initial_x_density()
    direct = bilanczos_run(spec, o0, 12)
    ms = ising_moments(spec, o0, 24)
    det = from_moments_det(ms, 12)
    worst = 0.0
    for n in range(1, 13):
        a, b = complex(direct.bc[n]), complex(det[n])
        worst = max(worst, abs(a - b) / abs(b))
    report("A1", worst <= 1e-8, f"max rel diff over n<=12: {worst:.3e} (exact arithmetic)")


def test_A2_syk_closed_form_reproduction():
    """Hankel bc vs the first-order-in-1/q closed form: residual scales as 1/q^2
    (ratio between q=1e3 and q=1e4 in [50, 200] for n <= 20, eta <= 0.5), and
    bc_1 = 2 J^2/q to 10 digits in the closed system, with the eta > 0 residual
    matching the derived 1/q^2 coefficient 2 sinh^2(beta)/q * bc_1."""
    N = 20
    bits = 4096
    ratios = []
    for eta in (0.1, 0.3, 0.5):
        res = {}
        for q in (1000.0, 10000.0):
            p = SYKParams(q=q, J=1.0, eta=eta)
            bc, _ = from_moments_recursive(syk_moments(p, 2 * N, bits=bits), N)
            with working_precision(bits):
                res[q] = [
                    abs(bc[n] - syk_bc_closed_form(p, n, bits=bits))
                    for n in range(1, N + 1)
                ]
        for n in range(N):
            ratios.append(float(res[1000.0][n] / res[10000.0][n]))
    ok_ratio = all(50 <= r <= 200 for r in ratios)

    # bc_1 clause
    ok_bc1 = True
    detail_bc1 = []
    for q in (1000.0, 10000.0):
        p0 = SYKParams(q=q, J=1.0, eta=0.0)
        bc0, _ = from_moments_recursive(syk_moments(p0, 4, bits=512), 1)
        rel0 = abs(complex(bc0[1]) - 2 / q) / (2 / q)
        ok_bc1 &= rel0 <= 1e-10
        detail_bc1.append(f"eta=0,q={q:g}: rel={rel0:.1e}")
        p = SYKParams(q=q, J=1.0, eta=0.5)
        bc1, _ = from_moments_recursive(syk_moments(p, 4, bits=512), 1)
        with working_precision(512):
            sinh_b = gmpy2.mpfr(0.5) / 2
            predicted = (2 / gmpy2.mpfr(q)) * (1 + 2 * sinh_b**2 / q)
            rel = float(abs(bc1[1] - predicted) / predicted)
            resid = float(abs(bc1[1] - 2 / gmpy2.mpfr(q)) / (2 * sinh_b**2 / q * (2 / q)))
        ok_bc1 &= rel <= 1e-10 and 0.95 <= resid <= 1.05
        detail_bc1.append(f"eta=0.5,q={q:g}: O(1/q^2) coeff ratio={resid:.4f}")
    report(
        "A2",
        ok_ratio and ok_bc1,
        f"residual-ratio range [{min(ratios):.1f}, {max(ratios):.1f}] (target [50,200]); "
        + "; ".join(detail_bc1),
    )


def test_A3_syk_np_scaling_collapse():
    """N_p (epsilon=1, J=1, |bc - n(n-1)| criterion) vs log(q)/eta fits a line
    with R^2 >= 0.95 over q in {5e2,1e3,1e4} x eta in {0.1,0.2,0.3,0.5}."""
    pts = []
    for q in (500.0, 1000.0, 10000.0):
        for eta in (0.1, 0.2, 0.3, 0.5):
            N = 100 if eta <= 0.15 else (60 if eta <= 0.35 else 40)
            p = SYKParams(q=q, J=1.0, eta=eta)
            res = adaptive_precision_run(
                lambda bits: syk_moments(p, 2 * N, bits=bits), N, target_digits=10
            )
            n_p = detect_np(res.bc, J=1.0, epsilon=1.0, mode="syk")
            assert n_p is not None
            beta = p.alpha_beta_float()[1]
            pts.append((math.log(q) / eta, n_p, abs(2 * n_p * beta - math.log(q))))
    xs = np.asarray([p[0] for p in pts])
    ys = np.asarray([p[1] for p in pts])
    vx = xs - xs.mean()
    vy = ys - ys.mean()
    r2 = float((vx @ vy) ** 2 / ((vx @ vx) * (vy @ vy)))
    ptwise = max(p[2] for p in pts)
    report(
        "A3",
        r2 >= 0.95,
        f"R^2 = {r2:.4f} (>= 0.95) over 12 grid points; "
        f"note max |2 N_p beta - ln q| = {ptwise:.2f} (the exact-detection offset "
        f"~ ln N_p; see decisions ledger on the non-equivalent pointwise form)",
    )


def test_A4_ising_np_inverse_eta_scaling():
    """Ising N_p * eta constant within +-30% across eta in {0.1,0.2,0.3,0.4}
    at n_max = 20 (big-float thermodynamic-limit propagation)."""
    n_max = 20
    bits = 1024
    closed = bilanczos_run(
        LindbladianSpec.ising(IsingParams()), initial_x_density(BIG, bits), n_max
    )
    products = {}
    for eta in (Fraction(1, 10), Fraction(1, 5), Fraction(3, 10), Fraction(2, 5)):
        spec = LindbladianSpec.ising(IsingParams(eta=eta))
        d = bilanczos_run(spec, initial_x_density(BIG, bits), n_max)
        n_p = detect_np_reference(
            d.bc[: d.n_done + 1], closed.bc[: closed.n_done + 1], epsilon=0.08
        )
        assert n_p is not None, f"no deviation detected at eta={eta}"
        products[float(eta)] = float(eta) * n_p
    mean = sum(products.values()) / len(products)
    spread = max(abs(v - mean) / mean for v in products.values())
    report(
        "A4",
        spread <= 0.30,
        f"N_p*eta = { {k: round(v, 2) for k, v in products.items()} }, "
        f"mean {mean:.2f}, max deviation {spread:.1%} (<= 30%)",
    )


def test_A5_toy_model_exact_identities_and_fig4_point():
    """Formula == transfer oracle exactly to n = 40 for four rational etas;
    at eta = 1/6 the Lanczos deviation sits at N_p = 20 +- 3 and coincides with
    the first moment-ratio zero crossing within +-3."""
    for eta in (Fraction(1, 4), Fraction(1, 6), Fraction(1, 8), Fraction(1, 12)):
        f = toy_moments_formula(ToyParams(eta=eta), 40)
        g = toy_moments_oracle(ToyParams(eta=eta), 40)
        assert all(a.re == b.re and a.im == b.im for a, b in zip(f.mu, g.mu))
    p = ToyParams(J=Fraction(1), eta=Fraction(1, 6))
    seq = toy_moments_formula(p, 80)
    bc = from_moments_det(seq, 40)
    n_p = detect_np(bc, J=1.0, epsilon=1.0, mode="fit", fit_points=8)
    ratio = moment_ratio(seq, toy_moments_formula(ToyParams(), 80))
    crossing_order = 2 * ratio.first_sign_change
    ok = n_p is not None and abs(n_p - 20) <= 3 and abs(n_p - crossing_order) <= 3
    report(
        "A5",
        ok,
        f"formula==oracle exactly (n<=40, four etas); N_p={n_p} (20 +- 3), "
        f"ratio sign change at moment order {crossing_order} (within +-3 of N_p)",
    )


def test_A6_closed_system_reduction():
    """At eta = 0: a_n = 0 and b_n = c_n to 1e-10 for both pipelines, and the
    closed SYK products are J^2 n(n-1) + O(1/q)."""
    # Ising, exact and big-float
    d = bilanczos_run(LindbladianSpec.ising(IsingParams()), initial_x_density(), 12)
    ok_ising = all(not a for a in d.a) and all(
        abs(float(d.b[n]) - complex(d.c[n]).real) <= 1e-10 and complex(d.c[n]).imag == 0
        for n in range(1, 13)
    )
    db = bilanczos_run(
        LindbladianSpec.ising(IsingParams()), initial_x_density(BIG, 1024), 20
    )
    ok_ising &= all(abs(complex(a)) == 0 for a in db.a) and all(
        complex(db.b[n]) == complex(db.c[n]) for n in range(1, 21)
    )
    # SYK via moments (q = 1e3)
    q = 1000.0
    ms = syk_moments(SYKParams(q=q, J=1.0, eta=0.0), 40, bits=2048)
    bc, a = from_moments_recursive(ms, 20)
    ok_syk_a = all(abs(complex(x)) <= 1e-10 for x in a)
    worst = 0.0
    for n in range(2, 21):
        dev = abs(complex(bc[n]) - n * (n - 1))
        assert complex(bc[n]).imag == 0
        worst = max(worst, dev / ((2 * n + 1) / q))
    ok_syk = ok_syk_a and worst <= 1.0
    report(
        "A6",
        ok_ising and ok_syk,
        f"Ising a=0, b=c (exact & 1024-bit, n<=20); SYK a=0 and "
        f"|bc - n(n-1)| <= (2n+1)/q with margin ratio {worst:.3f}",
    )


def test_A7_moment_parity_and_ed_oracle():
    """Even moments real / odd imaginary (toy n<=40, Ising n<=12); the
    thermodynamic-limit Ising moments equal the dense periodic-chain oracle."""
    toy = toy_moments_formula(ToyParams(eta=Fraction(1, 6)), 40)
    spec = LindbladianSpec.ising(IsingParams(eta=Fraction(1, 10)))
    o0 = initial_x_density()
    ising = ising_moments(spec, o0, 12)
    ok_parity = toy.parity_defect() == 0.0 and ising.parity_defect() == 0.0
    dense = testkit.dense_ising_moments(IsingParams(eta=Fraction(1, 10)), L=10, n_max=8)
    worst = max(
        abs(complex(ising.mu[n]) - dense[n]) / max(abs(dense[n]), 1.0) for n in range(9)
    )
    exact = testkit.exact_ising_moments(IsingParams(eta=Fraction(1, 10)), L=6, n_max=4)
    ok_exact = all(
        ising.mu[n].re == exact[n].re and ising.mu[n].im == exact[n].im for n in range(5)
    )
    report(
        "A7",
        ok_parity and worst <= 1e-10 and ok_exact,
        f"parity defects exactly 0; dense L=10 oracle max rel diff {worst:.2e} "
        f"(<= 1e-10); L=6 exact oracle matches exactly for n<=4",
    )


def test_A8_spectral_tail_and_crossover():
    """omega^-2 tail with coefficient -i mu_1 beyond 2 omega*; fitted crossover
    within +-15% of the asymptotic formula for eta in {1e-3, 1e-4}; closed-
    system exponential slope -pi/2 within 2%."""
    details = []
    ok = True
    for eta in (1e-3, 1e-4):
        p = SYKParams(q=4, J=1.0, eta=eta)
        spec = CorrelatorSpec(family="syk_resummed", params=p)
        wstar = crossover_formula(p)
        curve = phi(spec, np.linspace(0.5, 40.0, 160))
        mu1 = tail_coefficient(spec)
        sel = curve.omega >= 2 * wstar
        flat = float(np.max(np.abs(curve.phi[sel] * curve.omega[sel] ** 2 / mu1 - 1)))
        rep = crossover_fit_report(curve)
        rel = abs(rep.omega_star - wstar) / wstar
        ok &= flat <= 0.05 and rel <= 0.15
        details.append(
            f"eta={eta:g}: tail dev {flat:.3f} (<=0.05), "
            f"w*_fit={rep.omega_star:.2f} vs formula {wstar:.2f} ({rel:.1%} <= 15%)"
        )
    p0 = SYKParams(q=4, J=1.0, eta=0.0)
    curve0 = phi(
        CorrelatorSpec(family="syk_resummed", params=p0),
        np.linspace(20.0, 36.0, 9),
        engine="mp",
        bits=320,
        tail_eps=1e-34,
    )
    slope = float(np.polyfit(curve0.omega, curve0.log_phi, 1)[0])
    rel0 = abs(slope + math.pi / 2) / (math.pi / 2)
    ok &= rel0 <= 0.02
    details.append(f"eta=0 slope {slope:.4f} vs -pi/2 ({rel0:.2%} <= 2%)")
    report("A8", ok, "; ".join(details))


def test_A9_syk_ratio_depends_only_on_eta():
    """moment_ratio at fixed eta agrees between q=500 and q=5000 to 1e-6."""
    worst = 0.0
    for eta in (0.1, 0.3):
        r_small = moment_ratio(
            syk_moments(SYKParams(q=500, J=1.0, eta=eta), 60, bits=1024),
            syk_moments(SYKParams(q=500, J=1.0, eta=0.0), 60, bits=1024),
        )
        r_large = moment_ratio(
            syk_moments(SYKParams(q=5000, J=1.0, eta=eta), 60, bits=1024),
            syk_moments(SYKParams(q=5000, J=1.0, eta=0.0), 60, bits=1024),
        )
        for a, b in zip(r_small.values[1:], r_large.values[1:]):
            worst = max(worst, abs(float(a) - float(b)) / max(abs(float(a)), 1e-300))
    report("A9", worst <= 1e-6, f"max rel difference q=500 vs q=5000: {worst:.2e} (<= 1e-6)")


def test_fig2b_smoke_oscillation_then_refocus():
    """Desk-scale stand-in for the deep SYK run: q=1e3, eta=0.5, N=60 shows
    growing oscillations past N_p and a refocus to linear growth at large n."""
    p = SYKParams(q=1000.0, J=1.0, eta=0.5)
    res = adaptive_precision_run(
        lambda bits: syk_moments(p, 120, bits=bits), 60, target_digits=10
    )
    n_p = detect_np(res.bc, J=1.0, epsilon=1.0, mode="syk")
    sq = [math.sqrt(abs(complex(x))) for x in res.bc]
    rel_dev = [abs(sq[n] - math.sqrt(n * (n - 1))) / n for n in range(1, 61)]
    burst = max(rel_dev[n_p : 30])
    late = max(rel_dev[45:60])
    ok = n_p is not None and n_p <= 15 and burst > 1.0 and late < 0.05
    report(
        "A-smoke",
        ok,
        f"N_p={n_p}, burst max rel dev {burst:.2f} (> 1), late-window max "
        f"{late:.3f} (< 0.05): oscillation then refocus",
    )
