import math
from fractions import Fraction

import gmpy2
import pytest

from opgrowth.hankel import (
    MomentDegeneracyError,
    PrecisionLadderError,
    adaptive_precision_run,
    from_moments_det,
    from_moments_recursive,
    hankel_workspace,
)
from opgrowth.moments import (
    MomentSequence,
    SYKParams,
    ToyParams,
    syk_bc_closed_form,
    syk_moments,
    toy_moments_formula,
)
from opgrowth.scalars import BIG, EXACT, ExactComplex, working_precision
from opgrowth.testkit import permutation_determinant


def exact_seq(values, model="custom"):
    return MomentSequence(mu=[ExactComplex(v) for v in values], model=model, kind=EXACT)


def gaussian_moments(N):
    # mu_{2n} = (2n-1)!!, mu_odd = 0
    mu = []
    for n in range(N + 1):
        if n % 2:
            mu.append(0)
        else:
            mu.append(math.prod(range(1, n, 2)) if n else 1)
    return exact_seq(mu)


# ---------------------------------------------------------------------------
# determinant route


def test_gaussian_moments_give_bc_n_equals_n():
    m = gaussian_moments(20)
    bc = from_moments_det(m, 10)
    for n in range(1, 11):
        assert bc[n] == ExactComplex(n)


def test_minors_against_permutation_expansion():
    m = gaussian_moments(12)
    ws = hankel_workspace(m, 5)
    for n in range(6):
        M = [[m.mu[i + j] for j in range(n + 1)] for i in range(n + 1)]
        assert ws.K_at(n) == permutation_determinant(M)
    # workspace invariants
    assert ws.K_at(-1) == ExactComplex(1) and ws.K_at(0) == ExactComplex(1)
    for n in range(1, 6):
        assert ws.bc[n] * ws.K_at(n - 1) * ws.K_at(n - 1) == ws.K_at(n) * ws.K_at(n - 2)


def test_toy_closed_bc_vs_direct_tridiagonalization():
    # Lanczos on the explicit hopping generator in the non-orthogonal position
    # basis (Gram <p|p'> = (p+p')! for even sums): an independent route.
    N = 8
    m = toy_moments_formula(ToyParams(J=Fraction(1)), 2 * N + 2)
    bc_det = from_moments_det(m, N)

    def gram(p, pp):
        s = p + pp
        return Fraction(math.factorial(s)) if s % 2 == 0 else Fraction(0)

    def pair(u, v):
        total = Fraction(0)
        for p, up in enumerate(u):
            if not up:
                continue
            for pp, vp in enumerate(v):
                if vp:
                    total += up * vp * gram(p, pp)
        return total

    def hop(u):
        out = [Fraction(0)] * (len(u) + 1)
        for p, up in enumerate(u):
            out[p + 1] += up
        return out

    V_prev, V = None, [Fraction(1)]
    w_prev, bc_direct = None, [Fraction(0)]
    a_prev = Fraction(0)
    g_prev = Fraction(0)
    w = pair(V, V)
    for n in range(1, N + 1):
        HV = hop(V)
        a_n = pair(V, HV) / w  # = 0 by parity, kept for structure
        V_next = [h - a_n * v for h, v in zip(HV, V + [Fraction(0)])]
        if V_prev is not None:
            for i, vp in enumerate(V_prev):
                V_next[i] -= g_prev * vp
        w_next = pair(V_next, V_next)
        g_prev = w_next / w
        bc_direct.append(g_prev)
        V_prev, V, w = V, V_next, w_next
    for n in range(1, N + 1):
        assert bc_det[n].im == 0 and bc_det[n].re == bc_direct[n]


def test_two_point_measure_degenerates_at_2():
    mu = [(1 + (-1) ** n) // 2 for n in range(9)]
    m = exact_seq(mu)
    bc = from_moments_det(m, 1)
    assert bc[1] == ExactComplex(1)
    with pytest.raises(MomentDegeneracyError) as err:
        from_moments_det(m, 4)
    assert err.value.index == 2
    assert err.value.partial_bc[1] == ExactComplex(1)
    with pytest.raises(MomentDegeneracyError) as err2:
        from_moments_recursive(m, 4)
    assert err2.value.index == 2
    # same behavior through the big-float route
    with working_precision(128):
        mb = MomentSequence(
            mu=[gmpy2.mpc(v) for v in mu], model="custom", kind=BIG, bits=128
        )
        with pytest.raises(MomentDegeneracyError):
            from_moments_det(mb, 4)


def test_moment_count_precondition():
    m = gaussian_moments(8)
    with pytest.raises(ValueError):
        from_moments_det(m, 5)
    with pytest.raises(ValueError):
        from_moments_recursive(m, 5)


# ---------------------------------------------------------------------------
# recursive route and dual-path identity


def test_dual_path_identity_exact():
    m = toy_moments_formula(ToyParams(J=Fraction(1), eta=Fraction(1, 6)), 40)
    bc_det = from_moments_det(m, 20)
    bc_rec, a = from_moments_recursive(m, 20)
    for n in range(1, 21):
        assert bc_det[n] == bc_rec[n]
    assert len(a) == 20


def test_recursive_a_vanishes_for_symmetric_measure():
    m = gaussian_moments(16)
    bc, a = from_moments_recursive(m, 8)
    assert all(not x for x in a)
    assert all(bc[n] == ExactComplex(n) for n in range(1, 9))


def test_dual_path_identity_big_float():
    p = SYKParams(q=800, J=1.0, eta=0.35)
    m = syk_moments(p, 40, bits=1024)
    bc_det = from_moments_det(m, 20)
    bc_rec, _ = from_moments_recursive(m, 20)
    with working_precision(1024):
        for n in range(1, 21):
            scale = max(abs(bc_det[n]), gmpy2.mpfr(1e-30))
            assert abs(bc_det[n] - bc_rec[n]) / scale < 1e-200


def test_syk_bc_tracks_closed_form_with_q2_residual():
    n_chk = 12
    res = {}
    for q in (1000.0, 10000.0):
        p = SYKParams(q=q, J=1.0, eta=0.2)
        m = syk_moments(p, 2 * n_chk, bits=2048)
        bc, _ = from_moments_recursive(m, n_chk)
        with working_precision(2048):
            res[q] = [abs(bc[n] - syk_bc_closed_form(p, n, bits=2048)) for n in range(1, n_chk + 1)]
    for r3, r4 in zip(res[1000.0], res[10000.0]):
        assert 50 <= float(r3 / r4) <= 200


def test_scale_covariance():
    m = toy_moments_formula(ToyParams(J=Fraction(1), eta=Fraction(1, 4)), 24)
    s = Fraction(3, 2)
    scaled = MomentSequence(
        mu=[ExactComplex(s**n) * mu for n, mu in enumerate(m.mu)],
        model=m.model,
        kind=EXACT,
    )
    bc = from_moments_det(m, 12)
    bc_s = from_moments_det(scaled, 12)
    for n in range(1, 13):
        assert bc_s[n] == ExactComplex(s * s) * bc[n]


def test_positivity_closed_systems():
    for m, N in ((gaussian_moments(24), 12), (toy_moments_formula(ToyParams(), 40), 20)):
        bc = from_moments_det(m, N)
        for n in range(1, N + 1):
            assert bc[n].im == 0 and bc[n].re > 0


# ---------------------------------------------------------------------------
# hankel-level phenomenology: first deviation of sqrt(bc) happens at e^{2 N_p beta} ~ q


def test_sqrt_bc_deviation_point_tracks_log_q():
    for q in (5e2, 1e3, 1e4):
        for eta in (0.1, 0.3, 0.5):
            p = SYKParams(q=q, J=1.0, eta=eta)
            beta = p.alpha_beta_float()[1]
            n_p = None
            for n in range(2, 400):
                dev = abs(
                    math.sqrt(abs(float(syk_bc_closed_form(p, n, bits=256))))
                    - math.sqrt(n * (n - 1))
                )
                if dev > 1.0:
                    n_p = n
                    break
            assert n_p is not None
            assert abs(2 * n_p * beta - math.log(q)) <= 1.5


# ---------------------------------------------------------------------------
# adaptive precision ladder


def test_ladder_exact_short_circuits():
    m = toy_moments_formula(ToyParams(J=Fraction(1), eta=Fraction(1, 6)), 24)
    res = adaptive_precision_run(lambda bits: m, 12, start_bits=256)
    assert res.bits_used is None and res.rungs == []
    ref = from_moments_recursive(m, 12)[0]
    assert all(res.bc[n] == ref[n] for n in range(1, 13))


def test_ladder_converges_and_precision_monotone_in_depth():
    p = SYKParams(q=500, J=1.0, eta=0.5)

    def gen(bits):
        return syk_moments(p, 120, bits=bits)

    shallow = adaptive_precision_run(gen, 20, target_digits=10, start_bits=256)
    deep = adaptive_precision_run(gen, 60, target_digits=10, start_bits=256)
    assert shallow.bits_used is not None and deep.bits_used is not None
    assert deep.bits_used >= shallow.bits_used
    assert deep.rungs == sorted(deep.rungs)


def test_ladder_cap_error_on_truncated_generator():
    # moments carrying only ~12 correct digits, the rest rung-dependent noise:
    # the ladder must hit its cap instead of returning silent garbage
    p = SYKParams(q=500, J=1.0, eta=0.5)

    def bad_gen(bits):
        seq = syk_moments(p, 40, bits=bits)
        with working_precision(bits):
            noisy = [
                mu * (1 + gmpy2.mpfr((n * bits) % 7 - 3) * 1e-12)
                for n, mu in enumerate(seq.mu)
            ]
        return MomentSequence(mu=noisy, model="syk", kind=BIG, bits=bits)

    with pytest.raises(PrecisionLadderError):
        adaptive_precision_run(bad_gen, 10, target_digits=14, start_bits=128, cap_bits=2048)


def test_load_moments_csv_roundtrip(tmp_path):
    from opgrowth.hankel import load_moments_csv
    from opgrowth.scalars import format_real, imag_part, real_part

    seq = toy_moments_formula(ToyParams(J=Fraction(1), eta=Fraction(1, 6)), 24)
    path = tmp_path / "moments.csv"
    lines = ["n,mu_re,mu_im"]
    for n, mu in enumerate(seq.mu):
        lines.append(f"{n},{format_real(real_part(mu))},{format_real(imag_part(mu))}")
    path.write_text("\n".join(lines) + "\n")
    loaded = load_moments_csv(str(path), bits=256)
    assert loaded.kind == BIG and len(loaded) == 25
    bc_ref = from_moments_recursive(seq, 12)[0]
    bc_got = from_moments_recursive(loaded, 12)[0]
    for n in range(1, 13):
        rel = abs(complex(bc_got[n]) - complex(bc_ref[n])) / abs(complex(bc_ref[n]))
        assert rel < 1e-18  # limited only by the 24-digit CSV rendering
    bad = tmp_path / "bad.csv"
    bad.write_text("n,mu_re\n0,1\n")
    with pytest.raises(ValueError):
        load_moments_csv(str(bad))
    gap = tmp_path / "gap.csv"
    gap.write_text("n,mu_re,mu_im\n0,1,0\n2,1,0\n")
    with pytest.raises(ValueError):
        load_moments_csv(str(gap))
