"""Command-line entry point wiring models to pipelines.

Subcommands
-----------
ising-lanczos   bi-Lanczos coefficients of the dissipative tilted-field Ising
                chain over an eta list; per-eta ``lanczos_eta*.csv`` plus
                ``np_scaling.csv``.
syk             moments -> Hankel -> deviation point over a (q, eta) grid;
                per-point ``lanczos_from_moments_*.csv`` (with the closed-form
                comparison column) plus ``np_vs_logq_over_eta.csv``.
toy             exact toy-model moments, Lanczos products and moment ratio.
ratio           dissipative/closed moment ratios for all three families.
spectral        spectral function phi(omega) per eta with tail and crossover
                annotations in the JSON sidecar.

Every emitted file gets a ``<name>.meta.json`` sidecar carrying the resolved
configuration, tool version and the precision actually used, so any output can
be regenerated from its sidecar alone.  Files are written atomically
(temp + rename) and runs are deterministic for a given config.

Config files are flat ``section.key=value`` lines (e.g. ``model.eta=0.1``);
command-line flags override file values.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, bilanczos, hankel, lindblad, moments, spectral
from .scalars import BIG, EXACT, format_real, imag_part, parse_rational, real_part


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, int):
        return str(x)
    return format_real(x)


def _fmt_complex_parts(z):
    return format_real(real_part(z)), format_real(imag_part(z))


def write_csv(path: str, header, rows):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")
    os.replace(tmp, path)


def write_sidecar(path: str, payload: dict):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _sidecar_base(cfg_dict: dict, **extra) -> dict:
    payload = {"tool": "opgrowth", "version": __version__, "config": cfg_dict}
    payload.update(extra)
    return payload


def _eta_token(text: str) -> str:
    return text.replace("/", "_").replace("-", "m")


def lanczos_rows(data: bilanczos.LanczosData):
    """Rows for the lanczos.csv schema: n, a_re, a_im, b, c_re, c_im, bc_re, bc_im, sqrt_bc_abs."""
    rows = []
    sq = data.sqrt_bc_abs()
    for n in range(data.n_done + 1):
        if n < len(data.a):
            a_re, a_im = _fmt_complex_parts(data.a[n])
        else:
            a_re = a_im = ""
        if n == 0:
            rows.append([0, a_re, a_im, _fmt(0.0), _fmt(0.0), _fmt(0.0), _fmt(0.0), _fmt(0.0), _fmt(0.0)])
            continue
        bc_re, bc_im = _fmt_complex_parts(data.bc[n])
        c_re, c_im = _fmt_complex_parts(data.c[n])
        rows.append(
            [n, a_re, a_im, format_real(data.b[n]), c_re, c_im, bc_re, bc_im, repr(sq[n])]
        )
    return rows


def moments_rows(seq: moments.MomentSequence):
    rows = []
    for n, mu in enumerate(seq.mu):
        re, im = _fmt_complex_parts(mu)
        rows.append([n, re, im])
    return rows


def bc_rows(bc, bits, closed_ref=None):
    """Rows for lanczos_from_moments.csv (+ optional closed-form comparison column)."""
    rows = []
    for n in range(1, len(bc)):
        re, im = _fmt_complex_parts(bc[n])
        sq = math.sqrt(abs(complex(bc[n])))
        row = [n, re, im, repr(sq), bits if bits is not None else 0]
        if closed_ref is not None:
            row.append(format_real(closed_ref[n]))
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# config handling


CONFIG_KEYS = {
    "eta": "model.eta",
    "eta_list": "model.eta_list",
    "q": "model.q",
    "q_list": "model.q_list",
    "J": "model.j",
    "jxx": "model.jxx",
    "hz": "model.hz",
    "hx": "model.hx",
    "n_max": "run.n_max",
    "epsilon": "run.epsilon",
    "exact": "run.exact",
    "precision_bits": "run.precision_bits",
    "target_digits": "run.target_digits",
    "out_dir": "run.out_dir",
    "fit_points": "run.fit_points",
    "omega_min": "spectral.omega_min",
    "omega_max": "spectral.omega_max",
    "omega_points": "spectral.omega_points",
    "n_max_syk": "run.n_max_syk",
    "n_max_toy": "run.n_max_toy",
    "n_max_ising": "run.n_max_ising",
    "workers": "run.workers",
    "seed": "run.seed",
}


def load_config(path: str) -> dict:
    cfg = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line (expected key=value): {line!r}")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


CONFIG_TYPES = {
    "n_max": int,
    "n_max_syk": int,
    "n_max_toy": int,
    "n_max_ising": int,
    "precision_bits": int,
    "target_digits": int,
    "fit_points": int,
    "omega_points": int,
    "omega_min": float,
    "omega_max": float,
    "epsilon": float,
    "workers": int,
    "seed": int,
}


def resolve(args: argparse.Namespace, file_cfg: dict) -> argparse.Namespace:
    """Fill argparse Nones from the config file (flags win)."""
    for dest, key in CONFIG_KEYS.items():
        if getattr(args, dest, None) is None and key in file_cfg:
            caster = CONFIG_TYPES.get(dest, str)
            setattr(args, dest, caster(file_cfg[key]))
    return args


def _resolved_dict(args: argparse.Namespace) -> dict:
    skip = {"func", "config"}
    return {
        k: (str(v) if isinstance(v, Fraction) else v)
        for k, v in sorted(vars(args).items())
        if k not in skip and v is not None
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_ising_lanczos(args) -> int:
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    etas = _parse_list(args.eta_list or args.eta or "0.1")
    bits = int(args.precision_bits or 1024)
    n_max = int(args.n_max or 20)
    epsilon = float(args.epsilon if args.epsilon is not None else 0.08)
    exact = _truthy(args.exact)
    base = lindblad.IsingParams(
        jxx=parse_rational(str(args.jxx or "1")),
        hz=parse_rational(str(args.hz or "-21/20")),
        hx=parse_rational(str(args.hx or "1/2")),
    )

    def run(eta: Fraction) -> bilanczos.LanczosData:
        spec = lindblad.LindbladianSpec.ising(
            lindblad.IsingParams(jxx=base.jxx, hz=base.hz, hx=base.hx, eta=eta)
        )
        o0 = lindblad.initial_x_density(EXACT if exact else BIG, None if exact else bits)
        return bilanczos.bilanczos_run(spec, o0, n_max)

    closed = run(Fraction(0))
    np_rows = []
    for tok in etas:
        eta = parse_rational(tok)
        data = run(eta) if eta != 0 else closed
        name = f"lanczos_eta{_eta_token(tok)}.csv"
        path = os.path.join(out, name)
        write_csv(
            path,
            ["n", "a_re", "a_im", "b", "c_re", "c_im", "bc_re", "bc_im", "sqrt_bc_abs"],
            lanczos_rows(data),
        )
        n_p = (
            bilanczos.detect_np_reference(
                data.bc[: data.n_done + 1], closed.bc[: closed.n_done + 1], epsilon=epsilon
            )
            if eta != 0
            else None
        )
        write_sidecar(
            path + ".meta.json",
            _sidecar_base(
                _resolved_dict(args),
                eta=tok,
                precision_bits=None if exact else bits,
                scalar_kind=EXACT if exact else BIG,
                prune_rel=data.prune_rel,
                n_done=data.n_done,
                breakdown=data.breakdown,
                n_p=n_p,
                detection={"mode": "reference-curve", "epsilon": epsilon},
            ),
        )
        np_rows.append([tok, n_p if n_p is not None else ""])
    np_path = os.path.join(out, "np_scaling.csv")
    write_csv(np_path, ["eta", "n_p"], np_rows)
    write_sidecar(
        np_path + ".meta.json",
        _sidecar_base(
            _resolved_dict(args),
            detection={"mode": "reference-curve", "epsilon": epsilon},
            precision_bits=None if exact else bits,
        ),
    )
    return 0


def _syk_task(task: dict) -> list:
    """One independent (q, eta) grid point: writes its own files atomically.

    Module-level and dict-driven so a process pool can run grid points in
    parallel; the returned summary row is order-stable regardless of pool size.
    """
    q, tok = task["q"], task["eta_tok"]
    eta = float(parse_rational(tok))
    N = task["n_max"]
    p = moments.SYKParams(q=q, J=task["J"], eta=eta)
    res = hankel.adaptive_precision_run(
        lambda bits: moments.syk_moments(p, 2 * N, bits=bits),
        N,
        target_digits=task["target_digits"],
        start_bits=task["precision_bits"],
    )
    closed_ref = [None] + [
        moments.syk_bc_closed_form(p, n, bits=res.bits_used or task["precision_bits"])
        for n in range(1, N + 1)
    ]
    n_p = bilanczos.detect_np(res.bc, J=task["J"], epsilon=task["epsilon"], mode="syk")
    path = os.path.join(
        task["out_dir"], f"lanczos_from_moments_q{int(q)}_eta{_eta_token(tok)}.csv"
    )
    write_csv(
        path,
        ["n", "bc_re", "bc_im", "sqrt_bc_abs", "precision_bits", "bc_closed"],
        bc_rows(res.bc, res.bits_used, closed_ref),
    )
    write_sidecar(
        path + ".meta.json",
        _sidecar_base(
            task["resolved"],
            q=q,
            eta=tok,
            precision_bits=res.bits_used,
            ladder_rungs=res.rungs,
            route=res.route,
            n_p=n_p,
        ),
    )
    x = math.log(q) / eta if eta else ""
    return [int(q), tok, x, n_p if n_p is not None else ""]


def cmd_syk(args) -> int:
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    qs = [float(parse_rational(t)) for t in _parse_list(args.q_list or args.q or "1000")]
    etas = _parse_list(args.eta_list or args.eta or "0.5")
    tasks = [
        {
            "q": q,
            "eta_tok": tok,
            "n_max": int(args.n_max or 20),
            "precision_bits": int(args.precision_bits or 1024),
            "target_digits": int(args.target_digits or 10),
            "J": float(parse_rational(str(args.J or "1"))),
            "epsilon": float(args.epsilon if args.epsilon is not None else 1.0),
            "out_dir": out,
            "resolved": _resolved_dict(args),
        }
        for q in qs
        for tok in etas
    ]
    workers = int(args.workers or 1)
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_syk_task, tasks))
    else:
        rows = [_syk_task(t) for t in tasks]
    np_path = os.path.join(out, "np_vs_logq_over_eta.csv")
    write_csv(np_path, ["q", "eta", "logq_over_eta", "n_p"], rows)
    write_sidecar(
        np_path + ".meta.json",
        _sidecar_base(
            _resolved_dict(args),
            epsilon=float(args.epsilon if args.epsilon is not None else 1.0),
        ),
    )
    return 0


def cmd_toy(args) -> int:
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    tok = args.eta or "1/6"
    p = moments.ToyParams(
        J=parse_rational(str(args.J or "1")), eta=parse_rational(tok)
    )
    N = int(args.n_max or 40)
    seq = moments.toy_moments_formula(p, 2 * N)
    oracle = moments.toy_moments_oracle(p, 2 * N)
    if any(
        (a.re != b.re or a.im != b.im) for a, b in zip(seq.mu, oracle.mu)
    ):
        raise AssertionError("toy formula and transfer oracle disagree")
    mom_path = os.path.join(out, "moments.csv")
    write_csv(mom_path, ["n", "mu_re", "mu_im"], moments_rows(seq))
    bc = hankel.from_moments_det(seq, N)
    bc_path = os.path.join(out, "lanczos_from_moments.csv")
    write_csv(
        bc_path,
        ["n", "bc_re", "bc_im", "sqrt_bc_abs", "precision_bits"],
        bc_rows(bc, None),
    )
    closed = moments.toy_moments_formula(moments.ToyParams(J=p.J), 2 * N)
    ratio = moments.moment_ratio(seq, closed)
    ratio_path = os.path.join(out, "ratio.csv")
    write_csv(
        ratio_path,
        ["n", "ratio"],
        [[n, format_real(v)] for n, v in enumerate(ratio.values)],
    )
    fit_points = int(args.fit_points or 8)
    eps = float(args.epsilon if args.epsilon is not None else 1.0)
    n_p = bilanczos.detect_np(bc, J=float(p.J), epsilon=eps, mode="fit", fit_points=fit_points)
    meta = _sidecar_base(
        _resolved_dict(args),
        eta=tok,
        scalar_kind=EXACT,
        n_p=n_p,
        detection={"mode": "fit", "epsilon": eps, "fit_points": fit_points},
        ratio_first_sign_change=ratio.first_sign_change,
        ratio_first_sign_change_moment_order=(
            2 * ratio.first_sign_change if ratio.first_sign_change else None
        ),
    )
    for path in (mom_path, bc_path, ratio_path):
        write_sidecar(path + ".meta.json", meta)
    return 0


def cmd_ratio(args) -> int:
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    etas = _parse_list(args.eta_list or args.eta or "0.2")
    bits = int(args.precision_bits or 1024)
    q = float(parse_rational(str(args.q or "500")))
    n_syk = int(args.n_max_syk or 60)
    n_toy = int(args.n_max_toy or 40)
    n_ising = int(args.n_max_ising or 12)
    for tok in etas:
        eta = parse_rational(tok)
        # SYK
        dis = moments.syk_moments(moments.SYKParams(q=q, J=1.0, eta=float(eta)), n_syk, bits=bits)
        clo = moments.syk_moments(moments.SYKParams(q=q, J=1.0, eta=0.0), n_syk, bits=bits)
        _write_ratio(out, "syk", tok, moments.moment_ratio(dis, clo), args)
        # toy (exact)
        dis = moments.toy_moments_formula(moments.ToyParams(eta=eta), n_toy)
        clo = moments.toy_moments_formula(moments.ToyParams(), n_toy)
        _write_ratio(out, "toy", tok, moments.moment_ratio(dis, clo), args)
        # Ising (exact thermodynamic-limit moments)
        o0 = lindblad.initial_x_density(EXACT)
        spec = lindblad.LindbladianSpec.ising(lindblad.IsingParams(eta=eta))
        dis = moments.ising_moments(spec, o0, n_ising)
        clo = moments.ising_moments(spec.closed(), o0, n_ising)
        _write_ratio(out, "ising", tok, moments.moment_ratio(dis, clo), args)
    return 0


def _write_ratio(out, family, tok, ratio: moments.RatioData, args):
    path = os.path.join(out, f"ratio_{family}_eta{_eta_token(tok)}.csv")
    write_csv(
        path, ["n", "ratio"], [[n, format_real(v)] for n, v in enumerate(ratio.values)]
    )
    write_sidecar(
        path + ".meta.json",
        _sidecar_base(
            _resolved_dict(args),
            family=family,
            eta=tok,
            first_sign_change=ratio.first_sign_change,
            max_parity_defect=ratio.max_parity_defect,
        ),
    )


def cmd_spectral(args) -> int:
    out = args.out_dir
    os.makedirs(out, exist_ok=True)
    etas = _parse_list(args.eta_list or args.eta or "1e-3")
    q = float(parse_rational(str(args.q or "4")))
    w0 = float(args.omega_min if args.omega_min is not None else 0.5)
    w1 = float(args.omega_max if args.omega_max is not None else 40.0)
    npts = int(args.omega_points or 160)
    grid = np.linspace(w0, w1, npts)
    for tok in etas:
        eta = float(parse_rational(tok))
        p = moments.SYKParams(q=q, J=1.0, eta=eta)
        spec = spectral.CorrelatorSpec(family="syk_resummed", params=p)
        curve = spectral.phi(spec, grid)
        try:
            curve.omega_star_formula = spectral.crossover_formula(p)
        except ValueError:
            curve.omega_star_formula = None
        fit_info = None
        try:
            rep = spectral.crossover_fit_report(curve)
            curve.omega_star_fit = rep.omega_star
            fit_info = {
                "exp_window": rep.exp_window,
                "pow_window": rep.pow_window,
                "exp_slope": rep.exp_slope,
                "pow_slope": rep.pow_slope,
                "r2_exp": rep.r2_exp,
                "r2_pow": rep.r2_pow,
            }
        except spectral.RegimeNotFoundError as err:
            fit_info = {"error": str(err)}
        path = os.path.join(out, f"spectral_eta{_eta_token(tok)}.csv")
        write_csv(
            path,
            ["omega", "phi"],
            [[repr(float(w)), repr(float(v))] for w, v in zip(curve.omega, curve.phi)],
        )
        write_sidecar(
            path + ".meta.json",
            _sidecar_base(
                _resolved_dict(args),
                eta=tok,
                q=q,
                tail_coefficient=curve.tail_coefficient,
                omega_star_fit=curve.omega_star_fit,
                omega_star_formula=curve.omega_star_formula,
                fit=fit_info,
                quadrature=curve.meta,
            ),
        )
    return 0


# ---------------------------------------------------------------------------
# parser


def _parse_list(text):
    if text is None:
        return []
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    if v is None:
        return False
    return str(v).lower() in ("1", "true", "yes", "on")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="opgrowth",
        description="Operator-growth diagnostics for dephasing-driven open systems",
    )
    top.add_argument("--version", action="version", version=f"opgrowth {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file; flags override")
        p.add_argument("--out-dir", dest="out_dir", default=None)
        p.add_argument("--eta", default=None, help="dissipation strength (rational ok: 1/6)")
        p.add_argument("--eta-list", dest="eta_list", default=None, help="comma-separated etas")
        p.add_argument("--J", default=None, help="coupling scale")
        p.add_argument("--n-max", dest="n_max", default=None, type=int)
        p.add_argument("--epsilon", default=None, type=float, help="deviation threshold")
        p.add_argument("--exact", default=None, action="store_const", const=True,
                       help="exact rational arithmetic where supported")
        p.add_argument("--precision-bits", dest="precision_bits", default=None, type=int)
        p.add_argument("--seed", default=None, type=int,
                       help="reserved; no stochastic paths exist yet (recorded in sidecars)")

    p = sub.add_parser("ising-lanczos", help="bi-Lanczos on the dissipative Ising chain")
    common(p)
    p.add_argument("--jxx", default=None)
    p.add_argument("--hz", default=None)
    p.add_argument("--hx", default=None)
    p.set_defaults(func=cmd_ising_lanczos)

    p = sub.add_parser("syk", help="large-q SYK moments -> Hankel -> deviation point")
    common(p)
    p.add_argument("--q", default=None)
    p.add_argument("--q-list", dest="q_list", default=None)
    p.add_argument("--target-digits", dest="target_digits", default=None, type=int)
    p.add_argument("--workers", default=None, type=int,
                   help="grid points run in a process pool of this size")
    p.set_defaults(func=cmd_syk)

    p = sub.add_parser("toy", help="exact toy-model moments and Lanczos products")
    common(p)
    p.add_argument("--fit-points", dest="fit_points", default=None, type=int)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("ratio", help="dissipative/closed moment ratios, all families")
    common(p)
    p.add_argument("--q", default=None)
    p.add_argument("--n-max-syk", dest="n_max_syk", default=None, type=int)
    p.add_argument("--n-max-toy", dest="n_max_toy", default=None, type=int)
    p.add_argument("--n-max-ising", dest="n_max_ising", default=None, type=int)
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("spectral", help="cosine-transform spectral function, tail, crossover")
    common(p)
    p.add_argument("--q", default=None)
    p.add_argument("--omega-min", dest="omega_min", default=None, type=float)
    p.add_argument("--omega-max", dest="omega_max", default=None, type=float)
    p.add_argument("--omega-points", dest="omega_points", default=None, type=int)
    p.set_defaults(func=cmd_spectral)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    file_cfg = load_config(args.config) if args.config else {}
    args = resolve(args, file_cfg)
    if args.out_dir is None:
        args.out_dir = "out"
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
