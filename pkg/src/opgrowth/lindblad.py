"""Lindbladian superoperator action on translation-invariant Pauli operators.

The generator acts in the Heisenberg picture as

    L(O)  = [H, O] - i*eta*sum_i (h_i O h_i - O),        h_i = sigma^z_i,

so that exp(i L t) propagates the autocorrelation function and the dephasing
part is diagonal in the Pauli-string basis with eigenvalue +2i*eta*n_xy(P),
where n_xy counts the X/Y letters of P (the sites anticommuting with the
jumps).  With this convention even moments are real and odd moments purely
imaginary, and eta=0 reduces to the usual closed-system scheme.  The adjoint
generator is L_adj = [H, .] + i*eta*sum_i(...) (the unitary part is Hermitian
under the trace inner product, the dephasing part anti-Hermitian).

The Hamiltonian is any finite list of translation-invariant Pauli-orbit terms
with real coefficients; the tilted-field Ising chain used throughout is

    H = sum_i jxx*X_i X_{i+1} + hz*Z_i + hx*X_i,   defaults (1, -1.05, 0.5).

Hot path: operators store packed-integer string keys (see
:mod:`opgrowth.opspace`), the commutator with each Hamiltonian term is a
couple of XORs plus a phase-table lookup per overlap alignment, and the
dephasing factor is a popcount.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from . import scalars
from .opspace import _PHASE, PauliString, TIOperator, n_xy
from .scalars import BIG, EXACT, is_zero, make_complex, working_precision


@dataclass(frozen=True)
class IsingParams:
    """Couplings of the tilted-field Ising chain; defaults are the chaotic point."""

    jxx: Fraction = Fraction(1)
    hz: Fraction = Fraction(-21, 20)
    hx: Fraction = Fraction(1, 2)
    eta: Fraction = Fraction(0)

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("dissipation strength eta must be >= 0")


@dataclass(frozen=True)
class LindbladianSpec:
    """A translation-invariant Hamiltonian plus Z-dephasing of strength eta.

    Hamiltonian terms are (orbit representative, real coefficient) pairs; the
    convention flag names the sign/factor choices documented in the module
    docstring.
    """

    hamiltonian: Tuple[Tuple[PauliString, Fraction], ...]
    eta: Fraction = Fraction(0)
    jump_axis: str = "z"
    convention: str = "exp(iLt), dephasing +2i*eta*n_xy"

    def __post_init__(self):
        if self.jump_axis != "z":
            raise ValueError("only sigma^z dephasing jumps are supported")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        for ps, coeff in self.hamiltonian:
            if isinstance(coeff, complex):
                raise ValueError("Hamiltonian coefficients must be real")

    @classmethod
    def ising(cls, params: IsingParams) -> "LindbladianSpec":
        terms = (
            (PauliString.from_text("X0 X1"), params.jxx),
            (PauliString.from_text("Z0"), params.hz),
            (PauliString.from_text("X0"), params.hx),
        )
        return cls(hamiltonian=terms, eta=params.eta)

    def closed(self) -> "LindbladianSpec":
        """The eta=0 version of this generator."""
        return LindbladianSpec(self.hamiltonian, Fraction(0), self.jump_axis, self.convention)

    # -- run-config serialization ------------------------------------------

    def to_config(self) -> dict:
        cfg = {"jump_axis": self.jump_axis, "eta": str(self.eta)}
        ising_texts = {"X0 X1": "jxx", "Z0": "hz", "X0": "hx"}
        names = {ps.text(): coeff for ps, coeff in self.hamiltonian}
        if set(names) == set(ising_texts):
            cfg["model"] = "ising"
            for text, key in ising_texts.items():
                cfg[key] = str(names[text])
        else:
            cfg["model"] = "custom"
            cfg["hamiltonian"] = ";".join(f"{ps.text()}:{c}" for ps, c in self.hamiltonian)
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "LindbladianSpec":
        eta = scalars.parse_rational(str(cfg.get("eta", "0")))
        if cfg.get("model") == "ising":
            params = IsingParams(
                jxx=scalars.parse_rational(str(cfg.get("jxx", "1"))),
                hz=scalars.parse_rational(str(cfg.get("hz", "-21/20"))),
                hx=scalars.parse_rational(str(cfg.get("hx", "1/2"))),
                eta=eta,
            )
            return cls.ising(params)
        terms = []
        for chunk in cfg["hamiltonian"].split(";"):
            text, coeff = chunk.rsplit(":", 1)
            terms.append((PauliString.from_text(text), scalars.parse_rational(coeff)))
        return cls(hamiltonian=tuple(terms), eta=eta)


def initial_x_density(kind: str = EXACT, bits=None) -> TIOperator:
    """The normalized density of sum_i X_i: one orbit, unit coefficient, (O|O)=1."""
    ctx = working_precision(bits) if kind == BIG else nullcontext()
    with ctx:
        return TIOperator.from_strings(
            [(PauliString.from_text("X0"), make_complex(kind, 1))], kind, bits
        )


# ---------------------------------------------------------------------------
# kernel


def _compile_hamiltonian(spec: LindbladianSpec, kind: str):
    """Per-term data for the packed kernel: (site-letter pairs, width, phase factors).

    phase factors: fbase[k] = 2 * i^k * coeff, the commutator weight when the
    accumulated product phase is i^k.
    """
    compiled = []
    for ps, coeff in spec.hamiltonian:
        anchored, _ = ps.anchored()
        sites = anchored.sites
        width = sites[-1][0] + 1
        two_c = 2 * Fraction(coeff) if isinstance(coeff, (int, Fraction)) else 2 * coeff
        fbase = (
            make_complex(kind, two_c),
            make_complex(kind, 0, two_c),
            make_complex(kind, -two_c),
            make_complex(kind, 0, -two_c),
        )
        compiled.append((sites, width, fbase))
    return compiled


def _apply_kernel(spec: LindbladianSpec, op: TIOperator, unitary: bool, eta_sign: int) -> TIOperator:
    """One Lindbladian application; eta_sign = +1 (L), -1 (L_adj), 0 (unitary only)."""
    kind = op.kind
    ctx = working_precision(op.bits) if kind == BIG else nullcontext()
    with ctx:
        hterms = _compile_hamiltonian(spec, kind) if unitary else []
        use_diss = eta_sign != 0 and spec.eta != 0
        diss = []
        if use_diss:
            # dephasing eigenvalue 2i*eta*m, tabulated in m
            step = make_complex(kind, 0, 2 * Fraction(eta_sign) * Fraction(spec.eta))
            diss = [step * m for m in range(64)]
        out: dict = {}
        phase_tab = _PHASE
        for key, c in op.terms.items():
            w = (key.bit_length() + 1) // 2
            for sites, width, fbase in hterms:
                for off in range(1 - width, w):
                    if off >= 0:
                        pk = key
                        hs = off
                    else:
                        pk = key << (2 * (-off))
                        hs = 0
                    anti = 0
                    iexp = 0
                    nk = pk
                    for s, l in sites:
                        shift = 2 * (s + hs)
                        lp = (pk >> shift) & 3
                        if lp and lp != l:
                            anti ^= 1
                        iexp += phase_tab[l][lp]
                        nk ^= l << shift
                    if not anti:
                        continue
                    while not nk & 3:
                        nk >>= 2
                    contrib = fbase[iexp & 3] * c
                    prev = out.get(nk)
                    out[nk] = contrib if prev is None else prev + contrib
            if use_diss:
                m = n_xy(key)
                if m:
                    if m >= len(diss):
                        step = diss[1]
                        diss.extend(step * k for k in range(len(diss), m + 1))
                    contrib = diss[m] * c
                    prev = out.get(key)
                    out[key] = contrib if prev is None else prev + contrib
        for dead in [k for k, v in out.items() if is_zero(v)]:
            del out[dead]
        return TIOperator(kind, op.bits, out)


def apply_unitary(spec: LindbladianSpec, op: TIOperator) -> TIOperator:
    """[H, O] summed over the translation orbit of every Hamiltonian term."""
    return _apply_kernel(spec, op, unitary=True, eta_sign=0)


def apply_dissipator(spec: LindbladianSpec, op: TIOperator) -> TIOperator:
    """Dephasing part: P -> 2i*eta*n_xy(P) * P, diagonal in the string basis."""
    return _apply_kernel(spec, op, unitary=False, eta_sign=1)


def apply(spec: LindbladianSpec, op: TIOperator) -> TIOperator:
    """Full generator L = unitary + dissipator."""
    return _apply_kernel(spec, op, unitary=True, eta_sign=1)


def apply_adjoint(spec: LindbladianSpec, op: TIOperator) -> TIOperator:
    """Adjoint generator L_adj = unitary - dissipator."""
    return _apply_kernel(spec, op, unitary=True, eta_sign=-1)
