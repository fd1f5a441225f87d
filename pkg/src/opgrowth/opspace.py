"""Sparse Pauli-string algebra on an infinite 1D chain.

Extensive translation-invariant operators O = sum_i T_i(o) are stored as one
*anchored* representative per translation orbit: the representative string has
its leftmost non-identity site at 0.  With that convention the per-site
density inner product collapses to a plain dot product over orbit
representatives (distinct anchored strings never overlap under translation),
which is what makes thermodynamic-limit iteration finite.

Internally an anchored string is packed into a single integer, two bits per
site (I=0, X=1, Y=2, Z=3, site s at bits 2s..2s+1).  With this letter coding,
left-multiplying site s by letter a is ``key ^ (a << 2s)`` plus a phase from a
16-entry table -- the hot loops in :mod:`opgrowth.lindblad` rely on it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Tuple

import gmpy2

from . import scalars
from .scalars import BIG, EXACT, ExactComplex, abs2, conj, is_zero

LETTERS = "IXYZ"
_LETTER_INDEX = {c: i for i, c in enumerate(LETTERS)}

# i-exponent of the phase in letter products: sigma_a sigma_b = i^_PHASE[a][b] sigma_(a^b)
_PHASE = [[0] * 4 for _ in range(4)]
for _a, _b in ((1, 2), (2, 3), (3, 1)):  # XY=iZ, YZ=iX, ZX=iY
    _PHASE[_a][_b] = 1
    _PHASE[_b][_a] = 3

_I_POWERS = (
    ExactComplex(1, 0),
    ExactComplex(0, 1),
    ExactComplex(-1, 0),
    ExactComplex(0, -1),
)

# relative prune threshold for big-float operators; exact operators only ever
# drop exact zeros
PRUNE_REL_DEFAULT = 1e-30


class PauliString:
    """A finite-support product of single-site Pauli letters.

    Site indices may be negative; the identity is the empty string.  Two
    strings are equal iff their (site, letter) maps are equal.
    """

    __slots__ = ("sites",)

    def __init__(self, sites: Iterable[Tuple[int, int]] = ()):
        cleaned = []
        seen = set()
        for s, l in sites:
            if l == 0:
                continue
            if not 1 <= l <= 3:
                raise ValueError(f"letter code {l} not in 1..3")
            if s in seen:
                raise ValueError(f"duplicate site {s}")
            seen.add(s)
            cleaned.append((int(s), int(l)))
        cleaned.sort()
        self.sites = tuple(cleaned)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse the canonical text encoding, e.g. ``"X0 Y2"`` (``"I"`` = identity)."""
        text = text.strip()
        if text in ("", "I"):
            return cls()
        pairs = []
        for tok in text.split():
            letter = tok[0].upper()
            if letter not in _LETTER_INDEX or letter == "I":
                raise ValueError(f"bad Pauli letter in token {tok!r}")
            pairs.append((int(tok[1:]), _LETTER_INDEX[letter]))
        return cls(pairs)

    @classmethod
    def unpack(cls, key: int) -> "PauliString":
        pairs = []
        s = 0
        while key:
            l = key & 3
            if l:
                pairs.append((s, l))
            key >>= 2
            s += 1
        return cls(pairs)

    # -- queries -----------------------------------------------------------

    def text(self) -> str:
        if not self.sites:
            return "I"
        return " ".join(f"{LETTERS[l]}{s}" for s, l in self.sites)

    def is_identity(self) -> bool:
        return not self.sites

    def support(self) -> Tuple[int, int]:
        """(min_site, max_site); raises on the identity."""
        if not self.sites:
            raise ValueError("identity string has empty support")
        return self.sites[0][0], self.sites[-1][0]

    def shifted(self, d: int) -> "PauliString":
        return PauliString((s + d, l) for s, l in self.sites)

    def anchored(self) -> Tuple["PauliString", int]:
        """Translate so the leftmost occupied site is 0; returns (string, shift)."""
        if not self.sites:
            return self, 0
        d = -self.sites[0][0]
        return (self if d == 0 else self.shifted(d)), d

    def pack(self) -> int:
        """Packed integer key; requires an anchored (or identity) string."""
        if self.sites and self.sites[0][0] != 0:
            raise ValueError("only anchored strings can be packed")
        key = 0
        for s, l in self.sites:
            key |= l << (2 * s)
        return key

    def __eq__(self, other):
        return isinstance(other, PauliString) and self.sites == other.sites

    def __hash__(self):
        return hash(self.sites)

    def __repr__(self):
        return f"PauliString({self.text()!r})"


def mul(p: PauliString, q: PauliString) -> Tuple[ExactComplex, PauliString]:
    """Product of two Pauli strings: p*q = phase * r with phase in {1,-1,i,-i}."""
    letters = dict(p.sites)
    iexp = 0
    for s, lq in q.sites:
        lp = letters.get(s, 0)
        iexp += _PHASE[lp][lq]
        lr = lp ^ lq
        if lr:
            letters[s] = lr
        else:
            letters.pop(s, None)
    return _I_POWERS[iexp % 4], PauliString(letters.items())


class TIOperator:
    """Translation-invariant operator density sum_i T_i(o), one term per orbit.

    ``terms`` maps packed anchored-string keys to coefficients of a single
    scalar kind.  Zero coefficients are pruned on construction.  The inner
    product is the per-site density form, which for anchored representatives
    is ``sum_P conj(a_P) b_P``.
    """

    __slots__ = ("kind", "bits", "terms")

    def __init__(self, kind: str, bits=None, terms=None):
        if kind not in (EXACT, BIG):
            raise ValueError(f"unknown scalar kind {kind!r}")
        if kind == BIG and not bits:
            raise ValueError("big-float operators must record their precision")
        self.kind = kind
        self.bits = None if kind == EXACT else int(bits)
        self.terms = {} if terms is None else terms

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, kind: str = EXACT, bits=None) -> "TIOperator":
        return cls(kind, bits, {})

    @classmethod
    def from_strings(cls, pairs, kind: str = EXACT, bits=None) -> "TIOperator":
        """Build from (PauliString, coefficient) pairs; strings are anchored."""
        op = cls(kind, bits, {})
        t = op.terms
        for ps, coeff in pairs:
            anchored, _ = ps.anchored()
            key = anchored.pack()
            c = coeff if not isinstance(coeff, (int, float, Fraction)) else scalars.make_complex(kind, coeff)
            t[key] = t[key] + c if key in t else c
        for key in [k for k, v in t.items() if is_zero(v)]:
            del t[key]
        return op

    # -- queries -----------------------------------------------------------

    def items(self) -> Iterator[Tuple[PauliString, object]]:
        for key in sorted(self.terms):
            yield PauliString.unpack(key), self.terms[key]

    def n_terms(self) -> int:
        return len(self.terms)

    def coefficient(self, ps: PauliString):
        anchored, _ = ps.anchored()
        return self.terms.get(anchored.pack())

    def copy(self) -> "TIOperator":
        return TIOperator(self.kind, self.bits, dict(self.terms))

    def text(self, limit: int = 12) -> str:
        parts = [
            f"({scalars.to_complex(c):.6g})*{ps.text()}"
            for ps, c in list(self.items())[:limit]
        ]
        if self.n_terms() > limit:
            parts.append(f"... [{self.n_terms()} terms]")
        return " + ".join(parts) if parts else "0"

    def _check_compatible(self, other: "TIOperator"):
        if self.kind != other.kind or self.bits != other.bits:
            raise ValueError(
                f"scalar kind/precision mismatch: ({self.kind},{self.bits}) vs "
                f"({other.kind},{other.bits})"
            )


def inner(a: TIOperator, b: TIOperator):
    """Per-site density inner product (A|B), conjugate-linear in A."""
    a._check_compatible(b)
    small, big_ = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    flip = small is b.terms
    acc = None
    for key, v in small.items():
        w = big_.get(key)
        if w is None:
            continue
        term = conj(w) * v if flip else conj(v) * w
        acc = term if acc is None else acc + term
    if acc is None:
        return scalars.make_complex(a.kind, 0)
    return acc


def norm2(a: TIOperator):
    """(A|A) as a real scalar (Fraction or mpfr)."""
    if a.kind == EXACT:
        total = Fraction(0)
        for v in a.terms.values():
            total += v.abs2()
        return total
    total = gmpy2.mpfr(0)
    for v in a.terms.values():
        total += abs2(v)
    return total


def add_scaled(a: TIOperator, s, b: TIOperator) -> TIOperator:
    """a + s*b in canonical pruned form."""
    a._check_compatible(b)
    out = dict(a.terms)
    if not is_zero(s):
        for key, v in b.terms.items():
            sv = s * v
            if key in out:
                w = out[key] + sv
                if is_zero(w):
                    del out[key]
                else:
                    out[key] = w
            else:
                out[key] = sv
    return TIOperator(a.kind, a.bits, out)


def scaled(a: TIOperator, s) -> TIOperator:
    out = {k: s * v for k, v in a.terms.items()}
    return TIOperator(a.kind, a.bits, out)


def prune(a: TIOperator, rel_tol: float = PRUNE_REL_DEFAULT) -> TIOperator:
    """Drop big-float terms with |c| < rel_tol * max|c|.  Exact operators pass through."""
    if a.kind == EXACT or not a.terms:
        return a
    peak = max(abs2(v) for v in a.terms.values())
    cut = peak * gmpy2.mpfr(rel_tol) ** 2
    kept = {k: v for k, v in a.terms.items() if abs2(v) >= cut}
    return TIOperator(a.kind, a.bits, kept)


_XY_MASK = 0x5555555555555555  # low bit of each 2-bit field in a 64-bit chunk


def n_xy(key: int) -> int:
    """Number of X or Y letters in a packed string (sites the Z-dephasing sees)."""
    count = 0
    while key:
        chunk = key & 0xFFFFFFFFFFFFFFFF
        count += ((chunk ^ (chunk >> 1)) & _XY_MASK).bit_count()
        key >>= 64
    return count
