"""Exact exterior algebra over a 2n-dimensional symplectic frame.

Conventions, fixed once and tested:

* A frame has 2n ordered generators.  For a Darboux frame the order is
  dq^1 < ... < dq^n < dp_1 < ... < dp_n; generator index i < n is dq^{i+1}
  and index n+i is dp_{i+1}.
* A blade is a bitmask over the generators; its canonical representative is
  the ascending generator sequence, and every wedge/contraction sign is the
  parity of the sort permutation.
* The symplectic form is stored from the local formula omega = dp_i ^ dq^i,
  i.e. with coefficient -1 on each canonical blade dq^i ^ dp_i.
* Coefficients are exact: ``fractions.Fraction`` for constant forms, or any
  ring element supporting +, -, * and truth testing (the polynomial
  coefficients of :mod:`symplab.fields` plug in unchanged).

Everything is immutable after construction and every operation is a pure
function, so values can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

from . import linalg


class FrameMismatchError(ValueError):
    """Operands live over different frames."""


class NonHomogeneousError(ValueError):
    """Operation defined degreewise only was given a mixed-degree form."""


@dataclass(frozen=True)
class Frame:
    """An ordered basis of 2n covector generators.

    ``darboux`` frames carry the symplectic pairing used by ``omega`` and the
    sl(2) operators; ``invariant`` frames name the dual basis of a Lie
    algebra and have no preferred pairing.
    """

    n: int
    names: tuple[str, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("frame needs n >= 1")
        if len(self.names) != 2 * self.n:
            raise ValueError("frame needs exactly 2n generators")

    @classmethod
    def darboux(cls, n: int) -> "Frame":
        names = tuple(f"dq{i + 1}" for i in range(n)) + tuple(
            f"dp{i + 1}" for i in range(n)
        )
        return cls(n, names)

    @classmethod
    def invariant(cls, dim: int, prefix: str = "th") -> "Frame":
        if dim < 2 or dim % 2:
            raise ValueError("invariant frame needs even dimension >= 2")
        return cls(dim // 2, tuple(f"{prefix}{i + 1}" for i in range(dim)))

    @property
    def dim(self) -> int:
        return 2 * self.n


# ---------------------------------------------------------------------------
# blade (bitmask) primitives
# ---------------------------------------------------------------------------

def blade_degree(mask: int) -> int:
    return mask.bit_count()


def merge_sign(a: int, b: int) -> int:
    """Sign of sorting the concatenation of two disjoint ascending blades.

    Counts the pairs (i in a, j in b) with i > j; the caller guarantees
    a & b == 0.
    """
    total = 0
    bb = b
    while bb:
        low = bb & -bb
        j = low.bit_length() - 1
        total += (a >> (j + 1)).bit_count()
        bb ^= low
    return -1 if total & 1 else 1


def contraction_sign(mask: int, j: int) -> int:
    """Sign of removing generator j from a canonical blade containing it."""
    return -1 if (mask & ((1 << j) - 1)).bit_count() & 1 else 1


def blade_basis(dim: int, degree: int) -> tuple[int, ...]:
    """All degree-``degree`` blade masks over ``dim`` generators, ascending."""
    masks = [
        sum(1 << i for i in combo)
        for combo in itertools.combinations(range(dim), degree)
    ]
    return tuple(sorted(masks))


def blade_name(mask: int, frame: Frame) -> str:
    if mask == 0:
        return "1"
    return "^".join(frame.names[i] for i in range(frame.dim) if mask >> i & 1)


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

class Form:
    """A sparse exterior form: blade mask -> coefficient, no stored zeros."""

    __slots__ = ("frame", "terms")

    def __init__(self, frame: Frame, terms=None):
        object.__setattr__(self, "frame", frame)
        clean = {}
        if terms:
            for mask, coeff in terms.items():
                if mask >> frame.dim:
                    raise ValueError("blade uses generators outside the frame")
                if coeff:
                    clean[mask] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *_):
        raise AttributeError("Form is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, frame: Frame) -> "Form":
        return cls(frame)

    @classmethod
    def scalar(cls, frame: Frame, value) -> "Form":
        return cls(frame, {0: value})

    @classmethod
    def generator(cls, frame: Frame, index: int, coeff=Fraction(1)) -> "Form":
        if not 0 <= index < frame.dim:
            raise ValueError("generator index out of range")
        return cls(frame, {1 << index: coeff})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {blade_degree(m) for m in self.terms}

    @property
    def homogeneous_degree(self) -> int | None:
        degs = self.degrees()
        return degs.pop() if len(degs) == 1 else None

    def coefficient(self, mask: int):
        return self.terms.get(mask, Fraction(0))

    # -- ring operations ---------------------------------------------------

    def _check(self, other: "Form"):
        if self.frame != other.frame:
            raise FrameMismatchError("forms live over different frames")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        terms = dict(self.terms)
        for mask, coeff in other.terms.items():
            acc = terms.get(mask)
            terms[mask] = coeff if acc is None else acc + coeff
        return Form(self.frame, terms)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form(self.frame, {m: -c for m, c in self.terms.items()})

    def __rmul__(self, scalar) -> "Form":
        return Form(self.frame, {m: scalar * c for m, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Form)
            and self.frame == other.frame
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.frame, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Form({format_form(self)!r})"


def wedge(a: Form, b: Form) -> Form:
    """Graded-anticommutative associative product of two forms."""
    a._check(b)
    terms: dict = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            if ma & mb:
                continue
            coeff = ca * cb
            if merge_sign(ma, mb) < 0:
                coeff = -coeff
            mask = ma | mb
            acc = terms.get(mask)
            terms[mask] = coeff if acc is None else acc + coeff
    return Form(a.frame, terms)


def wedge_power(a: Form, k: int) -> Form:
    if k < 0:
        raise ValueError("negative wedge power")
    acc = Form.scalar(a.frame, Fraction(1))
    for _ in range(k):
        acc = wedge(acc, a)
    return acc


def interior(direction, a: Form) -> Form:
    """Interior product i_X a.

    ``direction`` is either a generator index (contraction with the dual
    vector of that generator) or any vector field exposing ``frame`` and
    ``components`` attributes, in which case the contraction is the
    coefficient-weighted sum of generator contractions.
    """
    if isinstance(direction, int):
        j = direction
        if not 0 <= j < a.frame.dim:
            raise ValueError("generator index out of range")
        bit = 1 << j
        terms: dict = {}
        for mask, coeff in a.terms.items():
            if mask & bit:
                new = mask ^ bit
                c = coeff if contraction_sign(mask, j) > 0 else -coeff
                acc = terms.get(new)
                terms[new] = c if acc is None else acc + c
        return Form(a.frame, terms)

    if direction.frame != a.frame:
        raise FrameMismatchError("vector field and form frames differ")
    out = Form.zero(a.frame)
    for j, comp in enumerate(direction.components):
        if comp:
            out = out + comp * interior(j, a)
    return out


# ---------------------------------------------------------------------------
# the symplectic frame data: omega, tau and the sl(2) triple
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def omega(frame: Frame) -> Form:
    """omega = dp_i ^ dq^i, stored as -1 times each canonical q^i p_i blade."""
    return Form(
        frame,
        {(1 << i) | (1 << (frame.n + i)): Fraction(-1) for i in range(frame.n)},
    )


@lru_cache(maxsize=None)
def omega_power(frame: Frame, k: int) -> Form:
    return wedge_power(omega(frame), k)


def tau(frame: Frame) -> Form:
    """The volume form tau = omega^n / n!."""
    return Fraction(1, factorial(frame.n)) * omega_power(frame, frame.n)


def op_e(a: Form) -> Form:
    """e-hat: wedge with omega."""
    return wedge(a, omega(a.frame))


def op_f(a: Form) -> Form:
    """f-hat: sum over i of i_{d/dq^i} i_{d/dp_i}."""
    n = a.frame.n
    out = Form.zero(a.frame)
    for i in range(n):
        out = out + interior(i, interior(n + i, a))
    return out


def op_h(a: Form) -> Form:
    """h-hat: multiplication by (degree - n), homogeneous input only."""
    if a.is_zero:
        return a
    deg = a.homogeneous_degree
    if deg is None:
        raise NonHomogeneousError("h-hat is defined degreewise only")
    return Fraction(deg - a.frame.n) * a


def _compose(ops, a: Form) -> Form:
    for op in reversed(ops):
        a = op(a)
    return a


@dataclass(frozen=True)
class CommutatorReport:
    """Blade-by-blade verdict for the five sl(2) operator identities."""

    n: int
    k: int
    passed: bool
    blades_checked: int
    failed_identity: str | None = None
    failed_blade: int | None = None

    def __str__(self):
        if self.passed:
            return (
                f"sl2 n={self.n} k={self.k}: all identities hold on "
                f"{self.blades_checked} blades"
            )
        return (
            f"sl2 n={self.n} k={self.k}: FAILED {self.failed_identity} "
            f"on blade mask {self.failed_blade}"
        )


def commutator_check(n: int, k: int) -> CommutatorReport:
    """Verify [h,e]=2e, [h,f]=-2f, [e,f]=h and the k-th power recursions
    [e^k,f] = k e^{k-1}(h+k-1), [e,f^k] = k f^{k-1}(h-k+1)
    on every basis blade of the 2n-dimensional Darboux frame.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    frame = Frame.darboux(n)

    def e_pow(p):
        return lambda a: wedge(a, omega_power(frame, p))

    def f_pow(p):
        def run(a):
            for _ in range(p):
                a = op_f(a)
            return a

        return run

    e, f, h = op_e, op_f, op_h
    kk = Fraction(k)

    identities = [
        ("[h,e] = 2e", lambda b: _compose([h, e], b) - _compose([e, h], b),
         lambda b: Fraction(2) * e(b)),
        ("[h,f] = -2f", lambda b: _compose([h, f], b) - _compose([f, h], b),
         lambda b: Fraction(-2) * f(b)),
        ("[e,f] = h", lambda b: _compose([e, f], b) - _compose([f, e], b),
         lambda b: h(b)),
        (f"[e^{k},f] = {k} e^{k - 1}(h+{k - 1})",
         lambda b: _compose([e_pow(k), f], b) - _compose([f, e_pow(k)], b),
         lambda b: kk * e_pow(k - 1)(h(b) + Fraction(k - 1) * b)),
        (f"[e,f^{k}] = {k} f^{k - 1}(h-{k - 1})",
         lambda b: _compose([e, f_pow(k)], b) - _compose([f_pow(k), e], b),
         lambda b: kk * f_pow(k - 1)(h(b) - Fraction(k - 1) * b)),
    ]

    count = 0
    for mask in range(1 << (2 * n)):
        blade = Form(frame, {mask: Fraction(1)})
        count += 1
        for name, lhs, rhs in identities:
            if lhs(blade) != rhs(blade):
                return CommutatorReport(n, k, False, count, name, mask)
    return CommutatorReport(n, k, True, count)


# ---------------------------------------------------------------------------
# rank certificates
# ---------------------------------------------------------------------------

def _map_matrix(frame: Frame, domain_masks, image, image_degree):
    """Matrix (rows: image blade basis, cols: domain blades) of a map
    sending each domain blade to ``image(blade_form)``."""
    basis = blade_basis(frame.dim, image_degree)
    index = {m: i for i, m in enumerate(basis)}
    mat = linalg.zeros(len(basis), len(domain_masks))
    for col, mask in enumerate(domain_masks):
        out = image(Form(frame, {mask: Fraction(1)}))
        for m, c in out.terms.items():
            mat[index[m]][col] = c
    return mat


def iota_rank(n: int, k: int) -> int:
    """Rank of the map sending a 2-form to its wedge with omega^k.

    Full rank C(2n, 2) for every 0 <= k <= n-2 certifies that the map is
    injective, and at k = n-2 an isomorphism onto the (2n-2)-forms.
    """
    if not 0 <= k <= n - 2:
        raise ValueError("need 0 <= k <= n-2")
    frame = Frame.darboux(n)
    wk = omega_power(frame, k)
    mat = _map_matrix(
        frame, blade_basis(frame.dim, 2), lambda b: wedge(b, wk), 2 * k + 2
    )
    return linalg.rank(mat)


def contraction_rank(n: int, k: int) -> int:
    """Rank of the map sending a constant vector X to i_X(omega^k).

    Rank 2n for every 1 <= k <= n certifies i_X(omega^k) = 0 iff X = 0.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    frame = Frame.darboux(n)
    wk = omega_power(frame, k)
    basis = blade_basis(frame.dim, 2 * k - 1)
    index = {m: i for i, m in enumerate(basis)}
    mat = linalg.zeros(len(basis), frame.dim)
    for j in range(frame.dim):
        out = interior(j, wk)
        for m, c in out.terms.items():
            mat[index[m]][j] = c
    return linalg.rank(mat)


def two_form_space_dim(n: int) -> int:
    return comb(2 * n, 2)


# ---------------------------------------------------------------------------
# canonical serialization
# ---------------------------------------------------------------------------

def format_form(form: Form) -> str:
    """Canonical text: terms sorted by blade mask, exact coefficients.

    Fraction coefficients print as num/den; polynomial coefficients print as
    parenthesized monomial sums in the frame's coordinate names.
    """
    from .polynomials import Poly, format_poly

    if form.is_zero:
        return "0"
    coord_names = [n[1:] if n.startswith("d") else n for n in form.frame.names]
    parts = []
    for mask in sorted(form.terms):
        coeff = form.terms[mask]
        if isinstance(coeff, Poly):
            text = format_poly(coeff, coord_names)
            if " " in text or text.lstrip("-").count("*"):
                text = f"({text})"
        else:
            text = str(coeff)
        if mask:
            parts.append(f"{text}*{blade_name(mask, form.frame)}")
        else:
            parts.append(text)
    return " + ".join(parts)
