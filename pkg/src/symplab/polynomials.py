"""Sparse multivariate polynomials with exact rational coefficients.

A polynomial over ``nvars`` variables maps exponent tuples to nonzero
``Fraction`` coefficients.  On a Darboux frame with half-dimension n the
variable order is q^1..q^n, p_1..p_n, matching the frame's generator order.
"""

from __future__ import annotations

from fractions import Fraction


class DegreeLimitError(ValueError):
    """Input polynomial above the supported desk-scale total degree."""


MAX_INPUT_DEGREE = 12


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


class Poly:
    """Immutable-by-convention sparse polynomial."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                if len(exps) != nvars:
                    raise ValueError("exponent tuple has wrong length")
                coeff = _as_fraction(coeff)
                if coeff:
                    clean[tuple(exps)] = coeff
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value) -> "Poly":
        return cls(nvars, {(0,) * nvars: _as_fraction(value)})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Poly":
        if not 0 <= index < nvars:
            raise ValueError("variable index out of range")
        exps = tuple(1 if i == index else 0 for i in range(nvars))
        return cls(nvars, {exps: Fraction(1)})

    # -- structure ---------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError("polynomials over different variable counts")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.nvars, other)
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + coeff
        return Poly(self.nvars, terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else Poly.constant(self.nvars, -_as_fraction(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly.zero(self.nvars)
            return Poly(self.nvars, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                terms[key] = terms.get(key, Fraction(0)) + ca * cb
        return Poly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Poly.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.constant(self.nvars, other)
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- calculus ----------------------------------------------------------

    def diff(self, index: int) -> "Poly":
        """Formal partial derivative with respect to variable ``index``."""
        terms: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[index]
            if e:
                key = exps[:index] + (e - 1,) + exps[index + 1:]
                terms[key] = terms.get(key, Fraction(0)) + coeff * e
        return Poly(self.nvars, terms)

    def eval(self, point) -> Fraction:
        """Exact evaluation at a point of Fractions/ints."""
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            v = coeff
            for x, e in zip(point, exps):
                if e:
                    v *= _as_fraction(x) ** e
            total += v
        return total

    # -- canonical text ----------------------------------------------------

    def sorted_terms(self):
        """Monomials sorted lexicographically by exponent tuple."""
        return sorted(self.terms.items())

    def monomial_list(self) -> list[list]:
        """Canonical file form: ``[coeff, e_1, ..., e_nvars]`` per monomial."""
        return [[str(c), *exps] for exps, c in self.sorted_terms()]

    def __repr__(self):
        return f"Poly({self.nvars}, {format_poly(self, None)!r})"


def poly_from_monomials(nvars: int, monomials) -> Poly:
    """Parse the ``[coeff, e_1, ..., e_nvars]`` monomial-list file form."""
    terms: dict[tuple[int, ...], Fraction] = {}
    for row in monomials:
        if len(row) != nvars + 1:
            raise ValueError(
                f"monomial {row!r} needs 1 coefficient + {nvars} exponents"
            )
        coeff = _as_fraction(row[0])
        exps = tuple(int(e) for e in row[1:])
        if any(e < 0 for e in exps):
            raise ValueError("negative exponent")
        terms[exps] = terms.get(exps, Fraction(0)) + coeff
    return Poly(nvars, terms)


def check_input_degree(poly: Poly, what: str = "polynomial"):
    if poly.total_degree() > MAX_INPUT_DEGREE:
        raise DegreeLimitError(
            f"{what} has total degree {poly.total_degree()} > "
            f"{MAX_INPUT_DEGREE}; desk-scale inputs only"
        )


def format_poly(poly: Poly, names=None) -> str:
    """Canonical text, monomials in lexicographic exponent order."""
    if poly.is_zero:
        return "0"
    if names is None:
        names = [f"x{i + 1}" for i in range(poly.nvars)]
    parts = []
    for exps, coeff in poly.sorted_terms():
        factors = [
            names[i] if e == 1 else f"{names[i]}^{e}"
            for i, e in enumerate(exps)
            if e
        ]
        if not factors:
            parts.append(str(coeff))
        elif coeff == 1:
            parts.append("*".join(factors))
        elif coeff == -1:
            parts.append("-" + "*".join(factors))
        else:
            parts.append(f"{coeff}*" + "*".join(factors))
    return " + ".join(parts).replace("+ -", "- ")
