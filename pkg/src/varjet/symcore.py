"""Exact symbolic kernel: canonical polynomial normal forms over jet and momentum coordinates.

Expressions are polynomials with exact rational coefficients in three kinds of
coordinates: independent variables x^i, jet coordinates u_I^a (dependent
variable a, multiindex I), and momentum coordinates p_a^{I.i}.  The normal
form is unique: no zero coefficients, like monomials merged, monomials and
factors sorted by a fixed total order.  Structural equality therefore decides
mathematical equality.

All values are immutable; every operation is a pure function.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from .multiindex import EMPTY, MultiIndex

INDEPENDENT = "independent"
JET = "jet"
MOMENTUM = "momentum"

_KIND_RANK = {INDEPENDENT: 0, JET: 1, MOMENTUM: 2}


class VarjetError(Exception):
    """Base class for all domain errors."""


class ParseError(VarjetError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.pos = pos
        self.line = 1 + text.count("\n", 0, pos)
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column})")


class UnknownCoordinateError(VarjetError):
    pass


class UnsupportedExpressionError(VarjetError):
    pass


class OrderOverflowError(VarjetError):
    pass


class WrongDomainError(VarjetError):
    pass


@dataclass(frozen=True)
class CoordinateId:
    """One coordinate: an independent variable, a jet u_I^a, or a momentum p_a^{I.i}.

    ``alpha`` is the 0-based dependent index (jets and momenta), ``i`` the
    0-based independent index (independents and momenta).  A jet with empty
    multiindex is the dependent variable itself.
    """

    kind: str
    alpha: int = -1
    index: MultiIndex = EMPTY
    i: int = -1

    @classmethod
    def independent(cls, i: int) -> "CoordinateId":
        return cls(INDEPENDENT, i=i)

    @classmethod
    def jet(cls, alpha: int, index: MultiIndex = EMPTY) -> "CoordinateId":
        return cls(JET, alpha=alpha, index=index)

    @classmethod
    def momentum(cls, alpha: int, index: MultiIndex, i: int) -> "CoordinateId":
        return cls(MOMENTUM, alpha=alpha, index=index, i=i)

    def sort_key(self) -> Tuple[int, int, int, Tuple[int, ...], int]:
        # independents before jets before momenta; jets by (alpha, |I|, I);
        # momenta by (alpha, |I|, I, i).
        if self.kind == INDEPENDENT:
            return (0, self.i, 0, (), 0)
        return (_KIND_RANK[self.kind], self.alpha, len(self.index), self.index.entries, self.i)

    def __lt__(self, other: "CoordinateId") -> bool:
        return self.sort_key() < other.sort_key()


# sentinel key sorting after every coordinate; used for the constant monomial
_CONSTANT_KEY = (9, 0, 0, (), 0)

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9]*$")


@dataclass(frozen=True)
class JetContext:
    """Declares the bundle: independent and dependent variable names plus order bounds.

    ``max_order`` is the highest admitted jet order; operations that would
    exceed it raise OrderOverflowError unless ``auto_extend`` is set.
    ``jet_style`` selects the rendering of jets: "suffix" (u_xx) for base
    contexts with simple names, "comma" (u_x,_t) for derived first-order
    contexts whose dependents carry compound names.
    """

    independents: Tuple[str, ...]
    dependents: Tuple[str, ...]
    max_order: int = 4
    auto_extend: bool = False
    jet_style: str = "suffix"
    momentum_order: int = -1  # highest |I| admitted in momenta; -1 follows max_order

    def __post_init__(self):
        object.__setattr__(self, "independents", tuple(self.independents))
        object.__setattr__(self, "dependents", tuple(self.dependents))
        if not self.independents or not self.dependents:
            raise ValueError("need at least one independent and one dependent variable")
        if self.max_order < 0:
            raise ValueError("max_order must be nonnegative")
        names = self.independents + self.dependents
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be pairwise distinct")
        if self.jet_style == "suffix":
            for name in names:
                if not _NAME_RE.match(name):
                    raise ValueError(f"invalid coordinate name {name!r}")
        elif self.jet_style != "comma":
            raise ValueError(f"unknown jet_style {self.jet_style!r}")

    @property
    def n(self) -> int:
        return len(self.independents)

    @property
    def m(self) -> int:
        return len(self.dependents)

    def order_bound(self) -> int:
        return self.max_order

    def check_order(self, index: MultiIndex) -> None:
        if len(index) > self.max_order and not self.auto_extend:
            raise OrderOverflowError(
                f"jet order {len(index)} exceeds max_order {self.max_order} "
                "(enable auto_extend to lift the bound)")

    def extended(self, max_order: int) -> "JetContext":
        if max_order <= self.max_order:
            return self
        return JetContext(self.independents, self.dependents, max_order,
                          self.auto_extend, self.jet_style, self.momentum_order)

    # -- naming ---------------------------------------------------------

    def index_word(self, index: MultiIndex) -> str:
        return "".join(self.independents[i] for i in index)

    def name(self, c: CoordinateId) -> str:
        if c.kind == INDEPENDENT:
            return self.independents[c.i]
        if c.kind == JET:
            base = self.dependents[c.alpha]
            if len(c.index) == 0:
                return base
            word = self.index_word(c.index)
            if self.jet_style == "comma":
                return f"{base},_{word}"
            return f"{base}_{word}"
        tag = f"^{self.dependents[c.alpha]}" if self.m > 1 else ""
        return f"p{tag}_{self.index_word(c.index)}.{self.independents[c.i]}"

    def latex_name(self, c: CoordinateId) -> str:
        if c.kind == INDEPENDENT:
            return self.independents[c.i]
        if c.kind == JET:
            base = self.dependents[c.alpha]
            if len(c.index) == 0:
                return base
            word = self.index_word(c.index)
            if self.jet_style == "comma":
                return f"{base}{{}}_{{,{word}}}"
            return f"{base}_{{{word}}}"
        word = self.index_word(c.index)
        tag = f"[{self.dependents[c.alpha]}]" if self.m > 1 else ""
        return f"p{tag}^{{{word}.{self.independents[c.i]}}}"

    # -- resolution -----------------------------------------------------

    def resolve(self, name: str) -> CoordinateId:
        """Resolve an identifier to a coordinate; raises UnknownCoordinateError."""
        coord = self._try_resolve(name)
        if coord is None:
            raise UnknownCoordinateError(f"unknown identifier {name!r}")
        return coord

    def _try_resolve(self, name: str) -> Optional[CoordinateId]:
        if name in self.independents:
            return CoordinateId.independent(self.independents.index(name))
        if name in self.dependents:
            return CoordinateId.jet(self.dependents.index(name))
        if ",_" in name:
            base, _, word = name.partition(",_")
            parent = self._try_resolve(base)
            if parent is None or parent.kind != JET:
                return None
            suffix = self._split_index_word(word)
            if suffix is None:
                return None
            index = parent.index
            for i in suffix:
                index = index.with_index(i)
            self.check_order(index)
            return CoordinateId.jet(parent.alpha, index)
        if self.jet_style == "suffix":
            mom = self._try_momentum(name)
            if mom is not None:
                return mom
            for alpha, dep in sorted(enumerate(self.dependents),
                                     key=lambda t: -len(t[1])):
                if name.startswith(dep + "_"):
                    suffix = self._split_index_word(name[len(dep) + 1:])
                    if suffix is not None:
                        index = MultiIndex(tuple(suffix))
                        self.check_order(index)
                        return CoordinateId.jet(alpha, index)
        return None

    def _try_momentum(self, name: str) -> Optional[CoordinateId]:
        if not name.startswith("p") or "." not in name:
            return None
        body = name[1:]
        alpha = 0
        if body.startswith("^"):
            rest = body[1:]
            for a, dep in sorted(enumerate(self.dependents), key=lambda t: -len(t[1])):
                if rest.startswith(dep + "_"):
                    alpha, body = a, rest[len(dep):]
                    break
            else:
                return None
        elif self.m > 1:
            return None  # dependent tag is mandatory when m > 1
        if not body.startswith("_"):
            return None
        word, dot, direction = body[1:].rpartition(".")
        if not dot or direction not in self.independents:
            return None
        suffix = self._split_index_word(word)
        if suffix is None:
            return None
        index = MultiIndex(tuple(suffix))
        bound = self.momentum_order if self.momentum_order >= 0 else self.max_order
        if len(index) > bound and not self.auto_extend:
            raise OrderOverflowError(
                f"momentum level {len(index)} exceeds admitted order {bound}")
        return CoordinateId.momentum(alpha, index, self.independents.index(direction))

    def _split_index_word(self, word: str) -> Optional[List[int]]:
        """Greedily decompose a concatenation of independent names (longest first)."""
        ordered = sorted(enumerate(self.independents), key=lambda t: -len(t[1]))
        out: List[int] = []
        pos = 0
        while pos < len(word):
            for i, nm in ordered:
                if word.startswith(nm, pos):
                    out.append(i)
                    pos += len(nm)
                    break
            else:
                return None
        return out

    # -- enumeration ----------------------------------------------------

    def jets_up_to(self, order: int):
        from .multiindex import multiindices_up_to
        return [CoordinateId.jet(a, I)
                for a in range(self.m)
                for I in multiindices_up_to(self.n, order)]

    def momenta_up_to(self, level: int):
        from .multiindex import multiindices_up_to
        return [CoordinateId.momentum(a, I, i)
                for a in range(self.m)
                for I in multiindices_up_to(self.n, level)
                for i in range(self.n)]


Monomial = Tuple[Tuple[CoordinateId, int], ...]


def _mono_key(mono: Monomial):
    # Canonical sum order: leading (largest) coordinate ascending, then total
    # degree descending, then exponents on the larger coordinates first.
    if not mono:
        return (_CONSTANT_KEY, 0, ())
    lead = max(c.sort_key() for c, _ in mono)
    degree = sum(e for _, e in mono)
    tail = tuple((c.sort_key(), -e) for c, e in sorted(mono, key=lambda f: f[0].sort_key(), reverse=True))
    return (lead, -degree, tail)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    powers: Dict[CoordinateId, int] = dict(a)
    for c, e in b:
        powers[c] = powers.get(c, 0) + e
    return tuple(sorted(powers.items(), key=lambda f: f[0].sort_key()))


class Expr:
    """A polynomial in canonical normal form.

    Stored as a sorted tuple of (monomial, coefficient) pairs with nonzero
    Fraction coefficients; a monomial is a sorted tuple of (coordinate,
    positive exponent) pairs.  Structural equality coincides with polynomial
    equality.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable[Tuple[Monomial, Fraction]] = ()):
        merged: Dict[Monomial, Fraction] = {}
        for mono, coeff in terms:
            coeff = Fraction(coeff)
            if coeff:
                acc = merged.get(mono, Fraction(0)) + coeff
                if acc:
                    merged[mono] = acc
                elif mono in merged:
                    del merged[mono]
        self.terms: Tuple[Tuple[Monomial, Fraction], ...] = tuple(
            sorted(merged.items(), key=lambda t: _mono_key(t[0])))
        self._hash = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls) -> "Expr":
        return _ZERO

    @classmethod
    def number(cls, value) -> "Expr":
        return cls([((), Fraction(value))])

    @classmethod
    def coord(cls, c: CoordinateId) -> "Expr":
        return cls([(((c, 1),), Fraction(1))])

    # -- ring operations -------------------------------------------------

    def __add__(self, other: "Expr") -> "Expr":
        if not other.terms:
            return self
        if not self.terms:
            return other
        return Expr(self.terms + other.terms)

    def __sub__(self, other: "Expr") -> "Expr":
        return self + (-other)

    def __neg__(self) -> "Expr":
        out = Expr.__new__(Expr)
        out.terms = tuple((m, -c) for m, c in self.terms)
        out._hash = None
        return out

    def __mul__(self, other) -> "Expr":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        acc: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = _mono_mul(m1, m2)
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return Expr(acc.items())

    __rmul__ = __mul__

    def scale(self, k) -> "Expr":
        k = Fraction(k)
        if not k:
            return _ZERO
        out = Expr.__new__(Expr)
        out.terms = tuple((m, c * k) for m, c in self.terms)
        out._hash = None
        return out

    def __pow__(self, e: int) -> "Expr":
        if e < 0:
            raise UnsupportedExpressionError("negative exponents are not polynomial")
        result = Expr.number(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # -- structure -------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def coordinates(self) -> List[CoordinateId]:
        seen = {c for mono, _ in self.terms for c, _ in mono}
        return sorted(seen, key=lambda c: c.sort_key())

    def constant_value(self) -> Optional[Fraction]:
        """The value as a rational number, or None if not constant."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and self.terms[0][0] == ():
            return self.terms[0][1]
        return None

    def max_jet_order(self) -> int:
        orders = [len(c.index) for c in self.coordinates() if c.kind == JET]
        return max(orders, default=0)

    def total_degree(self) -> int:
        return max((sum(e for _, e in m) for m, _ in self.terms), default=0)

    def leading_coefficient(self) -> Fraction:
        return self.terms[0][1] if self.terms else Fraction(0)

    def sign_normalized(self) -> "Expr":
        """Multiply by -1 if the leading coefficient is negative (row-sign canonical form)."""
        return -self if self.terms and self.terms[0][1] < 0 else self

    # -- calculus ---------------------------------------------------------

    def partial(self, c: CoordinateId) -> "Expr":
        """Formal partial derivative; all distinct coordinates are independent symbols."""
        acc: List[Tuple[Monomial, Fraction]] = []
        for mono, coeff in self.terms:
            for k, (cc, e) in enumerate(mono):
                if cc == c:
                    rest = mono[:k] + ((cc, e - 1),) + mono[k + 1:] if e > 1 \
                        else mono[:k] + mono[k + 1:]
                    acc.append((rest, coeff * e))
                    break
        return Expr(acc)

    def coefficient_of(self, c: CoordinateId) -> "Expr":
        """Coefficient of the first power of c; meaningful when affine in c."""
        acc = []
        for mono, coeff in self.terms:
            for k, (cc, e) in enumerate(mono):
                if cc == c and e == 1:
                    acc.append((mono[:k] + mono[k + 1:], coeff))
        return Expr(acc)

    def substitute(self, bindings: Mapping[CoordinateId, "Expr"]) -> "Expr":
        """Simultaneous substitution followed by normalization."""
        if not bindings:
            return self
        out = _ZERO
        for mono, coeff in self.terms:
            term = Expr.number(coeff)
            for c, e in mono:
                base = bindings.get(c)
                term = term * (base ** e if base is not None else Expr([(((c, e),), Fraction(1))]))
            out = out + term
        return out

    def __repr__(self):
        return f"Expr<{len(self.terms)} terms>"


_ZERO = Expr()


# -- parsing ---------------------------------------------------------------

# "^" joins a name only when followed by a letter (momentum dependent tag);
# "^" followed by a digit stays the power operator.
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_.]*(?:\^[A-Za-z][A-Za-z0-9_.]*)?(?:,_[A-Za-z][A-Za-z0-9]*)?)"
    r"|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == m.start():
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos:].strip()[0]!r}", text, pos)
            break
        if m.lastgroup:
            tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over: expr := [+-] term (('+'|'-') term)*;
    term := factor (('*'|'/') factor)*; factor := primary ['^' int];
    primary := int | name | '(' expr ')'.
    """

    def __init__(self, text: str, ctx: JetContext):
        self.text = text
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def next(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", self.text, pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", self.text, pos)
        return e

    def expr(self) -> Expr:
        kind, val, _ = self.peek()
        negate = False
        if kind == "op" and val in "+-":
            self.next()
            negate = val == "-"
        out = self.term()
        if negate:
            out = -out
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                out = out - rhs if val == "-" else out + rhs
            else:
                return out

    def term(self) -> Expr:
        out = self.factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.factor()
                if val == "*":
                    out = out * rhs
                else:
                    q = rhs.constant_value()
                    if q is None:
                        raise UnsupportedExpressionError(
                            "division by a non-constant expression is not polynomial")
                    if q == 0:
                        raise ParseError("division by zero", self.text, pos)
                    out = out.scale(Fraction(1) / q)
            else:
                return out

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return -self.factor()
        base = self.primary()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            kind, val, pos = self.next()
            if kind == "op" and val == "-":
                raise UnsupportedExpressionError("negative exponents are not polynomial")
            if kind != "num":
                raise ParseError("expected integer exponent", self.text, pos)
            return base ** int(val)
        return base

    _TRANSCENDENTAL = {"sin", "cos", "tan", "exp", "log", "ln", "sqrt",
                       "sinh", "cosh", "tanh", "abs"}

    def primary(self) -> Expr:
        kind, val, pos = self.next()
        if kind == "num":
            return Expr.number(int(val))
        if kind == "name":
            follow = self.peek()
            if val in self._TRANSCENDENTAL and follow[:2] == ("op", "("):
                raise UnsupportedExpressionError(
                    f"transcendental function {val!r} is not polynomial")
            try:
                return Expr.coord(self.ctx.resolve(val))
            except UnknownCoordinateError:
                raise ParseError(f"unknown identifier {val!r}", self.text, pos)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input",
                         self.text, pos)


def parse(text: str, ctx: JetContext) -> Expr:
    """Parse an expression in the context's coordinate names.

    The grammar is documented in docs/grammar.bnf; parse-print-parse is a
    fixed point of the plain format.
    """
    return _Parser(text, ctx).parse()


# -- rendering ---------------------------------------------------------------

def _coeff_plain(c: Fraction) -> str:
    return str(c)


def _coeff_latex(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"\\frac{{{c.numerator}}}{{{c.denominator}}}"


def render(e: Expr, ctx: JetContext, fmt: str = "plain") -> str:
    """Deterministic rendering; the plain format re-parses to the same Expr."""
    if fmt == "plain":
        return _render_plain(e, ctx)
    if fmt == "latex":
        return _render_latex(e, ctx)
    if fmt == "json":
        return json.dumps(expr_to_json(e, ctx), sort_keys=True)
    raise ValueError(f"unknown format {fmt!r}")


def _render_plain(e: Expr, ctx: JetContext) -> str:
    if not e.terms:
        return "0"
    parts: List[str] = []
    for mono, coeff in e.terms:
        factors = [ctx.name(c) + (f"^{p}" if p > 1 else "") for c, p in mono]
        mag = abs(coeff)
        if not factors:
            body = _coeff_plain(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_coeff_plain(mag)] + factors)
        if not parts:
            parts.append(body if coeff > 0 else "-" + body)
        else:
            parts.append((" + " if coeff > 0 else " - ") + body)
    return "".join(parts)


def _render_latex(e: Expr, ctx: JetContext) -> str:
    if not e.terms:
        return "0"
    parts: List[str] = []
    for mono, coeff in e.terms:
        factors = [ctx.latex_name(c) + (f"^{{{p}}}" if p > 1 else "") for c, p in mono]
        mag = abs(coeff)
        if not factors:
            body = _coeff_latex(mag)
        elif mag == 1:
            body = " ".join(factors)
        else:
            body = " ".join([_coeff_latex(mag)] + factors)
        if not parts:
            parts.append(body if coeff > 0 else "-" + body)
        else:
            parts.append((" - " if coeff < 0 else " + ") + body)
    return "".join(parts)


def expr_to_json(e: Expr, ctx: JetContext) -> dict:
    return {
        "monomials": [
            {"coeff": str(coeff),
             "factors": [[ctx.name(c), p] for c, p in mono]}
            for mono, coeff in e.terms
        ]
    }
