"""Exact multivariate polynomials over Q with a fixed table of indeterminates.

The indeterminates split into the five formal variables (lam, mu, gam, del, t)
and any number of user-declared symbolic parameters.  All variables commute;
"del" stands for the translation operator, which acts by multiplication on
every finitely generated free object in this package, so polynomial
substitution realizes all the variable shifts (mu -> mu - lam, lam -> -lam - del,
...) that the calculus needs.

Canonical form: a sparse map from dense exponent vectors to nonzero rational
coefficients.  Equal polynomials have equal term maps, so every identity check
downstream is structural equality here.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

FORMAL_VARS: tuple[str, ...] = ("lam", "mu", "gam", "del", "t")

Rational = Union[int, Fraction]

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class PolyError(ValueError):
    """Structural misuse: unknown variables, mismatched tables, bad exponents."""


class ParseError(PolyError):
    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class VarTable:
    """Ordered indeterminates: the formal variables plus declared parameters.

    The declaration order fixes the monomial order (lexicographic on exponent
    vectors) used for canonical printing and for Frac normalization.
    """

    __slots__ = ("formal_vars", "params", "names", "_index")

    def __init__(self, params: Sequence[str] = ()):
        self.formal_vars = FORMAL_VARS
        self.params = tuple(params)
        seen = set(self.formal_vars)
        for p in self.params:
            if not _IDENT_RE.match(p):
                raise PolyError(f"invalid parameter name {p!r}")
            if p in seen:
                if p in FORMAL_VARS:
                    raise PolyError(f"parameter name {p!r} is reserved")
                raise PolyError(f"duplicate parameter name {p!r}")
            seen.add(p)
        self.names = self.formal_vars + self.params
        self._index = {n: i for i, n in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PolyError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def is_formal(self, name: str) -> bool:
        return name in FORMAL_VARS

    def __eq__(self, other) -> bool:
        return isinstance(other, VarTable) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"VarTable(params={list(self.params)!r})"


def _as_fraction(c: Rational) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise PolyError(f"coefficient must be rational, got {type(c).__name__}")


class Poly:
    """A polynomial over Q in the indeterminates of a VarTable."""

    __slots__ = ("vt", "terms")

    def __init__(self, vt: VarTable, terms: Mapping[tuple[int, ...], Rational] | None = None):
        self.vt = vt
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            width = len(vt.names)
            for exps, c in terms.items():
                c = _as_fraction(c)
                if c == 0:
                    continue
                if len(exps) != width or any(e < 0 for e in exps):
                    raise PolyError(f"bad exponent vector {exps!r}")
                clean[tuple(exps)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, vt: VarTable) -> "Poly":
        return cls(vt)

    @classmethod
    def const(cls, vt: VarTable, c: Rational) -> "Poly":
        c = _as_fraction(c)
        if c == 0:
            return cls(vt)
        return cls(vt, {(0,) * len(vt.names): c})

    @classmethod
    def one(cls, vt: VarTable) -> "Poly":
        return cls.const(vt, 1)

    @classmethod
    def var(cls, vt: VarTable, name: str) -> "Poly":
        exps = [0] * len(vt.names)
        exps[vt.index(name)] = 1
        return cls(vt, {tuple(exps): Fraction(1)})

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        if not self.is_constant():
            raise PolyError(f"not a constant: {self}")
        return next(iter(self.terms.values()))

    def uses(self, name: str) -> bool:
        i = self.vt.index(name)
        return any(exps[i] for exps in self.terms)

    def degree(self, name: str) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        i = self.vt.index(name)
        return max((exps[i] for exps in self.terms), default=-1)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.vt != other.vt:
            raise PolyError("polynomials over different variable tables")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.vt, other)

    @staticmethod
    def _operand(other) -> bool:
        return isinstance(other, (Poly, int, Fraction))

    def __add__(self, other):
        if not self._operand(other):
            return NotImplemented
        other = self._coerce(other)
        out = dict(self.terms)
        for exps, c in other.terms.items():
            s = out.get(exps, Fraction(0)) + c
            if s:
                out[exps] = s
            else:
                out.pop(exps, None)
        p = Poly(self.vt)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        p = Poly(self.vt)
        p.terms = {exps: -c for exps, c in self.terms.items()}
        return p

    def __sub__(self, other):
        if not self._operand(other):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        if not self._operand(other):
            return NotImplemented
        return (-self) + self._coerce(other)

    def __mul__(self, other):
        if not self._operand(other):
            return NotImplemented
        other = self._coerce(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(key, Fraction(0)) + c1 * c2
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        p = Poly(self.vt)
        p.terms = out
        return p

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise PolyError(f"exponent must be a non-negative integer, got {k!r}")
        out = Poly.one(self.vt)
        for _ in range(k):
            out = out * self
        return out

    # -- structure ---------------------------------------------------------

    def substitute(self, name: str, replacement: Union["Poly", Rational]) -> "Poly":
        """Ring homomorphism sending one variable to a polynomial."""
        if not isinstance(replacement, Poly):
            replacement = Poly.const(self.vt, replacement)
        else:
            self._check(replacement)
        i = self.vt.index(name)
        groups: dict[int, dict[tuple[int, ...], Fraction]] = {}
        for exps, c in self.terms.items():
            rest = exps[:i] + (0,) + exps[i + 1:]
            groups.setdefault(exps[i], {})[rest] = c
        out = Poly.zero(self.vt)
        power = Poly.one(self.vt)
        for e in range(max(groups, default=-1) + 1):
            if e in groups:
                base = Poly(self.vt)
                base.terms = groups[e]
                out = out + base * power
            power = power * replacement
        return out

    def coeff(self, name: str, k: int) -> "Poly":
        """The polynomial coefficient of name**k, with that variable removed."""
        if k < 0:
            raise PolyError("coefficient index must be non-negative")
        i = self.vt.index(name)
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            if exps[i] == k:
                out[exps[:i] + (0,) + exps[i + 1:]] = c
        p = Poly(self.vt)
        p.terms = out
        return p

    def leading_exps(self) -> tuple[int, ...]:
        if self.is_zero:
            raise PolyError("zero polynomial has no leading term")
        return max(self.terms)

    def leading_coeff(self) -> Fraction:
        return self.terms[self.leading_exps()]

    def monomials(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        for exps in sorted(self.terms, reverse=True):
            yield exps, self.terms[exps]

    # -- comparison / printing ---------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(self.vt, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.vt == other.vt and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.vt, frozenset(self.terms.items())))

    def _mono_str(self, exps: tuple[int, ...]) -> str:
        # Parameters first, then formal variables, with del printed last.
        order = list(self.vt.params) + [v for v in self.vt.formal_vars if v != "del"] + ["del"]
        factors = []
        for name in order:
            e = exps[self.vt.index(name)]
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        return "*".join(factors)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        pieces = []
        for k, (exps, c) in enumerate(self.monomials()):
            mono = self._mono_str(exps)
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            if k == 0:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"Poly({self})"


# -- expression parser -------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*^()/]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad_at]!r}", bad_at)
        if m.group("int"):
            tokens.append(("int", m.group("int"), m.start("int")))
        elif m.group("ident"):
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, vt: VarTable):
        self.text = text
        self.vt = vt
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", len(self.text))
        self.pos += 1
        return tok

    def parse(self) -> Poly:
        p = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return p

    def expr(self) -> Poly:
        p = self.term()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.next()
                q = self.term()
                p = p + q if tok[1] == "+" else p - q
            else:
                return p

    def term(self) -> Poly:
        p = self.factor()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] == "*":
                self.next()
                p = p * self.factor()
            else:
                return p

    def factor(self) -> Poly:
        p = self.atom()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] == "^":
                self.next()
                etok = self.next()
                if etok[0] != "int":
                    raise ParseError("exponent must be a non-negative integer", etok[2])
                p = p ** int(etok[1])
            else:
                return p

    def atom(self) -> Poly:
        tok = self.next()
        kind, value, at = tok
        if kind == "op" and value in "+-":
            # unary sign binds looser than ^: -x^2 means -(x^2)
            p = self.factor()
            return p if value == "+" else -p
        if kind == "op" and value == "(":
            p = self.expr()
            close = self.next()
            if close[:2] != ("op", ")"):
                raise ParseError("expected ')'", close[2])
            return p
        if kind == "int":
            num = int(value)
            nxt = self.peek()
            if nxt and nxt[:2] == ("op", "/"):
                self.next()
                dtok = self.next()
                if dtok[0] != "int":
                    raise ParseError("expected integer denominator", dtok[2])
                den = int(dtok[1])
                if den == 0:
                    raise ParseError("division by zero", dtok[2])
                return Poly.const(self.vt, Fraction(num, den))
            return Poly.const(self.vt, num)
        if kind == "ident":
            if value not in self.vt:
                raise ParseError(f"unknown identifier {value!r}", at)
            return Poly.var(self.vt, value)
        raise ParseError(f"unexpected {value!r}", at)


def parse_poly(text: str, vt: VarTable) -> Poly:
    """Parse an expression (integers, rationals p/q, identifiers, + - * ^, parens)."""
    return _Parser(text, vt).parse()


# -- exact division, gcd, fractions ------------------------------------------

def exact_div(p: Poly, d: Poly) -> Poly:
    """Exact polynomial quotient p / d; raises PolyError if d does not divide p."""
    if d.is_zero:
        raise PolyError("division by the zero polynomial")
    q = Poly.zero(p.vt)
    r = p
    lt_d = d.leading_exps()
    lc_d = d.leading_coeff()
    while not r.is_zero:
        lt_r = r.leading_exps()
        diff = tuple(a - b for a, b in zip(lt_r, lt_d))
        if any(e < 0 for e in diff):
            raise PolyError("inexact polynomial division")
        piece = Poly(p.vt, {diff: r.leading_coeff() / lc_d})
        q = q + piece
        r = r - piece * d
    return q


def _monic(p: Poly) -> Poly:
    if p.is_zero:
        return p
    lc = p.leading_coeff()
    if lc == 1:
        return p
    out = Poly(p.vt)
    out.terms = {exps: c / lc for exps, c in p.terms.items()}
    return out


def _used_vars(p: Poly) -> set[int]:
    used = set()
    for exps in p.terms:
        for i, e in enumerate(exps):
            if e:
                used.add(i)
    return used


def _univariate_coeffs(p: Poly, i: int) -> dict[int, Poly]:
    """View p in (Q[rest])[x_i]: map degree -> coefficient polynomial."""
    out: dict[int, Poly] = {}
    for exps, c in p.terms.items():
        rest = exps[:i] + (0,) + exps[i + 1:]
        coeff = out.setdefault(exps[i], Poly.zero(p.vt))
        coeff.terms[rest] = coeff.terms.get(rest, Fraction(0)) + c
    for coeff in out.values():
        for key in [k for k, v in coeff.terms.items() if v == 0]:
            del coeff.terms[key]
    return {e: c for e, c in out.items() if not c.is_zero}


def _from_univariate(coeffs: dict[int, Poly], i: int, vt: VarTable) -> Poly:
    x = Poly.var(vt, vt.names[i])
    out = Poly.zero(vt)
    for e, c in coeffs.items():
        out = out + c * x ** e
    return out


def _pseudo_rem(a: Poly, b: Poly, i: int) -> Poly:
    """Pseudo-remainder of a by b in variable x_i (both nonzero, deg a >= deg b)."""
    name = a.vt.names[i]
    x = Poly.var(a.vt, name)
    cb = _univariate_coeffs(b, i)
    db = max(cb)
    lb = cb[db]
    r = a
    while not r.is_zero:
        cr = _univariate_coeffs(r, i)
        dr = max(cr)
        if dr < db:
            break
        r = r * lb - b * cr[dr] * x ** (dr - db)
    return r


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """GCD over Q[names], normalized monic w.r.t. the fixed monomial order."""
    if a.vt != b.vt:
        raise PolyError("polynomials over different variable tables")
    if a.is_zero:
        return _monic(b)
    if b.is_zero:
        return _monic(a)
    used = _used_vars(a) | _used_vars(b)
    if not used:
        return Poly.one(a.vt)
    i = min(used)

    def content(p: Poly) -> Poly:
        coeffs = list(_univariate_coeffs(p, i).values())
        g = coeffs[0]
        for c in coeffs[1:]:
            g = poly_gcd(g, c)
        return g

    ca, cb = content(a), content(b)
    pa, pb = exact_div(a, ca), exact_div(b, cb)
    cg = poly_gcd(ca, cb)
    # primitive Euclidean loop on the main variable
    if max(_univariate_coeffs(pa, i)) < max(_univariate_coeffs(pb, i)):
        pa, pb = pb, pa
    while not pb.is_zero:
        r = _pseudo_rem(pa, pb, i)
        pa, pb = pb, (r if r.is_zero else exact_div(r, content(r)))
    return _monic(cg * pa)


class Frac:
    """A normalized fraction of polynomials: monic denominator, unit gcd.

    Only the operations needed for linear solves over the parameter field are
    provided.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.one(num.vt)
        if den.is_zero:
            raise PolyError("zero denominator")
        if num.vt != den.vt:
            raise PolyError("fraction parts over different variable tables")
        if num.is_zero:
            den = Poly.one(num.vt)
        else:
            g = poly_gcd(num, den)
            if not (g.is_constant() and g.constant_value() == 1):
                num = exact_div(num, g)
                den = exact_div(den, g)
            lc = den.leading_coeff()
            if lc != 1:
                num = Poly(num.vt, {e: c / lc for e, c in num.terms.items()})
                den = _monic(den)
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: Poly) -> "Frac":
        return cls(p)

    @classmethod
    def zero(cls, vt: VarTable) -> "Frac":
        return cls(Poly.zero(vt))

    @classmethod
    def one(cls, vt: VarTable) -> "Frac":
        return cls(Poly.one(vt))

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def is_polynomial(self) -> bool:
        return self.den == Poly.one(self.num.vt)

    def __add__(self, other: "Frac") -> "Frac":
        return Frac(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "Frac") -> "Frac":
        return Frac(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self) -> "Frac":
        return Frac(-self.num, self.den)

    def __mul__(self, other: "Frac") -> "Frac":
        return Frac(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "Frac") -> "Frac":
        if other.is_zero:
            raise PolyError("division by zero fraction")
        return Frac(self.num * other.den, self.den * other.num)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frac):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __str__(self) -> str:
        if self.is_polynomial():
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def __repr__(self) -> str:
        return f"Frac({self})"
