"""Finite Lie conformal algebras given by structure-constant tables.

An algebra of rank n stores, for every ordered generator pair (g_i, g_j), the
polynomials P_ijk(lam, del) with [g_i lam g_j] = sum_k P_ijk(lam, del) g_k.
Construction does not enforce the axioms; skew-commutativity and the Jacobi
identity are explicit checks so a candidate table can be loaded and asked
whether it is a Lie conformal algebra.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence, Union

from .poly import Poly, PolyError, VarTable, parse_poly
from .reports import Report

ExprLike = Union["Poly", str, int, Fraction]


class StructureError(ValueError):
    """Mismatched parents, variable reuse, malformed tables."""


def as_poly(value: ExprLike, vt: VarTable) -> Poly:
    if isinstance(value, Poly):
        if value.vt != vt:
            raise PolyError("expression over a different variable table")
        return value
    if isinstance(value, str):
        return parse_poly(value, vt)
    return Poly.const(vt, value)


def _check_table_vars(p: Poly, context: str) -> None:
    for banned in ("mu", "gam", "t"):
        if p.uses(banned):
            raise StructureError(f"{context}: structure constants may only use lam, del and parameters (found {banned!r})")


class LieConformalAlgebra:
    def __init__(
        self,
        name: str,
        vt: VarTable,
        gens: Sequence[str],
        bracket: Mapping[tuple[str, str], Mapping[str, ExprLike]] | None = None,
    ):
        self.name = name
        self.vt = vt
        self.gens = tuple(gens)
        if len(set(self.gens)) != len(self.gens):
            raise StructureError(f"duplicate generator names in algebra {name!r}")
        self._gen_index = {g: i for i, g in enumerate(self.gens)}
        n = len(self.gens)
        table = [[[Poly.zero(vt) for _ in range(n)] for _ in range(n)] for _ in range(n)]
        if bracket:
            for (gi, gj), row in bracket.items():
                i, j = self.gen_index(gi), self.gen_index(gj)
                for gk, expr in row.items():
                    p = as_poly(expr, vt)
                    _check_table_vars(p, f"[{gi} lam {gj}] -> {gk}")
                    table[i][j][self.gen_index(gk)] = p
        self.table = table

    @property
    def rank(self) -> int:
        return len(self.gens)

    def gen_index(self, name: str) -> int:
        try:
            return self._gen_index[name]
        except KeyError:
            raise StructureError(f"unknown generator {name!r} of algebra {self.name!r}") from None

    def gen(self, name: str) -> "AlgElement":
        comps = [Poly.zero(self.vt)] * self.rank
        comps[self.gen_index(name)] = Poly.one(self.vt)
        return AlgElement(self, tuple(comps))

    def gen_at(self, i: int) -> "AlgElement":
        return self.gen(self.gens[i])

    def element(self, comps: Mapping[str, ExprLike]) -> "AlgElement":
        out = [Poly.zero(self.vt)] * self.rank
        for g, expr in comps.items():
            out[self.gen_index(g)] = as_poly(expr, self.vt)
        return AlgElement(self, tuple(out))

    def zero(self) -> "AlgElement":
        return AlgElement(self, tuple(Poly.zero(self.vt) for _ in self.gens))

    def __repr__(self) -> str:
        return f"LieConformalAlgebra({self.name!r}, rank {self.rank})"


class _VectorElement:
    """A Q[vars]-combination of basis generators; shared by algebra and module elements."""

    __slots__ = ("parent", "comps")

    def __init__(self, parent, comps: Sequence[Poly]):
        if len(comps) != len(parent.gens):
            raise StructureError("component count does not match generator count")
        self.parent = parent
        self.comps = tuple(comps)

    def _same(self, other) -> None:
        if self.parent is not other.parent:
            raise StructureError("elements of different parents")

    @property
    def vt(self) -> VarTable:
        return self.parent.vt

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.comps)

    def __add__(self, other):
        self._same(other)
        return type(self)(self.parent, [a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other):
        self._same(other)
        return type(self)(self.parent, [a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return type(self)(self.parent, [-a for a in self.comps])

    def scale(self, factor: ExprLike):
        f = as_poly(factor, self.vt)
        return type(self)(self.parent, [f * a for a in self.comps])

    def __rmul__(self, factor):
        return self.scale(factor)

    def uses(self, var: str) -> bool:
        return any(c.uses(var) for c in self.comps)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, type(self))
            and self.parent is other.parent
            and self.comps == other.comps
        )

    def __hash__(self) -> int:
        return hash((id(self.parent), self.comps))

    def __str__(self) -> str:
        pieces = []
        for c, g in zip(self.comps, self.parent.gens):
            if c.is_zero:
                continue
            pieces.append(f"({c})*{g}")
        return " + ".join(pieces) if pieces else "0"

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


class AlgElement(_VectorElement):
    def partial(self) -> "AlgElement":
        """The translation operator: multiplication by del on a free C[del]-module."""
        d = Poly.var(self.vt, "del")
        return AlgElement(self.parent, [d * c for c in self.comps])


def sesquilinear_eval(
    left: Sequence[Poly],
    right: Sequence[Poly],
    rows,
    n_out: int,
    value: Poly,
    table_var: str,
) -> list[Poly]:
    """Core evaluation rule shared by brackets, actions and intertwiners.

    Computes sum_{i,j} left_i(del -> -value) * right_j(del -> value + del)
    * rows(i, j)(table_var -> value), where rows(i, j) is the vector of
    structure constants over the target basis.
    """
    vt = value.vt
    neg = -value
    shift = value + Poly.var(vt, "del")
    out = [Poly.zero(vt) for _ in range(n_out)]
    for i, li in enumerate(left):
        if li.is_zero:
            continue
        pi = li.substitute("del", neg)
        for j, rj in enumerate(right):
            if rj.is_zero:
                continue
            row = rows(i, j)
            if all(s.is_zero for s in row):
                continue
            f = pi * rj.substitute("del", shift)
            for k, s in enumerate(row):
                if not s.is_zero:
                    out[k] = out[k] + f * s.substitute(table_var, value)
    return out


def require_fresh(var: str, *elements) -> Poly:
    """Validate a formal variable for a new bracketing level and return it as a Poly."""
    if not elements:
        raise StructureError("no elements supplied")
    vt = elements[0].vt
    if var not in vt or not vt.is_formal(var):
        raise StructureError(f"{var!r} is not a formal variable")
    if var in ("del", "t"):
        raise StructureError(f"{var!r} is reserved and cannot carry a bracket")
    for e in elements:
        if e.uses(var):
            raise StructureError(f"variable {var!r} already occurs in an operand; pick a fresh one")
    return Poly.var(vt, var)


def bracket_eval(x: AlgElement, y: AlgElement, value: Poly) -> AlgElement:
    """[x_value y] by the sesquilinear rule, for an arbitrary polynomial value."""
    x._same(y)
    A = x.parent
    comps = sesquilinear_eval(
        x.comps, y.comps, lambda i, j: A.table[i][j], A.rank, value, "lam"
    )
    return AlgElement(A, comps)


def bracket(x: AlgElement, y: AlgElement, var: str) -> AlgElement:
    """[x_var y] with var a fresh formal variable."""
    x._same(y)
    return bracket_eval(x, y, require_fresh(var, x, y))


def nth_product(x: AlgElement, y: AlgElement, n: int) -> AlgElement:
    """x_(n) y = n! times the coefficient of var^n in [x_var y]."""
    for var in ("lam", "mu", "gam"):
        if not (x.uses(var) or y.uses(var)):
            break
    else:
        raise StructureError("no formal variable left for the n-th product")
    b = bracket(x, y, var)
    f = Fraction(factorial(n))
    return AlgElement(x.parent, [f * c.coeff(var, n) for c in b.comps])


def check_skew(A: LieConformalAlgebra) -> Report:
    """Skew-commutativity: [a_lam b] + [b_(-lam-del) a] must vanish pairwise."""
    report = Report(f"skew-commutativity of {A.name}")
    minus = parse_poly("-lam - del", A.vt)
    for gi in A.gens:
        for gj in A.gens:
            lhs = bracket(A.gen(gi), A.gen(gj), "lam")
            opp = bracket(A.gen(gj), A.gen(gi), "lam")
            rhs = AlgElement(A, [-c.substitute("lam", minus) for c in opp.comps])
            residual = lhs - rhs
            if not residual.is_zero:
                report.fail(f"({gi},{gj})", residual)
    return report


def check_jacobi(A: LieConformalAlgebra) -> Report:
    """Jacobi: [a_lam [b_mu c]] - [[a_lam b]_(lam+mu) c] - [b_mu [a_lam c]] per triple."""
    report = Report(f"Jacobi identity of {A.name}")
    lam_mu = parse_poly("lam + mu", A.vt)
    for ga in A.gens:
        for gb in A.gens:
            for gc in A.gens:
                a, b, c = A.gen(ga), A.gen(gb), A.gen(gc)
                lhs = bracket(a, bracket(b, c, "mu"), "lam")
                t1 = bracket_eval(bracket(a, b, "lam"), c, lam_mu)
                t2 = bracket(b, bracket(a, c, "lam"), "mu")
                residual = lhs - t1 - t2
                if not residual.is_zero:
                    report.fail(f"({ga},{gb},{gc})", residual)
    return report


def check_algebra(A: LieConformalAlgebra) -> Report:
    report = Report(f"algebra {A.name}")
    report.merge(check_skew(A))
    report.merge(check_jacobi(A))
    return report


def virasoro(vt: VarTable | None = None, name: str = "Vir") -> LieConformalAlgebra:
    """Rank-1 algebra with a single generator L and [L_lam L] = (2 lam + del) L."""
    if vt is None:
        vt = VarTable()
    return LieConformalAlgebra(name, vt, ["L"], {("L", "L"): {"L": "2*lam + del"}})
