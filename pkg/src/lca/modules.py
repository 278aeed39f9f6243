"""Finite free conformal modules over a Lie conformal algebra.

A module of rank m over an algebra with generators g_a stores the polynomials
A_ajk(lam, del) with g_a lam v_j = sum_k A_ajk(lam, del) v_k.  The evaluation
rule for arbitrary elements is the same sesquilinear extension used for the
bracket.  Construction does not enforce the module Jacobi identity; that is
check_module's job.

The scalar base field k, viewed as the trivial module, is the one non-free
object here: it carries partial = 0, flagged by partial_zero.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .algebra import (
    AlgElement,
    ExprLike,
    LieConformalAlgebra,
    StructureError,
    _VectorElement,
    as_poly,
    bracket,
    require_fresh,
    sesquilinear_eval,
    check_algebra,
)
from .poly import Poly, VarTable, parse_poly
from .reports import Report


class ConformalModule:
    def __init__(
        self,
        name: str,
        algebra: LieConformalAlgebra,
        gens: Sequence[str],
        action: Mapping[tuple[str, str], Mapping[str, ExprLike]] | None = None,
        partial_zero: bool = False,
    ):
        self.name = name
        self.algebra = algebra
        self.vt = algebra.vt
        self.gens = tuple(gens)
        if len(set(self.gens)) != len(self.gens):
            raise StructureError(f"duplicate generator names in module {name!r}")
        self._gen_index = {g: i for i, g in enumerate(self.gens)}
        self.partial_zero = partial_zero
        m = len(self.gens)
        table = [[[Poly.zero(self.vt) for _ in range(m)] for _ in range(m)] for _ in range(algebra.rank)]
        if action:
            for (ga, vj), row in action.items():
                a, j = algebra.gen_index(ga), self.gen_index(vj)
                for vk, expr in row.items():
                    p = as_poly(expr, self.vt)
                    for banned in ("mu", "gam", "t"):
                        if p.uses(banned):
                            raise StructureError(
                                f"action entry {ga} . {vj} -> {vk} may only use lam, del and parameters"
                            )
                    table[a][j][self.gen_index(vk)] = p
        self.table = table

    @property
    def rank(self) -> int:
        return len(self.gens)

    def gen_index(self, name: str) -> int:
        try:
            return self._gen_index[name]
        except KeyError:
            raise StructureError(f"unknown generator {name!r} of module {self.name!r}") from None

    def gen(self, name: str) -> "ModElement":
        comps = [Poly.zero(self.vt)] * self.rank
        comps[self.gen_index(name)] = Poly.one(self.vt)
        return ModElement(self, tuple(comps))

    def gen_at(self, j: int) -> "ModElement":
        return self.gen(self.gens[j])

    def element(self, comps: Mapping[str, ExprLike]) -> "ModElement":
        out = [Poly.zero(self.vt)] * self.rank
        for g, expr in comps.items():
            out[self.gen_index(g)] = as_poly(expr, self.vt)
        return ModElement(self, tuple(out))

    def zero(self) -> "ModElement":
        return ModElement(self, tuple(Poly.zero(self.vt) for _ in self.gens))

    def action_poly(self, ga: str, vj: str, vk: str) -> Poly:
        return self.table[self.algebra.gen_index(ga)][self.gen_index(vj)][self.gen_index(vk)]

    def table_equals(self, other: "ConformalModule") -> bool:
        """Entrywise equality of action tables under positional generator matching."""
        if self.rank != other.rank or self.algebra.rank != other.algebra.rank:
            return False
        return self.table == other.table

    def __repr__(self) -> str:
        return f"ConformalModule({self.name!r}, rank {self.rank} over {self.algebra.name!r})"


class ModElement(_VectorElement):
    def __init__(self, parent: ConformalModule, comps: Sequence[Poly]):
        super().__init__(parent, comps)
        if parent.partial_zero:
            for c in self.comps:
                if c.uses("del"):
                    raise StructureError("elements of the trivial module cannot carry del")

    def partial(self) -> "ModElement":
        if self.parent.partial_zero:
            return self.parent.zero()
        d = Poly.var(self.vt, "del")
        return ModElement(self.parent, [d * c for c in self.comps])


def action_eval(a: AlgElement, v: ModElement, value: Poly) -> ModElement:
    """a_value acting on v by the sesquilinear rule."""
    M = v.parent
    if a.parent is not M.algebra:
        raise StructureError("algebra element does not act on this module")
    comps = sesquilinear_eval(
        a.comps, v.comps, lambda i, j: M.table[i][j], M.rank, value, "lam"
    )
    return ModElement(M, comps)


def action(a: AlgElement, v: ModElement, var: str) -> ModElement:
    return action_eval(a, v, require_fresh(var, a, v))


def nth_action(a: AlgElement, v: ModElement, n: int) -> ModElement:
    """a_(n) v = n! times the coefficient of var^n in a_var v."""
    for var in ("lam", "mu", "gam"):
        if not (a.uses(var) or v.uses(var)):
            break
    else:
        raise StructureError("no formal variable left for the n-th action")
    w = action(a, v, var)
    f = Fraction(factorial(n))
    return ModElement(v.parent, [f * c.coeff(var, n) for c in w.comps])


def check_module(M: ConformalModule) -> Report:
    """Module Jacobi: a_lam(b_mu v) - [a_lam b]_(lam+mu) v - b_mu(a_lam v) per triple."""
    report = Report(f"module {M.name}")
    algebra_report = check_algebra(M.algebra)
    if not algebra_report.passed:
        report.note(f"parent algebra {M.algebra.name} fails its own checks")
    lam_mu = parse_poly("lam + mu", M.vt)
    A = M.algebra
    for ga in A.gens:
        for gb in A.gens:
            for gv in M.gens:
                a, b, v = A.gen(ga), A.gen(gb), M.gen(gv)
                lhs = action(a, action(b, v, "mu"), "lam")
                t1 = action_eval(bracket(a, b, "lam"), v, lam_mu)
                t2 = action(b, action(a, v, "lam"), "mu")
                residual = lhs - t1 - t2
                if not residual.is_zero:
                    report.fail(f"({ga},{gb},{gv})", residual)
    return report


def rank1_virasoro(
    delta: ExprLike,
    alpha: ExprLike,
    *,
    algebra: LieConformalAlgebra | None = None,
    vt: VarTable | None = None,
    name: str | None = None,
    gen: str = "m",
) -> ConformalModule:
    """The rank-1 family over the Virasoro algebra with action delta*lam + del + alpha."""
    from .algebra import virasoro

    if algebra is None:
        if vt is None:
            if isinstance(delta, Poly):
                vt = delta.vt
            elif isinstance(alpha, Poly):
                vt = alpha.vt
            else:
                vt = VarTable()
        algebra = virasoro(vt)
    vt = algebra.vt
    d = as_poly(delta, vt)
    al = as_poly(alpha, vt)
    act = d * Poly.var(vt, "lam") + Poly.var(vt, "del") + al
    if name is None:
        name = f"M({delta},{alpha})"
    return ConformalModule(name, algebra, [gen], {("L", gen): {gen: act}})


def adjoint_module(A: LieConformalAlgebra, name: str | None = None) -> ConformalModule:
    """The algebra acting on itself: action table = bracket table."""
    if name is None:
        name = f"{A.name}_adj"
    M = ConformalModule(name, A, A.gens)
    M.table = [[list(row) for row in rows] for rows in A.table]
    return M


def trivial_module(A: LieConformalAlgebra, rank: int = 1, name: str = "Triv") -> ConformalModule:
    """Free module with zero action (not the scalar field: del still acts freely)."""
    return ConformalModule(name, A, [f"e{i}" for i in range(rank)])


def unit_module(A: LieConformalAlgebra) -> ConformalModule:
    """The base field as the trivial module: zero action and partial = 0."""
    return ConformalModule("k", A, ["one"], partial_zero=True)


# -- ordinary tensor product of two modules ----------------------------------

class TensorElement:
    """Finite combination of pure tensors d^a u_i (x) d^b v_j.

    Coefficients are polynomials in the formal variables and parameters but
    never in del or t: a del power on either slot is part of the basis key.
    """

    __slots__ = ("left", "right", "terms")

    def __init__(self, left: ConformalModule, right: ConformalModule, terms=None):
        if left.algebra is not right.algebra:
            raise StructureError("tensor factors over different algebras")
        self.left = left
        self.right = right
        clean: dict[tuple[int, int, int, int], Poly] = {}
        if terms:
            for key, c in terms.items():
                if not isinstance(c, Poly):
                    c = as_poly(c, left.vt)
                if c.is_zero:
                    continue
                if c.uses("del") or c.uses("t"):
                    raise StructureError("tensor coefficients cannot use del or t")
                a, i, b, j = key
                if min(a, i, b, j) < 0 or i >= left.rank or j >= right.rank:
                    raise StructureError(f"bad tensor key {key!r}")
                clean[key] = c
        self.terms = clean

    @classmethod
    def pure(cls, left: ConformalModule, right: ConformalModule, i: int = 0, j: int = 0,
             a: int = 0, b: int = 0, coeff: ExprLike = 1) -> "TensorElement":
        return cls(left, right, {(a, i, b, j): as_poly(coeff, left.vt)})

    def _same(self, other: "TensorElement") -> None:
        if self.left is not other.left or self.right is not other.right:
            raise StructureError("tensor elements over different factor modules")

    @property
    def vt(self) -> VarTable:
        return self.left.vt

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "TensorElement") -> "TensorElement":
        self._same(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, Poly.zero(self.vt)) + c
            if s.is_zero:
                out.pop(key, None)
            else:
                out[key] = s
        res = TensorElement(self.left, self.right)
        res.terms = out
        return res

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return self + other.scale(-1)

    def __neg__(self) -> "TensorElement":
        return self.scale(-1)

    def scale(self, factor: ExprLike) -> "TensorElement":
        f = as_poly(factor, self.vt)
        return TensorElement(self.left, self.right, {k: f * c for k, c in self.terms.items()})

    __rmul__ = scale

    def partial(self) -> "TensorElement":
        """Total derivative: d(x (x) y) = dx (x) y + x (x) dy."""
        out = TensorElement(self.left, self.right)
        for (a, i, b, j), c in self.terms.items():
            out = out + TensorElement(self.left, self.right, {(a + 1, i, b, j): c, (a, i, b + 1, j): c})
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TensorElement)
            and self.left is other.left
            and self.right is other.right
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((id(self.left), id(self.right), frozenset(self.terms.items())))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        pieces = []
        for key in sorted(self.terms):
            a, i, b, j = key
            lhs = self.left.gens[i] if a == 0 else f"del^{a} {self.left.gens[i]}"
            rhs = self.right.gens[j] if b == 0 else f"del^{b} {self.right.gens[j]}"
            pieces.append(f"({self.terms[key]})*{lhs}(x){rhs}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"TensorElement({self})"


def _slot_expand(w: ModElement, make_key) -> dict:
    """Turn del powers in a module element into explicit basis decorations."""
    out = {}
    for k, c in enumerate(w.comps):
        if c.is_zero:
            continue
        for s in range(c.degree("del") + 1):
            piece = c.coeff("del", s)
            if piece.is_zero:
                continue
            key = make_key(k, s)
            out[key] = out.get(key, Poly.zero(w.vt)) + piece
    return out


def ordinary_tensor_action_eval(r: AlgElement, x: TensorElement, value: Poly) -> TensorElement:
    """Leibniz rule r_value (u (x) v) = (r_value u) (x) v + u (x) (r_value v)."""
    M, N = x.left, x.right
    if r.parent is not M.algebra:
        raise StructureError("algebra element does not act on this tensor product")
    out = TensorElement(M, N)
    for (a, i, b, j), c in x.terms.items():
        du = ModElement(M, [Poly.var(M.vt, "del") ** a if k == i else Poly.zero(M.vt) for k in range(M.rank)])
        dv = ModElement(N, [Poly.var(N.vt, "del") ** b if k == j else Poly.zero(N.vt) for k in range(N.rank)])
        left_part = _slot_expand(action_eval(r, du, value), lambda k, s: (s, k, b, j))
        right_part = _slot_expand(action_eval(r, dv, value), lambda k, s: (a, i, s, k))
        for part in (left_part, right_part):
            piece = TensorElement(M, N, {key: c * p for key, p in part.items()})
            out = out + piece
    return out


def ordinary_tensor_action(r: AlgElement, x: TensorElement, var: str) -> TensorElement:
    vt = x.vt
    if var not in vt or not vt.is_formal(var) or var in ("del", "t"):
        raise StructureError(f"{var!r} is not usable as an action variable")
    if r.uses(var) or any(c.uses(var) for c in x.terms.values()):
        raise StructureError(f"variable {var!r} already occurs in an operand; pick a fresh one")
    return ordinary_tensor_action_eval(r, x, Poly.var(vt, var))
