"""Conformal linear maps, the Chom action, conformal duals and dual homomorphisms.

A conformal linear map phi: U -> V is stored as the matrix Phi[i][j](mu, del)
with phi_mu(u_j) = sum_i Phi_ij(mu, del) w_i; "mu" is the map's evaluation
variable by convention.  The extension rule phi_mu(del u) = (mu + del^V)
phi_mu(u) is applied lazily during evaluation, so conformal-linearity holds by
construction.

Conformal duals are materialized as free modules of the same rank together
with the pairing (u_j^*)_mu(p(del) u_k) = delta_jk p(mu); the del-convention
on the dual side is (p(del) f)_mu = p(-mu) f_mu, forced by (del a)_lam = -lam a_lam.
Chom(U, V) itself is never materialized (it has infinite rank over C[del]);
only its action on concrete maps is computed.
"""

from __future__ import annotations

from typing import Sequence

from .algebra import AlgElement, ExprLike, StructureError, as_poly
from .modules import ConformalModule, ModElement, action, action_eval, unit_module
from .poly import Poly, VarTable
from .reports import Report


class ConformalLinearMap:
    def __init__(self, source: ConformalModule, target: ConformalModule, matrix: Sequence[Sequence[ExprLike]]):
        if source.algebra is not target.algebra:
            raise StructureError("source and target over different algebras")
        self.source = source
        self.target = target
        vt = source.vt
        if len(matrix) != target.rank or any(len(row) != source.rank for row in matrix):
            raise StructureError("matrix shape does not match (target rank) x (source rank)")
        rows = []
        for row in matrix:
            entries = []
            for e in row:
                p = as_poly(e, vt)
                if p.uses("t"):
                    raise StructureError("map entries cannot use t")
                if target.partial_zero and p.uses("del"):
                    raise StructureError("maps into the trivial module cannot carry del")
                entries.append(p)
            rows.append(tuple(entries))
        self.matrix = tuple(rows)

    @classmethod
    def zero(cls, source: ConformalModule, target: ConformalModule) -> "ConformalLinearMap":
        return cls(source, target, [[0] * source.rank for _ in range(target.rank)])

    @classmethod
    def identity(cls, M: ConformalModule) -> "ConformalLinearMap":
        return cls(M, M, [[1 if i == j else 0 for j in range(M.rank)] for i in range(M.rank)])

    @property
    def vt(self) -> VarTable:
        return self.source.vt

    def _same(self, other: "ConformalLinearMap") -> None:
        if self.source is not other.source or self.target is not other.target:
            raise StructureError("maps between different module pairs")

    def __add__(self, other: "ConformalLinearMap") -> "ConformalLinearMap":
        self._same(other)
        return ConformalLinearMap(
            self.source, self.target,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.matrix, other.matrix)],
        )

    def __sub__(self, other: "ConformalLinearMap") -> "ConformalLinearMap":
        self._same(other)
        return ConformalLinearMap(
            self.source, self.target,
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.matrix, other.matrix)],
        )

    def __neg__(self) -> "ConformalLinearMap":
        return self.scale(-1)

    def scale(self, factor: ExprLike) -> "ConformalLinearMap":
        f = as_poly(factor, self.vt)
        return ConformalLinearMap(self.source, self.target, [[f * e for e in row] for row in self.matrix])

    __rmul__ = scale

    def partial(self) -> "ConformalLinearMap":
        """The C[del]-structure of Chom: (del phi)_mu = -mu phi_mu."""
        neg_mu = -Poly.var(self.vt, "mu")
        return self.scale(neg_mu)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.matrix for e in row)

    def uses(self, var: str) -> bool:
        return any(e.uses(var) for row in self.matrix for e in row)

    def apply_eval(self, u: ModElement, value: Poly) -> ModElement:
        """phi_value(u), with value substituted for the evaluation variable mu."""
        if u.parent is not self.source:
            raise StructureError("argument is not in the source module")
        if self.target.partial_zero:
            shift = value
        else:
            shift = value + Poly.var(self.vt, "del")
        comps = [Poly.zero(self.vt) for _ in range(self.target.rank)]
        for j, uj in enumerate(u.comps):
            if uj.is_zero:
                continue
            q = uj.substitute("del", shift)
            for i in range(self.target.rank):
                e = self.matrix[i][j]
                if not e.is_zero:
                    comps[i] = comps[i] + q * e.substitute("mu", value)
        return ModElement(self.target, comps)

    def apply(self, u: ModElement, var: str = "mu") -> ModElement:
        vt = self.vt
        if var not in vt or not vt.is_formal(var) or var in ("del", "t"):
            raise StructureError(f"{var!r} is not usable as an evaluation variable")
        if u.uses(var) or (var != "mu" and self.uses(var)):
            raise StructureError(f"variable {var!r} already occurs in an operand")
        return self.apply_eval(u, Poly.var(vt, var))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConformalLinearMap)
            and self.source is other.source
            and self.target is other.target
            and self.matrix == other.matrix
        )

    def __hash__(self) -> int:
        return hash((id(self.source), id(self.target), self.matrix))

    def __str__(self) -> str:
        rows = []
        for i, row in enumerate(self.matrix):
            for j, e in enumerate(row):
                if not e.is_zero:
                    rows.append(f"{self.source.gens[j]} -> ({e})*{self.target.gens[i]}")
        return "; ".join(rows) if rows else "0"

    def __repr__(self) -> str:
        return f"ConformalLinearMap({self})"


def chom_action_eval(a: AlgElement, phi: ConformalLinearMap, value: Poly) -> ConformalLinearMap:
    """(a_value phi)_mu u = a_value(phi_(mu-value) u) - phi_(mu-value)(a_value u)."""
    if a.parent is not phi.source.algebra:
        raise StructureError("algebra element over a different algebra")
    vt = phi.vt
    mu = Poly.var(vt, "mu")
    shifted = mu - value
    columns = []
    for j in range(phi.source.rank):
        uj = phi.source.gen_at(j)
        # phi_(mu-value)(u_j) as an element of the target
        col = ModElement(phi.target, [phi.matrix[i][j].substitute("mu", shifted) for i in range(phi.target.rank)])
        term1 = action_eval(a, col, value)
        term2 = phi.apply_eval(action_eval(a, uj, value), shifted)
        columns.append([x - y for x, y in zip(term1.comps, term2.comps)])
    matrix = [[columns[j][i] for j in range(phi.source.rank)] for i in range(phi.target.rank)]
    return ConformalLinearMap(phi.source, phi.target, matrix)


def chom_action(a: AlgElement, phi: ConformalLinearMap, var: str) -> ConformalLinearMap:
    vt = phi.vt
    if var == "mu":
        raise StructureError("mu is the map evaluation variable; pick another formal variable")
    if var not in vt or not vt.is_formal(var) or var in ("del", "t"):
        raise StructureError(f"{var!r} is not usable as an action variable")
    if a.uses(var) or phi.uses(var):
        raise StructureError(f"variable {var!r} already occurs in an operand")
    return chom_action_eval(a, phi, Poly.var(vt, var))


# -- conformal duals ----------------------------------------------------------

class DualModule(ConformalModule):
    """The conformal dual of a finite free module, with its defining pairing."""

    def __init__(self, base: ConformalModule):
        if base.partial_zero:
            raise StructureError("the trivial module has no free conformal dual here")
        A = base.algebra
        gens = [f"{g}_d" for g in base.gens]
        super().__init__(f"{base.name}^*", A, gens)
        self.base = base
        vt = base.vt
        minus = -(Poly.var(vt, "lam") + Poly.var(vt, "del"))
        for a in range(A.rank):
            for k in range(base.rank):
                for j in range(base.rank):
                    self.table[a][k][j] = -base.table[a][j][k].substitute("del", minus)


def pair_eval(f: ModElement, u: ModElement, value: Poly) -> Poly:
    """f_value(u) for f in the dual of u's module: sum_j f_j(-value) u_j(value)."""
    D = f.parent
    if not isinstance(D, DualModule) or D.base is not u.parent:
        raise StructureError("pairing requires a dual-module element against its base module")
    out = Poly.zero(f.vt)
    neg = -value
    for fj, uj in zip(f.comps, u.comps):
        if fj.is_zero or uj.is_zero:
            continue
        out = out + fj.substitute("del", neg) * uj.substitute("del", value)
    return out


def pair(f: ModElement, u: ModElement, var: str) -> Poly:
    vt = f.vt
    if var not in vt or not vt.is_formal(var) or var in ("del", "t"):
        raise StructureError(f"{var!r} is not usable as a pairing variable")
    if f.uses(var) or u.uses(var):
        raise StructureError(f"variable {var!r} already occurs in an operand")
    return pair_eval(f, u, Poly.var(vt, var))


def dual_module(M: ConformalModule) -> DualModule:
    """Construct M^* and replay the pairing relation (a_lam f)_mu(u) = -f_(mu-lam)(a_lam u)."""
    D = DualModule(M)
    A = M.algebra
    vt = M.vt
    mu = Poly.var(vt, "mu")
    lam = Poly.var(vt, "lam")
    for ga in A.gens:
        a = A.gen(ga)
        for k in range(M.rank):
            fk = D.gen_at(k)
            lhs_elt = action(a, fk, "lam")
            for j in range(M.rank):
                lhs = pair_eval(lhs_elt, M.gen_at(j), mu)
                rhs = -pair_eval(fk, action(a, M.gen_at(j), "lam"), mu - lam)
                if lhs != rhs:
                    raise StructureError(
                        f"dual-module pairing replay failed for {ga}, {M.gens[k]}^*, {M.gens[j]}"
                    )
    return D


def to_functional(f: ModElement, target: ConformalModule | None = None) -> ConformalLinearMap:
    """Realize a dual-module element as the conformal linear map base -> k."""
    D = f.parent
    if not isinstance(D, DualModule):
        raise StructureError("to_functional expects an element of a dual module")
    if target is None:
        target = unit_module(D.algebra)
    if not target.partial_zero or target.rank != 1:
        raise StructureError("functional target must be the trivial rank-1 module")
    neg_mu = -Poly.var(f.vt, "mu")
    row = [c.substitute("del", neg_mu) for c in f.comps]
    return ConformalLinearMap(D.base, target, [row])


def ident_41(f: ModElement, v: ModElement) -> ConformalLinearMap:
    """The map U -> V with (f (x) v)_mu(u) = f_(mu + del^V)(u) v, for f in U^*."""
    D = f.parent
    if not isinstance(D, DualModule):
        raise StructureError("ident_41 expects a dual-module element in the first slot")
    V = v.parent
    if V.partial_zero:
        raise StructureError("ident_41 target must be a free module")
    vt = f.vt
    shift = -(Poly.var(vt, "mu") + Poly.var(vt, "del"))
    matrix = [
        [f.comps[j].substitute("del", shift) * v.comps[i] for j in range(D.base.rank)]
        for i in range(V.rank)
    ]
    return ConformalLinearMap(D.base, V, matrix)


# -- module homomorphisms and duality -----------------------------------------

class ModuleHom:
    """A C[del]-linear map between modules, given by a matrix over Q[del, params]."""

    def __init__(self, source: ConformalModule, target: ConformalModule, matrix: Sequence[Sequence[ExprLike]]):
        if source.algebra is not target.algebra:
            raise StructureError("source and target over different algebras")
        self.source = source
        self.target = target
        vt = source.vt
        if len(matrix) != target.rank or any(len(row) != source.rank for row in matrix):
            raise StructureError("matrix shape does not match (target rank) x (source rank)")
        rows = []
        for row in matrix:
            entries = []
            for e in row:
                p = as_poly(e, vt)
                for banned in ("lam", "mu", "gam", "t"):
                    if p.uses(banned):
                        raise StructureError("homomorphism entries may only use del and parameters")
                entries.append(p)
            rows.append(tuple(entries))
        self.matrix = tuple(rows)

    @classmethod
    def identity(cls, M: ConformalModule) -> "ModuleHom":
        return cls(M, M, [[1 if i == j else 0 for j in range(M.rank)] for i in range(M.rank)])

    @classmethod
    def zero(cls, source: ConformalModule, target: ConformalModule) -> "ModuleHom":
        return cls(source, target, [[0] * source.rank for _ in range(target.rank)])

    def apply(self, u: ModElement) -> ModElement:
        if u.parent is not self.source:
            raise StructureError("argument is not in the source module")
        comps = [Poly.zero(u.vt) for _ in range(self.target.rank)]
        for j, uj in enumerate(u.comps):
            if uj.is_zero:
                continue
            for i in range(self.target.rank):
                e = self.matrix[i][j]
                if not e.is_zero:
                    comps[i] = comps[i] + uj * e
        return ModElement(self.target, comps)

    def compose(self, inner: "ModuleHom") -> "ModuleHom":
        """self after inner."""
        if inner.target is not self.source:
            raise StructureError("maps do not compose")
        n, mid, m = self.target.rank, self.source.rank, inner.source.rank
        matrix = [
            [sum((self.matrix[i][k] * inner.matrix[k][j] for k in range(mid)), Poly.zero(self.source.vt))
             for j in range(m)]
            for i in range(n)
        ]
        return ModuleHom(inner.source, self.target, matrix)

    def check(self) -> Report:
        """Verify compatibility with every generator action (del-linearity is structural)."""
        report = Report(f"homomorphism {self.source.name} -> {self.target.name}")
        A = self.source.algebra
        for ga in A.gens:
            a = A.gen(ga)
            for j in range(self.source.rank):
                uj = self.source.gen_at(j)
                lhs = self.apply(action(a, uj, "lam"))
                rhs = action(a, self.apply(uj), "lam")
                residual = lhs - rhs
                if not residual.is_zero:
                    report.fail(f"({ga},{self.source.gens[j]})", residual)
        return report

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModuleHom)
            and self.source is other.source
            and self.target is other.target
            and self.matrix == other.matrix
        )

    def __repr__(self) -> str:
        entries = "; ".join(
            f"{self.source.gens[j]} -> ({self.matrix[i][j]})*{self.target.gens[i]}"
            for i in range(self.target.rank)
            for j in range(self.source.rank)
            if not self.matrix[i][j].is_zero
        )
        return f"ModuleHom({entries or '0'})"


def dual_hom(T: ModuleHom, dual_source: DualModule | None = None, dual_target: DualModule | None = None) -> ModuleHom:
    """T^*: target^* -> source^* with [T^*(f)]_lam(u) = f_lam(T(u))."""
    hom_report = T.check()
    if not hom_report.passed:
        raise StructureError(f"not a module homomorphism:\n{hom_report.summary()}")
    Ds = dual_source if dual_source is not None else dual_module(T.source)
    Dt = dual_target if dual_target is not None else dual_module(T.target)
    if Ds.base is not T.source or Dt.base is not T.target:
        raise StructureError("supplied duals do not match the homomorphism")
    neg = -Poly.var(T.source.vt, "del")
    matrix = [[T.matrix[i][j].substitute("del", neg) for i in range(T.target.rank)] for j in range(T.source.rank)]
    S = ModuleHom(Dt, Ds, matrix)
    # replay the defining pairing identity on generators
    lam = Poly.var(T.source.vt, "lam")
    for i in range(T.target.rank):
        fi = Dt.gen_at(i)
        for j in range(T.source.rank):
            lhs = pair_eval(S.apply(fi), T.source.gen_at(j), lam)
            rhs = pair_eval(fi, T.apply(T.source.gen_at(j)), lam)
            if lhs != rhs:
                raise StructureError("dual homomorphism replay failed")
    return S


def double_dual_iso(M: ConformalModule) -> ModuleHom:
    """u_i -> (u_i^*)^*; the double dual has the same table entry by entry."""
    dd = dual_module(dual_module(M))
    if not M.table_equals(dd):
        raise StructureError("double dual table differs from the original (should be impossible)")
    matrix = [[1 if i == j else 0 for j in range(M.rank)] for i in range(M.rank)]
    return ModuleHom(M, dd, matrix)
