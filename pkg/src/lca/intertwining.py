"""Intertwining operators between triples of conformal modules.

An operator of type (W; M, N) is stored on generator pairs: the table
C[i][j][k](gam, del) with I_gam(u_i, v_j) = sum_k C_ijk(gam, del) w_k.  The
translation rule I_gam(del u, v) = -gam I_gam(u, v) and the derivation rule
I_gam(u, del v) = (gam + del) I_gam(u, v) are applied lazily during
evaluation, so they hold by construction and the only checkable axiom is the
Jacobi identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .algebra import ExprLike, StructureError, as_poly, require_fresh, sesquilinear_eval
from .chom import ConformalLinearMap, DualModule, chom_action, dual_module, pair_eval
from .modules import ConformalModule, ModElement, action, adjoint_module
from .poly import Poly
from .reports import Report


class IntertwiningOperator:
    def __init__(
        self,
        name: str,
        w: ConformalModule,
        m: ConformalModule,
        n: ConformalModule,
        table: Mapping[tuple[str, str], Mapping[str, ExprLike]] | None = None,
    ):
        if not (w.algebra is m.algebra is n.algebra):
            raise StructureError("all three modules must share one algebra")
        self.name = name
        self.w = w
        self.m = m
        self.n = n
        self.vt = w.vt
        tab = [[[Poly.zero(self.vt) for _ in range(w.rank)] for _ in range(n.rank)] for _ in range(m.rank)]
        if table:
            for (um, vn), row in table.items():
                i, j = m.gen_index(um), n.gen_index(vn)
                for wk, expr in row.items():
                    p = as_poly(expr, self.vt)
                    for banned in ("lam", "mu", "t"):
                        if p.uses(banned):
                            raise StructureError(
                                f"operator entry ({um},{vn}) -> {wk} may only use gam, del and parameters"
                            )
                    tab[i][j][w.gen_index(wk)] = p
        self.table = tab

    def entry(self, um: str, vn: str, wk: str) -> Poly:
        return self.table[self.m.gen_index(um)][self.n.gen_index(vn)][self.w.gen_index(wk)]

    def table_equals(self, other: "IntertwiningOperator") -> bool:
        return self.table == other.table

    def __repr__(self) -> str:
        return f"IntertwiningOperator({self.name!r}: ({self.w.name}; {self.m.name}, {self.n.name}))"


def iop_eval(I: IntertwiningOperator, u: ModElement, v: ModElement, value: Poly) -> ModElement:
    """I_value(u, v) by bilinearity and the translation/derivation rules."""
    if u.parent is not I.m or v.parent is not I.n:
        raise StructureError("arguments are not in the operator's source modules")
    comps = sesquilinear_eval(
        u.comps, v.comps, lambda i, j: I.table[i][j], I.w.rank, value, "gam"
    )
    return ModElement(I.w, comps)


def iop_apply(I: IntertwiningOperator, u: ModElement, v: ModElement, var: str) -> ModElement:
    return iop_eval(I, u, v, require_fresh(var, u, v))


def check_iop(I: IntertwiningOperator) -> Report:
    """Jacobi: a_lam I_gam(u,v) - I_(lam+gam)(a_lam u, v) - I_gam(u, a_lam v) per triple."""
    report = Report(f"intertwining operator {I.name}")
    A = I.w.algebra
    vt = I.vt
    gam = Poly.var(vt, "gam")
    lam_gam = Poly.var(vt, "lam") + gam
    for ga in A.gens:
        a = A.gen(ga)
        for um in I.m.gens:
            for vn in I.n.gens:
                u, v = I.m.gen(um), I.n.gen(vn)
                lhs = action(a, iop_eval(I, u, v, gam), "lam")
                t1 = iop_eval(I, action(a, u, "lam"), v, lam_gam)
                t2 = iop_eval(I, u, action(a, v, "lam"), gam)
                residual = lhs - t1 - t2
                if not residual.is_zero:
                    report.fail(f"({ga},{um},{vn})", residual)
    return report


def module_action_iop(M: ConformalModule, adjoint: ConformalModule | None = None) -> IntertwiningOperator:
    """The lambda-action of M as an operator of type (M; R, M) over the adjoint module."""
    R = adjoint if adjoint is not None else adjoint_module(M.algebra)
    I = IntertwiningOperator(f"action({M.name})", M, R, M)
    lam_to_gam = Poly.var(M.vt, "gam")
    for a in range(M.algebra.rank):
        for j in range(M.rank):
            for k in range(M.rank):
                I.table[a][j][k] = M.table[a][j][k].substitute("lam", lam_to_gam)
    return I


def transpose(I: IntertwiningOperator) -> IntertwiningOperator:
    """(I^t)_gam(v, u) = I_(-gam-del)(u, v), of type (W; N, M)."""
    out = IntertwiningOperator(f"{I.name}^t", I.w, I.n, I.m)
    minus = -(Poly.var(I.vt, "gam") + Poly.var(I.vt, "del"))
    for i in range(I.m.rank):
        for j in range(I.n.rank):
            for k in range(I.w.rank):
                out.table[j][i][k] = I.table[i][j][k].substitute("gam", minus)
    return out


def adjoint(
    I: IntertwiningOperator,
    dual_n: DualModule | None = None,
    dual_w: DualModule | None = None,
) -> IntertwiningOperator:
    """(I^*)_gam(u, f) with [(I^*)_gam(u, f)]_mu(v) = -f_(mu-gam)(I_gam(u, v)).

    The result has type (N^*; M, W^*).  The defining identity is replayed
    symbolically on all generator triples before returning.
    """
    Nd = dual_n if dual_n is not None else dual_module(I.n)
    Wd = dual_w if dual_w is not None else dual_module(I.w)
    if Nd.base is not I.n or Wd.base is not I.w:
        raise StructureError("supplied duals do not match the operator")
    out = IntertwiningOperator(f"{I.name}^*", Nd, I.m, Wd)
    vt = I.vt
    minus = -(Poly.var(vt, "del") + Poly.var(vt, "gam"))
    for i in range(I.m.rank):
        for j in range(I.n.rank):
            for k in range(I.w.rank):
                out.table[i][k][j] = -I.table[i][j][k].substitute("del", minus)
    # replay: evaluate both sides through the generic evaluators
    mu = Poly.var(vt, "mu")
    shift = mu - Poly.var(vt, "gam")
    for i, um in enumerate(I.m.gens):
        for j, vn in enumerate(I.n.gens):
            for k, wk in enumerate(I.w.gens):
                x = iop_apply(out, I.m.gen(um), Wd.gen_at(k), "gam")
                lhs = pair_eval(x, I.n.gen(vn), mu)
                y = iop_apply(I, I.m.gen(um), I.n.gen(vn), "gam")
                rhs = -pair_eval(Wd.gen_at(k), y, shift)
                if lhs != rhs:
                    raise StructureError(f"adjoint replay failed at ({um},{vn},{wk})")
    return out


@dataclass
class PsiFamily:
    """The maps psi(u_i): N -> W with I_gam(u, v) = [psi(u)]_gam(v)."""

    operator: IntertwiningOperator
    maps: dict[str, ConformalLinearMap]
    report: Report

    def psi(self, u: ModElement) -> ConformalLinearMap:
        """psi extended to an arbitrary element of M."""
        I = self.operator
        mu = Poly.var(I.vt, "mu")
        cols = [iop_eval(I, u, I.n.gen_at(j), mu) for j in range(I.n.rank)]
        matrix = [[cols[j].comps[k] for j in range(I.n.rank)] for k in range(I.w.rank)]
        return ConformalLinearMap(I.n, I.w, matrix)


def to_hom_psi(I: IntertwiningOperator) -> PsiFamily:
    """Read off psi(u_i) from the table and verify it intertwines del and the action."""
    report = Report(f"psi correspondence for {I.name}")
    mu = Poly.var(I.vt, "mu")
    family = PsiFamily(I, {}, report)
    for i, um in enumerate(I.m.gens):
        matrix = [
            [I.table[i][j][k].substitute("gam", mu) for j in range(I.n.rank)]
            for k in range(I.w.rank)
        ]
        family.maps[um] = ConformalLinearMap(I.n, I.w, matrix)
    neg_mu = -mu
    for um in I.m.gens:
        u = I.m.gen(um)
        # translation: psi(del u) = del . psi(u) in Chom, i.e. the matrix scales by -mu
        lhs = family.psi(u.partial())
        rhs = family.maps[um].scale(neg_mu)
        if lhs.matrix != rhs.matrix:
            report.fail(f"translation ({um})", f"{lhs} != {rhs}")
        # action compatibility: psi(a_lam u) = a_lam(psi(u))
        for ga in I.w.algebra.gens:
            a = I.w.algebra.gen(ga)
            lhs2 = family.psi(action(a, u, "lam"))
            rhs2 = chom_action(a, family.maps[um], "lam")
            diff = lhs2 - rhs2
            if not diff.is_zero:
                report.fail(f"action ({ga},{um})", diff)
    return family
