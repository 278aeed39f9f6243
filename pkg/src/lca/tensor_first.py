"""Tensor product of modules, first construction.

Work happens in the space of strings k[t] (x) M (x) N.  The n-th product of
an algebra element on a basis string t^n (x) U (x) V is the finite sum

    a_(m)(t^n (x) U (x) V) = sum_{i<=m} C(m,i) t^(n+m-i) (x) a_(i)U (x) V
                             + t^n (x) U (x) a_(m)V,

which assembles the generating-series action a_lam(u (x)_gam v) =
(a_lam u) (x)_(lam+gam) v + u (x)_gam (a_lam v).  The full lambda-form on the
unquotiented string space has infinitely many powers, so callers either work
with n-th products directly or pass an explicit truncation order.

The quotient that turns strings into the tensor module is realized as a
rewriting system driven by a user-supplied truncation table l[i][j] (the
assumed vanishing level per generator pair):

  (R1) t^n (x) del^a u (x) V -> (-1)^a n!/(n-a)! t^(n-a) (x) u (x) V  (0 if a > n)
  (R2) t^n (x) u_i (x) del^b v_j -> sum_{r<=min(b,n)} C(b,r) n!/(n-r)!
           (total-del)^(b-r) (t^(n-r) (x) u_i (x) v_j),
       dropping every piece whose t-exponent reaches l[i][j].

Normal forms are supported on (total-del)^s (t^c (x) u_i (x) v_j) with
c < l[i][j]; the b-slot of a normalized key counts total-del powers.  All
results are conditional on the truncation table.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .algebra import AlgElement, ExprLike, StructureError, as_poly, nth_product
from .intertwining import IntertwiningOperator, check_iop
from .modules import ConformalModule, ModElement, action, check_module
from .poly import Poly, PolyError, VarTable
from .reports import Report

_binomial = math.comb

DEFAULT_STEP_BUDGET = 200_000


class RewritingBudgetError(RuntimeError):
    """The rewriting exceeded its step budget (LCA_STEP_BUDGET overrides it)."""


def step_budget() -> int:
    raw = os.environ.get("LCA_STEP_BUDGET")
    if raw is None:
        return DEFAULT_STEP_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise PolyError(f"LCA_STEP_BUDGET must be an integer, got {raw!r}") from None


class TruncationTable:
    """Assumed vanishing levels l[i][j] per (left generator, right generator) pair."""

    def __init__(self, left: ConformalModule, right: ConformalModule,
                 levels: Mapping[tuple[str, str], int] | int = 1):
        self.left = left
        self.right = right
        table = [[1] * right.rank for _ in range(left.rank)]
        if isinstance(levels, int):
            if levels < 0:
                raise StructureError("truncation levels must be non-negative")
            table = [[levels] * right.rank for _ in range(left.rank)]
        else:
            for (gu, gv), l in levels.items():
                if l < 0:
                    raise StructureError("truncation levels must be non-negative")
                table[left.gen_index(gu)][right.gen_index(gv)] = int(l)
        self.table = table

    @classmethod
    def uniform(cls, left: ConformalModule, right: ConformalModule, level: int = 1) -> "TruncationTable":
        return cls(left, right, level)

    def level(self, i: int, j: int) -> int:
        return self.table[i][j]

    @property
    def max_level(self) -> int:
        return max((l for row in self.table for l in row), default=0)

    def describe(self) -> str:
        if all(l == self.table[0][0] for row in self.table for l in row) and self.table:
            return f"uniform:{self.table[0][0]}"
        pairs = ", ".join(
            f"({self.left.gens[i]},{self.right.gens[j]})={self.table[i][j]}"
            for i in range(self.left.rank)
            for j in range(self.right.rank)
        )
        return pairs


class StringElement:
    """Combination of basis strings t^n (x) del^a u_i (x) del^b v_j.

    Keys are (n, a, i, b, j); coefficients are polynomials in the formal
    variables and parameters, never in del or t.
    """

    __slots__ = ("left", "right", "terms")

    def __init__(self, left: ConformalModule, right: ConformalModule, terms=None):
        if left.algebra is not right.algebra:
            raise StructureError("string factors over different algebras")
        self.left = left
        self.right = right
        clean: dict[tuple[int, int, int, int, int], Poly] = {}
        if terms:
            for key, c in terms.items():
                if not isinstance(c, Poly):
                    c = as_poly(c, left.vt)
                if c.is_zero:
                    continue
                if c.uses("del") or c.uses("t"):
                    raise StructureError("string coefficients cannot use del or t")
                n, a, i, b, j = key
                if min(key) < 0 or i >= left.rank or j >= right.rank:
                    raise StructureError(f"bad string key {key!r}")
                clean[key] = c
        self.terms = clean

    @classmethod
    def pure(cls, left: ConformalModule, right: ConformalModule,
             n: int = 0, a: int = 0, i: int = 0, b: int = 0, j: int = 0,
             coeff: ExprLike = 1) -> "StringElement":
        return cls(left, right, {(n, a, i, b, j): as_poly(coeff, left.vt)})

    def _same(self, other: "StringElement") -> None:
        if self.left is not other.left or self.right is not other.right:
            raise StructureError("string elements over different factor modules")

    @property
    def vt(self) -> VarTable:
        return self.left.vt

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "StringElement") -> "StringElement":
        self._same(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, Poly.zero(self.vt)) + c
            if s.is_zero:
                out.pop(key, None)
            else:
                out[key] = s
        res = StringElement(self.left, self.right)
        res.terms = out
        return res

    def __sub__(self, other: "StringElement") -> "StringElement":
        return self + other.scale(-1)

    def __neg__(self) -> "StringElement":
        return self.scale(-1)

    def scale(self, factor: ExprLike) -> "StringElement":
        f = as_poly(factor, self.vt)
        return StringElement(self.left, self.right, {k: f * c for k, c in self.terms.items()})

    __rmul__ = scale

    def partial(self) -> "StringElement":
        """del(t^n (x) u (x) v) = t^n (x) del u (x) v + t^n (x) u (x) del v."""
        out = StringElement(self.left, self.right)
        for (n, a, i, b, j), c in self.terms.items():
            out = out + StringElement(self.left, self.right,
                                      {(n, a + 1, i, b, j): c, (n, a, i, b + 1, j): c})
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StringElement)
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
            n, a, i, b, j = key
            lhs = self.left.gens[i] if a == 0 else f"del^{a} {self.left.gens[i]}"
            rhs = self.right.gens[j] if b == 0 else f"del^{b} {self.right.gens[j]}"
            pieces.append(f"({self.terms[key]})*t^{n}(x){lhs}(x){rhs}")
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"StringElement({self})"


def _mod_slot_expand(w: ModElement, make_key, out: dict, factor: Poly) -> None:
    for k, c in enumerate(w.comps):
        if c.is_zero:
            continue
        for s in range(c.degree("del") + 1):
            piece = c.coeff("del", s)
            if piece.is_zero:
                continue
            key = make_key(k, s)
            val = out.get(key, Poly.zero(w.vt)) + factor * piece
            if val.is_zero:
                out.pop(key, None)
            else:
                out[key] = val


@lru_cache(maxsize=8192)
def _action_slices(r: AlgElement, module: ConformalModule, gen: int, dexp: int) -> tuple[ModElement, ...]:
    """All n-th actions of r on del^dexp applied to one generator, from one evaluation."""
    vt = module.vt
    U = ModElement(module, [Poly.var(vt, "del") ** dexp if k == gen else Poly.zero(vt) for k in range(module.rank)])
    for var in ("lam", "mu", "gam"):
        if not r.uses(var):
            break
    else:
        raise StructureError("no formal variable left for the string action")
    w = action(r, U, var)
    top = max((c.degree(var) for c in w.comps), default=-1)
    slices = []
    for p in range(top + 1):
        f = Fraction(math.factorial(p))
        slices.append(ModElement(module, [f * c.coeff(var, p) for c in w.comps]))
    return tuple(slices)


def f0_nth_action(r: AlgElement, m: int, x: StringElement) -> StringElement:
    """r_(m) acting on a string element; always a finite exact sum."""
    if m < 0:
        raise StructureError("product index must be non-negative")
    M, N = x.left, x.right
    if r.parent is not M.algebra:
        raise StructureError("algebra element does not act on this string space")
    out: dict[tuple[int, int, int, int, int], Poly] = {}
    for (n, a, i, b, j), c in x.terms.items():
        left_slices = _action_slices(r, M, i, a)
        for p in range(min(m, len(left_slices) - 1) + 1):
            w1 = left_slices[p]
            if w1.is_zero:
                continue
            factor = c * Fraction(_binomial(m, p))
            _mod_slot_expand(w1, lambda k, s, _n=n + m - p, _b=b, _j=j: (_n, s, k, _b, _j), out, factor)
        right_slices = _action_slices(r, N, j, b)
        if m < len(right_slices):
            w2 = right_slices[m]
            if not w2.is_zero:
                _mod_slot_expand(w2, lambda k, s, _n=n, _a=a, _i=i: (_n, _a, _i, s, k), out, c)
    res = StringElement(M, N)
    res.terms = out
    return res


def f0_action(r: AlgElement, x: StringElement, var: str, max_power: int) -> StringElement:
    """The lambda-form sum_{m<=max_power} var^m/m! r_(m) x.

    The unquotiented string space is not conformal, so the series generally
    has unbounded order; max_power is the explicit truncation order.
    """
    vt = x.vt
    if var not in vt or not vt.is_formal(var) or var in ("del", "t"):
        raise StructureError(f"{var!r} is not usable as an action variable")
    if r.uses(var) or any(c.uses(var) for c in x.terms.values()):
        raise StructureError(f"variable {var!r} already occurs in an operand")
    v = Poly.var(vt, var)
    out = StringElement(x.left, x.right)
    for m in range(max_power + 1):
        piece = f0_nth_action(r, m, x)
        if not piece.is_zero:
            out = out + piece.scale(v ** m * Fraction(1, math.factorial(m)))
    return out


def check_f0_module(M: ConformalModule, N: ConformalModule, degree_bound: int) -> Report:
    """Module axioms for the string-space action, in n-th product form.

    Checks, for all basis strings with exponents up to degree_bound and all
    product indices p, q up to degree_bound:
      sesquilinearity   (del a)_(p) x = -p a_(p-1) x
      derivation        a_(p)(del x) = del(a_(p) x) + p a_(p-1) x
      Jacobi            a_(p)(b_(q) x) - b_(q)(a_(p) x)
                          = sum_i C(p,i) (a_(i) b)_(p+q-i) x
    """
    if degree_bound < 0:
        raise StructureError("degree bound must be non-negative")
    report = Report(f"string-space module law for ({M.name}, {N.name})")
    A = M.algebra
    bound = degree_bound
    strings = [
        StringElement.pure(M, N, n, a, i, b, j)
        for n in range(bound + 1)
        for a in range(bound + 1)
        for i in range(M.rank)
        for b in range(bound + 1)
        for j in range(N.rank)
    ]
    gens = [A.gen(g) for g in A.gens]
    for x in strings:
        key = next(iter(x.terms))
        for a in gens:
            for p in range(bound + 1):
                lhs = f0_nth_action(a.partial(), p, x)
                rhs = f0_nth_action(a, p - 1, x).scale(-p) if p else StringElement(M, N)
                if not (lhs - rhs).is_zero:
                    report.fail(f"sesquilinearity t^{key[0]} key={key} p={p}", lhs - rhs)
                lhs2 = f0_nth_action(a, p, x.partial())
                rhs2 = f0_nth_action(a, p, x).partial()
                if p:
                    rhs2 = rhs2 + f0_nth_action(a, p - 1, x).scale(p)
                if not (lhs2 - rhs2).is_zero:
                    report.fail(f"derivation key={key} p={p}", lhs2 - rhs2)
        for a in gens:
            for b in gens:
                for p in range(bound + 1):
                    for q in range(bound + 1):
                        lhs = f0_nth_action(a, p, f0_nth_action(b, q, x)) - f0_nth_action(
                            b, q, f0_nth_action(a, p, x)
                        )
                        rhs = StringElement(M, N)
                        for i in range(p + 1):
                            ab = nth_product(a, b, i)
                            if ab.is_zero:
                                continue
                            rhs = rhs + f0_nth_action(ab, p + q - i, x).scale(Fraction(_binomial(p, i)))
                        if not (lhs - rhs).is_zero:
                            report.fail(f"Jacobi key={key} p={p} q={q}", lhs - rhs)
    return report


def normalize(x: StringElement, trunc: TruncationTable, budget: int | None = None) -> StringElement:
    """Confluent normal form under (R1), the t-degree kills, and the
    right-slot conversion to total-del powers.

    In the output, a key (c, 0, i, s, j) stands for (total-del)^s applied to
    t^c (x) u_i (x) v_j, with c < l[i][j]; under a uniform level-1 table the
    support is exactly the (0, 0, i, s, j) keys.
    """
    if trunc.left is not x.left or trunc.right is not x.right:
        raise StructureError("truncation table is for different modules")
    if budget is None:
        budget = step_budget()
    steps = 0
    out: dict[tuple[int, int, int, int, int], Poly] = {}
    for (n, a, i, b, j), c in x.terms.items():
        # (R1): strip the left-slot del powers
        if a > n:
            continue
        c1 = c * Fraction((-1) ** a * math.factorial(n) // math.factorial(n - a))
        n1 = n - a
        level = trunc.level(i, j)
        # right-slot conversion, killing t-exponents at or above the level
        for r in range(min(b, n1) + 1):
            steps += 1
            if steps > budget:
                raise RewritingBudgetError(
                    f"rewriting exceeded {budget} steps on key {(n, a, i, b, j)}; "
                    "set LCA_STEP_BUDGET to raise the budget"
                )
            t_exp = n1 - r
            if t_exp >= level:
                continue
            key = (t_exp, 0, i, b - r, j)
            coeff = c1 * Fraction(_binomial(b, r) * math.factorial(n1) // math.factorial(n1 - r))
            val = out.get(key, Poly.zero(x.vt)) + coeff
            if val.is_zero:
                out.pop(key, None)
            else:
                out[key] = val
    res = StringElement(x.left, x.right)
    res.terms = out
    return res


@dataclass
class TensorConstruction:
    """Result of a tensor-product construction: module, canonical operator, report."""

    module: ConformalModule | None
    operator: IntertwiningOperator | None
    report: Report

    @property
    def ok(self) -> bool:
        return self.module is not None and self.report.passed


def induced_module(M: ConformalModule, N: ConformalModule,
                   trunc: TruncationTable | None = None) -> TensorConstruction:
    """Read off the finite module on the generators t^0 (x) u_i (x) v_j.

    Computes the normalized action of every algebra generator on every
    residual generator, reports closure failure if a result leaves the
    C[del]-span of those generators, and packages the module together with
    the canonical operator u (x)_gam v.
    """
    if M.algebra is not N.algebra:
        raise StructureError("modules over different algebras")
    if trunc is None:
        trunc = TruncationTable.uniform(M, N, 1)
    A = M.algebra
    vt = M.vt
    report = Report(f"first construction for ({M.name}, {N.name})")
    report.note(f"conditional on truncation table {trunc.describe()}")

    d_lam = max((p.degree("lam") for a in range(A.rank) for row in M.table[a] for p in row), default=0)
    d_lam = max(d_lam, max((p.degree("lam") for a in range(A.rank) for row in N.table[a] for p in row), default=0))
    d_del = max((p.degree("del") for a in range(A.rank) for row in M.table[a] for p in row), default=0)
    d_del = max(d_del, max((p.degree("del") for a in range(A.rank) for row in N.table[a] for p in row), default=0))
    m_max = max(d_lam, 0) + max(d_del, 0) + trunc.max_level

    pairs = [(i, j) for i in range(M.rank) for j in range(N.rank)]
    gen_names = [f"{M.gens[i]}_x_{N.gens[j]}" for i, j in pairs]
    pair_index = {p: k for k, p in enumerate(pairs)}

    action_table: dict[tuple[str, str], dict[str, Poly]] = {}
    lam = Poly.var(vt, "lam")
    closure_ok = True
    for ga in A.gens:
        a = A.gen(ga)
        for (i, j), w_name in zip(pairs, gen_names):
            w = StringElement.pure(M, N, n=0, a=0, i=i, b=0, j=j)
            row = {name: Poly.zero(vt) for name in gen_names}
            for m in range(m_max + 1):
                y = normalize(f0_nth_action(a, m, w), trunc)
                if m == m_max and not y.is_zero:
                    closure_ok = False
                    report.fail(
                        f"lambda-degree overflow ({ga},{w_name})",
                        f"r_({m}) does not normalize to zero: {y}",
                    )
                    continue
                for (n1, a1, i1, s, j1), c in y.terms.items():
                    if n1 != 0 or a1 != 0:
                        closure_ok = False
                        report.fail(
                            f"closure ({ga},{w_name})",
                            f"normalized action leaves the generator span: {y}",
                        )
                        break
                    tgt = gen_names[pair_index[(i1, j1)]]
                    row[tgt] = row[tgt] + c * lam ** m * Fraction(1, math.factorial(m)) * Poly.var(vt, "del") ** s
            action_table[(ga, w_name)] = row
    if not closure_ok:
        return TensorConstruction(None, None, report)

    module = ConformalModule(
        f"T1({M.name},{N.name})", A, gen_names,
        {key: {k: v for k, v in row.items() if not v.is_zero} for key, row in action_table.items()},
    )
    report.merge(check_module(module))

    # canonical operator u (x)_gam v: table from the normalized series coefficients
    op = IntertwiningOperator(f"F1({M.name},{N.name})", module, M, N)
    gam = Poly.var(vt, "gam")
    ok = True
    for (i, j), w_name in zip(pairs, gen_names):
        for n in range(trunc.level(i, j)):
            y = normalize(StringElement.pure(M, N, n=n, a=0, i=i, b=0, j=j), trunc)
            for (n1, a1, i1, s, j1), c in y.terms.items():
                if n1 != 0 or a1 != 0:
                    ok = False
                    report.fail(
                        f"operator ({M.gens[i]},{N.gens[j]})",
                        f"series coefficient t^{n} leaves the generator span: {y}",
                    )
                    continue
                k = module.gen_index(gen_names[pair_index[(i1, j1)]])
                op.table[i][j][k] = op.table[i][j][k] + c * gam ** n * Fraction(
                    1, math.factorial(n)
                ) * Poly.var(vt, "del") ** s
    if not ok:
        return TensorConstruction(module, None, report)
    report.merge(check_iop(op))
    return TensorConstruction(module, op, report)
