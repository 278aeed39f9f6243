"""Tensor product of modules, second construction.

For finite free M and N, build the candidate finite submodule of
Chom(M, N^*) generated by the maps u_a^* (x) v_b^* (one per dual generator
pair), certify that the algebra action closes on those generators by solving
a linear system over the parameter fraction field, and dualize the resulting
finite presentation.  The canonical operator is the adjoint of the transpose
of the inclusion operator F, with F_gam(f, u) = f_gam(u).

Uniqueness of a finite submodule is never claimed: everything is reported as
a candidate, and every denominator met during the solve is surfaced as a side
condition on the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import StructureError
from .chom import (
    ConformalLinearMap,
    DualModule,
    chom_action,
    dual_module,
    ident_41,
    pair_eval,
)
from .intertwining import IntertwiningOperator, adjoint, check_iop, iop_apply, transpose
from .modules import ConformalModule, check_module
from .poly import Frac, Poly, VarTable
from .reports import Report
from .tensor_first import TensorConstruction, TruncationTable, induced_module


def solve_linear(rows: list[list[Poly]], rhs: list[Poly], vt: VarTable):
    """Gaussian elimination over the parameter fraction field.

    Returns (solution, side_conditions, residual_labels); solution is None if
    the system is inconsistent.  Free variables are set to zero.  Every
    non-constant pivot numerator is recorded as a side condition (it must be
    nonzero for the elimination to be valid).
    """
    n_eq = len(rows)
    n_var = len(rows[0]) if rows else 0
    A = [[Frac(e) for e in row] for row in rows]
    b = [Frac(e) for e in rhs]
    side: list[Poly] = []
    pivots: list[tuple[int, int]] = []
    row_i = 0
    for col in range(n_var):
        pivot_row = None
        for r in range(row_i, n_eq):
            if not A[r][col].is_zero:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        A[row_i], A[pivot_row] = A[pivot_row], A[row_i]
        b[row_i], b[pivot_row] = b[pivot_row], b[row_i]
        piv = A[row_i][col]
        if not piv.num.is_constant():
            if piv.num not in side:
                side.append(piv.num)
        for r in range(n_eq):
            if r != row_i and not A[r][col].is_zero:
                factor = A[r][col] / piv
                for c2 in range(col, n_var):
                    A[r][c2] = A[r][c2] - factor * A[row_i][c2]
                b[r] = b[r] - factor * b[row_i]
        pivots.append((row_i, col))
        row_i += 1
        if row_i == n_eq:
            break
    residual_rows = [r for r in range(row_i, n_eq) if not b[r].is_zero]
    if residual_rows:
        return None, side, [str(b[r]) for r in residual_rows]
    solution = [Frac.zero(vt) for _ in range(n_var)]
    for r, col in reversed(pivots):
        acc = b[r]
        for c2 in range(col + 1, n_var):
            if not A[r][c2].is_zero and not solution[c2].is_zero:
                acc = acc - A[r][c2] * solution[c2]
        solution[col] = acc / A[r][col]
    return solution, side, []


@dataclass
class FracPoly:
    """A polynomial in (lam, del) with coefficients in the parameter fraction field."""

    vt: VarTable
    coeffs: dict[tuple[int, int], Frac] = field(default_factory=dict)

    def set(self, p: int, q: int, value: Frac) -> None:
        if value.is_zero:
            self.coeffs.pop((p, q), None)
        else:
            self.coeffs[(p, q)] = value

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def denominators(self) -> list[Poly]:
        out = []
        for c in self.coeffs.values():
            if not c.is_polynomial() and c.den not in out:
                out.append(c.den)
        return out

    def to_poly(self) -> Poly:
        """Only valid when every coefficient is polynomial (constant denominator)."""
        lam = Poly.var(self.vt, "lam")
        d = Poly.var(self.vt, "del")
        out = Poly.zero(self.vt)
        for (p, q), c in sorted(self.coeffs.items()):
            if not c.is_polynomial():
                raise StructureError(f"coefficient has a parameter denominator: {c}")
            out = out + c.num * lam ** p * d ** q
        return out

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        pieces = []
        for (p, q), c in sorted(self.coeffs.items()):
            mono = "*".join(
                ([f"lam^{p}" if p > 1 else "lam"] if p else [])
                + ([f"del^{q}" if q > 1 else "del"] if q else [])
            )
            pieces.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(pieces)


@dataclass
class CandidateSubmodule:
    """The candidate finite submodule of Chom(M, N^*) with its closure certificate."""

    left: ConformalModule
    right: ConformalModule
    right_dual: DualModule
    gen_names: list[str]
    gens: list[ConformalLinearMap]
    certificate: dict[tuple[str, str], list[FracPoly]]
    side_conditions: list[str]
    module: ConformalModule | None
    report: Report

    @property
    def ok(self) -> bool:
        return self.report.passed


def candidate_delta(M: ConformalModule, N: ConformalModule) -> CandidateSubmodule:
    """Build the generators u_a^* (x) v_b^* and certify closure under the action.

    For each algebra generator g and each candidate generator psi, the
    membership g_lam psi = sum c(lam, del) psi' is solved by matching
    coefficients of all (lam, mu, del)-monomials; c lives over the parameter
    fraction field and p(del) acts on a map as p(-mu).
    """
    if M.algebra is not N.algebra:
        raise StructureError("modules over different algebras")
    A = M.algebra
    vt = M.vt
    report = Report(f"candidate submodule for ({M.name}, {N.name})")
    Md = dual_module(M)
    Nd = dual_module(N)
    pairs = [(a, b) for a in range(M.rank) for b in range(N.rank)]
    gen_names = [f"psi_{M.gens[a]}_{N.gens[b]}" for a, b in pairs]
    gens = [ident_41(Md.gen_at(a), Nd.gen_at(b)) for a, b in pairs]

    certificate: dict[tuple[str, str], list[FracPoly]] = {}
    side_conditions: list[str] = []
    if not gens:
        report.note("no generators: empty submodule is vacuously closed")
        module = ConformalModule(f"Delta({M.name},{N.name}^*)", A, [])
        return CandidateSubmodule(M, N, Nd, gen_names, gens, certificate, side_conditions, module, report)

    lam = Poly.var(vt, "lam")
    mu = Poly.var(vt, "mu")
    neg_mu = -mu

    for ga in A.gens:
        g = A.gen(ga)
        for s, name in enumerate(gen_names):
            T = chom_action(g, gens[s], "lam")
            deg_l = max((e.degree("lam") for row in T.matrix for e in row), default=0)
            deg_m = max((e.degree("mu") for row in T.matrix for e in row), default=0)
            deg_l, deg_m = max(deg_l, 0), max(deg_m, 0)
            unknowns = [
                (s2, p, q)
                for s2 in range(len(gens))
                for p in range(deg_l + 1)
                for q in range(deg_m + 1)
            ]
            # collect the monomial support in (lam, mu, del) of both sides
            columns: dict[tuple[int, ...], int] = {}
            matrix_rows: dict[tuple[int, int], dict[tuple[int, ...], Poly]] = {}

            def mono_split(p: Poly):
                """Split into {formal (lam,mu,del,gam,t) exponents -> parameter poly}."""
                out: dict[tuple[int, ...], Poly] = {}
                for exps, c in p.terms.items():
                    formal = exps[: len(vt.formal_vars)]
                    rest = (0,) * len(vt.formal_vars) + exps[len(vt.formal_vars):]
                    piece = out.setdefault(formal, Poly.zero(vt))
                    piece.terms[rest] = piece.terms.get(rest, Fraction(0)) + c
                return out

            coeff_cols: list[dict[tuple[int, int], dict[tuple[int, ...], Poly]]] = []
            for (s2, p, q) in unknowns:
                basis = gens[s2].scale(lam ** p * neg_mu ** q)
                entry_map: dict[tuple[int, int], dict[tuple[int, ...], Poly]] = {}
                for i in range(len(basis.matrix)):
                    for j in range(len(basis.matrix[i])):
                        e = basis.matrix[i][j]
                        if not e.is_zero:
                            entry_map[(i, j)] = mono_split(e)
                coeff_cols.append(entry_map)
            rhs_map: dict[tuple[int, int], dict[tuple[int, ...], Poly]] = {}
            for i in range(len(T.matrix)):
                for j in range(len(T.matrix[i])):
                    e = T.matrix[i][j]
                    if not e.is_zero:
                        rhs_map[(i, j)] = mono_split(e)
            # one equation per (matrix entry, formal monomial)
            keys = set()
            for entry_map in coeff_cols:
                for pos, split in entry_map.items():
                    for formal in split:
                        keys.add((pos, formal))
            for pos, split in rhs_map.items():
                for formal in split:
                    keys.add((pos, formal))
            keys = sorted(keys)
            rows = []
            rhs_vec = []
            for pos, formal in keys:
                row = []
                for entry_map in coeff_cols:
                    row.append(entry_map.get(pos, {}).get(formal, Poly.zero(vt)))
                rows.append(row)
                rhs_vec.append(rhs_map.get(pos, {}).get(formal, Poly.zero(vt)))
            solution, side, residual = solve_linear(rows, rhs_vec, vt)
            for p_side in side:
                if str(p_side) not in side_conditions:
                    side_conditions.append(str(p_side))
            if solution is None:
                report.fail(
                    f"closure ({ga},{name})",
                    f"membership system inconsistent; residual {residual}",
                )
                continue
            cert_row = [FracPoly(vt) for _ in gens]
            for (s2, p, q), value in zip(unknowns, solution):
                if not value.is_zero:
                    cert_row[s2].set(p, q, value)
            certificate[(ga, name)] = cert_row
            # replay: the certified combination reproduces the action exactly,
            # as an identity in the fraction field (denominators cleared)
            for i in range(len(T.matrix)):
                for j in range(len(T.matrix[i])):
                    acc = Frac(-T.matrix[i][j])
                    for s2, fp in enumerate(cert_row):
                        base = gens[s2].matrix[i][j]
                        if base.is_zero:
                            continue
                        for (p, q), c in fp.coeffs.items():
                            acc = acc + c * Frac(base * lam ** p * neg_mu ** q)
                    if not acc.is_zero:
                        report.fail(f"certificate replay ({ga},{name})", acc)

    for cond in side_conditions:
        report.note(f"side condition: {cond} != 0")

    module = None
    if report.passed:
        fractional = any(
            fp.denominators() for row in certificate.values() for fp in row
        )
        if fractional:
            report.note(
                "certificate has parameter denominators; module presentation withheld"
            )
        else:
            action_table = {}
            for (ga, name), row in certificate.items():
                action_table[(ga, name)] = {
                    gen_names[s2]: fp.to_poly() for s2, fp in enumerate(row) if not fp.is_zero
                }
            module = ConformalModule(f"Delta({M.name},{N.name}^*)", A, gen_names, action_table)
            mod_report = check_module(module)
            report.merge(mod_report)
            if not mod_report.passed:
                module = None
    return CandidateSubmodule(M, N, Nd, gen_names, gens, certificate, side_conditions, module, report)


@dataclass
class SecondConstruction(TensorConstruction):
    candidate: CandidateSubmodule | None = None


def tensor_second(M: ConformalModule, N: ConformalModule) -> SecondConstruction:
    """Dualize the certified candidate and build the canonical operator.

    The operator is adjoint(transpose(F)) for the inclusion F_gam(f, u) =
    f_gam(u); the second slot returns to N through the double-dual
    identification (the tables are identical, generator by generator).
    """
    cand = candidate_delta(M, N)
    report = Report(f"second construction for ({M.name}, {N.name})")
    report.merge(cand.report)
    if cand.module is None:
        report.fail("candidate", "no finite presentation of the candidate submodule")
        return SecondConstruction(None, None, report, cand)
    D = cand.module
    A = M.algebra
    vt = M.vt

    # inclusion operator F of type (N^*; Delta, M)
    F = IntertwiningOperator(f"incl({M.name},{N.name})", cand.right_dual, D, M)
    gam = Poly.var(vt, "gam")
    for s in range(D.rank):
        for j in range(M.rank):
            for k in range(N.rank):
                F.table[s][j][k] = cand.gens[s].matrix[k][j].substitute("mu", gam)
    iop_report = check_iop(F)
    if not iop_report.passed:
        report.merge(iop_report)
        return SecondConstruction(None, None, report, cand)

    Ft = transpose(F)
    Dd = dual_module(D)
    Ndd = dual_module(cand.right_dual)
    G0 = adjoint(Ft, dual_n=Dd, dual_w=Ndd)
    if not N.table_equals(Ndd):
        report.fail("double dual", f"{N.name}^** differs from {N.name}")
        return SecondConstruction(None, None, report, cand)
    # re-target the second slot through N^** ~ N (generator-wise identification)
    result_name = f"T2({M.name},{N.name})"
    result = ConformalModule(result_name, A, [f"{g}_t" for g in Dd.gens])
    result.table = [[list(r) for r in rows] for rows in Dd.table]
    op = IntertwiningOperator(f"F2({M.name},{N.name})", result, M, N)
    for i in range(M.rank):
        for j in range(N.rank):
            for k in range(result.rank):
                op.table[i][j][k] = G0.table[i][j][k]

    # replay of the displayed identity:
    # [op_gam(u, v)]_mu(psi_s) = -(psi_s at -mu applied to u)_(gam-mu)(v)
    mu = Poly.var(vt, "mu")
    neg_mu = -mu
    ok = True
    for um in M.gens:
        for vn in N.gens:
            x = iop_apply(op, M.gen(um), N.gen(vn), "gam")
            for s in range(D.rank):
                lhs = x.comps[s].substitute("del", neg_mu)
                y = cand.gens[s].apply_eval(M.gen(um), neg_mu)
                rhs = -pair_eval(y, N.gen(vn), gam - mu)
                if lhs != rhs:
                    ok = False
                    report.fail(f"defining identity ({um},{vn},{D.gens[s]})", f"{lhs} != {rhs}")
    if not ok:
        return SecondConstruction(result, op, report, cand)

    report.merge(check_module(result))
    report.merge(check_iop(op))
    return SecondConstruction(result, op, report, cand)


def cross_check(M: ConformalModule, N: ConformalModule,
                trunc: TruncationTable | None = None) -> Report:
    """Compare both constructions up to a single rescaling of the operator.

    The structure tables must match exactly (positional generator matching);
    the operator tables must match after multiplying one of them by a nonzero
    rational scalar.
    """
    report = Report(f"cross-check for ({M.name}, {N.name})")
    first = induced_module(M, N, trunc)
    second = tensor_second(M, N)
    if not first.ok or first.operator is None:
        report.fail("first construction", "did not produce a finite presentation")
        report.merge(first.report)
    if not second.ok or second.operator is None:
        report.fail("second construction", "did not produce a finite presentation")
        report.merge(second.report)
    if not report.passed:
        return report

    m1, m2 = first.module, second.module
    if not m1.table_equals(m2):
        report.fail("module tables", f"{_table_str(m1)} vs {_table_str(m2)}")
        return report

    c1 = first.operator.table
    c2 = second.operator.table
    scalar = None
    for i in range(len(c1)):
        for j in range(len(c1[i])):
            for k in range(len(c1[i][j])):
                p1, p2 = c1[i][j][k], c2[i][j][k]
                if p1.is_zero != p2.is_zero:
                    report.fail("operator support", f"entry ({i},{j},{k}) differs")
                    return report
                if p1.is_zero:
                    continue
                if scalar is None:
                    le = p2.leading_exps()
                    if le not in p1.terms:
                        report.fail("operator tables", f"({p1}) vs ({p2})")
                        return report
                    scalar = p1.terms[le] / p2.leading_coeff()
                if p1 != scalar * p2:
                    report.fail("operator tables", f"({p1}) vs ({scalar})*({p2})")
                    return report
    if scalar is None:
        scalar = Fraction(1)
    report.note(f"presentations match; operator rescaling factor {scalar}")
    return report


def _table_str(m: ConformalModule) -> str:
    entries = []
    for a, ga in enumerate(m.algebra.gens):
        for j, gj in enumerate(m.gens):
            for k, gk in enumerate(m.gens):
                p = m.table[a][j][k]
                if not p.is_zero:
                    entries.append(f"{ga}.{gj}->({p})*{gk}")
    return "; ".join(entries) or "0"
