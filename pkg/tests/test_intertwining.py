import pytest

from lca.chom import chom_action
from lca.intertwining import (
    IntertwiningOperator,
    adjoint,
    check_iop,
    iop_apply,
    module_action_iop,
    to_hom_psi,
    transpose,
)
from lca.modules import ConformalModule, action, rank1_virasoro
from lca.poly import Poly, parse_poly

from conftest import canonical_tensor_iop, numeric_rank1, rand_fraction


def test_module_action_is_intertwiner(vir, M):
    I = module_action_iop(M)
    assert I.entry("L", "m", "m") == parse_poly("Delta*gam + del + alpha", M.vt)
    assert check_iop(I).passed


def test_extension_rules(vir, M, Mp):
    F = canonical_tensor_iop(
        vir, M, Mp,
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
    )
    u, v = M.gen("m"), Mp.gen("mp")
    gam = Poly.var(M.vt, "gam")
    base = iop_apply(F, u, v, "gam")
    assert iop_apply(F, u.partial(), v, "gam") == (-gam) * base
    assert iop_apply(F, u, v.partial(), "gam") == gam * base + base.partial()


def test_canonical_tensor_intertwiner_passes(vir, M, Mp):
    F = canonical_tensor_iop(
        vir, M, Mp,
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
    )
    assert check_iop(F).passed


def test_action_table_typed_on_module_pair_fails(vir, M, Mp):
    # the lambda-action polynomial of the tensor module is NOT an operator of
    # type (T; M, Mp); it is the (T; Vir, T) action operator
    T = rank1_virasoro(
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
        algebra=vir, name="T", gen="w",
    )
    G = IntertwiningOperator(
        "G", T, M, Mp,
        {("m", "mp"): {"w": "Delta*gam + Deltap*gam - gam + del + alpha + alphap"}},
    )
    assert not check_iop(G).passed


def test_zero_operator_passes(vir, M, Mp):
    Z = IntertwiningOperator("Z", M, M, Mp)
    assert check_iop(Z).passed


def test_operator_rejects_foreign_variables(vir, M, Mp):
    with pytest.raises(Exception):
        IntertwiningOperator("B", M, M, Mp, {("m", "mp"): {"m": "lam"}})


def test_transpose_is_involution(vir, M, Mp):
    I = module_action_iop(M)
    assert transpose(transpose(I)).table == I.table
    # sensitivity: a single transpose genuinely changes a gam-dependent table
    assert transpose(I).table[0][0][0] != I.table[0][0][0]


def test_transpose_types_swap(vir, M, Mp):
    F = canonical_tensor_iop(
        vir, M, Mp,
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
    )
    Ft = transpose(F)
    assert Ft.m is Mp and Ft.n is M and Ft.w is F.w
    assert check_iop(Ft).passed


def test_adjoint_typing_and_validity(vir, M, Mp):
    F = canonical_tensor_iop(
        vir, M, Mp,
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
    )
    Fs = adjoint(F)
    # type (Mp^*; M, W^*): target is the dual family member
    assert Fs.w.table[0][0][0] == parse_poly("(1 - Deltap)*lam + del - alphap", M.vt)
    assert Fs.m is M
    assert check_iop(Fs).passed


def test_adjoint_formula_against_pairing_oracle(vir, M, Mp, vt, rng):
    # random rank-1 table: the defining identity determines the adjoint table;
    # adjoint() replays it internally, here we re-derive the closed formula
    from conftest import rand_poly

    c = rand_poly(rng, vt, vars=("gam", "del"), max_terms=3, max_exp=2)
    W, _, _ = numeric_rank1(vir, rng, gen="w", name="W")
    I = IntertwiningOperator("R", W, M, Mp, {("m", "mp"): {"w": c}})
    Is = adjoint(I)
    minus = -(Poly.var(vt, "del") + Poly.var(vt, "gam"))
    assert Is.table[0][0][0] == -c.substitute("del", minus)


def _random_valid_operators(vir, rng, count):
    """Valid operators: canonical tensor intertwiners, module actions,
    rank-2 direct sums of tensor intertwiners, and their transposes."""
    vt = vir.vt
    ops = []
    while len(ops) < count:
        kind = len(ops) % 4
        if kind == 0:
            A, d1, a1 = numeric_rank1(vir, rng, name=f"A{len(ops)}")
            B, d2, a2 = numeric_rank1(vir, rng, gen="n", name=f"B{len(ops)}")
            ops.append(canonical_tensor_iop(vir, A, B, d1 + d2 - 1, a1 + a2,
                                            scalar=rand_fraction(rng) or 1, name=f"C{len(ops)}"))
        elif kind == 1:
            A, _, _ = numeric_rank1(vir, rng, name=f"A{len(ops)}")
            ops.append(module_action_iop(A))
        elif kind == 2:
            # rank-2 direct sum: I(x_i, v) = c_i w_i
            d1, a1 = rand_fraction(rng), rand_fraction(rng)
            d2, a2 = rand_fraction(rng), rand_fraction(rng)
            dv, av = rand_fraction(rng), rand_fraction(rng)
            lam, d = Poly.var(vt, "lam"), Poly.var(vt, "del")
            M2 = ConformalModule(f"M2{len(ops)}", vir, ["x", "y"], {
                ("L", "x"): {"x": d1 * lam + d + a1},
                ("L", "y"): {"y": d2 * lam + d + a2},
            })
            N1 = rank1_virasoro(dv, av, algebra=vir, gen="v", name=f"N{len(ops)}")
            W2 = ConformalModule(f"W2{len(ops)}", vir, ["w1", "w2"], {
                ("L", "w1"): {"w1": (d1 + dv - 1) * lam + d + (a1 + av)},
                ("L", "w2"): {"w2": (d2 + dv - 1) * lam + d + (a2 + av)},
            })
            ops.append(IntertwiningOperator(f"D{len(ops)}", W2, M2, N1, {
                ("x", "v"): {"w1": rand_fraction(rng) or 1},
                ("y", "v"): {"w2": rand_fraction(rng) or 1},
            }))
        else:
            ops.append(transpose(ops[-1]))
    return ops


def test_validity_preserved_by_transpose_and_adjoint(vir, rng):
    ops = _random_valid_operators(vir, rng, 22)
    assert len(ops) >= 20
    for I in ops:
        assert check_iop(I).passed, I.name
        assert check_iop(transpose(I)).passed, I.name
        assert check_iop(adjoint(I)).passed, I.name
        assert transpose(transpose(I)).table == I.table


def test_mutations_break_validity_and_are_matched(vir, rng):
    # targeted mutation: perturb one table entry; check_iop fails, and the
    # failure persists through transpose and adjoint (matched failures)
    ops = _random_valid_operators(vir, rng, 8)
    for I in ops[:6]:
        mutated = IntertwiningOperator(I.name + "_mut", I.w, I.m, I.n)
        mutated.table = [[[p for p in row] for row in rows] for rows in I.table]
        mutated.table[0][0][0] = mutated.table[0][0][0] + Poly.var(I.vt, "gam") ** 2
        assert not check_iop(mutated).passed
        assert not check_iop(transpose(mutated)).passed
        assert not check_iop(adjoint(mutated)).passed


def test_psi_of_module_action_unwinds_to_action_matrices(vir, M):
    I = module_action_iop(M)
    fam = to_hom_psi(I)
    assert fam.report.passed
    assert fam.maps["L"].matrix[0][0] == parse_poly("Delta*mu + del + alpha", M.vt)


def test_psi_translation_rule(vir, M, Mp):
    F = canonical_tensor_iop(
        vir, M, Mp,
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
    )
    fam = to_hom_psi(F)
    assert fam.report.passed
    lhs = fam.psi(M.gen("m").partial())
    assert lhs.matrix == fam.maps["m"].scale(-Poly.var(M.vt, "mu")).matrix


def test_psi_is_homomorphism_into_chom(vir, M, Mp):
    # psi(a_lam u) = a_lam psi(u) for the canonical tensor intertwiner
    F = canonical_tensor_iop(
        vir, M, Mp,
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
    )
    fam = to_hom_psi(F)
    L = vir.gen("L")
    lhs = fam.psi(action(L, M.gen("m"), "lam"))
    rhs = chom_action(L, fam.maps["m"], "lam")
    assert lhs.matrix == rhs.matrix


def test_psi_flags_invalid_operator(vir, M, Mp):
    T = rank1_virasoro(
        parse_poly("Delta + Deltap - 1", M.vt), parse_poly("alpha + alphap", M.vt),
        algebra=vir, name="T", gen="w",
    )
    bad = IntertwiningOperator("bad", T, M, Mp, {("m", "mp"): {"w": "gam^2"}})
    assert not check_iop(bad).passed
    fam = to_hom_psi(bad)
    assert not fam.report.passed
    assert any("action" in f.label for f in fam.report.failures)
