"""Acceptance suite: one test per criterion, each printing a PASS line.

Every assertion is exact (structural equality of canonical polynomials);
stated runtime bounds are asserted with wall-clock measurements.
"""

import io
import math
import time
from fractions import Fraction

from lca.algebra import LieConformalAlgebra, check_algebra
from lca.chom import chom_action, chom_action_eval, dual_module
from lca.cli import bundled_config, main
from lca.intertwining import (
    IntertwiningOperator,
    adjoint,
    check_iop,
    module_action_iop,
    transpose,
)
from lca.modules import check_module
from lca.poly import Poly, parse_poly
from lca.tensor_first import (
    StringElement,
    TruncationTable,
    check_f0_module,
    induced_module,
    normalize,
)
from lca.tensor_second import cross_check, tensor_second

from conftest import conjugated_rank2, random_clm
from test_intertwining import _random_valid_operators


def _announce(n, text):
    print(f"ACCEPTANCE {n}: PASS - {text}")


def test_c01_virasoro_axioms_and_mutations(vt):
    start = time.perf_counter()
    out = io.StringIO()
    assert main([bundled_config(), "check-algebra", "Vir"], out=out) == 0
    mutations = ["3*lam + del", "lam + del", "2*lam + 2*del", "2*lam",
                 "2*lam + del + 1", "lam^2 + 2*lam + del"]
    assert len(mutations) == 6
    for table in mutations:
        A = LieConformalAlgebra("Mut", vt, ["L"], {("L", "L"): {"L": table}})
        report = check_algebra(A)
        assert not report.passed
        assert any(f.detail != "0" for f in report.failures)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _announce(1, f"Virasoro axioms pass; all 6 mutations fail ({elapsed:.3f}s)")


def test_c02_module_family_symbolic(M):
    start = time.perf_counter()
    report = check_module(M)
    assert report.passed
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _announce(2, f"module family checks symbolically in Delta, alpha ({elapsed:.3f}s)")


def test_c03_conformal_dual_exact(M, vt):
    D = dual_module(M)
    assert D.table[0][0][0] == parse_poly("(1 - Delta)*lam + del - alpha", vt)
    DD = dual_module(D)
    assert DD.table[0][0][0] == parse_poly("Delta*lam + del + alpha", vt)
    _announce(3, "dual is (1-Delta)*lam + del - alpha; double dual returns exactly")


def test_c04_tensor_second_construction(M, Mp, vt):
    start = time.perf_counter()
    res = tensor_second(M, Mp)
    assert res.ok
    assert res.module.rank == 1
    assert res.module.table[0][0][0] == parse_poly(
        "(Delta + Deltap - 1)*lam + del + alpha + alphap", vt
    )
    assert res.candidate.module.table[0][0][0] == parse_poly(
        "(2 - Delta - Deltap)*lam + del - alpha - alphap", vt
    )
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _announce(4, f"second construction gives the family sum, exactly ({elapsed:.3f}s)")


def test_c05_tensor_first_construction(M, Mp, vt):
    start = time.perf_counter()
    trunc = TruncationTable.uniform(M, Mp, 1)
    # normal-form identities
    for n in range(1, 4):
        assert normalize(StringElement.pure(M, Mp, n=n), trunc).is_zero
    for n in range(4):
        got = normalize(StringElement.pure(M, Mp, n=n, a=1), trunc)
        expected = (
            StringElement.pure(M, Mp, coeff=-1) if n == 1 else StringElement(M, Mp)
        )
        assert got == expected
    for k in range(4):
        for l in range(4):
            got = normalize(StringElement.pure(M, Mp, n=k, a=l), trunc)
            if k == l:
                assert got == StringElement.pure(M, Mp, coeff=Fraction((-1) ** k * math.factorial(k)))
            else:
                assert got.is_zero
    res = induced_module(M, Mp, trunc)
    assert res.ok
    assert res.module.table[0][0][0] == parse_poly(
        "(Delta + Deltap - 1)*lam + del + alpha + alphap", vt
    )
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    _announce(5, f"first construction reproduces the normal forms and action ({elapsed:.3f}s)")


def test_c06_cross_construction_equivalence(M, Mp):
    report = cross_check(M, Mp)
    assert report.passed
    assert any("match" in n for n in report.notes)
    _announce(6, "both constructions agree up to generator rescaling, fully symbolically")


def test_c07_intertwining_suite(vir, M, rng):
    # module action as type (M; R, M)
    assert check_iop(module_action_iop(M)).passed
    ops = _random_valid_operators(vir, rng, 22)
    assert len(ops) >= 20
    for I in ops:
        assert transpose(transpose(I)).table == I.table
        assert check_iop(I).passed
        assert check_iop(transpose(I)).passed
        assert check_iop(adjoint(I)).passed
    # targeted mutations break each property
    for I in ops[:5]:
        mutated = IntertwiningOperator(I.name + "_mut", I.w, I.m, I.n)
        mutated.table = [[[p for p in row] for row in rows] for rows in I.table]
        mutated.table[0][0][0] = mutated.table[0][0][0] + Poly.var(I.vt, "gam")
        assert not check_iop(mutated).passed
        assert not check_iop(transpose(mutated)).passed
        assert not check_iop(adjoint(mutated)).passed
    _announce(7, "intertwining suite: action operator, involution, 20+ random operators")


def test_c08_chom_module_law(vir, M, Mp, vt, rng):
    from lca.algebra import bracket

    lam = Poly.var(vt, "lam")
    mu = Poly.var(vt, "mu")
    lam_gam = parse_poly("lam + gam", vt)
    L = vir.gen("L")
    R2a = conjugated_rank2(vir, rng, Fraction(2), Fraction(0), Fraction(1, 2), Fraction(1), name="R2a")
    R2b = conjugated_rank2(vir, rng, Fraction(1), Fraction(1), Fraction(3), Fraction(0), name="R2b")
    checked = 0
    for source, target in ((M, Mp), (Mp, M), (M, R2a), (R2a, Mp), (R2a, R2b), (R2b, R2b)):
        for _ in range(4):
            phi = random_clm(rng, source, target)
            assert chom_action(L.partial(), phi, "lam") == chom_action(L, phi, "lam").scale(-lam)
            res = chom_action(L, phi, "lam")
            assert chom_action(L, phi.partial(), "lam") == res.scale(lam - mu)
            lhs = chom_action(L, chom_action(L, phi, "gam"), "lam")
            t2 = chom_action(L, chom_action(L, phi, "lam"), "gam")
            t1 = chom_action_eval(bracket(L, L, "lam"), phi, lam_gam)
            assert (lhs - t2 - t1).is_zero
            checked += 1
    assert checked >= 20
    _announce(8, f"Chom action satisfies the module law on {checked} random maps, exactly")


def test_c09_string_space_module_law(M, Mp):
    start = time.perf_counter()
    report = check_f0_module(M, Mp, 3)
    assert report.passed
    elapsed = time.perf_counter() - start
    _announce(9, f"string-space module law holds to degree bound 3 ({elapsed:.3f}s)")


def test_c10_commutativity_of_both_constructions(M, Mp):
    r1 = induced_module(M, Mp, TruncationTable.uniform(M, Mp, 1))
    r1s = induced_module(Mp, M, TruncationTable.uniform(Mp, M, 1))
    assert r1.module.table == r1s.module.table
    assert r1.operator.table == r1s.operator.table
    r2 = tensor_second(M, Mp)
    r2s = tensor_second(Mp, M)
    assert r2.module.table == r2s.module.table
    assert r2.operator.table == r2s.operator.table
    _announce(10, "swapping factors yields identical presentations in both constructions")
