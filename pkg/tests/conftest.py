import random
from fractions import Fraction

import pytest

from lca.algebra import virasoro
from lca.chom import ConformalLinearMap
from lca.intertwining import IntertwiningOperator
from lca.modules import ConformalModule, rank1_virasoro
from lca.poly import Poly, VarTable


@pytest.fixture(scope="session")
def vt():
    return VarTable(("Delta", "alpha", "Deltap", "alphap"))


@pytest.fixture(scope="session")
def vir(vt):
    return virasoro(vt)


@pytest.fixture(scope="session")
def M(vir):
    return rank1_virasoro("Delta", "alpha", algebra=vir, name="M")


@pytest.fixture(scope="session")
def Mp(vir):
    return rank1_virasoro("Deltap", "alphap", algebra=vir, name="Mp", gen="mp")


@pytest.fixture
def rng():
    return random.Random(20201210)


def rand_fraction(rng, span=4):
    num = rng.randint(-span, span)
    den = rng.choice([1, 1, 1, 2, 3])
    return Fraction(num, den)


def rand_poly(rng, vt, vars=("lam", "del"), max_terms=3, max_exp=2):
    p = Poly.zero(vt)
    for _ in range(rng.randint(1, max_terms)):
        mono = Poly.const(vt, rand_fraction(rng))
        for v in vars:
            mono = mono * Poly.var(vt, v) ** rng.randint(0, max_exp)
        p = p + mono
    return p


def numeric_rank1(vir, rng, gen="m", name=None):
    """A random member of the rank-1 family with numeric rational parameters."""
    d = rand_fraction(rng)
    a = rand_fraction(rng)
    return rank1_virasoro(d, a, algebra=vir, name=name or f"M({d},{a})", gen=gen), d, a


def conjugated_rank2(vir, rng, d1, a1, d2, a2, name="R2", gens=("x", "y")):
    """A valid rank-2 module: direct sum of two rank-1 modules conjugated by
    the unipotent basis change x' = x + s(del) y, y' = y.

    L_lam x' = p1 x' + (s(lam+del) p2 - p1 s) y',  L_lam y' = p2 y'.
    """
    vt = vir.vt
    lam = Poly.var(vt, "lam")
    d = Poly.var(vt, "del")
    p1 = d1 * lam + d + a1
    p2 = d2 * lam + d + a2
    s = rand_poly(rng, vt, vars=("del",), max_terms=2, max_exp=1)
    s_shift = s.substitute("del", lam + d)
    # rows i, cols j of A' (action of L): x' = x + s(del) y, y' = y
    a00 = p1
    a01 = s_shift * p2 - p1 * s
    a10 = Poly.zero(vt)
    a11 = p2
    g0, g1 = gens
    return ConformalModule(
        name, vir, [g0, g1],
        {
            ("L", g0): {g0: a00, g1: a01},
            ("L", g1): {g0: a10, g1: a11},
        },
    )


def random_clm(rng, source, target, max_exp=2):
    vt = source.vt
    matrix = [
        [rand_poly(rng, vt, vars=("mu", "del"), max_terms=2, max_exp=max_exp)
         for _ in range(source.rank)]
        for _ in range(target.rank)
    ]
    return ConformalLinearMap(source, target, matrix)


def canonical_tensor_iop(vir, m_mod, n_mod, d_sum, a_sum, scalar=1, name="C", w_gen="w"):
    """The rank-1 tensor operator: type (M_{d_sum, a_sum}; m_mod, n_mod), constant table."""
    W = rank1_virasoro(d_sum, a_sum, algebra=vir, name=f"W({name})", gen=w_gen)
    table = {(m_mod.gens[0], n_mod.gens[0]): {w_gen: scalar}}
    return IntertwiningOperator(name, W, m_mod, n_mod, table)
