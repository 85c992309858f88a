import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from crystalforge.crystal import (
    coordinate_submodule,
    mu_ordinary,
    random_invertible,
    random_module,
    supersingular,
    validate,
)
from crystalforge.duality import check_duality, complementary_sections, dual_filtration, dual_module
from crystalforge.exactring import RingContext
from crystalforge.filtration import build_adequate, verify_adequate
from crystalforge.invariants import compute_invariants
from crystalforge.semilinear import Submodule, adapted_basis, det_division_free
from pipeline import perturbed_f2h3

CONTEXTS = [RingContext(2, 1, 12), RingContext(3, 2, 12), RingContext(2, 3, 12)]


@st.composite
def modules(draw):
    ctx = draw(st.sampled_from(CONTEXTS))
    h = draw(st.integers(2, 4))
    d = tuple(draw(st.integers(0, h)) for _ in range(ctx.f))
    rng = random.Random(draw(st.integers(0, 2 ** 32)))
    return random_module(ctx, h, d, rng, min_digit=draw(st.integers(1, 6)), split=draw(st.booleans()))


def test_mu_ordinary_dual():
    D = mu_ordinary(3, 2, 3, (1, 2))
    Dd = dual_module(D)
    assert Dd.d == (2, 1) and validate(Dd).ok
    rep = compute_invariants(Dd)
    assert all(v == 0 for v in rep.w_grid.values())
    assert dual_module(Dd).same_as(D)


def test_mu_ordinary_dual_filtration_is_coordinate():
    D = mu_ordinary(3, 2, 3, (1, 2))
    Dd, AFd = dual_filtration(D, build_adequate(D))
    assert verify_adequate(Dd, AFd).ok
    # annihilators of coordinate summands are the complementary coordinates
    assert AFd.F(1, 2).equals(coordinate_submodule(D.ctx, 3, [0, 2]))
    assert AFd.F(0, 1).equals(coordinate_submodule(D.ctx, 3, [1]))


def test_supersingular_self_shape():
    ctx = RingContext(3, 1, 24)
    D = supersingular(3, ctx=ctx, c=ctx.s_power(9))
    AF = build_adequate(D)
    Dd, AFd = dual_filtration(D, AF)
    assert validate(Dd).ok and Dd.d == (1,)
    a, b = compute_invariants(D, AF), compute_invariants(Dd, AFd)
    assert a.Ha[0][1] == b.Ha[0][1] == Fraction(9, 24)
    assert check_duality(D, AF, a).ok


def test_double_dual_is_bit_exact():
    D = perturbed_f2h3()
    DD = dual_module(dual_module(D))
    assert DD.V == D.V and DD.F == D.F and DD.hodge == D.hodge


@settings(max_examples=40)
@given(modules())
def test_duality_theorems(D):
    AF = build_adequate(D)
    rep = check_duality(D, AF)
    assert rep.ok, rep.summary()


def _random_pair(ctx, n, k, rng):
    g = random_invertible(ctx, n, rng)
    B = Submodule.from_basis(g.columns(range(k)))
    # C: a random free summand of rank n - k, generally not a complement of B
    g2 = random_invertible(ctx, n, rng)
    C = Submodule.from_basis(g2.columns(range(n - k)))
    return B, C


@settings(max_examples=100)
@given(st.sampled_from(CONTEXTS), st.integers(1, 4), st.data())
def test_engine_lemma(ctx, n, data):
    k = data.draw(st.integers(0, n))
    rng = random.Random(data.draw(st.integers(0, 2 ** 32)))
    B, C = _random_pair(ctx, n, k, rng)
    x, y, z = complementary_sections(B, C)
    assert x.valuation().value == y.valuation().value == z.valuation().value
    PB, _ = adapted_basis([B], n, ctx)
    PC, _ = adapted_basis([C], n, ctx)
    assert x * det_division_free(PB) == det_division_free(B.basis.hstack(C.basis))
    assert y * det_division_free(PC) == det_division_free(C.basis.hstack(B.basis))
