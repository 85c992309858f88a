from fractions import Fraction

import pytest

from crystalforge.canonical import (
    QuotientCrystal,
    QuotientError,
    RaynaudParams,
    attach_quotient,
    check_degree_theorem,
    check_graded_degrees,
    is_canonical,
    quotient_by_conjugate,
    raynaud_chain_module,
    raynaud_crystal,
)
from crystalforge.crystal import direct_sum, mu_ordinary, supersingular
from crystalforge.exactring import PrecisionError, RingContext
from crystalforge.filtration import build_adequate
from crystalforge.invariants import compute_invariants
from crystalforge.semilinear import Matrix
from pipeline import perturbed_f2h3


def vals(mats):
    return [M[0, 0].valuation().value for M in mats]


def pipeline(D, j):
    AF = build_adequate(D)
    rep = compute_invariants(D, AF)
    return AF, rep, attach_quotient(D, quotient_by_conjugate(D, AF, j), j)


def test_raynaud_extremes():
    ctx = RingContext(3, 2, 12)
    et = raynaud_crystal(ctx, RaynaudParams((0, 0), (1, 1)))
    assert all(V.is_zero() for V in et.V) and all(F[0, 0].is_unit() for F in et.F)
    mult = raynaud_crystal(ctx, RaynaudParams((1, 1), (0, 0)))
    assert all(F.is_zero() for F in mult.F) and all(V[0, 0].is_unit() for V in mult.V)


def test_raynaud_representability():
    q = Fraction(1, 4)  # 1/(p+1) for p = 3
    with pytest.raises(PrecisionError):
        raynaud_crystal(RingContext(3, 1, 6), RaynaudParams((q,), (1 - q,)))
    R = raynaud_crystal(RingContext(3, 1, 16), RaynaudParams((q,), (1 - q,)))
    assert R.V[0].is_zero()  # 3 * 3/4 >= 1
    assert vals(R.F) == [Fraction(3, 4)]
    with pytest.raises(ValueError):
        RaynaudParams((q,), (q,))


def test_raynaud_indexing_and_duality():
    ctx = RingContext(3, 3, 36)
    P = RaynaudParams((Fraction(35, 36), Fraction(17, 18), Fraction(11, 12)),
                      (Fraction(1, 36), Fraction(1, 18), Fraction(1, 12)))
    R = raynaud_crystal(ctx, P)
    # V_i carries p * v_b(i - 1)
    assert vals(R.V) == [Fraction(1, 4), Fraction(1, 12), Fraction(1, 6)]
    Rd = raynaud_crystal(ctx, P.dual())
    assert vals(Rd.F) == vals(R.V) and vals(Rd.V) == vals(R.F)


def test_raynaud_piece_as_quotient():
    ctx = RingContext(3, 3, 36)
    D = raynaud_chain_module(ctx, (1, 2, 3))
    AF, rep, Q = pipeline(D, 1)
    assert Q.codegrees == {0: Fraction(1, 36), 1: Fraction(2, 36), 2: Fraction(3, 36)}
    model = raynaud_crystal(ctx, RaynaudParams([1 - c for c in Q.codegrees.values()], list(Q.codegrees.values())))
    assert vals(Q.V) == vals(model.V)
    assert check_degree_theorem(D, AF, Q, rep).ok


def test_block_chain_codegrees_add():
    ctx = RingContext(3, 2, 24)
    D = direct_sum(raynaud_chain_module(ctx, (1, 0)), raynaud_chain_module(ctx, (0, 2)))
    AF, rep, Q = pipeline(D, 1)
    assert Q.rank == 2
    assert Q.codegrees == {0: Fraction(1, 24), 1: Fraction(2, 24)}
    assert check_degree_theorem(D, AF, Q, rep).ok


def test_split_quotient():
    for p, f, h, d in [(3, 2, 3, (1, 2)), (3, 3, 4, (1, 2, 4)), (2, 2, 4, (1, 3))]:
        D = mu_ordinary(p, f, h, d)
        AF = build_adequate(D)
        rep = compute_invariants(D, AF)
        for j in range(1, D.profile.r + 1):
            Q = attach_quotient(D, quotient_by_conjugate(D, AF, j), j)
            delta = D.profile.delta[j]
            assert Q.codegrees == {i: Fraction(max(delta - d[i], 0)) for i in range(f)}
            assert Q.alpha == 0 and is_canonical(Q, strong=True)
            assert check_degree_theorem(D, AF, Q, rep).ok


def test_classical_degree_equals_hasse():
    # f = 1, h = 2: Hodge line e1 and conjugate line e1 + s^b e2, so v(ha) = b / N
    ctx = RingContext(3, 1, 24)
    for b in (1, 3, 4):
        D = raynaud_chain_module(ctx, (b,))
        AF, rep, Q = pipeline(D, 1)
        assert Q.degree == rep.h[(0, 1)][1] == rep.Ha[0][1] == Fraction(b, 24)
        assert check_degree_theorem(D, AF, Q, rep).ok


def test_supersingular_quotient_rejected():
    ctx = RingContext(3, 1, 24)
    D = supersingular(3, ctx=ctx, c=ctx.s_power(9))
    AF = build_adequate(D)
    with pytest.raises(PrecisionError):
        attach_quotient(D, quotient_by_conjugate(D, AF, 1), 1)


def _fake(alpha, p=3):
    D = mu_ordinary(p, 1, 2, (1,))
    Q = QuotientCrystal(D, 1, 1, [], [], [], [], {0: Fraction(alpha)})
    return Q


def test_canonical_predicates():
    assert is_canonical(_fake(0), strong=True)
    assert not is_canonical(_fake(Fraction(1, 2)))
    assert is_canonical(_fake(Fraction(1, 5)), strong=True)
    assert not is_canonical(_fake(Fraction(1, 4)), strong=True)


def test_bad_projection():
    D = mu_ordinary(3, 1, 2, (1,))
    ctx = D.ctx
    with pytest.raises(QuotientError):
        attach_quotient(D, [Matrix(ctx, [[ctx.s_power(1), ctx.zero()]])])
    with pytest.raises(QuotientError):  # kernel e1 - e2 is not V-stable
        attach_quotient(D, [Matrix(ctx, [[ctx.one(), ctx.one()]])])


def test_two_step_chain():
    D = perturbed_f2h3()
    AF = build_adequate(D)
    rep = compute_invariants(D, AF)
    chain = {j: attach_quotient(D, quotient_by_conjugate(D, AF, j), j) for j in (1, 2)}
    out = check_graded_degrees(D, chain, rep)
    assert out.ok and len(out.checks) == 6
