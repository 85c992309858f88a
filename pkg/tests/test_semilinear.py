import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crystalforge.crystal import random_elem, random_invertible
from crystalforge.exactring import RingContext
from crystalforge.semilinear import (
    Matrix,
    Submodule,
    SummandError,
    det_division_free,
    exterior_power,
    image_hull,
    kernel_summand,
    orthogonal_complement,
    smith_normal_form,
)
from oracles import cofactor_det, minors, permutation_det

CTX = RingContext(3, 1, 6)
CTXS = [CTX, RingContext(2, 2, 8), RingContext(3, 2, 12)]


def rmat(ctx, rng, rows, cols, density=0.4):
    return Matrix(ctx, [[random_elem(ctx, rng, 0, density) for _ in range(cols)] for _ in range(rows)], rows, cols)


@st.composite
def matrices(draw, max_dim=4, square=False):
    ctx = draw(st.sampled_from(CTXS))
    r = draw(st.integers(0, max_dim))
    c = r if square else draw(st.integers(0, max_dim))
    rng = random.Random(draw(st.integers(0, 2 ** 32)))
    return rmat(ctx, rng, r, c, draw(st.sampled_from([0.1, 0.4, 0.8])))


def test_det_examples():
    assert det_division_free(Matrix.identity(CTX, 4)) == CTX.one()
    for a in range(1, 6):
        M = Matrix(CTX, [[CTX.zero(), CTX.one()], [CTX.s_power(a), CTX.zero()]])
        assert det_division_free(M) == -CTX.s_power(a)


def test_det_random_4x4_matches_cofactor():
    rng = random.Random(1)
    for _ in range(10):
        M = rmat(CTX, rng, 4, 4)
        assert det_division_free(M) == cofactor_det([list(r) for r in M.entries])


@settings(max_examples=80)
@given(matrices(max_dim=5, square=True))
def test_det_matches_leibniz(M):
    if M.rows == 0:
        assert det_division_free(M) == M.ctx.one()
        return
    assert det_division_free(M) == permutation_det(M)


@given(matrices(square=True), st.data())
def test_det_precision_is_min_entry_prec(M, data):
    if M.rows == 0:
        return
    i, j = data.draw(st.integers(0, M.rows - 1)), data.draw(st.integers(0, M.cols - 1))
    prec = data.draw(st.integers(0, M.ctx.N))
    ents = [list(r) for r in M.entries]
    ents[i][j] = ents[i][j].reduce(prec)
    assert det_division_free(Matrix(M.ctx, ents)).prec == min(prec, M.ctx.N)


def test_snf_examples():
    s = CTX.s_power
    assert smith_normal_form(Matrix.diagonal(CTX, [CTX.one(), s(2)])).sigma == [0, 2]
    M = Matrix(CTX, [[s(1), CTX.one()], [CTX.zero(), s(1)]])
    snf = smith_normal_form(M)
    assert snf.sigma == [0, 2]
    assert snf.U @ snf.diagonal() @ snf.W == M
    assert smith_normal_form(Matrix.zeros(CTX, 2, 3)).sigma == [6, 6]


@settings(max_examples=200)
@given(matrices())
def test_snf_round_trip(M):
    snf = smith_normal_form(M)
    assert snf.U @ snf.diagonal() @ snf.W == M
    assert snf.L @ snf.U == Matrix.identity(M.ctx, M.rows)
    assert snf.W @ snf.R == Matrix.identity(M.ctx, M.cols)
    assert snf.U.det().is_unit() and snf.W.det().is_unit()
    assert snf.sigma == sorted(snf.sigma)


def test_image_hull_examples():
    s, one, z = CTX.s_power, CTX.one(), CTX.zero()
    for a in (1, 2, 3):
        M = Matrix(CTX, [[z, z], [-s(a), one]])
        H = image_hull(M, 1)
        assert H.equals(Submodule.from_basis(Matrix(CTX, [[z], [one]])))
        assert H.contains(M)
    assert image_hull(Matrix.identity(CTX, 2), 2).rank == 2
    zero_hull = image_hull(Matrix.zeros(CTX, 2, 2), 1, strict=False)
    assert zero_hull.basis == Matrix(CTX, [[one], [z]])


def test_image_hull_rejects_too_large_span():
    with pytest.raises(SummandError):
        image_hull(Matrix.identity(CTX, 2), 1)


def test_kernel_summand_examples():
    one, z = CTX.one(), CTX.zero()
    A = Matrix(CTX, [[z, one], [z, z]])
    K = kernel_summand(A, 1)
    e1 = Submodule.from_basis(Matrix(CTX, [[one], [z]]))
    assert K.equals(e1)
    assert K.equals(image_hull(A, 1))  # im F = ker V for the supersingular pair
    assert kernel_summand(Matrix.identity(CTX, 2), 0).rank == 0


@given(matrices())
def test_hull_and_kernel_membership(M):
    snf = smith_normal_form(M)
    t = snf.rank
    if 0 < t:
        H = image_hull(M, t)
        assert H.contains(M)
    free = sum(1 for c in snf.sigma if c == M.ctx.N) + (M.cols - len(snf.sigma))
    K = kernel_summand(M, free)
    assert (M @ K.basis).is_zero()


def _pair(S, T):
    return S.basis.transpose() @ T.basis


def test_orthogonal_complement_examples():
    one, z = CTX.one(), CTX.zero()
    e1 = Submodule.from_basis(Matrix(CTX, [[one], [z]]))
    assert orthogonal_complement(e1).equals(Submodule.from_basis(Matrix(CTX, [[z], [one]])))
    assert orthogonal_complement(Submodule.full(CTX, 3)).rank == 0
    for a in (2, 3, 5):
        c = CTX.s_power(a)
        S = Submodule.from_basis(Matrix(CTX, [[one], [c]]))
        P = orthogonal_complement(S)
        assert P.equals(Submodule.from_basis(Matrix(CTX, [[-c], [one]])))
        assert _pair(S, P).is_zero()


@given(matrices(max_dim=4), st.data())
def test_orthogonal_complement_involution(M, data):
    if M.rows == 0:
        return
    t = data.draw(st.integers(0, M.rows))
    rng = random.Random(data.draw(st.integers(0, 999)))
    g = random_invertible(M.ctx, M.rows, rng)
    S = Submodule.from_basis(g.columns(range(t)))
    P = orthogonal_complement(S)
    assert P.rank == M.rows - t
    assert _pair(S, P).is_zero()
    assert orthogonal_complement(P).equals(S)


def test_exterior_power_examples():
    rng = random.Random(5)
    for _ in range(5):
        M = rmat(CTX, rng, 3, 3)
        assert exterior_power(M, 3).entries == [[M.det()]]
        E2 = exterior_power(M, 2)
        assert [list(r) for r in E2.entries] == minors(M, 2)
    assert exterior_power(Matrix.identity(CTX, 4), 2) == Matrix.identity(CTX, 6)
    with pytest.raises(ValueError):
        exterior_power(Matrix.identity(CTX, 2), 3)


@settings(max_examples=100)
@given(st.data())
def test_exterior_power_functorial(data):
    ctx = data.draw(st.sampled_from(CTXS))
    rng = random.Random(data.draw(st.integers(0, 2 ** 32)))
    n, m, k = (data.draw(st.integers(1, 4)) for _ in range(3))
    d = data.draw(st.integers(0, min(n, m, k)))
    A, B = rmat(ctx, rng, n, m), rmat(ctx, rng, m, k)
    assert exterior_power(A @ B, d) == exterior_power(A, d) @ exterior_power(B, d)


@given(matrices(square=True))
def test_frobenius_commutes_with_products(M):
    assert (M @ M).frobenius() == M.frobenius() @ M.frobenius()
    assert det_division_free(M.frobenius()) == det_division_free(M).frobenius()
