from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crystalforge.exactring import (
    ContextMismatch,
    FiniteField,
    NotDivisible,
    RingContext,
    is_irreducible,
)
from oracles import field_pow, naive_frobenius, naive_mul, digits

CTXS = [RingContext(3, 1, 6), RingContext(2, 2, 8), RingContext(3, 2, 12), RingContext(5, 1, 10)]


@st.composite
def elements(draw, ctx=None, min_digit=0, full=True):
    ctx = ctx or draw(st.sampled_from(CTXS))
    q = ctx.field.q
    terms = draw(st.dictionaries(st.integers(min_digit, ctx.N - 1), st.integers(0, q - 1), max_size=ctx.N))
    prec = ctx.N if full else draw(st.integers(0, ctx.N))
    return ctx.elem({e: ctx.field.decode(c) for e, c in terms.items()}, prec)


@st.composite
def pairs(draw, full=True):
    ctx = draw(st.sampled_from(CTXS))
    return draw(elements(ctx, full=full)), draw(elements(ctx, full=full))


def test_modulus_table_is_irreducible():
    for p in (2, 3, 5, 7):
        for f in (1, 2, 3, 4):
            F = FiniteField(p, f)
            assert is_irreducible(F.modulus, p)


def test_reducible_modulus_rejected():
    with pytest.raises(ValueError):
        FiniteField(3, 2, (2, 0, 1))  # x^2 - 1


def test_trivial_examples():
    ctx = RingContext(3, 1, 6)
    h = ctx.s_power(3)
    assert (h * h).is_zero()
    x = ctx.elem({0: 1, 2: 2})
    assert x + ctx.zero() == x


def test_geometric_series():
    ctx = RingContext(3, 1, 6)
    g = ctx.elem({k: (-1) ** k for k in range(6)})
    prod = ctx.elem({0: 1, 1: 1}) * g
    assert prod == ctx.one()
    assert naive_mul(ctx.elem({0: 1, 1: 1}), g) == digits(ctx.one())


def test_frobenius_examples():
    ctx = RingContext(3, 1, 6)
    assert ctx.s_power(2).frobenius().is_zero()
    assert ctx.s_power(1).frobenius() == ctx.s_power(3)
    F9 = RingContext(3, 2, 6)
    assert F9.modulus == (2, 2, 1)  # x^2 - x - 1 over F_3
    x = F9.elem({0: (0, 1)})
    assert x.frobenius() == F9.elem({0: (1, 2)})  # 2x + 1
    assert field_pow((0, 1), 3, 3, F9.modulus) == (1, 2)


def test_valuation_examples():
    ctx = RingContext(3, 1, 6)
    assert ctx.zero().valuation().value == 1
    assert not ctx.zero().valuation().is_floor
    assert ctx.elem({2: 1, 4: 1}).valuation().value == Fraction(1, 3)
    assert ctx.elem({0: 2, 3: 1}).valuation().value == 0
    low = ctx.zero(prec=4).valuation()
    assert low.is_floor and low.value == Fraction(2, 3)


def test_divide_exact_examples():
    ctx = RingContext(3, 1, 6)
    q = ctx.s_power(3).divide_exact(ctx.s_power(2))
    assert q.equals_mod(ctx.s_power(1), 6) and q.prec == 4
    x = ctx.elem({0: 1, 1: 2, 5: 1})
    assert x.divide_exact(ctx.one()) == x and x.divide_exact(ctx.one()).prec == 6
    u = ctx.elem({0: 2, 1: 1, 3: 1})
    q = ctx.elem({2: 1, 3: 1}).divide_exact(ctx.s_power(2) * u)
    assert q.prec == 4
    want = (u.inverse() * ctx.elem({0: 1, 1: 1})).reduce(4)
    assert q.equals_mod(want, 4)
    assert naive_mul(q.lift(), ctx.s_power(2) * u) == digits(ctx.elem({2: 1, 3: 1}))


def test_divide_exact_rejects():
    ctx = RingContext(3, 1, 6)
    with pytest.raises(NotDivisible):
        ctx.s_power(1).divide_exact(ctx.s_power(2))
    with pytest.raises(NotDivisible):
        ctx.one().divide_exact(ctx.zero())
    with pytest.raises(NotDivisible):
        ctx.s_power(1).inverse()


def test_context_mismatch():
    a, b = RingContext(3, 1, 6), RingContext(3, 1, 9)
    with pytest.raises(ContextMismatch):
        a.one() + b.one()


@given(pairs())
def test_multiplication_matches_schoolbook(xy):
    x, y = xy
    assert digits(x * y) == naive_mul(x, y)


@given(pairs())
def test_ring_laws(xy):
    x, y = xy
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) - y == x
    assert x * (x + y) == x * x + x * y


@given(pairs())
def test_valuation_is_multiplicative(xy):
    x, y = xy
    vx, vy = x.valuation().value, y.valuation().value
    assert (x * y).valuation().value == min(vx + vy, 1)


@settings(max_examples=1000)
@given(pairs())
def test_frobenius_is_a_ring_map(xy):
    x, y = xy
    assert (x * y).frobenius() == x.frobenius() * y.frobenius()
    assert (x + y).frobenius() == x.frobenius() + y.frobenius()
    assert digits(x.frobenius()) == naive_frobenius(x)


@given(pairs())
def test_divide_exact_recovers_factor(xy):
    x, y = xy
    if y.is_zero():
        return
    k = y.val_digits()
    q = (x * y).divide_exact(y)
    assert q.prec <= x.ctx.N - k
    assert q.equals_mod(x, q.prec)


@given(st.data())
def test_unit_inverse(data):
    ctx = data.draw(st.sampled_from(CTXS))
    x = data.draw(elements(ctx))
    if not x.is_unit():
        return
    assert x * x.inverse() == ctx.one()


def _perturb(x, data):
    """Change every digit at or above prec, keep the ones below."""
    ctx = x.ctx
    if x.prec == ctx.N:
        return x
    noise = data.draw(st.dictionaries(st.integers(x.prec, ctx.N - 1),
                                      st.integers(1, ctx.field.q - 1), max_size=3))
    terms = dict(x.coeffs)
    for e, c in noise.items():
        terms[e] = ctx.field.decode(c)
    return ctx.elem(terms, ctx.N)


@given(st.data())
def test_precision_soundness(data):
    ctx = data.draw(st.sampled_from(CTXS))
    x = data.draw(elements(ctx, full=False))
    y = data.draw(elements(ctx, full=False))
    x2, y2 = _perturb(x, data), _perturb(y, data)
    for op in (lambda a, b: a + b, lambda a, b: a - b, lambda a, b: a * b):
        r, r2 = op(x, y), op(x2, y2)
        assert r.equals_mod(r2, r.prec)
    fr = x.frobenius()
    assert fr.equals_mod(x2.frobenius(), fr.prec)
    if not y.is_zero() and x.val_digits() >= y.val_digits():
        q = x.divide_exact(y)
        q2 = x2.divide_exact(y2)
        assert q.equals_mod(q2, q.prec)
