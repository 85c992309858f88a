"""Exact arithmetic in F_q and in the truncated ring R_N = F_q[s]/(s^N).

R_N models O_K/p: the uniformizer-like element ``s`` has valuation 1/N and
``p`` itself is zero, so valuations live in (1/N)Z ∩ [0, 1].

Elements are stored as a single packed Python integer.  The coefficient of
``x^k s^t`` (x the generator of F_q over F_p) lives in bit-slot ``t*S + k``
with ``S = 2f - 1`` slots per power of ``s`` and ``B`` bits per slot.  A ring
multiplication is then one big-integer product followed by a handful of
slot-parallel reductions (modulus in x, Barrett reduction mod p), which keeps
the hot loop out of Python bytecode.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "ContextMismatch",
    "FieldElem",
    "FiniteField",
    "NotDivisible",
    "PrecisionError",
    "RingContext",
    "RingElem",
    "Valuation",
    "default_modulus",
]


class ContextMismatch(ValueError):
    pass


class NotDivisible(ArithmeticError):
    pass


class PrecisionError(ArithmeticError):
    """Raised when a computation needs more s-adic digits than are known."""


# Conway polynomials, coefficients low -> high (monic).
_CONWAY = {
    (2, 1): (1, 1), (2, 2): (1, 1, 1), (2, 3): (1, 1, 0, 1), (2, 4): (1, 1, 0, 0, 1),
    (3, 1): (1, 1), (3, 2): (2, 2, 1), (3, 3): (1, 2, 0, 1), (3, 4): (2, 0, 0, 2, 1),
    (5, 1): (3, 1), (5, 2): (2, 4, 1), (5, 3): (3, 3, 0, 1), (5, 4): (2, 4, 4, 0, 1),
    (7, 1): (4, 1), (7, 2): (3, 6, 1), (7, 3): (4, 0, 6, 1), (7, 4): (3, 4, 5, 0, 1),
}


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


def _poly_divmod_p(num, den, p):
    num = list(num)
    inv_lead = pow(den[-1], -1, p)
    dd = len(den) - 1
    quot = [0] * max(len(num) - dd, 1)
    for k in range(len(num) - 1, dd - 1, -1):
        c = num[k] * inv_lead % p
        if c:
            quot[k - dd] = c
            for t, dc in enumerate(den):
                num[k - dd + t] = (num[k - dd + t] - c * dc) % p
    rem = num[:dd] if dd else [0]
    return quot, rem


def is_irreducible(poly, p) -> bool:
    """Brute-force irreducibility of a monic polynomial over F_p."""
    deg = len(poly) - 1
    if deg <= 1:
        return deg == 1
    for dg in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=dg):
            cand = list(tail) + [1]
            _, rem = _poly_divmod_p(poly, cand, p)
            if not any(rem):
                return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p: int, f: int) -> tuple[int, ...]:
    if (p, f) in _CONWAY:
        return _CONWAY[(p, f)]
    for tail in itertools.product(range(p), repeat=f):
        cand = tuple(reversed(tail)) + (1,)
        if is_irreducible(cand, p):
            return cand
    raise ValueError(f"no irreducible polynomial of degree {f} over F_{p}")


@dataclass(frozen=True)
class FieldElem:
    """Element of F_q as its coefficient vector over F_p (low degree first)."""

    coefficients: tuple[int, ...]
    field: "FiniteField" = field(compare=False, repr=False)

    def __add__(self, other):
        return self.field.add(self, other)

    def __sub__(self, other):
        return self.field.add(self, -other)

    def __neg__(self):
        return FieldElem(tuple((-c) % self.field.p for c in self.coefficients), self.field)

    def __mul__(self, other):
        return self.field.mul(self, other)

    def __pow__(self, e):
        return self.field.power(self, e)

    def inverse(self):
        return self.field.inverse(self)

    def frobenius(self):
        return self ** self.field.p

    def is_zero(self):
        return not any(self.coefficients)


class FiniteField:
    """F_q = F_p[x]/(modulus), with elements encoded as base-p integers."""

    def __init__(self, p: int, f: int, modulus=None):
        if not _is_prime(p):
            raise ValueError(f"p={p} is not prime")
        if f < 1:
            raise ValueError("f must be >= 1")
        self.p = p
        self.f = f
        self.q = p**f
        mod = tuple(int(c) % p for c in (modulus or default_modulus(p, f)))
        if len(mod) != f + 1 or mod[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {f}: {mod}")
        if not is_irreducible(mod, p):
            raise ValueError(f"modulus {mod} is reducible over F_{p}")
        self.modulus = mod
        self._inv: dict[int, int] = {}
        self._frob: list[int] | None = None

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.f, self.modulus) == (
            other.p, other.f, other.modulus)

    def __hash__(self):
        return hash((self.p, self.f, self.modulus))

    # integer encoding: sum c_k p^k
    def encode(self, coeffs) -> int:
        return sum((int(c) % self.p) * self.p**k for k, c in enumerate(coeffs))

    def decode(self, n: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.f):
            n, c = divmod(n, self.p)
            out.append(c)
        return tuple(out)

    def elem(self, coeffs) -> FieldElem:
        coeffs = tuple(int(c) % self.p for c in coeffs)
        coeffs = coeffs + (0,) * (self.f - len(coeffs))
        if len(coeffs) != self.f:
            raise ValueError("too many coefficients for field element")
        return FieldElem(coeffs, self)

    def add(self, a: FieldElem, b: FieldElem) -> FieldElem:
        return FieldElem(tuple((x + y) % self.p for x, y in zip(a.coefficients, b.coefficients)), self)

    def _mul_coeffs(self, a, b):
        prod = [0] * (2 * self.f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        _, rem = _poly_divmod_p(prod, self.modulus, self.p)
        rem = list(rem) + [0] * (self.f - len(rem))
        return tuple(c % self.p for c in rem[: self.f])

    def mul(self, a: FieldElem, b: FieldElem) -> FieldElem:
        return FieldElem(self._mul_coeffs(a.coefficients, b.coefficients), self)

    def power(self, a: FieldElem, e: int) -> FieldElem:
        result = (1,) + (0,) * (self.f - 1)
        base = a.coefficients
        while e:
            if e & 1:
                result = self._mul_coeffs(result, base)
            base = self._mul_coeffs(base, base)
            e >>= 1
        return FieldElem(result, self)

    def inverse(self, a: FieldElem) -> FieldElem:
        if a.is_zero():
            raise ZeroDivisionError("inverse of 0 in F_q")
        return self.power(a, self.q - 2)

    # encoded helpers used by the packed ring
    def inverse_code(self, n: int) -> int:
        if n not in self._inv:
            self._inv[n] = self.encode(self.inverse(FieldElem(self.decode(n), self)).coefficients)
        return self._inv[n]

    def frobenius_table(self) -> list[int]:
        if self._frob is None:
            self._frob = [self.encode(self.power(FieldElem(self.decode(n), self), self.p).coefficients)
                          for n in range(self.q)]
        return self._frob


@dataclass(frozen=True)
class Valuation:
    """Valuation in [0, 1]; ``is_floor`` means only a lower bound is known."""

    value: Fraction
    is_floor: bool = False

    def __str__(self):
        return (">=" if self.is_floor else "") + str(self.value)


class RingContext:
    """Shared, read-only parameters of R_N = F_q[s]/(s^N)."""

    def __init__(self, p: int, f: int, N: int, modulus=None):
        if N < 1:
            raise ValueError("N must be positive")
        self.field = FiniteField(p, f, modulus)
        self.p, self.f, self.N = p, f, N
        self.modulus = self.field.modulus
        S = 2 * f - 1
        self.S = S
        c1 = N * f * (p - 1) ** 2
        c2 = max(c1 * (1 + (f - 1) * (p - 1)), 2 * p)
        b = c2.bit_length()
        self._kb = b + p.bit_length() + 1
        self._mb = (1 << self._kb) // p
        B = b + self._kb + 1
        self.B = B
        self.chunk = B * S  # bits per power of s
        slot_mask = (1 << B) - 1

        def pattern(value, ks, upto=N):
            return sum(value << (B * (t * S + k)) for t in range(upto) for k in ks)

        red = range(f)
        self._red_mask = pattern(slot_mask, red)
        self._slot0_mask = pattern(slot_mask, [0])
        self._q_mask = pattern((1 << (B - self._kb)) - 1, red)
        self._half = pattern((1 << (B - 1)) - p, red)
        self._high = pattern(1 << (B - 1), red)
        self._p_pat = pattern(p, red)
        self._prec_mask = [(1 << (self.chunk * t)) - 1 for t in range(N + 1)]
        # x^(f+e) mod modulus, e = 0 .. f-2
        self._xred = []
        mod = self.modulus
        for e in range(f - 1):
            cur = [0] * (f + e) + [1]
            _, rem = _poly_divmod_p(cur, mod, p)
            rem = list(rem) + [0] * (f - len(rem))
            self._xred.append([c % p for c in rem[:f]])
        self._code_to_chunk = [
            sum(c << (B * k) for k, c in enumerate(self.field.decode(n))) for n in range(self.field.q)
        ]
        self._chunk_to_code = {v: n for n, v in enumerate(self._code_to_chunk)}
        self._chunk_mask = (1 << self.chunk) - 1

    def __eq__(self, other):
        return isinstance(other, RingContext) and (self.p, self.f, self.N, self.modulus) == (
            other.p, other.f, other.N, other.modulus)

    def __hash__(self):
        return hash((self.p, self.f, self.N, self.modulus))

    def __repr__(self):
        return f"RingContext(p={self.p}, f={self.f}, N={self.N}, modulus={list(self.modulus)})"

    # --- packed-integer kernels -------------------------------------------------
    def _cond_sub(self, r: int) -> int:
        m = ((r + self._half) & self._high) >> (self.B - 1)
        return r - m * self.p

    def _reduce_product(self, prod: int) -> int:
        B = self.B
        prod &= self._prec_mask[self.N]
        if self.f > 1:
            for e, coeffs in enumerate(self._xred):
                hi = (prod >> (B * (self.f + e))) & self._slot0_mask
                if hi:
                    for k, c in enumerate(coeffs):
                        if c:
                            prod += (c * hi) << (B * k)
            prod &= self._red_mask
        q = ((prod * self._mb) >> self._kb) & self._q_mask
        return self._cond_sub(prod - q * self.p)

    def _mul(self, a: int, b: int) -> int:
        if not a or not b:
            return 0
        return self._reduce_product(a * b)

    def _add(self, a: int, b: int) -> int:
        return self._cond_sub(a + b)

    def _neg(self, a: int) -> int:
        if not a:
            return 0
        # empty slots give p - 0 = p, which _cond_sub folds back to 0
        return self._cond_sub(self._p_pat - a)

    def _digit_code(self, a: int, t: int) -> int:
        return self._chunk_to_code[(a >> (self.chunk * t)) & self._chunk_mask]

    def _val_digits(self, a: int, prec: int) -> int:
        if not a:
            return prec
        return min(((a & -a).bit_length() - 1) // self.chunk, prec)

    # --- constructors -------------------------------------------------------------
    def elem(self, value=0, prec: int | None = None) -> "RingElem":
        """Build an element from an int (prime-field constant), a FieldElem,
        a dict {exponent: coeffs}, or a sequence of per-exponent coefficients."""
        prec = self.N if prec is None else prec
        if isinstance(value, RingElem):
            self.check(value)
            return value
        if isinstance(value, int):
            code = value % self.p
            return RingElem(self, code, prec)  # constant slot (0, 0)
        if isinstance(value, FieldElem):
            return RingElem(self, self._code_to_chunk[self.field.encode(value.coefficients)], prec)
        if isinstance(value, dict):
            items = value.items()
        else:
            items = enumerate(value)
        packed = 0
        for e, c in items:
            e = int(e)
            if e < 0:
                raise ValueError("negative exponent")
            if isinstance(c, int):
                c = (c,)
            elif isinstance(c, FieldElem):
                c = c.coefficients
            code = self.field.encode(c)
            if len(tuple(c)) > self.f:
                raise ValueError("too many field coefficients")
            if e < min(prec, self.N) and code:
                packed |= self._code_to_chunk[code] << (self.chunk * e)
        return RingElem(self, packed, prec)

    def zero(self, prec: int | None = None) -> "RingElem":
        return RingElem(self, 0, self.N if prec is None else prec)

    def one(self) -> "RingElem":
        return RingElem(self, 1, self.N)

    def s_power(self, k: int) -> "RingElem":
        if k >= self.N:
            return self.zero()
        return RingElem(self, 1 << (self.chunk * k), self.N)

    def constant(self, code: int) -> "RingElem":
        """Constant from an encoded field element (base-p digits)."""
        return RingElem(self, self._code_to_chunk[code % self.field.q], self.N)

    def check(self, x: "RingElem"):
        if x.ctx is not self and x.ctx != self:
            raise ContextMismatch(f"{x.ctx!r} vs {self!r}")

    def digits_for(self, w) -> int:
        """Number of s-digits needed to represent reduction modulo m_w."""
        w = Fraction(w)
        return min(self.N, max(0, math.ceil(w * self.N)))


class RingElem:
    """Element of R_N known modulo s^prec (capped absolute precision)."""

    __slots__ = ("ctx", "v", "prec")

    def __init__(self, ctx: RingContext, packed: int, prec: int):
        prec = max(0, min(int(prec), ctx.N))
        self.ctx = ctx
        self.prec = prec
        self.v = packed & ctx._prec_mask[prec]

    # --- inspection -----------------------------------------------------------
    @property
    def coeffs(self) -> dict[int, tuple[int, ...]]:
        """Sparse map exponent -> F_p coefficients of the digit."""
        out = {}
        field = self.ctx.field
        for t in range(self.prec):
            code = self.ctx._digit_code(self.v, t)
            if code:
                out[t] = field.decode(code)
        return out

    def digit(self, t: int) -> FieldElem:
        field = self.ctx.field
        return FieldElem(field.decode(self.ctx._digit_code(self.v, t)), field)

    def val_digits(self) -> int:
        """Exponent of the lowest known non-zero digit, or prec when none."""
        return self.ctx._val_digits(self.v, self.prec)

    def valuation(self) -> Valuation:
        k = self.val_digits()
        if self.v:
            return Valuation(Fraction(k, self.ctx.N))
        return Valuation(Fraction(self.prec, self.ctx.N), is_floor=self.prec < self.ctx.N)

    def is_zero(self) -> bool:
        return self.v == 0

    def is_unit(self) -> bool:
        return self.prec > 0 and bool(self.v & self.ctx._chunk_mask)

    def lift(self, prec: int | None = None) -> "RingElem":
        """Same representative, declared known to ``prec`` (default N) digits."""
        return RingElem(self.ctx, self.v, self.ctx.N if prec is None else prec)

    def reduce(self, prec: int) -> "RingElem":
        return RingElem(self.ctx, self.v, min(prec, self.prec))

    # --- arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ContextMismatch(f"{self.ctx!r} vs {other.ctx!r}")
            return other
        if isinstance(other, int):
            return self.ctx.elem(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RingElem(self.ctx, self.ctx._add(self.v, other.v), min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return RingElem(self.ctx, self.ctx._neg(self.v), self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RingElem(self.ctx, self.ctx._add(self.v, self.ctx._neg(other.v)),
                        min(self.prec, other.prec))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        N = self.ctx.N
        prec = min(self.prec + other.val_digits(), other.prec + self.val_digits(), N)
        return RingElem(self.ctx, self.ctx._mul(self.v, other.v), prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = self.ctx.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ctx.elem(other)
        if not isinstance(other, RingElem):
            return NotImplemented
        return self.ctx == other.ctx and self.v == other.v and self.prec == other.prec

    def __hash__(self):
        return hash((self.v, self.prec))

    def equals_mod(self, other: "RingElem", digits: int) -> bool:
        mask = self.ctx._prec_mask[min(digits, self.ctx.N)]
        return (self.v & mask) == (other.v & mask)

    def shift_down(self, k: int) -> "RingElem":
        """Divide by s^k, dropping the (necessarily zero) lowest k digits."""
        return RingElem(self.ctx, self.v >> (self.ctx.chunk * k), self.prec - k)

    def shift_up(self, k: int) -> "RingElem":
        return RingElem(self.ctx, self.v << (self.ctx.chunk * k), min(self.prec + k, self.ctx.N))

    def inverse(self) -> "RingElem":
        if not self.is_unit():
            raise NotDivisible("inverse of a non-unit")
        ctx = self.ctx
        c0 = ctx.field.inverse_code(ctx._digit_code(self.v, 0))
        y = ctx._code_to_chunk[c0]
        known = 1
        two = 2 % ctx.p  # packed constant: slot (0, 0)
        while known < ctx.N:
            # y <- y (2 - x y)
            xy = ctx._mul(self.v, y)
            y = ctx._mul(y, ctx._add(two, ctx._neg(xy)))
            known *= 2
        return RingElem(ctx, y, self.prec)

    def frobenius(self) -> "RingElem":
        ctx = self.ctx
        p, N = ctx.p, ctx.N
        table = ctx.field.frobenius_table()
        out = 0
        t = 0
        v = self.v
        while v and p * t < N:
            chunk = v & ctx._chunk_mask
            if chunk:
                out |= ctx._code_to_chunk[table[ctx._chunk_to_code[chunk]]] << (ctx.chunk * p * t)
            v >>= ctx.chunk
            t += 1
        return RingElem(ctx, out, min(p * self.prec, N))

    def divide_exact(self, y: "RingElem") -> "RingElem":
        """Return q with q*y = self on representatives.

        q is only defined modulo the annihilator s^(N - v(y)) of y, which is
        reflected in the returned precision.
        """
        y = self._coerce(y)
        vy = y.val_digits()
        if y.is_zero():
            raise NotDivisible("division by an element that is zero to its precision")
        vx = self.val_digits()
        if vx < vy:
            raise NotDivisible(f"v(x)={vx}/{self.ctx.N} < v(y)={vy}/{self.ctx.N}")
        unit = y.shift_down(vy).lift()
        q = self.shift_down(vy).lift() * unit.inverse()
        N = self.ctx.N
        prec = min(self.prec - vy, y.prec - 2 * vy + vx, N - vy)
        return RingElem(self.ctx, q.v, prec)

    def __repr__(self):
        if not self.v:
            body = "0"
        else:
            parts = []
            for t, c in self.coeffs.items():
                cs = "(" + ",".join(str(d) for d in c) + ")" if self.ctx.f > 1 else str(c[0])
                parts.append(cs + (f"*s^{t}" if t else ""))
            body = " + ".join(parts)
        tail = "" if self.prec == self.ctx.N else f" + O(s^{self.prec})"
        return body + tail
