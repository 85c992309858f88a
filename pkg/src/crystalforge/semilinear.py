"""Dense exact linear algebra over R_N.

Everything here works on exact representatives: Smith normal form pivots are
normalised to ``s^c`` so every elimination quotient is an exact shift, and
the factorisation ``U * diag(s^c) * W == M`` holds on the nose.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .exactring import ContextMismatch, NotDivisible, RingContext, RingElem

__all__ = [
    "Matrix",
    "SmithDecomposition",
    "Submodule",
    "SummandError",
    "adapted_basis",
    "det_division_free",
    "exterior_power",
    "image_hull",
    "kernel_summand",
    "natural_map_det",
    "orthogonal_complement",
    "smith_normal_form",
]


class SummandError(ValueError):
    """A span or kernel is not (or not provably) a free direct summand."""


class Matrix:
    __slots__ = ("ctx", "rows", "cols", "entries", "twist_tag")

    def __init__(self, ctx: RingContext, entries: Sequence[Sequence[RingElem]],
                 rows: int | None = None, cols: int | None = None, twist_tag: int = 0):
        self.ctx = ctx
        self.entries = [list(r) for r in entries]
        self.rows = len(self.entries) if rows is None else rows
        self.cols = (len(self.entries[0]) if self.entries else 0) if cols is None else cols
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("ragged matrix")
        self.twist_tag = twist_tag

    # --- construction ---------------------------------------------------------
    @classmethod
    def zeros(cls, ctx, rows, cols):
        z = ctx.zero()
        return cls(ctx, [[z] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, ctx, n):
        z, o = ctx.zero(), ctx.one()
        return cls(ctx, [[o if i == j else z for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_rows(cls, ctx, rows, ncols: int | None = None):
        """Rows of ints / RingElems / dicts accepted by ``ctx.elem``."""
        ents = [[x if isinstance(x, RingElem) else ctx.elem(x) for x in r] for r in rows]
        return cls(ctx, ents, len(ents), ncols if not ents else None)

    @classmethod
    def from_columns(cls, ctx, columns: Sequence[Sequence[RingElem]], nrows: int):
        cols = list(columns)
        return cls(ctx, [[c[i] for c in cols] for i in range(nrows)], nrows, len(cols))

    @classmethod
    def diagonal(cls, ctx, diag: Sequence[RingElem], rows=None, cols=None):
        n = len(diag)
        rows = n if rows is None else rows
        cols = n if cols is None else cols
        out = cls.zeros(ctx, rows, cols)
        for k, x in enumerate(diag):
            out.entries[k][k] = x
        return out

    def copy(self):
        return Matrix(self.ctx, [list(r) for r in self.entries], self.rows, self.cols, self.twist_tag)

    # --- access ---------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def column(self, j) -> list[RingElem]:
        return [r[j] for r in self.entries]

    def columns(self, idx: Iterable[int]) -> "Matrix":
        idx = list(idx)
        return Matrix(self.ctx, [[r[j] for j in idx] for r in self.entries], self.rows, len(idx))

    def select_rows(self, idx: Iterable[int]) -> "Matrix":
        idx = list(idx)
        return Matrix(self.ctx, [list(self.entries[i]) for i in idx], len(idx), self.cols)

    def submatrix(self, ridx, cidx) -> "Matrix":
        return self.select_rows(ridx).columns(cidx)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("hstack: row mismatch")
        return Matrix(self.ctx, [a + b for a, b in zip(self.entries, other.entries)],
                      self.rows, self.cols + other.cols)

    def vstack(self, other: "Matrix") -> "Matrix":
        if self.cols != other.cols:
            raise ValueError("vstack: column mismatch")
        return Matrix(self.ctx, self.entries + other.entries, self.rows + other.rows, self.cols)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def min_prec(self) -> int:
        return min((x.prec for r in self.entries for x in r), default=self.ctx.N)

    # --- arithmetic -----------------------------------------------------------
    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        ctx = self.ctx
        if other.ctx != ctx:
            raise ContextMismatch("matrix contexts differ")
        ocols = list(zip(*other.entries)) if other.rows else [()] * other.cols
        z = ctx.zero()
        out = []
        for row in self.entries:
            nz = [(k, a) for k, a in enumerate(row) if a.v]
            new = []
            for col in ocols:
                acc = z
                for k, a in nz:
                    b = col[k]
                    if b.v:
                        acc = acc + a * b
                new.append(acc)
            out.append(new)
        return Matrix(ctx, out, self.rows, other.cols)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(self.ctx, [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                      self.rows, self.cols)

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(self.ctx, [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                      self.rows, self.cols)

    def __neg__(self):
        return Matrix(self.ctx, [[-a for a in r] for r in self.entries], self.rows, self.cols)

    def scale(self, c: RingElem) -> "Matrix":
        return Matrix(self.ctx, [[c * a for a in r] for r in self.entries], self.rows, self.cols)

    def transpose(self) -> "Matrix":
        return Matrix(self.ctx, [list(c) for c in zip(*self.entries)] if self.rows else
                      [[] for _ in range(self.cols)], self.cols, self.rows)

    T = property(transpose)

    def frobenius(self, times: int = 1) -> "Matrix":
        out = self
        for _ in range(times):
            out = Matrix(self.ctx, [[a.frobenius() for a in r] for r in out.entries],
                         out.rows, out.cols, out.twist_tag + 1)
        return out

    def is_zero(self) -> bool:
        return all(not a.v for r in self.entries for a in r)

    def equals_mod(self, other: "Matrix", digits: int) -> bool:
        return self.shape == other.shape and all(
            a.equals_mod(b, digits) for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a.v == b.v for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))

    def __hash__(self):
        return hash(tuple(a.v for r in self.entries for a in r))

    def min_valuation_digits(self) -> int:
        return min((a.val_digits() for r in self.entries for a in r), default=self.ctx.N)

    def det(self) -> RingElem:
        return det_division_free(self)

    def inverse(self) -> "Matrix":
        """Gauss-Jordan inverse; needs a unit determinant."""
        n = self.rows
        if n != self.cols:
            raise ValueError("inverse of non-square matrix")
        ctx = self.ctx
        a = [list(r) for r in self.entries]
        inv = [list(r) for r in Matrix.identity(ctx, n).entries]
        for k in range(n):
            piv = next((i for i in range(k, n) if a[i][k].is_unit()), None)
            if piv is None:
                raise NotDivisible("matrix is not invertible over R_N")
            a[k], a[piv] = a[piv], a[k]
            inv[k], inv[piv] = inv[piv], inv[k]
            u = a[k][k].inverse()
            a[k] = [u * x for x in a[k]]
            inv[k] = [u * x for x in inv[k]]
            for i in range(n):
                if i != k and a[i][k].v:
                    c = a[i][k]
                    a[i] = [x - c * y for x, y in zip(a[i], a[k])]
                    inv[i] = [x - c * y for x, y in zip(inv[i], inv[k])]
        return Matrix(ctx, inv, n, n)

    def __repr__(self):
        body = "; ".join(", ".join(repr(a) for a in r) for r in self.entries)
        return f"Matrix({self.rows}x{self.cols}: [{body}])"


# --- determinants -----------------------------------------------------------------

def _berkowitz_det(a: list[list[RingElem]], ctx: RingContext) -> RingElem:
    n = len(a)
    vect = [ctx.one(), -a[0][0]]
    for r in range(1, n):
        R = a[r][:r]
        C = [a[i][r] for i in range(r)]
        t = [ctx.one(), -a[r][r]]
        vec = C
        for _ in range(r):
            acc = ctx.zero()
            for x, y in zip(R, vec):
                acc = acc + x * y
            t.append(-acc)
            vec = [sum((a[i][j] * vec[j] for j in range(r)), ctx.zero()) for i in range(r)]
        vect = [sum((t[i - j] * vect[j] for j in range(min(i, r) + 1)), ctx.zero())
                for i in range(r + 2)]
    d = vect[n]
    return d if n % 2 == 0 else -d


def det_division_free(M: Matrix) -> RingElem:
    """Exact determinant without divisions (explicit for n <= 3, Berkowitz beyond)."""
    if M.rows != M.cols:
        raise ValueError("determinant of non-square matrix")
    ctx, n, a = M.ctx, M.rows, M.entries
    if n == 0:
        return ctx.one()
    if n == 1:
        d = a[0][0]
    elif n == 2:
        d = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    elif n == 3:
        d = (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
             - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
             + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
    else:
        d = _berkowitz_det(a, ctx)
    return RingElem(ctx, d.v, M.min_prec())


def exterior_power(M: Matrix, d: int) -> Matrix:
    """Matrix of d x d minors in lexicographic subset order."""
    if d < 0 or d > min(M.rows, M.cols) and not (d == 0):
        raise ValueError(f"exterior power degree {d} out of range for {M.shape}")
    rsets = list(itertools.combinations(range(M.rows), d))
    csets = list(itertools.combinations(range(M.cols), d))
    ents = [[det_division_free(M.submatrix(rs, cs)) for cs in csets] for rs in rsets]
    return Matrix(M.ctx, ents, len(rsets), len(csets), M.twist_tag)


# --- Smith normal form -------------------------------------------------------------

@dataclass
class SmithDecomposition:
    """``U @ diag(s^sigma) @ W == M`` with U, W invertible; L = U^-1, R = W^-1.

    ``sigma[k] == N`` encodes a zero diagonal entry.  ``ambiguity`` is the
    largest non-zero pivot exponent used for a division: each elimination
    quotient is only determined modulo s^(N - ambiguity).
    """

    U: Matrix
    W: Matrix
    L: Matrix
    R: Matrix
    sigma: list[int]
    prec: int
    ambiguity: int = 0

    def diagonal(self) -> Matrix:
        ctx = self.U.ctx
        return Matrix.diagonal(ctx, [ctx.s_power(c) for c in self.sigma], self.U.rows, self.W.rows)

    @property
    def rank(self) -> int:
        """Number of non-zero diagonal entries."""
        return sum(1 for c in self.sigma if c < self.U.ctx.N)

    @property
    def unit_rank(self) -> int:
        return sum(1 for c in self.sigma if c == 0)


def smith_normal_form(M: Matrix) -> SmithDecomposition:
    """Min-valuation pivoting (ties: smallest row, then column)."""
    ctx = M.ctx
    N = ctx.N
    r, c = M.rows, M.cols
    a = [list(row) for row in M.entries]
    U = [list(row) for row in Matrix.identity(ctx, r).entries]
    L = [list(row) for row in Matrix.identity(ctx, r).entries]
    W = [list(row) for row in Matrix.identity(ctx, c).entries]
    R = [list(row) for row in Matrix.identity(ctx, c).entries]
    sigma = []
    ambiguity = 0
    for k in range(min(r, c)):
        best, bi, bj = N, -1, -1
        for i in range(k, r):
            row = a[i]
            for j in range(k, c):
                x = row[j]
                if x.v:
                    v = x.val_digits()
                    if v < best:
                        best, bi, bj = v, i, j
                        if v == 0:
                            break
            if best == 0:
                break
        if bi < 0:
            sigma.extend([N] * (min(r, c) - k))
            break
        # move pivot to (k, k)
        if bi != k:
            a[k], a[bi] = a[bi], a[k]
            L[k], L[bi] = L[bi], L[k]
            for row in U:
                row[k], row[bi] = row[bi], row[k]
        if bj != k:
            for row in a:
                row[k], row[bj] = row[bj], row[k]
            for row in R:
                row[k], row[bj] = row[bj], row[k]
            W[k], W[bj] = W[bj], W[k]
        # normalise pivot to s^best: scale row k by u^-1 where a_kk = s^best * u
        u = a[k][k].shift_down(best).lift()
        if not (u.v == 1):
            ui = u.inverse()
            a[k] = [ui * x for x in a[k]]
            L[k] = [ui * x for x in L[k]]
            for row in U:
                row[k] = row[k] * u
        a[k][k] = ctx.s_power(best)
        ambiguity = max(ambiguity, best)
        # clear column k below the pivot
        for i in range(k + 1, r):
            b = a[i][k]
            if b.v:
                q = b.shift_down(best).lift()
                a[i] = [x - q * y for x, y in zip(a[i], a[k])]
                L[i] = [x - q * y for x, y in zip(L[i], L[k])]
                for row in U:
                    row[k] = row[k] + q * row[i]
        # clear row k right of the pivot
        for j in range(k + 1, c):
            b = a[k][j]
            if b.v:
                q = b.shift_down(best).lift()
                for row in a:
                    row[j] = row[j] - q * row[k]
                for row in R:
                    row[j] = row[j] - q * row[k]
                W[k] = [x + q * y for x, y in zip(W[k], W[j])]
        sigma.append(best)
    mk = lambda rows, n, m: Matrix(ctx, rows, n, m)
    return SmithDecomposition(mk(U, r, r), mk(W, c, c), mk(L, r, r), mk(R, c, c), sigma,
                              M.min_prec(), ambiguity)


# --- submodules ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Submodule:
    """Free direct summand of R_N^n, carried with a completing basis.

    ``witness`` is invertible and its first ``rank`` columns equal ``basis``.
    ``prec`` is the number of s-digits to which the choice of summand is
    meaningful (N when exact); it does not affect arithmetic.
    """

    basis: Matrix
    witness: Matrix
    prec: int | None = None

    def __post_init__(self):
        if self.prec is None:
            object.__setattr__(self, "prec", self.basis.ctx.N)

    @property
    def ctx(self) -> RingContext:
        return self.basis.ctx

    @property
    def rank(self) -> int:
        return self.basis.cols

    @property
    def ambient_rank(self) -> int:
        return self.basis.rows

    @cached_property
    def witness_inverse(self) -> Matrix:
        return self.witness.inverse()

    @classmethod
    def zero(cls, ctx, n):
        return cls(Matrix.zeros(ctx, n, 0), Matrix.identity(ctx, n))

    @classmethod
    def full(cls, ctx, n):
        I = Matrix.identity(ctx, n)
        return cls(I, I)

    @classmethod
    def from_basis(cls, B: Matrix, witness: Matrix | None = None, prec: int | None = None):
        """Summand spanned exactly by the columns of ``B`` (which must be unimodular)."""
        n, r = B.shape
        if witness is not None:
            if witness.columns(range(r)) != B:
                raise SummandError("witness does not start with the basis")
            return cls(B, witness, prec)
        snf = smith_normal_form(B)
        if any(c != 0 for c in snf.sigma):
            raise SummandError(f"columns do not span a rank-{r} direct summand (SNF {snf.sigma})")
        wit = B.hstack(snf.U.columns(range(r, n)))
        return cls(B, wit, prec)

    def coordinates(self, X: Matrix) -> Matrix:
        """Coordinates of the columns of X in the witness basis."""
        return self.witness_inverse @ X

    def contains(self, X: Matrix, digits: int | None = None) -> bool:
        """Column span of X inside this summand (modulo s^digits)."""
        if X.cols == 0 or self.rank == self.ambient_rank:
            return True
        co = self.coordinates(X).select_rows(range(self.rank, self.ambient_rank))
        if digits is None:
            return co.is_zero()
        return co.min_valuation_digits() >= digits

    def equals(self, other: "Submodule", digits: int | None = None) -> bool:
        return self.rank == other.rank and self.contains(other.basis, digits)

    def frobenius(self, times: int = 1) -> "Submodule":
        return Submodule(self.basis.frobenius(times), self.witness.frobenius(times), self.prec)

    def apply(self, g: Matrix) -> "Submodule":
        """Image under an invertible change of coordinates."""
        return Submodule(g @ self.basis, g @ self.witness, self.prec)

    def with_prec(self, prec: int) -> "Submodule":
        return Submodule(self.basis, self.witness, prec)

    def reduce(self, digits: int) -> Matrix:
        """Echelon-canonical basis of the reduction mod s^digits (for display/comparison)."""
        snf = smith_normal_form(self.basis)
        return snf.U.columns(range(self.rank))

    def __repr__(self):
        return f"Submodule(rank={self.rank}/{self.ambient_rank}, basis={self.basis!r})"


def image_hull(M: Matrix, target_rank: int, strict: bool = True) -> Submodule:
    """Rank-``target_rank`` summand containing the column span of M.

    With ``strict`` the span must lie in such a summand; otherwise the
    leading SNF directions are used regardless (a hull modulo precision).
    """
    snf = smith_normal_form(M)
    n = M.rows
    if target_rank > n:
        raise SummandError("target rank exceeds ambient rank")
    if strict and snf.rank > target_rank:
        raise SummandError(f"span needs {snf.rank} > {target_rank} generators (SNF {snf.sigma})")
    basis = snf.U.columns(range(target_rank))
    return Submodule(basis, snf.U, M.ctx.N - snf.ambiguity if snf.ambiguity else M.ctx.N)


def kernel_summand(M: Matrix, target_rank: int) -> Submodule:
    """Rank-``target_rank`` summand on which M vanishes exactly."""
    snf = smith_normal_form(M)
    N = M.ctx.N
    c = M.cols
    free = [k for k in range(c) if k >= len(snf.sigma) or snf.sigma[k] == N]
    if len(free) < target_rank:
        raise SummandError(f"exact kernel has free rank {len(free)} < {target_rank}")
    chosen = free[:target_rank]
    rest = [k for k in range(c) if k not in chosen]
    wit = snf.R.columns(chosen + rest)
    return Submodule(wit.columns(range(target_rank)), wit)


def orthogonal_complement(S: Submodule) -> Submodule:
    """Annihilator of S in the dual module, in the standard dual basis."""
    n, r = S.ambient_rank, S.rank
    dual = S.witness_inverse.transpose()
    order = list(range(r, n)) + list(range(r))
    wit = dual.columns(order)
    return Submodule(wit.columns(range(n - r)), wit, S.prec)


def adapted_basis(chain: Sequence[Submodule | None], n: int, ctx: RingContext) -> tuple[Matrix, list[int]]:
    """Invertible P whose first rank(S_k) columns span S_k for a nested chain.

    The first non-trivial member contributes its stored witness unchanged.
    ``None`` entries are skipped; the chain must be increasing.
    """
    P = Matrix.identity(ctx, n)
    Pinv = P
    done = 0
    ranks = []
    for S in chain:
        if S is None:
            ranks.append(done)
            continue
        r = S.rank
        if r < done:
            raise SummandError("chain is not increasing")
        if r > done and done == 0:
            # first step: keep the stored witness, so the basis is used verbatim
            P, Pinv = S.witness, S.witness_inverse
            done = r
        elif r > done:
            Y = (Pinv @ S.basis).select_rows(range(done, n))
            snf = smith_normal_form(Y)
            if any(c != 0 for c in snf.sigma[: r - done]):
                raise SummandError(f"chain step is not a summand extension (SNF {snf.sigma})")
            if snf.rank > r - done:
                raise SummandError("chain is not nested")
            tail = P.columns(range(done, n)) @ snf.U
            P = P.columns(range(done)).hstack(tail)
            Pinv = P.inverse()
            done = r
        ranks.append(done)
    return P, ranks


def natural_map_det(L: Matrix | None, X_lo: Submodule | None, X_hi: Submodule | None,
                    Y_lo: Submodule | None, Y_hi: Submodule | None, n: int, m: int | None = None,
                    ctx: RingContext | None = None) -> RingElem:
    """Determinant of the map X_hi/X_lo -> Y_hi/Y_lo induced by L (identity if None).

    ``None`` stands for 0 (lower ends) or the whole module (upper ends).
    Bases are the adapted completions of the stored witnesses.
    """
    m = n if m is None else m
    ctx = ctx or next(S.ctx for S in (X_lo, X_hi, Y_lo, Y_hi) if S is not None)
    Px, rx = adapted_basis([X_lo, X_hi], n, ctx)
    lo_x = rx[0]
    hi_x = rx[1] if X_hi is not None else n
    C = Px.columns(range(lo_x, hi_x))
    img = C if L is None else L @ C
    Py, ry = adapted_basis([Y_lo, Y_hi], m, ctx)
    lo_y = ry[0]
    hi_y = ry[1] if Y_hi is not None else m
    co = Py.inverse() @ img
    if hi_y < m and not co.select_rows(range(hi_y, m)).is_zero():
        raise SummandError("map does not land in the target submodule")
    block = co.select_rows(range(lo_y, hi_y))
    if block.rows != block.cols:
        raise SummandError(f"induced map is not square: {block.shape}")
    return det_division_free(block)
