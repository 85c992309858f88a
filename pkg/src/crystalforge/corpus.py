"""Reproducible random corpora of valid crystal data."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .crystal import (
    DieudonneModule,
    gauge_twist,
    perturb_hodge,
    permutation_module,
    random_elem,
    random_invertible,
    random_module,
    supersingular,
)
from .exactring import RingContext
from .semilinear import Matrix


@dataclass(frozen=True)
class CorpusConfig:
    count: int = 100
    seed: int = 0
    N: int = 12
    primes: tuple = (2, 3)
    max_f: int = 3
    max_h: int = 4


@dataclass
class CorpusItem:
    index: int
    kind: str
    module: DieudonneModule


_CONTEXTS: dict = {}


def _context(p, f, N):
    key = (p, f, N)
    if key not in _CONTEXTS:
        _CONTEXTS[key] = RingContext(p, f, N)
    return _CONTEXTS[key]


def hodge_perturbation(D: DieudonneModule, i: int, rng: random.Random) -> Matrix:
    """Random Z with phi(Z) = 0, i.e. every digit at order >= N/p."""
    ctx = D.ctx
    lo = math.ceil(ctx.N / ctx.p)
    return Matrix(ctx, [[random_elem(ctx, rng, lo) for _ in range(D.d[i])] for _ in range(D.h)], D.h, D.d[i])


def random_item(rng: random.Random, cfg: CorpusConfig, index: int = 0) -> CorpusItem:
    p = rng.choice(cfg.primes)
    f = rng.randint(1, cfg.max_f)
    ctx = _context(p, f, cfg.N)
    roll = rng.random()
    if f == 1 and roll < 0.1:
        c = random_elem(ctx, rng, math.ceil(cfg.N / p))
        D, kind = supersingular(p, ctx=ctx, c=c), "supersingular"
    else:
        h = rng.randint(2, cfg.max_h)
        d = tuple(rng.randint(1, h - 1) if rng.random() < 0.85 else rng.randint(0, h) for _ in range(f))
        if roll < 0.3:
            D = random_module(ctx, h, d, rng, min_digit=rng.randint(1, cfg.N // 3), split=True)
            kind = "deformation"
        elif roll < 0.85:
            D = random_module(ctx, h, d, rng, min_digit=rng.randint(1, cfg.N // 2), split=False)
            kind = "shifted"
        else:
            D, kind = permutation_module(ctx, h, d, rng), "permutation"
    if rng.random() < 0.5:
        D = gauge_twist(D, [random_invertible(ctx, D.h, rng) for _ in range(f)])
        kind += "+gauge"
    if rng.random() < 0.5:
        i = rng.randrange(f)
        if D.d[i]:
            D = perturb_hodge(D, i, hodge_perturbation(D, i, rng))
            kind += "+hodge"
    return CorpusItem(index, kind, D)


def random_corpus(count: int = 100, seed: int = 0, N: int = 12, **kw) -> list[CorpusItem]:
    cfg = CorpusConfig(count=count, seed=seed, N=N, **kw)
    rng = random.Random(seed)
    return [random_item(rng, cfg, k) for k in range(count)]
