"""Shared deterministic generators for randomized suites."""

from __future__ import annotations

import random
from fractions import Fraction

from hblcert.flowgraph import GraphDecomposition, WeightFunction
from hblcert.linalg import Matrix, Subspace, canonicalize


def rand_fraction(rng: random.Random, lo: int = -3, hi: int = 3, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def rand_nonneg_fraction(rng: random.Random, hi: int = 3, den: int = 4) -> Fraction:
    return Fraction(rng.randint(0, hi), rng.randint(1, den))


def random_matrix(rng: random.Random, rows: int, cols: int, lo: int = -2, hi: int = 2) -> Matrix:
    return Matrix.from_rows(
        [[Fraction(rng.randint(lo, hi)) for _ in range(cols)] for _ in range(rows)],
        cols=cols,
    )


def random_invertible(rng: random.Random, n: int, shears: int = 6) -> Matrix:
    """Unimodular matrix built from row shears and swaps; det is +-1."""
    rows = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for _ in range(shears):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = Fraction(rng.randint(-2, 2))
        rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
    rng.shuffle(rows)
    if rng.random() < 0.5:
        rows[0] = [-x for x in rows[0]]
    return Matrix.from_rows(rows, cols=n)


def random_signed_permutation(rng: random.Random, n: int) -> Matrix:
    perm = list(range(n))
    rng.shuffle(perm)
    rows = []
    for i in range(n):
        sign = rng.choice([Fraction(1), Fraction(-1)])
        rows.append([sign if j == perm[i] else Fraction(0) for j in range(n)])
    return Matrix.from_rows(rows, cols=n)


def random_subspace(rng: random.Random, ambient: int, max_dim: int | None = None) -> Subspace:
    k = rng.randint(0, max_dim if max_dim is not None else ambient)
    return canonicalize(random_matrix(rng, k, ambient)) if k else Subspace.zero(ambient)


def random_flag(rng: random.Random, ambient: int) -> list[Subspace]:
    """Complete flag {0} = V_0 < V_1 < ... < V_m = full space."""
    while True:
        t = random_invertible(rng, ambient, shears=ambient + 3)
        if t.rank == ambient:
            break
    rows = t.row_lists()
    return [canonicalize(Matrix.from_rows(rows[:k], cols=ambient)) if k else Subspace.zero(ambient)
            for k in range(ambient + 1)]


def random_flag_graph(rng: random.Random, ambient: int, n_flags: int
                      ) -> tuple[GraphDecomposition, list[list[Subspace]]]:
    """Union of complete flags; always a graph decomposition."""
    flags = [random_flag(rng, ambient) for _ in range(n_flags)]
    vertices = {v for flag in flags for v in flag}
    pairs = [(flag[k], flag[k + 1]) for flag in flags for k in range(ambient)]
    return GraphDecomposition.build(ambient, vertices, pairs), flags


def random_balanced_weight(rng: random.Random, graph: GraphDecomposition,
                           flags: list[list[Subspace]], width: int) -> WeightFunction:
    """Nonnegative combination of flag-chain indicators, hence balanced."""
    values = [[Fraction(0)] * width for _ in graph.edges]
    for flag in flags:
        for j in range(width):
            c = rand_nonneg_fraction(rng)
            if c == 0:
                continue
            for k in range(len(flag) - 1):
                a = graph.vertex_index[flag[k]]
                b = graph.vertex_index[flag[k + 1]]
                values[graph.edge_index[(a, b)]][j] += c
    return WeightFunction(width, tuple(tuple(v) for v in values))
