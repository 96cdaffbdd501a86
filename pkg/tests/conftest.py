"""Shared fixtures and brute-force helpers used across the test suite."""
import itertools

import numpy as np
import pytest

from topo_opt import build_complex
from topo_opt.complexes import Filtration, boundary


def random_filtration(rng, n_vertices=6, p_edge=0.6, p_tri=0.5, max_simplices=None):
    """A random monotone filtration on a random flag-ish complex."""
    verts = list(range(n_vertices))
    sims = [(v,) for v in verts]
    for e in itertools.combinations(verts, 2):
        if rng.uniform() < p_edge:
            sims.append(e)
    have = set(sims)
    for t in itertools.combinations(verts, 3):
        edges = [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])]
        if all(e in have for e in edges) and rng.uniform() < p_tri:
            sims.append(t)
    cx = build_complex(sims)
    if max_simplices is not None and len(cx) > max_simplices:
        # drop top simplices until the budget fits; closure keeps it valid
        keep = [s for s in cx.simplices if len(s) < 3][:max_simplices]
        cx = build_complex(keep)
    vals = np.zeros(len(cx))
    for i, s in enumerate(cx.simplices):
        fmax = max((vals[cx.index[f]] for f in boundary(s)), default=0.0)
        vals[i] = fmax + rng.uniform(0.01, 1.0)
    return Filtration(cx, vals)


def f2_rank(columns, n_rows):
    """Rank over the two-element field of a matrix given as column sets."""
    pivots = {}
    rank = 0
    for col in columns:
        col = set(col)
        while col:
            low = max(col)
            if low not in pivots:
                pivots[low] = col
                rank += 1
                break
            col ^= pivots[low]
    return rank


def sublevel_betti(filtration, threshold):
    """Betti numbers of the sublevel complex via boundary-matrix ranks.

    Independent of the reduction code: rank over F2 of each boundary
    operator restricted to the sublevel complex.
    """
    cx = filtration.complex
    sub = [s for s in cx.simplices
           if filtration.values[cx.index[s]] <= threshold]
    by_dim = {}
    for s in sub:
        by_dim.setdefault(len(s) - 1, []).append(s)
    max_dim = max(by_dim) if by_dim else -1
    betti = {}
    ranks = {}
    for p in range(max_dim + 1):
        rows = {s: i for i, s in enumerate(by_dim.get(p - 1, []))}
        cols = []
        for s in by_dim.get(p, []):
            cols.append({rows[f] for f in boundary(s)})
        ranks[p] = f2_rank(cols, len(rows)) if p > 0 else 0
    for p in range(max_dim + 1):
        n_p = len(by_dim.get(p, []))
        betti[p] = n_p - ranks[p] - ranks.get(p + 1, 0)
    return betti


def enumerate_matching_cost(a, b, q, inner=None):
    """Exhaustive optimum over all partial matchings of two small diagrams."""
    if inner is None:
        inner = q
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)

    def ground(x, y):
        d = np.abs(x - y)
        return max(d) if np.isinf(inner) else (d ** inner).sum() ** (1.0 / inner)

    def diag(x):
        pers = x[1] - x[0]
        if np.isinf(inner):
            return pers / 2.0
        return pers / 2.0 ** (1.0 - 1.0 / inner)

    best = np.inf
    m1, m2 = len(a), len(b)
    for k in range(min(m1, m2) + 1):
        for sub_a in itertools.combinations(range(m1), k):
            for sub_b in itertools.permutations(range(m2), k):
                costs = [ground(a[i], b[j]) for i, j in zip(sub_a, sub_b)]
                costs += [diag(a[i]) for i in range(m1) if i not in sub_a]
                costs += [diag(b[j]) for j in range(m2) if j not in sub_b]
                if np.isinf(q):
                    c = max(costs) if costs else 0.0
                else:
                    c = sum(ci ** q for ci in costs) ** (1.0 / q)
                best = min(best, c)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(0)
