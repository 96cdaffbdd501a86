"""Parametrized filtration families and their simplex-wise gradients.

Each family maps a parameter (point cloud, vertex values, direction, or the
raw value vector itself) to a monotone filtration, and exposes the gradient
of a single simplex's value with respect to the parameter.  Gradients are
returned sparse, as {row_or_index: contribution}, with ties resolved by a
deterministic witness so the map is piecewise differentiable.
"""
from __future__ import annotations

import itertools
import warnings

import numpy as np

from .complexes import (
    Filtration,
    OrderingSignature,
    Simplex,
    SimplicialComplex,
    boundary,
    complete_complex,
    is_face,
    total_order,
)


def _dim_arrays(cx: SimplicialComplex) -> dict[int, np.ndarray]:
    """Vertex-id arrays per dimension, row-aligned with the complex order."""
    out = {}
    for p in range(cx.dim + 1):
        sk = cx.skeleton(p)
        if sk:
            out[p] = np.asarray(sk, dtype=int)
    return out


def _max_over_pairs(cx: SimplicialComplex, M: np.ndarray, vertex_values: np.ndarray) -> np.ndarray:
    """Per-simplex max of M over vertex pairs (vertices get vertex_values)."""
    vals = np.empty(len(cx))
    arrays = _dim_arrays(cx)
    offset = 0
    for p in sorted(arrays):
        A = arrays[p]
        m = len(A)
        if p == 0:
            vals[offset : offset + m] = vertex_values[A[:, 0]]
        else:
            best = np.full(m, -np.inf)
            for a, b in itertools.combinations(range(p + 1), 2):
                np.maximum(best, M[A[:, a], A[:, b]], out=best)
            vals[offset : offset + m] = best
        offset += m
    return vals


def _witness_pair(simplex: Simplex, M: np.ndarray) -> tuple[int, int]:
    """Lexicographically smallest vertex pair maximizing M over the simplex."""
    best, wit = -np.inf, None
    for i, j in itertools.combinations(simplex, 2):
        if M[i, j] > best:
            best, wit = M[i, j], (i, j)
    return wit


class VietorisRips:
    """Half-diameter Vietoris-Rips filtration on the complete complex.

    Simplex value is max_{i,j in sigma} ||x_i - x_j|| / 2; vertices enter at 0.
    """

    def __init__(self, n_points: int, max_dim: int):
        self.n_points = n_points
        self.max_dim = max_dim
        self._complex = None

    @property
    def complex(self):
        # built on first use: subsample-only workflows on large clouds never
        # need the full complete complex
        if self._complex is None:
            self._complex = complete_complex(self.n_points, self.max_dim)
        return self._complex

    def _dists(self, X: np.ndarray) -> np.ndarray:
        diff = X[:, None, :] - X[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))

    def filtration(self, X: np.ndarray) -> Filtration:
        X = np.asarray(X, dtype=float)
        M = self._dists(X) / 2.0
        vals = _max_over_pairs(self.complex, M, np.zeros(len(X)))
        return Filtration(self.complex, vals, check=False)

    def simplex_gradient(self, X: np.ndarray, simplex: Simplex) -> dict:
        simplex = tuple(simplex)
        if len(simplex) == 1:
            return {}
        X = np.asarray(X, dtype=float)
        # only distances within the simplex matter; lexicographically first
        # maximizing pair wins, as in the filtration value itself
        best, wit = -np.inf, None
        for i, j in itertools.combinations(simplex, 2):
            diff = X[i] - X[j]
            d = float(np.sqrt(diff @ diff))
            if d > best:
                best, wit = d, (i, j)
        i, j = wit
        g = (X[i] - X[j]) / (2.0 * best)
        return {i: g, j: -g}

    def tie_labels(self, X: np.ndarray) -> list:
        """Gradient-equality classes for tie detection: each simplex is
        labelled by its witness pair (all vertices share the zero-gradient
        label), so two tied simplices separate under perturbation exactly
        when their labels differ."""
        X = np.asarray(X, dtype=float)
        M = self._dists(X)
        cx = self.complex
        labels: list = [None] * len(cx)
        arrays = _dim_arrays(cx)
        offset = 0
        for p in sorted(arrays):
            A = arrays[p]
            m = len(A)
            if p > 0:
                pairs = list(itertools.combinations(range(p + 1), 2))
                D = np.stack([M[A[:, a], A[:, b]] for a, b in pairs])
                # first maximizing pair, as in simplex_gradient
                k = np.argmax(D, axis=0)
                for r in range(m):
                    a, b = pairs[k[r]]
                    labels[offset + r] = (int(A[r, a]), int(A[r, b]))
            offset += m
        return labels

    def subsample(self, indices) -> "VietorisRips":
        return VietorisRips(len(indices), self.max_dim)


class ConstantWeights:
    def __init__(self, w):
        self.w = np.asarray(w, dtype=float)

    def values(self, X):
        return self.w

    def gradient(self, X, i):
        return {}


class FunctionWeights:
    """User weight function: fn(X) -> (n,), grad(X, i) -> {row: d-vector}."""

    def __init__(self, fn, grad):
        self.fn = fn
        self.grad = grad

    def values(self, X):
        return np.asarray(self.fn(X), dtype=float)

    def gradient(self, X, i):
        return self.grad(X, i)


class DTMWeights:
    """Distance-to-measure weight: mean distance to the k nearest neighbors
    (the query point itself excluded).  The neighbor set is frozen when
    differentiating."""

    def __init__(self, k: int):
        self.k = k

    def _neighbors(self, X, i):
        d = np.linalg.norm(X - X[i], axis=1)
        d[i] = np.inf
        return np.argsort(d, kind="stable")[: self.k], d

    def values(self, X):
        X = np.asarray(X, dtype=float)
        if self.k >= len(X):
            raise ValueError(
                f"DTM weight needs k < n points, got k={self.k}, n={len(X)}"
            )
        out = np.empty(len(X))
        for i in range(len(X)):
            nbrs, d = self._neighbors(X, i)
            out[i] = d[nbrs].mean()
        return out

    def gradient(self, X, i):
        X = np.asarray(X, dtype=float)
        nbrs, d = self._neighbors(X, i)
        g: dict[int, np.ndarray] = {}
        acc = np.zeros(X.shape[1])
        for j in nbrs:
            u = (X[i] - X[j]) / d[j]
            acc = acc + u / self.k
            g[int(j)] = g.get(int(j), 0.0) - u / self.k
        g[int(i)] = g.get(int(i), 0.0) + acc
        return g


class WeightedRips:
    """Weighted Rips filtration.

    Vertex {j} enters at 2 f(x_j); an edge {i,j} at
    max(2 f(x_i), 2 f(x_j), ||x_i - x_j|| + f(x_i) + f(x_j)); higher simplices
    at the max over their edges.  On ties the edge term wins, then the
    larger-weight vertex term.
    """

    def __init__(self, n_points: int, max_dim: int, weights):
        self.n_points = n_points
        self.max_dim = max_dim
        self.weights = weights
        self._complex = None

    @property
    def complex(self):
        if self._complex is None:
            self._complex = complete_complex(self.n_points, self.max_dim)
        return self._complex

    def _edge_matrix(self, X, f):
        diff = X[:, None, :] - X[None, :, :]
        D = np.sqrt((diff * diff).sum(axis=-1))
        fi = f[:, None]
        fj = f[None, :]
        return np.maximum(np.maximum(2 * fi, 2 * fj), D + fi + fj), D

    def filtration(self, X: np.ndarray) -> Filtration:
        X = np.asarray(X, dtype=float)
        f = self.weights.values(X)
        M, _ = self._edge_matrix(X, f)
        vals = _max_over_pairs(self.complex, M, 2 * f)
        return Filtration(self.complex, vals, check=False)

    def case_tag(self, X: np.ndarray, simplex: Simplex) -> str:
        """Active branch of the max: 'vertex' or 'edge' (with witness ids)."""
        simplex = tuple(simplex)
        X = np.asarray(X, dtype=float)
        f = self.weights.values(X)
        if len(simplex) == 1:
            return f"vertex:{simplex[0]}"
        M, D = self._edge_matrix(X, f)
        i, j = _witness_pair(simplex, M)
        if D[i, j] + f[i] + f[j] >= max(2 * f[i], 2 * f[j]):
            return f"edge:{i},{j}"
        k = i if f[i] >= f[j] else j
        return f"vertex:{k}"

    def simplex_gradient(self, X: np.ndarray, simplex: Simplex) -> dict:
        simplex = tuple(simplex)
        X = np.asarray(X, dtype=float)
        f = self.weights.values(X)
        if len(simplex) == 1:
            return _scale_sparse(self.weights.gradient(X, simplex[0]), 2.0)
        M, D = self._edge_matrix(X, f)
        i, j = _witness_pair(simplex, M)
        if D[i, j] + f[i] + f[j] >= max(2 * f[i], 2 * f[j]):
            # edge term active (wins ties)
            u = (X[i] - X[j]) / D[i, j]
            g = {i: u.copy(), j: -u}
            g = _add_sparse(g, self.weights.gradient(X, i))
            g = _add_sparse(g, self.weights.gradient(X, j))
            return g
        k = i if f[i] >= f[j] else j
        return _scale_sparse(self.weights.gradient(X, k), 2.0)

    def subsample(self, indices) -> "WeightedRips":
        w = self.weights
        if isinstance(w, ConstantWeights):
            w = ConstantWeights(w.w[list(indices)])
        return WeightedRips(len(indices), self.max_dim, w)


def _add_sparse(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + v
    return out


def _scale_sparse(a: dict, c: float) -> dict:
    return {k: c * v for k, v in a.items()}


class LowerStar:
    """Lower-star filtration of vertex values on a fixed complex.

    Parameter is the vector of vertex values (indexed by sorted vertex id);
    the simplex value is the max over its vertices, witnessed by the
    smallest vertex id among the maximizers.
    """

    def __init__(self, complex: SimplicialComplex):
        self.complex = complex
        self.vertices = [s[0] for s in complex.skeleton(0)]
        self.vindex = {v: i for i, v in enumerate(self.vertices)}

    def filtration(self, f: np.ndarray) -> Filtration:
        f = np.asarray(f, dtype=float)
        vals = np.array(
            [max(f[self.vindex[v]] for v in s) for s in self.complex.simplices]
        )
        return Filtration(self.complex, vals, check=False)

    def witness(self, f: np.ndarray, simplex: Simplex) -> int:
        f = np.asarray(f, dtype=float)
        best = max(f[self.vindex[v]] for v in simplex)
        return min(v for v in simplex if f[self.vindex[v]] == best)

    def simplex_gradient(self, f: np.ndarray, simplex: Simplex) -> dict:
        return {self.vindex[self.witness(f, tuple(simplex))]: 1.0}


class HeightFiltration:
    """Lower-star of the height function x -> <x, theta> on fixed positions.

    theta is normalized to unit length (with a warning when it is not).
    The gradient with respect to theta is the witness position projected
    onto the tangent space of the sphere, (I - theta theta^T) x_w.
    """

    def __init__(self, complex: SimplicialComplex, positions: np.ndarray):
        self.complex = complex
        self.positions = np.asarray(positions, dtype=float)
        self.vertices = [s[0] for s in complex.skeleton(0)]
        self.vindex = {v: i for i, v in enumerate(self.vertices)}

    def _unit(self, theta):
        theta = np.asarray(theta, dtype=float)
        nrm = np.linalg.norm(theta)
        if abs(nrm - 1.0) > 1e-12:
            warnings.warn("height direction is not unit length; normalizing")
            theta = theta / nrm
        return theta

    def filtration(self, theta: np.ndarray) -> Filtration:
        theta = self._unit(theta)
        h = self.positions @ theta
        vals = np.array(
            [max(h[self.vindex[v]] for v in s) for s in self.complex.simplices]
        )
        return Filtration(self.complex, vals, check=False)

    def witness(self, theta: np.ndarray, simplex: Simplex) -> int:
        theta = self._unit(theta)
        h = self.positions @ theta
        best = max(h[self.vindex[v]] for v in simplex)
        return min(v for v in simplex if h[self.vindex[v]] == best)

    def simplex_gradient(self, theta: np.ndarray, simplex: Simplex) -> dict:
        theta = self._unit(theta)
        xw = self.positions[self.vindex[self.witness(theta, tuple(simplex))]]
        g = xw - theta * (theta @ xw)
        return {i: g[i] for i in range(len(g))}


class RawValues:
    """The identity family: the parameter is the filtration value vector
    itself (in the complex's canonical simplex order)."""

    def __init__(self, complex: SimplicialComplex):
        self.complex = complex

    def filtration(self, values: np.ndarray) -> Filtration:
        return Filtration(self.complex, np.asarray(values, dtype=float))

    def simplex_gradient(self, values: np.ndarray, simplex: Simplex) -> dict:
        return {self.complex.index[tuple(simplex)]: 1.0}


def strata_signature(family, theta) -> OrderingSignature:
    """Ordering signature of the filtration at theta; flags stratum boundaries.

    A tie only marks a boundary when the two tied values can actually
    separate under a perturbation of theta, i.e. when the simplex gradients
    differ.  Structural coincidences -- all Rips vertices entering at 0, or
    two cofaces whose value is realized by the same witness edge -- move in
    lockstep and never change the order.
    """
    filt = family.filtration(theta)
    sig = total_order(filt)
    if not sig.tied:
        return sig

    def same_gradient(ga, gb):
        if ga.keys() != gb.keys():
            return False
        return all(
            np.array_equal(ga[k], gb[k]) or np.allclose(ga[k], gb[k])
            for k in ga
        )

    cx = filt.complex
    vals = filt.values
    order = sig.order
    labels = family.tie_labels(theta) if hasattr(family, "tie_labels") else None
    grad_cache: dict[int, dict] = {}

    def grad(q):
        g = grad_cache.get(q)
        if g is None:
            g = grad_cache[q] = family.simplex_gradient(theta, cx.simplices[q])
        return g

    tied = False
    for a, b in zip(order, order[1:]):
        if vals[a] != vals[b]:
            continue
        sa, sb = cx.simplices[a], cx.simplices[b]
        if is_face(sa, sb) or is_face(sb, sa):
            continue
        if labels is not None:
            if labels[a] != labels[b]:
                tied = True
                break
        elif not same_gradient(grad(a), grad(b)):
            tied = True
            break
    return OrderingSignature(sig.order, tied)


def move_values(
    cx: SimplicialComplex, values: np.ndarray, targets: dict[Simplex, float]
) -> np.ndarray:
    """Set the given simplices to their target values, clamping faces and
    cofaces as needed to restore monotonicity.

    A decreased simplex drags offending faces down with it; an increased one
    pushes offending cofaces up.
    """
    out = np.asarray(values, dtype=float).copy()

    def push_down(s, t):
        i = cx.index[s]
        if out[i] > t:
            out[i] = t
        for f in boundary(s):
            push_down(f, t)

    def push_up(s, t):
        i = cx.index[s]
        if out[i] < t:
            out[i] = t
        for c in cx.cofaces(s):
            if out[cx.index[c]] < t:
                push_up(c, t)

    for s, t in targets.items():
        s = tuple(s)
        i = cx.index[s]
        old = out[i]
        out[i] = t
        if t < old:
            for f in boundary(s):
                push_down(f, t)
        elif t > old:
            for c in cx.cofaces(s):
                if out[cx.index[c]] < t:
                    push_up(c, t)
    return out


# ---------------------------------------------------------------------------
# point cloud serialization: comma-separated coordinates with an x0,x1,...
# header line.


def write_cloud(path, X: np.ndarray) -> None:
    X = np.asarray(X, dtype=float)
    with open(path, "w") as fh:
        fh.write(",".join(f"x{k}" for k in range(X.shape[1])) + "\n")
        for row in X:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_cloud(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("x0") or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.split(",")])
    return np.asarray(rows, dtype=float)
