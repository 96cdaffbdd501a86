"""Simplicial complexes, the mod-2 boundary operator, and filtrations.

A simplex is a tuple of strictly increasing vertex ids.  A complex stores
its simplices closed under the face relation, sorted by (dimension,
lexicographic vertices) so that positions are reproducible.  A filtration
attaches a real value to every simplex, monotone along the face relation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Simplex = tuple[int, ...]


def as_simplex(vertices: Iterable[int]) -> Simplex:
    """Canonicalize a vertex collection into a simplex tuple.

    Vertices are sorted; duplicates and empty input are rejected.
    """
    verts = tuple(sorted(int(v) for v in vertices))
    if len(verts) == 0:
        raise ValueError("a simplex needs at least one vertex")
    if any(v < 0 for v in verts):
        raise ValueError("vertex ids must be non-negative")
    if len(set(verts)) != len(verts):
        raise ValueError(f"duplicate vertices in {verts}")
    return verts


def boundary(simplex: Simplex) -> list[Simplex]:
    """Codimension-1 faces of a simplex (empty list for a vertex).

    Over F2 the boundary chain is exactly this set of faces.
    """
    if len(simplex) == 1:
        return []
    return [simplex[:i] + simplex[i + 1 :] for i in range(len(simplex))]


def is_face(a: Simplex, b: Simplex) -> bool:
    """True if a is a proper face of b."""
    return len(a) < len(b) and set(a) <= set(b)


class SimplicialComplex:
    """A finite simplicial complex, closed under taking faces."""

    def __init__(self, simplices: Iterable[Simplex], _closed: bool = False):
        if _closed:
            closed = set(simplices)
        else:
            closed = set()
            for s in simplices:
                s = as_simplex(s)
                for k in range(1, len(s) + 1):
                    closed.update(itertools.combinations(s, k))
        self.simplices: list[Simplex] = sorted(closed, key=lambda s: (len(s), s))
        self.index: dict[Simplex, int] = {s: i for i, s in enumerate(self.simplices)}
        self._cofaces: dict[Simplex, list[Simplex]] | None = None

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return iter(self.simplices)

    def __contains__(self, s) -> bool:
        return tuple(s) in self.index

    @property
    def dim(self) -> int:
        return max(len(s) for s in self.simplices) - 1

    def skeleton(self, p: int) -> list[Simplex]:
        """All simplices of dimension exactly p."""
        return [s for s in self.simplices if len(s) == p + 1]

    def faces(self, s: Simplex) -> list[Simplex]:
        return boundary(s)

    def cofaces(self, s: Simplex) -> list[Simplex]:
        """Codimension-1 cofaces of s within the complex."""
        if self._cofaces is None:
            cof: dict[Simplex, list[Simplex]] = {t: [] for t in self.simplices}
            for t in self.simplices:
                for f in boundary(t):
                    cof[f].append(t)
            self._cofaces = cof
        return self._cofaces[s]

    def n_vertices(self) -> int:
        return len(self.skeleton(0))


def build_complex(simplices: Iterable[Sequence[int]], max_dim: int | None = None) -> SimplicialComplex:
    """Build a complex as the face closure of the given simplices.

    ``max_dim`` discards input simplices above that dimension before closing.
    """
    sims = [as_simplex(s) for s in simplices]
    if max_dim is not None:
        sims = [s for s in sims if len(s) - 1 <= max_dim]
    if not sims:
        raise ValueError("cannot build an empty complex")
    return SimplicialComplex(sims)


def complete_complex(n_points: int, max_dim: int) -> SimplicialComplex:
    """The full complex on n vertices truncated at max_dim."""
    sims = set()
    for k in range(1, max_dim + 2):
        sims.update(itertools.combinations(range(n_points), k))
    return SimplicialComplex(sims, _closed=True)


def triangulated_torus() -> SimplicialComplex:
    """The 9-vertex triangulated torus (3x3 periodic grid, 27 edges, 18 triangles)."""
    tris = []
    v = lambda i, j: 3 * (i % 3) + (j % 3)
    for i in range(3):
        for j in range(3):
            a, b, c, d = v(i, j), v(i, j + 1), v(i + 1, j), v(i + 1, j + 1)
            tris.append((a, b, d))
            tris.append((a, c, d))
    return build_complex(tris)


class Filtration:
    """A monotone real-valued function on the simplices of a complex."""

    def __init__(self, complex: SimplicialComplex, values, check: bool = True):
        self.complex = complex
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (len(complex),):
            raise ValueError(
                f"expected {len(complex)} values, got shape {self.values.shape}"
            )
        if check:
            self.check_monotone()

    def check_monotone(self) -> None:
        for s in self.complex.simplices:
            vs = self.values[self.complex.index[s]]
            for f in boundary(s):
                if self.values[self.complex.index[f]] > vs:
                    raise ValueError(
                        f"filtration not monotone: f({f}) > f({s})"
                    )

    def value(self, s: Simplex) -> float:
        return float(self.values[self.complex.index[tuple(s)]])

    def __len__(self) -> int:
        return len(self.complex)


@dataclass(frozen=True)
class OrderingSignature:
    """The tie-broken total simplex order; identifies an ordering stratum.

    Two parameter points are ordering-equivalent exactly when their
    signatures compare equal.  ``tied`` flags a boundary stratum (two
    face-unrelated simplices share a value) and does not enter equality.
    """

    order: tuple[int, ...]
    tied: bool = field(default=False, compare=False)

    def __hash__(self) -> int:
        return hash(self.order)


def _tie_break_keys(cx: SimplicialComplex) -> tuple[np.ndarray, np.ndarray]:
    """Per-simplex (dimension, lexicographic rank) arrays, cached on the
    complex; the complex is immutable so these never change."""
    keys = getattr(cx, "_tie_break_keys", None)
    if keys is None:
        dims = np.fromiter((len(s) for s in cx.simplices), dtype=np.int64)
        lex = np.empty(len(cx), dtype=np.int64)
        for rank, i in enumerate(
            sorted(range(len(cx)), key=lambda i: cx.simplices[i])
        ):
            lex[i] = rank
        keys = cx._tie_break_keys = (dims, lex)
    return keys


def total_order(filtration: Filtration) -> OrderingSignature:
    """Deterministic total order: by (value, dimension, lexicographic vertices).

    Faces always precede cofaces: a face has value <= its coface and
    strictly smaller dimension, so the key is a valid refinement.
    """
    cx = filtration.complex
    vals = filtration.values
    dims, lex = _tie_break_keys(cx)
    order = np.lexsort((lex, dims, vals))
    tied = False
    ov = vals[order]
    for k in np.nonzero(ov[1:] == ov[:-1])[0]:
        sa, sb = cx.simplices[order[k]], cx.simplices[order[k + 1]]
        if not (is_face(sa, sb) or is_face(sb, sa)):
            tied = True
            break
    return OrderingSignature(tuple(int(i) for i in order), tied)


# ---------------------------------------------------------------------------
# serialization: one simplex per line, vertex ids space-separated, with the
# filtration value as the final column when present.


def write_complex(path, complex: SimplicialComplex, filtration: Filtration | None = None) -> None:
    with open(path, "w") as fh:
        for i, s in enumerate(complex.simplices):
            cols = [str(v) for v in s]
            if filtration is not None:
                cols.append(repr(float(filtration.values[i])))
            fh.write(" ".join(cols) + "\n")


def read_complex(path) -> tuple[SimplicialComplex, np.ndarray | None]:
    """Read a complex file; returns (complex, values or None).

    Values, when present, are re-aligned to the complex's canonical simplex
    order.  Missing faces are an error only if values are present (closure
    cannot invent them); without values the closure is taken.
    """
    rows: list[tuple[Simplex, float | None]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if "." in parts[-1] or "e" in parts[-1] or "inf" in parts[-1]:
                s = as_simplex(int(p) for p in parts[:-1])
                rows.append((s, float(parts[-1])))
            else:
                rows.append((as_simplex(int(p) for p in parts), None))
    has_vals = any(v is not None for _, v in rows)
    if has_vals and not all(v is not None for _, v in rows):
        raise ValueError("mixed lines with and without filtration values")
    cx = SimplicialComplex([s for s, _ in rows])
    if not has_vals:
        return cx, None
    vals = np.empty(len(cx))
    vals.fill(np.nan)
    for s, v in rows:
        vals[cx.index[s]] = v
    if np.isnan(vals).any():
        raise ValueError("file is not closed under faces but carries values")
    return cx, vals
