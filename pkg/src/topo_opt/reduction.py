"""Boundary-matrix reduction, persistence pairing, and transposition updates.

The decomposition maintained is R = D * V over F2 with R reduced (distinct
lowest ones), V upper-triangular invertible, and U = V^{-1}.  Columns of R
and V are stored as sets of row indices; U is stored row-major.  Row/column
duals are built lazily so that an adjacent transposition costs time
proportional to the local degree rather than the matrix size.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .complexes import (
    Filtration,
    Simplex,
    SimplicialComplex,
    boundary,
    is_face,
    total_order,
)


@dataclass
class PersistencePairing:
    """Simplex-level pairing: per homology dimension, (birth, death) simplex
    pairs plus unpaired (essential) birth simplices."""

    pairs: dict[int, list[tuple[Simplex, Simplex]]]
    unpaired: dict[int, list[Simplex]]

    def dims(self):
        return sorted(set(self.pairs) | set(self.unpaired))


@dataclass
class PersistenceDiagram:
    """Per-dimension ordinary points (m,2) and essential births (k,).

    ``pairs``/``essential_simplices`` stay row-aligned with the arrays so a
    diagram gradient can be pushed back through the filtration map.
    """

    points: dict[int, np.ndarray]
    essential: dict[int, np.ndarray]
    pairs: dict[int, list[tuple[Simplex, Simplex]]] = field(default_factory=dict)
    essential_simplices: dict[int, list[Simplex]] = field(default_factory=dict)

    def ordinary(self, dim: int) -> np.ndarray:
        return self.points.get(dim, np.empty((0, 2)))

    def betti(self, dim: int) -> int:
        return len(self.essential.get(dim, ()))

    def dims(self):
        return sorted(set(self.points) | set(self.essential))


def _reduce_columns(cols: list[set[int]], with_basis: bool):
    """Left-to-right reduction of the given F2 columns.

    Returns (R, V, U, pivot) with V as columns, U as rows (V and U are None
    when with_basis is False), pivot mapping lowest-one row -> column.
    """
    n = len(cols)
    R = cols
    V = [{j} for j in range(n)] if with_basis else None
    U = [{j} for j in range(n)] if with_basis else None
    pivot: dict[int, int] = {}
    for j in range(n):
        col = R[j]
        while col:
            low = max(col)
            k = pivot.get(low)
            if k is None:
                pivot[low] = j
                break
            col.symmetric_difference_update(R[k])
            if with_basis:
                V[j].symmetric_difference_update(V[k])
                U[k].symmetric_difference_update(U[j])
    return R, V, U, pivot


class ReducedDecomposition:
    """Reduced decomposition of a filtration's boundary matrix."""

    def __init__(self, filtration: Filtration, with_basis: bool = True):
        cx = filtration.complex
        sig = total_order(filtration)
        self.simplices: list[Simplex] = [cx.simplices[i] for i in sig.order]
        self.values: np.ndarray = filtration.values[list(sig.order)].copy()
        self.pos: dict[Simplex, int] = {s: i for i, s in enumerate(self.simplices)}
        n = len(self.simplices)
        cols = [
            {self.pos[f] for f in boundary(s)} for s in self.simplices
        ]
        self.R, self.V, self.U, self.pivot = _reduce_columns(cols, with_basis)
        self.lowof: list[int | None] = [max(c) if c else None for c in self.R]
        self._Rrows = self._Vrows = self._Ucols = None

    # -- queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.simplices)

    def position(self, s: Simplex) -> int:
        return self.pos[tuple(s)]

    def value_of(self, s: Simplex) -> float:
        return float(self.values[self.pos[tuple(s)]])

    def is_death(self, i: int) -> bool:
        return bool(self.R[i])

    def partner(self, i: int) -> int | None:
        """Position paired with position i, or None if essential."""
        if self.R[i]:
            return self.lowof[i]
        return self.pivot.get(i)

    def pairing(self) -> PersistencePairing:
        pairs: dict[int, list] = defaultdict(list)
        unpaired: dict[int, list] = defaultdict(list)
        deaths = []
        for c in range(len(self.simplices)):
            if self.R[c]:
                deaths.append((self.lowof[c], c))
            elif c not in self.pivot:
                s = self.simplices[c]
                unpaired[len(s) - 1].append(s)
        for r, c in sorted(deaths):
            b = self.simplices[r]
            pairs[len(b) - 1].append((b, self.simplices[c]))
        return PersistencePairing(dict(pairs), dict(unpaired))

    def boundary_columns(self) -> list[set[int]]:
        """Rebuild D for the current order (used for validity checks)."""
        return [{self.pos[f] for f in boundary(s)} for s in self.simplices]

    # -- duals and mutation -------------------------------------------------

    def _require_basis(self):
        if self.V is None:
            raise ValueError("decomposition was reduced without basis matrices")

    def _ensure_duals(self):
        if self._Rrows is not None:
            return
        self._require_basis()
        n = len(self.simplices)
        self._Rrows = [set() for _ in range(n)]
        self._Vrows = [set() for _ in range(n)]
        self._Ucols = [set() for _ in range(n)]
        for c in range(n):
            for r in self.R[c]:
                self._Rrows[r].add(c)
            for r in self.V[c]:
                self._Vrows[r].add(c)
            for c2 in self.U[c]:
                self._Ucols[c2].add(c)

    @staticmethod
    def _toggle(cols, rows, r, c):
        if r in cols[c]:
            cols[c].discard(r)
            rows[r].discard(c)
        else:
            cols[c].add(r)
            rows[r].add(c)

    def _col_add(self, src: int, dst: int):
        """Column op R_dst += R_src, V_dst += V_src, hence U row src += row dst."""
        for r in list(self.R[src]):
            self._toggle(self.R, self._Rrows, r, dst)
        for r in list(self.V[src]):
            self._toggle(self.V, self._Vrows, r, dst)
        for c in list(self.U[dst]):
            # U row-major: toggle entry (src, c)
            if c in self.U[src]:
                self.U[src].discard(c)
                self._Ucols[c].discard(src)
            else:
                self.U[src].add(c)
                self._Ucols[c].add(src)

    @staticmethod
    def _swap_labels(cols, rows, i, j):
        """Swap row and column labels i <-> j in a (cols, rows) pair."""
        diff = cols[i].symmetric_difference(cols[j])
        cols[i], cols[j] = cols[j], cols[i]
        for r in diff:
            s = rows[r]
            if i in s:
                s.discard(i)
                s.add(j)
            else:
                s.discard(j)
                s.add(i)
        diff = rows[i].symmetric_difference(rows[j])
        rows[i], rows[j] = rows[j], rows[i]
        for c in diff:
            s = cols[c]
            if i in s:
                s.discard(i)
                s.add(j)
            else:
                s.discard(j)
                s.add(i)

    def _mark_dirty(self, c: int, dirty: set):
        low = self.lowof[c]
        if low is not None and self.pivot.get(low) == c:
            del self.pivot[low]
        self.lowof[c] = None
        dirty.add(c)

    def _settle(self, c: int):
        while True:
            col = self.R[c]
            if not col:
                self.lowof[c] = None
                return
            low = max(col)
            k = self.pivot.get(low)
            if k is None or k == c:
                self.pivot[low] = c
                self.lowof[c] = low
                return
            if k < c:
                self._col_add(k, c)
                continue
            # k > c would be unreduced relative to c: c takes the pivot and
            # k is settled in turn.
            self.pivot[low] = c
            self.lowof[c] = low
            self.lowof[k] = None
            c = k


def reduce(filtration: Filtration, with_basis: bool = True) -> ReducedDecomposition:
    """Reduce the boundary matrix of a filtration.

    With ``with_basis`` the V and U = V^{-1} matrices are maintained, which
    transpositions and moving-set queries require.
    """
    return ReducedDecomposition(filtration, with_basis=with_basis)


def transpose_adjacent(dec: ReducedDecomposition, i: int) -> ReducedDecomposition:
    """Swap the simplices at positions i and i+1, updating R, V, U in place.

    Rejects face/coface pairs (the swapped order would not be a filtration
    order).  Runs in time linear in the local support of the touched rows
    and columns.  Returns the same decomposition object.
    """
    j = i + 1
    if not 0 <= i < len(dec.simplices) - 1:
        raise IndexError(f"position {i} out of range")
    a, b = dec.simplices[i], dec.simplices[j]
    if is_face(a, b) or is_face(b, a):
        raise ValueError(f"cannot transpose incident simplices {a} and {b}")
    dec._require_basis()
    dec._ensure_duals()

    dirty: set[int] = set()
    if i in dec.V[j]:
        dec._mark_dirty(j, dirty)
        dec._col_add(i, j)
    # clear the pivot entries of the swapped columns while lowof and pivot
    # still agree; after conjugation their slots hold different columns
    dec._mark_dirty(i, dirty)
    dec._mark_dirty(j, dirty)

    dec._swap_labels(dec.R, dec._Rrows, i, j)
    dec._swap_labels(dec.V, dec._Vrows, i, j)
    dec._swap_labels(dec._Ucols, dec.U, i, j)
    dec.simplices[i], dec.simplices[j] = dec.simplices[j], dec.simplices[i]
    dec.values[i], dec.values[j] = dec.values[j], dec.values[i]
    dec.pos[dec.simplices[i]] = i
    dec.pos[dec.simplices[j]] = j

    affected = {i, j} | set(dec._Rrows[i]) | set(dec._Rrows[j])
    for c in affected:
        dec._mark_dirty(c, dirty)
    for c in sorted(dirty):
        if dec.lowof[c] is None:
            dec._settle(c)
    return dec


def persistence_pairs(filtration: Filtration) -> PersistencePairing:
    """Compute the persistence pairing of a filtration."""
    return reduce(filtration, with_basis=False).pairing()


def build_diagram(
    filtration: Filtration,
    pairing: PersistencePairing | None = None,
    drop_zero_tol: float = 0.0,
) -> PersistenceDiagram:
    """Persistence diagram of a filtration: ordinary points (f(birth),
    f(death)) plus essential births at (f(birth), inf).

    Points with persistence below ``drop_zero_tol`` are pruned (their pair
    lists stay aligned with the surviving rows).
    """
    if pairing is None:
        pairing = persistence_pairs(filtration)
    points: dict[int, np.ndarray] = {}
    essential: dict[int, np.ndarray] = {}
    pairs: dict[int, list] = {}
    ess_s: dict[int, list] = {}
    for dim, plist in pairing.pairs.items():
        rows, kept = [], []
        for b, d in plist:
            bv, dv = filtration.value(b), filtration.value(d)
            if drop_zero_tol <= 0.0 or dv - bv > drop_zero_tol:
                rows.append((bv, dv))
                kept.append((b, d))
        points[dim] = np.asarray(rows, dtype=float).reshape(len(rows), 2)
        pairs[dim] = kept
    for dim, slist in pairing.unpaired.items():
        essential[dim] = np.asarray([filtration.value(s) for s in slist])
        ess_s[dim] = list(slist)
    return PersistenceDiagram(points, essential, pairs, ess_s)


def betti_numbers(filtration: Filtration) -> dict[int, int]:
    """Ranks of the homology of the full complex (counts of essential classes)."""
    pairing = persistence_pairs(filtration)
    out = {d: 0 for d in range(filtration.complex.dim + 1)}
    for dim, slist in pairing.unpaired.items():
        out[dim] = len(slist)
    return out


def perp_basis(dec: ReducedDecomposition):
    """Reduce the anti-transposed boundary matrix of the current order.

    Returns (Vperp columns, Uperp rows); index a corresponds to the simplex
    at position n-1-a of the decomposition.
    """
    n = len(dec.simplices)
    cof: list[list[int]] = [[] for _ in range(n)]
    for c, s in enumerate(dec.simplices):
        for f in boundary(s):
            cof[dec.pos[f]].append(c)
    cols = [{n - 1 - c for c in cof[n - 1 - a]} for a in range(n)]
    _, Vp, Up, _ = _reduce_columns(cols, with_basis=True)
    return Vp, Up


# ---------------------------------------------------------------------------
# diagram serialization: "dim,birth,death" per line with the literal "inf"
# for essential deaths, 17 significant digits.


def write_diagram(path, dgm: PersistenceDiagram) -> None:
    rows = []
    for dim in dgm.dims():
        for b, d in dgm.points.get(dim, np.empty((0, 2))):
            rows.append((dim, b, d))
        for b in dgm.essential.get(dim, ()):
            rows.append((dim, b, np.inf))
    rows.sort()
    with open(path, "w") as fh:
        fh.write("dim,birth,death\n")
        for dim, b, d in rows:
            ds = "inf" if np.isinf(d) else f"{d:.17g}"
            fh.write(f"{dim},{b:.17g},{ds}\n")


def read_diagram(path) -> PersistenceDiagram:
    pts: dict[int, list] = defaultdict(list)
    ess: dict[int, list] = defaultdict(list)
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("dim,") or line.startswith("#"):
                continue
            d_s, b_s, dd_s = line.split(",")
            dim, b = int(d_s), float(b_s)
            if dd_s == "inf":
                ess[dim].append(b)
            else:
                pts[dim].append((b, float(dd_s)))
    return PersistenceDiagram(
        {k: np.asarray(v).reshape(len(v), 2) for k, v in pts.items()},
        {k: np.asarray(v) for k, v in ess.items()},
    )
