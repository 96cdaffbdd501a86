"""Filtration families: values, witnesses, gradients, and the cloud format."""
import itertools
import warnings

import numpy as np
import pytest

from topo_opt import build_complex
from topo_opt.complexes import Filtration, boundary
from topo_opt.filtrations import (
    ConstantWeights,
    DTMWeights,
    HeightFiltration,
    LowerStar,
    RawValues,
    VietorisRips,
    WeightedRips,
    move_values,
    read_cloud,
    strata_signature,
    write_cloud,
)


def fd_simplex_value(family, X, simplex, h=1e-6):
    """Central finite differences of a single simplex value."""
    X = np.asarray(X, dtype=float)
    g = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        Xp, Xm = X.copy(), X.copy()
        Xp[idx] += h
        Xm[idx] -= h
        fp = family.filtration(Xp).value(simplex)
        fm = family.filtration(Xm).value(simplex)
        g[idx] = (fp - fm) / (2 * h)
    return g


def sparse_to_dense(grad, X):
    g = np.zeros_like(np.asarray(X, dtype=float))
    for i, v in grad.items():
        g[i] = v
    return g


# -- Vietoris-Rips ----------------------------------------------------------


def test_vr_two_points():
    X = np.array([[0.0, 0.0], [5.0, 0.0]])
    fam = VietorisRips(2, 1)
    f = fam.filtration(X)
    assert f.value((0, 1)) == pytest.approx(2.5)
    assert f.value((0,)) == 0.0


def test_vr_unit_square_values():
    X = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    fam = VietorisRips(4, 2)
    f = fam.filtration(X)
    assert f.value((0, 1)) == pytest.approx(0.5)
    assert f.value((0, 2)) == pytest.approx(np.sqrt(2) / 2)
    assert f.value((0, 1, 2)) == pytest.approx(np.sqrt(2) / 2)


def test_vr_duplicated_point_monotone():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    fam = VietorisRips(3, 2)
    f = fam.filtration(X)
    assert f.value((0, 1)) == 0.0
    Filtration(f.complex, f.values)  # monotonicity revalidated


def test_vr_gradient_closed_form():
    X = np.array([[0.0, 0.0], [3.0, 4.0]])
    fam = VietorisRips(2, 1)
    g = sparse_to_dense(fam.simplex_gradient(X, (0, 1)), X)
    np.testing.assert_allclose(g[0], [-0.3, -0.4])
    np.testing.assert_allclose(g[1], [0.3, 0.4])


def test_vr_gradient_matches_fd(rng):
    fam = VietorisRips(5, 2)
    for _ in range(10):
        X = rng.normal(size=(5, 2))
        f = fam.filtration(X)
        for s in [(0, 1), (2, 4), (0, 1, 2), (1, 3, 4)]:
            g = sparse_to_dense(fam.simplex_gradient(X, s), X)
            np.testing.assert_allclose(g, fd_simplex_value(fam, X, s), atol=1e-5)


def test_vr_triangle_gradient_equals_diameter_edge(rng):
    X = rng.normal(size=(4, 2))
    fam = VietorisRips(4, 2)
    tri = (0, 1, 2)
    dists = {(i, j): np.linalg.norm(X[i] - X[j]) for i, j in itertools.combinations(tri, 2)}
    diam_edge = max(dists, key=dists.get)
    g_tri = fam.simplex_gradient(X, tri)
    g_edge = fam.simplex_gradient(X, diam_edge)
    assert g_tri.keys() == g_edge.keys()
    for k in g_tri:
        np.testing.assert_allclose(g_tri[k], g_edge[k])


def test_vr_isometry_invariance(rng):
    X = rng.normal(size=(6, 2))
    theta = 0.7
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    fam = VietorisRips(6, 2)
    np.testing.assert_allclose(
        fam.filtration(X).values, fam.filtration(X @ R.T + 3.0).values, atol=1e-12
    )


# -- weighted Rips ----------------------------------------------------------


def test_weighted_rips_zero_weights_doubles_vr():
    X = np.array([[0.0, 0.0], [1.0, 0.0]])
    fam = WeightedRips(2, 1, ConstantWeights(np.zeros(2)))
    f = fam.filtration(X)
    assert f.value((0, 1)) == pytest.approx(1.0)  # = ||x_i - x_j||


def test_weighted_rips_edge_cases():
    X = np.array([[0.0, 0.0], [2.0, 0.0]])
    fam = WeightedRips(2, 1, ConstantWeights(np.ones(2)))
    assert fam.filtration(X).value((0, 1)) == pytest.approx(4.0)
    X2 = np.array([[0.0, 0.0], [1.0, 0.0]])
    fam2 = WeightedRips(2, 1, ConstantWeights(np.array([10.0, 0.0])))
    assert fam2.filtration(X2).value((0, 1)) == pytest.approx(20.0)


def test_weighted_rips_gradient_matches_fd(rng):
    for _ in range(5):
        X = rng.normal(size=(5, 2)) * 2.0
        w = rng.uniform(0.1, 0.5, size=5)
        fam = WeightedRips(5, 2, ConstantWeights(w))
        for s in [(0, 1), (1, 4), (0, 2, 3)]:
            g = sparse_to_dense(fam.simplex_gradient(X, s), X)
            np.testing.assert_allclose(
                g, fd_simplex_value(fam, X, s), atol=1e-5
            )


def test_dtm_weights_brute_force(rng):
    X = rng.normal(size=(6, 2))
    k = 2
    w = DTMWeights(k).values(X)
    for i in range(6):
        d = np.sort(np.linalg.norm(X - X[i], axis=1))
        np.testing.assert_allclose(w[i], d[1 : k + 1].mean())


def test_dtm_rejects_large_k():
    X = np.zeros((3, 2))
    with pytest.raises(ValueError):
        WeightedRips(3, 1, DTMWeights(3)).filtration(X)


def test_dtm_weighted_rips_gradient_matches_fd(rng):
    for _ in range(5):
        X = rng.normal(size=(5, 2)) * 2.0
        fam = WeightedRips(5, 1, DTMWeights(2))
        for s in [(0, 1), (2, 4)]:
            g = sparse_to_dense(fam.simplex_gradient(X, s), X)
            np.testing.assert_allclose(
                g, fd_simplex_value(fam, X, s), atol=1e-4
            )


# -- lower star / height / raw values ---------------------------------------


def test_lower_star_path():
    cx = build_complex([[0, 1], [1, 2]])
    fam = LowerStar(cx)
    f = fam.filtration(np.array([0.0, 2.0, 1.0]))
    assert f.value((0, 1)) == 2.0
    assert f.value((1, 2)) == 2.0


def test_lower_star_gradient_is_witness_indicator():
    cx = build_complex([[0, 1]])
    fam = LowerStar(cx)
    g = fam.simplex_gradient(np.array([0.0, 2.0]), (0, 1))
    assert g == {1: 1.0}
    # tie -> smallest vertex id wins
    g_tie = fam.simplex_gradient(np.array([2.0, 2.0]), (0, 1))
    assert g_tie == {0: 1.0}


def test_height_filtration_triangle():
    cx = build_complex([[0, 1, 2]])
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    fam = HeightFiltration(cx, pts)
    f = fam.filtration(np.array([0.0, 1.0]))
    assert f.value((0,)) == 0.0
    assert f.value((1,)) == 0.0
    assert f.value((2,)) == 1.0
    assert f.value((0, 1, 2)) == 1.0


def test_height_gradient_tangent_projection(rng):
    cx = build_complex([[0, 1, 2]])
    pts = rng.normal(size=(3, 2))
    fam = HeightFiltration(cx, pts)
    theta = rng.normal(size=2)
    theta /= np.linalg.norm(theta)
    g = sparse_to_dense(fam.simplex_gradient(theta, (0, 1, 2)), theta)
    w = int(np.argmax(pts @ theta))
    np.testing.assert_allclose(g, (np.eye(2) - np.outer(theta, theta)) @ pts[w])


def test_height_normalizes_with_warning():
    cx = build_complex([[0]])
    fam = HeightFiltration(cx, np.array([[1.0, 0.0]]))
    with pytest.warns(UserWarning):
        f = fam.filtration(np.array([2.0, 0.0]))
    assert f.value((0,)) == pytest.approx(1.0)


def test_raw_values_identity(rng):
    cx = build_complex([[0, 1, 2]])
    fam = RawValues(cx)
    base = fam.filtration(np.zeros(len(cx))).values
    theta = np.sort(rng.uniform(size=len(cx)))  # sorted by (dim, lex) order is monotone here
    f = fam.filtration(theta)
    assert np.all(f.values == theta) or np.all(f.values == base + theta)


def test_move_values_clamps_faces_and_cofaces():
    cx = build_complex([[0, 1, 2]])
    vals = np.array([max(s) for s in cx.simplices], dtype=float)
    f = Filtration(cx, vals)
    # push the triangle below its faces: faces must come down with it
    new = move_values(cx, f.values, {(0, 1, 2): 0.5})
    f2 = Filtration(cx, new)
    assert f2.value((0, 1, 2)) == 0.5
    for face in boundary((0, 1, 2)):
        assert f2.value(face) <= 0.5
    # push a vertex above its cofaces: cofaces must come up
    new2 = move_values(cx, f.values, {(0,): 9.0})
    f3 = Filtration(cx, new2)
    assert f3.value((0,)) == 9.0
    assert f3.value((0, 1)) >= 9.0


def test_strata_signature_detects_tie():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    fam = VietorisRips(4, 2)
    sig = strata_signature(fam, square)
    assert sig.tied  # the two diagonals have exactly equal length
    generic = square + np.random.default_rng(1).normal(scale=0.01, size=square.shape)
    assert not strata_signature(fam, generic).tied


def test_strata_signature_locally_constant(rng):
    X = rng.normal(size=(5, 2))
    fam = VietorisRips(5, 2)
    sig = strata_signature(fam, X)
    assert strata_signature(fam, X + 1e-9 * rng.normal(size=X.shape)) == sig


def test_cloud_io_roundtrip(tmp_path, rng):
    X = rng.normal(size=(7, 3))
    path = tmp_path / "cloud.csv"
    write_cloud(path, X)
    np.testing.assert_allclose(read_cloud(path), X)
    header = open(path).readline().strip()
    assert header == "x0,x1,x2"
