"""Diagram losses: closed-form values, gradients vs finite differences,
and the chain rule through filtration families."""
import numpy as np
import pytest

from topo_opt.filtrations import VietorisRips
from topo_opt.losses import (
    DistanceToTargetLoss,
    EmptyDiagramDistanceLoss,
    LinearVectorizationLoss,
    SimplificationLoss,
    SingletonLoss,
    TotalPersistenceLoss,
    compose_gradient,
    distance_to_target,
    linear_vectorization,
    singleton_loss,
    total_persistence,
)
from topo_opt.reduction import build_diagram


def fd_loss_grad(fn, points, h=1e-6):
    """Central finite differences of a (value, grad, ...) loss in the points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.zeros_like(pts)
    for i in range(pts.shape[0]):
        for j in range(2):
            up, dn = pts.copy(), pts.copy()
            up[i, j] += h
            dn[i, j] -= h
            out[i, j] = (fn(up)[0] - fn(dn)[0]) / (2 * h)
    return out


def test_total_persistence_single_point():
    value, grad = total_persistence([(0.0, 2.0)])
    assert value == pytest.approx(2.0)
    np.testing.assert_allclose(grad, [[-2.0, 2.0]])


def test_total_persistence_fd(rng):
    pts = rng.uniform(0, 1, size=(5, 2))
    pts[:, 1] += pts[:, 0] + 0.1
    for p in (1.5, 2.0, 3.0):
        _, grad = total_persistence(pts, exponent=p)
        fd = fd_loss_grad(lambda x: total_persistence(x, exponent=p), pts)
        np.testing.assert_allclose(grad, fd, atol=1e-6)


def test_total_persistence_death_only():
    _, grad = total_persistence([(0.0, 2.0)], death_only=True)
    np.testing.assert_allclose(grad, [[0.0, 2.0]])


def test_simplification_selects_small_bars():
    pts = [(0.0, 0.05), (0.0, 1.0)]
    loss = SimplificationLoss(dims=(0,), eta=0.1)
    value, grads = loss.evaluate(FakeDiagram({0: np.asarray(pts)}))
    assert value == pytest.approx(0.05)
    np.testing.assert_allclose(grads[0], [[-1.0, 1.0], [0.0, 0.0]])


class FakeDiagram:
    """Minimal stand-in exposing just the ordinary() accessor."""

    def __init__(self, points):
        self.points = {k: np.asarray(v, dtype=float) for k, v in points.items()}

    def ordinary(self, dim):
        return self.points.get(dim, np.empty((0, 2)))


def test_distance_to_target_empty_target():
    value, grad, matching = distance_to_target([(0.0, 2.0)], np.empty((0, 2)))
    assert value == pytest.approx(1.0)
    np.testing.assert_allclose(grad, [[-1.0, 1.0]])
    assert matching.pairs == [(0, -1)]


def test_distance_to_target_fd(rng):
    tgt = np.array([[0.2, 0.9], [0.5, 1.4]])
    pts = rng.uniform(0, 1, size=(4, 2))
    pts[:, 1] += pts[:, 0] + 0.2
    _, grad, _ = distance_to_target(pts, tgt)
    fd = fd_loss_grad(lambda x: distance_to_target(x, tgt), pts)
    np.testing.assert_allclose(grad, fd, atol=1e-5)


def test_singleton_pinned_example():
    value, grad = singleton_loss([(1.0, 3.0)], 0, (1.0, 5.0))
    assert value == pytest.approx(2.0)
    np.testing.assert_allclose(grad, [[0.0, -1.0]])


def test_singleton_zero_at_target():
    value, grad = singleton_loss([(1.0, 3.0)], 0, (1.0, 3.0))
    assert value == 0.0
    np.testing.assert_allclose(grad, 0.0)


def test_linear_vectorization_unit_bump():
    grid = np.array([[0.0, 1.0], [5.0, 5.0]])
    feats, jac = linear_vectorization([(0.0, 1.0)], grid, bandwidth=0.3)
    assert feats[0] == pytest.approx(1.0)
    assert feats[1] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(jac[0, 0], [0.0, 0.0], atol=1e-12)


def test_linear_vectorization_fd(rng):
    grid = rng.uniform(0, 2, size=(3, 2))
    pts = rng.uniform(0, 2, size=(2, 2))
    w = rng.uniform(-1, 1, size=3)
    loss = LinearVectorizationLoss(0, grid, 0.5, w)
    dgm = FakeDiagram({0: pts})
    _, grads = loss.evaluate(dgm)

    def value(x):
        f, _ = linear_vectorization(x, grid, 0.5)
        return (float(w @ f),)

    np.testing.assert_allclose(grads[0], fd_loss_grad(value, pts), atol=1e-6)


def test_empty_diagram_distance_fd(rng):
    pts = rng.uniform(0, 1, size=(3, 2))
    pts[:, 1] += pts[:, 0] + 0.3
    loss = EmptyDiagramDistanceLoss(dim=1, q=2.0, sign=-1.0)
    _, grads = loss.evaluate(FakeDiagram({1: pts}))

    def value(x):
        v, _ = loss.evaluate(FakeDiagram({1: x}))
        return (v,)

    np.testing.assert_allclose(grads[1], fd_loss_grad(value, pts), atol=1e-6)
    # negative sign rewards persistence: gradients push deaths upward
    assert np.all(grads[1][:, 1] < 0)


def test_compose_gradient_chain_rule(rng):
    """d/d theta of loss(diagram(theta)) via witnesses matches central FD."""
    X = rng.normal(size=(6, 2))
    fam = VietorisRips(n_points=X.shape[0], max_dim=2)
    losses = [
        TotalPersistenceLoss(dims=(0,)),
        TotalPersistenceLoss(dims=(1,), sign=-1.0),
        DistanceToTargetLoss(1, [[0.3, 0.8]]),
    ]

    def scalar(loss, cloud):
        dgm = build_diagram(fam.filtration(cloud), drop_zero_tol=1e-12)
        return loss.evaluate(dgm)[0]

    for loss in losses:
        dgm = build_diagram(fam.filtration(X), drop_zero_tol=1e-12)
        _, grads = loss.evaluate(dgm)
        lifted = compose_gradient(fam, X, dgm, grads)
        h = 1e-6
        for i in range(X.shape[0]):
            for j in range(2):
                up, dn = X.copy(), X.copy()
                up[i, j] += h
                dn[i, j] -= h
                fd = (scalar(loss, up) - scalar(loss, dn)) / (2 * h)
                assert lifted[i, j] == pytest.approx(fd, abs=1e-4)


def test_singleton_terms_carry_witnesses(rng):
    X = rng.normal(size=(7, 2))
    fam = VietorisRips(n_points=X.shape[0], max_dim=2)
    dgm = build_diagram(fam.filtration(X), drop_zero_tol=1e-12)
    loss = TotalPersistenceLoss(dims=(0,))
    terms = loss.terms(dgm)
    assert terms
    for t in terms:
        pts = dgm.ordinary(t.dim)
        # the witnesses evaluate back to the diagram coordinates
        f = fam.filtration(X)
        assert f.value(t.birth_simplex) == pytest.approx(pts[t.row, 0])
        assert f.value(t.death_simplex) == pytest.approx(pts[t.row, 1])
        # default target is one gradient step from the current point
        np.testing.assert_allclose(t.target, pts[t.row] - t.partials)


def test_zero_persistence_points_pruned(rng):
    """With the pruning tolerance set, repeated points on the diagonal do
    not contribute to loss values or gradients."""
    X = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    fam = VietorisRips(n_points=3, max_dim=1)
    dgm = build_diagram(fam.filtration(X), drop_zero_tol=1e-12)
    pts = dgm.ordinary(0)
    assert np.all(pts[:, 1] - pts[:, 0] > 1e-12)
