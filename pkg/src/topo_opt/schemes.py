"""Gradient schemes for losses composed with persistence.

Includes the plain chain-rule gradient, gradient sampling over ordering
strata with a min-norm-point step size, moving sets with their fast
matrix-support characterization, the big-step gradient, diagram-space
continuation, subsampled distributed gradients, and kernel interpolation of
a gradient field.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .complexes import Filtration, Simplex, boundary, build_complex, is_face
from .filtrations import strata_signature
from .losses import PRUNE_TOL, DiagramLoss, compose_gradient
from .metrics import fg_distance
from .reduction import (
    ReducedDecomposition,
    build_diagram,
    perp_basis,
    reduce,
    transpose_adjacent,
)


def vanilla_gradient(family, theta, loss: DiagramLoss):
    """Loss value and parameter gradient through the persistence pairing.

    Essential points are stripped and near-zero-persistence points pruned
    before the loss is evaluated.  Returns (value, gradient, diagram).
    """
    filt = family.filtration(theta)
    dgm = build_diagram(filt, drop_zero_tol=PRUNE_TOL)
    value, grads = loss.evaluate(dgm)
    g = compose_gradient(family, theta, dgm, grads)
    return value, g, dgm


# ---------------------------------------------------------------------------
# strata sampling and the min-norm point


def sample_strata(family, theta, eps: float, m: int, rng: np.random.Generator):
    """Sample up to m parameter points with pairwise-distinct ordering
    signatures from the eps-ball around theta (theta's own stratum is always
    included first).  Rejection sampling is capped at 20*m draws."""
    theta = np.asarray(theta, dtype=float)
    seen = {strata_signature(family, theta)}
    out = [theta.copy()]
    draws = 0
    dim = theta.size
    while len(out) - 1 < m and draws < 20 * m:
        draws += 1
        u = rng.standard_normal(theta.shape)
        nrm = np.linalg.norm(u)
        if nrm == 0:
            continue
        r = eps * rng.uniform() ** (1.0 / dim)
        cand = theta + u * (r / nrm)
        sig = strata_signature(family, cand)
        if sig not in seen:
            seen.add(sig)
            out.append(cand)
    return out


def _affine_minimizer(P: np.ndarray) -> np.ndarray:
    """Coefficients a (sum 1) minimizing ||a @ P|| over the affine hull."""
    k = len(P)
    A = np.zeros((k + 1, k + 1))
    A[:k, :k] = P @ P.T
    A[k, :k] = 1.0
    A[:k, k] = 1.0
    b = np.zeros(k + 1)
    b[k] = 1.0
    sol = np.linalg.lstsq(A, b, rcond=None)[0]
    return sol[:k]


def min_norm_point(vectors, tol: float = 1e-9, max_iter: int = 1000) -> np.ndarray:
    """Minimum-norm point of the convex hull of the given vectors (Wolfe).

    Terminates on the Wolfe criterion <g*, g_i - g*> >= -tol for all i.
    """
    P = np.asarray(
        [np.asarray(v, dtype=float).ravel() for v in vectors], dtype=float
    )
    if len(P) == 0:
        raise ValueError("need at least one vector")
    S = [int(np.argmin((P * P).sum(axis=1)))]
    lam = np.array([1.0])
    x = P[S[0]].copy()
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if dots[j] >= x @ x - tol:
            break
        if j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        # minor cycle: pull the affine minimizer back into the simplex
        while True:
            a = _affine_minimizer(P[S])
            if (a > 1e-12).all():
                lam = a
                break
            mask = a <= 1e-12
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(mask, lam / (lam - a), np.inf)
            t = min(1.0, float(ratios.min()))
            lam = lam + t * (a - lam)
            keep = lam > 1e-12
            if keep.all():
                lam = lam / lam.sum()
                break
            S = [s for s, k in zip(S, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
        x = lam @ P[S]
    return x


@dataclass
class StratifiedConfig:
    eps: float = 1e-2
    m: int = 4
    beta: float = 0.5
    C: float = 10.0
    shrink: float = 0.5
    eta: float = 1e-8
    seed: int = 0


def stratified_gradient(family, theta, loss: DiagramLoss, cfg: StratifiedConfig,
                        rng: np.random.Generator | None = None):
    """Controlled stratified gradient: min-norm over sampled strata
    gradients with the ball radius shrunk until eps <= (1-beta)/(2C)*||g||.

    Returns (g, alpha) with alpha = eps/||g|| the admissible step size, or
    alpha = 0 at approximate stationarity (||g|| <= eta)."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    eps = cfg.eps
    bound = (1.0 - cfg.beta) / (2.0 * cfg.C)
    while True:
        pts = sample_strata(family, theta, eps, cfg.m, rng)
        grads = [vanilla_gradient(family, p, loss)[1] for p in pts]
        g = min_norm_point(grads)
        nrm = np.linalg.norm(g)
        if nrm <= cfg.eta:
            return g.reshape(np.shape(theta)), 0.0
        if eps <= bound * nrm:
            return g.reshape(np.shape(theta)), eps / nrm
        eps *= cfg.shrink


def stratified_gradient_const(family, theta, loss: DiagramLoss, cfg: StratifiedConfig,
                              rng: np.random.Generator | None = None):
    """Constant-time variant: one fixed sample, one radius shrink, then the
    sample is filtered to the reduced ball (the min-norm point can only grow
    under subset filtering, so the bound keeps holding)."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    theta = np.asarray(theta, dtype=float)
    pts = sample_strata(family, theta, cfg.eps, cfg.m, rng)
    grads = [vanilla_gradient(family, p, loss)[1] for p in pts]
    g = min_norm_point(grads)
    nrm = np.linalg.norm(g)
    if nrm <= cfg.eta:
        return g.reshape(theta.shape), 0.0
    bound = (1.0 - cfg.beta) / (2.0 * cfg.C)
    eps = min(cfg.eps, bound * nrm)
    kept = [
        (p, gr)
        for p, gr in zip(pts, grads)
        if np.linalg.norm(p - theta) <= eps + 1e-15
    ]
    g = min_norm_point([gr for _, gr in kept])
    nrm = np.linalg.norm(g)
    if nrm <= cfg.eta:
        return g.reshape(theta.shape), 0.0
    return g.reshape(theta.shape), eps / nrm


# ---------------------------------------------------------------------------
# moving sets


def _clip_target(dec: ReducedDecomposition, tau: Simplex, t: float) -> float:
    """Clamp the target value so tau never crosses one of its own faces or
    cofaces; crossing either would break monotonicity of the filtration."""
    v = dec.value_of(tau)
    if t < v:
        face_vals = [dec.value_of(f) for f in boundary(tau)]
        if face_vals and t < max(face_vals):
            bound = max(face_vals)
            warnings.warn(
                f"target {t} for {tau} clipped at face value {bound}"
            )
            return bound
    elif t > v:
        cof_vals = [
            dec.values[q]
            for q, s in enumerate(dec.simplices)
            if len(s) == len(tau) + 1 and is_face(tau, s)
        ]
        if cof_vals and t > min(cof_vals):
            bound = float(min(cof_vals))
            warnings.warn(
                f"target {t} for {tau} clipped at coface value {bound}"
            )
            return bound
    return t


def moving_set_naive(dec: ReducedDecomposition, tau, t: float) -> set[Simplex]:
    """Simplices that must move along when tau's value moves to t.

    Each same-dimension candidate between f(tau) and t is transposed across
    the moving block and joins it exactly when the swap steals tau's pairing.
    The pairing only depends on the order within each dimension, so the walk
    runs on a scratch decomposition whose simplices are sorted by dimension
    first; there the block is contiguous and every crossing is a sequence of
    plain adjacent transpositions."""
    tau = tuple(tau)
    pos_tau = dec.position(tau)
    part = dec.partner(pos_tau)
    if part is None:
        raise ValueError(f"{tau} is essential; it has no finite pair to preserve")
    sigma = dec.simplices[part]
    p = len(tau) - 1
    v0 = float(dec.values[pos_tau])
    t = _clip_target(dec, tau, t)
    up = t > v0
    value_at = {s: float(dec.values[q]) for q, s in enumerate(dec.simplices)}

    scratch = getattr(dec, "_dim_sorted_scratch", None)
    if scratch is None:
        cx = build_complex(dec.simplices)
        ranks = sorted(range(len(dec.simplices)),
                       key=lambda q: (len(dec.simplices[q]), q))
        vals = np.empty(len(ranks))
        for r, q in enumerate(ranks):
            vals[cx.index[dec.simplices[q]]] = r
        scratch = reduce(Filtration(cx, vals))
        dec._dim_sorted_scratch = scratch

    lo = hi = scratch.position(tau)
    X = {tau}
    log: list[int] = []

    def do(i):
        transpose_adjacent(scratch, i)
        log.append(i)

    n = len(scratch.simplices)
    while True:
        q = hi + 1 if up else lo - 1
        if q < 0 or q >= n:
            break
        s = scratch.simplices[q]
        if len(s) - 1 != p:
            break
        v = value_at[s]
        if (up and not v0 < v < t) or (not up and not t < v < v0):
            break
        # cross s over the block
        seq = list(range(hi, lo - 1, -1)) if up else list(range(lo - 1, hi))
        for i in seq:
            do(i)
        new_part = scratch.partner(scratch.position(sigma))
        joined = new_part is None or scratch.simplices[new_part] != tau
        if joined:
            for i in reversed(seq):
                do(i)
            X.add(s)
            if up:
                hi += 1
            else:
                lo -= 1
        else:
            if up:
                lo += 1
                hi += 1
            else:
                lo -= 1
                hi -= 1
    for i in reversed(log):
        transpose_adjacent(scratch, i)
    return X


def moving_set_fast(dec: ReducedDecomposition, tau, t: float) -> set[Simplex]:
    """Moving set read directly off the supports of V, U and their
    anti-transpose counterparts.

    For a death simplex the candidates below/above are the nonzeros of the
    V column / U row of tau; for a birth simplex the corresponding entries
    of the perp decomposition.  The support is intersected with the open
    window of same-dimension values between f(tau) and the (clipped)
    target."""
    tau = tuple(tau)
    pos_tau = dec.position(tau)
    if dec.partner(pos_tau) is None:
        raise ValueError(f"{tau} is essential; it has no finite pair to preserve")
    p = len(tau) - 1
    v0 = float(dec.values[pos_tau])
    t = _clip_target(dec, tau, t)
    up = t > v0
    n = len(dec.simplices)
    if dec.is_death(pos_tau):
        dec._require_basis()
        support = dec.U[pos_tau] if up else dec.V[pos_tau]
    else:
        Vp, Up = perp_basis(dec)
        pp = n - 1 - pos_tau
        sup_perp = Vp[pp] if up else Up[pp]
        support = {n - 1 - q for q in sup_perp}
    X = {tau}
    for q in support:
        s = dec.simplices[q]
        if len(s) - 1 != p:
            continue
        v = float(dec.values[q])
        if (up and v0 < v < t) or (not up and t < v < v0):
            X.add(s)
    return X


def moving_set(dec: ReducedDecomposition, tau, t: float, variant: str = "fast"):
    if variant == "fast":
        return moving_set_fast(dec, tau, t)
    if variant == "naive":
        return moving_set_naive(dec, tau, t)
    raise ValueError(f"unknown moving-set variant {variant!r}")


# ---------------------------------------------------------------------------
# big-step gradient


def big_step_gradient(family, theta, loss: DiagramLoss, push_scale: float = 1.0,
                      variant: str = "naive"):
    """Gradient with diagram partials spread over moving sets.

    For each singleton term of the loss, the partial derivative of the
    birth (death) coordinate is copied onto every simplex in the moving set
    of the birth (death) simplex toward its target value.  A simplex pushed
    by several terms keeps the one with the largest |current - target| gap.
    Returns (value, gradient, diagram).
    """
    theta = np.asarray(theta, dtype=float)
    filt = family.filtration(theta)
    dec = reduce(filt, with_basis=True)
    dgm = build_diagram(filt, dec.pairing(), drop_zero_tol=PRUNE_TOL)
    value, _ = loss.evaluate(dgm)
    terms = loss.terms(dgm, push_scale)
    assigned: dict[Simplex, tuple[float, float]] = {}

    def offer(s: Simplex, partial: float, target: float):
        gap = abs(filt.value(s) - target)
        if s not in assigned or gap > assigned[s][0]:
            assigned[s] = (gap, partial)

    for term in terms:
        for s, partial, target in (
            (term.birth_simplex, term.partials[0], term.target[0]),
            (term.death_simplex, term.partials[1], term.target[1]),
        ):
            if partial == 0.0:
                continue
            if abs(filt.value(s) - target) <= PRUNE_TOL:
                offer(s, partial, target)
                continue
            for member in moving_set(dec, s, target, variant):
                offer(member, partial, target)
    g = np.zeros_like(theta)
    for s, (_, partial) in assigned.items():
        for k, v in family.simplex_gradient(theta, s).items():
            g[k] += partial * v
    return value, g, dgm


# ---------------------------------------------------------------------------
# continuation in diagram space


def continuation_step(family, theta, targets: dict[int, np.ndarray],
                      gamma: float = 1.0, q: float = 2.0):
    """One continuation update X += gamma * J^+ v.

    v stacks, for every ordinary diagram point, the displacement toward its
    optimally matched target point (or its diagonal projection); J stacks the
    filtration gradients of the paired simplices.  The pseudo-inverse uses an
    SVD cutoff of 1e-10 relative to the largest singular value.
    """
    theta = np.asarray(theta, dtype=float)
    filt = family.filtration(theta)
    dgm = build_diagram(filt, drop_zero_tol=PRUNE_TOL)
    rows_J, rows_v = [], []
    for dim, target in targets.items():
        pts = dgm.ordinary(dim)
        target = np.asarray(target, dtype=float).reshape(-1, 2)
        _, matching = fg_distance(pts, target, q=q)
        disp = np.zeros_like(pts)
        for i, j in matching.pairs:
            if i < 0:
                continue
            if j >= 0:
                disp[i] = target[j] - pts[i]
            else:
                m = 0.5 * (pts[i, 0] + pts[i, 1])
                disp[i] = np.array([m, m]) - pts[i]
        for i, (bs, ds) in enumerate(dgm.pairs.get(dim, [])):
            for s, dv in ((bs, disp[i, 0]), (ds, disp[i, 1])):
                row = np.zeros(theta.size)
                for k, v in family.simplex_gradient(theta, s).items():
                    flat = np.zeros_like(theta)
                    flat[k] = v
                    row += flat.ravel()
                rows_J.append(row)
                rows_v.append(dv)
    if not rows_J:
        return theta.copy(), dgm
    J = np.asarray(rows_J)
    v = np.asarray(rows_v)
    delta = np.linalg.pinv(J, rcond=1e-10) @ v
    return theta + gamma * delta.reshape(theta.shape), dgm


# ---------------------------------------------------------------------------
# distributed (subsampled) gradient


def distributed_gradient(family, theta, loss: DiagramLoss, n_sub: int, s: int,
                         rng: np.random.Generator):
    """Average of vanilla gradients over n_sub random s-point subclouds,
    scattered back to the global point indices."""
    theta = np.asarray(theta, dtype=float)
    n = len(theta)
    if s > n:
        raise ValueError("subsample size exceeds the cloud size")
    g = np.zeros_like(theta)
    for _ in range(n_sub):
        idx = np.sort(rng.choice(n, size=s, replace=False))
        sub = family.subsample(idx)
        _, gs, _ = vanilla_gradient(sub, theta[idx], loss)
        g[idx] += gs
    return g / n_sub


# ---------------------------------------------------------------------------
# kernel interpolation of a gradient field


class GaussianField:
    """Radial-basis vector field V(x) = sum_i rho_sigma(||x - c_i||) alpha_i."""

    def __init__(self, centers: np.ndarray, alpha: np.ndarray, sigma: float):
        self.centers = centers
        self.alpha = alpha
        self.sigma = sigma

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d2 = ((pts[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=-1)
        K = np.exp(-d2 / (2.0 * self.sigma**2))
        return K @ self.alpha


def diffeo_interpolate(X: np.ndarray, grad: np.ndarray, sigma: float,
                       ridge: float = 0.0) -> GaussianField:
    """Interpolate a sparse per-point gradient into a smooth global field.

    Coefficients solve (K + ridge*I) alpha = grad on the support of the
    gradient, K_ij = exp(-||x_i-x_j||^2 / (2 sigma^2)).  A singular system at
    ridge=0 falls back to ridge=1e-10 with a warning.
    """
    X = np.asarray(X, dtype=float)
    grad = np.asarray(grad, dtype=float)
    support = np.where(np.linalg.norm(grad, axis=1) > 0)[0]
    if len(support) == 0:
        return GaussianField(X[:0], grad[:0], sigma)
    C = X[support]
    a = grad[support]
    d2 = ((C[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)
    K = np.exp(-d2 / (2.0 * sigma**2))
    try:
        alpha = np.linalg.solve(K + ridge * np.eye(len(C)), a)
        resid = np.abs(K @ alpha + ridge * alpha - a).max()
        if not np.isfinite(alpha).all() or (ridge == 0.0 and resid > 1e-6):
            raise np.linalg.LinAlgError("ill-conditioned kernel system")
    except np.linalg.LinAlgError:
        warnings.warn("singular kernel matrix at ridge=0; retrying with 1e-10")
        alpha = np.linalg.solve(K + 1e-10 * np.eye(len(C)), a)
    return GaussianField(C, alpha, sigma)
