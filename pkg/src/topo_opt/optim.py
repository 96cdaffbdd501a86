"""Descent driver over filtration parameters with pluggable gradient schemes.

A run produces a Trace of (step, loss, grad_norm, time_ms) records, one per
step plus the initial state.  Fixed seeds make the iterates and the
loss/grad columns of the trace bit-identical across runs; wall times are
excluded from trace equality.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .losses import DiagramLoss
from .schemes import (
    StratifiedConfig,
    big_step_gradient,
    continuation_step,
    diffeo_interpolate,
    distributed_gradient,
    min_norm_point,
    sample_strata,
    stratified_gradient,
    stratified_gradient_const,
    vanilla_gradient,
)

METHODS = (
    "vanilla",
    "stratified",
    "stratified_const",
    "big_step",
    "continuation",
    "distributed",
    "diffeo",
)


@dataclass
class TraceRecord:
    step: int
    loss: float
    grad_norm: float
    time_ms: float

    def __eq__(self, other):  # wall time excluded
        return (
            self.step == other.step
            and self.loss == other.loss
            and self.grad_norm == other.grad_norm
        )


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def losses(self):
        return np.array([r.loss for r in self.records])

    def __eq__(self, other):
        return self.records == other.records


class DescentAborted(RuntimeError):
    """Raised when the loss turns non-finite; carries the partial trace."""

    def __init__(self, message: str, trace: Trace):
        super().__init__(message)
        self.trace = trace


def geometric_schedule(eta: float, gamma: float):
    """Step sizes eta * gamma^k (square-summable for gamma < 1)."""
    return lambda k: eta * gamma**k


def harmonic_schedule(eta: float):
    """Step sizes eta / (k+1): non-summable but square-summable."""
    return lambda k: eta / (k + 1)


@dataclass
class DescentConfig:
    method: str = "vanilla"
    steps: int = 20
    lr: float = 0.1
    decay: float = 1.0
    schedule: str = "geometric"
    noise_std: float = 0.0
    seed: int = 0
    stratified: StratifiedConfig = field(default_factory=StratifiedConfig)
    moving_set_variant: str = "naive"
    continuation_targets: dict | None = None
    n_sub: int = 10
    subsample_size: int = 20
    diffeo_sigma: float = 0.05
    diffeo_ridge: float = 0.0
    snapshot_steps: tuple[int, ...] = ()

    def make_schedule(self):
        if self.schedule == "geometric":
            return geometric_schedule(self.lr, self.decay)
        if self.schedule == "harmonic":
            return harmonic_schedule(self.lr)
        raise ValueError(f"unknown schedule {self.schedule!r}")


def descend(family, theta0, loss: DiagramLoss, cfg: DescentConfig,
            regularizer=None):
    """Run cfg.steps descent steps from theta0; returns (theta, Trace).

    ``regularizer``, when given, must expose value_and_grad(theta) and is
    added to the topological loss for every method.
    """
    if cfg.method not in METHODS:
        raise ValueError(f"unknown method {cfg.method!r}")
    rng = np.random.default_rng(cfg.seed)
    schedule = cfg.make_schedule()
    theta = np.asarray(theta0, dtype=float).copy()
    trace = Trace()
    for k in range(cfg.steps + 1):
        t0 = time.perf_counter()
        lr = schedule(k)
        step_size = lr
        theta_next_override = None
        if cfg.method in ("vanilla", "distributed", "diffeo"):
            value, g, _ = vanilla_gradient(family, theta, loss)
            if cfg.method == "distributed":
                g = distributed_gradient(
                    family, theta, loss, cfg.n_sub, cfg.subsample_size, rng
                )
            elif cfg.method == "diffeo":
                fld = diffeo_interpolate(theta, g, cfg.diffeo_sigma, cfg.diffeo_ridge)
                g = fld(theta) if len(fld.centers) else np.zeros_like(theta)
        elif cfg.method in ("stratified", "stratified_const"):
            value, _, _ = vanilla_gradient(family, theta, loss)
            fn = (
                stratified_gradient
                if cfg.method == "stratified"
                else stratified_gradient_const
            )
            g, alpha = fn(family, theta, loss, cfg.stratified, rng)
            step_size = alpha
        elif cfg.method == "big_step":
            value, g, _ = big_step_gradient(
                family, theta, loss, push_scale=lr, variant=cfg.moving_set_variant
            )
        elif cfg.method == "continuation":
            if not cfg.continuation_targets:
                raise ValueError("continuation requires target diagrams")
            theta_next_override, dgm = continuation_step(
                family, theta, cfg.continuation_targets, gamma=lr
            )
            value, _ = loss.evaluate(dgm)
            g = (theta - theta_next_override) / lr if lr else np.zeros_like(theta)
        if regularizer is not None:
            rv, rg = regularizer.value_and_grad(theta)
            value += rv
            g = g + rg
            if theta_next_override is not None:
                theta_next_override = theta_next_override - lr * rg
        gnorm = float(np.linalg.norm(g))
        trace.records.append(
            TraceRecord(k, float(value), gnorm, (time.perf_counter() - t0) * 1e3)
        )
        if k in cfg.snapshot_steps:
            trace.snapshots[k] = theta.copy()
        if not np.isfinite(value):
            raise DescentAborted(
                f"non-finite loss {value} at step {k} (grad norm {gnorm})", trace
            )
        if k == cfg.steps:
            break
        if cfg.method in ("stratified", "stratified_const") and step_size == 0.0:
            # approximate stationarity: the sampled-strata min-norm point
            # vanished, no admissible step remains.
            break
        zeta = (
            rng.normal(0.0, cfg.noise_std, size=theta.shape)
            if cfg.noise_std > 0
            else 0.0
        )
        if theta_next_override is not None:
            theta = theta_next_override + (
                -lr * zeta if cfg.noise_std > 0 else 0.0
            )
        else:
            theta = theta - step_size * (g + zeta)
    return theta, trace


def goldstein_check(family, theta, loss: DiagramLoss, eps: float, m: int,
                    eta: float = 1e-6, rng: np.random.Generator | None = None):
    """Approximate Goldstein stationarity test: min-norm point of sampled
    strata gradients within the eps-ball.  Returns (is_stationary, norm)."""
    if rng is None:
        rng = np.random.default_rng(0)
    pts = sample_strata(family, theta, eps, m, rng)
    grads = [vanilla_gradient(family, p, loss)[1] for p in pts]
    g = min_norm_point(grads)
    nrm = float(np.linalg.norm(g))
    return nrm <= eta, nrm


class BoxRegularizer:
    """Per-coordinate soft confinement sum_i sum_k (|x_ik| - bound)_+^2."""

    def __init__(self, bound: float = 2.0):
        self.bound = bound

    def value_and_grad(self, theta):
        theta = np.asarray(theta, dtype=float)
        excess = np.maximum(np.abs(theta) - self.bound, 0.0)
        value = float((excess**2).sum())
        grad = 2.0 * excess * np.sign(theta)
        return value, grad


# ---------------------------------------------------------------------------
# trace serialization: step,loss,grad_norm,time_ms


def write_trace(path, trace: Trace) -> None:
    with open(path, "w") as fh:
        fh.write("step,loss,grad_norm,time_ms\n")
        for r in trace.records:
            fh.write(f"{r.step},{r.loss:.17g},{r.grad_norm:.17g},{r.time_ms:.17g}\n")


def read_trace(path) -> Trace:
    trace = Trace()
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("step,"):
                continue
            s, l, g, t = line.split(",")
            trace.records.append(TraceRecord(int(s), float(l), float(g), float(t)))
    return trace
