"""Online primal-dual subgradient recursion, one observation per step.

Each step ascends the concave primal pair (alpha, eta) and descends the dual
lambda on the realized Lagrangian

    L(alpha, eta, lambda)(d) = 1 - alpha + lambda * [eta + f(alpha) * phi*(d - tau - eta)]

with step size 1/t, projections onto [alpha_min, 1] x E x (-infty, 0], and a
running estimate r_t of the saddle value (the satisficing index) updated as
r_t = r_{t-1} - (1/t) (r_{t-1} - realization), i.e. the running mean of the
realizations at the pre-update iterates.

The eta projection set E is frozen from a warm-up window of the first 50
observations using the batch solver's bracket rule; the warm-up observations
are then replayed as the first steps.  Conjugate domain violations on fresh
observations never raise mid-stream: the realization uses a large sentinel
value and the whole subgradient is replaced by a unit eta-restoring step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .divergence import DivergenceSpec, _scalar_fns, conjugate_domain
from .risk_core import (
    ALPHA_MIN,
    RegretScaling,
    eta_bracket,
    regret_scale,
    regret_scale_derivative,
)

__all__ = [
    "SENTINEL",
    "OnlineState",
    "OnlineResult",
    "initial_state",
    "lagrangian_realization",
    "subgradient",
    "step",
    "run",
    "convergence_diagnostic",
]

SENTINEL = 1e12


@dataclass(frozen=True)
class OnlineState:
    """Snapshot of one item's recursion; immutable, safe to share."""

    alpha: float
    eta: float
    lam: float
    r: float
    t: int
    tau: float
    spec: DivergenceSpec
    scaling: RegretScaling
    bracket: tuple[float, float] | None = None

    def __post_init__(self):
        if not ALPHA_MIN <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [{ALPHA_MIN}, 1]")
        if self.lam > 0.0:
            raise ValueError(f"lambda={self.lam} must be <= 0")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.t == 0 and self.r != 0.0:
            raise ValueError("r must start at 0")


@dataclass(frozen=True)
class OnlineResult:
    final_state: OnlineState
    r_history: tuple[tuple[int, float], ...]
    index_estimate: float


def initial_state(
    tau: float,
    spec: DivergenceSpec,
    scaling: RegretScaling = RegretScaling.INVERSE_ALPHA,
    alpha0: float = 0.5,
    eta0: float = 0.0,
    lambda0: float = -1.0,
) -> OnlineState:
    """Fresh state at t = 0; the eta bracket is frozen later by run()."""
    return OnlineState(
        alpha=alpha0, eta=eta0, lam=lambda0, r=0.0, t=0,
        tau=float(tau), spec=spec, scaling=scaling, bracket=None,
    )


def _kernel(state: OnlineState):
    """Per-spec scalar closures and projection limits for the hot loop."""
    value_fn, grad_fn = _scalar_fns(state.spec)
    dom = conjugate_domain(state.spec)
    alpha_hi = 1.0 if state.scaling is RegretScaling.INVERSE_ALPHA else 1.0 - ALPHA_MIN
    return value_fn, grad_fn, dom.lower, dom.upper, alpha_hi


def _eval(alpha, eta, lam, d, tau, scaling, value_fn, grad_fn, dom_lo, dom_hi):
    """(realization, g_alpha, g_eta, g_lambda) at one observation."""
    s = d - tau - eta
    phi = value_fn(s)
    f_a = regret_scale(scaling, alpha)
    if phi == math.inf:
        realization = 1.0 - alpha + lam * (eta + f_a * SENTINEL)
        g_eta = 1.0 if s >= dom_hi else -1.0
        return realization, 0.0, g_eta, 0.0
    realization = 1.0 - alpha + lam * (eta + f_a * phi)
    g_alpha = -1.0 + lam * phi * regret_scale_derivative(scaling, alpha)
    g_eta = lam * (1.0 - f_a * grad_fn(s))
    g_lambda = eta + f_a * phi
    return realization, g_alpha, g_eta, g_lambda


def lagrangian_realization(state: OnlineState, d: float) -> float:
    """Realized Lagrangian at the current state; +inf conjugate values enter
    through the sentinel."""
    value_fn, grad_fn, dom_lo, dom_hi, _ = _kernel(state)
    realization, _, _, _ = _eval(
        state.alpha, state.eta, state.lam, float(d), state.tau,
        state.scaling, value_fn, grad_fn, dom_lo, dom_hi,
    )
    return realization


def subgradient(state: OnlineState, d: float) -> tuple[float, float, float]:
    """(g_alpha, g_eta, g_lambda) of the realized Lagrangian; on a conjugate
    domain violation, a unit eta-restoring gradient (0, +-1, 0)."""
    value_fn, grad_fn, dom_lo, dom_hi, _ = _kernel(state)
    _, g_alpha, g_eta, g_lambda = _eval(
        state.alpha, state.eta, state.lam, float(d), state.tau,
        state.scaling, value_fn, grad_fn, dom_lo, dom_hi,
    )
    return g_alpha, g_eta, g_lambda


def _advance(alpha, eta, lam, r, t, d, tau, scaling, value_fn, grad_fn,
             dom_lo, dom_hi, e_lo, e_hi, alpha_hi):
    """One primal-dual update with step size 1/(t+1); shared by step and run
    so the two are bit-identical."""
    realization, g_alpha, g_eta, g_lambda = _eval(
        alpha, eta, lam, d, tau, scaling, value_fn, grad_fn, dom_lo, dom_hi
    )
    stepsize = 1.0 / (t + 1.0)
    alpha = alpha + stepsize * g_alpha
    if alpha < ALPHA_MIN:
        alpha = ALPHA_MIN
    elif alpha > alpha_hi:
        alpha = alpha_hi
    eta = eta + stepsize * g_eta
    if eta < e_lo:
        eta = e_lo
    elif eta > e_hi:
        eta = e_hi
    lam = lam - stepsize * g_lambda
    if lam > 0.0:
        lam = 0.0
    r = r - stepsize * (r - realization)
    return alpha, eta, lam, r


def step(state: OnlineState, d: float) -> OnlineState:
    """Consume one observation; returns the state after step t+1."""
    if state.bracket is None:
        raise ValueError("eta bracket not frozen; start the state through run()")
    value_fn, grad_fn, dom_lo, dom_hi, alpha_hi = _kernel(state)
    e_lo, e_hi = state.bracket
    alpha, eta, lam, r = _advance(
        state.alpha, state.eta, state.lam, state.r, state.t, float(d), state.tau,
        state.scaling, value_fn, grad_fn, dom_lo, dom_hi, e_lo, e_hi, alpha_hi,
    )
    return replace(state, alpha=alpha, eta=eta, lam=lam, r=r, t=state.t + 1)


def _observation_value(obs) -> float:
    if isinstance(obs, tuple):
        return float(obs[1])
    return float(obs)


def _freeze(state: OnlineState, warmup: list[float], alpha_hi: float) -> OnlineState:
    lo, hi = eta_bracket(np.array(warmup), state.tau, conjugate_domain(state.spec))
    return replace(
        state,
        bracket=(lo, hi),
        eta=min(max(state.eta, lo), hi),
        alpha=min(max(state.alpha, ALPHA_MIN), alpha_hi),
    )


def run(stream, iters: int, init: OnlineState, record_every: int | None = None) -> OnlineResult:
    """Apply `iters` steps, one observation each, recording a decimated
    r history (default every ceil(iters/1000) steps, final step always).

    A stream that exhausts early yields a partial result with the reached t.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if record_every is None:
        record_every = max(1, math.ceil(iters / 1000))
    source = iter(stream)
    state = init
    pending: list[float] = []
    if state.bracket is None:
        warm_target = min(50, iters)
        for obs in source:
            pending.append(_observation_value(obs))
            if len(pending) >= warm_target:
                break
        if not pending:
            return OnlineResult(state, (), min(1.0, max(0.0, state.r)))
        value_fn, grad_fn, dom_lo, dom_hi, alpha_hi = _kernel(state)
        state = _freeze(state, pending, alpha_hi)
    value_fn, grad_fn, dom_lo, dom_hi, alpha_hi = _kernel(state)
    e_lo, e_hi = state.bracket
    alpha, eta, lam, r, t = state.alpha, state.eta, state.lam, state.r, state.t
    tau, scaling = state.tau, state.scaling
    history: list[tuple[int, float]] = []
    done = t
    target = t + iters

    def feed():
        yield from pending
        for obs in source:
            yield _observation_value(obs)

    for d in feed():
        alpha, eta, lam, r = _advance(
            alpha, eta, lam, r, done, d, tau, scaling, value_fn, grad_fn,
            dom_lo, dom_hi, e_lo, e_hi, alpha_hi,
        )
        done += 1
        if done % record_every == 0:
            history.append((done, r))
        if done >= target:
            break
    if not history or history[-1][0] != done:
        history.append((done, r))
    final = replace(state, alpha=alpha, eta=eta, lam=lam, r=r, t=done)
    return OnlineResult(final, tuple(history), min(1.0, max(0.0, r)))


def convergence_diagnostic(histories, r_star: float) -> float:
    """Least-squares slope of log mean-squared gap vs log t across runs.

    Histories must share one recording grid with at least 10 points; an
    exactly-zero mean-squared gap anywhere reports -inf.
    """
    runs = [list(h) for h in histories]
    if not runs:
        raise ValueError("need at least one history")
    ts = [t for t, _ in runs[0]]
    if len(ts) < 10:
        raise ValueError("need at least 10 history points")
    if any(t <= 0 for t in ts):
        raise ValueError("history steps must be positive")
    for h in runs[1:]:
        if [t for t, _ in h] != ts:
            raise ValueError("history grids differ across runs")
    gaps = np.zeros(len(ts))
    for h in runs:
        values = np.array([r for _, r in h])
        gaps += (values - r_star) ** 2
    gaps /= len(runs)
    if np.any(gaps == 0.0):
        return -math.inf
    slope, _ = np.polyfit(np.log(np.array(ts, dtype=float)), np.log(gaps), 1)
    return float(slope)
