"""Synchronous update engine: external opinions, stepping, trajectories.

Each step reads x(t) and writes x(t+1) for all agents at once:

    x_i(t+1) = lam_i * u_i + (1 - lam_i) * E_i(x(t))
    E_i(x)   = (1 - gamma_i) * Med_i(x; W) + gamma_i * Med_i(Ax; M)

with both medians anchored at x_i(t).  Unopinionated agents (lam_i = 0)
reduce exactly to x_i(t+1) = E_i(x(t)).

simulate() is a pure function of its arguments: identical inputs produce
bit-identical trajectories.  ``step`` and ``simulate`` share one
computational path, so ``simulate(...).states[t+1] == step(states[t], cfg)``
holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .median import _median_rows


@dataclass(frozen=True)
class StopRule:
    """Stopping policy: step cap plus a held step-difference tolerance."""

    max_steps: int = 10000
    tol_step: float = 1e-10
    hold_steps: int = 5

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.tol_step > 0.0:
            raise ValueError("tol_step must be > 0")
        if self.hold_steps < 1:
            raise ValueError("hold_steps must be >= 1")


@dataclass
class Trajectory:
    """Recorded opinion states plus convergence metadata.

    ``states[k]`` is the opinion vector at time ``steps[k]``;
    ``spread_history[k]`` is its (min, max).  ``convergence_step`` is the
    first step of the quiet run that triggered convergence, present iff
    ``converged``.
    """

    states: np.ndarray
    steps: np.ndarray
    spread_history: np.ndarray
    converged: bool
    convergence_step: int = None

    def __post_init__(self):
        if len(self.states) == 0:
            raise ValueError("trajectory must contain at least the initial state")
        if self.converged != (self.convergence_step is not None):
            raise ValueError("convergence_step must be present iff converged")

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def final_spread(self):
        mn, mx = self.spread_history[-1]
        return mx - mn


class _Engine:
    """Per-config precomputation for the update map."""

    def __init__(self, cfg):
        pop = cfg.population
        self.lam = np.asarray(pop.lam, dtype=float)
        self.one_minus_lam = 1.0 - self.lam
        self.gamma = np.asarray(pop.gamma, dtype=float)
        self.one_minus_gamma = 1.0 - self.gamma
        self.u = np.asarray(pop.u, dtype=float)
        self.A = np.asarray(cfg.A, dtype=float)
        self.W_rows = np.asarray(cfg.W, dtype=float).tolist()
        self.M_rows = np.asarray(cfg.M, dtype=float).tolist()

    def external(self, x):
        xl = x.tolist()
        med_w = np.array(_median_rows(xl, self.W_rows, xl))
        med_m = np.array(_median_rows((self.A @ x).tolist(), self.M_rows, xl))
        return self.one_minus_gamma * med_w + self.gamma * med_m

    def step(self, x):
        return self.lam * self.u + self.one_minus_lam * self.external(x)


def external_opinion(x, cfg):
    """E(x): per-agent blend of the neighbor and environment medians."""
    return _Engine(cfg).external(np.asarray(x, dtype=float))


def step(x, cfg):
    """One synchronous update of the full system."""
    return _Engine(cfg).step(np.asarray(x, dtype=float))


def simulate(cfg, rule=None, record_stride=1):
    """Iterate the update map from ``cfg.x0`` until quiet or out of steps.

    The run converges when the infinity-norm step difference stays below
    ``rule.tol_step`` for ``rule.hold_steps`` consecutive steps; exhausting
    ``rule.max_steps`` yields ``converged=False``.  ``record_stride`` thins
    the recorded states for long runs (the final state is always recorded);
    convergence bookkeeping always uses every step.
    """
    if rule is None:
        rule = StopRule()
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    engine = _Engine(cfg)
    x = np.array(cfg.x0, dtype=float)

    recorded = [x]
    recorded_steps = [0]
    spreads = [(x.min(), x.max())]
    converged = False
    convergence_step = None
    quiet = 0

    for t in range(1, rule.max_steps + 1):
        x_next = engine.step(x)
        diff = float(np.max(np.abs(x_next - x)))
        x = x_next
        if t % record_stride == 0:
            recorded.append(x)
            recorded_steps.append(t)
            spreads.append((x.min(), x.max()))
        if diff < rule.tol_step:
            quiet += 1
            if quiet >= rule.hold_steps:
                converged = True
                convergence_step = t - rule.hold_steps
                break
        else:
            quiet = 0

    # Always include the final state, even off-stride.
    if recorded_steps[-1] != t:
        recorded.append(x)
        recorded_steps.append(t)
        spreads.append((x.min(), x.max()))

    return Trajectory(
        states=np.array(recorded),
        steps=np.array(recorded_steps, dtype=int),
        spread_history=np.array(spreads),
        converged=converged,
        convergence_step=convergence_step,
    )


def detect_consensus(traj, tol_consensus=1e-6):
    """Common final value if the final spread is below tolerance, else None.

    The reported value is the midpoint of the final min and max.
    """
    mn, mx = traj.spread_history[-1]
    if mx - mn < tol_consensus:
        return float((mn + mx) / 2.0)
    return None
