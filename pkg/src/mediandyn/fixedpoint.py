"""Contraction analysis and the closed-form limit for anchored populations.

When every agent is opinionated (lambda_i > 0) and

    (1 - lambda_min) * gamma_max < lambda_min,

the update map F(x) = Lambda u + (I - Lambda) E(x) contracts the infinity
norm with factor (1 - lambda_min) * (1 + gamma_max) < 1, so iteration
converges to a unique fixed point x* from any start.

At a fixed point, each agent's two medians are realized by concrete
entries: some agent index k_i supplies the neighbor median and some
environment index l_i supplies the environment median.  Encoding those
selections as one-nonzero-per-row matrices P (n x n, entry
(1-lambda_i)(1-gamma_i)) and Q (n x l, entry (1-lambda_i) gamma_i) turns
the fixed-point equation into the linear identity

    x* = Lambda u + P x* + Q A x*,

and I - P - Q A is strictly diagonally dominant (hence invertible), giving
the closed form x* = (I - P - QA)^{-1} Lambda u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import StopRule, simulate, step
from .median import env_med_vector, med_vector

FIXED_POINT_TOL = 1e-9
SELECTOR_MATCH_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-8


@dataclass(frozen=True)
class ContractionReport:
    """Contraction condition and factor of the anchored update map."""

    lambda_min: float
    gamma_max: float
    condition_holds: bool
    contraction_factor: float


@dataclass(frozen=True)
class DescriptiveMatrices:
    """One-nonzero-per-row encodings of the realized median selections.

    Row i of P carries (1-lambda_i)(1-gamma_i) at the agent index whose
    opinion equals agent i's neighbor median; row i of Q carries
    (1-lambda_i) gamma_i at the environment index realizing agent i's
    environment median.  Ties break to the smallest index.
    """

    P: np.ndarray
    Q: np.ndarray
    neighbor_selectors: np.ndarray
    environment_selectors: np.ndarray


def contraction_check(population):
    """Evaluate the contraction condition for a fully opinionated population."""
    lam = np.asarray(population.lam, dtype=float)
    gam = np.asarray(population.gamma, dtype=float)
    if np.any(lam == 0.0):
        raise ValueError("contraction analysis requires every lambda_i > 0")
    lam_min = float(lam.min())
    gam_max = float(gam.max())
    return ContractionReport(
        lambda_min=lam_min,
        gamma_max=gam_max,
        condition_holds=(1.0 - lam_min) * gam_max < lam_min,
        contraction_factor=(1.0 - lam_min) * (1.0 + gam_max),
    )


def rate_bound(t, x0, xstar, report):
    """Geometric upper bound factor^(t+1) * ||x0 - x*||_inf on ||x(t) - x*||_inf."""
    if not report.condition_holds:
        raise ValueError("rate bound requires the contraction condition to hold")
    x0 = np.asarray(x0, dtype=float)
    xstar = np.asarray(xstar, dtype=float)
    return report.contraction_factor ** (t + 1) * float(np.max(np.abs(x0 - xstar)))


def extract_descriptive_matrices(xstar, cfg):
    """Build P and Q from the realized median selections at a fixed state.

    ``xstar`` must satisfy step(xstar) = xstar within FIXED_POINT_TOL.  The
    result is checked against the reconstruction identity
    Lambda u + P x* + Q A x* = x* before being returned.
    """
    xstar = np.asarray(xstar, dtype=float)
    residual = float(np.max(np.abs(step(xstar, cfg) - xstar)))
    if residual > FIXED_POINT_TOL:
        raise ValueError(f"state is not fixed: step residual {residual:.3e}")

    pop = cfg.population
    n = pop.n
    l = cfg.M.shape[1]
    med_w = med_vector(xstar, cfg.W, xstar)
    y = cfg.A @ xstar
    med_m = env_med_vector(xstar, cfg.A, cfg.M, xstar)

    P = np.zeros((n, n))
    Q = np.zeros((n, l))
    k_sel = np.zeros(n, dtype=int)
    l_sel = np.zeros(n, dtype=int)
    for i in range(n):
        k_i = _first_match(xstar, med_w[i])
        l_i = _first_match(y, med_m[i])
        k_sel[i] = k_i
        l_sel[i] = l_i
        P[i, k_i] = (1.0 - pop.lam[i]) * (1.0 - pop.gamma[i])
        Q[i, l_i] = (1.0 - pop.lam[i]) * pop.gamma[i]

    recon = pop.lam * pop.u + P @ xstar + Q @ (cfg.A @ xstar)
    err = float(np.max(np.abs(recon - xstar)))
    if err > RECONSTRUCTION_TOL:
        raise RuntimeError(f"reconstruction identity fails: residual {err:.3e}")
    return DescriptiveMatrices(P=P, Q=Q, neighbor_selectors=k_sel, environment_selectors=l_sel)


def _first_match(values, target):
    for j, v in enumerate(values):
        if abs(v - target) <= SELECTOR_MATCH_TOL:
            return j
    raise RuntimeError(f"no entry matches median value {target!r}")


def solve_limit(desc, cfg):
    """Solve (I - P - QA) x = Lambda u for the limit point.

    A singular system here contradicts strict diagonal dominance, so it is
    reported as a hard error with the matrix included.
    """
    n = cfg.population.n
    system = np.eye(n) - desc.P - desc.Q @ cfg.A
    rhs = cfg.population.lam * cfg.population.u
    try:
        return np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            "singular fixed-point system (should be strictly diagonally "
            f"dominant):\n{np.array2string(system, max_line_width=120)}"
        ) from exc


def limit_point_closed_form(cfg, rule=None):
    """Closed-form limit of a contraction instance, via a converged run.

    Simulates to a tight fixed point, extracts the descriptive matrices
    there (the median selections depend on x* itself), and solves the
    resulting linear system.
    """
    report = contraction_check(cfg.population)
    if not report.condition_holds:
        raise ValueError("closed-form limit requires the contraction condition")
    if rule is None:
        rule = StopRule(max_steps=200000, tol_step=1e-12, hold_steps=3)
    traj = simulate(cfg, rule)
    if not traj.converged:
        raise RuntimeError(f"no fixed point within {rule.max_steps} steps")
    desc = extract_descriptive_matrices(traj.final_state, cfg)
    return solve_limit(desc, cfg)


def diagonal_dominance_check(P, Q, A):
    """True iff every row of I - P - QA is strictly diagonally dominant."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    A = np.asarray(A, dtype=float)
    system = np.eye(P.shape[0]) - P - Q @ A
    for i in range(system.shape[0]):
        off = float(np.sum(np.abs(system[i]))) - abs(float(system[i, i]))
        if not abs(float(system[i, i])) > off:
            return False
    return True
