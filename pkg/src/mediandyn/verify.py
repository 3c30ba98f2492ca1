"""Seeded property battery: oracle equivalences and invariant suites.

Every check draws its own generator from the battery seed, runs a case
budget, and reports how many cases were exercised plus the first
counterexample if any.  The median oracle here is an independent
implementation that tests each distinct value directly against the
definition; it shares nothing with the sort-and-scan production path
except exactly-rounded summation.

Trajectory-level suites (envelope monotonicity, lag windows, geometric
squeeze) count each asserted (time, agent) comparison as one case.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from math import fsum

import numpy as np

from . import dynamics, fixedpoint, median, model, structures
from .scenarios import build_scenario

# Absolute slack for comparisons against simulated floating-point data.
SLACK = 1e-12


@dataclass
class PropertyResult:
    name: str
    cases: int
    failures: int
    first_witness: str = None

    @property
    def passed(self):
        return self.failures == 0

    def describe(self):
        if self.passed:
            return f"PASS {self.name}: {self.cases}/{self.cases}"
        return (
            f"FAIL {self.name}: {self.failures} of {self.cases} cases; "
            f"first counterexample: {self.first_witness}"
        )


class _Recorder:
    """Tallies pass/fail cases and keeps the first witness."""

    def __init__(self, name):
        self.name = name
        self.cases = 0
        self.failures = 0
        self.first_witness = None

    def check(self, ok, witness):
        self.cases += 1
        if not ok:
            self.failures += 1
            if self.first_witness is None:
                self.first_witness = witness() if callable(witness) else witness

    def result(self):
        return PropertyResult(self.name, self.cases, self.failures, self.first_witness)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def median_set_oracle(values, weights):
    """Definition check: test every distinct value against both inequalities."""
    vals = [float(v) for v in values]
    ws = [float(w) for w in weights]
    out = []
    for v in sorted(set(vals)):
        below = fsum(w for x, w in zip(vals, ws) if x < v)
        above = fsum(w for x, w in zip(vals, ws) if x > v)
        if below <= 0.5 and above <= 0.5:
            out.append(v)
    return out


def median_oracle(values, weights, anchor):
    """Tie-break oracle: minimize (distance to anchor, value)."""
    return min(median_set_oracle(values, weights), key=lambda v: (abs(v - anchor), v))


def cohesive_union_oracle(S, W):
    """Union of all cohesive subsets of S, by exhaustive enumeration."""
    S = sorted(set(S))
    union = set()
    for mask in range(1, 1 << len(S)):
        P = [S[b] for b in range(len(S)) if mask >> b & 1]
        if structures.is_cohesive_agent_set(P, W):
            union |= set(P)
    return tuple(sorted(union))


# ---------------------------------------------------------------------------
# Random instance generators
# ---------------------------------------------------------------------------

def _row(rng, m):
    raw = rng.random(m) + 1e-3
    return raw / raw.sum()


def random_row_stochastic(rng, rows, cols):
    return np.vstack([_row(rng, cols) for _ in range(rows)])


def grid_weights(rng, m, units=20):
    """Weights on the 1/units grid (multiples of 0.05 by default)."""
    counts = rng.multinomial(units, [1.0 / m] * m)
    return counts / float(units)


def random_environments(rng, n, l):
    simplices = []
    for _ in range(l):
        size = int(rng.integers(1, n + 1))
        members = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        if rng.random() < 0.5:
            simplices.append(model.Simplex.uniform(members))
        else:
            simplices.append(model.Simplex(members, tuple(_row(rng, size).tolist())))
    return model.EnvironmentComplex(vertex_count=n, simplices=tuple(simplices))


def random_config(rng, n=None, common_bias=False, bias_spread=2.0):
    """A generic valid config with arbitrary lambda/gamma in [0, 1]."""
    if n is None:
        n = int(rng.integers(3, 9))
    l = int(rng.integers(1, 5))
    lam = rng.random(n)
    lam[rng.random(n) < 0.3] = 0.0
    gamma = rng.random(n)
    if common_bias:
        u = np.full(n, rng.uniform(-bias_spread, bias_spread))
    else:
        u = rng.uniform(-bias_spread, bias_spread, n)
    cfg = model.SystemConfig(
        population=model.AgentPopulation(lam=lam, gamma=gamma, u=u),
        W=random_row_stochastic(rng, n, n),
        environments=random_environments(rng, n, l),
        M=random_row_stochastic(rng, n, l),
        x0=rng.uniform(-1.0, 1.0, n),
    )
    assert model.validate_config(cfg).is_valid
    return cfg


def random_contraction_config(rng, n=None, equal_biases=False):
    """Fully opinionated config satisfying the contraction condition."""
    if n is None:
        n = int(rng.integers(3, 9))
    l = int(rng.integers(1, 5))
    lam = rng.uniform(0.35, 1.0, n)
    gamma_cap = min(1.0, 0.9 * lam.min() / (1.0 - lam.min())) if lam.min() < 1.0 else 1.0
    gamma = rng.uniform(0.0, gamma_cap, n)
    if equal_biases:
        u = np.full(n, rng.uniform(-1.0, 1.0))
    else:
        u = rng.uniform(-1.0, 1.0, n)
    cfg = model.SystemConfig(
        population=model.AgentPopulation(lam=lam, gamma=gamma, u=u),
        W=random_row_stochastic(rng, n, n),
        environments=random_environments(rng, n, l),
        M=random_row_stochastic(rng, n, l),
        x0=rng.uniform(-1.0, 1.0, n),
    )
    report = fixedpoint.contraction_check(cfg.population)
    assert report.condition_holds
    return cfg


def _partitioned_row(rng, n, inside, mass):
    """A stochastic row placing ``mass`` on ``inside`` (rest elsewhere)."""
    inside = list(inside)
    outside = [j for j in range(n) if j not in inside]
    w = np.zeros(n)
    w[inside] = _row(rng, len(inside)) * mass
    if outside and mass < 1.0:
        w[outside] = _row(rng, len(outside)) * (1.0 - mass)
    else:
        w[inside] = _row(rng, len(inside))
    return w


def random_cluster_config(rng, unopinionated_cluster=False):
    """A config together with a verified cohesive influential cluster."""
    n = int(rng.integers(5, 10))
    size = int(rng.integers(2, n - 1))
    P = sorted(rng.choice(n, size=size, replace=False).tolist())

    W = np.zeros((n, n))
    for i in range(n):
        if i in P:
            W[i] = _partitioned_row(rng, n, P, rng.uniform(0.55, 0.95))
        else:
            W[i] = _row(rng, n)

    simplices = []
    internal = int(rng.integers(1, 3))
    for _ in range(internal):
        k = int(rng.integers(1, len(P) + 1))
        members = tuple(sorted(rng.choice(P, size=k, replace=False).tolist()))
        simplices.append(model.Simplex.uniform(members))
    for _ in range(int(rng.integers(1, 3))):
        k = int(rng.integers(1, n + 1))
        members = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        simplices.append(model.Simplex.uniform(members))
    environments = model.EnvironmentComplex(vertex_count=n, simplices=tuple(simplices))

    M = np.zeros((n, len(simplices)))
    for i in range(n):
        M[i] = _partitioned_row(rng, len(simplices), range(internal), rng.uniform(0.55, 0.95))

    lam = rng.random(n)
    lam[rng.random(n) < 0.3] = 0.0
    if unopinionated_cluster:
        lam[P] = 0.0
    gamma = rng.random(n)
    u = np.full(n, rng.uniform(-1.0, 1.0))
    cfg = model.SystemConfig(
        population=model.AgentPopulation(lam=lam, gamma=gamma, u=u),
        W=W,
        environments=environments,
        M=M,
        x0=rng.uniform(-1.0, 1.0, n),
    )
    assert structures.is_cohesive_influential_cluster(P, W, environments, M)
    return cfg, P


def random_theorem31_config(rng):
    """A mixed config satisfying the consensus sufficient condition."""
    n = int(rng.integers(6, 11))
    n2 = int(rng.integers(1, 4))
    v2 = sorted(rng.choice(n, size=n2, replace=False).tolist())
    v1 = [i for i in range(n) if i not in v2]

    W = np.zeros((n, n))
    for i in range(n):
        if i in v2:
            # leaning on opinionated agents empties the unopinionated peel
            W[i] = _partitioned_row(rng, n, v1, rng.uniform(0.6, 0.9))
        else:
            W[i] = _row(rng, n)

    simplices = []
    for _ in range(int(rng.integers(2, 4))):
        k = int(rng.integers(1, len(v1) + 1))
        members = tuple(sorted(rng.choice(v1, size=k, replace=False).tolist()))
        simplices.append(model.Simplex.uniform(members))
    opinionated_only = len(simplices)
    if rng.random() < 0.5:
        k = int(rng.integers(1, n + 1))
        members = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        simplices.append(model.Simplex.uniform(members))
    environments = model.EnvironmentComplex(vertex_count=n, simplices=tuple(simplices))

    M = np.zeros((n, len(simplices)))
    for i in range(n):
        M[i] = _partitioned_row(rng, len(simplices), range(opinionated_only), rng.uniform(0.6, 0.9))

    lam = np.zeros(n)
    lam[v1] = rng.uniform(0.15, 1.0, len(v1))
    gamma = 1.0 - rng.random(n)
    u = np.full(n, rng.uniform(-1.0, 1.0))
    cfg = model.SystemConfig(
        population=model.AgentPopulation(lam=lam, gamma=gamma, u=u),
        W=W,
        environments=environments,
        M=M,
        x0=rng.uniform(-1.0, 1.0, n),
    )
    assert structures.check_theorem31(cfg).holds
    return cfg


def _random_values(rng, m):
    kind = rng.random()
    if kind < 0.4:
        # small integer alphabet: ties are common
        return (rng.integers(-3, 4, m) * 0.5).tolist()
    if kind < 0.5:
        return [float(rng.normal())] * m
    return rng.normal(0.0, 2.0, m).tolist()


# ---------------------------------------------------------------------------
# Property checks
# ---------------------------------------------------------------------------

def check_median_oracle(rng, cases):
    rec = _Recorder("median-oracle-equivalence")
    for _ in range(cases):
        m = int(rng.integers(1, 7))
        values = _random_values(rng, m)
        weights = grid_weights(rng, m) if rng.random() < 0.5 else _row(rng, m)
        anchor = float(rng.normal(0.0, 2.0))
        got_set = median.weighted_median_set(values, weights)
        want_set = median_set_oracle(values, weights)
        got = median.weighted_median(values, weights, anchor)
        want = median_oracle(values, weights, anchor)
        rec.check(
            got_set == want_set and got == want,
            lambda: f"values={values} weights={list(weights)} anchor={anchor} "
            f"got={got_set}/{got} want={want_set}/{want}",
        )
    return rec.result()


def check_env_median_bounding(rng, cases):
    # environment medians stay inside the agent opinion envelope
    rec = _Recorder("env-median-bounding")
    while rec.cases < cases:
        cfg = random_config(rng)
        for _ in range(5):
            x = rng.normal(0.0, 3.0, cfg.n)
            em = median.env_med_vector(x, cfg.A, cfg.M, x)
            lo, hi = x.min(), x.max()
            ok = np.all(em >= lo - SLACK) and np.all(em <= hi + SLACK)
            rec.check(ok, lambda: f"x={x.tolist()} med={em.tolist()}")
            if rec.cases >= cases:
                break
    return rec.result()


def check_median_localization(rng, cases):
    # weight mass above 1/2 on P confines the median to P's value range
    rec = _Recorder("median-localization")
    for _ in range(cases):
        n = int(rng.integers(2, 10))
        size = int(rng.integers(1, n + 1))
        P = sorted(rng.choice(n, size=size, replace=False).tolist())
        i = int(rng.integers(0, n))
        boundary = rng.random() < 0.1
        if i in P:
            mass = 0.5 if boundary else rng.uniform(0.5, 0.95)
        else:
            if size == n:
                continue
            mass = rng.uniform(0.55, 0.95)
        row = _partitioned_row(rng, n, P, mass)
        inside = fsum(row[P].tolist())
        if (i in P and inside < 0.5) or (i not in P and inside <= 0.5):
            continue
        x = rng.normal(0.0, 2.0, n)
        med = median.weighted_median(x, row, x[i])
        lo, hi = x[P].min(), x[P].max()
        rec.check(
            lo - SLACK <= med <= hi + SLACK,
            lambda: f"P={P} i={i} row={row.tolist()} x={x.tolist()} med={med}",
        )
    return rec.result()


def check_cluster_external_range(rng, cases):
    # blended external opinion of cluster members stays in the cluster range
    rec = _Recorder("cluster-external-range")
    while rec.cases < cases:
        cfg, P = random_cluster_config(rng)
        for _ in range(5):
            x = rng.normal(0.0, 2.0, cfg.n)
            e = dynamics.external_opinion(x, cfg)
            lo, hi = x[P].min(), x[P].max()
            ok = all(lo - SLACK <= e[i] <= hi + SLACK for i in P)
            rec.check(ok, lambda: f"P={P} x={x.tolist()} E={e.tolist()}")
            if rec.cases >= cases:
                break
    return rec.result()


def check_cluster_confinement(rng, cases):
    # an unopinionated cluster never leaves its initial opinion range
    rec = _Recorder("cluster-confinement")
    rule = dynamics.StopRule(max_steps=40, tol_step=1e-15, hold_steps=2)
    while rec.cases < cases:
        cfg, P = random_cluster_config(rng, unopinionated_cluster=True)
        traj = dynamics.simulate(cfg, rule)
        lo, hi = cfg.x0[P].min(), cfg.x0[P].max()
        block = traj.states[:, P]
        ok = block.min() >= lo - SLACK and block.max() <= hi + SLACK
        rec.check(ok, lambda: f"P={P} range=({lo},{hi}) seen=({block.min()},{block.max()})")
    return rec.result()


def _sample_trajectories(rng, count, steps=120):
    rule = dynamics.StopRule(max_steps=steps, tol_step=1e-15, hold_steps=2)
    out = []
    for _ in range(count):
        cfg = random_config(rng, common_bias=True)
        out.append((cfg, dynamics.simulate(cfg, rule)))
    return out


def check_monotone_envelope(rng, cases):
    # bias at/above the running min pushes the min up, and dually for the max
    rec = _Recorder("monotone-envelope")
    while rec.cases < cases:
        for cfg, traj in _sample_trajectories(rng, 5):
            u = float(cfg.population.u[0])
            mins = traj.spread_history[:, 0]
            maxs = traj.spread_history[:, 1]
            for t in range(len(mins) - 1):
                if u >= mins[t]:
                    rec.check(
                        mins[t + 1] >= mins[t] - SLACK,
                        lambda: f"min drops at t={t}: {mins[t]} -> {mins[t + 1]} (u={u})",
                    )
                if u <= maxs[t]:
                    rec.check(
                        maxs[t + 1] <= maxs[t] + SLACK,
                        lambda: f"max rises at t={t}: {maxs[t]} -> {maxs[t + 1]} (u={u})",
                    )
            if rec.cases >= cases:
                break
    return rec.result()


def check_absorbing_bias(rng, cases):
    # once the bias clears the envelope it stays clear of it
    rec = _Recorder("absorbing-bias")
    while rec.cases < cases:
        for cfg, traj in _sample_trajectories(rng, 5):
            u = float(cfg.population.u[0])
            mins = traj.spread_history[:, 0]
            maxs = traj.spread_history[:, 1]
            above = np.nonzero(u >= maxs)[0]
            if above.size:
                T = int(above[0])
                for t in range(T, len(maxs)):
                    rec.check(
                        u >= maxs[t] - SLACK,
                        lambda: f"u={u} re-crossed max at t={t}: {maxs[t]}",
                    )
                for t in range(T, len(mins) - 1):
                    rec.check(
                        mins[t + 1] >= mins[t] - SLACK,
                        lambda: f"min drops at t={t} after absorption",
                    )
            below = np.nonzero(u <= mins)[0]
            if below.size:
                T = int(below[0])
                for t in range(T, len(mins)):
                    rec.check(
                        u <= mins[t] + SLACK,
                        lambda: f"u={u} re-crossed min at t={t}: {mins[t]}",
                    )
                for t in range(T, len(maxs) - 1):
                    rec.check(
                        maxs[t + 1] <= maxs[t] + SLACK,
                        lambda: f"max rises at t={t} after absorption",
                    )
            if rec.cases >= cases:
                break
    return rec.result()


def _monotone_start(series, increasing):
    """Earliest index from which the series is monotone (with float slack)."""
    T = len(series) - 1
    for t in range(len(series) - 2, -1, -1):
        step_ok = (
            series[t + 1] >= series[t] - SLACK
            if increasing
            else series[t + 1] <= series[t] + SLACK
        )
        if step_ok:
            T = t
        else:
            break
    return T


def _theorem31_trajectories(rng, extra, steps=4000):
    scen = build_scenario("het-b")
    rule = dynamics.StopRule(max_steps=steps, tol_step=1e-13, hold_steps=3)
    runs = [(scen.cfg, dynamics.simulate(scen.cfg, rule))]
    for _ in range(extra):
        cfg = random_theorem31_config(rng)
        runs.append((cfg, dynamics.simulate(cfg, rule)))
    return runs


def check_lag_window(rng, cases):
    # unopinionated opinions trail the opinionated window extrema
    rec = _Recorder("lag-window")
    for cfg, traj in _theorem31_trajectories(rng, extra=4):
        v1 = cfg.population.opinionated
        v2 = cfg.population.unopinionated
        n2 = len(v2)
        mins = traj.spread_history[:, 0]
        maxs = traj.spread_history[:, 1]
        horizon = len(traj.states)

        T = _monotone_start(mins, increasing=True)
        for t in range(T + n2, horizon):
            window = traj.states[t - n2 : t, v1]
            floor = window.min()
            for i in v2:
                rec.check(
                    traj.states[t, i] >= floor - SLACK,
                    lambda: f"agent {i + 1} below window floor {floor} at t={t}",
                )
            if rec.cases >= cases:
                break

        T = _monotone_start(maxs, increasing=False)
        for t in range(T + n2, horizon):
            window = traj.states[t - n2 : t, v1]
            ceil = window.max()
            for i in v2:
                rec.check(
                    traj.states[t, i] <= ceil + SLACK,
                    lambda: f"agent {i + 1} above window ceiling {ceil} at t={t}",
                )
            if rec.cases >= cases:
                break
    return rec.result()


def check_geometric_squeeze(rng, cases):
    # opinionated deviation from the bias shrinks geometrically per window
    rec = _Recorder("geometric-squeeze")
    for cfg, traj in _theorem31_trajectories(rng, extra=2):
        pop = cfg.population
        v1 = pop.opinionated
        n2 = len(pop.unopinionated)
        u = float(pop.u[0])
        lam_v1 = pop.lam[v1]
        lam_min, lam_max = float(lam_v1.min()), float(lam_v1.max())
        mins = traj.spread_history[:, 0]
        maxs = traj.spread_history[:, 1]
        horizon = len(traj.states)
        block = traj.states[:, v1]

        # lower bound from the min envelope once it is monotone
        T = _monotone_start(mins, increasing=True)
        z = mins[T] - u
        base = (1.0 - lam_max) if z >= 0 else (1.0 - lam_min)
        K = 1
        while True:
            t0 = (K - 1) * (n2 + 1) + T + 1
            if t0 >= horizon or rec.cases >= cases:
                break
            bound = base**K * z
            worst = float((block[t0:] - u).min())
            rec.check(
                worst >= bound - SLACK,
                lambda: f"K={K}: deviation {worst} under lower bound {bound}",
            )
            K += 1

        # upper bound from the max envelope once it is monotone
        T = _monotone_start(maxs, increasing=False)
        w = maxs[T] - u
        base = (1.0 - lam_min) if w >= 0 else (1.0 - lam_max)
        K = 1
        while True:
            t0 = (K - 1) * (n2 + 1) + T + 1
            if t0 >= horizon or rec.cases >= cases:
                break
            bound = base**K * w
            worst = float((block[t0:] - u).max())
            rec.check(
                worst <= bound + SLACK,
                lambda: f"K={K}: deviation {worst} over upper bound {bound}",
            )
            K += 1
    return rec.result()


def check_nonexpansive_neighbor(rng, cases):
    rec = _Recorder("nonexpansive-neighbor-median")
    while rec.cases < cases:
        n = int(rng.integers(2, 10))
        W = random_row_stochastic(rng, n, n)
        for _ in range(5):
            x = rng.normal(0.0, 2.0, n)
            z = x + rng.normal(0.0, rng.choice([0.01, 0.5, 2.0]), n)
            lhs = np.max(np.abs(median.med_vector(x, W, x) - median.med_vector(z, W, z)))
            rhs = np.max(np.abs(x - z))
            rec.check(
                lhs <= rhs + SLACK,
                lambda: f"W={W.tolist()} x={x.tolist()} z={z.tolist()} {lhs} > {rhs}",
            )
            if rec.cases >= cases:
                break
    return rec.result()


def check_nonexpansive_environment(rng, cases):
    rec = _Recorder("nonexpansive-environment-median")
    while rec.cases < cases:
        cfg = random_config(rng)
        for _ in range(5):
            x = rng.normal(0.0, 2.0, cfg.n)
            z = x + rng.normal(0.0, rng.choice([0.01, 0.5, 2.0]), cfg.n)
            lhs = np.max(
                np.abs(
                    median.env_med_vector(x, cfg.A, cfg.M, x)
                    - median.env_med_vector(z, cfg.A, cfg.M, z)
                )
            )
            rhs = np.max(np.abs(x - z))
            rec.check(lhs <= rhs + SLACK, lambda: f"{lhs} > {rhs} for x={x.tolist()}")
            if rec.cases >= cases:
                break
    return rec.result()


def check_nonsquare_padding(rng, cases):
    # non-square weight matrices behave like their zero-padded square forms
    rec = _Recorder("nonsquare-padding")
    while rec.cases < cases:
        tall = rng.random() < 0.5
        if tall:
            n = int(rng.integers(3, 9))
            l = int(rng.integers(1, n))
        else:
            l = int(rng.integers(3, 9))
            n = int(rng.integers(1, l))
        M = random_row_stochastic(rng, n, l)
        x = rng.normal(0.0, 2.0, l)
        z = x + rng.normal(0.0, 1.0, l)

        lhs = np.max(
            np.abs(
                np.array([median.weighted_median(x, M[i], x[min(i, l - 1)]) for i in range(n)])
                - np.array([median.weighted_median(z, M[i], z[min(i, l - 1)]) for i in range(n)])
            )
        )
        rec.check(
            lhs <= np.max(np.abs(x - z)) + SLACK,
            lambda: f"non-square non-expansiveness fails: {lhs}",
        )

        if tall:
            # pad columns with zero weight and values with zeros
            M_sq = np.hstack([M, np.zeros((n, n - l))])
            x_pad = np.concatenate([x, np.zeros(n - l)])
            for i in range(n):
                got = median.weighted_median_set(x, M[i])
                want = median.weighted_median_set(x_pad, M_sq[i])
                rec.check(
                    got == want,
                    lambda: f"padded set differs: {got} vs {want} (row {i})",
                )
        else:
            # pad rows with uniform weights; original rows are unchanged
            M_sq = np.vstack([M, np.full((l - n, l), 1.0 / l)])
            for i in range(n):
                got = median.weighted_median_set(x, M[i])
                want = median.weighted_median_set(x, M_sq[i])
                rec.check(got == want, lambda: f"padded row {i} differs")
    return rec.result()


def check_contraction_map(rng, cases):
    # one step contracts the infinity norm by at least the reported factor
    rec = _Recorder("contraction-map")
    while rec.cases < cases:
        cfg = random_contraction_config(rng)
        factor = fixedpoint.contraction_check(cfg.population).contraction_factor
        for _ in range(5):
            x = rng.normal(0.0, 2.0, cfg.n)
            z = rng.normal(0.0, 2.0, cfg.n)
            lhs = np.max(np.abs(dynamics.step(x, cfg) - dynamics.step(z, cfg)))
            rhs = factor * np.max(np.abs(x - z))
            rec.check(lhs <= rhs + SLACK, lambda: f"{lhs} > {rhs}")
            if rec.cases >= cases:
                break
    return rec.result()


def check_condition_equivalence(rng, cases):
    # the two contraction-condition forms agree exactly (rational arithmetic)
    rec = _Recorder("condition-equivalence")
    for i in range(101):
        lam = Fraction(i, 100)
        for j in range(101):
            gam = Fraction(j, 100)
            direct = (1 - lam) * gam < lam
            factored = (1 - lam) * (1 + gam) < 1
            rec.check(direct == factored, lambda: f"lambda={lam} gamma={gam}")
    return rec.result()


_LIMIT_RULE = dynamics.StopRule(max_steps=100000, tol_step=1e-12, hold_steps=3)


def check_limit_uniqueness(rng, cases):
    rec = _Recorder("limit-uniqueness")
    while rec.cases < cases:
        cfg = random_contraction_config(rng)
        a = dynamics.simulate(cfg, _LIMIT_RULE)
        other = replace(cfg, x0=rng.uniform(-5.0, 5.0, cfg.n))
        b = dynamics.simulate(other, _LIMIT_RULE)
        gap = float(np.max(np.abs(a.final_state - b.final_state)))
        rec.check(
            a.converged and b.converged and gap < 1e-8,
            lambda: f"limits differ by {gap}",
        )
    return rec.result()


def check_consensus_iff_equal_biases(rng, cases):
    rec = _Recorder("consensus-iff-equal-biases")
    from dataclasses import replace

    while rec.cases < cases:
        cfg = random_contraction_config(rng, equal_biases=True)
        target = float(cfg.population.u[0])
        traj = dynamics.simulate(cfg, _LIMIT_RULE)
        value = dynamics.detect_consensus(traj, 1e-6)
        rec.check(
            value is not None and abs(value - target) < 1e-6,
            lambda: f"equal biases {target} missed consensus: {value}",
        )

        u = np.array(cfg.population.u)
        j = int(rng.integers(0, cfg.n))
        u[j] += float(rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 1.0))
        pop = model.AgentPopulation(lam=cfg.population.lam, gamma=cfg.population.gamma, u=u)
        bumped = dynamics.simulate(replace(cfg, population=pop), _LIMIT_RULE)
        rec.check(
            bumped.final_spread > 1e-6,
            lambda: f"distinct biases still collapsed: spread {bumped.final_spread}",
        )
    return rec.result()


def check_closed_form_limit(rng, cases):
    # solved limit matches the simulated one; system is diagonally dominant
    rec = _Recorder("closed-form-limit")
    while rec.cases < cases:
        cfg = random_contraction_config(rng)
        traj = dynamics.simulate(cfg, _LIMIT_RULE)
        if not traj.converged:
            rec.check(False, lambda: "no convergence under contraction condition")
            continue
        desc = fixedpoint.extract_descriptive_matrices(traj.final_state, cfg)
        solved = fixedpoint.solve_limit(desc, cfg)
        gap = float(np.max(np.abs(solved - traj.final_state)))
        rec.check(gap < 1e-8, lambda: f"closed form off by {gap}")
        rec.check(
            fixedpoint.diagonal_dominance_check(desc.P, desc.Q, cfg.A),
            lambda: "extracted system not strictly diagonally dominant",
        )
    return rec.result()


def check_diagonal_dominance(rng, cases):
    # dominance holds for any anchored population and any median selectors
    rec = _Recorder("diagonal-dominance")
    for _ in range(cases):
        n = int(rng.integers(2, 10))
        l = int(rng.integers(1, 6))
        lam = 1.0 - rng.random(n)
        gamma = rng.random(n)
        A = random_row_stochastic(rng, l, n)
        P = np.zeros((n, n))
        Q = np.zeros((n, l))
        for i in range(n):
            P[i, rng.integers(0, n)] = (1.0 - lam[i]) * (1.0 - gamma[i])
            Q[i, rng.integers(0, l)] = (1.0 - lam[i]) * gamma[i]
        rec.check(
            fixedpoint.diagonal_dominance_check(P, Q, A),
            lambda: f"dominance fails for lam={lam.tolist()} gamma={gamma.tolist()}",
        )
    return rec.result()


def check_peeling_oracle(rng, cases):
    # iterative peeling equals exhaustive cohesive-subset search
    rec = _Recorder("peeling-oracle")
    for _ in range(cases):
        n = 8
        W = np.vstack([grid_weights(rng, n, units=10) for _ in range(n)])
        S = list(range(n))
        if rng.random() < 0.3:
            size = int(rng.integers(1, n + 1))
            S = sorted(rng.choice(n, size=size, replace=False).tolist())
        got = structures.maximal_cohesive_subset(S, W)
        want = cohesive_union_oracle(S, W)
        rec.check(got == want, lambda: f"S={S} W={W.tolist()} got={got} want={want}")
    return rec.result()


def _peel_random_order(S, W, rng):
    working = sorted(set(S))
    while working:
        removable = [i for i in working if fsum(W[i, working].tolist()) < 0.5]
        if not removable:
            break
        working.remove(removable[int(rng.integers(0, len(removable)))])
    return tuple(working)


def check_peeling_order_independence(rng, cases):
    rec = _Recorder("peeling-order-independence")
    while rec.cases < cases:
        n = int(rng.integers(4, 10))
        W = random_row_stochastic(rng, n, n)
        if rng.random() < 0.5:
            W = np.vstack([grid_weights(rng, n, units=10) for _ in range(n)])
        reference = structures.maximal_cohesive_subset(range(n), W)
        for _ in range(100):
            shuffled = _peel_random_order(range(n), W, rng)
            rec.check(
                shuffled == reference,
                lambda: f"order-dependent peel: {shuffled} vs {reference}",
            )
            if rec.cases >= cases:
                break
    return rec.result()


def check_theorem31_consensus(rng, cases):
    # the sufficient condition actually delivers consensus at the bias
    rec = _Recorder("theorem31-consensus")
    rule = dynamics.StopRule(max_steps=20000, tol_step=1e-10, hold_steps=5)
    while rec.cases < cases:
        cfg = random_theorem31_config(rng)
        u = float(cfg.population.u[0])
        traj = dynamics.simulate(cfg, rule)
        value = dynamics.detect_consensus(traj, 1e-6)
        rec.check(
            value is not None and abs(value - u) < 1e-6,
            lambda: f"no consensus at u={u}: spread {traj.final_spread}",
        )
    return rec.result()


def check_weak_monotonicity(rng, cases):
    # enlarging a weak cohesive group set keeps it weak cohesive
    rec = _Recorder("weak-cohesive-monotonicity")
    while rec.cases < cases:
        n = int(rng.integers(2, 8))
        l = int(rng.integers(2, 7))
        M = random_row_stochastic(rng, n, l)
        base = None
        for size in range(1, l + 1):
            for _ in range(4):
                q = sorted(rng.choice(l, size=size, replace=False).tolist())
                if structures.is_weak_cohesive_group_set(q, M):
                    base = q
                    break
            if base:
                break
        if base is None:
            base = list(range(l))
            if not structures.is_weak_cohesive_group_set(base, M):
                continue
        extras = [k for k in range(l) if k not in base]
        supersets = [sorted(base + extras[:j]) for j in range(len(extras) + 1)]
        for q in supersets:
            rec.check(
                structures.is_weak_cohesive_group_set(q, M),
                lambda: f"superset {q} of weak cohesive {base} fails",
            )
            if rec.cases >= cases:
                break
    return rec.result()


def check_report_soundness(rng, cases):
    # everything the structure report lists re-verifies under its predicate
    rec = _Recorder("report-soundness")
    while rec.cases < cases:
        cfg = random_config(rng)
        report = structures.structure_report(cfg)
        if report.maximal_cohesive_set:
            rec.check(
                structures.is_cohesive_agent_set(report.maximal_cohesive_set, cfg.W),
                lambda: "maximal cohesive set fails its predicate",
            )
        if report.maximal_cohesive_unopinionated:
            inside_v2 = set(report.maximal_cohesive_unopinionated) <= set(
                cfg.population.unopinionated
            )
            rec.check(
                inside_v2
                and structures.is_cohesive_agent_set(
                    report.maximal_cohesive_unopinionated, cfg.W
                ),
                lambda: "unopinionated cohesive set fails its predicate",
            )
        for q in report.weak_cohesive_group_sets:
            rec.check(
                structures.is_weak_cohesive_group_set(q, cfg.M),
                lambda: f"listed weak set {q} fails",
            )
        for q, p in report.strong_cohesive_group_sets:
            rec.check(
                structures.is_strong_cohesive_group_set(q, p, cfg.environments, cfg.M),
                lambda: f"listed strong set {q} fails",
            )
        for p in report.cohesive_influential_clusters:
            rec.check(
                structures.is_cohesive_influential_cluster(
                    p, cfg.W, cfg.environments, cfg.M
                ),
                lambda: f"listed cluster {p} fails",
            )
        verdict = report.theorem31
        rec.check(
            verdict.holds
            == (not verdict.cohesive_unopinionated and verdict.witness is not None),
            lambda: "theorem verdict inconsistent with its evidence",
        )
    return rec.result()


def check_indicator_rows(rng, cases):
    # indicator matrices are row-stochastic with zeros exactly off-membership
    rec = _Recorder("indicator-rows")
    while rec.cases < cases:
        n = int(rng.integers(2, 10))
        l = int(rng.integers(1, 6))
        env = random_environments(rng, n, l)
        A = model.indicator_matrix(env)
        ok = not model.row_stochastic_violations(A, "A")
        for k, s in enumerate(env.simplices):
            members = set(s.members)
            for i in range(n):
                if (A[k, i] != 0.0) != (i in members):
                    ok = False
        x = rng.normal(0.0, 2.0, n)
        y = model.environment_opinion(A, x)
        ok = ok and np.all(y >= x.min() - SLACK) and np.all(y <= x.max() + SLACK)
        rec.check(ok, lambda: f"bad indicator matrix for {env}")
    return rec.result()


# ---------------------------------------------------------------------------
# Battery driver
# ---------------------------------------------------------------------------

# (check, share of the requested case budget)
_BATTERY = (
    (check_median_oracle, 1.0),
    (check_env_median_bounding, 1.0),
    (check_median_localization, 1.0),
    (check_cluster_external_range, 1.0),
    (check_cluster_confinement, 0.05),
    (check_monotone_envelope, 1.0),
    (check_absorbing_bias, 0.5),
    (check_lag_window, 1.0),
    (check_geometric_squeeze, 0.2),
    (check_nonexpansive_neighbor, 1.0),
    (check_nonexpansive_environment, 1.0),
    (check_nonsquare_padding, 1.0),
    (check_contraction_map, 1.0),
    (check_condition_equivalence, 1.0),
    (check_limit_uniqueness, 0.01),
    (check_consensus_iff_equal_biases, 0.01),
    (check_closed_form_limit, 0.01),
    (check_diagonal_dominance, 0.2),
    (check_peeling_oracle, 0.2),
    (check_peeling_order_independence, 0.5),
    (check_theorem31_consensus, 0.05),
    (check_weak_monotonicity, 1.0),
    (check_report_soundness, 0.02),
    (check_indicator_rows, 0.2),
)


def run_battery(seed=0, cases=1000):
    """Run every property check with per-check generators derived from seed."""
    results = []
    for idx, (fn, share) in enumerate(_BATTERY):
        rng = np.random.default_rng([seed, idx])
        results.append(fn(rng, max(1, int(cases * share))))
    return results
