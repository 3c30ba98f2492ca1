"""Data model for median opinion dynamics with environmental influence.

Opinion vectors are plain 1-D float64 arrays.  The model bundles

* an agent population (anchoring coefficients lambda, environmental
  sensitivities gamma, intrinsic biases u),
* a row-stochastic neighbor influence matrix W (n x n),
* a collection of environments (vertex subsets with contribution weights),
  whose induced indicator matrix A (l x n) maps agent opinions to
  environment opinions y = A x,
* a row-stochastic environment influence matrix M (n x l), and
* an initial opinion vector x0.

Environments are arbitrary non-empty vertex subsets; downward closure is
deliberately not enforced because only the set of environments enters the
dynamics.  All bundled arrays are frozen (read-only) after construction, so
configs can be shared freely across threads.

Agent ids are 0-based throughout the library; the JSON config format uses
1-based ids (see fileio.py).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import fsum

import numpy as np

from .median import ROW_SUM_TOL

# Rows whose sum is this close to 1 may be rescaled by normalize_rows();
# anything further off is a modeling error, not rounding.
NORMALIZE_SLACK = 1e-6


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Simplex:
    """One environment: a vertex subset with positive contribution weights."""

    members: tuple
    weights: tuple

    @staticmethod
    def uniform(members):
        members = tuple(members)
        k = len(members)
        if k == 0:
            raise ValueError("empty simplex")
        return Simplex(members, (1.0 / k,) * k)


@dataclass(frozen=True)
class EnvironmentComplex:
    """The environment set of the system: l simplices over n vertices."""

    vertex_count: int
    simplices: tuple

    def __post_init__(self):
        object.__setattr__(self, "simplices", tuple(self.simplices))

    def __len__(self):
        return len(self.simplices)


@dataclass(frozen=True)
class AgentPopulation:
    """Per-agent parameters: anchoring lambda, sensitivity gamma, bias u."""

    lam: np.ndarray
    gamma: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", _frozen(self.lam))
        object.__setattr__(self, "gamma", _frozen(self.gamma))
        object.__setattr__(self, "u", _frozen(self.u))

    @property
    def n(self):
        return self.lam.shape[0]

    @property
    def opinionated(self):
        """Agents with lambda > 0 (the anchored group)."""
        return [i for i in range(self.n) if self.lam[i] > 0.0]

    @property
    def unopinionated(self):
        """Agents with lambda = 0 (no anchoring term)."""
        return [i for i in range(self.n) if self.lam[i] == 0.0]


@dataclass(frozen=True)
class SystemConfig:
    """Complete system: population, W, environments, M and x0."""

    population: AgentPopulation
    W: np.ndarray
    environments: EnvironmentComplex
    M: np.ndarray
    x0: np.ndarray
    A: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "W", _frozen(self.W))
        object.__setattr__(self, "M", _frozen(self.M))
        object.__setattr__(self, "x0", _frozen(self.x0))
        try:
            A = indicator_matrix(self.environments)
        except ValueError:
            # Malformed environments; validate_config() reports the details.
            A = np.zeros((len(self.environments), self.population.n))
        object.__setattr__(self, "A", _frozen(A))

    @property
    def n(self):
        return self.population.n


@dataclass
class ValidationReport:
    """Every violated invariant of a config; empty means valid."""

    violations: list = field(default_factory=list)

    @property
    def is_valid(self):
        return not self.violations

    def __str__(self):
        if self.is_valid:
            return "valid"
        return "; ".join(self.violations)


def row_stochastic_violations(mat, name, tol=ROW_SUM_TOL):
    """Nonnegativity and row-sum violations of a weight matrix."""
    out = []
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2:
        return [f"{name}: expected a matrix, got {mat.ndim} dimensions"]
    if not np.all(np.isfinite(mat)):
        out.append(f"{name}: non-finite entries")
        return out
    neg = np.argwhere(mat < 0.0)
    if neg.size:
        r, c = neg[0]
        out.append(f"{name}: negative entry at row {r + 1}, column {c + 1}")
    for r in range(mat.shape[0]):
        total = fsum(mat[r].tolist())
        if abs(total - 1.0) > tol:
            out.append(f"{name}: row-sum {total!r} at row {r + 1}")
    return out


def normalize_rows(mat, slack=NORMALIZE_SLACK):
    """Rescale rows whose sum is within ``slack`` of 1 to sum exactly 1.

    Rows further off than ``slack`` indicate a modeling error rather than
    config rounding and are rejected.
    """
    mat = np.array(mat, dtype=float)
    for r in range(mat.shape[0]):
        total = fsum(mat[r].tolist())
        if abs(total - 1.0) > slack:
            raise ValueError(f"row {r + 1} sums to {total!r}; not normalizable")
        if total != 0.0:
            mat[r] /= total
    return mat


def indicator_matrix(environments):
    """The l x n matrix A with a_ki = weight of agent i in simplex k.

    a_ki = 0 exactly when agent i is not a member of simplex k; each row
    sums to 1 by construction of the member weights.
    """
    n = environments.vertex_count
    A = np.zeros((len(environments.simplices), n))
    for k, simplex in enumerate(environments.simplices):
        if len(simplex.members) == 0:
            raise ValueError(f"simplex {k + 1} is empty")
        for i, w in zip(simplex.members, simplex.weights):
            if not 0 <= i < n:
                raise ValueError(f"simplex {k + 1}: member {i} outside 0..{n - 1}")
            A[k, i] = w
    return A


def environment_opinion(A, x):
    """Environment opinions y = A x (one weighted average per simplex)."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if A.ndim != 2 or A.shape[1] != x.shape[0]:
        raise ValueError(f"indicator matrix is {A.shape} but x has {x.shape[0]} entries")
    return A @ x


def validate_config(cfg):
    """Report every violated invariant of ``cfg`` (empty report iff valid)."""
    report = ValidationReport()
    pop = cfg.population
    n = pop.n
    l = len(cfg.environments.simplices)

    for name, arr in (("lambda", pop.lam), ("gamma", pop.gamma), ("u", pop.u)):
        if arr.shape != (n,):
            report.violations.append(f"{name}: expected {n} entries, got {arr.shape}")
    for name, arr in (("lambda", pop.lam), ("gamma", pop.gamma)):
        for i, v in enumerate(arr):
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                report.violations.append(f"{name}: value {v!r} out of [0, 1] for agent {i + 1}")
    if not np.all(np.isfinite(pop.u)):
        report.violations.append("u: non-finite entries")

    if cfg.W.shape != (n, n):
        report.violations.append(f"W: expected shape ({n}, {n}), got {cfg.W.shape}")
    else:
        report.violations.extend(row_stochastic_violations(cfg.W, "W"))

    if cfg.environments.vertex_count != n:
        report.violations.append(
            f"environments: vertex count {cfg.environments.vertex_count} != {n} agents"
        )
    report.violations.extend(_environment_violations(cfg.environments))

    if cfg.M.shape != (n, l):
        report.violations.append(f"M: expected shape ({n}, {l}), got {cfg.M.shape}")
    else:
        report.violations.extend(row_stochastic_violations(cfg.M, "M"))

    if cfg.x0.shape != (n,):
        report.violations.append(f"x0: expected {n} entries, got {cfg.x0.shape}")
    elif not np.all(np.isfinite(cfg.x0)):
        report.violations.append("x0: non-finite entries")

    return report


def _environment_violations(environments):
    out = []
    n = environments.vertex_count
    for k, simplex in enumerate(environments.simplices):
        label = f"simplex {k + 1}"
        if len(simplex.members) == 0:
            out.append(f"{label}: empty member set")
            continue
        if len(set(simplex.members)) != len(simplex.members):
            out.append(f"{label}: duplicate members")
        for i in simplex.members:
            if not 0 <= i < n:
                out.append(f"{label}: member {i} outside 0..{n - 1}")
        if len(simplex.weights) != len(simplex.members):
            out.append(
                f"{label}: {len(simplex.weights)} weights for {len(simplex.members)} members"
            )
            continue
        if any(w <= 0.0 for w in simplex.weights):
            out.append(f"{label}: non-positive member weight")
        total = fsum(simplex.weights)
        if abs(total - 1.0) > ROW_SUM_TOL:
            out.append(f"{label}: member weights sum to {total!r}")
    return out
