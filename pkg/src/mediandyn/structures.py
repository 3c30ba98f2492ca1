"""Structural predicates on the influence network and environment set.

Four interlocking structures drive the consensus analysis:

* cohesive agent set P: every member keeps at least half of its neighbor
  influence weight inside P (threshold >= 1/2, as defined);
* weak cohesive group set Q: a set of environments that captures strictly
  more than half of *every* agent's environmental influence weight;
* strong cohesive group set Q (relative to an agent set P): a weak
  cohesive group set whose environments draw all their members from P;
* cohesive influential cluster: a cohesive agent set P together with a
  strong cohesive group set witness.

The consensus sufficient condition for a mixed population holds when the
unopinionated block contains no cohesive agent set and some weak cohesive
group set uses opinionated members only.

All weight sums use math.fsum and exact comparisons against 1/2, so
verdicts do not depend on summation order.  The >= (agent sets) versus >
(group sets) thresholds are intentional and follow the definitions as
written.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import fsum

import numpy as np

# Exhaustive subset listing in structure_report() is capped here; existence
# checks (union witnesses, peeling) stay exact at any size.
ENUMERATION_LIMIT = 12


def is_cohesive_agent_set(P, W):
    """True iff every i in P keeps weight >= 1/2 inside P."""
    P = sorted(set(P))
    if not P:
        raise ValueError("empty agent set")
    W = np.asarray(W, dtype=float)
    return all(fsum(W[i, P].tolist()) >= 0.5 for i in P)


def maximal_cohesive_subset(S, W):
    """The unique maximal cohesive subset of S, found by peeling.

    Repeatedly removes the lowest-index agent whose weight inside the
    working set has dropped below 1/2; the residue (possibly empty)
    contains every cohesive subset of S.  The result is independent of the
    removal order because removals only shrink other agents' inside-weights.
    """
    W = np.asarray(W, dtype=float)
    working = sorted(set(S))
    while working:
        removable = None
        for i in working:
            if fsum(W[i, working].tolist()) < 0.5:
                removable = i
                break
        if removable is None:
            break
        working.remove(removable)
    return tuple(working)


def is_weak_cohesive_group_set(Q, M):
    """True iff environments Q capture weight > 1/2 for every agent."""
    Q = sorted(set(Q))
    if not Q:
        raise ValueError("empty environment set")
    M = np.asarray(M, dtype=float)
    return all(fsum(M[i, Q].tolist()) > 0.5 for i in range(M.shape[0]))


def is_strong_cohesive_group_set(Q, P, environments, M):
    """Weak cohesiveness plus: each environment in Q has members inside P."""
    Q = sorted(set(Q))
    P = set(P)
    if not Q:
        raise ValueError("empty environment set")
    if not P:
        raise ValueError("empty agent set")
    for k in Q:
        if not set(environments.simplices[k].members) <= P:
            return False
    return is_weak_cohesive_group_set(Q, M)


def is_cohesive_influential_cluster(P, W, environments, M):
    """True iff P is cohesive and some strong cohesive group set anchors on it.

    The candidate environments are exactly those whose members lie inside
    P.  Because the group-set weight condition is monotone in Q, the union
    of all candidates is the easiest witness: if it fails, every subset
    fails, so this single check is exact.
    """
    P = set(P)
    if not P:
        raise ValueError("empty agent set")
    if not is_cohesive_agent_set(P, W):
        return False
    candidates = [
        k for k, s in enumerate(environments.simplices) if set(s.members) <= P
    ]
    if not candidates:
        return False
    return is_weak_cohesive_group_set(candidates, M)


@dataclass
class HypothesisVerdict:
    """Outcome of the consensus sufficient-condition check."""

    holds: bool
    reasons: list = field(default_factory=list)
    cohesive_unopinionated: tuple = ()
    witness: tuple = None


def check_theorem31(cfg):
    """Check the consensus sufficient condition for a mixed population.

    Holds iff (a) the unopinionated block contains no cohesive agent set
    (its peeling residue is empty) and (b) there is a weak cohesive group
    set built solely from environments of opinionated agents.  As in the
    cluster check, monotonicity makes the union of all-opinionated
    environments a complete witness search.
    """
    pop = cfg.population
    v1 = set(pop.opinionated)
    v2 = pop.unopinionated
    reasons = []

    residue = maximal_cohesive_subset(v2, cfg.W) if v2 else ()
    if residue:
        reasons.append(
            "unopinionated agents contain the cohesive set "
            + _agent_label(residue)
        )

    candidates = [
        k for k, s in enumerate(cfg.environments.simplices) if set(s.members) <= v1
    ]
    witness = None
    if candidates and is_weak_cohesive_group_set(candidates, cfg.M):
        witness = tuple(candidates)
    else:
        reasons.append(
            "no weak cohesive group set over opinionated-only environments"
        )

    return HypothesisVerdict(
        holds=not residue and witness is not None,
        reasons=reasons,
        cohesive_unopinionated=residue,
        witness=witness,
    )


@dataclass
class StructureReport:
    """All structures found in a config, for the analyze command.

    Listing of group sets is exhaustive-minimal up to ENUMERATION_LIMIT
    environments (supersets of a weak cohesive set are weak cohesive too,
    so minimal sets characterize the full family); above the limit only the
    union-based findings are reported and ``exact_listing`` is False.
    Existence verdicts are exact either way.
    """

    maximal_cohesive_set: tuple
    maximal_cohesive_unopinionated: tuple
    weak_cohesive_group_sets: list
    strong_cohesive_group_sets: list
    cohesive_influential_clusters: list
    theorem31: HypothesisVerdict
    exact_listing: bool


def structure_report(cfg):
    """Detect and verify every reported structure of ``cfg``."""
    n = cfg.n
    simplices = cfg.environments.simplices
    l = len(simplices)

    maximal = maximal_cohesive_subset(range(n), cfg.W)
    v2 = cfg.population.unopinionated
    maximal_v2 = maximal_cohesive_subset(v2, cfg.W) if v2 else ()

    exact = l <= ENUMERATION_LIMIT
    if exact:
        weak_sets = _minimal_weak_cohesive_sets(cfg.M, l)
    else:
        union = tuple(range(l))
        weak_sets = [union] if l and is_weak_cohesive_group_set(union, cfg.M) else []

    strong_sets = []
    clusters = []
    for q in weak_sets:
        members = set()
        for k in q:
            members |= set(simplices[k].members)
        anchor = tuple(sorted(members))
        strong_sets.append((q, anchor))
        if is_cohesive_agent_set(anchor, cfg.W) and anchor not in clusters:
            clusters.append(anchor)

    return StructureReport(
        maximal_cohesive_set=maximal,
        maximal_cohesive_unopinionated=maximal_v2,
        weak_cohesive_group_sets=weak_sets,
        strong_cohesive_group_sets=strong_sets,
        cohesive_influential_clusters=clusters,
        theorem31=check_theorem31(cfg),
        exact_listing=exact,
    )


def _minimal_weak_cohesive_sets(M, l):
    """Minimal weak cohesive environment sets, by exhaustive enumeration.

    Uses the predicate itself on every subset so listing verdicts agree
    with re-verification exactly, including knife-edge weight sums.
    """
    if l == 0:
        return []
    satisfying = [False] * (1 << l)
    for mask in range(1, 1 << l):
        members = [b for b in range(l) if mask >> b & 1]
        satisfying[mask] = is_weak_cohesive_group_set(members, M)
    minimal = []
    for mask in range(1, 1 << l):
        if not satisfying[mask]:
            continue
        if any(satisfying[mask & ~(1 << b)] for b in range(l) if mask >> b & 1):
            continue
        minimal.append(tuple(b for b in range(l) if mask >> b & 1))
    return minimal


def _agent_label(agents):
    return "{" + ", ".join(str(i + 1) for i in agents) + "}"
