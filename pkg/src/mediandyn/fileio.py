"""Config, trajectory and report serialization.

Config files are UTF-8 JSON with top-level keys ``n``, ``lambda``,
``gamma``, ``u``, ``W`` (row-major), ``simplices`` (each
``{"members": [...], "weights": [...]}`` with optional weights defaulting
to uniform), ``M`` and ``x0``.  Agent ids are 1-based in files and 0-based
in memory.

Trajectories are CSV with header ``t,x_1,...,x_n``, one row per recorded
step, printed with 17 significant digits so round-trips are lossless.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from .model import (
    AgentPopulation,
    EnvironmentComplex,
    Simplex,
    SystemConfig,
    normalize_rows,
)


class ConfigFormatError(ValueError):
    """Malformed config file; the message names the offending field."""


_REQUIRED_KEYS = ("n", "lambda", "gamma", "u", "W", "simplices", "M", "x0")


def load_config(path, normalize=False):
    """Load a system config from JSON.

    With ``normalize=True``, W and M rows whose sums are within 1e-6 of 1
    are rescaled to sum exactly 1 (rows further off are rejected).
    Dimension mismatches are not raised here; validate_config reports them.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(raw, normalize=normalize)


def config_from_dict(raw, normalize=False):
    if not isinstance(raw, dict):
        raise ConfigFormatError("top level must be a JSON object")
    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise ConfigFormatError(f"missing field {key!r}")

    n = raw["n"]
    if not isinstance(n, int) or n < 1:
        raise ConfigFormatError(f"field 'n': expected a positive integer, got {n!r}")

    lam = _vector(raw, "lambda")
    gamma = _vector(raw, "gamma")
    u = _vector(raw, "u")
    x0 = _vector(raw, "x0")
    W = _matrix(raw, "W")
    M = _matrix(raw, "M")

    simplices = []
    for k, entry in enumerate(raw["simplices"]):
        label = f"simplices[{k}]"
        if not isinstance(entry, dict) or "members" not in entry:
            raise ConfigFormatError(f"field {label!r}: expected an object with 'members'")
        members = entry["members"]
        if not isinstance(members, list) or not all(isinstance(i, int) for i in members):
            raise ConfigFormatError(f"field {label!r}: members must be a list of integers")
        zero_based = tuple(i - 1 for i in members)
        weights = entry.get("weights")
        if weights is None:
            simplices.append(Simplex.uniform(zero_based))
        else:
            if not isinstance(weights, list) or len(weights) != len(members):
                raise ConfigFormatError(
                    f"field {label!r}: weights must be a list matching members"
                )
            simplices.append(Simplex(zero_based, tuple(float(w) for w in weights)))

    if normalize:
        W = normalize_rows(W)
        M = normalize_rows(M)

    return SystemConfig(
        population=AgentPopulation(lam=lam, gamma=gamma, u=u),
        W=W,
        environments=EnvironmentComplex(vertex_count=n, simplices=tuple(simplices)),
        M=M,
        x0=x0,
    )


def _vector(raw, key):
    value = raw[key]
    if not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value):
        raise ConfigFormatError(f"field {key!r}: expected a list of numbers")
    return np.array(value, dtype=float)


def _matrix(raw, key):
    value = raw[key]
    if (
        not isinstance(value, list)
        or not value
        or not all(isinstance(row, list) for row in value)
        or len({len(row) for row in value}) != 1
    ):
        raise ConfigFormatError(f"field {key!r}: expected a rectangular list of rows")
    try:
        return np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigFormatError(f"field {key!r}: non-numeric entries") from exc


def config_to_dict(cfg):
    return {
        "n": int(cfg.population.n),
        "lambda": cfg.population.lam.tolist(),
        "gamma": cfg.population.gamma.tolist(),
        "u": cfg.population.u.tolist(),
        "W": cfg.W.tolist(),
        "simplices": [
            {
                "members": [i + 1 for i in s.members],
                "weights": list(s.weights),
            }
            for s in cfg.environments.simplices
        ],
        "M": cfg.M.tolist(),
        "x0": cfg.x0.tolist(),
    }


def save_config(cfg, path):
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2), encoding="utf-8")


def save_trajectory(traj, path):
    """Write recorded states as CSV (header t,x_1,...,x_n)."""
    n = traj.states.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x_{i + 1}" for i in range(n)])
        for t, state in zip(traj.steps, traj.states):
            writer.writerow([int(t)] + [f"{v:.17g}" for v in state])


def load_trajectory(path):
    """Read a trajectory CSV back as (steps, states)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    steps = np.array([int(row[0]) for row in rows[1:]], dtype=int)
    states = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return steps, states


def to_jsonable(obj):
    """Recursively convert dataclasses / numpy values for json.dump."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def save_report(report, path):
    """Serialize any report object (dataclass or dict) as JSON."""
    Path(path).write_text(json.dumps(to_jsonable(report), indent=2), encoding="utf-8")


def structure_report_to_dict(report):
    """StructureReport as JSON-ready dict with sorted 1-based id arrays."""

    def agents(ids):
        return [i + 1 for i in sorted(ids)]

    def envs(ids):
        return [k + 1 for k in sorted(ids)]

    verdict = report.theorem31
    return {
        "maximal_cohesive_set": agents(report.maximal_cohesive_set),
        "maximal_cohesive_unopinionated": agents(report.maximal_cohesive_unopinionated),
        "weak_cohesive_group_sets": [envs(q) for q in report.weak_cohesive_group_sets],
        "strong_cohesive_group_sets": [
            {"simplices": envs(q), "agents": agents(p)}
            for q, p in report.strong_cohesive_group_sets
        ],
        "cohesive_influential_clusters": [
            agents(p) for p in report.cohesive_influential_clusters
        ],
        "theorem31": {
            "holds": verdict.holds,
            "reasons": list(verdict.reasons),
            "cohesive_unopinionated": agents(verdict.cohesive_unopinionated),
            "witness": envs(verdict.witness) if verdict.witness is not None else None,
        },
        "exact_listing": report.exact_listing,
    }
