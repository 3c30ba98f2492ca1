"""Weighted median operators with deterministic tie-breaking.

A value v is a weighted median of (values, weights) when the total weight
of strictly smaller values and the total weight of strictly larger values
are both at most 1/2.  The median is not always unique; the set of medians
is a run of consecutive order statistics.  When a caller supplies an anchor
(the querying agent's own opinion), ties are resolved by picking the median
closest to the anchor, and equidistant candidates fall to the smaller value
so the result is deterministic.

Threshold sums are computed with ``math.fsum`` so that the verdict of the
"at most 1/2" comparisons does not depend on summation order.  Comparisons
themselves are exact: no epsilon is applied to the 1/2 thresholds, because
the inequalities are combinatorial statements about the weights.
"""

from __future__ import annotations

from math import fsum

import numpy as np

# Tolerance for "weights sum to one" validation, shared with the matrix
# validators in model.py.
ROW_SUM_TOL = 1e-9


def _check_weights(weights):
    if len(weights) == 0:
        raise ValueError("weighted median of empty input")
    for w in weights:
        if w < 0.0:
            raise ValueError(f"negative weight {w!r}")
    total = fsum(weights)
    if abs(total - 1.0) > ROW_SUM_TOL:
        raise ValueError(f"weights sum to {total!r}, expected 1")


def _value_groups(xs):
    """Runs of equal values in an ascending list, as (start, end) pairs."""
    groups = []
    i = 0
    m = len(xs)
    while i < m:
        j = i + 1
        while j < m and xs[j] == xs[i]:
            j += 1
        groups.append((i, j))
        i = j
    return groups


def _median_set_sorted(xs, ws, groups):
    """Median values given ascending values ``xs`` and aligned weights.

    Duplicate values are aggregated, so the below/above sums are taken over
    strictly smaller / strictly larger *values*, matching the index-set
    definition.
    """
    out = []
    for start, end in groups:
        below = fsum(ws[:start])
        if below > 0.5:
            break
        if fsum(ws[end:]) <= 0.5:
            out.append(xs[start])
    return out


def _closest(candidates, anchor):
    # candidates ascending, so an exact tie in distance keeps the smaller.
    best = candidates[0]
    best_d = abs(best - anchor)
    for v in candidates[1:]:
        d = abs(v - anchor)
        if d < best_d:
            best, best_d = v, d
    return best


def weighted_median_set(values, weights):
    """All weighted medians of ``values``, ascending.

    Returns every distinct entry of ``values`` whose strictly-smaller and
    strictly-larger weight masses are both <= 1/2.  The result is non-empty
    for any valid weight vector.
    """
    xs = [float(v) for v in values]
    ws = [float(w) for w in weights]
    if len(xs) != len(ws):
        raise ValueError(f"{len(xs)} values but {len(ws)} weights")
    _check_weights(ws)
    order = sorted(range(len(xs)), key=xs.__getitem__)
    xs_sorted = [xs[i] for i in order]
    ws_sorted = [ws[i] for i in order]
    return _median_set_sorted(xs_sorted, ws_sorted, _value_groups(xs_sorted))


def weighted_median(values, weights, anchor):
    """The weighted median closest to ``anchor`` (smaller value on ties)."""
    return _closest(weighted_median_set(values, weights), float(anchor))


def med_vector(x, W, anchors):
    """Per-agent weighted medians of the shared opinion vector ``x``.

    Component i is the weighted median of ``x`` under row i of ``W``,
    tie-broken toward ``anchors[i]``.  In the opinion dynamics every agent
    anchors on its own current opinion, i.e. ``anchors`` is ``x`` itself.
    """
    x = np.asarray(x, dtype=float)
    W = np.asarray(W, dtype=float)
    anchors = np.asarray(anchors, dtype=float)
    n = x.shape[0]
    if W.ndim != 2 or W.shape[1] != n:
        raise ValueError(f"weight matrix shape {W.shape} does not match {n} values")
    if anchors.shape[0] != W.shape[0]:
        raise ValueError(f"{W.shape[0]} weight rows but {anchors.shape[0]} anchors")
    return np.array(_median_rows(x.tolist(), W.tolist(), anchors.tolist()))


def env_med_vector(x, A, M, anchors):
    """Per-agent weighted medians of the environment opinions ``A @ x``.

    Component i is the weighted median of the environment opinion vector
    under row i of ``M``, tie-broken toward ``anchors[i]`` (the agent's own
    opinion, which need not be one of the environment values).
    """
    x = np.asarray(x, dtype=float)
    A = np.asarray(A, dtype=float)
    M = np.asarray(M, dtype=float)
    anchors = np.asarray(anchors, dtype=float)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"indicator matrix is {A.shape} but x has {x.shape[0]} entries")
    if M.shape[1] != A.shape[0]:
        raise ValueError(f"influence matrix is {M.shape} but there are {A.shape[0]} environments")
    if anchors.shape[0] != M.shape[0]:
        raise ValueError(f"{M.shape[0]} weight rows but {anchors.shape[0]} anchors")
    y = A @ x
    return np.array(_median_rows(y.tolist(), M.tolist(), anchors.tolist()))


def _median_rows(values, rows, anchors):
    """Anchored weighted medians of one value list under many weight rows.

    Shares the sort and value grouping across rows; every row goes through
    exactly the same decision path as ``weighted_median``.
    """
    order = sorted(range(len(values)), key=values.__getitem__)
    xs = [values[i] for i in order]
    groups = _value_groups(xs)
    out = []
    for row, anchor in zip(rows, anchors):
        ws = [row[i] for i in order]
        _check_weights(ws)
        out.append(_closest(_median_set_sorted(xs, ws, groups), anchor))
    return out
