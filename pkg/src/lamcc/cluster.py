"""Clustering algorithms driven by labelings and LP relaxations.

The clustering objective charges 1-lam for every edge cut between
clusters and lam for every non-adjacent pair placed inside a cluster.
All approximation algorithms here share one skeleton: build a derived
graph whose edges encode "should be together", then run the random-pivot
procedure on it. What varies is how the derived graph is built:

* cover_flip_pivot flips the pairs labeled by the wedge-cover algorithm
  (expected cost at most twice the labeling cost, hence 6x optimal for
  lam >= 1/2 since the labeling is 3-approximate);
* round_lambda_stc_lp thresholds the wedge-LP distances
  (factor 7 - 2/lam for lam >= 1/2, 1 + 1/lam below);
* round_intermediate_lp thresholds the wedge+triangle LP at 1/3
  (factor 3 for lam >= 1/2).

Every run is reproducible: randomness comes from a seeded PCG64 stream,
and pivots are drawn by index into the list of still-unclustered
vertices (swap-removal, members removed in sorted order), so a (graph,
lambda, seed) triple fixes the output exactly.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import InfeasibleSolutionError, ParameterError
from .graph import Graph, WedgeIndex
from .lp import FractionalSolution
from .stc import DualCertificate, StcLabeling, check_lambda, cover_label

__all__ = [
    "Clustering",
    "DerivedGraph",
    "RunReport",
    "DeterministicPivotResult",
    "lambda_cc_objective",
    "pivot",
    "pivot_deterministic",
    "cover_flip_pivot",
    "derived_graph_from_labeling",
    "round_lambda_stc_lp",
    "round_intermediate_lp",
    "lambda_louvain",
    "a_posteriori_ratio",
    "report_to_json",
    "assignment_text",
]


@dataclass(frozen=True)
class Clustering:
    """Partition of 0..n-1; cluster ids are contiguous in first-use order."""

    assignment: tuple[int, ...]

    @classmethod
    def from_assignment(cls, labels) -> "Clustering":
        remap: dict[int, int] = {}
        out = []
        for lbl in labels:
            if lbl not in remap:
                remap[lbl] = len(remap)
            out.append(remap[lbl])
        return cls(tuple(out))

    @cached_property
    def clusters(self) -> tuple[tuple[int, ...], ...]:
        k = self.num_clusters
        members: list[list[int]] = [[] for _ in range(k)]
        for v, c in enumerate(self.assignment):
            members[c].append(v)
        return tuple(tuple(ms) for ms in members)

    @property
    def num_clusters(self) -> int:
        return max(self.assignment) + 1 if self.assignment else 0

    @property
    def n(self) -> int:
        return len(self.assignment)


class DerivedGraph:
    """A graph equal to ``base`` with the adjacency of ``flipped`` pairs toggled."""

    __slots__ = ("base", "flipped", "_adj")

    def __init__(self, base: Graph, flipped):
        self.base = base
        self.flipped = StcLabeling.normalize(flipped)
        adj: list[set[int]] = [set(map(int, base.neighbors(v))) for v in range(base.n)]
        for u, v in self.flipped:
            if v in adj[u]:
                adj[u].discard(v)
                adj[v].discard(u)
            else:
                adj[u].add(v)
                adj[v].add(u)
        self._adj = [tuple(sorted(s)) for s in adj]

    @property
    def n(self) -> int:
        return self.base.n

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]


@dataclass(frozen=True)
class RunReport:
    """One algorithm run: the clustering, its objective, and its evidence."""

    algorithm: str
    lam: float
    seed: int | None
    clustering: Clustering
    objective: float
    lower_bound: float | None
    lb_provenance: str | None
    ratio: float | None
    elapsed_ms: float

    @property
    def num_clusters(self) -> int:
        return self.clustering.num_clusters


def _ratio(objective: float, lower_bound: float | None) -> float | None:
    if lower_bound is None:
        return None
    if lower_bound > 0:
        return objective / lower_bound
    return 1.0 if objective == 0 else None


# ---------------------------------------------------------------------------
# Objective


def lambda_cc_objective(g: Graph, lam: float, c: Clustering) -> float:
    """Clustering cost: (1-lam) * cut edges + lam * co-clustered non-edges.

    Computed from per-cluster sizes and internal edge counts, linear in
    n + m, never by scanning all vertex pairs.
    """
    lam = check_lambda(lam)
    if c.n != g.n:
        raise ParameterError(
            f"clustering covers {c.n} vertices, graph has {g.n}"
        )
    asg = np.asarray(c.assignment, dtype=np.int64)
    rowids = np.repeat(np.arange(g.n, dtype=np.int64), g.degree)
    internal = int((asg[rowids] == asg[g.indices]).sum()) // 2
    sizes = np.bincount(asg)
    pairs_inside = int((sizes * (sizes - 1) // 2).sum())
    return (1.0 - lam) * (g.m - internal) + lam * (pairs_inside - internal)


# ---------------------------------------------------------------------------
# Pivot


def pivot(gh, seed: int) -> Clustering:
    """Random-pivot clustering of a Graph or DerivedGraph.

    Repeatedly draws a uniformly random unclustered vertex (PCG64 stream,
    index into the alive list) and clusters it with its unclustered
    neighbors; members leave the alive list by swap-removal in sorted
    order, which pins the draw sequence for a given seed.
    """
    n = gh.n
    rng = np.random.default_rng(seed)
    assignment = [-1] * n
    alive = list(range(n))
    pos = list(range(n))
    cid = 0

    def _remove(v: int) -> None:
        i = pos[v]
        last = alive[-1]
        alive[i] = last
        pos[last] = i
        alive.pop()

    while alive:
        k = alive[int(rng.integers(len(alive)))]
        members = [k] + [int(u) for u in gh.neighbors(k) if assignment[u] < 0 and u != k]
        for v in sorted(members):
            assignment[v] = cid
            _remove(v)
        cid += 1
    return Clustering(tuple(assignment))


@dataclass(frozen=True)
class DeterministicPivotResult:
    clustering: Clustering
    fallback_rounds: tuple[int, ...]


def pivot_deterministic(
    gh, g: Graph, lam: float, budgets: dict[tuple[int, int], float]
) -> DeterministicPivotResult:
    """Pivot with derandomized pivot choice.

    Each round scores every remaining vertex k by the clustering cost its
    round would incur (cut edges and co-clustered non-edges among the
    pairs decided this round) divided by the total budget of those decided
    pairs; the smallest ratio wins, ties to the smallest id. Decided pairs
    are every pair with at least one endpoint in k's new cluster and both
    endpoints still unclustered. Candidates with zero budget rank last
    unless their cost is also zero (ratio treated as 0). Rounds where
    every candidate has zero budget but positive cost fall back to the
    smallest-id pivot and are flagged in the result.

    Quadratic-ish per round; intended for small instances and validation.
    """
    lam = check_lambda(lam)
    n = gh.n

    def b(u: int, v: int) -> float:
        return budgets.get((u, v) if u < v else (v, u), 0.0)

    remaining = set(range(n))
    assignment = [-1] * n
    cid = 0
    fallbacks: list[int] = []
    round_no = 0
    while remaining:
        rem_sorted = sorted(remaining)
        best_key: tuple | None = None
        best_k = None
        any_finite = False
        for k in rem_sorted:
            members = {k} | {u for u in gh.neighbors(k) if u in remaining}
            outside = remaining - members
            cost = 0.0
            budget = 0.0
            mem_sorted = sorted(members)
            for ii, u in enumerate(mem_sorted):
                for v in mem_sorted[ii + 1:]:
                    if not g.has_edge(u, v):
                        cost += lam
                    budget += b(u, v)
                for v in outside:
                    if g.has_edge(u, v):
                        cost += 1.0 - lam
                    budget += b(u, v)
            if budget > 0:
                key = (0, cost / budget, k)
                any_finite = True
            elif cost == 0:
                key = (0, 0.0, k)
                any_finite = True
            else:
                key = (1, math.inf, k)  # zero budget, positive cost: last
            if best_key is None or key < best_key:
                best_key, best_k = key, k
        if not any_finite:
            best_k = rem_sorted[0]
            fallbacks.append(round_no)
        members = {best_k} | {u for u in gh.neighbors(best_k) if u in remaining}
        for v in sorted(members):
            assignment[v] = cid
            remaining.discard(v)
        cid += 1
        round_no += 1
    return DeterministicPivotResult(Clustering(tuple(assignment)), tuple(fallbacks))


# ---------------------------------------------------------------------------
# Cover -> flip -> pivot


def derived_graph_from_labeling(g: Graph, lab: StcLabeling) -> DerivedGraph:
    """Delete weak edges, insert missing pairs."""
    return DerivedGraph(g, lab.weak | lab.missing)


def cover_flip_pivot(
    g: Graph,
    widx: WedgeIndex,
    lam: float,
    seed: int,
    *,
    force: bool = False,
    labeling: StcLabeling | None = None,
    certificate: DualCertificate | None = None,
) -> RunReport:
    """Label wedges, flip the labeled pairs, pivot on the result.

    The labeling's dual certificate rides along as the report's lower
    bound, giving every run an a-posteriori ratio. Guaranteed regime is
    lam >= 1/2 (pass force=True to run outside it, without the guarantee).
    A precomputed labeling/certificate pair may be passed to amortize the
    cover step across seeds.
    """
    lam = check_lambda(lam)
    if lam < 0.5 and not force:
        raise ParameterError(
            "the flip-pivot guarantee needs lambda >= 1/2; "
            "pass force=True to run anyway"
        )
    t0 = time.perf_counter()
    if labeling is None or certificate is None:
        labeling, certificate = cover_label(g, widx, lam)
    gh = derived_graph_from_labeling(g, labeling)
    clustering = pivot(gh, seed)
    objective = lambda_cc_objective(g, lam, clustering)
    lb = certificate.lower_bound
    return RunReport(
        "cfp",
        lam,
        seed,
        clustering,
        objective,
        lb,
        "dual_certificate",
        _ratio(objective, lb),
        (time.perf_counter() - t0) * 1000.0,
    )


# ---------------------------------------------------------------------------
# LP roundings


def _check_wedge_feasibility(
    g: Graph, widx: WedgeIndex, sol: FractionalSolution, tol: float = 1e-9
) -> None:
    if widx.wedge_count == 0:
        return
    keys3 = widx.wedge_pair_keys()
    x = sol.to_x(g)
    lookup = {u * g.n + v: val for (u, v), val in x.values.items()}
    vals = np.array(
        [[lookup.get(int(k), 1.0) for k in row] for row in keys3]
    )
    if np.any(vals[:, 2] > vals[:, 0] + vals[:, 1] + tol):
        raise InfeasibleSolutionError(
            "solution violates an open-wedge triangle inequality"
        )


def _check_triangle_feasibility(
    g: Graph, widx: WedgeIndex, sol: FractionalSolution, tol: float = 1e-9
) -> None:
    if widx.triangle_count == 0:
        return
    x = sol.to_x(g)
    for i, j, k in widx.triangles:
        xij = x.value(i, j)
        xik = x.value(i, k)
        xjk = x.value(j, k)
        if (
            xik > xij + xjk + tol
            or xjk > xij + xik + tol
            or xij > xik + xjk + tol
        ):
            raise InfeasibleSolutionError(
                "solution violates a triangle inequality at a closed triple"
            )


def stc_rounding_threshold(lam: float) -> float:
    """Distance threshold for building the derived graph from the wedge LP."""
    lam = check_lambda(lam)
    if lam >= 0.5:
        return 2.0 * lam / (7.0 * lam - 2.0)
    return lam / (1.0 + lam)


def stc_rounding_factor(lam: float) -> float:
    """Guaranteed expected approximation factor of the wedge-LP rounding."""
    lam = check_lambda(lam)
    return 7.0 - 2.0 / lam if lam >= 0.5 else 1.0 + 1.0 / lam


def round_lambda_stc_lp(
    g: Graph,
    widx: WedgeIndex,
    lam: float,
    sol: FractionalSolution,
    seed: int,
) -> RunReport:
    """Threshold the wedge-LP distances into a derived graph and pivot.

    For lam >= 1/2 the derived edges are exactly the graph edges with
    x < 2*lam/(7*lam - 2) (non-edges never join); below 1/2 every graph
    edge stays and non-edges with x < lam/(1 + lam) join. Strict
    inequalities: a pair sitting exactly on the threshold is excluded.
    """
    lam = check_lambda(lam)
    t0 = time.perf_counter()
    _check_wedge_feasibility(g, widx, sol)
    x = sol.to_x(g)
    thr = stc_rounding_threshold(lam)
    flipped: set[tuple[int, int]] = set()
    if lam >= 0.5:
        for (u, v), val in x.values.items():
            if g.has_edge(u, v) and val >= thr:
                flipped.add((u, v))
    else:
        for (u, v), val in x.values.items():
            if not g.has_edge(u, v) and val < thr:
                flipped.add((u, v))
    gh = DerivedGraph(g, flipped)
    clustering = pivot(gh, seed)
    objective = lambda_cc_objective(g, lam, clustering)
    lb = sol.objective
    return RunReport(
        "lp-round",
        lam,
        seed,
        clustering,
        objective,
        lb,
        "lp_value",
        _ratio(objective, lb),
        (time.perf_counter() - t0) * 1000.0,
    )


def round_intermediate_lp(
    g: Graph,
    widx: WedgeIndex,
    lam: float,
    sol: FractionalSolution,
    seed: int,
) -> RunReport:
    """Threshold the wedge+triangle LP at 1/3 and pivot (lam >= 1/2 only).

    Every pair, edge or not, with x strictly below 1/3 becomes a derived
    edge.
    """
    lam = check_lambda(lam)
    if lam < 0.5:
        raise ParameterError("intermediate-LP rounding requires lambda >= 1/2")
    t0 = time.perf_counter()
    _check_wedge_feasibility(g, widx, sol)
    _check_triangle_feasibility(g, widx, sol)
    x = sol.to_x(g)
    flipped: set[tuple[int, int]] = set()
    for (u, v), val in x.values.items():
        inside = val < 1.0 / 3.0
        if g.has_edge(u, v) != inside:
            flipped.add((u, v))
    gh = DerivedGraph(g, flipped)
    clustering = pivot(gh, seed)
    objective = lambda_cc_objective(g, lam, clustering)
    lb = sol.objective
    return RunReport(
        "lp3-round",
        lam,
        seed,
        clustering,
        objective,
        lb,
        "lp_value",
        _ratio(objective, lb),
        (time.perf_counter() - t0) * 1000.0,
    )


# ---------------------------------------------------------------------------
# Greedy local-move heuristic


def lambda_louvain(
    g: Graph,
    lam: float,
    seed: int,
    max_passes: int = 16,
    *,
    multilevel: bool = False,
) -> RunReport:
    """Greedy node-move heuristic for the clustering objective.

    Starts from singletons; each pass visits vertices in a seeded random
    order and moves each to the neighboring cluster (or back to a
    singleton) with the best strictly-negative cost delta, computed in
    O(deg) per vertex. Passes repeat until no move improves or max_passes
    is hit. With multilevel=True, converged clusters collapse into
    weighted supernodes and the process recurses. No approximation
    guarantee; the report carries no lower bound.
    """
    lam = check_lambda(lam)
    if max_passes < 1:
        raise ParameterError("max_passes must be >= 1")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)

    sizes = [1.0] * g.n
    adjw: list[dict[int, float]] = [
        {int(u): 1.0 for u in g.neighbors(v)} for v in range(g.n)
    ]
    mapping = list(range(g.n))  # original vertex -> current supernode

    while True:
        labels, moved = _greedy_passes(adjw, sizes, lam, rng, max_passes)
        if not multilevel or not moved:
            break
        k = max(labels) + 1
        if k == len(sizes):  # nothing merged, a further level is a no-op
            break
        sizes, adjw = _aggregate(adjw, sizes, labels, k)
        mapping = [labels[c] for c in mapping]

    final = Clustering.from_assignment(
        labels[mapping[v]] if multilevel else labels[v] for v in range(g.n)
    )
    objective = lambda_cc_objective(g, lam, final)
    return RunReport(
        "louvain",
        lam,
        seed,
        final,
        objective,
        None,
        None,
        None,
        (time.perf_counter() - t0) * 1000.0,
    )


def _greedy_passes(adjw, sizes, lam, rng, max_passes):
    n = len(sizes)
    labels = list(range(n))
    members_size = sizes.copy()  # total size per cluster id
    moved_any = False
    for _ in range(max_passes):
        improved = False
        for v in rng.permutation(n):
            v = int(v)
            c0 = labels[v]
            sv = sizes[v]
            # edge weight from v to each adjacent cluster
            w_to: dict[int, float] = {}
            for u, w in adjw[v].items():
                w_to[labels[u]] = w_to.get(labels[u], 0.0) + w
            size_c0 = members_size[c0] - sv
            w_c0 = w_to.get(c0, 0.0)
            # cost delta of detaching v from its cluster
            detach = (1.0 - lam) * w_c0 - lam * (size_c0 * sv - w_c0)
            best_delta = 0.0
            best_c = c0
            for c, w in w_to.items():
                if c == c0:
                    continue
                size_c = members_size[c]
                join = -(1.0 - lam) * w + lam * (size_c * sv - w)
                delta = detach + join
                if delta < best_delta - 1e-12 or (
                    abs(delta - best_delta) <= 1e-12 and best_c != c0 and c < best_c
                ):
                    best_delta = delta
                    best_c = c
            if size_c0 > 0 and detach < best_delta - 1e-12:
                best_delta = detach  # move v to a fresh singleton
                best_c = -1
            if best_c != c0:
                members_size[c0] -= sv
                if best_c == -1:
                    best_c = _fresh_label(members_size)
                labels[v] = best_c
                if best_c == len(members_size):
                    members_size.append(0.0)
                members_size[best_c] += sv
                improved = True
                moved_any = True
        if not improved:
            break
    # compact labels
    remap: dict[int, int] = {}
    out = []
    for lbl in labels:
        if lbl not in remap:
            remap[lbl] = len(remap)
        out.append(remap[lbl])
    return out, moved_any


def _fresh_label(members_size) -> int:
    for i, s in enumerate(members_size):
        if s == 0.0:
            return i
    return len(members_size)


def _aggregate(adjw, sizes, labels, k):
    new_sizes = [0.0] * k
    for v, s in enumerate(sizes):
        new_sizes[labels[v]] += s
    new_adj: list[dict[int, float]] = [dict() for _ in range(k)]
    for v, nbrs in enumerate(adjw):
        cv = labels[v]
        for u, w in nbrs.items():
            cu = labels[u]
            if cu != cv:
                new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
    return new_sizes, new_adj


# ---------------------------------------------------------------------------
# Reports


def a_posteriori_ratio(
    report: RunReport, lower_bound: float, provenance: str
) -> RunReport:
    """Attach an external lower bound (and its provenance) to a run report."""
    if lower_bound < 0:
        raise ParameterError("lower bound must be nonnegative")
    if lower_bound == 0 and report.objective > 0:
        raise ParameterError(
            "ratio undefined: lower bound 0 with positive objective"
        )
    ratio = 1.0 if lower_bound == 0 else report.objective / lower_bound
    return replace(
        report, lower_bound=lower_bound, lb_provenance=provenance, ratio=ratio
    )


def report_to_json(report: RunReport, *, include_timing: bool = True) -> str:
    sizes = [len(c) for c in report.clustering.clusters]
    hist: dict[str, int] = {}
    for s in sizes:
        hist[str(s)] = hist.get(str(s), 0) + 1
    doc = {
        "algorithm": report.algorithm,
        "lambda": report.lam,
        "seed": report.seed,
        "objective": report.objective,
        "lower_bound": report.lower_bound,
        "lb_provenance": report.lb_provenance,
        "ratio": report.ratio,
        "num_clusters": report.num_clusters,
        "elapsed_ms": report.elapsed_ms if include_timing else None,
        "cluster_size_hist": dict(sorted(hist.items(), key=lambda kv: int(kv[0]))),
    }
    return json.dumps(doc, sort_keys=True)


def assignment_text(c: Clustering) -> str:
    """Two-column 'vertex cluster' dump."""
    return "".join(f"{v} {cid}\n" for v, cid in enumerate(c.assignment))
