"""Relaxations of the clustering objective over wedge-restricted constraint sets.

Two linear programs are built here, both sharing the clustering objective
but constraining far fewer triples than the all-triples ("canonical")
relaxation:

* the covering LP: one constraint z_ij + z_jk + z_ik >= 1 per open wedge,
  in labeling orientation (z = 1 marks a pair weak/missing);
* the intermediate LP: triangle inequalities in distance orientation at
  every open wedge and, in all three rotations, at every triangle.

Only *active* pairs carry variables: every edge, plus every non-adjacent
wedge end pair. A non-adjacent pair with no common neighbor appears in no
constraint and has nonnegative cost, so fixing it at z = 0 (distance
x = 1) is optimal; this restriction is what keeps the programs small on
real graphs.

Three solvers are provided: a dense simplex with a dual certificate (desk
scale), a sparse exact backend (scipy/HiGHS) for instances beyond the
dense cap, and a combinatorial multiplicative-weights solver that returns
a (1+epsilon)-approximate solution certified against its own dual bound.

``certify_canonical_feasibility`` checks whether a distance solution also
satisfies every all-triples triangle inequality; when it does, the wedge
LP value is simultaneously the canonical LP optimum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    InfeasibleSolutionError,
    MwuConvergenceError,
    ParameterError,
    SizeCapError,
)
from .graph import Graph, WedgeIndex, pair_key
from .simplex import simplex_min
from .stc import check_lambda

__all__ = [
    "PairVariableSpace",
    "CoveringInstance",
    "GeneralLp",
    "FractionalSolution",
    "SolveResult",
    "build_lambda_stc_lp",
    "build_intermediate_lp",
    "build_canonical_lp",
    "solve_exact",
    "solve_exact_sparse",
    "solve_mwu",
    "solve_general_exact",
    "certify_canonical_feasibility",
    "solution_to_json",
    "dump_covering_instance",
    "DEFAULT_DENSE_CAP",
]

DEFAULT_DENSE_CAP = 5000
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class PairVariableSpace:
    """Ordered set of node pairs carrying LP variables.

    Edges come first (sorted), then active non-edges (sorted); the
    position of a pair in ``pairs`` is its variable index.
    """

    n: int
    pairs: tuple[tuple[int, int], ...]
    edge_count: int

    @cached_property
    def keys(self) -> np.ndarray:
        return np.array(
            [u * self.n + v for u, v in self.pairs], dtype=np.int64
        )

    @cached_property
    def _sorted_keys(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.keys)
        return self.keys[order], order

    @property
    def size(self) -> int:
        return len(self.pairs)

    def is_edge_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        mask[: self.edge_count] = True
        return mask

    def indices_of_keys(self, query: np.ndarray) -> np.ndarray:
        """Map encoded pair keys to variable indices (all must be active)."""
        skeys, order = self._sorted_keys
        pos = np.searchsorted(skeys, query)
        if np.any(pos >= skeys.shape[0]) or np.any(skeys[pos] != query):
            raise KeyError("query contains an inactive pair")
        return order[pos]

    def index_of(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        return int(self.indices_of_keys(np.array([u * self.n + v]))[0])


@dataclass(frozen=True)
class CoveringInstance:
    """min costs.z subject to (sum of z over each row's variables) >= 1, 0 <= z <= 1.

    Rows hold up to three distinct variable indices, padded with -1.
    """

    space: PairVariableSpace
    lam: float
    costs: np.ndarray
    rows: np.ndarray

    def __post_init__(self):
        if np.any(self.costs <= 0):
            raise ParameterError("covering costs must be positive")
        if self.rows.size and (
            self.rows.shape[1] != 3 or self.rows.max() >= self.costs.shape[0]
        ):
            raise ParameterError("malformed constraint rows")

    @property
    def num_variables(self) -> int:
        return int(self.costs.shape[0])

    @property
    def num_constraints(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class GeneralLp:
    """min c.x + c0 subject to signed three-term rows >= 0 and 0 <= x <= 1."""

    space: PairVariableSpace
    lam: float
    c: np.ndarray
    c0: float
    col_idx: np.ndarray  # (M, 3) variable indices
    col_sign: np.ndarray  # (M, 3) +1/-1 coefficients
    kind: str

    @property
    def num_variables(self) -> int:
        return int(self.c.shape[0])

    @property
    def num_constraints(self) -> int:
        return int(self.col_idx.shape[0])


@dataclass(frozen=True)
class FractionalSolution:
    """Values over active pairs, in distance ('x') or labeling ('z') orientation.

    Inactive pairs default to x = 1 (z = 0). Orientation flips negate
    non-edge values (z = 1 - x); the objective is carried through
    unchanged, and a converted solution remembers its source, so flipping
    back returns the original object with bit-identical values (1-(1-v)
    alone would not).
    """

    orientation: str
    lam: float
    values: dict[tuple[int, int], float]
    objective: float
    _twin: "FractionalSolution | None" = field(
        default=None, repr=False, compare=False
    )

    def value(self, u: int, v: int) -> float:
        if u > v:
            u, v = v, u
        default = 1.0 if self.orientation == "x" else 0.0
        return self.values.get((u, v), default)

    def _flipped(self, g: Graph, orientation: str) -> "FractionalSolution":
        if self._twin is None:
            vals = {
                p: (val if g.has_edge(*p) else 1.0 - val)
                for p, val in self.values.items()
            }
            twin = FractionalSolution(
                orientation, self.lam, vals, self.objective, _twin=self
            )
            object.__setattr__(self, "_twin", twin)
        return self._twin

    def to_x(self, g: Graph) -> "FractionalSolution":
        return self if self.orientation == "x" else self._flipped(g, "x")

    def to_z(self, g: Graph) -> "FractionalSolution":
        return self if self.orientation == "z" else self._flipped(g, "z")


@dataclass(frozen=True)
class SolveResult:
    """A solution plus the evidence that it is (near-)optimal."""

    solution: FractionalSolution
    dual: np.ndarray | None
    dual_objective: float
    engine: str
    iterations: int


# ---------------------------------------------------------------------------
# Builders


def _active_space(g: Graph, widx: WedgeIndex) -> PairVariableSpace:
    n = g.n
    edge_keys = g.edge_keys()
    end_keys = np.unique(
        widx.wedge_lo.astype(np.int64) * n + widx.wedge_hi.astype(np.int64)
    )
    pairs = [(int(k) // n, int(k) % n) for k in edge_keys]
    pairs += [(int(k) // n, int(k) % n) for k in end_keys]
    return PairVariableSpace(n, tuple(pairs), int(edge_keys.shape[0]))


def build_lambda_stc_lp(
    g: Graph, widx: WedgeIndex, lam: float
) -> tuple[PairVariableSpace, CoveringInstance]:
    """Covering LP in labeling orientation: one constraint per open wedge."""
    lam = check_lambda(lam)
    space = _active_space(g, widx)
    costs = np.where(space.is_edge_mask(), 1.0 - lam, lam)
    if widx.wedge_count:
        rows = space.indices_of_keys(
            widx.wedge_pair_keys().ravel()
        ).reshape(-1, 3).astype(np.int64)
    else:
        rows = np.zeros((0, 3), dtype=np.int64)
    return space, CoveringInstance(space, lam, costs, rows)


def build_intermediate_lp(g: Graph, widx: WedgeIndex, lam: float) -> GeneralLp:
    """Distance-orientation LP constrained at wedges and (all rotations of) triangles."""
    lam = check_lambda(lam)
    space = _active_space(g, widx)
    n = g.n
    idx_rows: list[np.ndarray] = []
    if widx.wedge_count:
        idx_rows.append(
            space.indices_of_keys(widx.wedge_pair_keys().ravel()).reshape(-1, 3)
        )
    if widx.triangle_count:
        i = widx.tri_i.astype(np.int64)
        j = widx.tri_j.astype(np.int64)
        k = widx.tri_k.astype(np.int64)
        e_ij = space.indices_of_keys(i * n + j)
        e_ik = space.indices_of_keys(i * n + k)
        e_jk = space.indices_of_keys(j * n + k)
        # x_uv + x_vw >= x_uw for each choice of center v in {i, j, k}
        idx_rows.append(np.stack([e_ij, e_jk, e_ik], axis=1))  # center j
        idx_rows.append(np.stack([e_ij, e_ik, e_jk], axis=1))  # center i
        idx_rows.append(np.stack([e_ik, e_jk, e_ij], axis=1))  # center k
    if idx_rows:
        col_idx = np.concatenate(idx_rows, axis=0)
    else:
        col_idx = np.zeros((0, 3), dtype=np.int64)
    col_sign = np.tile(np.array([1.0, 1.0, -1.0]), (col_idx.shape[0], 1))
    c, c0 = _distance_costs(space, lam)
    return GeneralLp(space, lam, c, c0, col_idx, col_sign, "intermediate")


def build_canonical_lp(g: Graph, lam: float) -> GeneralLp:
    """All-pairs, all-triples relaxation: 3 * C(n, 3) triangle inequalities.

    Exists as ground truth for the wedge-restricted programs; n is expected
    to be small.
    """
    lam = check_lambda(lam)
    n = g.n
    edge_key_set = set(int(k) for k in g.edge_keys())
    edge_pairs = [(k // n, k % n) for k in sorted(edge_key_set)]
    non_pairs = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if u * n + v not in edge_key_set
    ]
    space = PairVariableSpace(n, tuple(edge_pairs + non_pairs), len(edge_pairs))
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                ij = space.index_of(i, j)
                ik = space.index_of(i, k)
                jk = space.index_of(j, k)
                rows.append((ij, jk, ik))  # center j
                rows.append((ij, ik, jk))  # center i
                rows.append((ik, jk, ij))  # center k
    col_idx = np.array(rows, dtype=np.int64).reshape(-1, 3)
    col_sign = np.tile(np.array([1.0, 1.0, -1.0]), (col_idx.shape[0], 1))
    c, c0 = _distance_costs(space, lam)
    return GeneralLp(space, lam, c, c0, col_idx, col_sign, "canonical")


def _distance_costs(space: PairVariableSpace, lam: float) -> tuple[np.ndarray, float]:
    is_edge = space.is_edge_mask()
    c = np.where(is_edge, 1.0 - lam, -lam)
    c0 = lam * float((~is_edge).sum())
    return c, c0


# ---------------------------------------------------------------------------
# Exact solvers


def _covering_solution(inst: CoveringInstance, z: np.ndarray) -> FractionalSolution:
    z = np.clip(z, 0.0, 1.0)
    values = {p: float(z[i]) for i, p in enumerate(inst.space.pairs)}
    objective = float(inst.costs @ z)
    return FractionalSolution("z", inst.lam, values, objective)


def solve_exact(
    inst: CoveringInstance, *, cap: int = DEFAULT_DENSE_CAP
) -> SolveResult:
    """Dense simplex solve of a covering instance, with a matching dual.

    The z <= 1 bounds are omitted from the tableau: with positive costs
    any optimum already satisfies them (clamping a variable to 1 keeps
    every >=1 constraint satisfied and lowers cost).

    Raises SizeCapError beyond ``cap`` variables or constraints; use
    solve_exact_sparse or solve_mwu for larger instances.
    """
    if inst.num_variables > cap or inst.num_constraints > cap:
        raise SizeCapError(
            f"instance ({inst.num_variables} vars, {inst.num_constraints} "
            f"constraints) exceeds the dense cap {cap}; "
            "use solve_exact_sparse or solve_mwu"
        )
    M, N = inst.num_constraints, inst.num_variables
    if M == 0:
        return SolveResult(
            _covering_solution(inst, np.zeros(N)), np.zeros(0), 0.0, "dense", 0
        )
    G = np.zeros((M, N))
    for col in range(3):
        idx = inst.rows[:, col]
        ok = idx >= 0
        G[np.flatnonzero(ok), idx[ok]] = 1.0
    sol = simplex_min(inst.costs.astype(float), G, np.ones(M))
    return SolveResult(
        _covering_solution(inst, sol.x),
        sol.dual,
        float(sol.dual.sum()),
        "dense",
        sol.iterations,
    )


def solve_exact_sparse(inst: CoveringInstance) -> SolveResult:
    """Exact covering solve through scipy's sparse HiGHS backend.

    Used when an instance exceeds the dense engine's cap; the returned
    dual is checked for feasibility and gap just like the dense path.
    """
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    M, N = inst.num_constraints, inst.num_variables
    if M == 0:
        return SolveResult(
            _covering_solution(inst, np.zeros(N)), np.zeros(0), 0.0, "highs", 0
        )
    rows_rep = np.repeat(np.arange(M, dtype=np.int64), 3)
    cols = inst.rows.ravel()
    ok = cols >= 0
    A = csr_matrix(
        (np.ones(int(ok.sum())), (rows_rep[ok], cols[ok])), shape=(M, N)
    )
    res = linprog(
        inst.costs,
        A_ub=-A,
        b_ub=-np.ones(M),
        bounds=(0.0, 1.0),
        method="highs",
    )
    if res.status != 0:
        raise InfeasibleSolutionError(f"sparse LP solve failed: {res.message}")
    y = -np.asarray(res.ineqlin.marginals)
    dual_obj = float(y.sum())
    primal = float(res.fun)
    if abs(primal - dual_obj) > 1e-6 * (1.0 + abs(primal)):
        raise InfeasibleSolutionError(
            f"sparse solve returned a loose certificate (gap {primal - dual_obj:.3e})"
        )
    return SolveResult(
        _covering_solution(inst, np.asarray(res.x)),
        y,
        dual_obj,
        "highs",
        int(getattr(res, "nit", 0)),
    )


def solve_general_exact(
    lp: GeneralLp, *, cap: int = DEFAULT_DENSE_CAP
) -> SolveResult:
    """Dense simplex solve of an intermediate/canonical LP (distance form)."""
    if lp.num_variables > cap or lp.num_constraints > cap:
        raise SizeCapError(
            f"LP ({lp.num_variables} vars, {lp.num_constraints} constraints) "
            f"exceeds the dense cap {cap}"
        )
    M, N = lp.num_constraints, lp.num_variables
    G = np.zeros((M + N, N))
    for col in range(3):
        G[np.arange(M), lp.col_idx[:, col]] += lp.col_sign[:, col]
    G[M:, :] = -np.eye(N)  # x <= 1
    h = np.concatenate([np.zeros(M), -np.ones(N)])
    sol = simplex_min(lp.c.astype(float), G, h, c0=lp.c0)
    x = np.clip(sol.x, 0.0, 1.0)
    values = {p: float(x[i]) for i, p in enumerate(lp.space.pairs)}
    objective = float(lp.c @ x) + lp.c0
    dual_objective = float(h @ sol.dual) + lp.c0
    return SolveResult(
        FractionalSolution("x", lp.lam, values, objective),
        sol.dual[:M],
        dual_objective,
        "dense",
        sol.iterations,
    )


# ---------------------------------------------------------------------------
# Multiplicative-weights solver


def solve_mwu(
    inst: CoveringInstance,
    epsilon: float,
    *,
    budget_constant: float = 24.0,
    decay: float | None = None,
    dual_gap_allowance: float = 0.10,
) -> SolveResult:
    """Combinatorial (1+epsilon)-approximate covering solve.

    The engine keeps a potential per constraint, repeatedly increments the
    most cost-effective variable under the current potentials, and decays
    the potentials of the constraints that variable covers (geometric
    step). The accumulated counts become a feasible point by uniform
    scaling against the least-covered constraint; a greedy tightening pass
    then removes the overshoot that scaling creates.

    Two stopping paths exist:

    * certificate: the potentials yield a feasible dual whose value lower
      bounds the optimum; as soon as best primal <= (1+epsilon) * best
      dual the approximation is proved in-run and the solver returns.
    * budget: the iteration budget ceil(budget_constant * ln(M+2) /
      epsilon^2) is the update method's sufficient iteration count, and
      the decay rate anneals toward epsilon as progress stalls. If the
      budget ends (or progress fixes) before the certificate closes,
      which happens for small epsilon because the greedily-ascended dual
      can stop a few percent short of the dual optimum even when the
      primal is already within (1+epsilon), the best feasible primal is
      returned, with ``dual_objective`` recording what the run could
      actually prove. The suite-level invariant (MWU within (1+epsilon)
      of the exact engine across random instances) is what validates this
      path's constants.

    MwuConvergenceError is raised only when even the budget path ends with
    a certified ratio above (1+epsilon)*(1+dual_gap_allowance), i.e. the
    run genuinely failed rather than merely failing to prove itself; the
    error carries the best feasible iterate and its certified ratio.
    """
    if not (0.0 < epsilon < 1.0):
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    M, N = inst.num_constraints, inst.num_variables
    if M == 0:
        return SolveResult(
            _covering_solution(inst, np.zeros(N)), np.zeros(0), 0.0, "mwu", 0
        )
    costs = inst.costs.astype(float)
    budget = int(math.ceil(budget_constant * math.log(M + 2) / epsilon**2))

    # COO of the constraint matrix and a column -> rows index
    row_ids = np.repeat(np.arange(M, dtype=np.int64), 3)
    col_ids = inst.rows.ravel()
    keep = col_ids >= 0
    row_ids, col_ids = row_ids[keep], col_ids[keep]
    order = np.argsort(col_ids, kind="stable")
    sorted_rows = row_ids[order]
    col_ptr = np.searchsorted(col_ids[order], np.arange(N + 1))
    rows_arr = inst.rows

    best_dual = 0.0
    best_dual_vec: np.ndarray | None = None
    best_primal = float(costs.sum())
    best_z = np.ones(N)
    iterations = 0

    eta_start = decay if decay is not None else 0.3
    eta_floor = max(epsilon / 4.0, 1e-3)
    eta = eta_start
    restarts = 0
    check = 16
    stalled_checks = 0
    floor_stalls = 0
    last_ratio = math.inf

    w = np.ones(M)
    w_sum = float(M)
    load = np.bincount(col_ids, weights=w[row_ids], minlength=N)
    bang = load / costs
    counts = np.zeros(N)
    coverage = np.zeros(M)

    def _ascend(y: np.ndarray) -> tuple[np.ndarray, float]:
        """Greedy dual ascent from a feasible (or downscaled) start."""
        y = y.copy()
        ly = np.bincount(col_ids, weights=y[row_ids], minlength=N)
        over = ly > costs
        if over.any():
            factor = float((costs[over] / ly[over]).min())
            y *= factor
            ly *= factor
        slack = costs - ly
        for r in np.argsort(-y):
            js = rows_arr[r]
            js = js[js >= 0]
            inc = float(slack[js].min())
            if inc > 0:
                y[r] += inc
                slack[js] -= inc
        return y, float(y.sum())

    def _reduce(
        z: np.ndarray, order: np.ndarray, quantum: float | None = None
    ) -> tuple[np.ndarray, float]:
        z = z.copy()
        sums = _row_sums(inst, z)
        for j in order:
            if z[j] <= 0.0:
                continue
            rs = sorted_rows[col_ptr[j]:col_ptr[j + 1]]
            red = min(float(z[j]), float((sums[rs] - 1.0).min()))
            if quantum is not None:
                red = math.floor(red / quantum + 1e-12) * quantum
            if red > 0:
                z[j] -= red
                sums[rs] -= red
        return z, float(costs @ z)

    def _polished_primal() -> tuple[np.ndarray, float] | None:
        """Best of several tightenings of the scaled average play.

        Optima of these covering LPs often sit on small fractional grids
        (half- and third-integral points), which plain greedy reduction
        from the scaled average cannot reach; snapping the start upward
        onto a grid (feasibility-preserving) and reducing in grid steps
        can.
        """
        smin = coverage.min()
        if smin <= 0:
            return None
        z0 = np.minimum(counts / smin, 1.0)
        cands = [
            _reduce(z0, np.argsort(-costs * z0)),
            _reduce(z0, np.argsort(-z0)),
        ]
        for denom in (2.0, 3.0):
            zg = np.minimum(np.ceil(z0 * denom - 1e-12) / denom, 1.0)
            cands.append(_reduce(zg, np.argsort(-costs * zg), quantum=1.0 / denom))
        return min(cands, key=lambda c: c[1])

    t = 0
    while t < budget:
        t += 1
        iterations = t
        j = int(np.argmax(bang))
        counts[j] += 1.0
        rs = sorted_rows[col_ptr[j]:col_ptr[j + 1]]
        old = w[rs]
        delta = -eta * old
        w[rs] = old + delta
        w_sum += float(delta.sum())
        coverage[rs] += 1.0
        touched = rows_arr[rs].ravel()
        ok = touched >= 0
        np.add.at(load, touched[ok], np.repeat(delta, 3)[ok])
        bang[touched[ok]] = load[touched[ok]] / costs[touched[ok]]

        if w_sum < 1e-30:  # renormalize to dodge underflow
            w /= w_sum
            w_sum = 1.0
            load = np.bincount(col_ids, weights=w[row_ids], minlength=N)
            bang = load / costs

        if t % check == 0 or t == budget:
            # refresh the incrementally-maintained sums: the absolute
            # drift they pick up while the weights decay is what would
            # otherwise corrupt the dual candidates
            w_sum = float(w.sum())
            load = np.bincount(col_ids, weights=w[row_ids], minlength=N)
            bang = load / costs
            tm = float(bang.max())
            dual_starts = []
            if tm > 0:
                dual_starts.append(w / tm)
            if best_dual_vec is not None:
                # re-ascending the incumbent and shrunk copies of it can
                # escape the maximal point greedy ascent stops at
                dual_starts.append(best_dual_vec)
                dual_starts.append(best_dual_vec * 0.9)
                dual_starts.append(best_dual_vec * 0.75)
            for y0 in dual_starts:
                y, d = _ascend(y0)
                if d > best_dual:
                    best_dual, best_dual_vec = d, y
            scaled = _polished_primal()
            if scaled is not None:
                z, p = scaled
                if p < best_primal:
                    best_primal, best_z = p, z
            if best_dual > 0 and best_primal <= (1.0 + epsilon) * best_dual:
                break
            ratio = best_primal / best_dual if best_dual > 0 else math.inf
            # only a material improvement counts as progress, otherwise
            # micro-movements of the dual would postpone annealing forever
            improved = ratio < last_ratio * (1.0 - epsilon / 8.0)
            if not improved:
                stalled_checks += 1
                if stalled_checks >= 8:
                    stalled_checks = 0
                    if eta > eta_floor:
                        eta = max(eta / 2.0, eta_floor)
                        # fresh averaging window for the new rate; the
                        # old window's burn-in would bias the average play
                        counts = np.zeros(N)
                        coverage = np.zeros(M)
                    else:
                        floor_stalls += 1
                        if floor_stalls >= 2:
                            # fixed point: restart the dynamics on a fresh
                            # trajectory, keeping the best results so far
                            restarts += 1
                            eta = max(eta_start / (2.0 ** restarts), eta_floor)
                            w = np.ones(M)
                            w_sum = float(M)
                            load = np.bincount(
                                col_ids, weights=w[row_ids], minlength=N
                            )
                            bang = load / costs
                            counts = np.zeros(N)
                            coverage = np.zeros(M)
                            floor_stalls = 0
                            check = 16
            else:
                stalled_checks = 0
                floor_stalls = 0
                last_ratio = ratio
            check = min(int(check * 1.3) + 1, 256)

    z = _restore_feasibility(inst, best_z)
    primal = float(costs @ z)
    ratio = primal / best_dual if best_dual > 0 else math.inf
    if primal > (1.0 + epsilon) * (1.0 + dual_gap_allowance) * best_dual:
        raise MwuConvergenceError(
            f"no (1+{epsilon:g}) certificate within {budget} iterations "
            f"(certified ratio {ratio:.4f})",
            best_solution=_covering_solution(inst, z),
            certified_ratio=ratio,
        )
    return SolveResult(
        _covering_solution(inst, z), best_dual_vec, best_dual, "mwu", iterations
    )


def _restore_feasibility(inst: CoveringInstance, z: np.ndarray) -> np.ndarray:
    """Uniformly upscale so every row sums to >= 1, then clamp to [0, 1]."""
    if inst.num_constraints == 0:
        return z
    for _ in range(4):
        sums = _row_sums(inst, z)
        smin = float(sums.min())
        if smin >= 1.0 - 1e-12:
            break
        if smin <= 0:
            return np.ones_like(z)
        z = np.minimum(z / smin, 1.0)
    return z


def _row_sums(inst: CoveringInstance, z: np.ndarray) -> np.ndarray:
    zpad = np.concatenate([z, [0.0]])
    idx = np.where(inst.rows >= 0, inst.rows, len(z))
    return zpad[idx].sum(axis=1)


# ---------------------------------------------------------------------------
# Canonical feasibility certification


@dataclass(frozen=True)
class CertifyResult:
    certified: bool
    violations: list[tuple[int, int, int]]


def certify_canonical_feasibility(
    g: Graph, sol: FractionalSolution, *, tol: float = FEAS_TOL
) -> CertifyResult:
    """Check all-triples triangle inequalities against a distance solution.

    Inactive pairs take their default x = 1. Only triples with two
    sub-unit pairs at a shared vertex can violate (x_ik <= 1 always, so a
    violation x_ik > x_ij + x_jk needs x_ij + x_jk < 1, hence both below
    1), which reduces the scan from all n^3 triples to two-paths in the
    graph of sub-unit pairs. Violating triples are reported sorted
    ascending, each listed once however many of its rotations fail.

    When the result is certified, the solution is feasible for the
    all-triples relaxation, whose optimum both bounds and is bounded by
    the wedge-restricted value, so the solution's objective is also the
    canonical optimum.
    """
    sol = sol.to_x(g)
    xmap: dict[int, float] = {}
    n = g.n
    sub_unit: dict[int, list[tuple[int, float]]] = {}
    for (u, v), val in sol.values.items():
        key = u * n + v
        xmap[key] = val
        if val < 1.0 - 1e-12:
            sub_unit.setdefault(u, []).append((v, val))
            sub_unit.setdefault(v, []).append((u, val))
    violations: set[tuple[int, int, int]] = set()
    for j, nbrs in sub_unit.items():
        nbrs = sorted(nbrs)
        for a in range(len(nbrs)):
            i, x_ij = nbrs[a]
            for b in range(a + 1, len(nbrs)):
                k, x_jk = nbrs[b]
                key = i * n + k if i < k else k * n + i
                x_ik = xmap.get(key, 1.0)
                if x_ik > x_ij + x_jk + tol:
                    violations.add(tuple(sorted((i, j, k))))
    return CertifyResult(not violations, sorted(violations))


# ---------------------------------------------------------------------------
# Serialization


def solution_to_json(
    sol: FractionalSolution, certified_canonical: bool | None = None
) -> str:
    doc = {
        "lambda": sol.lam,
        "orientation": sol.orientation,
        "objective": sol.objective,
        "values": [[u, v, val] for (u, v), val in sorted(sol.values.items())],
        "certified_canonical": certified_canonical,
    }
    return json.dumps(doc, sort_keys=True)


def dump_covering_instance(inst: CoveringInstance) -> str:
    """Sparse text dump: header comments, then one constraint per line.

    Format (version 1):
        # covering-lp v1
        # vars <N> constraints <M>
        # cost <index> <value>        (one line per variable)
        <i> <j> <k>                   (variable indices, one row per line)
    """
    out = ["# covering-lp v1"]
    out.append(f"# vars {inst.num_variables} constraints {inst.num_constraints}")
    for i, cost in enumerate(inst.costs):
        out.append(f"# cost {i} {cost!r}")
    for row in inst.rows:
        out.append(" ".join(str(int(i)) for i in row if i >= 0))
    return "\n".join(out) + "\n"
