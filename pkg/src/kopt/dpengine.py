"""Maximum-gain k-move search: DP over nice tree decompositions plus the driver.

For a fixed connection pattern and bucket assignment the solver finds a
bucket-monotone embedding of maximum gain by dynamic programming over a nice
tree decomposition of the dependence graph (order edges plus interference
edges). The driver combines all valid patterns and bucket assignments into the
best k-move overall.

Tables are dense numpy float64 arrays indexed by the bag slots' bucket ranges;
-inf marks assignments with no legal completion. Weights are bounded by 2^40
and table values sum only O(k) of them, so float64 arithmetic is exact.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .buckets import BucketPartition, enumerate_assignments, make_buckets, order_edges
from .decomp import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    DepGraph,
    NiceTreeDecomposition,
    decomposition_from_order,
    dependence_graph,
    to_nice,
    treewidth_exact,
    validate_decomposition,
)
from .instance import Instance, Tour, tour_weight
from .moves import (
    ConnectionPattern,
    KMove,
    apply_move,
    as_kmove,
    endpoint_is_right,
    gain_partial,
    interference_graph,
    slot_of_endpoint,
    valid_patterns,
)

NEG_INF = float("-inf")
MAX_SOLVER_K = 10


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a maximum-gain search; gain is None when no bucket-monotone
    embedding exists at all."""

    gain: int | None
    embedding: tuple[int, ...] | None
    move: KMove | None

    @property
    def improving(self) -> bool:
        return self.gain is not None and self.gain > 0


class TourArrays:
    """Vertex/weight lookups for one (instance, tour) pair, shared by the DP
    and the vectorized oracle."""

    def __init__(self, inst: Instance, tour: Tour):
        if inst.n != tour.n:
            raise ValueError("tour and instance sizes differ")
        self.inst = inst
        self.tour = tour
        self.n = inst.n
        order0 = np.asarray(tour.order, dtype=np.int64) - 1
        self.left_vertex = order0
        self.right_vertex = np.roll(order0, -1)
        self.wf = inst.weights.astype(np.float64)
        self.removed_w = self.wf[self.left_vertex, self.right_vertex]

    def side(self, right: bool) -> np.ndarray:
        return self.right_vertex if right else self.left_vertex


def _pattern_pairs_info(m: ConnectionPattern) -> tuple[tuple[int, bool, int, bool], ...]:
    """(slot_a, right_a, slot_b, right_b) per matching pair."""
    return tuple(
        (
            slot_of_endpoint(a),
            endpoint_is_right(a),
            slot_of_endpoint(b),
            endpoint_is_right(b),
        )
        for a, b in m.pairs
    )


_DECOMP_CACHE: dict[tuple[int, frozenset[tuple[int, int]]], NiceTreeDecomposition] = {}


def nice_decomposition_for(dep: DepGraph) -> NiceTreeDecomposition:
    """Width-optimal nice decomposition of the dependence graph, cached by edge
    set and validated once on construction."""
    key = (dep.k, dep.edges)
    cached = _DECOMP_CACHE.get(key)
    if cached is not None:
        return cached
    _, order = treewidth_exact(dep)
    nice = to_nice(decomposition_from_order(dep, order))
    ok, diags = validate_decomposition(dep, nice)
    if not ok:
        raise AssertionError(f"invalid decomposition produced: {diags}")
    _DECOMP_CACHE[key] = nice
    return nice


def _axis_shape(ndim: int, axis_lengths: dict[int, int]) -> tuple[int, ...]:
    shape = [1] * ndim
    for ax, ln in axis_lengths.items():
        shape[ax] = ln
    return tuple(shape)


def _pair_weight_block(
    arrays: TourArrays,
    dom_a: np.ndarray,
    right_a: bool,
    dom_b: np.ndarray,
    right_b: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """(weights, loop_mask) over the two domains for one realized pattern pair."""
    va = arrays.side(right_a)[dom_a]
    vb = arrays.side(right_b)[dom_b]
    weights = arrays.wf[va[:, None], vb[None, :]]
    return weights, va[:, None] == vb[None, :]


def _bag_gain_array(
    arrays: TourArrays,
    bag: list[int],
    domains: dict[int, np.ndarray],
    pairs_info,
) -> np.ndarray:
    """Gain restricted to the bag slots: removed weights minus realized added
    weights (loop entries carry W[u,u] = 0; they are -inf in any table anyway)."""
    ndim = len(bag)
    shape = tuple(len(domains[i]) for i in bag)
    out = np.zeros(shape, dtype=np.float64)
    axis = {slot: ax for ax, slot in enumerate(bag)}
    for slot in bag:
        out += arrays.removed_w[domains[slot]].reshape(
            _axis_shape(ndim, {axis[slot]: len(domains[slot])})
        )
    for sa, ra, sb, rb in pairs_info:
        if sa not in axis or sb not in axis:
            continue
        if sa == sb:
            out -= arrays.removed_w[domains[sa]].reshape(
                _axis_shape(ndim, {axis[sa]: len(domains[sa])})
            )
            continue
        block, _ = _pair_weight_block(arrays, domains[sa], ra, domains[sb], rb)
        ax_a, ax_b = axis[sa], axis[sb]
        if ax_a > ax_b:
            block = block.T
            ax_a, ax_b = ax_b, ax_a
        out -= block.reshape(
            _axis_shape(ndim, {ax_a: block.shape[0], ax_b: block.shape[1]})
        )
    return out


def solve_fixed(
    inst: Instance,
    tour: Tour,
    m: ConnectionPattern,
    assignment: tuple[int, ...],
    part: BucketPartition,
    nice: NiceTreeDecomposition | None = None,
    *,
    arrays: TourArrays | None = None,
    want_move: bool = True,
) -> SolveResult:
    """Maximum gain over bucket-monotone embeddings for one pattern and one
    bucket assignment, DP over a nice tree decomposition of the dependence
    graph; the embedding is reconstructed and re-verified against the direct
    gain computation.
    """
    k = m.k
    if len(assignment) != k:
        raise ValueError("assignment length must equal k")
    if part.n != tour.n:
        raise ValueError("bucket partition does not match the tour size")
    arrays = arrays or TourArrays(inst, tour)
    obs = order_edges(assignment)
    dep = dependence_graph(interference_graph(m), obs)
    if nice is None:
        nice = nice_decomposition_for(dep)
    else:
        if nice.k != k:
            raise ValueError("decomposition is for a different k")
        bags = [nd.bag for nd in nice.nodes]
        if set().union(*bags) != set(range(1, k + 1)) or any(
            not any(a in bag and b in bag for bag in bags) for a, b in dep.edges
        ):
            raise ValueError("decomposition does not cover the dependence graph")

    # slots demanding more room than their bucket has leave no legal embedding
    per_bucket: dict[int, int] = {}
    for b in assignment:
        per_bucket[b] = per_bucket.get(b, 0) + 1
    if any(count > part.bucket_size(b) for b, count in per_bucket.items()):
        return SolveResult(None, None, None)

    domains = {
        slot: np.arange(*_zero_based(part.bounds(assignment[slot - 1])))
        for slot in range(1, k + 1)
    }
    tables, forget_arg = _run_dp(
        arrays, m, obs, nice, domains, want_args=want_move, keep_tables=False
    )

    root_val = float(tables[nice.root])
    if root_val == NEG_INF:
        return SolveResult(None, None, None)
    gain = int(round(root_val))
    if not want_move:
        return SolveResult(gain, None, None)

    embedding = _reconstruct(nice, domains, forget_arg)
    emb = dict(enumerate(embedding, 1))
    check = gain_partial(inst, tour, m, emb)
    assert check == gain, f"reconstructed embedding gain {check} != table gain {gain}"
    return SolveResult(gain, embedding, as_kmove(inst, tour, m, embedding))


def _run_dp(
    arrays: TourArrays,
    m: ConnectionPattern,
    obs: frozenset[tuple[int, int]],
    nice: NiceTreeDecomposition,
    domains: dict[int, np.ndarray],
    *,
    want_args: bool,
    keep_tables: bool,
) -> tuple[dict[int, np.ndarray], dict[int, np.ndarray]]:
    """Bottom-up table computation; children are freed as soon as their parent
    is done unless keep_tables is set (tests compare every node's table)."""
    pairs_info = _pattern_pairs_info(m)
    nodes = nice.nodes
    postorder = nice.postorder()
    bag_sorted = {t: sorted(nodes[t].bag) for t in postorder}

    tables: dict[int, np.ndarray] = {}
    forget_arg: dict[int, np.ndarray] = {}

    def fetch(child: int) -> np.ndarray:
        return tables[child] if keep_tables else tables.pop(child)

    for t in postorder:
        nd = nodes[t]
        if nd.kind == LEAF:
            tables[t] = np.zeros((), dtype=np.float64)
            continue
        if nd.kind == INTRODUCE:
            child = nd.children[0]
            i = nd.vertex
            bag = bag_sorted[t]
            ax_i = bag.index(i)
            dom_i = domains[i]
            table = np.expand_dims(fetch(child), ax_i) + arrays.removed_w[
                dom_i
            ].reshape(_axis_shape(len(bag), {ax_i: len(dom_i)}))
            realized = 0
            for sa, ra, sb, rb in pairs_info:
                if sa != i and sb != i:
                    continue
                if sa != i:
                    sa, ra, sb, rb = sb, rb, sa, ra
                if sb not in nd.bag:
                    continue
                realized += 1
                if sb == i:
                    table -= arrays.removed_w[dom_i].reshape(
                        _axis_shape(len(bag), {ax_i: len(dom_i)})
                    )
                    continue
                block, loops = _pair_weight_block(arrays, dom_i, ra, domains[sb], rb)
                ax_b = bag.index(sb)
                lo_ax, hi_ax = ax_i, ax_b
                if lo_ax > hi_ax:
                    block, loops = block.T, loops.T
                    lo_ax, hi_ax = hi_ax, lo_ax
                shape = _axis_shape(len(bag), {lo_ax: block.shape[0], hi_ax: block.shape[1]})
                table = table - block.reshape(shape)
                if loops.any():
                    table = np.where(loops.reshape(shape), NEG_INF, table)
            assert realized <= 2, "a slot realizes at most two added edges"
            for nb in (i - 1, i + 1):
                if (min(i, nb), max(i, nb)) in obs and nb in nd.bag:
                    lo_slot, hi_slot = min(i, nb), max(i, nb)
                    ok = domains[lo_slot][:, None] < domains[hi_slot][None, :]
                    ax_lo, ax_hi = bag.index(lo_slot), bag.index(hi_slot)
                    if ax_lo > ax_hi:
                        ok = ok.T
                        ax_lo, ax_hi = ax_hi, ax_lo
                    shape = _axis_shape(len(bag), {ax_lo: ok.shape[0], ax_hi: ok.shape[1]})
                    table = np.where(ok.reshape(shape), table, NEG_INF)
            tables[t] = table
            continue
        if nd.kind == FORGET:
            child = nd.children[0]
            ax = bag_sorted[child].index(nd.vertex)
            child_table = fetch(child)
            tables[t] = child_table.max(axis=ax)
            if want_args:
                forget_arg[t] = child_table.argmax(axis=ax)
            continue
        if nd.kind == JOIN:
            c1, c2 = nd.children
            bag = bag_sorted[t]
            correction = _bag_gain_array(arrays, bag, domains, pairs_info)
            tables[t] = fetch(c1) + fetch(c2) - correction
            continue
        raise AssertionError(f"unknown node kind {nd.kind!r}")

    return tables, forget_arg


def _reconstruct(
    nice: NiceTreeDecomposition,
    domains: dict[int, np.ndarray],
    forget_arg: dict[int, np.ndarray],
) -> tuple[int, ...]:
    """Walk the argmax arrays from the root down; each slot's value is
    recovered at its unique forget node."""
    nodes = nice.nodes
    emb: dict[int, int] = {}
    stack: list[tuple[int, dict[int, int]]] = [(nice.root, {})]
    while stack:
        t, key = stack.pop()
        nd = nodes[t]
        if nd.kind == LEAF:
            continue
        if nd.kind == FORGET:
            idx = tuple(key[slot] for slot in sorted(nd.bag))
            pos = int(forget_arg[t][idx]) if idx else int(forget_arg[t])
            emb[nd.vertex] = int(domains[nd.vertex][pos]) + 1
            child_key = dict(key)
            child_key[nd.vertex] = pos
            stack.append((nd.children[0], child_key))
            continue
        if nd.kind == INTRODUCE:
            child_key = {s: p for s, p in key.items() if s != nd.vertex}
            stack.append((nd.children[0], child_key))
            continue
        stack.append((nd.children[0], key))
        stack.append((nd.children[1], dict(key)))

    assert set(emb) == set(domains), "every slot is forgotten exactly once"
    return tuple(emb[i] for i in sorted(domains))


def _zero_based(bounds: tuple[int, int]) -> tuple[int, int]:
    lo, hi = bounds
    return lo - 1, hi


def default_alpha(k: int) -> Fraction:
    """Per-k bucket exponents: the computed optima for k = 5..10, and a single
    bucket for k <= 4 where bucketing buys nothing at practical sizes."""
    table = {
        5: Fraction(2, 3),
        6: Fraction(3, 4),
        7: Fraction(3, 4),
        8: Fraction(2, 3),
        9: Fraction(4, 5),
        10: Fraction(4, 5),
    }
    return table.get(k, Fraction(1))


def _solve_task(args):
    inst, tour, pattern, assignment, part, arrays, want_move = args
    return solve_fixed(
        inst, tour, pattern, assignment, part, arrays=arrays, want_move=want_move
    )


def best_move(
    inst: Instance,
    tour: Tour,
    k: int,
    alpha=None,
    policy: str = "best",
    threads: int | None = None,
) -> SolveResult:
    """Best k-move over all valid patterns and all bucket assignments.

    policy="best" returns the maximum-gain move (ties broken by pattern index,
    then assignment index, then the solver's canonical embedding); "first"
    returns the first improving move in that same canonical order. The
    returned move is re-validated through apply_move.
    """
    if policy not in ("best", "first"):
        raise ValueError("policy must be 'best' or 'first'")
    if k > MAX_SOLVER_K:
        raise ValueError(f"k must be <= {MAX_SOLVER_K}")
    if inst.n < 2 * k:
        raise ValueError(f"instance too small: need n >= {2 * k}")
    alpha = default_alpha(k) if alpha is None else Fraction(alpha)
    threads = threads or int(os.environ.get("KOPT_THREADS", "1"))
    part = make_buckets(inst.n, alpha)
    arrays = TourArrays(inst, tour)
    patterns = valid_patterns(k)
    assignments = list(enumerate_assignments(k, part.count))

    best: tuple | None = None  # (-gain, p_idx, a_idx, embedding, result)

    def consider(p_idx, a_idx, res: SolveResult):
        nonlocal best
        if res.gain is None:
            return
        cand = (-res.gain, p_idx, a_idx, res.embedding, res)
        if best is None or cand[:4] < best[:4]:
            best = cand

    if policy == "first":
        for p_idx, pattern in enumerate(patterns):
            for a_idx, assignment in enumerate(assignments):
                res = solve_fixed(
                    inst, tour, pattern, assignment, part, arrays=arrays
                )
                if res.improving:
                    apply_move(inst, tour, pattern, res.embedding)
                    return res
                consider(p_idx, a_idx, res)
    elif threads > 1:
        tasks = [
            (p_idx, a_idx, (inst, tour, pattern, assignment, part, arrays, True))
            for p_idx, pattern in enumerate(patterns)
            for a_idx, assignment in enumerate(assignments)
        ]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(_solve_task, (t[2] for t in tasks))
            for (p_idx, a_idx, _), res in zip(tasks, results):
                consider(p_idx, a_idx, res)
    else:
        for p_idx, pattern in enumerate(patterns):
            for a_idx, assignment in enumerate(assignments):
                consider(
                    p_idx,
                    a_idx,
                    solve_fixed(inst, tour, pattern, assignment, part, arrays=arrays),
                )

    assert best is not None, "some bucket assignment always admits an embedding"
    res = best[4]
    apply_move(inst, tour, res.move.pattern, res.embedding)
    return res


@dataclass(frozen=True)
class SearchStep:
    step: int
    gain: int
    tour_weight: int


def local_search(
    inst: Instance,
    tour: Tour,
    k: int,
    alpha=None,
    policy: str = "best",
    max_steps: int | None = None,
    threads: int | None = None,
) -> tuple[Tour, tuple[SearchStep, ...]]:
    """Repeatedly apply improving k-moves until none exists (or max_steps).

    The weight strictly decreases every step; with integer weights this
    terminates. History records each applied move's gain and the running
    weight.
    """
    history: list[SearchStep] = []
    current = tour
    step = 0
    while max_steps is None or step < max_steps:
        res = best_move(inst, current, k, alpha=alpha, policy=policy, threads=threads)
        if not res.improving:
            break
        before = tour_weight(inst, current)
        current = apply_move(inst, current, res.move.pattern, res.embedding)
        after = tour_weight(inst, current)
        assert after == before - res.gain
        step += 1
        history.append(SearchStep(step=step, gain=res.gain, tour_weight=after))
    return current, tuple(history)
