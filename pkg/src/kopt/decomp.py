"""Dependence graphs, exact treewidth, and (nice) tree decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

MAX_TW_VERTICES = 24


def _normalize_edges(edges, k: int) -> frozenset[tuple[int, int]]:
    norm = set()
    for a, b in edges:
        if a == b:
            raise ValueError("loops are not allowed")
        if not (1 <= a <= k and 1 <= b <= k):
            raise ValueError(f"vertex out of range 1..{k}")
        norm.add((min(a, b), max(a, b)))
    return frozenset(norm)


@dataclass(frozen=True)
class DepGraph:
    """Graph on move slots whose edges are order dependencies plus interference
    dependencies; the DP runs over a tree decomposition of this graph."""

    k: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        object.__setattr__(self, "edges", _normalize_edges(self.edges, self.k))

    def adjacency_masks(self) -> list[int]:
        """Bitmask neighbor sets, 0-based."""
        adj = [0] * self.k
        for a, b in self.edges:
            adj[a - 1] |= 1 << (b - 1)
            adj[b - 1] |= 1 << (a - 1)
        return adj


def dependence_graph(interference, order_edge_set) -> DepGraph:
    """Union of interference edges and order edges (parallel edges collapse)."""
    iedges = getattr(interference, "edges", interference)
    k = getattr(interference, "k", None)
    if k is None:
        k = max((max(e) for e in set(iedges) | set(order_edge_set)), default=1)
    return DepGraph(k=k, edges=frozenset(iedges) | frozenset(order_edge_set))


# ---------------------------------------------------------------------------
# Exact treewidth: subset DP over eliminated sets with fill-aware costs
# ---------------------------------------------------------------------------

def _elimination_cost(adj: list[int], eliminated: int, v: int) -> int:
    """Back-degree of eliminating v after `eliminated`: vertices outside the
    eliminated set adjacent to v directly or through eliminated vertices."""
    comp = 1 << v
    reach = adj[v]
    frontier = reach & eliminated & ~comp
    while frontier:
        comp |= frontier
        grow = 0
        f = frontier
        while f:
            low = f & -f
            grow |= adj[low.bit_length() - 1]
            f ^= low
        reach |= grow
        frontier = reach & eliminated & ~comp
    return (reach & ~eliminated & ~(1 << v)).bit_count()


def _subset_dp(adj: list[int], k: int) -> dict[int, int]:
    """h[S] = best achievable width for eliminating the remaining vertices,
    given that S is already eliminated."""
    full = (1 << k) - 1
    h = {full: 0}
    for size in range(k - 1, -1, -1):
        for combo in combinations(range(k), size):
            s = 0
            for v in combo:
                s |= 1 << v
            rest = full & ~s
            best = k  # width never exceeds k-1; k acts as +infinity
            r = rest
            while r:
                low = r & -r
                v = low.bit_length() - 1
                r ^= low
                val = _elimination_cost(adj, s, v)
                sub = h[s | low]
                if sub > val:
                    val = sub
                if val < best:
                    best = val
            h[s] = best
    return h


def treewidth_exact(g: DepGraph) -> tuple[int, tuple[int, ...]]:
    """Exact treewidth plus an optimal elimination order.

    Among optimal orders the lexicographically smallest is returned, so
    downstream decompositions are deterministic.
    """
    k = g.k
    if k > MAX_TW_VERTICES:
        raise ValueError(f"treewidth DP supports at most {MAX_TW_VERTICES} vertices")
    if k == 0:
        return 0, ()
    adj = g.adjacency_masks()
    h = _subset_dp(adj, k)
    width = h[0]
    # lexicographically smallest optimal order: any next vertex is fine as
    # long as its cost and the best completion both stay within the width
    order = []
    s = 0
    for _ in range(k):
        for v in range(k):
            bit = 1 << v
            if s & bit:
                continue
            if _elimination_cost(adj, s, v) <= width and h[s | bit] <= width:
                order.append(v + 1)
                s |= bit
                break
    return width, tuple(order)


# Width-only fast path: safe degree-0/1/2 reductions, then the subset DP on the
# remaining core (memoized). Used by the exponent calculator where only the
# width matters; equivalence with treewidth_exact is covered by tests.
_CORE_MEMO: dict[tuple[int, frozenset[tuple[int, int]]], int] = {}


def treewidth_width_only(edges: frozenset[tuple[int, int]], k: int) -> int:
    adj: dict[int, set[int]] = {v: set() for v in range(1, k + 1)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    active = set(range(1, k + 1))
    lb = 0
    while active:
        deg0 = [v for v in active if not adj[v]]
        if deg0:
            for v in deg0:
                active.remove(v)
            continue
        deg1 = sorted(v for v in active if len(adj[v]) == 1)
        if deg1:
            v = deg1[0]
            (u,) = adj[v]
            adj[u].discard(v)
            del adj[v]
            active.remove(v)
            lb = max(lb, 1)
            continue
        deg2 = sorted(v for v in active if len(adj[v]) == 2)
        if deg2:
            # min degree >= 2 here, so the graph contains a cycle and tw >= 2,
            # which makes contracting a degree-2 vertex width-safe.
            v = deg2[0]
            u, w = sorted(adj[v])
            adj[u].discard(v)
            adj[w].discard(v)
            adj[u].add(w)
            adj[w].add(u)
            del adj[v]
            active.remove(v)
            lb = max(lb, 2)
            continue
        break
    if not active:
        return lb
    labels = {v: i for i, v in enumerate(sorted(active))}
    core_edges = frozenset(
        (min(labels[a], labels[b]), max(labels[a], labels[b]))
        for a in active
        for b in adj[a]
        if a < b
    )
    key = (len(active), core_edges)
    if key not in _CORE_MEMO:
        masks = [0] * len(active)
        for a, b in core_edges:
            masks[a] |= 1 << b
            masks[b] |= 1 << a
        _CORE_MEMO[key] = _subset_dp(masks, len(active))[0]
    return max(lb, _CORE_MEMO[key])


# ---------------------------------------------------------------------------
# Tree decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted tree of bags; parent[root] == -1."""

    k: int
    bags: tuple[frozenset[int], ...]
    parent: tuple[int, ...]
    root: int

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.bags]
        for i, p in enumerate(self.parent):
            if p >= 0:
                ch[p].append(i)
        return ch

    def tree_edges(self) -> list[tuple[int, int]]:
        return [(p, i) for i, p in enumerate(self.parent) if p >= 0]


def decomposition_from_order(g: DepGraph, order: tuple[int, ...]) -> TreeDecomposition:
    """Standard fill-in construction; the width equals the order's elimination width."""
    if sorted(order) != list(range(1, g.k + 1)):
        raise ValueError("order must be a permutation of 1..k")
    nbrs: dict[int, set[int]] = {v: set() for v in range(1, g.k + 1)}
    for a, b in g.edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    position = {v: i for i, v in enumerate(order)}
    bags: list[frozenset[int]] = []
    later_sets: list[set[int]] = []
    for v in order:
        later = {u for u in nbrs[v] if position[u] > position[v]}
        bags.append(frozenset({v} | later))
        later_sets.append(later)
        for u in later:
            nbrs[u].discard(v)
            nbrs[u].update(later - {u})
    parent = [-1] * g.k
    for i in range(g.k - 1):
        later = later_sets[i]
        if later:
            anchor = min(later, key=position.__getitem__)
            parent[i] = position[anchor]
        else:
            parent[i] = i + 1
    return TreeDecomposition(k=g.k, bags=tuple(bags), parent=tuple(parent), root=g.k - 1)


LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


@dataclass(frozen=True)
class NiceNode:
    kind: str
    bag: frozenset[int]
    vertex: int | None
    children: tuple[int, ...]


@dataclass(frozen=True)
class NiceTreeDecomposition:
    """Rooted decomposition whose nodes are leaf/introduce/forget/join and whose
    root and leaf bags are empty."""

    k: int
    nodes: tuple[NiceNode, ...]
    root: int

    @property
    def width(self) -> int:
        return max(len(nd.bag) for nd in self.nodes) - 1

    def postorder(self) -> list[int]:
        out: list[int] = []
        stack = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
                continue
            stack.append((node, True))
            for c in self.nodes[node].children:
                stack.append((c, False))
        return out


class _NiceBuilder:
    def __init__(self, k: int):
        self.k = k
        self.nodes: list[NiceNode] = []

    def add(self, kind, bag, vertex, children) -> int:
        self.nodes.append(NiceNode(kind, frozenset(bag), vertex, tuple(children)))
        return len(self.nodes) - 1

    def chain_from_empty(self, bag: frozenset[int]) -> int:
        top = self.add(LEAF, frozenset(), None, ())
        cur: set[int] = set()
        for v in sorted(bag):
            cur.add(v)
            top = self.add(INTRODUCE, frozenset(cur), v, (top,))
        return top

    def adapt(self, top: int, from_bag: frozenset[int], to_bag: frozenset[int]) -> int:
        cur = set(from_bag)
        for v in sorted(from_bag - to_bag):
            cur.remove(v)
            top = self.add(FORGET, frozenset(cur), v, (top,))
        for v in sorted(to_bag - from_bag):
            cur.add(v)
            top = self.add(INTRODUCE, frozenset(cur), v, (top,))
        return top


def to_nice(d: TreeDecomposition) -> NiceTreeDecomposition:
    """Convert to a nice decomposition of equal width with O(k * width) nodes."""
    builder = _NiceBuilder(d.k)
    children = d.children()

    def build(orig: int) -> int:
        bag = d.bags[orig]
        kid_tops = [
            builder.adapt(build(kid), d.bags[kid], bag) for kid in children[orig]
        ]
        if not kid_tops:
            return builder.chain_from_empty(bag)
        top = kid_tops[0]
        for other in kid_tops[1:]:
            top = builder.add(JOIN, bag, None, (top, other))
        return top

    top = build(d.root)
    top = builder.adapt(top, d.bags[d.root], frozenset())
    return NiceTreeDecomposition(k=d.k, nodes=tuple(builder.nodes), root=top)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _decomposition_parts(d):
    if isinstance(d, NiceTreeDecomposition):
        bags = [nd.bag for nd in d.nodes]
        edges = [(i, c) for i, nd in enumerate(d.nodes) for c in nd.children]
        return bags, edges, d
    bags = list(d.bags)
    return bags, d.tree_edges(), None


def validate_decomposition(g: DepGraph, d) -> tuple[bool, list[str]]:
    """Check the bag cover/edge/connectivity conditions, the separator property
    of every tree edge, and (for nice decompositions) the node-kind rules.

    Returns (ok, diagnostics); diagnostics name each offending vertex or edge.
    """
    bags, tree_edges, nice = _decomposition_parts(d)
    diags: list[str] = []
    nodes = range(len(bags))

    covered = set().union(*bags) if bags else set()
    for v in range(1, g.k + 1):
        if v not in covered:
            diags.append(f"vertex {v} appears in no bag")
    for a, b in g.edges:
        if not any(a in bag and b in bag for bag in bags):
            diags.append(f"edge ({a},{b}) is contained in no bag")

    adj: dict[int, list[int]] = {i: [] for i in nodes}
    for p, c in tree_edges:
        adj[p].append(c)
        adj[c].append(p)
    for v in range(1, g.k + 1):
        holding = [i for i in nodes if v in bags[i]]
        if not holding:
            continue
        seen = {holding[0]}
        stack = [holding[0]]
        holding_set = set(holding)
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w in holding_set and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != holding_set:
            diags.append(f"bags containing vertex {v} are not connected in the tree")

    # separator property: removing a tree edge splits the vertex sets so that
    # their intersection lies inside the shared bag intersection
    children_map: dict[int, list[int]] = {i: [] for i in nodes}
    for p, c in tree_edges:
        children_map[p].append(c)

    def subtree_union(c: int) -> set[int]:
        out: set[int] = set()
        stack = [c]
        while stack:
            u = stack.pop()
            out |= bags[u]
            stack.extend(children_map[u])
        return out

    for p, c in tree_edges:
        below = subtree_union(c)
        above = set()
        reach = {c}
        stack = [p]
        while stack:
            u = stack.pop()
            if u in reach:
                continue
            reach.add(u)
            above |= bags[u]
            stack.extend(w for w in adj[u] if w not in reach)
        overlap = below & above
        allowed = bags[p] & bags[c]
        if not overlap <= allowed:
            diags.append(
                f"tree edge ({p},{c}) separator violated by vertices "
                f"{sorted(overlap - allowed)}"
            )
        sep = allowed
        for a, b in g.edges:
            if a in below - sep and b in above - sep or b in below - sep and a in above - sep:
                diags.append(f"edge ({a},{b}) crosses the separation at tree edge ({p},{c})")

    if nice is not None:
        for i, nd in enumerate(nice.nodes):
            if nd.kind == LEAF:
                if nd.bag or nd.children:
                    diags.append(f"leaf node {i} must have an empty bag and no children")
            elif nd.kind == INTRODUCE:
                if len(nd.children) != 1:
                    diags.append(f"introduce node {i} must have one child")
                else:
                    child = nice.nodes[nd.children[0]]
                    if nd.vertex not in nd.bag or child.bag != nd.bag - {nd.vertex}:
                        diags.append(f"introduce node {i} bag rule violated")
            elif nd.kind == FORGET:
                if len(nd.children) != 1:
                    diags.append(f"forget node {i} must have one child")
                else:
                    child = nice.nodes[nd.children[0]]
                    if nd.vertex in nd.bag or child.bag != nd.bag | {nd.vertex}:
                        diags.append(f"forget node {i} bag rule violated")
            elif nd.kind == JOIN:
                if len(nd.children) != 2 or any(
                    nice.nodes[c].bag != nd.bag for c in nd.children
                ):
                    diags.append(f"join node {i} must have two children with equal bags")
            else:
                diags.append(f"node {i} has unknown kind {nd.kind!r}")
        if nice.nodes[nice.root].bag:
            diags.append("root bag must be empty")

    return not diags, diags
