"""Bipartite incidence graphs of pi and the Tel-A-graphs built from them.

Vertices and edges are addressed by index; labels are only for display.  A
Tel-A-graph stores each edge as ``(u, v)`` together with the two matrix
coefficients at its ends.  Orienting flips the sign of some vertices so that
every edge has one ``+1`` end and one ``-1`` end; the edge then runs from the
``-1`` end to the ``+1`` end and is stored as ``(tail, head)``.

In the graphlike case the vertices are tree monomials (matrix columns), in
the dual case relation monomials (matrix rows), so the same flip search
serves both.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .linalg import SparseMatrix, Subspace, bareiss_echelon
from .presentation import PiMatrix, Presentation

GRAPHLIKE = "graphlike"
DUAL = "dual"


class WrongKind(ValueError):
    pass


class NotPlusMinusOne(ValueError):
    pass


class NoConsistentOrientation(ValueError):
    def __init__(self, msg: str, witness: "Cycle"):
        super().__init__(msg)
        self.witness = witness


class OrientationMissing(ValueError):
    pass


class InternalInconsistency(RuntimeError):
    pass


# -- matrices in the alias frame ---------------------------------------------

def labeled_matrix(p: Presentation, n: int, aliases: bool = True) -> SparseMatrix:
    """``pi(n)`` with alias labels, order and signs when the aliases cover arity ``n``.

    Falls back to the basis order with monomial encodings as labels.
    """
    pm = p.assemble_pi(n)
    if not aliases:
        return pm.matrix
    rf = p.alias_frame("module", n)
    cf = p.alias_frame("tree", n)
    if rf is None and cf is None:
        return pm.matrix
    ridx = p.module_index(n)
    cidx = p.tree_index(n)
    if rf is not None:
        row_order = [ridx[t] for t, _ in rf.values()]
        row_signs = [s for _, s in rf.values()]
        row_labels = list(rf)
    else:
        row_order, row_signs, row_labels = list(range(pm.matrix.rows)), None, None
    if cf is not None:
        col_order = [cidx[t] for t, _ in cf.values()]
        col_signs = [s for _, s in cf.values()]
        col_labels = list(cf)
    else:
        col_order, col_signs, col_labels = list(range(pm.matrix.cols)), None, None
    return pm.matrix.permuted(row_order, col_order, row_signs, col_signs, row_labels, col_labels)


# -- bipartite graph ---------------------------------------------------------

@dataclass(frozen=True)
class BipartiteGraph:
    tree_vertices: tuple
    relation_vertices: tuple
    edges: tuple  # (tree index, relation index, coefficient)
    matrix: SparseMatrix

    def tree_degree(self, j: int) -> int:
        return sum(1 for t, _, _ in self.edges if t == j)

    def relation_degree(self, i: int) -> int:
        return sum(1 for _, r, _ in self.edges if r == i)


def bipartite(pm) -> BipartiteGraph:
    m = pm.matrix if isinstance(pm, PiMatrix) else pm
    edges = tuple(sorted((j, i, v) for (i, j), v in m.entries.items()))
    return BipartiteGraph(tuple(m.col_labels), tuple(m.row_labels), edges, m)


def classify(bg: BipartiteGraph) -> str:
    rdeg = [0] * len(bg.relation_vertices)
    tdeg = [0] * len(bg.tree_vertices)
    for t, r, _ in bg.edges:
        rdeg[r] += 1
        tdeg[t] += 1
    graphlike = all(d == 2 for d in rdeg)
    dual = all(d == 2 for d in tdeg)
    if graphlike and dual:
        return "both"
    if graphlike:
        return "graphlike"
    if dual:
        return "dual_graphlike"
    return "neither"


# -- Tel-A-graphs ------------------------------------------------------------

@dataclass(frozen=True)
class TelAGraph:
    kind: str
    vertices: tuple  # labels
    edges: tuple  # (u, v); (tail, head) once oriented
    edge_labels: tuple
    ends: tuple = ()  # (coefficient at u, coefficient at v)
    flips: tuple | None = None  # per vertex +1/-1 once oriented
    source: SparseMatrix | None = None

    def __post_init__(self):
        if self.kind not in (GRAPHLIKE, DUAL):
            raise WrongKind(f"unknown kind {self.kind!r}")
        if not self.ends:
            object.__setattr__(self, "ends", tuple((Fraction(-1), Fraction(1)) for _ in self.edges))
        if not self.edge_labels:
            object.__setattr__(self, "edge_labels", tuple(str(e + 1) for e in range(len(self.edges))))
        if len(self.ends) != len(self.edges) or len(self.edge_labels) != len(self.edges):
            raise ValueError("edge data of unequal length")
        for u, v in self.edges:
            if not (0 <= u < len(self.vertices) and 0 <= v < len(self.vertices)):
                raise IndexError(f"edge ({u}, {v}) has an endpoint outside the vertex set")

    @property
    def oriented(self) -> bool:
        return self.flips is not None

    def incident(self, v: int) -> list[int]:
        return [e for e, (a, b) in enumerate(self.edges) if a == v or b == v]

    def degrees(self) -> list[int]:
        deg = [0] * len(self.vertices)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def components(self) -> list[list[int]]:
        return [sorted(c) for c in _bfs_forest(self)[2]]

    def vertex_index(self, label: str) -> int:
        return self.vertices.index(label)


def tel_a(bg: BipartiteGraph, kind: str) -> TelAGraph:
    cls = classify(bg)
    if kind == GRAPHLIKE and cls not in ("graphlike", "both"):
        raise WrongKind(f"relations are {cls}, not graphlike")
    if kind == DUAL and cls not in ("dual_graphlike", "both"):
        raise WrongKind(f"relations are {cls}, not dual graphlike")
    if kind not in (GRAPHLIKE, DUAL):
        raise WrongKind(f"unknown kind {kind!r}")
    # the side of degree two becomes the edges
    if kind == GRAPHLIKE:
        vertices, edge_side = bg.tree_vertices, bg.relation_vertices
        pairs = [(r, t, c) for t, r, c in bg.edges]
    else:
        vertices, edge_side = bg.relation_vertices, bg.tree_vertices
        pairs = [(t, r, c) for t, r, c in bg.edges]
    ends_of: dict = {}
    for e, v, c in pairs:
        ends_of.setdefault(e, []).append((v, c))
    edges, labels, ends = [], [], []
    for e in range(len(edge_side)):
        (u, cu), (v, cv) = sorted(ends_of[e])
        edges.append((u, v))
        labels.append(edge_side[e])
        ends.append((cu, cv))
    return TelAGraph(kind, tuple(vertices), tuple(edges), tuple(labels), tuple(ends), None, bg.matrix)


# -- spanning forests and cycles ---------------------------------------------

@dataclass(frozen=True)
class Cycle:
    """Closed edge path: ``steps[k] = (edge, +1 | -1)`` leaving ``vertices[k]``."""
    vertices: tuple
    steps: tuple

    def __len__(self) -> int:
        return len(self.steps)

    def edge_vector(self, n_edges: int) -> list[Fraction]:
        v = [Fraction(0)] * n_edges
        for e, s in self.steps:
            v[e] += s
        return v

    def reversed(self) -> "Cycle":
        verts = (self.vertices[0],) + tuple(reversed(self.vertices[1:]))
        steps = tuple((e, -s) for e, s in reversed(self.steps))
        return Cycle(verts, steps)


def _bfs_forest(g: TelAGraph):
    """Breadth-first forest: parent edge per vertex, visit order, components."""
    adj: list[list[tuple[int, int]]] = [[] for _ in g.vertices]
    for e, (a, b) in enumerate(g.edges):
        adj[a].append((e, b))
        if a != b:
            adj[b].append((e, a))
    parent: dict[int, tuple[int, int] | None] = {}
    comps = []
    for root in range(len(g.vertices)):
        if root in parent:
            continue
        parent[root] = None
        comp = [root]
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for e, y in sorted(adj[x]):
                if y not in parent:
                    parent[y] = (e, x)
                    comp.append(y)
                    queue.append(y)
        comps.append(comp)
    return parent, adj, comps


def _path_to_root(parent, v: int) -> list[tuple[int, int]]:
    """``[(vertex, parent edge), ...]`` from ``v`` up to its root."""
    out = []
    while parent[v] is not None:
        e, up = parent[v]
        out.append((v, e))
        v = up
    out.append((v, -1))
    return out


def _step_sign(g: TelAGraph, e: int, frm: int) -> int:
    return 1 if g.edges[e][0] == frm else -1


def _fundamental_cycle(g: TelAGraph, parent, e: int) -> Cycle:
    a, b = g.edges[e]
    if a == b:
        return Cycle((a,), ((e, 1),))
    pa = _path_to_root(parent, a)
    pb = _path_to_root(parent, b)
    on_a = {v: k for k, (v, _) in enumerate(pa)}
    k_b = next(k for k, (v, _) in enumerate(pb) if v in on_a)
    lca = pb[k_b][0]
    k_a = on_a[lca]
    # a --e--> b, then b up to lca, then lca down to a
    verts = [a, b]
    steps = [(e, _step_sign(g, e, a))]
    for v, pe in pb[:k_b]:
        up = parent[v][1]
        steps.append((pe, _step_sign(g, pe, v)))
        verts.append(up)
    down = pa[:k_a]
    for v, pe in reversed(down):
        up = parent[v][1]
        steps.append((pe, _step_sign(g, pe, up)))
        verts.append(v)
    verts.pop()  # back at a
    return _normalize_cycle(g, Cycle(tuple(verts), tuple(steps)))


def _normalize_cycle(g: TelAGraph, c: Cycle) -> Cycle:
    """Start at the lowest-index vertex; leave along the lower-index edge."""
    k = min(range(len(c.vertices)), key=lambda i: c.vertices[i])
    rot = Cycle(c.vertices[k:] + c.vertices[:k], c.steps[k:] + c.steps[:k])
    rev = rot.reversed()
    if len(rot.steps) > 1 and rev.steps[0][0] < rot.steps[0][0]:
        return rev
    return rot


def cycle_basis(g: TelAGraph) -> list[Cycle]:
    """Fundamental cycles of the breadth-first spanning forest, by non-tree edge index."""
    parent, _, _ = _bfs_forest(g)
    tree_edges = {pe[0] for pe in parent.values() if pe is not None}
    return [_fundamental_cycle(g, parent, e) for e in range(len(g.edges)) if e not in tree_edges]


def cycle_rank(g: TelAGraph) -> int:
    return len(g.edges) - len(g.vertices) + len(g.components())


def _shortest_paths(g: TelAGraph, root: int):
    parent, dist = {root: None}, {root: 0}
    queue = deque([root])
    adj = _bfs_forest(g)[1]
    while queue:
        x = queue.popleft()
        for e, y in sorted(adj[x]):
            if y not in parent:
                parent[y] = (e, x)
                dist[y] = dist[x] + 1
                queue.append(y)
    return parent, dist


def minimal_cycle_basis(g: TelAGraph) -> list[Cycle]:
    """Cycle basis of least total length (Horton candidates, greedy over the rationals)."""
    candidates = []
    for root in range(len(g.vertices)):
        parent, dist = _shortest_paths(g, root)
        for e, (a, b) in enumerate(g.edges):
            if a not in parent or b not in parent:
                continue
            if parent[a] is not None and parent[a][0] == e or parent[b] is not None and parent[b][0] == e:
                continue
            c = _fundamental_cycle(g, parent, e)
            if len(set(c.vertices)) == len(c.vertices):
                candidates.append(c)
    candidates.sort(key=lambda c: (len(c), c.vertices, c.steps))
    span = Subspace.zero(len(g.edges))
    out = []
    target = cycle_rank(g)
    for c in candidates:
        if len(out) == target:
            break
        v = c.edge_vector(len(g.edges))
        if not span.contains(v):
            span = span.extended([v])
            out.append(c)
    return out


def cycle_space(g: TelAGraph, cycles: Sequence[Cycle]) -> Subspace:
    return Subspace(len(g.edges), [c.edge_vector(len(g.edges)) for c in cycles])


def cycle_from_vertices(g: TelAGraph, labels: Sequence[str]) -> Cycle:
    """Closed path through the labeled vertices in order; consecutive vertices need a unique edge."""
    idx = [g.vertex_index(l) for l in labels]
    steps = []
    for k, a in enumerate(idx):
        b = idx[(k + 1) % len(idx)]
        es = [e for e, (x, y) in enumerate(g.edges) if {x, y} == {a, b}]
        if len(es) != 1:
            raise ValueError(f"{len(es)} edges join {g.vertices[a]} and {g.vertices[b]}")
        steps.append((es[0], _step_sign(g, es[0], a)))
    return Cycle(tuple(idx), tuple(steps))


def girth(g: TelAGraph) -> int | None:
    best = None
    for e, (a, b) in enumerate(g.edges):
        if a == b:
            return 1
    seen: dict = {}
    for e, (a, b) in enumerate(g.edges):
        key = (min(a, b), max(a, b))
        if key in seen:
            return 2
        seen[key] = e
    for root in range(len(g.vertices)):
        parent, dist = _shortest_paths(g, root)
        for e, (a, b) in enumerate(g.edges):
            if a not in dist or b not in dist:
                continue
            if parent.get(a) and parent[a][0] == e or parent.get(b) and parent[b][0] == e:
                continue
            length = dist[a] + dist[b] + 1
            if best is None or length < best:
                best = length
    return best


# -- orientation -------------------------------------------------------------

def orient(g: TelAGraph, pm=None) -> TelAGraph:
    """Flip vertex signs so each edge has ends ``-1`` and ``+1``; direct edges ``-1 -> +1``.

    Flips are propagated along the breadth-first forest with every root left
    unflipped, then all remaining edges are checked.  ``pm`` is accepted for
    symmetry with the construction and is only used to double-check the
    coefficients.
    """
    if pm is not None:
        m = pm.matrix if isinstance(pm, PiMatrix) else pm
        if g.source is not None and m.entries != g.source.entries:
            raise ValueError("matrix does not match the graph's source")
    for e, (cu, cv) in enumerate(g.ends):
        if abs(cu) != 1 or abs(cv) != 1:
            raise NotPlusMinusOne(f"edge {g.edge_labels[e]} has coefficients {cu}, {cv}")
    parent, _, comps = _bfs_forest(g)
    flips = [0] * len(g.vertices)
    for comp in comps:
        flips[comp[0]] = 1
        for v in comp[1:]:
            e, up = parent[v]
            a, b = g.edges[e]
            cu, cv = g.ends[e]
            c_up, c_v = (cu, cv) if a == up else (cv, cu)
            flips[v] = int(-flips[up] * c_up / c_v)
    for e, (a, b) in enumerate(g.edges):
        cu, cv = g.ends[e]
        if flips[a] * cu != -flips[b] * cv:
            witness = _fundamental_cycle(g, parent, e)
            raise NoConsistentOrientation(
                f"edge {g.edge_labels[e]} closes a cycle with an odd number of sign clashes", witness)
    edges, ends = [], []
    for e, (a, b) in enumerate(g.edges):
        cu, cv = g.ends[e]
        if flips[a] * cu < 0:
            edges.append((a, b))
            ends.append((cu, cv))
        else:
            edges.append((b, a))
            ends.append((cv, cu))
    return replace(g, edges=tuple(edges), ends=tuple(ends), flips=tuple(flips))


def flipped(g: TelAGraph) -> list[str]:
    if not g.oriented:
        raise OrientationMissing("graph is not oriented")
    return [g.vertices[v] for v, f in enumerate(g.flips) if f < 0]


def component_sums(g: TelAGraph) -> list[list[Fraction]]:
    """Signed vertex sums per component of an oriented dual graph, in row coordinates."""
    if g.kind != DUAL:
        raise WrongKind("component sums need the dual kind")
    if not g.oriented:
        raise OrientationMissing("orient the graph first")
    out = []
    for comp in g.components():
        vec = [Fraction(0)] * len(g.vertices)
        for v in comp:
            vec[v] = Fraction(g.flips[v])
        if g.source is not None and any(g.source.apply(vec)):
            raise InternalInconsistency("component sum is not in the kernel")
        out.append(vec)
    return out


def cycle_module_vector(g: TelAGraph, c: Cycle) -> list[Fraction]:
    """Row-coordinate vector of a cycle of an oriented graphlike graph."""
    if g.kind != GRAPHLIKE:
        raise WrongKind("cycles are kernel vectors only in the graphlike case")
    if not g.oriented:
        raise OrientationMissing("orient the graph first")
    return c.edge_vector(len(g.edges))


# -- homology ----------------------------------------------------------------

@dataclass(frozen=True)
class H1:
    rank_q: int
    rank_z: int
    torsion_free: bool


def incidence_matrix(g: TelAGraph) -> list[list[int]]:
    """Edges by vertices, ``-1`` at the tail and ``+1`` at the head (loops are zero rows)."""
    rows = []
    for a, b in g.edges:
        r = [0] * len(g.vertices)
        r[a] -= 1
        r[b] += 1
        rows.append(r)
    return rows


def h1_dims(g) -> H1:
    """First homology of the graph over the rationals and the integers.

    The integral rank is read off the fundamental cycles; they form a
    Z-basis of the cycle group when the square block on the non-tree edges
    is unimodular, which certifies the absence of torsion.
    """
    if isinstance(g, BipartiteGraph):
        g = tel_a(g, GRAPHLIKE)
    bd = incidence_matrix(g)
    r, _ = bareiss_echelon(bd) if bd else (0, [])
    rank_q = len(g.edges) - r
    cycles = cycle_basis(g)
    parent, _, _ = _bfs_forest(g)
    tree_edges = {pe[0] for pe in parent.values() if pe is not None}
    cotree = [e for e in range(len(g.edges)) if e not in tree_edges]
    block = [[int(c.edge_vector(len(g.edges))[e]) for e in cotree] for c in cycles]
    free = _determinant(block) in (1, -1) if block else True
    # every cycle vector must be integral
    free = free and all(abs(s) == 1 for c in cycles for _, s in c.steps)
    return H1(rank_q, len(cycles), free)


def _determinant(rows: list[list[int]]) -> int:
    n = len(rows)
    if n == 0:
        return 1
    m = [[Fraction(x) for x in row] for row in rows]
    det = Fraction(1)
    for i in range(n):
        piv = next((k for k in range(i, n) if m[k][i]), None)
        if piv is None:
            return 0
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        for k in range(i + 1, n):
            f = m[k][i] / m[i][i]
            if f:
                m[k] = [x - f * y for x, y in zip(m[k], m[i])]
    return int(det)


# -- certificates and export -------------------------------------------------

def cycle_text(g: TelAGraph, c: Cycle) -> str:
    parts = [g.vertices[c.vertices[0]]]
    for k, (e, s) in enumerate(c.steps):
        nxt = c.vertices[(k + 1) % len(c.vertices)]
        arrow = f" --{g.edge_labels[e]}--> " if s > 0 else f" <--{g.edge_labels[e]}-- "
        parts.append(arrow + g.vertices[nxt])
    return "".join(parts)


@dataclass
class Certificate:
    arity: int
    cycles: list = field(default_factory=list)  # diagram strings
    dim_D: int = 0
    dim_C: int = 0

    @property
    def consistent(self) -> bool:
        return len(self.cycles) == self.dim_D

    def to_text(self) -> str:
        lines = [f"{len(self.cycles)} diagrams at arity {self.arity}"]
        for i, d in enumerate(self.cycles, 1):
            lines.append(f"D{i}: {d}")
        verdict = "agrees" if self.consistent else "DISAGREES"
        lines.append(f"cycle count {len(self.cycles)} {verdict} with dim D = {self.dim_D} (dim C = {self.dim_C})")
        return "\n".join(lines) + "\n"


def coherence_certificate(p: Presentation, n: int) -> Certificate:
    from .coherence import coherence_constraints

    g = orient(tel_a(bipartite(labeled_matrix(p, n)), GRAPHLIKE))
    cycles = minimal_cycle_basis(g)
    for c in cycles:
        if any(g.source.apply(cycle_module_vector(g, c))):
            raise InternalInconsistency("cycle is not a kernel vector")
    rep = coherence_constraints(p, n)
    return Certificate(n, [cycle_text(g, c) for c in cycles], rep.dim_D, rep.dim_C)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: TelAGraph, name: str = "G") -> str:
    directed = g.oriented
    head = "digraph" if directed else "graph"
    arrow = "->" if directed else "--"
    lines = [f"{head} {_quote(name)} {{"]
    for v, lab in enumerate(g.vertices):
        lines.append(f"  v{v} [label={_quote(lab)}];")
    for e, (a, b) in enumerate(g.edges):
        lines.append(f"  v{a} {arrow} v{b} [label={_quote(g.edge_labels[e])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def bipartite_dot(bg: BipartiteGraph, name: str = "T") -> str:
    lines = [f"graph {_quote(name)} {{"]
    for j, lab in enumerate(bg.tree_vertices):
        lines.append(f"  t{j} [label={_quote(lab)}, shape=box];")
    for i, lab in enumerate(bg.relation_vertices):
        lines.append(f"  r{i} [label={_quote(lab)}];")
    for t, r, c in bg.edges:
        lines.append(f"  t{t} -- r{r} [label={_quote(str(c))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
