"""Periodic honeycomb lattice.

Unit cell ``(x, y)`` holds an A vertex and a B vertex.  Edge ``3*c + k`` (cell
index ``c = x*ly + y``) always points from A to B:

* k = 0: A(x, y) -> B(x, y)
* k = 1: A(x, y) -> B(x-1, y)
* k = 2: A(x, y) -> B(x, y-1)

Plaquette ``p(x, y)`` is the hexagon whose boundary, counter-clockwise and
starting at the top, visits B(x,y), A(x,y), B(x,y-1), A(x+1,y-1), B(x+1,y-1),
A(x+1,y).  An edge is "positive" for a plaquette when it runs
counter-clockwise around it.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .groups import AbelianGroup


@dataclass(frozen=True)
class Plaquette:
    index: int
    vertices: tuple[int, ...]   # counter-clockwise
    edges: tuple[int, ...]      # edges[k] joins vertices[k] -> vertices[k+1]
    ccw: tuple[bool, ...]       # edge k runs counter-clockwise
    legs: tuple[int, ...]       # legs[k] is the third edge at vertices[k]


@dataclass
class HoneycombTorus:
    lx: int
    ly: int
    tails: dict = field(default_factory=dict)  # plaquette -> Tail

    def __post_init__(self):
        if self.lx < 2 or self.ly < 2:
            raise ValueError("honeycomb torus needs lx >= 2 and ly >= 2")
        lx, ly = self.lx, self.ly
        self.n_cells = lx * ly
        self.n_vertices = 2 * self.n_cells
        self.n_edges = 3 * self.n_cells
        self.n_plaquettes = self.n_cells
        tails, heads = [], []
        for x in range(lx):
            for y in range(ly):
                a = self.A(x, y)
                for b in (self.B(x, y), self.B(x - 1, y), self.B(x, y - 1)):
                    tails.append(a)
                    heads.append(b)
        self.edge_tail = np.array(tails)
        self.edge_head = np.array(heads)
        inc = [[] for _ in range(self.n_vertices)]
        for e, (t, h) in enumerate(zip(tails, heads)):
            inc[t].append(e)
            inc[h].append(e)
        self.incident = [tuple(v) for v in inc]
        self.plaquettes = [self._make_plaquette(x, y) for x in range(lx) for y in range(ly)]
        # each edge borders exactly one plaquette on each side
        pos = -np.ones(self.n_edges, dtype=int)
        neg = -np.ones(self.n_edges, dtype=int)
        for p in self.plaquettes:
            for e, c in zip(p.edges, p.ccw):
                (pos if c else neg)[e] = p.index
        assert (pos >= 0).all() and (neg >= 0).all()
        self.edge_pos = pos   # plaquette around which the edge runs counter-clockwise
        self.edge_neg = neg

    # indexing
    def cell(self, x: int, y: int) -> int:
        return (x % self.lx) * self.ly + (y % self.ly)

    def A(self, x, y):
        return 2 * self.cell(x, y)

    def B(self, x, y):
        return 2 * self.cell(x, y) + 1

    def edge(self, x, y, k):
        return 3 * self.cell(x, y) + k

    def plaquette(self, x, y) -> int:
        return self.cell(x, y)

    def coords(self, p: int) -> tuple[int, int]:
        return divmod(p, self.ly)

    def is_A(self, v: int) -> bool:
        return v % 2 == 0

    def _make_plaquette(self, x, y) -> Plaquette:
        verts = (self.B(x, y), self.A(x, y), self.B(x, y - 1),
                 self.A(x + 1, y - 1), self.B(x + 1, y - 1), self.A(x + 1, y))
        edges = (self.edge(x, y, 0), self.edge(x, y, 2), self.edge(x + 1, y - 1, 1),
                 self.edge(x + 1, y - 1, 0), self.edge(x + 1, y, 2), self.edge(x + 1, y, 1))
        ccw, legs = [], []
        for k, e in enumerate(edges):
            t, h = self.edge_tail[e], self.edge_head[e]
            v0, v1 = verts[k], verts[(k + 1) % 6]
            assert {t, h} == {v0, v1}, "plaquette boundary is inconsistent"
            ccw.append(bool(t == v0))
        for k, v in enumerate(verts):
            ring = {edges[k - 1], edges[k]}
            (leg,) = [e for e in self.incident[v] if e not in ring]
            legs.append(leg)
        return Plaquette(self.cell(x, y), verts, edges, tuple(ccw), tuple(legs))

    # dual lattice
    @cached_property
    def dual_adjacency(self) -> list[list[tuple[int, int]]]:
        """``adj[p]`` lists ``(q, edge)`` for each edge of p, in boundary order."""
        adj = [[] for _ in range(self.n_plaquettes)]
        for p in self.plaquettes:
            for e, c in zip(p.edges, p.ccw):
                q = self.edge_neg[e] if c else self.edge_pos[e]
                adj[p.index].append((int(q), e))
        return adj

    def orientation(self, e: int, p: int) -> int:
        """+1 if edge e runs counter-clockwise around plaquette p, -1 if clockwise."""
        if self.edge_pos[e] == p:
            return 1
        if self.edge_neg[e] == p:
            return -1
        raise ValueError("edge does not border plaquette")

    def dual_path(self, p: int, q: int, within=None) -> list[tuple[int, int]]:
        """Shortest dual path from p to q as ``(edge, sign)`` pairs.

        ``sign`` is the orientation of the edge relative to the plaquette the
        path is leaving.  Ties are broken by lowest edge index.  ``within``
        optionally restricts the plaquettes the path may visit.
        """
        if p == q:
            return []
        prev = {p: None}
        queue = deque([p])
        while queue:
            u = queue.popleft()
            for w, e in sorted(self.dual_adjacency[u], key=lambda t: t[1]):
                if w not in prev and (within is None or w in within):
                    prev[w] = (u, e)
                    queue.append(w)
        if q not in prev:
            raise ValueError("no dual path between the plaquettes")
        path = []
        w = q
        while prev[w] is not None:
            u, e = prev[w]
            path.append((e, self.orientation(e, u)))
            w = u
        return path[::-1]

    def path_endpoints(self, path) -> dict[int, int]:
        """Boundary of a dual path: plaquette -> net multiplicity (start -1, end +1)."""
        out: dict[int, int] = {}
        for e, s in path:
            start = self.edge_pos[e] if s > 0 else self.edge_neg[e]
            end = self.edge_neg[e] if s > 0 else self.edge_pos[e]
            out[int(start)] = out.get(int(start), 0) - 1
            out[int(end)] = out.get(int(end), 0) + 1
        return {k: v for k, v in out.items() if v}

    def plaquette_distance(self, p: int, q: int) -> int:
        return len(self.dual_path(p, q))

    # tails
    def add_tail(self, p: int, edge: int | None = None) -> "Tail":
        """Materialize a tail on plaquette p.

        The tail hangs from a junction that splits one boundary edge of p
        (``edge``, default the first boundary edge).  The original edge
        register keeps the segment touching the edge's A vertex; a new
        register holds the segment touching the B vertex, and another the
        tail itself, oriented from the junction into p.
        """
        if p in self.tails:
            return self.tails[p]
        P = self.plaquettes[p]
        edge = P.edges[0] if edge is None else edge
        if edge not in P.edges:
            raise ValueError("tail edge must bound the plaquette")
        if any(t.edge == edge for t in self.tails.values()):
            raise ValueError("edge already carries a tail junction")
        base = self.n_registers
        t = Tail(p, edge, base, base + 1, self.n_vertices + len(self.tails))
        self.tails[p] = t
        return t

    @property
    def n_registers(self) -> int:
        return self.n_edges + 2 * len(self.tails)

    def tail_on_edge(self, e: int):
        for t in self.tails.values():
            if t.edge == e:
                return t
        return None

    def edge_registers(self, e: int, v: int) -> int:
        """Register of edge e's segment touching lattice vertex v."""
        t = self.tail_on_edge(e)
        if t is None or self.edge_tail[e] == v:
            return e
        return t.segment

    def vertex_legs(self, v: int) -> list[tuple[int, bool]]:
        """``(register, outgoing)`` for the three registers meeting at vertex v.

        ``outgoing`` is True when the register's orientation points away
        from v.  Junction vertices are numbered after the lattice vertices.
        """
        if v < self.n_vertices:
            return [(self.edge_registers(e, v), bool(self.edge_tail[e] == v)) for e in self.incident[v]]
        for t in self.tails.values():
            if t.junction == v:
                return [(t.edge, False), (t.segment, True), (t.register, True)]
        raise ValueError("no such vertex")

    @property
    def n_all_vertices(self) -> int:
        return self.n_vertices + len(self.tails)

    def ring(self, p: int):
        """Boundary of plaquette p with tails taken into account.

        Returns ``(segments, legs, own)``: ``segments`` lists
        ``(register, ccw)`` counter-clockwise, ``legs[k]`` is
        ``(register, outward)`` for the ring vertex between segments k-1 and
        k, and ``own`` is the ring position of p's own tail junction (whose
        leg points into p) or None.
        """
        P = self.plaquettes[p]
        segs, legs, own = [], [], None
        for k, e in enumerate(P.edges):
            v = P.vertices[k]
            legs.append((self.edge_registers(P.legs[k], v), self.is_A(v)))
            t = self.tail_on_edge(e)
            if t is None:
                segs.append((e, P.ccw[k]))
                continue
            first, second = (e, t.segment) if P.ccw[k] else (t.segment, e)
            segs.append((first, P.ccw[k]))
            if t.plaquette == p:
                own = len(legs)
                legs.append((t.register, False))
            else:
                legs.append((t.register, True))
            segs.append((second, P.ccw[k]))
        return segs, legs, own

    def region(self, plaquettes) -> "Region":
        return Region(self, frozenset(int(p) for p in plaquettes))

    def chain_boundary(self, chain: "Chain1") -> dict[int, int]:
        return chain.boundary()


@dataclass(frozen=True)
class Tail:
    plaquette: int
    edge: int        # split edge; its register keeps the A-side segment
    segment: int     # register of the B-side segment
    register: int    # register of the tail, oriented junction -> plaquette
    junction: int    # vertex id of the junction


@dataclass(frozen=True)
class Region:
    """A set of plaquettes whose closed union is a disk."""

    lattice: HoneycombTorus
    plaquettes: frozenset

    def __post_init__(self):
        if self.plaquettes and not self.is_simply_connected():
            raise ValueError("region is not simply connected")

    @property
    def vertices(self) -> list[int]:
        return sorted({v for p in self.plaquettes for v in self.lattice.plaquettes[p].vertices})

    @property
    def edges(self) -> list[int]:
        return sorted({e for p in self.plaquettes for e in self.lattice.plaquettes[p].edges})

    @property
    def interior_edges(self) -> list[int]:
        """Edges with both neighbouring plaquettes inside the region."""
        L = self.lattice
        return [e for e in self.edges if L.edge_pos[e] in self.plaquettes and L.edge_neg[e] in self.plaquettes]

    @property
    def boundary_edges(self) -> list[int]:
        inner = set(self.interior_edges)
        return [e for e in self.edges if e not in inner]

    @property
    def interior_vertices(self) -> list[int]:
        """Lattice vertices all three of whose plaquettes lie in the region."""
        inner = set(self.interior_edges)
        return [v for v in self.vertices if all(e in inner for e in self.lattice.incident[v])]

    def is_connected(self) -> bool:
        if not self.plaquettes:
            return True
        start = min(self.plaquettes)
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w, _ in self.lattice.dual_adjacency[u]:
                if w in self.plaquettes and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == set(self.plaquettes)

    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.plaquettes)

    def is_simply_connected(self) -> bool:
        return (self.is_connected() and self.euler_characteristic() == 1
                and len(self.plaquettes) < self.lattice.n_plaquettes)


def spanning_tree(region: Region, over: str = "vertices") -> dict[int, tuple[int, int] | None]:
    """Deterministic BFS tree, lowest index first.

    ``over="vertices"`` spans the lattice vertices of the region along its
    edges; ``over="plaquettes"`` spans the region's plaquettes along interior
    edges (the dual graph).  Returns ``node -> (parent, edge)`` with the root
    (smallest index) mapped to ``None``.
    """
    L = region.lattice
    if over == "vertices":
        nodes = set(region.vertices)
        edges = set(region.edges)

        def nbrs(u):
            for e in L.incident[u]:
                if e in edges:
                    w = L.edge_head[e] if L.edge_tail[e] == u else L.edge_tail[e]
                    yield int(w), e
    elif over == "plaquettes":
        nodes = set(region.plaquettes)
        inner = set(region.interior_edges)

        def nbrs(u):
            for w, e in L.dual_adjacency[u]:
                if e in inner:
                    yield w, e
    else:
        raise ValueError("over must be 'vertices' or 'plaquettes'")
    if not nodes:
        return {}
    root = min(nodes)
    tree: dict = {root: None}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w, e in sorted(nbrs(u), key=lambda t: (t[0], t[1])):
            if w in nodes and w not in tree:
                tree[w] = (u, e)
                queue.append(w)
    return tree


@dataclass
class Chain1:
    """Group-valued coefficients on edges, read as dual 1-chains.

    The dual edge crossing lattice edge e runs from ``edge_neg[e]`` to
    ``edge_pos[e]``; its boundary is ``+c`` at the positive plaquette and
    ``-c`` at the negative one.
    """

    lattice: HoneycombTorus
    group: AbelianGroup
    coeffs: dict = field(default_factory=dict)

    def boundary(self) -> dict[int, int]:
        G = self.group
        out: dict[int, int] = {}
        for e, g in self.coeffs.items():
            p, q = int(self.lattice.edge_pos[e]), int(self.lattice.edge_neg[e])
            out[p] = int(G.mul[out.get(p, G.identity), g])
            out[q] = int(G.mul[out.get(q, G.identity), G.inv[g]])
        return {k: v for k, v in out.items() if v != G.identity}

    @staticmethod
    def coboundary(lattice: HoneycombTorus, group: AbelianGroup, potential: dict) -> "Chain1":
        """Edge values ``g_pos * g_neg^{-1}`` of a plaquette potential."""
        G = group
        co = {}
        for e in range(lattice.n_edges):
            p, q = int(lattice.edge_pos[e]), int(lattice.edge_neg[e])
            if p in potential or q in potential:
                gp = potential.get(p, G.identity)
                gq = potential.get(q, G.identity)
                co[e] = int(G.mul[gp, G.inv[gq]])
        return Chain1(lattice, G, co)
