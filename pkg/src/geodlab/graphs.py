"""Finite graphs in Serre's conventions with group orders and conductances.

A graph is stored with directed edges; reversal is a fixed-point-free
involution.  Vertex and edge "orders" are the orders of the attached finite
groups — only the orders matter here.  The tree degree of a vertex is
deg(v) = sum of i(e) = |G_{o(e)}|/|G_e| over outgoing edges, i.e. its degree
in the Bass-Serre tree.
"""

from fractions import Fraction
import json

import numpy as np

from .errors import DegenerateError, GraphFormatError


class Vertex:
    __slots__ = ("id", "order")

    def __init__(self, vid, order=1):
        self.id = vid
        self.order = order


class Edge:
    __slots__ = ("id", "origin", "terminus", "reverse", "order", "conductance")

    def __init__(self, eid, origin, terminus, reverse, order=1, conductance=0.0):
        self.id = eid
        self.origin = origin
        self.terminus = terminus
        self.reverse = reverse
        self.order = order
        self.conductance = conductance


class GraphOfGroups:
    """Finite connected graph of groups (orders only) with conductances.

    Iteration order everywhere is ascending edge id / vertex id, which fixes
    matrix indexing and makes all downstream numerics deterministic.
    """

    def __init__(self, vertices, edges, subgraphs=None):
        self.vertices = {v.id: v for v in vertices}
        self.edges = {e.id: e for e in edges}
        self.vertex_ids = sorted(self.vertices)
        self.edge_ids = sorted(self.edges)
        self.vertex_index = {v: i for i, v in enumerate(self.vertex_ids)}
        self.edge_index = {e: i for i, e in enumerate(self.edge_ids)}
        self.subgraphs = subgraphs or {}
        self._out = {v: [] for v in self.vertex_ids}
        for eid in self.edge_ids:
            self._out[self.edges[eid].origin].append(eid)

    # -- basic accessors -------------------------------------------------

    def out_edges(self, vid):
        return self._out[vid]

    def edge_count(self):
        return len(self.edges)

    def vertex_count(self):
        return len(self.vertices)

    def index_i(self, eid):
        """i(e) = |G_{o(e)}| / |G_e|."""
        e = self.edges[eid]
        return self.vertices[e.origin].order // e.order

    def tree_degree(self, vid):
        return sum(self.index_i(eid) for eid in self._out[vid])

    def trivial_orders(self):
        return (all(v.order == 1 for v in self.vertices.values())
                and all(e.order == 1 for e in self.edges.values()))

    def is_regular(self):
        degs = {self.tree_degree(v) for v in self.vertex_ids}
        return len(degs) == 1

    def conductance_vector(self):
        return np.array([self.edges[e].conductance for e in self.edge_ids])

    def with_conductance(self, cmap):
        """Copy with conductances replaced; cmap maps edge id -> float."""
        verts = [Vertex(v.id, v.order) for v in self.vertices.values()]
        edges = [Edge(e.id, e.origin, e.terminus, e.reverse, e.order,
                      float(cmap.get(e.id, e.conductance)))
                 for e in self.edges.values()]
        return GraphOfGroups(verts, edges, dict(self.subgraphs))

    # -- volumes ---------------------------------------------------------

    def volumes(self):
        vol = sum(Fraction(1, v.order) for v in self.vertices.values())
        tvol = sum(Fraction(1, e.order) for e in self.edges.values())
        degrees = {v: self.tree_degree(v) for v in self.vertex_ids}
        bip, classes = self._two_color()
        return VolumeReport(vol, tvol, degrees, bip, classes)

    def _two_color(self):
        color = {self.vertex_ids[0]: 0}
        stack = [self.vertex_ids[0]]
        while stack:
            v = stack.pop()
            for eid in self._out[v]:
                w = self.edges[eid].terminus
                if w not in color:
                    color[w] = 1 - color[v]
                    stack.append(w)
                elif color[w] == color[v]:
                    return False, None
        return True, ([v for v in self.vertex_ids if color[v] == 0],
                      [v for v in self.vertex_ids if color[v] == 1])

    # -- transfer matrix -------------------------------------------------

    def nb_transfer(self, exact=False, weights=None):
        """Weighted non-backtracking transfer matrix.

        B[e, e'] = w(e') when t(e) = o(e') and e' is not the reverse of e,
        with w(e') = exp(c(e')) by default.  ``exact`` builds a python-object
        matrix with weight 1 (or the user-supplied rational ``weights``),
        suitable for big-integer dynamic programming.

        Returns (B, orders_ignored_flag).
        """
        for v in self.vertex_ids:
            if self.tree_degree(v) <= 1:
                raise DegenerateError(f"vertex {v!r} has tree-degree <= 1")
        n = len(self.edge_ids)
        if exact:
            B = [[0] * n for _ in range(n)]
        else:
            B = np.zeros((n, n))
        for i, eid in enumerate(self.edge_ids):
            e = self.edges[eid]
            for fid in self._out[e.terminus]:
                if fid == e.reverse:
                    continue
                j = self.edge_index[fid]
                if exact:
                    B[i][j] = 1 if weights is None else weights[fid]
                else:
                    w = np.exp(self.edges[fid].conductance)
                    B[i, j] = w
        return B, not self.trivial_orders()

    # -- subgraph helpers ------------------------------------------------

    def subgraph(self, name):
        try:
            return self.subgraphs[name]
        except KeyError:
            raise GraphFormatError("dangling-reference",
                                   f"no subgraph named {name!r}") from None


class VolumeReport:
    __slots__ = ("vol", "tvol", "degrees", "bipartite", "classes")

    def __init__(self, vol, tvol, degrees, bipartite, classes):
        self.vol = vol
        self.tvol = tvol
        self.degrees = degrees
        self.bipartite = bipartite
        self.classes = classes

    def __repr__(self):
        return (f"VolumeReport(vol={self.vol}, tvol={self.tvol}, "
                f"bipartite={self.bipartite})")


def load_validate(document):
    """Build a GraphOfGroups from a schema document (dict or JSON text)."""
    if isinstance(document, str):
        document = json.loads(document)
    try:
        vraw = document["vertices"]
        eraw = document["edges"]
    except (KeyError, TypeError):
        raise GraphFormatError("dangling-reference",
                               "document needs 'vertices' and 'edges'") from None

    vertices = []
    for v in vraw:
        order = int(v.get("order", 1))
        if order < 1:
            raise GraphFormatError("order-divisibility",
                                   f"vertex {v['id']!r} has order {order}")
        vertices.append(Vertex(v["id"], order))
    vmap = {v.id: v for v in vertices}
    if len(vmap) != len(vertices):
        raise GraphFormatError("dangling-reference", "duplicate vertex id")

    edges = []
    for e in eraw:
        order = int(e.get("order", 1))
        if order < 1:
            raise GraphFormatError("order-divisibility",
                                   f"edge {e['id']!r} has order {order}")
        edges.append(Edge(e["id"], e["from"], e["to"], e["reverse"], order,
                          float(e.get("conductance", 0.0))))
    emap = {e.id: e for e in edges}
    if len(emap) != len(edges):
        raise GraphFormatError("dangling-reference", "duplicate edge id")

    for e in edges:
        for end in (e.origin, e.terminus):
            if end not in vmap:
                raise GraphFormatError(
                    "dangling-reference",
                    f"edge {e.id!r} references unknown vertex {end!r}")
        if e.reverse not in emap:
            raise GraphFormatError(
                "dangling-reference",
                f"edge {e.id!r} references unknown reverse {e.reverse!r}")

    for e in edges:
        r = emap[e.reverse]
        if r.id == e.id:
            raise GraphFormatError("bad-involution",
                                   f"edge {e.id!r} is its own reverse")
        if r.reverse != e.id:
            raise GraphFormatError("bad-involution",
                                   f"reversal of {e.id!r} is not involutive")
        if r.origin != e.terminus or r.terminus != e.origin:
            raise GraphFormatError(
                "bad-involution",
                f"reverse of {e.id!r} does not swap endpoints")
        if r.order != e.order:
            raise GraphFormatError("order-divisibility",
                                   f"orders of {e.id!r} and its reverse differ")

    for e in edges:
        for vid in (e.origin, e.terminus):
            if vmap[vid].order % e.order != 0:
                raise GraphFormatError(
                    "order-divisibility",
                    f"edge {e.id!r} order does not divide vertex {vid!r} order")

    if not vertices:
        raise GraphFormatError("disconnected", "graph has no vertices")

    # connectivity (the involution makes directed and undirected agree)
    adj = {v.id: set() for v in vertices}
    for e in edges:
        adj[e.origin].add(e.terminus)
    seen = {vertices[0].id}
    stack = [vertices[0].id]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(vertices):
        missing = sorted(set(vmap) - seen)[0]
        raise GraphFormatError("disconnected",
                               f"vertex {missing!r} unreachable")

    subgraphs = {}
    for name, sub in (document.get("subgraphs") or {}).items():
        sv, se = list(sub.get("vertices", [])), list(sub.get("edges", []))
        for vid in sv:
            if vid not in vmap:
                raise GraphFormatError(
                    "dangling-reference",
                    f"subgraph {name!r} references unknown vertex {vid!r}")
        for eid in se:
            if eid not in emap:
                raise GraphFormatError(
                    "dangling-reference",
                    f"subgraph {name!r} references unknown edge {eid!r}")
        eset = set(se)
        for eid in se:
            if emap[eid].reverse not in eset:
                raise GraphFormatError(
                    "bad-involution",
                    f"subgraph {name!r} is not closed under reversal")
            if emap[eid].origin not in sv or emap[eid].terminus not in sv:
                raise GraphFormatError(
                    "dangling-reference",
                    f"subgraph {name!r} edge {eid!r} leaves its vertex set")
        if sv:
            sadj = {v: set() for v in sv}
            for eid in se:
                sadj[emap[eid].origin].add(emap[eid].terminus)
            sseen = {sv[0]}
            sstack = [sv[0]]
            while sstack:
                for w in sadj[sstack.pop()]:
                    if w not in sseen:
                        sseen.add(w)
                        sstack.append(w)
            if len(sseen) != len(sv):
                raise GraphFormatError("disconnected",
                                       f"subgraph {name!r} is not connected")
        subgraphs[name] = {"vertices": sv, "edges": se}

    return GraphOfGroups(vertices, edges, subgraphs)


def to_document(g):
    """Inverse of load_validate (for serialization and relabeling tests)."""
    return {
        "vertices": [{"id": v.id, "order": v.order}
                     for v in (g.vertices[i] for i in g.vertex_ids)],
        "edges": [{"id": e.id, "from": e.origin, "to": e.terminus,
                   "reverse": e.reverse, "order": e.order,
                   "conductance": e.conductance}
                  for e in (g.edges[i] for i in g.edge_ids)],
        "subgraphs": g.subgraphs,
    }
