"""Closed oriented triangulated surfaces in side-gluing form.

A side ``(t, s)`` of triangle ``t`` runs from corner ``s`` to corner ``s + 1``
(indices mod 3).  Each side is also an oriented edge: the one contained
coherently in ``t``.  The gluing involution pairs every side with the side
of the neighbouring triangle that runs the other way.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path


class ComplexError(ValueError):
    pass


Side = tuple[int, int]


@dataclass(frozen=True)
class Corner:
    triangle: int
    index: int
    vertex: int
    edge_in: Side   # side arriving at the corner
    edge_out: Side  # side leaving the corner


@dataclass
class SurfaceComplex:
    n_vertices: int
    vertex_of: list[tuple[int, int, int]]
    gluing: dict[Side, Side]
    _stars: dict[int, list[Side]] = field(default_factory=dict, repr=False)
    _edges: list[Side] = field(default_factory=list, repr=False)
    _edge_id: dict[Side, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._check_structure()
        self._edges = []
        for t in range(self.n_triangles):
            for s in range(3):
                partner = self.gluing[(t, s)]
                if (t, s) < partner:
                    self._edge_id[(t, s)] = len(self._edges)
                    self._edge_id[partner] = len(self._edges)
                    self._edges.append((t, s))
        self._build_stars()

    # basic incidence -------------------------------------------------
    @property
    def n_triangles(self) -> int:
        return len(self.vertex_of)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def sides(self):
        for t in range(self.n_triangles):
            for s in range(3):
                yield (t, s)

    def tail(self, side: Side) -> int:
        t, s = side
        return self.vertex_of[t][s]

    def head(self, side: Side) -> int:
        t, s = side
        return self.vertex_of[t][(s + 1) % 3]

    def reverse(self, side: Side) -> Side:
        return self.gluing[side]

    def edge_id(self, side: Side) -> int:
        return self._edge_id[side]

    def edge_rep(self, k: int) -> Side:
        """Canonical oriented representative of unoriented edge ``k``."""
        return self._edges[k]

    def edge_sign(self, side: Side) -> int:
        """+1 if ``side`` is the canonical orientation of its edge, else -1."""
        return 1 if self._edges[self._edge_id[side]] == side else -1

    def corners(self):
        for t in range(self.n_triangles):
            for i in range(3):
                yield Corner(t, i, self.vertex_of[t][i], (t, (i - 1) % 3), (t, i))

    # validation -------------------------------------------------------
    def _check_structure(self):
        n = self.n_triangles
        for t, tri in enumerate(self.vertex_of):
            if len(tri) != 3:
                raise ComplexError(f"triangle {t} does not have three corners")
            for v in tri:
                if not 0 <= v < self.n_vertices:
                    raise ComplexError(f"triangle {t} uses unknown vertex {v}")
        for t in range(n):
            for s in range(3):
                if (t, s) not in self.gluing:
                    raise ComplexError(f"dangling side {(t, s)}")
        for a, b in self.gluing.items():
            if not (0 <= a[0] < n and 0 <= b[0] < n and a[1] in (0, 1, 2) and b[1] in (0, 1, 2)):
                raise ComplexError(f"gluing references missing side {a} -> {b}")
            if a == b:
                raise ComplexError(f"side {a} glued to itself")
            if self.gluing.get(b) != a:
                raise ComplexError(f"non-manifold gluing at side {a}")
            # orientability: glued sides must run in opposite directions
            if self.tail(a) != self.head(b) or self.head(a) != self.tail(b):
                raise ComplexError(f"non-orientable or inconsistent gluing {a} <-> {b}")
        if not self._dual_connected():
            raise ComplexError("complex is not connected")

    def _dual_connected(self) -> bool:
        if self.n_triangles == 0:
            return False
        seen = {0}
        queue = deque([0])
        while queue:
            t = queue.popleft()
            for s in range(3):
                u = self.gluing[(t, s)][0]
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return len(seen) == self.n_triangles

    def _build_stars(self):
        # Stepping from the outgoing side at corner i across side i-1 turns
        # counterclockwise around the vertex.
        visited: set[Side] = set()
        stars: dict[int, list[Side]] = {}
        for side in self.sides():
            if side in visited:
                continue
            alpha = self.tail(side)
            if alpha in stars:
                raise ComplexError(f"vertex {alpha} has a disconnected link (not a manifold)")
            cycle = []
            cur = side
            while cur not in visited:
                visited.add(cur)
                cycle.append(cur)
                t, i = cur
                cur = self.gluing[(t, (i - 1) % 3)]
            if cur != side:
                raise ComplexError(f"broken vertex cycle at {alpha}")
            stars[alpha] = cycle
        for v in range(self.n_vertices):
            if v not in stars:
                raise ComplexError(f"vertex {v} is not used by any triangle")
            if len(stars[v]) < 3:
                raise ComplexError(f"vertex {v} has valence {len(stars[v])} < 3")
        self._stars = stars

    # derived structure ----------------------------------------------
    def vertex_star(self, alpha: int) -> list[Side]:
        """Outgoing oriented edges at ``alpha`` in counterclockwise order."""
        if alpha not in self._stars:
            raise ComplexError(f"unknown vertex {alpha}")
        return list(self._stars[alpha])

    def valence(self, alpha: int) -> int:
        return len(self.vertex_star(alpha))

    def neighbours(self, t: int) -> list[int]:
        return [self.gluing[(t, s)][0] for s in range(3)]

    def to_document(self) -> dict:
        gl = []
        for side in self.sides():
            partner = self.gluing[side]
            if side < partner:
                gl.append([list(side), list(partner)])
        return {
            "vertices": self.n_vertices,
            "triangles": self.n_triangles,
            "vertex_of": [list(t) for t in self.vertex_of],
            "gluing": gl,
        }


# construction ---------------------------------------------------------

def from_triples(n_vertices: int, triangles) -> SurfaceComplex:
    owner: dict[tuple[int, int], Side] = {}
    tris = [tuple(int(v) for v in tri) for tri in triangles]
    for t, tri in enumerate(tris):
        if len(set(tri)) != 3:
            raise ComplexError(f"triangle {t} repeats a vertex; use the glued format")
        for s in range(3):
            key = (tri[s], tri[(s + 1) % 3])
            if key in owner:
                raise ComplexError(f"directed edge {key} used twice (non-manifold or non-orientable)")
            owner[key] = (t, s)
    gluing = {}
    for (a, b), side in owner.items():
        partner = owner.get((b, a))
        if partner is None:
            raise ComplexError(f"dangling side {side} on edge {(a, b)}")
        gluing[side] = partner
    return SurfaceComplex(n_vertices, tris, gluing)


def parse_complex(document) -> SurfaceComplex:
    """Build a complex from either accepted JSON shape (dict or JSON text)."""
    if isinstance(document, (str, bytes)):
        document = json.loads(document)
    try:
        n = int(document["vertices"])
        tris = document["triangles"]
    except (KeyError, TypeError) as exc:
        raise ComplexError(f"malformed triangulation document: {exc}") from None
    if isinstance(tris, list):
        return from_triples(n, tris)
    f = int(tris)
    vertex_of = [tuple(int(v) for v in row) for row in document["vertex_of"]]
    if len(vertex_of) != f:
        raise ComplexError("vertex_of length disagrees with triangle count")
    gluing: dict[Side, Side] = {}
    for pair in document["gluing"]:
        a = (int(pair[0][0]), int(pair[0][1]))
        b = (int(pair[1][0]), int(pair[1][1]))
        for x, y in ((a, b), (b, a)):
            if x in gluing:
                raise ComplexError(f"side {x} glued twice")
            gluing[x] = y
    return SurfaceComplex(n, vertex_of, gluing)


def load_complex(path) -> SurfaceComplex:
    return parse_complex(json.loads(Path(path).read_text()))


# invariants -----------------------------------------------------------

def euler_stats(sc: SurfaceComplex) -> dict:
    v, e, f = sc.n_vertices, sc.n_edges, sc.n_triangles
    chi = v - e + f
    if chi % 2:
        raise ComplexError(f"odd Euler characteristic {chi}: corrupt gluing")
    assert 3 * f == 2 * e
    assert e - 3 * v == -3 * chi
    return {"v": v, "e": e, "f": f, "chi": chi, "genus": (2 - chi) // 2}


def dual_spanning_tree(sc: SurfaceComplex, base: int = 0) -> dict:
    """BFS tree of the dual graph.  Edges are reported as unoriented edge ids."""
    if not 0 <= base < sc.n_triangles:
        raise ComplexError(f"unknown base triangle {base}")
    parent = {base: None}
    order = [base]
    tree: list[int] = []
    queue = deque([base])
    while queue:
        t = queue.popleft()
        for s in range(3):
            u, _ = sc.gluing[(t, s)]
            if u not in parent:
                parent[u] = (t, s)
                order.append(u)
                tree.append(sc.edge_id((t, s)))
                queue.append(u)
    tree_set = set(tree)
    cotree = [k for k in range(sc.n_edges) if k not in tree_set]
    assert len(cotree) == sc.n_edges - sc.n_triangles + 1
    return {"tree": tree, "cotree": cotree, "parent": parent, "order": order}


# monogons and bigons --------------------------------------------------

def region_euler(sc: SurfaceComplex, triangles: set[int], cut: set[int]) -> tuple[int, int]:
    """Euler characteristic and boundary-edge count of a union of triangles.

    Triangles are glued only across edges whose both sides lie in the set and
    which are not in ``cut``; vertices are split accordingly (desingularized).
    """
    def internal(side):
        partner = sc.gluing[side]
        return partner[0] in triangles and sc.edge_id(side) not in cut

    # corners are identified across internal sides
    parent: dict[tuple[int, int], tuple[int, int]] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in triangles:
        for i in range(3):
            parent[(t, i)] = (t, i)
    n_internal = 0
    n_boundary = 0
    for t in triangles:
        for s in range(3):
            side = (t, s)
            if internal(side):
                n_internal += 1
                u, r = sc.gluing[side]
                # corner s of t meets corner r+1 of u; corner s+1 meets corner r
                for a, b in (((t, s), (u, (r + 1) % 3)), ((t, (s + 1) % 3), (u, r))):
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[ra] = rb
            else:
                n_boundary += 1
    n_vertices = len({find(c) for c in parent})
    edges = n_internal // 2 + n_boundary
    return n_vertices - edges + len(triangles), n_boundary


def _regions(sc: SurfaceComplex, cut: set[int]) -> list[set[int]]:
    left = set(range(sc.n_triangles))
    out = []
    while left:
        start = left.pop()
        comp = {start}
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for s in range(3):
                if sc.edge_id((t, s)) in cut:
                    continue
                u = sc.gluing[(t, s)][0]
                if u in left:
                    left.discard(u)
                    comp.add(u)
                    queue.append(u)
        out.append(comp)
    return out


def _bounds_disk(sc: SurfaceComplex, cut: set[int]) -> bool:
    regions = _regions(sc, cut)
    if len(regions) < 2:
        return False
    for reg in regions:
        chi, _ = region_euler(sc, reg, cut)
        if chi == 1:
            return True
    return False


def validate_quasi_simplicial(sc: SurfaceComplex) -> dict:
    monogons = []
    bigons = []
    by_ends: dict[frozenset, list[int]] = {}
    for k in range(sc.n_edges):
        side = sc.edge_rep(k)
        a, b = sc.tail(side), sc.head(side)
        if a == b:
            if _bounds_disk(sc, {k}):
                monogons.append(k)
        else:
            by_ends.setdefault(frozenset((a, b)), []).append(k)
    for ks in by_ends.values():
        for i in range(len(ks)):
            for j in range(i + 1, len(ks)):
                if _bounds_disk(sc, {ks[i], ks[j]}):
                    bigons.append((ks[i], ks[j]))
    return {"monogons": monogons, "bigons": bigons, "accepted": not monogons and not bigons}


def is_simplicial(sc: SurfaceComplex) -> bool:
    seen = set()
    for k in range(sc.n_edges):
        side = sc.edge_rep(k)
        a, b = sc.tail(side), sc.head(side)
        key = frozenset((a, b))
        if a == b or key in seen:
            return False
        seen.add(key)
    tris = set()
    for tri in sc.vertex_of:
        key = frozenset(tri)
        if len(key) < 3 or key in tris:
            return False
        tris.add(key)
    return True


def double_cover(sc: SurfaceComplex, cocycle: dict[int, int]) -> SurfaceComplex:
    """Two-sheeted cover; crossing edge ``k`` swaps sheets iff ``cocycle[k]``."""
    f = sc.n_triangles
    for alpha in range(sc.n_vertices):
        star = sc.vertex_star(alpha)
        twist = sum(cocycle.get(sc.edge_id(sc.gluing[(t, (i - 1) % 3)]), 0) for t, i in star) % 2
        if twist:
            raise ComplexError(f"cochain is not a cocycle around vertex {alpha}")
    gluing = {}
    for sheet in range(2):
        for t in range(f):
            for s in range(3):
                u, r = sc.gluing[(t, s)]
                other = sheet ^ cocycle.get(sc.edge_id((t, s)), 0)
                gluing[(sheet * f + t, s)] = (other * f + u, r)
    # label lifted vertices by corner classes
    n_tris = 2 * f
    corner_vertex: dict[tuple[int, int], int] = {}
    nv = 0
    for t0 in range(n_tris):
        for i0 in range(3):
            if (t0, i0) in corner_vertex:
                continue
            cur = (t0, i0)
            while cur not in corner_vertex:
                corner_vertex[cur] = nv
                t, i = cur
                cur = gluing[(t, (i - 1) % 3)]
            nv += 1
    vertex_of = [tuple(corner_vertex[(t, i)] for i in range(3)) for t in range(n_tris)]
    return SurfaceComplex(nv, vertex_of, gluing)


def automorphisms(sc: SurfaceComplex) -> list[dict[Side, Side]]:
    """Orientation-preserving combinatorial automorphisms as side permutations."""
    out = []
    for t in range(sc.n_triangles):
        for rot in range(3):
            phi = {(0, 0): (t, rot)}
            queue = deque([(0, 0)])
            ok = True
            while queue and ok:
                a = queue.popleft()
                b = phi[a]
                pairs = [((a[0], (a[1] + k) % 3), (b[0], (b[1] + k) % 3)) for k in (1, 2)]
                pairs.append((sc.gluing[a], sc.gluing[b]))
                for x, y in pairs:
                    if x in phi:
                        if phi[x] != y:
                            ok = False
                            break
                    else:
                        phi[x] = y
                        queue.append(x)
            if not ok or len(phi) != 3 * sc.n_triangles:
                continue
            vmap = {}
            for side, img in phi.items():
                a, b = sc.tail(side), sc.tail(img)
                if vmap.setdefault(a, b) != b:
                    ok = False
                    break
            if ok and len(set(phi.values())) == len(phi):
                out.append(phi)
    return out
