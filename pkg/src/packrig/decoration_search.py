"""Blue/white decorations of a triangulation, corner inversions and tightness.

Edge states are stored relative to the canonical orientation of each edge:
0 for "not oriented", +1 along it, -1 against it.  Weights are handled as
integers equal to twice the inversion, so the possible corner values are
0, 1 and 2.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .surface_complex import SurfaceComplex


class DecorationError(ValueError):
    pass


@dataclass(frozen=True)
class Decoration:
    blue: tuple[bool, ...]
    state: tuple[int, ...]

    @classmethod
    def build(cls, sc: SurfaceComplex, blue, oriented=None) -> Decoration:
        b = [False] * sc.n_vertices
        for a in blue:
            b[int(a)] = True
        st = [0] * sc.n_edges
        for k, d in (oriented or {}).items():
            st[int(k)] = int(d)
        dec = cls(tuple(b), tuple(st))
        dec.validate(sc)
        return dec

    @classmethod
    def trivial(cls, sc: SurfaceComplex) -> Decoration:
        return cls((False,) * sc.n_vertices, (0,) * sc.n_edges)

    def validate(self, sc: SurfaceComplex):
        if len(self.blue) != sc.n_vertices or len(self.state) != sc.n_edges:
            raise DecorationError("decoration does not match the complex")
        for k, d in enumerate(self.state):
            if d not in (-1, 0, 1):
                raise DecorationError(f"edge {k} has invalid state {d}")
            if d and not is_blue_edge(sc, self, k):
                raise DecorationError(f"edge {k} is oriented but not blue")

    @property
    def nontrivial(self) -> bool:
        return any(self.blue)

    def to_document(self) -> dict:
        return {"blue": [a for a, b in enumerate(self.blue) if b],
                "oriented": [{"edge": k, "dir": d} for k, d in enumerate(self.state) if d]}

    @classmethod
    def from_document(cls, sc: SurfaceComplex, doc) -> Decoration:
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            oriented = {int(o["edge"]): int(o["dir"]) for o in doc.get("oriented", [])}
            return cls.build(sc, doc["blue"], oriented)
        except (KeyError, TypeError) as exc:
            raise DecorationError(f"malformed decoration document: {exc}") from None


def is_blue_edge(sc: SurfaceComplex, dec: Decoration, k: int) -> bool:
    side = sc.edge_rep(k)
    return dec.blue[sc.tail(side)] and dec.blue[sc.head(side)]


@dataclass
class CornerTable:
    """Flat corner arrays, three consecutive entries per triangle."""
    vertex: np.ndarray
    edge_in: np.ndarray
    sign_in: np.ndarray
    edge_out: np.ndarray
    sign_out: np.ndarray
    n_vertices: int

    @classmethod
    def of(cls, sc: SurfaceComplex) -> CornerTable:
        cv, ei, si, eo, so = [], [], [], [], []
        for c in sc.corners():
            cv.append(c.vertex)
            ei.append(sc.edge_id(c.edge_in))
            si.append(sc.edge_sign(c.edge_in))
            eo.append(sc.edge_id(c.edge_out))
            so.append(sc.edge_sign(c.edge_out))
        return cls(np.array(cv, dtype=np.int64), np.array(ei, dtype=np.int64),
                   np.array(si, dtype=np.int8), np.array(eo, dtype=np.int64),
                   np.array(so, dtype=np.int8), sc.n_vertices)

    def args(self):
        return (self.vertex, self.edge_in, self.sign_in, self.edge_out, self.sign_out)


def corner_weight2(blue: bool, s_in: int, s_out: int) -> int:
    """Twice the inversion of a corner; s_in / s_out are +1 when the edge points
    along the triangle's boundary orientation, -1 against it, 0 if not oriented."""
    if not blue:
        return 0
    if s_in and s_out:
        return 2 if (s_in > 0) == (s_out > 0) else 0
    if s_in or s_out:
        return 1
    return 2


def corner_inversion(sc: SurfaceComplex, dec: Decoration, t: int, i: int) -> float:
    side_in, side_out = (t, (i - 1) % 3), (t, i)
    s_in = dec.state[sc.edge_id(side_in)] * sc.edge_sign(side_in)
    s_out = dec.state[sc.edge_id(side_out)] * sc.edge_sign(side_out)
    return corner_weight2(dec.blue[sc.vertex_of[t][i]], s_in, s_out) / 2


def vertex_inversion(sc: SurfaceComplex, dec: Decoration, alpha: int) -> float:
    return sum(corner_inversion(sc, dec, t, i) for t, i in sc.vertex_star(alpha))


def triangle_inversion(sc: SurfaceComplex, dec: Decoration, t: int) -> float:
    return sum(corner_inversion(sc, dec, t, i) for i in range(3))


def is_tight(sc: SurfaceComplex, dec: Decoration) -> bool:
    return all(vertex_inversion(sc, dec, a) <= 2 for a in range(sc.n_vertices) if dec.blue[a])


# --- batched evaluation -------------------------------------------------------

def random_batch(sc: SurfaceComplex, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    ends = np.array([(sc.tail(sc.edge_rep(k)), sc.head(sc.edge_rep(k))) for k in range(sc.n_edges)])
    colors = rng.integers(0, 2, size=(n, sc.n_vertices), dtype=np.uint8)
    blue_edge = colors[:, ends[:, 0]] & colors[:, ends[:, 1]]
    states = (rng.integers(-1, 2, size=(n, sc.n_edges)) * blue_edge).astype(np.int8)
    return colors, states


def batch_tight(table: CornerTable, colors, states) -> np.ndarray:
    w = kernels.vertex_weights(colors, states, *table.args(), table.n_vertices)
    bad = (w > 4) & colors.astype(bool)
    return ~bad.any(axis=1) & colors.any(axis=1)


def batch_triangle_weights(table: CornerTable, colors, states) -> np.ndarray:
    return kernels.triangle_weights(colors, states, *table.args())


def _to_decoration(colors_row, states_row) -> Decoration:
    return Decoration(tuple(bool(c) for c in colors_row), tuple(int(s) for s in states_row))


# --- search -------------------------------------------------------------------

def _colorings(n: int, max_blue: int | None):
    top = n if max_blue is None else min(max_blue, n)
    for k in range(1, top + 1):
        for combo in itertools.combinations(range(n), k):
            yield combo


class _Budget:
    def __init__(self, budget):
        self.left = budget

    def spend(self) -> bool:
        if self.left is None:
            return True
        self.left -= 1
        return self.left >= 0


def _search_coloring(sc, table, blue, budget, hits, stats, triangle_bound=True):
    cv = table.vertex
    n_corner = len(cv)
    # every non-white triangle carries doubled weight >= 2, so the total over
    # blue vertices is at least sum_t max(2, decided weight of t)
    tri_w = np.zeros(sc.n_triangles, dtype=np.int64)
    nonwhite = np.array([any(blue[a] for a in tri) for tri in sc.vertex_of])
    cap = 4 * sum(blue)
    tri_open = np.zeros(sc.n_triangles, dtype=np.int64)
    blue_edges = [k for k in range(sc.n_edges)
                  if blue[sc.tail(sc.edge_rep(k))] and blue[sc.head(sc.edge_rep(k))]]
    order = {k: j for j, k in enumerate(blue_edges)}
    # corners at blue vertices, indexed by the last blue edge they wait for
    waiting: dict[int, list[int]] = {}
    w = np.zeros(sc.n_vertices, dtype=np.int64)
    state = [0] * sc.n_edges
    ready = []
    for c in range(n_corner):
        if not blue[cv[c]]:
            continue
        deps = [order[e] for e in (table.edge_in[c], table.edge_out[c]) if e in order]
        if deps:
            waiting.setdefault(max(deps), []).append(c)
            tri_open[c // 3] += 1
        else:
            ready.append(c)
    for c in ready:
        w[cv[c]] += 2
        tri_w[c // 3] += 2
    total = [int(np.maximum(tri_w, 2)[nonwhite].sum())]
    if any(w[a] > 4 for a in range(sc.n_vertices) if blue[a]) or (triangle_bound and total[0] > cap):
        stats["pruned"] += 1
        return True

    def add(c, x, sgn=1):
        w[cv[c]] += sgn * x
        t = c // 3
        tri_open[t] -= sgn
        before = max(tri_w[t], 2)
        tri_w[t] += sgn * x
        total[0] += max(tri_w[t], 2) - before

    def violates(added):
        for c, _ in added:
            if w[cv[c]] > 4:
                return True
            t = c // 3
            if tri_open[t] == 0 and nonwhite[t] and tri_w[t] < 2:
                stats["lemma_violations"] += 1
                return True
        return triangle_bound and total[0] > cap

    def weight(c):
        return corner_weight2(True, state[table.edge_in[c]] * table.sign_in[c],
                              state[table.edge_out[c]] * table.sign_out[c])

    def dfs(j):
        if not budget.spend():
            return False
        stats["nodes"] += 1
        if j == len(blue_edges):
            dec = Decoration(tuple(blue), tuple(state))
            if is_tight(sc, dec):
                hits.append(dec)
            return True
        k = blue_edges[j]
        for d in (0, 1, -1):
            state[k] = d
            added = [(c, weight(c)) for c in waiting.get(j, [])]
            for c, x in added:
                add(c, x)
            if not violates(added):
                if not dfs(j + 1):
                    for c, x in added:
                        add(c, x, -1)
                    state[k] = 0
                    return False
            else:
                stats["pruned"] += 1
            for c, x in added:
                add(c, x, -1)
        state[k] = 0
        return True

    return dfs(0)


def search_tight(sc: SurfaceComplex, mode="backtracking", budget=None, max_blue=None,
                 seed=0, batch=100_000, triangle_bound=True) -> dict:
    table = CornerTable.of(sc)
    hits: list[Decoration] = []
    if mode == "backtracking":
        b = _Budget(budget)
        stats = {"nodes": 0, "pruned": 0, "colorings": 0, "lemma_violations": 0}
        complete = True
        for combo in _colorings(sc.n_vertices, max_blue):
            blue = [False] * sc.n_vertices
            for a in combo:
                blue[a] = True
            stats["colorings"] += 1
            if not _search_coloring(sc, table, blue, b, hits, stats, triangle_bound):
                complete = False
                break
        return {"mode": mode, "budget": budget, "max_blue": max_blue, "complete": complete,
                "found": hits, **stats}
    if mode == "randomized":
        if budget is None:
            raise DecorationError("randomized search needs a sample budget")
        rng = np.random.default_rng(seed)
        done = 0
        lemma_violations = 0
        while done < budget:
            n = min(batch, budget - done)
            colors, states = random_batch(sc, n, rng)
            tw = batch_triangle_weights(table, colors, states)
            nonwhite = colors[:, np.array(sc.vertex_of)].any(axis=2)
            lemma_violations += int(((tw < 2) & nonwhite).sum())
            for idx in np.nonzero(batch_tight(table, colors, states))[0]:
                dec = _to_decoration(colors[idx], states[idx])
                if is_tight(sc, dec):
                    hits.append(dec)
            done += n
        return {"mode": mode, "budget": budget, "complete": False, "samples": done,
                "seed": seed, "found": hits, "lemma_violations": lemma_violations}
    raise DecorationError(f"unknown search mode {mode!r}")


def brute_force_tight(sc: SurfaceComplex) -> list[Decoration]:
    """All nontrivial tight decorations by full enumeration (small complexes only)."""
    table = CornerTable.of(sc)
    ends = [(sc.tail(sc.edge_rep(k)), sc.head(sc.edge_rep(k))) for k in range(sc.n_edges)]
    out = []
    for mask in range(1, 2 ** sc.n_vertices):
        colors = np.array([(mask >> a) & 1 for a in range(sc.n_vertices)], dtype=np.uint8)
        be = [k for k, (a, b) in enumerate(ends) if colors[a] and colors[b]]
        grid = np.array(list(itertools.product((0, 1, -1), repeat=len(be))), dtype=np.int8)
        states = np.zeros((len(grid), sc.n_edges), dtype=np.int8)
        if be:
            states[:, be] = grid
        cols = np.repeat(colors[None, :], len(grid), axis=0)
        for idx in np.nonzero(batch_tight(table, cols, states))[0]:
            out.append(_to_decoration(cols[idx], states[idx]))
    return out


# --- the Euler characteristic certificate ----------------------------------------

def _components(sc: SurfaceComplex, tris: set[int]) -> list[list[int]]:
    left = set(tris)
    out = []
    while left:
        start = min(left)
        left.discard(start)
        comp = [start]
        stack = [start]
        while stack:
            t = stack.pop()
            for u in sc.neighbours(t):
                if u in left:
                    left.discard(u)
                    comp.append(u)
                    stack.append(u)
        out.append(sorted(comp))
    return out


def desingularize(sc: SurfaceComplex, comp) -> dict:
    """Rebuild a component from disjoint triangles glued along its interior edges."""
    comp = set(comp)
    parent = {(t, i): (t, i) for t in comp for i in range(3)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    boundary_sides = []
    n_internal = 0
    for t in comp:
        for s in range(3):
            u, r = sc.gluing[(t, s)]
            if u in comp:
                n_internal += 1
                for a, b in (((t, s), (u, (r + 1) % 3)), ((t, (s + 1) % 3), (u, r))):
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[ra] = rb
            else:
                boundary_sides.append((t, s))
    classes: dict = {}
    for c in parent:
        classes.setdefault(find(c), []).append(c)
    on_boundary = set()
    for t, s in boundary_sides:
        on_boundary.add(find((t, s)))
        on_boundary.add(find((t, (s + 1) % 3)))
    interior = [sorted(cs) for r, cs in classes.items() if r not in on_boundary]
    k = len(boundary_sides)
    f = len(comp)
    V = len(classes)
    E = n_internal // 2 + k
    return {"f": f, "k": k, "V": V, "E": E, "chi": V - E + f, "v_i": len(interior),
            "v_b": V - len(interior), "interior_vertices": sorted(sc.vertex_of[cs[0][0]][cs[0][1]]
                                                                for cs in interior)}


def euler_certificate(sc: SurfaceComplex, dec: Decoration, claimed_tight: bool | None = None) -> dict:
    """Check a decoration claimed to be tight against the Euler characteristic count.

    Each component of the non-white triangles is rebuilt from disjoint
    triangles; tightness would force f <= 2 v_i, while the rebuilt surface
    satisfies chi = (2 v_i - f + k) / 2.  When chi - k/2 < 0 the claim is
    refuted and a blue interior vertex with w > 2 is given as witness.
    ``claimed_tight=None`` means the claim is checked with is_tight first.
    """
    tight = is_tight(sc, dec)
    if claimed_tight is None:
        claimed_tight = tight
    if not dec.nontrivial or not claimed_tight:
        return {"verdict": "not applicable", "tight": tight, "components": []}
    nonwhite = {t for t in range(sc.n_triangles) if any(dec.blue[a] for a in sc.vertex_of[t])}
    comps = []
    for comp in _components(sc, nonwhite):
        d = desingularize(sc, comp)
        slack2 = 2 * d["chi"] - d["k"]          # 2 (chi - k/2)
        w0 = sum(corner_inversion(sc, dec, t, i) for t in comp for i in range(3))
        d.update({
            "triangles": comp,
            "w0": w0,
            "identity_holds": 2 * d["chi"] == 2 * d["v_i"] - d["f"] + d["k"],
            "chi_minus_half_k": slack2 / 2,
            "tightness_bound_holds": d["f"] <= 2 * d["v_i"],
        })
        if slack2 < 0:
            d["verdict"] = "contradiction"
            d["witness"] = [a for a in d["interior_vertices"]
                            if dec.blue[a] and vertex_inversion(sc, dec, a) > 2]
        elif slack2 == 0:
            d["verdict"] = "boundary case"
        else:
            d["verdict"] = "consistent"
        comps.append(d)
    verdicts = {c["verdict"] for c in comps}
    overall = next(v for v in ("contradiction", "boundary case", "consistent") if v in verdicts)
    return {"verdict": overall, "tight": tight, "components": comps}


def lift_decoration(sc: SurfaceComplex, cover: SurfaceComplex, dec: Decoration) -> Decoration:
    """Pull back along a cover whose triangle j lies over triangle j mod f."""
    f = sc.n_triangles
    blue = [False] * cover.n_vertices
    for t in range(cover.n_triangles):
        for i in range(3):
            blue[cover.vertex_of[t][i]] = dec.blue[sc.vertex_of[t % f][i]]
    state = [0] * cover.n_edges
    for k in range(cover.n_edges):
        t, s = cover.edge_rep(k)
        base = (t % f, s)
        state[k] = dec.state[sc.edge_id(base)] * sc.edge_sign(base)
    return Decoration(tuple(blue), tuple(state))
