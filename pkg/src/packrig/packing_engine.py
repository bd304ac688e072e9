"""Disk packings on a triangulated surface as charts glued by Moebius maps.

Every triangle has its own projective chart.  ``transition(side)`` maps the
chart of ``side[0]`` to the chart of the triangle across that side.  A
vertex carries one disk ``S(alpha)`` written in the chart of its home
corner; the disk at any other corner is obtained by walking
counterclockwise around the vertex star and composing transitions.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from . import moebius_geometry as mg
from .surface_complex import (
    ComplexError, Side, SurfaceComplex, dual_spanning_tree, euler_stats,
    parse_complex, validate_quasi_simplicial,
)

R_MAX = 20.0
BUDGET = 100_000


class PackingError(ValueError):
    pass


@dataclass
class Packing:
    complex: SurfaceComplex
    transitions: dict[Side, np.ndarray]      # canonical sides only
    selection: dict[int, np.ndarray]
    home: dict[int, tuple[int, int]]         # vertex -> home corner (triangle, index)
    base: int = 0
    radii: np.ndarray | None = None
    _corner_maps: dict | None = field(default=None, repr=False)
    _star_products: dict | None = field(default=None, repr=False)

    # transitions ------------------------------------------------------
    def transition(self, side: Side) -> np.ndarray:
        sc = self.complex
        if sc.edge_sign(side) > 0:
            return self.transitions[side]
        return np.linalg.inv(self.transitions[sc.reverse(side)])

    def _walk(self):
        sc = self.complex
        maps: dict[tuple[int, int], np.ndarray] = {}
        prods: dict[int, np.ndarray] = {}
        paths: dict[tuple[int, int], list[Side]] = {}
        for alpha in range(sc.n_vertices):
            star = sc.vertex_star(alpha)
            h = star.index(self.home[alpha])
            star = star[h:] + star[:h]
            C = np.eye(2, dtype=complex)
            path: list[Side] = []
            for t, i in star:
                maps[(t, i)] = C
                paths[(t, i)] = list(path)
                cross = (t, (i - 1) % 3)
                C = self.transition(cross) @ C
                path.append(cross)
            prods[alpha] = C
        self._corner_maps = maps
        self._star_products = prods
        self._corner_paths = paths

    def corner_map(self, t: int, i: int) -> np.ndarray:
        """Map from the home chart of the corner's vertex to the chart of t."""
        if self._corner_maps is None:
            self._walk()
        return self._corner_maps[(t, i)]

    def corner_path(self, t: int, i: int) -> list[Side]:
        """Sides crossed (in order) going from the home corner to (t, i)."""
        if self._corner_maps is None:
            self._walk()
        return self._corner_paths[(t, i)]

    def star_product(self, alpha: int) -> np.ndarray:
        if self._star_products is None:
            self._walk()
        return self._star_products[alpha]

    def corner_disk(self, t: int, i: int) -> np.ndarray:
        alpha = self.complex.vertex_of[t][i]
        return mg.act_on_herm(self.corner_map(t, i), self.selection[alpha])

    def tangency_point(self, side: Side) -> np.ndarray:
        t, s = side
        return mg.tangency_point(self.corner_disk(t, s), self.corner_disk(t, (s + 1) % 3))

    # invariants ---------------------------------------------------------
    def star_defects(self) -> dict[int, tuple[float, int]]:
        """Per vertex: distance of the star product from +-I, and the sign."""
        out = {}
        for alpha in range(self.complex.n_vertices):
            P = self.star_product(alpha)
            sign = 1 if np.trace(P).real >= 0 else -1
            out[alpha] = (float(np.linalg.norm(P - sign * np.eye(2), 2)), sign)
        return out

    def check(self, tol=1e-9):
        for alpha, (d, _) in self.star_defects().items():
            if d > tol:
                raise PackingError(f"vertex star product at {alpha} is not +-I (defect {d:.3e})")
        res = evaluate_tangency(self)
        bad = np.argmax(np.abs(res["residual"]))
        if abs(res["residual"][bad]) > tol:
            raise PackingError(f"tangency fails on edge {bad} (residual {res['residual'][bad]:.3e})")
        if not res["future"].all():
            raise PackingError(f"edge {int(np.argmin(res['future']))} is past-directed")
        for t in range(self.complex.n_triangles):
            pts = [self.tangency_point((t, s)) for s in range(3)]
            for a in range(3):
                if mg.same_point(pts[a], pts[(a + 1) % 3], 1e-8):
                    raise PackingError(f"triangle {t} has coincident tangency points")
        return self

    # gauge moves --------------------------------------------------------
    def regauge(self, base: int) -> Packing:
        """Change charts so that transitions along the BFS tree from ``base`` are trivial."""
        sc = self.complex
        tree = dual_spanning_tree(sc, base)
        phi = {base: np.eye(2, dtype=complex)}
        for t in tree["order"][1:]:
            pt, ps = tree["parent"][t]
            # chart of t -> chart of parent -> new chart
            phi[t] = phi[pt] @ self.transition(sc.reverse((pt, ps)))
        trans = {}
        for k in range(sc.n_edges):
            side = sc.edge_rep(k)
            t, u = side[0], sc.reverse(side)[0]
            trans[side] = phi[u] @ self.transition(side) @ np.linalg.inv(phi[t])
        sel = {a: mg.act_on_herm(phi[self.home[a][0]], X) for a, X in self.selection.items()}
        return Packing(sc, trans, sel, dict(self.home), base, self.radii)

    def rehome(self, home: dict[int, tuple[int, int]]) -> Packing:
        sel = {a: self.corner_disk(*home[a]) for a in self.selection}
        return Packing(self.complex, dict(self.transitions), sel, home, self.base, self.radii)

    def apply_global(self, B) -> Packing:
        Bi = np.linalg.inv(B)
        trans = {k: B @ M @ Bi for k, M in self.transitions.items()}
        sel = {a: mg.act_on_herm(B, X) for a, X in self.selection.items()}
        return Packing(self.complex, trans, sel, dict(self.home), self.base, self.radii)

    def replace(self, transitions=None, selection=None) -> Packing:
        return Packing(
            self.complex,
            dict(self.transitions if transitions is None else transitions),
            dict(self.selection if selection is None else selection),
            dict(self.home), self.base, self.radii,
        )

    def cotree(self) -> list[int]:
        return dual_spanning_tree(self.complex, self.base)["cotree"]


def default_home(sc: SurfaceComplex) -> dict[int, tuple[int, int]]:
    home = {}
    for t in range(sc.n_triangles):
        for i in range(3):
            home.setdefault(sc.vertex_of[t][i], (t, i))
    return home


# tangency functional ----------------------------------------------------

def evaluate_tangency(p: Packing) -> dict:
    sc = p.complex
    res = np.empty(sc.n_edges)
    fut = np.empty(sc.n_edges, dtype=bool)
    for k in range(sc.n_edges):
        t, s = sc.edge_rep(k)
        A = p.corner_disk(t, s)
        B = p.corner_disk(t, (s + 1) % 3)
        res[k] = mg.mink(A, B) + 1.0
        S = A + B
        fut[k] = (S[0, 0] + S[1, 1]).real > 0 and np.linalg.det(S).real >= -1e-8
    return {"residual": res, "future": fut}


def dual_disks(p: Packing) -> list[np.ndarray]:
    out = []
    for t in range(p.complex.n_triangles):
        pts = [p.tangency_point((t, s)) for s in range(3)]
        try:
            out.append(mg.circle_through(*pts, side="left"))
        except mg.GeometryError:
            raise PackingError(f"triangle {t} is degenerate") from None
    return out


# Fuchsian solver ------------------------------------------------------------

def _angle_residual(u, tri):
    return kernels.angle_sums(np.exp(u), tri) - 2 * np.pi


def solve_radii(sc: SurfaceComplex, tol=1e-12, budget=BUDGET) -> tuple[np.ndarray, int]:
    """Hyperbolic radii with angle sum 2 pi at every vertex.

    Damped fixed point on log-radii, finished by Newton steps.
    """
    tri = np.array(sc.vertex_of, dtype=np.int64)
    u = np.zeros(sc.n_vertices)
    steps = 0
    while steps < budget:
        steps += 1
        sums = kernels.angle_sums(np.exp(u), tri)
        err = np.abs(sums - 2 * np.pi).max()
        if err < 1e-6:
            break
        u = np.minimum(u + 0.5 * np.log(sums / (2 * np.pi)), np.log(R_MAX))
    for _ in range(50):
        F = _angle_residual(u, tri)
        if np.abs(F).max() < tol * 0.1:
            break
        h = 1e-7
        J = np.empty((len(u), len(u)))
        for k in range(len(u)):
            e = np.zeros(len(u))
            e[k] = h
            J[:, k] = (_angle_residual(u + e, tri) - _angle_residual(u - e, tri)) / (2 * h)
        u = u - np.linalg.solve(J, F)
        steps += 1
    r = np.exp(u)
    if np.abs(_angle_residual(u, tri)).max() > tol or (r >= R_MAX).any():
        raise PackingError("radius iteration did not converge within the budget")
    return r, steps


def _disk_move(c) -> np.ndarray:
    """SU(1,1) matrix sending c to 0."""
    c = complex(c)
    return np.array([[1, -c], [-np.conj(c), 1]]) / np.sqrt(1 - abs(c) ** 2)


def _pair_map(u1, u2, w1, w2) -> np.ndarray:
    """Disk isometry with u1 -> w1 and u2 -> w2 (equal hyperbolic distances)."""
    def normal(a, b):
        T = _disk_move(a)
        v = (T[0, 0] * b + T[0, 1]) / (T[1, 0] * b + T[1, 1])
        ang = np.angle(v)
        R = np.diag([np.exp(-0.5j * ang), np.exp(0.5j * ang)])
        return R @ T
    return np.linalg.inv(normal(w1, w2)) @ normal(u1, u2)


def _moebius_apply(M, z):
    return (M[0, 0] * z + M[0, 1]) / (M[1, 0] * z + M[1, 1])


def solve_fuchsian(sc: SurfaceComplex, tol=1e-12, base=0, budget=BUDGET) -> Packing:
    stats = euler_stats(sc)
    if stats["genus"] < 2:
        raise PackingError(f"genus < 2 (genus {stats['genus']}): no hyperbolic packing")
    if not validate_quasi_simplicial(sc)["accepted"]:
        raise PackingError("nerve is not quasi-simplicial")
    r, _ = solve_radii(sc, tol, budget)
    ang = kernels.corner_angles(r, np.array(sc.vertex_of, dtype=np.int64))

    def standard(t):
        i, j, k = sc.vertex_of[t]
        return [0j, np.tanh((r[i] + r[j]) / 2) + 0j, np.tanh((r[i] + r[k]) / 2) * np.exp(1j * ang[t, 0])]

    std = [standard(t) for t in range(sc.n_triangles)]

    def neighbour_placement(G, t, s):
        u, q = sc.gluing[(t, s)]
        a = _moebius_apply(G, std[t][s])
        b = _moebius_apply(G, std[t][(s + 1) % 3])
        # corner q of u sits at corner s+1 of t, corner q+1 at corner s
        return _pair_map(std[u][q], std[u][(q + 1) % 3], b, a)

    tree = dual_spanning_tree(sc, base)
    G = {base: np.eye(2, dtype=complex)}
    for t in tree["order"][1:]:
        pt, ps = tree["parent"][t]
        G[t] = neighbour_placement(G[pt], pt, ps)
    trans = {}
    for k in range(sc.n_edges):
        t, s = sc.edge_rep(k)
        u = sc.gluing[(t, s)][0]
        trans[(t, s)] = G[u] @ np.linalg.inv(neighbour_placement(G[t], t, s))
    for k in tree["tree"]:
        trans[sc.edge_rep(k)] = np.eye(2, dtype=complex)
    home = default_home(sc)
    sel = {}
    for alpha, (t, i) in home.items():
        rho = np.tanh(r[alpha] / 2)
        disk0 = np.diag([1 / rho, -rho]).astype(complex)
        M = G[t] @ np.linalg.inv(_disk_move(std[t][i]))
        sel[alpha] = mg.act_on_herm(M, disk0)
    return Packing(sc, trans, sel, home, base, r).check(max(10 * tol, 1e-10))


# file format -------------------------------------------------------------------

def _cpair(z):
    return [float(z.real), float(z.imag)]


def write_packing(p: Packing) -> dict:
    sc = p.complex
    return {
        "complex": sc.to_document(),
        "base": p.base,
        "transitions": [
            {"dual_edge": list(side), "matrix": [_cpair(z) for z in p.transitions[side].ravel()]}
            for side in (sc.edge_rep(k) for k in range(sc.n_edges))
        ],
        "selection": [
            {"vertex": a, "home": p.home[a][0], "corner": p.home[a][1],
             "X": [float(v) for v in mg.herm_to_vec(p.selection[a])]}
            for a in range(sc.n_vertices)
        ],
    }


def read_packing(document, tol=1e-9) -> Packing:
    if isinstance(document, (str, bytes)):
        document = json.loads(document) if document else None
    if not isinstance(document, dict) or not document:
        raise PackingError("empty or malformed packing document")
    try:
        sc = parse_complex(document["complex"])
        trans: dict[Side, np.ndarray] = {}
        for item in document["transitions"]:
            side = (int(item["dual_edge"][0]), int(item["dual_edge"][1]))
            M = np.array([complex(a, b) for a, b in item["matrix"]]).reshape(2, 2)
            if sc.edge_sign(side) < 0:
                side, M = sc.reverse(side), np.linalg.inv(M)
            if side in trans:
                if np.abs(trans[side] - M).max() > tol:
                    raise PackingError(f"transitions across {side} are not mutually inverse")
            trans[side] = M
        sel, home = {}, {}
        for item in document["selection"]:
            a = int(item["vertex"])
            t = int(item["home"])
            i = int(item.get("corner", list(sc.vertex_of[t]).index(a)))
            if sc.vertex_of[t][i] != a:
                raise PackingError(f"home corner of vertex {a} is not at that vertex")
            home[a] = (t, i)
            sel[a] = mg.vec_to_herm(item["X"])
        base = int(document.get("base", 0))
    except (KeyError, TypeError, IndexError, ComplexError) as exc:
        raise PackingError(f"malformed packing document: {exc}") from None
    missing = [k for k in range(sc.n_edges) if sc.edge_rep(k) not in trans]
    if missing or len(sel) != sc.n_vertices:
        raise PackingError("packing document is missing transitions or selection values")
    return Packing(sc, trans, sel, home, base).check(tol)


def save_packing(p: Packing, path):
    Path(path).write_text(json.dumps(write_packing(p), indent=1) + "\n")


def load_packing(path) -> Packing:
    return read_packing(json.loads(Path(path).read_text()))


# developed picture --------------------------------------------------------------

def develop(p: Packing, depth: int) -> list[tuple[int, np.ndarray]]:
    """Triangles of the universal cover within dual distance ``depth`` of the base.

    Each entry is (triangle, map from its chart to the base chart).
    """
    sc = p.complex
    out = [(p.base, np.eye(2, dtype=complex))]
    queue = deque([(p.base, np.eye(2, dtype=complex), None, 0)])
    while queue:
        t, D, came, d = queue.popleft()
        if d == depth:
            continue
        for s in range(3):
            if (t, s) == came:
                continue
            u, q = sc.gluing[(t, s)]
            Du = D @ p.transition((u, q))
            out.append((u, Du))
            queue.append((u, Du, (u, q), d + 1))
    return out


def _circles(disks, seen):
    rows = []
    for X in disks:
        c, rad, kind = mg.euclidean_circle(X)
        if kind != "disk":
            continue
        key = (round(c.real, 8), round(c.imag, 8), round(rad, 8))
        if key in seen:
            continue
        seen.add(key)
        rows.append((c, rad))
    return rows


def export_svg(p: Packing, depth: int = 2, dual: bool = True, size: int = 800) -> str:
    cells = develop(p, depth)
    seen: set = set()
    packing = []
    for t, D in cells:
        packing += _circles([mg.act_on_herm(D, p.corner_disk(t, i)) for i in range(3)], seen)
    duals = []
    if dual:
        dd = dual_disks(p)
        dseen: set = set()
        for t, D in cells:
            duals += _circles([mg.act_on_herm(D, dd[t])], dseen)
    half = size / 2

    def circle(c, rad, cls):
        return (f'<circle class="{cls}" cx="{half + half * c.real:.4f}" '
                f'cy="{half - half * c.imag:.4f}" r="{half * rad:.4f}"/>')

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        "<style>.packing{fill:none;stroke:#1f4e79;stroke-width:0.6}"
        ".dual{fill:none;stroke:#c0504d;stroke-width:0.4}"
        ".frame{fill:none;stroke:#000;stroke-width:1}</style>",
        f'<circle class="frame" cx="{half:.4f}" cy="{half:.4f}" r="{half:.4f}"/>',
        '<g class="packing">',
    ]
    lines += [circle(c, rad, "packing") for c, rad in packing]
    lines.append("</g>")
    if dual:
        lines.append('<g class="dual">')
        lines += [circle(c, rad, "dual") for c, rad in duals]
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
