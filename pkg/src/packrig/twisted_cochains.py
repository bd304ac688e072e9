"""sl2-valued cochains on a triangulation twisted by the holonomy of a packing.

Storage.  A 0-cochain is a (v, 3) complex array of (a, b, c) coordinates,
each row in the home chart of its vertex.  A 1-cochain is an (e, 3) array
holding the value on the canonical orientation of each edge, in the chart
of the triangle containing it; the value on the reverse edge is
``-Ad(transition) Q``.  A 2-cochain is an (f, 3) array, each row in its
own triangle's chart.

The degree-1 pairing sums once per unoriented edge.  With that
normalization both adjoint identities below hold exactly.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from . import moebius_geometry as mg
from .numrank import numerical_rank
from .packing_engine import Packing

KILLING = np.array([[2, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)


class HolonomyError(ValueError):
    pass


def killing3(x, y) -> complex:
    """Killing form tr(AB) in (a, b, c) coordinates, summed over leading axes."""
    return complex(np.sum((np.asarray(x) @ KILLING) * np.asarray(y)))


class CochainComplex:
    def __init__(self, packing: Packing):
        self.p = packing
        self.sc = packing.complex
        sc = self.sc
        self.v, self.e, self.f = sc.n_vertices, sc.n_edges, sc.n_triangles
        self._ad_corner = {}
        for t in range(self.f):
            for i in range(3):
                self._ad_corner[(t, i)] = mg.adjoint_matrix(packing.corner_map(t, i))
        self._ad_side = {side: mg.adjoint_matrix(packing.transition(side)) for side in sc.sides()}

    # per-cell access ----------------------------------------------------
    def value_at(self, Q, side) -> np.ndarray:
        """Value of a 1-cochain on an arbitrary oriented edge, in its triangle's chart."""
        k = self.sc.edge_id(side)
        if self.sc.edge_sign(side) > 0:
            return Q[k]
        return -self._ad_side[self.sc.reverse(side)] @ Q[k]

    def _block(self, rows, cols):
        return np.zeros((3 * rows, 3 * cols), dtype=complex)

    # operator matrices -------------------------------------------------
    @cached_property
    def D0(self) -> np.ndarray:
        sc = self.sc
        M = self._block(self.e, self.v)
        for k in range(self.e):
            t, s = sc.edge_rep(k)
            a, b = sc.tail((t, s)), sc.head((t, s))
            M[3 * k:3 * k + 3, 3 * b:3 * b + 3] += self._ad_corner[(t, (s + 1) % 3)]
            M[3 * k:3 * k + 3, 3 * a:3 * a + 3] -= self._ad_corner[(t, s)]
        return M

    def _side_to_canonical(self, side) -> tuple[int, np.ndarray]:
        """(edge id, 3x3 matrix) with value_at(Q, side) = matrix @ Q[edge id]."""
        k = self.sc.edge_id(side)
        if self.sc.edge_sign(side) > 0:
            return k, np.eye(3, dtype=complex)
        return k, -self._ad_side[self.sc.reverse(side)]

    @cached_property
    def D1(self) -> np.ndarray:
        M = self._block(self.f, self.e)
        for t in range(self.f):
            for s in range(3):
                k, L = self._side_to_canonical((t, s))
                M[3 * t:3 * t + 3, 3 * k:3 * k + 3] += L
        return M

    @cached_property
    def Delta2(self) -> np.ndarray:
        sc = self.sc
        M = self._block(self.e, self.f)
        for k in range(self.e):
            t, s = sc.edge_rep(k)
            u, q = sc.reverse((t, s))
            M[3 * k:3 * k + 3, 3 * t:3 * t + 3] += np.eye(3)
            M[3 * k:3 * k + 3, 3 * u:3 * u + 3] -= self._ad_side[(u, q)]
        return M

    @cached_property
    def Delta1(self) -> np.ndarray:
        sc = self.sc
        M = self._block(self.v, self.e)
        for t in range(self.f):
            for s in range(3):
                alpha = sc.vertex_of[t][s]
                k, L = self._side_to_canonical((t, s))
                back = np.linalg.inv(self._ad_corner[(t, s)])
                M[3 * alpha:3 * alpha + 3, 3 * k:3 * k + 3] += back @ L
        return M

    # operators on arrays ----------------------------------------------------
    def d0(self, P):
        return (self.D0 @ np.asarray(P).ravel()).reshape(self.e, 3)

    def d1(self, Q):
        return (self.D1 @ np.asarray(Q).ravel()).reshape(self.f, 3)

    def delta2(self, R):
        return (self.Delta2 @ np.asarray(R).ravel()).reshape(self.e, 3)

    def delta1(self, Q):
        return (self.Delta1 @ np.asarray(Q).ravel()).reshape(self.v, 3)

    @staticmethod
    def pairing(a, b) -> complex:
        return killing3(a, b)

    def pairing_oriented(self, Q, Qp) -> complex:
        """Degree-1 pairing summed over both orientations of every edge."""
        total = 0j
        for side in self.sc.sides():
            total += killing3(self.value_at(Q, side), self.value_at(Qp, side))
        return total

    # holonomy -----------------------------------------------------------------
    def generators(self) -> list[np.ndarray]:
        """Holonomy of the loops closing each cotree edge, in the base chart."""
        q = self.p.regauge(self.p.base)
        return [q.transition(self.sc.edge_rep(k)) for k in q.cotree()]

    def invariant_dimension(self) -> int:
        """Dimension of sl2 vectors fixed by every generator (H^0)."""
        gens = self.generators()
        M = np.vstack([mg.adjoint_matrix(g) - np.eye(3) for g in gens])
        return numerical_rank(M)["nullity"]

    def common_fixed_point(self, tol=1e-8):
        gens = self.generators()
        for g in gens:
            if np.linalg.norm(g - np.eye(2)) > tol and np.linalg.norm(g + np.eye(2)) > tol:
                break
        else:
            return mg.INF
        _, vecs = np.linalg.eig(g)
        for k in range(2):
            p = mg.rp1(*vecs[:, k])
            if all(abs(mg.bracket(h @ p, p)) < tol * np.linalg.norm(h) for h in gens):
                return p
        return None


def cohomology_dims(p: Packing) -> dict:
    cx = CochainComplex(p)
    if cx.common_fixed_point() is not None or cx.invariant_dimension() > 0:
        raise HolonomyError("holonomy is elementary")
    r0 = numerical_rank(cx.D0)
    r1 = numerical_rank(cx.D1)
    # harmonic 1-cochains: common kernel of d0^* and d1 (stacked, not squared)
    L = np.vstack([cx.D0.conj().T, cx.D1])
    rh = numerical_rank(L)
    status = "ok" if all(r["status"] == "ok" for r in (r0, r1, rh)) else "indeterminate"
    h1 = 3 * cx.e - r0["rank"] - r1["rank"]
    return {
        "rank_d0": r0["rank"], "rank_d1": r1["rank"], "dim_H1": h1,
        "dim_harmonic": rh["nullity"], "gap_d0": r0["gap"], "gap_d1": r1["gap"],
        "gap_H1": rh["gap"], "status": status,
        "expected": {"rank_d0": 3 * cx.v, "rank_d1": 3 * cx.f, "dim_H1": 3 * (cx.e - cx.v - cx.f)},
    }
