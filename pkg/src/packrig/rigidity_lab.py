"""Linearized tangency, the spaces V and H, and the rigidity certificates.

Deformation coordinates.  Transitions across tree edges of the dual
spanning tree stay fixed (a gauge choice).  A cotree transition moves as
``M -> exp(h T) M`` with ``T`` in sl2(C), six real numbers per cotree
edge.  Each disk moves in its home chart by a tangent vector of dS^3,
written in an orthonormal basis of the Minkowski-orthogonal complement
(three real numbers per vertex).  The cotree tangents are then restricted
to the solutions of the linearized vertex-star closing conditions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import moebius_geometry as mg
from .numrank import null_space, numerical_rank
from .packing_engine import Packing
from .surface_complex import dual_spanning_tree
from .twisted_cochains import KILLING, CochainComplex


class RigidityError(ValueError):
    pass


class IndeterminateRank(RigidityError):
    """A rank needed to set up a computation has no clear spectral gap."""


# --- small helpers ----------------------------------------------------------

def tangent_frame(X) -> np.ndarray:
    """4x3 orthonormal (Euclidean) basis of {Y : mink(X, Y) = 0} in herm coordinates."""
    g = mg.MINK_GRAM @ mg.herm_to_vec(X)
    _, _, vh = np.linalg.svd(g[None, :])
    return vh[1:].T


def realify(K) -> np.ndarray:
    """Real matrix of a complex-linear map, coordinates ordered (Re..., Im...)."""
    return np.block([[K.real, -K.imag], [K.imag, K.real]])


def _sl2_real_basis():
    out = []
    for k in range(6):
        r = np.zeros(6)
        r[k] = 1.0
        out.append(mg.real_to_sl2(r))
    return out


SL2_BASIS = _sl2_real_basis()


def triangle_motion_disks(Xs, Xdots, tol=1e-8) -> np.ndarray:
    """The unique A with Y_A(X_i) = Xdot_i for three pairwise tangent disks."""
    M = np.vstack([mg._action_matrix(X) for X in Xs])
    rhs = np.concatenate([mg.herm_to_vec(Xd) for Xd in Xdots])
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] < 1e-9 * s[0]:
        raise RigidityError("degenerate triangle: motion is not unique")
    r, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    if np.abs(M @ r - rhs).max() > tol * max(1.0, np.abs(rhs).max()):
        raise RigidityError("velocities violate the linearized tangency conditions")
    return mg.real_to_sl2(r)


def triangle_motion(p: Packing, t: int, Sdots) -> np.ndarray:
    return triangle_motion_disks([p.corner_disk(t, i) for i in range(3)], Sdots)


# --- the Jacobian -----------------------------------------------------------

@dataclass
class JacobianModel:
    matrix: np.ndarray          # e x (dim Z1 + 3v)
    full: np.ndarray            # e x (6 n_cot + 3v), before restricting to Z1
    closing: np.ndarray         # 6v x 6 n_cot
    z1_basis: np.ndarray        # 6 n_cot x dim Z1
    cotree: list[int]
    frames: list[np.ndarray]
    n_holonomy: int

    @property
    def vertex_block(self) -> np.ndarray:
        return self.matrix[:, self.n_holonomy:]

    def to_full(self, x) -> np.ndarray:
        x = np.asarray(x)
        return np.concatenate([self.z1_basis @ x[:self.n_holonomy], x[self.n_holonomy:]])


class Deformation:
    """First-order motion of a packing: cotree tangents plus disk velocities."""

    def __init__(self, p: Packing):
        self.p = p
        sc = p.complex
        self.cotree = p.cotree()
        self.slot = {k: j for j, k in enumerate(self.cotree)}
        self.frames = [tangent_frame(p.selection[a]) for a in range(sc.n_vertices)]
        self.n_hol = 6 * len(self.cotree)
        self.n = self.n_hol + 3 * sc.n_vertices

    def split(self, x):
        sc = self.p.complex
        T = [mg.real_to_sl2(x[6 * j:6 * j + 6]) for j in range(len(self.cotree))]
        Sdot = [mg.vec_to_herm(self.frames[a] @ x[self.n_hol + 3 * a:self.n_hol + 3 * a + 3])
                for a in range(sc.n_vertices)]
        return T, Sdot

    def side_tangent(self, T, side) -> np.ndarray:
        """U with d/dt transition(side) = U @ transition(side)."""
        sc = self.p.complex
        k = sc.edge_id(side)
        if k not in self.slot:
            return np.zeros((2, 2), dtype=complex)
        Tk = T[self.slot[k]]
        if sc.edge_sign(side) > 0:
            return Tk
        return -mg.adjoint(self.p.transition(side), Tk)

    def path_tangent(self, T, path) -> np.ndarray:
        U = np.zeros((2, 2), dtype=complex)
        for side in path:
            M = self.p.transition(side)
            U = mg.adjoint(M, U) + self.side_tangent(T, side)
        return U

    def corner_velocity(self, T, Sdot, t, i) -> np.ndarray:
        p = self.p
        alpha = p.complex.vertex_of[t][i]
        U = self.path_tangent(T, p.corner_path(t, i))
        C = p.corner_map(t, i)
        return mg.infinitesimal_action(U, p.corner_disk(t, i)) + mg.act_on_herm(C, Sdot[alpha])

    def tangency_derivative(self, x) -> np.ndarray:
        p = self.p
        sc = p.complex
        T, Sdot = self.split(x)
        out = np.empty(sc.n_edges)
        for k in range(sc.n_edges):
            t, s = sc.edge_rep(k)
            a, b = p.corner_disk(t, s), p.corner_disk(t, (s + 1) % 3)
            da = self.corner_velocity(T, Sdot, t, s)
            db = self.corner_velocity(T, Sdot, t, (s + 1) % 3)
            out[k] = mg.mink(da, b) + mg.mink(a, db)
        return out

    def closing_derivative(self, x) -> np.ndarray:
        p = self.p
        T, _ = self.split(x)
        out = []
        for alpha in range(p.complex.n_vertices):
            star = p.complex.vertex_star(alpha)
            h = star.index(p.home[alpha])
            star = star[h:] + star[:h]
            path = [(t, (i - 1) % 3) for t, i in star]
            out.append(mg.sl2_to_real(self.path_tangent(T, path)))
        return np.concatenate(out)

    def orbit_vector(self, A) -> np.ndarray:
        """Full coordinates of the infinitesimal global conjugation by A."""
        p = self.p
        sc = p.complex
        tree = dual_spanning_tree(sc, p.base)
        g = {p.base: A}
        for t in tree["order"][1:]:
            pt, ps = tree["parent"][t]
            g[t] = mg.adjoint(p.transition((pt, ps)), g[pt])
        x = np.zeros(self.n)
        for j, k in enumerate(self.cotree):
            t, s = sc.edge_rep(k)
            u = sc.reverse((t, s))[0]
            x[6 * j:6 * j + 6] = mg.sl2_to_real(g[u] - mg.adjoint(p.transition((t, s)), g[t]))
        for a in range(sc.n_vertices):
            Y = mg.infinitesimal_action(g[p.home[a][0]], p.selection[a])
            x[self.n_hol + 3 * a:self.n_hol + 3 * a + 3] = self.frames[a].T @ mg.herm_to_vec(Y)
        return x

    def displaced(self, x, h) -> Packing:
        """Packing moved by h along x (exactly on dS^3, transitions via exp)."""
        p = self.p
        sc = p.complex
        T, Sdot = self.split(x)
        trans = dict(p.transitions)
        for j, k in enumerate(self.cotree):
            side = sc.edge_rep(k)
            trans[side] = mg.expm_sl2(h * T[j]) @ trans[side]
        sel = {}
        for a in range(sc.n_vertices):
            X = p.selection[a]
            A = mg.normal_representative(X, Sdot[a])
            sel[a] = mg.act_on_herm(mg.expm_sl2(h * A), X)
        return p.replace(transitions=trans, selection=sel)


def build_jacobian(p: Packing) -> JacobianModel:
    d = Deformation(p)
    eye = np.eye(d.n)
    full = np.column_stack([d.tangency_derivative(eye[:, j]) for j in range(d.n)])
    closing = np.column_stack([d.closing_derivative(eye[:, j]) for j in range(d.n_hol)])
    rc = numerical_rank(closing)
    if rc["status"] != "ok":
        raise IndeterminateRank("closing conditions have no clear rank")
    Z = null_space(closing, rc["rank"])
    J = np.hstack([full[:, :d.n_hol] @ Z, full[:, d.n_hol:]])
    model = JacobianModel(J, full, closing, Z, d.cotree, d.frames, Z.shape[1])
    model.deformation = d
    return model


def orbit_basis(model: JacobianModel) -> np.ndarray:
    """Columns: the 6 global-conjugation directions in Jacobian coordinates."""
    d = model.deformation
    cols = []
    for A in SL2_BASIS:
        x = d.orbit_vector(A)
        hol = model.z1_basis.T @ x[:d.n_hol]
        cols.append(np.concatenate([hol, x[d.n_hol:]]))
    return np.column_stack(cols)


def jacobian_rank_report(model: JacobianModel) -> dict:
    J = model.matrix
    r = numerical_rank(J)
    K = null_space(J, r["rank"])
    B = orbit_basis(model)
    orbit_residual = float(np.abs(J @ B).max() / max(1.0, np.abs(B).max()))
    rb = numerical_rank(B)
    # orbit directions in kernel coordinates; H_R is their orthogonal complement in ker J
    C = K.T @ B
    rq = numerical_rank(C)
    HR = K @ null_space(C.T, rq["rank"]) if K.size else np.zeros((J.shape[1], 0))
    e, n = J.shape
    status = "ok" if all(x["status"] == "ok" for x in (r, rb, rq)) else "indeterminate"
    if rq["rank"] != rb["rank"]:
        status = "indeterminate"
    return {
        "shape": [e, n], "rank": r["rank"], "kernel": r["nullity"],
        "orbit_dim": rb["rank"], "kernel_mod_orbit": r["nullity"] - rq["rank"],
        "orbit_residual": orbit_residual, "gap": r["gap"], "status": status,
        "sigma": r["sigma"].tolist(), "kernel_basis": K, "hr_basis": HR,
    }


def frozen_report(model: JacobianModel) -> dict:
    r = numerical_rank(model.vertex_block)
    return {"shape": list(model.vertex_block.shape), "rank": r["rank"], "kernel": r["nullity"],
            "gap": r["gap"], "status": r["status"], "sigma_min": float(r["sigma"][-1]),
            "sigma_max": float(r["sigma"][0])}


# --- V, H and the totally real splitting ------------------------------------

def v_basis(p: Packing) -> list[np.ndarray]:
    """Per canonical edge, the nilpotent with a double zero at its tangency point."""
    sc = p.complex
    return [mg.nilpotent_at(p.tangency_point(sc.edge_rep(k))) for k in range(sc.n_edges)]


def v_matrix(p: Packing) -> np.ndarray:
    """3e x e complex matrix embedding V-coefficients into 1-cochains."""
    basis = v_basis(p)
    e = len(basis)
    M = np.zeros((3 * e, e), dtype=complex)
    for k, N in enumerate(basis):
        M[3 * k:3 * k + 3, k] = mg.sl2_to_vec(N)
    return M


def delta_on_v_report(p: Packing) -> dict:
    cx = CochainComplex(p)
    A = cx.Delta1 @ v_matrix(p)
    r = numerical_rank(A)
    H = null_space(A, r["rank"])
    return {"shape": list(A.shape), "rank": r["rank"], "dim_H": r["nullity"], "gap": r["gap"],
            "status": r["status"], "H_basis": H,
            "kernel_residual": float(np.abs(A @ H).max()) if H.size else 0.0}


def joint_real_generator(X1, X2) -> np.ndarray:
    gens = mg.joint_stabilizer([X1, X2])
    if len(gens) != 1:
        raise RigidityError(f"joint stabilizer has dimension {len(gens)}, expected 1")
    return gens[0]


def real_split(p: Packing, Q, tol=1e-8):
    """Split a V-valued 1-cochain (e, 3) into Q1 + i Q2 with both parts tangent to both disks."""
    sc = p.complex
    Q = np.asarray(Q, dtype=complex)
    Q1 = np.zeros_like(Q)
    Q2 = np.zeros_like(Q)
    for k in range(sc.n_edges):
        t, s = sc.edge_rep(k)
        X1, X2 = p.corner_disk(t, s), p.corner_disk(t, (s + 1) % 3)
        N0 = mg.sl2_to_vec(joint_real_generator(X1, X2))
        q = Q[k]
        c = np.vdot(N0, q) / np.vdot(N0, N0)
        if np.linalg.norm(q - c * N0) > tol * max(1.0, np.linalg.norm(q)):
            raise RigidityError(f"cochain is not in V on edge {k}")
        Q1[k] = c.real * N0
        Q2[k] = c.imag * N0
    return Q1, Q2


def infinitesimal_cochain(p: Packing, model: JacobianModel, x) -> np.ndarray:
    """The 1-cochain Q(e) = R(tau(e)) - R(tau(e*)) of a tangent vector (Jacobian coordinates)."""
    d = model.deformation
    sc = p.complex
    T, Sdot = d.split(model.to_full(x))
    R = []
    for t in range(sc.n_triangles):
        vel = [d.corner_velocity(T, Sdot, t, i) for i in range(3)]
        R.append(triangle_motion(p, t, vel))
    Q = np.zeros((sc.n_edges, 3), dtype=complex)
    for k in range(sc.n_edges):
        t, s = sc.edge_rep(k)
        back = sc.reverse((t, s))
        u = back[0]
        other = mg.adjoint(p.transition(back), R[u]) + d.side_tangent(T, back)
        Q[k] = mg.sl2_to_vec(R[t] - other)
    return Q


def v_coordinates(p: Packing, Q) -> np.ndarray:
    basis = v_basis(p)
    out = np.empty(len(basis), dtype=complex)
    for k, N in enumerate(basis):
        n = mg.sl2_to_vec(N)
        out[k] = np.vdot(n, Q[k]) / np.vdot(n, n)
    return out


def totally_real_report(p: Packing, model: JacobianModel, report=None) -> dict:
    """Compare H_R (tangent directions modulo the orbit) with H = ker(delta) on V."""
    report = report or jacobian_rank_report(model)
    HR = report["hr_basis"]
    coords = []
    v_resid = 0.0
    for j in range(HR.shape[1]):
        Q = infinitesimal_cochain(p, model, HR[:, j])
        a = v_coordinates(p, Q)
        v_resid = max(v_resid, float(np.abs(Q - (v_matrix(p) @ a).reshape(-1, 3)).max()))
        coords.append(a)
    A = np.column_stack(coords) if coords else np.zeros((p.complex.n_edges, 0))
    cx = CochainComplex(p)
    delta_resid = float(np.abs(cx.Delta1 @ v_matrix(p) @ A).max()) if coords else 0.0
    dv = delta_on_v_report(p)
    real_rank = numerical_rank(np.vstack([A.real, A.imag]))["rank"]
    complex_rank = numerical_rank(A)["rank"]
    joint = numerical_rank(np.hstack([A, dv["H_basis"]]))["rank"]
    # largest principal angle (its sine) between span_C(H_R) and H
    H = dv["H_basis"]
    u, sv, _ = np.linalg.svd(A, full_matrices=False)
    U = u[:, :complex_rank]
    angle = float(np.linalg.svd(U - H @ (H.conj().T @ U), compute_uv=False).max()) if U.size else 0.0
    return {"dim_HR": A.shape[1], "real_rank": real_rank, "complex_rank": complex_rank,
            "rank_with_H": joint, "dim_H": dv["dim_H"], "max_angle_sine": angle,
            "v_residual": v_resid, "delta_residual": delta_resid, "coords": A}


# --- vanishing theorem ---------------------------------------------------------

def _vanishing_charts(p: Packing):
    sc = p.complex
    out = []
    for k in range(sc.n_edges):
        side = sc.edge_rep(k)
        q = p.tangency_point(side)
        out.append((side, q, "w" if abs(q[0]) > 10 * abs(q[1]) else "z"))
    return out


def vanishing_matrix(p: Packing) -> np.ndarray:
    """Real (2e x 6v) matrix of P -> field mismatch at each tangency point."""
    sc = p.complex
    v, e = sc.n_vertices, sc.n_edges
    M = np.zeros((2 * e, 6 * v))
    charts = _vanishing_charts(p)
    for a in range(v):
        for j, B in enumerate(SL2_BASIS):
            col = 6 * a + j
            for k, ((t, s), q, chart) in enumerate(charts):
                val = 0j
                for i, sign in ((s, -1), ((s + 1) % 3, 1)):
                    if sc.vertex_of[t][i] != a:
                        continue
                    A = mg.adjoint(p.corner_map(t, i), B)
                    val += sign * mg.field_value(A, q, chart)[0]
                M[2 * k, col] = val.real
                M[2 * k + 1, col] = val.imag
    return M


def vanishing_matrix_via_d0(p: Packing) -> np.ndarray:
    """Same operator assembled as P -> killing(dP(e), N_e), rescaled to the field charts.

    killing(A, N_p) = -z1^2 q_A(z) in the z chart and z0^2 q_A(w) in the w chart.
    """
    sc = p.complex
    cx = CochainComplex(p)
    e, v = sc.n_edges, sc.n_vertices
    K = np.zeros((e, 3 * e), dtype=complex)
    for k, ((t, s), q, chart) in enumerate(_vanishing_charts(p)):
        n = mg.sl2_to_vec(mg.nilpotent_at(q))
        scale = -1.0 / q[1] ** 2 if chart == "z" else 1.0 / q[0] ** 2
        K[k, 3 * k:3 * k + 3] = scale * (KILLING @ n)
    C = K @ cx.D0                   # e x 3v complex
    # reorder to (vertex, Re a, Re b, Re c, Im a, Im b, Im c) columns and (Re, Im) rows
    R = realify(C)                  # [Re rows; Im rows] x [Re cols; Im cols]
    out = np.zeros((2 * e, 6 * v))
    for a in range(v):
        for j in range(3):
            out[0::2, 6 * a + j] = R[:e, 3 * a + j]
            out[1::2, 6 * a + j] = R[e:, 3 * a + j]
            out[0::2, 6 * a + 3 + j] = R[:e, 3 * v + 3 * a + j]
            out[1::2, 6 * a + 3 + j] = R[e:, 3 * v + 3 * a + j]
    return out


def vanishing_certificate(p: Packing) -> dict:
    M = vanishing_matrix(p)
    Malt = vanishing_matrix_via_d0(p)
    r = numerical_rank(M)
    r_alt = numerical_rank(Malt)
    s = r["sigma"]
    return {
        "shape": list(M.shape), "kernel": r["nullity"], "sigma_min": float(s[-1]),
        "sigma_max": float(s[0]), "ratio": float(s[-1] / s[0]), "gap": r["gap"],
        "status": r["status"], "alt_kernel": r_alt["nullity"],
        "alt_sigma_min": float(r_alt["sigma"][-1]),
        "assembly_difference": float(np.abs(M - Malt).max() / np.abs(M).max()),
    }


def projective_rigidity_report(p: Packing, model: JacobianModel | None = None) -> dict:
    model = model or build_jacobian(p)
    fr = frozen_report(model)
    # proof route: turn the least-constrained disk velocities into a 0-cochain
    # of normal fields and measure how far it is from the vanishing hypotheses
    _, s, vh = np.linalg.svd(model.vertex_block)
    d = model.deformation
    x = np.zeros(d.n)
    x[d.n_hol:] = vh[-1]
    _, Sdot = d.split(x)
    P = np.array([mg.sl2_to_real(mg.normal_representative(p.selection[a], Sdot[a]))
                  for a in range(p.complex.n_vertices)])
    Pr = P.ravel()
    mismatch = float(np.linalg.norm(vanishing_matrix(p) @ Pr) / max(np.linalg.norm(Pr), 1e-300))
    B = orbit_basis(model)
    holo_part = float(np.linalg.norm(B[:model.n_holonomy], axis=0).min())
    return {**fr, "proof_route_mismatch": mismatch, "orbit_min_holonomy_part": holo_part}
