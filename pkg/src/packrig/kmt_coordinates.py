"""Edge cross ratios of a packing and the rank of their differential.

For an edge e with adjacent triangles t1 = tau(e) and t2 = tau(e*), the
boundary of t1 u t2 is labelled e1, e2 (in t1, following e
counterclockwise) and e3, e4 (in t2, following e*).  The raw value is the
image of p(e4) under the Moebius map sending (p(e), p(e1), p(e2)) to
(inf, 0, 1), multiplied by ``CONVENTION = 1j``.  With that constant the
configuration of dual half-planes {Im z > 0} and {Im z < -h} gives +h.
"""
from __future__ import annotations

import numpy as np

from . import moebius_geometry as mg
from .numrank import numerical_rank
from .packing_engine import Packing
from .rigidity_lab import (
    JacobianModel, build_jacobian, infinitesimal_cochain, jacobian_rank_report,
    joint_real_generator,
)

CONVENTION = 1j
IMAG_TOL = 1e-8


class CrossRatioError(ValueError):
    pass


def normalized_coordinate(p, p1, p2, p4) -> complex:
    """Image of p4 under the map sending (p, p1, p2) to (inf, 0, 1)."""
    den = mg.bracket(p4, p) * mg.bracket(p2, p1)
    if abs(mg.bracket(p, p1)) < 1e-12 or abs(mg.bracket(p1, p2)) < 1e-12 or abs(den) < 1e-14:
        raise CrossRatioError("degenerate edge neighbourhood")
    return mg.bracket(p4, p1) * mg.bracket(p2, p) / den


def edge_points(p: Packing, k: int):
    """Tangency points (p(e), p(e1), p(e2), p(e4)) in the chart of tau(e)."""
    sc = p.complex
    t, s = sc.edge_rep(k)
    u, q = sc.reverse((t, s))
    pts = [p.tangency_point((t, s)), p.tangency_point((t, (s + 1) % 3)),
           p.tangency_point((t, (s + 2) % 3))]
    p4 = mg.act_on_point(p.transition((u, q)), p.tangency_point((u, (q + 2) % 3)))
    return pts + [p4]


def cross_ratio_raw(p: Packing, k: int) -> complex:
    return CONVENTION * normalized_coordinate(*edge_points(p, k))


def cross_ratio(p: Packing, k: int) -> float:
    z = cross_ratio_raw(p, k)
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z)):
        raise CrossRatioError(f"edge {k}: cross ratio is not real (imaginary part {z.imag:.3e})")
    return z.real


def cross_ratio_map(p: Packing, strict=True) -> dict:
    raw = np.array([cross_ratio_raw(p, k) for k in range(p.complex.n_edges)])
    max_imag = float(np.abs(raw.imag).max())
    real_ok = bool(max_imag <= IMAG_TOL * max(1.0, np.abs(raw).max()))
    if strict and not real_ok:
        raise CrossRatioError(f"cross ratios not real: max imaginary part {max_imag:.3e}")
    return {"values": raw.real, "raw": raw, "max_imag": max_imag, "real": real_ok,
            "convention": "i * image of p(e4) under (p(e), p(e1), p(e2)) -> (inf, 0, 1)"}


# --- differential --------------------------------------------------------------

def _difference(p: Packing, model: JacobianModel, x, h):
    d = model.deformation
    xf = model.to_full(x)
    plus = cross_ratio_map(d.displaced(xf, h), strict=False)["raw"]
    minus = cross_ratio_map(d.displaced(xf, -h), strict=False)["raw"]
    return (plus - minus) / (2 * h)


def cr_derivative(p: Packing, model: JacobianModel, x, steps=(1e-4, 1e-5)) -> tuple[np.ndarray, float]:
    """Richardson-extrapolated central difference of the raw cross ratios along x."""
    h1, h2 = steps
    D1 = _difference(p, model, x, h1)
    D2 = _difference(p, model, x, h2)
    ratio = (h1 / h2) ** 2
    D = D2 + (D2 - D1) / (ratio - 1)
    return D, float(np.abs(D1 - D2).max())


def edge_real_coordinates(p: Packing, Q) -> np.ndarray:
    """Q(e) = c_e N0(e) with N0 the real generator fixing both disks of e."""
    sc = p.complex
    out = np.empty(sc.n_edges)
    for k in range(sc.n_edges):
        t, s = sc.edge_rep(k)
        N0 = mg.sl2_to_vec(joint_real_generator(p.corner_disk(t, s), p.corner_disk(t, (s + 1) % 3)))
        N0 = N0 / np.linalg.norm(N0)
        c = np.vdot(N0, Q[k])
        out[k] = c.real
    return out


def kmt_differential_rank(p: Packing, model: JacobianModel | None = None, report=None) -> dict:
    model = model or build_jacobian(p)
    report = report or jacobian_rank_report(model)
    HR = report["hr_basis"]
    cols, diag, imag = [], 0.0, 0.0
    for j in range(HR.shape[1]):
        D, dj = cr_derivative(p, model, HR[:, j])
        cols.append(D.real)
        imag = max(imag, float(np.abs(D.imag).max()))
        diag = max(diag, dj)
    M = np.column_stack(cols)
    r = numerical_rank(M)
    # per-edge comparison with the infinitesimal cochain Q of each direction
    C = np.column_stack([edge_real_coordinates(p, infinitesimal_cochain(p, model, HR[:, j]))
                         for j in range(HR.shape[1])])
    return {"shape": list(M.shape), "rank": r["rank"], "gap": r["gap"], "status": r["status"],
            "sigma": r["sigma"].tolist(), "richardson_diagnostic": diag, "max_imag_derivative": imag,
            "dcr": M, "q_coords": C}


def per_edge_iff(report: dict, zero_tol=1e-6) -> dict:
    """Check that d(cr)(e) vanishes exactly when Q(e) does, edge by edge.

    For each edge the row of d(cr) must be a nonzero multiple of the row of
    Q-coordinates; directions with Q(e) = 0 are built inside the span.
    """
    M, C = report["dcr"], report["q_coords"]
    out = []
    for k in range(M.shape[0]):
        c, m = C[k], M[k]
        kappa = float(np.dot(c, m) / np.dot(c, c))
        fit = float(np.linalg.norm(m - kappa * c) / max(np.linalg.norm(m), 1e-300))
        # a combination of the basis with Q(e) = 0
        _, _, vh = np.linalg.svd(c[None, :])
        killed = float(np.abs(vh[1:] @ m).max())
        out.append({"edge": k, "kappa": kappa, "fit": fit, "dcr_when_Q_zero": killed,
                    "min_dcr_when_Q_nonzero": float(abs(kappa) * np.linalg.norm(c))})
    ok = all(r["dcr_when_Q_zero"] < zero_tol and abs(r["kappa"]) > 1e3 * zero_tol for r in out)
    return {"edges": out, "holds": ok}
