"""Disks in CP^1 as de Sitter points of Herm_2, Moebius maps, and sl2 fields.

Conventions.  A point of CP^1 is a unit vector ``p = (z0, z1)``; the affine
chart is ``z = z0 / z1``.  A Hermitian matrix ``X`` describes the disk
``{p : sum X_ij z_i conj(z_j) < 0}``.  ``B`` acts on points by ``p -> B p``
and on disks by ``B.X = B^{-T} X conj(B^{-1})``.  The infinitesimal version
is ``Y_A(X) = -A^T X - X conj(A)``.  An element ``A = [[a, b], [c, -a]]``
of sl2 gives the field ``q_A(z) = -c z^2 + 2 a z + b`` on the chart.
"""
from __future__ import annotations

import numpy as np

TOL = 1e-10

X0 = np.diag([1.0, -1.0]).astype(complex)           # unit disk
X_UPPER = np.array([[0, 1j], [-1j, 0]])              # upper half-plane
INF = np.array([1.0, 0.0], dtype=complex)
ZERO = np.array([0.0, 1.0], dtype=complex)


class GeometryError(ValueError):
    pass


# --- constructors and coordinates -------------------------------------

def herm(x00, x01, x11) -> np.ndarray:
    x01 = complex(x01)
    return np.array([[x00, x01], [x01.conjugate(), x11]], dtype=complex)


def herm_to_vec(X) -> np.ndarray:
    return np.array([X[0, 0].real, X[0, 1].real, X[0, 1].imag, X[1, 1].real])


def vec_to_herm(v) -> np.ndarray:
    return herm(v[0], complex(v[1], v[2]), v[3])


# Gram matrix of mink in herm_to_vec coordinates
MINK_GRAM = np.array([
    [0.0, 0.0, 0.0, -0.5],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [-0.5, 0.0, 0.0, 0.0],
])


def ds3_point(X) -> np.ndarray:
    """Hermitize and rescale so that det X = -1."""
    X = np.asarray(X, dtype=complex)
    X = 0.5 * (X + X.conj().T)
    d = np.linalg.det(X).real
    if d >= 0:
        raise GeometryError("matrix has non-negative determinant; not a disk")
    return X / np.sqrt(-d)


def sl2(a, b, c) -> np.ndarray:
    return np.array([[a, b], [c, -a]], dtype=complex)


def sl2_to_vec(A) -> np.ndarray:
    """Complex coordinates (a, b, c) of a traceless matrix."""
    return np.array([A[0, 0], A[0, 1], A[1, 0]], dtype=complex)


def vec_to_sl2(v) -> np.ndarray:
    return sl2(v[0], v[1], v[2])


def sl2_to_real(A) -> np.ndarray:
    v = sl2_to_vec(A)
    return np.concatenate([v.real, v.imag])


def real_to_sl2(r) -> np.ndarray:
    return vec_to_sl2(np.asarray(r[:3]) + 1j * np.asarray(r[3:]))


def moebius(B) -> np.ndarray:
    B = np.asarray(B, dtype=complex)
    d = np.linalg.det(B)
    if abs(d) < 1e-300:
        raise GeometryError("singular matrix")
    return B / np.sqrt(d)


def rp1(z0, z1=None) -> np.ndarray:
    """Unit representative; ``rp1(z)`` is the affine point z, ``rp1(inf)`` is infinity."""
    if z1 is None:
        if np.isinf(z0):
            return INF.copy()
        z0, z1 = complex(z0), 1.0
    p = np.array([z0, z1], dtype=complex)
    n = np.linalg.norm(p)
    if n == 0:
        raise GeometryError("zero vector is not a point of CP^1")
    return p / n


def bracket(p, q) -> complex:
    return p[0] * q[1] - p[1] * q[0]


def same_point(p, q, tol=TOL) -> bool:
    return abs(bracket(rp1(*p), rp1(*q))) < tol


def affine(p) -> complex:
    return complex(np.inf) if abs(p[1]) < 1e-300 else p[0] / p[1]


# --- Minkowski structure -----------------------------------------------

def mink(X, Y) -> float:
    return float((-0.5 * (X[0, 0] * Y[1, 1] + X[1, 1] * Y[0, 0])
                  + (X[0, 1] * np.conj(Y[0, 1])).real).real)


def hform(X, p) -> float:
    """The Hermitian form sum X_ij z_i conj(z_j)."""
    return float(np.real(p @ X @ np.conj(p)))


def disk_contains(X, p, tol=TOL) -> str:
    val = hform(X, rp1(*p))
    if abs(val) <= tol:
        return "boundary"
    return "inside" if val < 0 else "outside"


def light_vector(p) -> np.ndarray:
    """Future lightlike generator of the ray of forms vanishing at p."""
    w = np.array([p[1], -p[0]])
    return np.outer(w, np.conj(w))


def act_on_herm(B, X) -> np.ndarray:
    Bi = np.linalg.inv(B)
    return Bi.T @ X @ np.conj(Bi)


def act_on_point(B, p) -> np.ndarray:
    return rp1(*(B @ p))


def infinitesimal_action(A, X) -> np.ndarray:
    return -A.T @ X - X @ np.conj(A)


def disk_from_center(center, radius) -> np.ndarray:
    c = complex(center)
    return ds3_point(herm(1.0, -np.conj(c), abs(c) ** 2 - radius ** 2))


def euclidean_circle(X):
    """(center, radius, kind) of the boundary in the affine chart.

    kind is "disk", "exterior" or "halfplane".
    """
    a = X[0, 0].real
    if abs(a) < 1e-14:
        return None, None, "halfplane"
    center = -np.conj(X[0, 1]) / a
    radius = 1.0 / abs(a) * np.sqrt(max(-np.linalg.det(X).real, 0.0))
    return center, radius, ("disk" if a > 0 else "exterior")


def tangency_check(X, Xp, tol=TOL) -> dict:
    if np.allclose(X, -Xp, atol=tol):
        return {"tangent": False, "point": None, "antipodal": True}
    m = mink(X, Xp)
    S = X + Xp
    tr = S[0, 0].real + S[1, 1].real
    det = np.linalg.det(S).real
    psd = tr > tol and det >= -tol
    if abs(m + 1.0) > tol or not psd:
        return {"tangent": False, "point": None, "antipodal": False, "mink": m}
    return {"tangent": True, "point": tangency_point(X, Xp), "antipodal": False, "mink": m}


def tangency_point(X, Xp) -> np.ndarray:
    """Kernel of the form X + X' (smallest singular direction)."""
    _, _, vh = np.linalg.svd(X + Xp)
    v = vh[-1].conj()
    # the form is p^T M conj(p), so the null point is conj of the null vector
    return rp1(*np.conj(v))


# --- sl2 and projective vector fields -----------------------------------

def killing(A, B) -> complex:
    return complex(np.trace(A @ B))


def vector_field_poly(A) -> tuple[complex, complex, complex]:
    a, b, c = A[0, 0], A[0, 1], A[1, 0]
    return (complex(-c), complex(2 * a), complex(b))


def discriminant(coeffs) -> complex:
    a2, a1, a0 = coeffs
    return a1 * a1 - 4 * a2 * a0


def field_value(A, p, chart="auto"):
    """Value of the field of A at p, in the z chart or the w = 1/z chart.

    Returns (value, chart).  "auto" uses the w chart when |z(p)| > 10.
    """
    p = rp1(*p)
    if chart == "auto":
        chart = "w" if abs(p[0]) > 10 * abs(p[1]) else "z"
    a2, a1, a0 = vector_field_poly(A)
    if chart == "z":
        z = p[0] / p[1]
        return a2 * z * z + a1 * z + a0, "z"
    w = p[1] / p[0]
    return -a2 - a1 * w - a0 * w * w, "w"


def adjoint(M, A) -> np.ndarray:
    return M @ A @ np.linalg.inv(M)


def adjoint_matrix(M) -> np.ndarray:
    """Ad(M) as a 3x3 complex matrix on (a, b, c) coordinates."""
    Mi = np.linalg.inv(M)
    cols = []
    for k in range(3):
        e = np.zeros(3, dtype=complex)
        e[k] = 1.0
        cols.append(sl2_to_vec(M @ vec_to_sl2(e) @ Mi))
    return np.array(cols).T


def expm_sl2(A) -> np.ndarray:
    """Closed-form exponential using A^2 = -det(A) I."""
    mu2 = -np.linalg.det(A)
    mu = np.sqrt(complex(mu2))
    if abs(mu) < 1e-6:
        c = 1 + mu2 / 2 + mu2 * mu2 / 24
        s = 1 + mu2 / 6 + mu2 * mu2 / 120
    else:
        c = np.cosh(mu)
        s = np.sinh(mu) / mu
    return c * np.eye(2) + s * A


def nilpotent_at(p) -> np.ndarray:
    z0, z1 = p
    return np.outer([z0, z1], [-z1, z0])


# --- stabilizers and normal fields --------------------------------------

def _action_matrix(X) -> np.ndarray:
    """Real 4x6 matrix of A -> Y_A(X) in (sl2_to_real, herm_to_vec) coordinates."""
    cols = []
    for k in range(6):
        r = np.zeros(6)
        r[k] = 1.0
        cols.append(herm_to_vec(infinitesimal_action(real_to_sl2(r), X)))
    return np.array(cols).T


def stabilizer_basis(X) -> list[np.ndarray]:
    _, s, vh = np.linalg.svd(_action_matrix(X))
    return [real_to_sl2(vh[k]) for k in range(3, 6)]


def joint_stabilizer(Xs) -> list[np.ndarray]:
    """Real basis of the elements fixing every disk in ``Xs``."""
    M = np.vstack([_action_matrix(X) for X in Xs])
    _, s, vh = np.linalg.svd(M)
    scale = s[0] if s.size else 1.0
    rank = int(np.sum(s > 1e-9 * scale))
    return [real_to_sl2(vh[k]) for k in range(rank, 6)]


def normal_representative(X, Xdot, tol=1e-9) -> np.ndarray:
    if abs(mink(X, Xdot)) > TOL * max(1.0, np.abs(Xdot).max()):
        raise GeometryError("velocity is not tangent to dS^3 at X")
    basis = [1j * B for B in stabilizer_basis(X)]
    M = np.array([herm_to_vec(infinitesimal_action(B, X)) for B in basis]).T
    c, *_ = np.linalg.lstsq(M, herm_to_vec(Xdot), rcond=None)
    A = sum(ck * B for ck, B in zip(c, basis))
    if np.abs(infinitesimal_action(A, X) - Xdot).max() > tol * max(1.0, np.abs(Xdot).max()):
        raise GeometryError("normal representative did not reproduce the velocity")
    return A


def circle_through(p1, p2, p3, side="left") -> np.ndarray:
    """Disk bounded by the circle through three points.

    ``side="left"`` is the disk on the left when the circle is traversed
    p1 -> p2 -> p3; ``"right"`` is its complement.
    """
    p1, p2, p3 = (rp1(*p) for p in (p1, p2, p3))
    if min(abs(bracket(p1, p2)), abs(bracket(p2, p3)), abs(bracket(p1, p3))) < TOL:
        raise GeometryError("points are not distinct")
    # M sends p1, p2, p3 to 0, 1, infinity
    M = np.array([
        bracket(p2, p3) * np.array([p1[1], -p1[0]]),
        bracket(p2, p1) * np.array([p3[1], -p3[0]]),
    ])
    X = act_on_herm(np.linalg.inv(moebius(M)), X_UPPER)
    X = ds3_point(X)
    if side == "left":
        return X
    if side == "right":
        return -X
    raise GeometryError(f"unknown side {side!r}")


def mobius_to_points(src, dst) -> np.ndarray:
    """The Moebius map sending three points ``src`` to three points ``dst``."""
    def to_std(a, b, c):
        return np.array([
            bracket(b, c) * np.array([a[1], -a[0]]),
            bracket(b, a) * np.array([c[1], -c[0]]),
        ])
    return moebius(np.linalg.inv(to_std(*dst)) @ to_std(*src))
