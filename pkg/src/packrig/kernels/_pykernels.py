"""Pure numpy versions of the compiled kernels."""
import numpy as np


def corner_angles(radii, tri):
    """Angles of hyperbolic triangles with side lengths r_i + r_j.

    Uses the half-angle form sin^2(t_i / 2) = sinh r_j sinh r_k / (sinh(r_i + r_j) sinh(r_i + r_k)).
    """
    r = np.asarray(radii, dtype=float)[np.asarray(tri)]
    out = np.empty(r.shape)
    for i in range(3):
        ri, rj, rk = r[:, i], r[:, (i + 1) % 3], r[:, (i + 2) % 3]
        s2 = np.sinh(rj) * np.sinh(rk) / (np.sinh(ri + rj) * np.sinh(ri + rk))
        out[:, i] = 2.0 * np.arcsin(np.sqrt(s2))
    return out


def angle_sums(radii, tri):
    ang = corner_angles(radii, tri)
    return np.bincount(np.asarray(tri).ravel(), weights=ang.ravel(), minlength=len(radii))


def _corner_weights(colors, states, cv, ein, sin, eout, sout):
    blue = colors[:, cv].astype(bool)
    si = states[:, ein] * sin
    so = states[:, eout] * sout
    oi = si != 0
    oo = so != 0
    w = np.where(oi & oo, np.where((si > 0) == (so > 0), 2, 0),
                 np.where(oi | oo, 1, 2))
    return np.where(blue, w, 0).astype(np.int32)


def vertex_weights(colors, states, cv, ein, sin, eout, sout, n_vertices):
    """Twice the inversion weight w(alpha) for each decoration in a batch."""
    w = _corner_weights(colors, states, cv, ein, sin, eout, sout)
    out = np.zeros((colors.shape[0], n_vertices), dtype=np.int32)
    for k in range(len(cv)):
        out[:, cv[k]] += w[:, k]
    return out


def triangle_weights(colors, states, cv, ein, sin, eout, sout):
    """Twice the inversion of each triangle (corners are stored 3 per triangle)."""
    w = _corner_weights(colors, states, cv, ein, sin, eout, sout)
    return w.reshape(w.shape[0], -1, 3).sum(axis=2).astype(np.int32)
