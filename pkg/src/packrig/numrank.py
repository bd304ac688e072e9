"""Numerical rank with an explicit spectral-gap requirement."""
import numpy as np

REL_TOL = 1e-7
MIN_GAP = 1e3


def numerical_rank(M, rel_tol=REL_TOL, min_gap=None) -> dict:
    """Rank by singular values above ``rel_tol * sigma_max``.

    The cut must also show a ratio ``sigma_{r-1} / sigma_r >= min_gap``.
    When the matrix is full rank by shape, the next value is taken as the
    rounding floor ``eps * max(m, n) * sigma_max``.  Without a clear gap the
    status is "indeterminate".
    """
    if min_gap is None:
        min_gap = MIN_GAP
    M = np.atleast_2d(np.asarray(M))
    s = np.linalg.svd(M, compute_uv=False)
    m, n = M.shape
    if s.size == 0 or s[0] == 0:
        return {"rank": 0, "gap": np.inf, "status": "ok", "sigma": s, "nullity": n}
    r = int(np.sum(s > rel_tol * s[0]))
    if r == 0:
        gap = np.inf
    elif r < s.size:
        gap = s[r - 1] / s[r] if s[r] > 0 else np.inf
    else:
        gap = s[r - 1] / (np.finfo(float).eps * max(m, n) * s[0])
    status = "ok" if gap >= min_gap else "indeterminate"
    return {"rank": r, "gap": float(gap), "status": status, "sigma": s, "nullity": n - r}


def null_space(M, rank=None) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel."""
    M = np.atleast_2d(np.asarray(M))
    _, s, vh = np.linalg.svd(M)
    if rank is None:
        rank = numerical_rank(M)["rank"]
    return vh[rank:].conj().T
