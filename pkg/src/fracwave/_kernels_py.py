"""Pure numpy implementations of the hot kernels.

Signatures mirror the compiled ``_kernels`` module exactly; ``kernels``
picks one of the two at import time.
"""
import numpy as np

_EPS = np.finfo(float).eps
MAX_ITER = 200


def _cubic_minus(z, lam, pq):
    return z * (z * (z - 3.0) + 2.0 + pq) / pq - lam


def _cubic_slope(z, pq):
    return (z * (3.0 * z - 6.0) + 2.0 + pq) / pq


def invert_cubic(lam, lo, hi, pq):
    """Solve ``R(z) = lam`` for every entry of `lam` on the bracket [lo, hi].

    R must be strictly monotone on the bracket and every target must lie
    between R(lo) and R(hi). Safeguarded Newton: a Newton step that leaves
    the current bracket is replaced by bisection.
    """
    lam = np.ascontiguousarray(lam, dtype=float)
    if lam.size == 0:
        return lam.copy()
    increasing = _cubic_minus(hi, 0.0, pq) > _cubic_minus(lo, 0.0, pq)
    a = np.full(lam.shape, float(lo))
    b = np.full(lam.shape, float(hi))
    ra = _cubic_minus(a, lam, pq)
    rb = _cubic_minus(b, lam, pq)
    span = rb - ra
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(span != 0.0, a - ra * (b - a) / span, 0.5 * (a + b))
    z = np.clip(z, a, b)
    z[ra == 0.0] = lo
    z[rb == 0.0] = hi
    active = (ra != 0.0) & (rb != 0.0)
    for _ in range(MAX_ITER):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        zi = z[idx]
        fz = _cubic_minus(zi, lam[idx], pq)
        below = (fz < 0.0) == increasing
        ai = np.where(below, zi, a[idx])
        bi = np.where(below, b[idx], zi)
        a[idx] = ai
        b[idx] = bi
        d = _cubic_slope(zi, pq)
        with np.errstate(divide="ignore", invalid="ignore"):
            zn = zi - fz / d
        bad = ~np.isfinite(zn) | (zn <= ai) | (zn >= bi)
        zn = np.where(bad, 0.5 * (ai + bi), zn)
        done = (fz == 0.0) | (np.abs(zn - zi) <= 2.0 * _EPS * np.abs(zn))
        done |= (bi - ai) <= 2.0 * _EPS * np.maximum(np.abs(ai), np.abs(bi))
        z[idx] = np.where(fz == 0.0, zi, zn)
        active[idx[done]] = False
    return z


def extend(values, z, p):
    """Spectral-decimation extension of each row of `values` to the next level.

    values : (m, N+1) array, row i an eigenfunction on a level grid.
    z : (m,) array of child eigenvalues, none equal to 1 - p or 1 + p.
    Returns an (m, 3N+1) array agreeing with `values` on every third column.
    """
    values = np.ascontiguousarray(values, dtype=float)
    z = np.ascontiguousarray(z, dtype=float).reshape(-1, 1)
    q = 1.0 - p
    denom = (1.0 - p - z) * (1.0 + p - z)
    own = q * (1.0 - z) / denom
    other = p * q / denom
    m, n_old = values.shape
    out = np.empty((m, 3 * (n_old - 1) + 1))
    left = values[:, :-1]
    right = values[:, 1:]
    out[:, ::3] = values
    out[:, 1::3] = own * left + other * right
    out[:, 2::3] = own * right + other * left
    return out


def laplacian(values, to_right, to_left):
    """Apply ``I - P`` row-wise; P the nearest-neighbour walk with the given rates."""
    values = np.ascontiguousarray(values, dtype=float)
    out = values.copy()
    out[:, :-1] -= to_right[:-1] * values[:, 1:]
    out[:, 1:] -= to_left[1:] * values[:, :-1]
    return out
