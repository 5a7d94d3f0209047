"""The cubic map R, its inverse branches and the tree of discrete eigenvalues.

Level-``n`` eigenvalues of the discrete Laplacian lie in [0, 2] and are the
``R``-preimages of the level ``n - 1`` eigenvalues, except that the values
1 - p and 1 + p are excluded when p != q. Each eigenvalue other than 0 and 2
therefore has three children (one per monotone branch of ``R``) and 0 and 2
have two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .core import MAX_LEVEL, FractalParams, check_level

BRANCHES = ("lowest", "middle", "highest")
ROOT = "root"

#: A child closer than this to 1 +- p is reported as forbidden.
FORBIDDEN_ATOL = 1e-12


def cubic(params: FractalParams, z):
    """R(z) = z (z^2 - 3z + 2 + pq) / pq."""
    pq = params.pq
    z = np.asarray(z, dtype=float) if not np.isscalar(z) else float(z)
    return z * (z * (z - 3.0) + 2.0 + pq) / pq


def cubic_derivative(params: FractalParams, z):
    pq = params.pq
    z = np.asarray(z, dtype=float) if not np.isscalar(z) else float(z)
    return (z * (3.0 * z - 6.0) + 2.0 + pq) / pq


def branch_interval(params: FractalParams, branch: str) -> tuple[float, float]:
    """Closed interval on which the named branch of R^{-1} takes its values."""
    p, q = params.p, params.q
    if branch == "lowest":
        return (0.0, min(p, q))
    if branch == "middle":
        return (max(p, q), min(1.0 + p, 1.0 + q))
    if branch == "highest":
        return (max(1.0 + p, 1.0 + q), 2.0)
    raise ValueError(f"unknown branch {branch!r}; expected one of {BRANCHES}")


def bound_constants(params: FractalParams) -> tuple[float, float]:
    """Constants ``(D, D1)`` of the two-sided eigenvalue estimate.

    D = p(2+q) / (2q(2-p)) governs the upper bound, D1 = 3pq / (2+pq)^2 the
    lower bound.
    """
    p, q, pq = params.p, params.q, params.pq
    return p * (2.0 + q) / (2.0 * q * (2.0 - p)), 3.0 * pq / (2.0 + pq) ** 2


def is_forbidden(params: FractalParams, z, atol: float = FORBIDDEN_ATOL):
    if params.symmetric:
        return np.zeros(np.shape(z), dtype=bool) if np.ndim(z) else False
    lo, hi = params.forbidden
    out = (np.abs(np.asarray(z) - lo) <= atol) | (np.abs(np.asarray(z) - hi) <= atol)
    return out if np.ndim(z) else bool(out)


def _exact_preimage(params: FractalParams, lam: float, branch: str) -> Optional[float]:
    # Preimages of 0 are {0, 1+p, 1+q}; preimages of 2 are {2, 1-p, 1-q} = {2, q, p},
    # written with the same expressions as the branch endpoints.
    p, q = params.p, params.q
    if lam == 0.0:
        pool = (0.0, 1.0 + p, 1.0 + q)
    elif lam == 2.0:
        pool = (2.0, q, p)
    else:
        return None
    lo, hi = branch_interval(params, branch)
    # exactly one pool value per branch; at p == 1/2 two of them coincide
    return next(z for z in pool if lo <= z <= hi)


def _solve_branch(params: FractalParams, lam: np.ndarray, branch: str) -> np.ndarray:
    lo, hi = branch_interval(params, branch)
    out = np.asarray(kernels.invert_cubic(lam, lo, hi, params.pq), dtype=float)
    for target in (0.0, 2.0):
        hit = lam == target
        if hit.any():
            out[hit] = _exact_preimage(params, target, branch)
    return out


class Preimage(NamedTuple):
    value: float
    forbidden: bool


def invert_cubic(params: FractalParams, lam: float, branch: str) -> Preimage:
    """The root of R(z) = lam on the named branch.

    ``forbidden`` is set when the root is one of the excluded values 1 +- p
    (only possible for lam in {0, 2} and p != q).
    """
    lam = float(lam)
    if not 0.0 <= lam <= 2.0:
        raise ValueError(f"eigenvalue must lie in [0, 2], got {lam}")
    z = float(_solve_branch(params, np.array([lam]), branch)[0])
    return Preimage(z, bool(is_forbidden(params, z)))


def lowest_child(params: FractalParams, lam):
    """Smallest admissible preimage of each entry of `lam`.

    This is the lowest branch of R^{-1}, except at lam == 2 for p > 1/2 where
    the lowest-branch preimage 1 - p is forbidden and the smallest admissible
    child is p.
    """
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    out = _solve_branch(params, arr, "lowest")
    out[arr == 2.0] = params.p
    return out if np.ndim(lam) else float(out[0])


def _children(params: FractalParams, parents: np.ndarray):
    """All admissible children of a level as (values, branch codes, parent index)."""
    p, q = params.p, params.q
    idx = np.arange(parents.size)
    regular = (parents != 0.0) & (parents != 2.0)
    vals, codes, owners = [], [], []
    for code, branch in enumerate(BRANCHES):
        vals.append(_solve_branch(params, parents[regular], branch))
        codes.append(np.full(regular.sum(), code, dtype=np.int8))
        owners.append(idx[regular])
    high = BRANCHES.index("highest")
    mid = BRANCHES.index("middle")
    low = BRANCHES.index("lowest")
    # The excluded preimage 1 +- p is simply never generated.
    for parent_value, kids in ((0.0, ((0.0, low), (1.0 + q, high if p <= q else mid))),
                               (2.0, ((p, low if p <= q else mid), (2.0, high)))):
        where = idx[parents == parent_value]
        for value, code in kids:
            vals.append(np.full(where.size, value))
            codes.append(np.full(where.size, code, dtype=np.int8))
            owners.append(where)
    vals = np.concatenate(vals)
    codes = np.concatenate(codes)
    owners = np.concatenate(owners)
    order = np.argsort(vals, kind="stable")
    return vals[order], codes[order], owners[order]


@dataclass(frozen=True)
class EigenvalueNode:
    level: int
    k_index: int
    value: float
    branch: str
    parent: Optional["EigenvalueNode"]


@dataclass(frozen=True, eq=False)
class EigenvalueTree:
    """Sorted eigenvalues per level with parent links and branch labels.

    ``branches[n][k]`` indexes ``BRANCHES`` (-1 at the root level) and
    ``parents[n][k]`` is the parent's index at level ``n - 1`` (-1 at level 0).
    """

    params: FractalParams
    levels: tuple
    branches: tuple
    parents: tuple

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> np.ndarray:
        return self.levels[n]

    def branch_name(self, n: int, k: int) -> str:
        code = int(self.branches[n][k])
        return ROOT if code < 0 else BRANCHES[code]

    def node(self, n: int, k: int) -> EigenvalueNode:
        parent = None if n == 0 else self.node(n - 1, int(self.parents[n][k]))
        return EigenvalueNode(n, k, float(self.levels[n][k]), self.branch_name(n, k), parent)

    def children(self, n: int, k: int) -> np.ndarray:
        """Indices at level ``n + 1`` of the children of node ``(n, k)``."""
        return np.nonzero(self.parents[n + 1] == k)[0]

    def renormalized(self, n: int) -> np.ndarray:
        return self.params.c0**n * self.levels[n]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=16)
def _tree_cached(params: FractalParams, n_max: int) -> EigenvalueTree:
    levels = [np.array([0.0, 2.0])]
    branches = [np.full(2, -1, dtype=np.int8)]
    parents = [np.full(2, -1, dtype=np.int64)]
    for n in range(n_max):
        vals, codes, owners = _children(params, levels[-1])
        if vals.size != 3 ** (n + 1) + 1 or np.any(np.diff(vals) <= 0.0):
            raise AssertionError(f"level {n + 1} spectrum is not simple")
        levels.append(vals)
        branches.append(codes)
        parents.append(owners)
    return EigenvalueTree(
        params,
        tuple(_freeze(v) for v in levels),
        tuple(_freeze(v) for v in branches),
        tuple(_freeze(v) for v in parents),
    )


def build_tree(params: FractalParams, n_max: int, max_level: int = MAX_LEVEL) -> EigenvalueTree:
    return _tree_cached(params, check_level(n_max, max_level))


def spectrum(params: FractalParams, n: int) -> np.ndarray:
    """Sorted eigenvalues of the level-``n`` Laplacian."""
    return build_tree(params, n).levels[n]


def _check_index(k: int, n0: int):
    if not 0 <= k <= 3**n0:
        raise IndexError(f"index {k} is out of range for level {n0} (max {3**n0})")


def lowest_branch_path(params: FractalParams, k: int, n0: int, n: int) -> np.ndarray:
    """Eigenvalues ``lambda_{m,k}`` for ``m = n0 .. n``, following the lowest child."""
    _check_index(k, n0)
    if n < n0:
        raise ValueError("need n >= n0")
    out = np.empty(n - n0 + 1)
    out[0] = spectrum(params, n0)[k]
    for i in range(1, out.size):
        out[i] = lowest_child(params, out[i - 1])
    return out


def base_level(k: int) -> int:
    """Smallest level whose spectrum contains index ``k``."""
    if k < 0:
        raise IndexError("index must be nonnegative")
    n = 0
    while 3**n < k:
        n += 1
    return n


def eigenvalue_bounds(params: FractalParams, k: int, n0: int) -> tuple[float, float]:
    """Two-sided bounds on the limit eigenvalue from level ``n0`` data (p < 1/2)."""
    if not params.p < 0.5:
        raise ValueError("eigenvalue bounds are only available for p < 1/2")
    _check_index(k, n0)
    lam = float(spectrum(params, n0)[k])
    d_up, d_low = bound_constants(params)
    scale = params.c0**n0
    return scale * lam * (1.0 + d_low * lam), scale * lam * math.exp(d_up * lam)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class LimitEigenvalue:
    k_index: int
    value: float
    levels_used: int
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None


def limit_eigenvalue(params: FractalParams, k: int, tol: float = 1e-12,
                     max_level: int = 40) -> LimitEigenvalue:
    """``lim_n c0**n * lambda_{n,k}`` by iterating the lowest child.

    Stops when successive renormalized values agree to ``tol * max(1, |value|)``.
    Bounds are filled in from the base level when p < 1/2.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n0 = base_level(k)
    if n0 > max_level:
        raise ConvergenceError(f"index {k} needs level {n0} > budget {max_level}")
    lam = float(spectrum(params, n0)[k])
    bounds = eigenvalue_bounds(params, k, n0) if params.p < 0.5 else (None, None)
    if lam == 0.0:
        return LimitEigenvalue(k, 0.0, n0, *bounds)
    c0 = params.c0
    prev = c0**n0 * lam
    for n in range(n0 + 1, max_level + 1):
        lam = lowest_child(params, lam)
        cur = c0**n * lam
        if abs(cur - prev) < tol * max(1.0, abs(cur)):
            return LimitEigenvalue(k, cur, n, *bounds)
        prev = cur
    raise ConvergenceError(
        f"renormalized eigenvalue {k} did not converge to {tol} within level {max_level}"
    )


def counting_function(tree: EigenvalueTree, n: int, lam: float) -> int:
    """Number of renormalized level-``n`` eigenvalues not exceeding ``lam``."""
    return int(np.searchsorted(tree.renormalized(n), lam, side="right"))


def spectral_dimension_fit(tree: EigenvalueTree, n: int, k_min: int = 3,
                           k_max: Optional[int] = None) -> float:
    """Log-log slope of the counting function, an estimate of ``d_s / 2``.

    Fits ``log(k + 1)`` against ``log(c0**n lambda_{n,k})`` for ``k_min <= k <= k_max``.
    The default upper index ``3**(n-2)`` keeps to the part of the level-``n``
    spectrum that already tracks the limit eigenvalues.
    """
    if k_max is None:
        k_max = 3 ** max(n - 2, 0)
    ren = tree.renormalized(n)
    k = np.arange(max(k_min, 1), min(k_max, ren.size - 1) + 1)
    if k.size < 10:
        raise ValueError(f"need at least 10 nonzero eigenvalues for a fit, have {k.size}")
    slope, _ = np.polyfit(np.log(ren[k]), np.log(k + 1.0), 1)
    return float(slope)
