"""Eigen-expansion of the unit impulse at 0 and its truncations.

Each level-``n`` weight is split among the eigenfunctions extended from its
eigenfunction, so that the contributions still reproduce the parent on
``V_n`` and cancel on every new vertex.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FractalParams, check_level
from .decimation import EigenvalueTree, build_tree
from .eigenfunctions import _require_asymmetric, basis_matrix, build_basis, full_basis

#: Tolerance for the redundant new-vertex condition of the two-child split.
SPLIT_CHECK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DeltaWeights:
    params: FractalParams
    level: int
    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float)
        if a.shape != (3**self.level + 1,):
            raise ValueError(f"level {self.level} needs {3**self.level + 1} weights")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def total(self) -> float:
        return float(np.sum(self.alpha))


def initial_weights(params: FractalParams) -> DeltaWeights:
    return DeltaWeights(params, 0, np.array([0.5, 0.5]))


def _cell_coefficients(params: FractalParams, lam):
    """Coefficients of the parent's two cell-end values in a child's new-vertex value.

    For child eigenvalue ``z`` the new vertex next to ``x0`` carries
    ``own * f(x0) + other * f(x1)``.
    """
    p, q = params.p, params.q
    denom = (1.0 - p - lam) * (1.0 + p - lam)
    return q * (1.0 - lam) / denom, p * q / denom


def split_three(params: FractalParams, alpha, children):
    """Weights of three children ``l1 < l2 < l3`` of a parent with weight `alpha`."""
    p, q = params.p, params.q
    l1, l2, l3 = (np.asarray(c, dtype=float) for c in children)
    a3 = (1.0 + p - l3) * (q - l3) / (3.0 * l3**2 - 6.0 * l3 + 2.0 + params.pq) * alpha
    common = (l2 - l1) * (q - l3) * (1.0 + p - l3)
    a1 = (l3 - l2) * (q - l1) * (1.0 + p - l1) / common * a3
    a2 = (l1 - l3) * (q - l2) * (1.0 + p - l2) / common * a3
    return a1, a2, a3


def split_three_product_form(params: FractalParams, alpha, children):
    """``alpha_3`` with the root-difference denominator, for cross-checking."""
    p, q = params.p, params.q
    l1, l2, l3 = children
    return (1.0 + p - l3) * (q - l3) / ((l3 - l1) * (l3 - l2)) * alpha


def split_two(params: FractalParams, alpha: float, parent_value: float, children):
    """Weights of the two children of the eigenvalue 0 or 2.

    The parent eigenfunction is constant (eigenvalue 0) or alternates in sign
    (eigenvalue 2) on the level grid, so on every cell ``f(x1) = s f(x0)`` with
    ``s = +1`` or ``-1``. Total mass plus cancellation at the new vertex next to
    ``x0`` fix the weights; cancellation at the other new vertex is checked.
    """
    s = 1.0 if parent_value == 0.0 else -1.0
    z = np.asarray(children, dtype=float)
    own, other = _cell_coefficients(params, z)
    near = own + s * other
    far = s * own + other
    system = np.array([[1.0, 1.0], near])
    weights = np.linalg.solve(system, np.array([alpha, 0.0]))
    residual = abs(float(far @ weights))
    if residual > SPLIT_CHECK_TOL * max(1.0, abs(alpha)):
        raise AssertionError(f"two-child split leaves {residual} at the far vertex")
    return weights


def refine_weights(w: DeltaWeights, tree: EigenvalueTree) -> DeltaWeights:
    """Weights at level ``w.level + 1`` from those at ``w.level``."""
    params = w.params
    _require_asymmetric(params)
    n = w.level
    if tree.params != params or tree.n_max < n + 1:
        raise ValueError(f"tree must match the weights' parameters and reach level {n + 1}")
    parents_values = tree.levels[n]
    child_values = tree.levels[n + 1]
    owners = tree.parents[n + 1]
    out = np.empty(child_values.size)
    # group children by parent; within a group indices are increasing in value
    order = np.argsort(owners, kind="stable")
    starts = np.searchsorted(owners[order], np.arange(parents_values.size + 1))
    regular = []
    for k, lam in enumerate(parents_values):
        kids = order[starts[k]:starts[k + 1]]
        if lam in (0.0, 2.0):
            if kids.size != 2:
                raise AssertionError(f"eigenvalue {lam} must have two children")
            out[kids] = split_two(params, w.alpha[k], lam, child_values[kids])
        else:
            if kids.size != 3:
                raise AssertionError(f"eigenvalue {lam} must have three children")
            regular.append(kids)
    if regular:
        kids = np.array(regular)
        k_parent = owners[kids[:, 0]]
        a1, a2, a3 = split_three(params, w.alpha[k_parent], child_values[kids].T)
        out[kids[:, 0]] = a1
        out[kids[:, 1]] = a2
        out[kids[:, 2]] = a3
    return DeltaWeights(params, n + 1, out)


def delta_weights(params: FractalParams, n: int) -> DeltaWeights:
    """Weights of the level-``n`` impulse, refined up from level 0."""
    n = check_level(n)
    tree = build_tree(params, n)
    w = initial_weights(params)
    for _ in range(n):
        w = refine_weights(w, tree)
    return w


def discrete_delta(n: int) -> np.ndarray:
    out = np.zeros(3**n + 1)
    out[0] = 1.0
    return out


def reconstruct(params: FractalParams, n: int) -> np.ndarray:
    """``sum_k alpha_{n,k} f_{n,k}`` with the full level-``n`` basis."""
    values, _ = basis_matrix(full_basis(params, n))
    return delta_weights(params, n).alpha @ values


def approximate_delta(params: FractalParams, n0: int, n: int) -> np.ndarray:
    """Truncated impulse: level-``n0`` weights against level-``n`` eigenfunctions."""
    weights = delta_weights(params, n0).alpha
    values, _ = basis_matrix(build_basis(params, n0, n))
    return weights @ values
