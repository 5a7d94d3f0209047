"""Eigenfunctions by spectral decimation, and their sup-norm estimates.

An eigenfunction on level ``n`` with eigenvalue ``R(z)`` extends to level
``n + 1`` with eigenvalue ``z``; the coarse values are never touched. With
``z = 0`` the extension is the harmonic (energy-minimizing) one. Values are
kept in the unnormalized convention fixed at level 0: ``(1, 1)`` for
eigenvalue 0 and ``(1, -1)`` for eigenvalue 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import FractalParams, apply_laplacian, build_grid, check_level
from .decimation import build_tree, cubic, lowest_child

#: Minimum distance from 1 +- p for an extension eigenvalue.
FORBIDDEN_GUARD = 1e-9
#: Sup norm of the Green's function of the interval.
GREEN_SUP = 0.25


class UnsupportedParameterError(ValueError):
    """Decimation eigenfunctions are undefined at p = 1/2."""


def _require_asymmetric(params: FractalParams):
    if params.symmetric:
        raise UnsupportedParameterError(
            "eigenfunction extension is undefined at p = 1/2; use the dense oracle"
        )


@dataclass(frozen=True, eq=False)
class Eigenfunction:
    params: FractalParams
    level: int
    k_index: Optional[int]
    eigenvalue: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (3**self.level + 1,):
            raise ValueError(f"level {self.level} needs {3**self.level + 1} values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def residual(self) -> float:
        """Max-norm of ``Delta_n f - lambda f``."""
        lap = apply_laplacian(self.params, self.level, self.values)
        return float(np.max(np.abs(lap - self.eigenvalue * self.values)))


def level0_basis(params: FractalParams) -> tuple[Eigenfunction, Eigenfunction]:
    return (
        Eigenfunction(params, 0, 0, 0.0, np.array([1.0, 1.0])),
        Eigenfunction(params, 0, 1, 2.0, np.array([1.0, -1.0])),
    )


def _check_extension_value(params: FractalParams, parent_value: float, z: float):
    for bad in params.forbidden:
        if abs(z - bad) <= FORBIDDEN_GUARD:
            raise ValueError(f"extension value {z} is within {FORBIDDEN_GUARD} of 1 +- p")
    if abs(cubic(params, z) - parent_value) > 1e-10:
        raise ValueError(f"R({z}) = {cubic(params, z)} does not match eigenvalue {parent_value}")


def extend_values(params: FractalParams, values, z) -> np.ndarray:
    """Raw extension kernel: rows of `values` to the next level with eigenvalues `z`."""
    rows = np.atleast_2d(np.asarray(values, dtype=float))
    zs = np.broadcast_to(np.asarray(z, dtype=float), (rows.shape[0],))
    out = kernels.extend(rows, zs, params.p)
    return out[0] if np.ndim(values) == 1 else out


def extend(f: Eigenfunction, z: float, k_index: Optional[int] = None) -> Eigenfunction:
    """Extend `f` to level ``f.level + 1`` as an eigenfunction with eigenvalue `z`."""
    params = f.params
    _require_asymmetric(params)
    _check_extension_value(params, f.eigenvalue, z)
    new = extend_values(params, f.values, z)
    return Eigenfunction(params, f.level + 1, k_index, float(z), new)


def harmonic_extend(params: FractalParams, values) -> np.ndarray:
    """Energy-minimizing extension to the next level (the ``z = 0`` case)."""
    arr = np.asarray(values, dtype=float)
    if not _is_grid_size(arr.shape[-1]):
        raise ValueError(f"{arr.shape[-1]} values do not form a level grid")
    return extend_values(params, arr, 0.0)


def harmonic_fill(params: FractalParams, values, levels: int) -> np.ndarray:
    """Repeated harmonic extension by ``levels`` levels."""
    out = np.asarray(values, dtype=float)
    for _ in range(levels):
        out = harmonic_extend(params, out)
    return out


def _is_grid_size(count: int) -> bool:
    m = count - 1
    while m > 1 and m % 3 == 0:
        m //= 3
    return m == 1


def full_basis(params: FractalParams, n: int) -> list[Eigenfunction]:
    """Every eigenfunction of the level-``n`` Laplacian, in increasing eigenvalue order.

    Built breadth first over all admissible branches, so index ``k`` matches
    the sorted tree level.
    """
    _require_asymmetric(params)
    n = check_level(n)
    tree = build_tree(params, n)
    rows = np.array([[1.0, 1.0], [1.0, -1.0]])
    for m in range(n):
        parents = tree.parents[m + 1]
        rows = kernels.extend(rows[parents], tree.levels[m + 1], params.p)
    return [
        Eigenfunction(params, n, k, float(lam), row)
        for k, (lam, row) in enumerate(zip(tree.levels[n], rows))
    ]


def extend_lowest(params: FractalParams, values, eigenvalues, levels: int):
    """Follow the lowest child for ``levels`` steps.

    Returns the extended rows and the eigenvalue history, shape
    ``(levels + 1, m)`` with row 0 the input eigenvalues.
    """
    rows = np.atleast_2d(np.asarray(values, dtype=float))
    lam = np.asarray(eigenvalues, dtype=float).copy()
    history = [lam.copy()]
    for _ in range(levels):
        lam = lowest_child(params, lam)
        rows = kernels.extend(rows, lam, params.p)
        history.append(lam.copy())
    return rows, np.array(history)


def build_basis(params: FractalParams, n0: int, n: int) -> list[Eigenfunction]:
    """Eigenfunctions ``f_{n,k}`` for ``k = 0 .. 3**n0``.

    The full level-``n0`` basis is extended along the lowest child up to
    level ``n``.
    """
    _require_asymmetric(params)
    if n < n0:
        raise ValueError("need n >= n0")
    check_level(n)
    base = full_basis(params, n0)
    rows = np.array([f.values for f in base])
    lams = np.array([f.eigenvalue for f in base])
    rows, history = extend_lowest(params, rows, lams, n - n0)
    return [
        Eigenfunction(params, n, k, float(history[-1, k]), rows[k]) for k in range(len(base))
    ]


def basis_matrix(basis: Sequence[Eigenfunction]) -> tuple[np.ndarray, np.ndarray]:
    """Stack a basis into ``(values, eigenvalues)`` arrays."""
    return np.array([f.values for f in basis]), np.array([f.eigenvalue for f in basis])


def sup_norm_bound(f: Eigenfunction, next_eigenvalue: Optional[float] = None) -> float:
    """Upper bound for the sup norm of the limit eigenfunction (p < 1/2).

    Uses ``exp(lambda_n / (q - lambda_{n+1}) * p / (2 - p))`` times the
    level-``n`` sup norm; ``lambda_{n+1}`` is the lowest child unless given.
    """
    params = f.params
    if not params.p < 0.5:
        raise ValueError("sup-norm bound is only available for p < 1/2")
    lam = f.eigenvalue
    nxt = lowest_child(params, lam) if next_eigenvalue is None else next_eigenvalue
    if nxt >= params.q:
        raise ValueError(f"next eigenvalue {nxt} is not below q = {params.q}")
    return f.sup_norm * math.exp(lam / (params.q - nxt) * params.p / (2.0 - params.p))


def convergence_bound(f: Eigenfunction, limit_value: float,
                      next_eigenvalue: Optional[float] = None) -> float:
    """Bound on ``|| f_k - f_{n,k} ||_inf`` with `f` harmonically filled between vertices."""
    params = f.params
    if not params.p < 0.5:
        raise ValueError("convergence bound is only available for p < 1/2")
    return params.c0 ** (-f.level) * limit_value * GREEN_SUP * sup_norm_bound(f, next_eigenvalue)


def product_norm_bound(f: Eigenfunction, m: int) -> float:
    """Finite-level bound on ``|| f_{m,k} ||`` from level ``f.level`` data (p < 1/2)."""
    params = f.params
    if not params.p < 0.5:
        raise ValueError("product bound is only available for p < 1/2")
    lam = f.eigenvalue
    ratio = lam / (params.q - lowest_child(params, lam))
    j = np.arange(1, m - f.level + 1)
    return f.sup_norm * float(np.prod(1.0 + (params.p / 2.0) ** j * ratio))


@dataclass(frozen=True, eq=False)
class LimitEigenfunctionApprox:
    """Level-``n`` eigenfunction, its harmonic fill on a finer grid and an error bound."""

    base: Eigenfunction
    fill_level: int
    harmonic_fill: np.ndarray
    error_bound: float


def limit_approximation(f: Eigenfunction, limit_value: float, fill_levels: int = 2) -> LimitEigenfunctionApprox:
    fill = harmonic_fill(f.params, f.values, fill_levels)
    return LimitEigenfunctionApprox(f, f.level + fill_levels, fill, convergence_bound(f, limit_value))


def evaluate(params: FractalParams, level: int, values, x) -> np.ndarray:
    """Value at points ``x`` of I: linear in the resistance coordinate within each cell."""
    grid = build_grid(params, level)
    return np.interp(x, grid.coords_resistance, np.asarray(values, dtype=float))
