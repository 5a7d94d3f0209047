"""Brute-force reference: dense eigendecomposition of the level-n Laplacian.

The walk is reversible with respect to the vertex weights ``w`` (half the
measure of the adjacent cells), so ``D^{1/2} P D^{-1/2}`` with ``D = diag(w)``
is symmetric and shares the spectrum of ``P``. Eigenvectors of ``P`` are
``D^{-1/2}`` times those of the symmetric matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FractalParams, check_level, stationary_weights, transition_profile

#: Dense problems beyond this level are refused (730 x 730 at level 6).
DENSE_MAX_LEVEL = 6


def transition_matrix(params: FractalParams, n: int) -> np.ndarray:
    prof = transition_profile(params, n)
    return np.diag(prof.a[:-1], 1) + np.diag(prof.b[1:], -1)


def symmetrized_transition(params: FractalParams, n: int) -> np.ndarray:
    w = stationary_weights(params, n)
    root = np.sqrt(w)
    return root[:, None] * transition_matrix(params, n) / root[None, :]


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Dense eigenpairs of the level-``n`` Laplacian.

    ``eigenvectors[:, k]`` belongs to ``spectrum[k]`` and is scaled so its
    value at vertex 0 is 1 (the convention of the decimation basis).
    """

    level: int
    spectrum: np.ndarray
    eigenvectors: np.ndarray
    weights: np.ndarray

    def compare_spectrum(self, values) -> float:
        values = np.sort(np.asarray(values, dtype=float))
        if values.shape != self.spectrum.shape:
            return float("inf")
        return float(np.max(np.abs(values - self.spectrum)))


def dense_eigensystem(params: FractalParams, n: int, max_level: int = DENSE_MAX_LEVEL) -> OracleResult:
    n = check_level(n, max_level)
    sym = symmetrized_transition(params, n)
    sym = 0.5 * (sym + sym.T)
    mu, vecs = np.linalg.eigh(sym)
    w = stationary_weights(params, n)
    vecs = vecs / np.sqrt(w)[:, None]
    # ascending Laplacian eigenvalues correspond to descending eigenvalues of P
    order = np.argsort(1.0 - mu, kind="stable")
    lam = np.clip((1.0 - mu)[order], 0.0, 2.0)
    vecs = vecs[:, order]
    vecs = vecs / vecs[0, :][None, :]
    return OracleResult(n, lam, vecs, w)


def dense_spectrum(params: FractalParams, n: int) -> np.ndarray:
    return dense_eigensystem(params, n).spectrum


def dense_delta_weights(result: OracleResult) -> np.ndarray:
    """Coefficients of the unit impulse at 0 in the oracle eigenbasis."""
    delta = np.zeros(result.spectrum.size)
    delta[0] = 1.0
    return np.linalg.solve(result.eigenvectors, delta)


def align(reference: np.ndarray, candidate: np.ndarray) -> float:
    """Relative max-norm gap after scaling both to 1 at their largest-magnitude vertex."""
    i = int(np.argmax(np.abs(reference)))
    if candidate[i] == 0.0:
        return float("inf")
    a = reference / reference[i]
    b = candidate / candidate[i]
    return float(np.max(np.abs(a - b)))


def oracle_basis(params: FractalParams, n: int, count: int):
    """The lowest `count` dense eigenvectors as level-``n`` eigenfunctions.

    This is how eigenfunctions are obtained at p = 1/2, where the extension
    formula breaks down.
    """
    from .eigenfunctions import Eigenfunction

    result = dense_eigensystem(params, n)
    if not 0 < count <= result.spectrum.size:
        raise ValueError(f"count must be in 1..{result.spectrum.size}")
    return [
        Eigenfunction(params, n, k, float(result.spectrum[k]), result.eigenvectors[:, k])
        for k in range(count)
    ]


def oracle_delta_weights(params: FractalParams, n: int):
    from .delta import DeltaWeights

    return DeltaWeights(params, n, dense_delta_weights(dense_eigensystem(params, n)))
