"""Truncated eigen-series solutions of the wave equation at a finite level.

With zero initial velocity and impulse-like initial data the level-``n``
solution is ``u_n(x, t) = sum_k alpha_k f_{n,k}(x) cos(t sqrt(lambda_{n,k}))``.
Times are either raw or normalized so the lowest nonconstant mode completes a
half period at ``t = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import FractalParams, check_level
from .delta import DeltaWeights, delta_weights
from .eigenfunctions import Eigenfunction, basis_matrix, build_basis, harmonic_fill

NORMALIZATIONS = ("raw", "fundamental", "renormalized")


@dataclass(frozen=True)
class WaveConfig:
    """Levels, sample times and the time convention.

    ``fundamental`` maps ``t`` to ``t * pi / sqrt(lambda_{n,1})``;
    ``renormalized`` maps it to ``t * sqrt(c0**n)``, which puts every level on
    the time scale of the limit Laplacian.
    """

    params: FractalParams
    n0: int
    n: int
    times: tuple[float, ...] = (0.0,)
    normalization: str = "fundamental"

    def __post_init__(self):
        check_level(self.n0)
        check_level(self.n)
        if self.n < self.n0:
            raise ValueError(f"need n >= n0, got n={self.n}, n0={self.n0}")
        times = tuple(float(t) for t in np.atleast_1d(np.asarray(self.times, dtype=float)))
        if not all(math.isfinite(t) and t >= 0.0 for t in times):
            raise ValueError("times must be finite and nonnegative")
        object.__setattr__(self, "times", times)
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


@dataclass(frozen=True, eq=False)
class WaveField:
    config: WaveConfig
    times: np.ndarray
    snapshots: np.ndarray = field(repr=False)

    def at(self, t: float) -> np.ndarray:
        i = int(np.flatnonzero(self.times == t)[0]) if np.any(self.times == t) else None
        if i is None:
            raise KeyError(f"no snapshot at t = {t}")
        return self.snapshots[i]

    @property
    def amplitude(self) -> float:
        return float(np.max(np.abs(self.snapshots)))


def physical_times(config: WaveConfig, eigenvalues, times=None) -> np.ndarray:
    """Raw times at which the series is evaluated."""
    t = np.asarray(config.times if times is None else times, dtype=float)
    if config.normalization == "raw":
        return t
    if config.normalization == "fundamental":
        return t * math.pi / math.sqrt(eigenvalues[1])
    return t * math.sqrt(config.params.c0**config.n)


def _check_basis(config: WaveConfig, basis: Sequence[Eigenfunction], count: int):
    if len(basis) != count:
        raise ValueError(f"basis has {len(basis)} eigenfunctions, expected {count}")
    if any(f.level != config.n for f in basis):
        raise ValueError(f"basis must live on level {config.n}")
    if any(f.params != config.params for f in basis):
        raise ValueError("basis belongs to different parameters")


def _series(config, values, eigenvalues, cos_coeffs, sin_coeffs=None):
    t = physical_times(config, eigenvalues)
    freq = np.sqrt(np.maximum(eigenvalues, 0.0))
    phase = np.outer(t, freq)
    amp = np.cos(phase) * cos_coeffs
    if sin_coeffs is not None:
        moving = freq > 0.0
        scaled = np.zeros_like(freq)
        scaled[moving] = sin_coeffs[moving] / freq[moving]
        amp = amp + np.sin(phase) * scaled
    return WaveField(config, np.array(config.times), amp @ values)


def solve_wave(config: WaveConfig, weights: Optional[DeltaWeights] = None,
               basis: Optional[Sequence[Eigenfunction]] = None) -> WaveField:
    """Zero-velocity solution started from the truncated impulse.

    Missing weights or basis are computed from `config`.
    """
    if weights is None:
        weights = delta_weights(config.params, config.n0)
    if weights.level != config.n0 or weights.params != config.params:
        raise ValueError("weights do not match the configuration")
    if basis is None:
        basis = build_basis(config.params, config.n0, config.n)
    _check_basis(config, basis, weights.alpha.size)
    values, lams = basis_matrix(basis)
    return _series(config, values, lams, weights.alpha)


def solve_wave_general(config: WaveConfig, phi_coeffs, psi_coeffs,
                       basis: Sequence[Eigenfunction]) -> WaveField:
    """Series with initial displacement coefficients `phi_coeffs` and velocity `psi_coeffs`.

    Zero-eigenvalue modes carry no velocity term.
    """
    alpha = np.asarray(phi_coeffs, dtype=float)
    beta = np.asarray(psi_coeffs, dtype=float)
    if alpha.shape != beta.shape or alpha.ndim != 1:
        raise ValueError("coefficient arrays must be 1-D with equal length")
    _check_basis(config, basis, alpha.size)
    values, lams = basis_matrix(basis)
    return _series(config, values, lams, alpha, beta)


def wave_mass_bound(weights: DeltaWeights, basis: Sequence[Eigenfunction]) -> float:
    """``sum_k alpha_k ||f_{n,k}||_inf``, an amplitude bound for every snapshot."""
    if len(basis) != weights.alpha.size:
        raise ValueError("weights and basis lengths differ")
    return float(weights.alpha @ np.array([f.sup_norm for f in basis]))


def wave_envelope(weights: DeltaWeights, basis: Sequence[Eigenfunction]) -> np.ndarray:
    """Pointwise ``sum_k alpha_k |f_{n,k}(x)|``; its maximum is a sharper amplitude bound."""
    values, _ = basis_matrix(basis)
    return weights.alpha @ np.abs(values)


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Gaps ``sup |u_n - u_{n+delta}|`` at matched normalized times.

    ``gaps[i, j]`` belongs to ``levels[i]`` and ``times[j]``; ``slopes[j]`` is
    the least-squares slope of ``log gap`` against the level.
    """

    params: FractalParams
    n0: int
    delta: int
    levels: np.ndarray
    times: np.ndarray
    gaps: np.ndarray
    slopes: np.ndarray

    @property
    def target_slope(self) -> float:
        return -math.log(self.params.c0)

    @property
    def envelope(self) -> np.ndarray:
        """Running maximum of each gap row over the (ascending) sample times.

        The gap oscillates in time, so growth rates are read off this envelope.
        """
        if np.any(np.diff(self.times) < 0):
            raise ValueError("envelope needs ascending sample times")
        return np.maximum.accumulate(self.gaps, axis=1)

    def envelope_growth(self, t: float) -> np.ndarray:
        """Per level, envelope at ``2 t`` over envelope at `t` (both must be sampled)."""
        env = self.envelope
        i, j = (int(np.flatnonzero(np.isclose(self.times, s))[0]) for s in (t, 2.0 * t))
        return env[:, j] / env[:, i]


def _normalized_field(params, n0, n, times, weights):
    cfg = WaveConfig(params, n0, n, tuple(times), "fundamental")
    return solve_wave(cfg, weights).snapshots


def convergence_gap(params: FractalParams, n0: int, levels: Sequence[int],
                    t_values: Sequence[float], delta: int = 1) -> ConvergenceReport:
    """Level-to-level gap of the normalized-time solutions.

    Each level runs on its own fundamental time. The coarse solution is
    harmonically filled onto the finer grid before the sup is taken.
    """
    if not params.p < 0.5:
        raise ValueError("convergence diagnostics need p < 1/2")
    if delta < 1:
        raise ValueError("delta must be at least 1")
    levels = np.array(sorted(set(int(n) for n in levels)))
    if levels.size == 0 or levels[0] < n0:
        raise ValueError("levels must be nonempty and at least n0")
    check_level(int(levels[-1]) + delta)
    times = np.asarray(t_values, dtype=float)
    weights = delta_weights(params, n0)
    cache: dict[int, np.ndarray] = {}

    def field_at(m):
        if m not in cache:
            cache[m] = _normalized_field(params, n0, m, times, weights)
        return cache[m]

    gaps = np.empty((levels.size, times.size))
    for i, n in enumerate(levels):
        coarse = harmonic_fill(params, field_at(int(n)), delta)
        gaps[i] = np.max(np.abs(coarse - field_at(int(n) + delta)), axis=1)
    slopes = np.full(times.size, np.nan)
    if levels.size >= 2:
        with np.errstate(divide="ignore"):
            logs = np.log(gaps)
        for j in range(times.size):
            if np.all(np.isfinite(logs[:, j])):
                slopes[j] = np.polyfit(levels, logs[:, j], 1)[0]
    return ConvergenceReport(params, n0, delta, levels, times, gaps, slopes)
