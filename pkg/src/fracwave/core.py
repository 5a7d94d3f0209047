"""Self-similar structure on the unit interval.

One free parameter ``p`` fixes three contractions with resistance weights
``r`` and measure weights ``m``. Level ``n`` has ``3**n`` cells and
``3**n + 1`` vertices, indexed left to right by integer position; the
addressing word of cell ``i`` is the base-3 expansion of ``i`` (digit 0 is
the letter 1).
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels

#: Largest level any grid-sized array may be built for (3**14 + 1 vertices).
MAX_LEVEL = 14


class LevelBudgetError(ValueError):
    """Requested level exceeds the configured size budget."""


def check_level(n: int, max_level: int = MAX_LEVEL) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ValueError(f"level must be an integer, got {n!r}")
    n = int(n)
    if n < 0:
        raise ValueError(f"level must be nonnegative, got {n}")
    if n > max_level:
        raise LevelBudgetError(
            f"level {n} needs {3**n + 1} vertices; budget is level {max_level}"
        )
    return n


@dataclass(frozen=True)
class FractalParams:
    """The parameter ``p`` and every constant derived from it."""

    p: float
    q: float = field(init=False)
    r1: float = field(init=False)
    r2: float = field(init=False)
    r3: float = field(init=False)
    m1: float = field(init=False)
    m2: float = field(init=False)
    m3: float = field(init=False)
    c0: float = field(init=False)
    ds: float = field(init=False)

    def __post_init__(self):
        p = self.p
        if not isinstance(p, numbers.Real) or isinstance(p, bool):
            raise ValueError(f"p must be a real number, got {p!r}")
        p = float(p)
        if not math.isfinite(p) or not 0.0 < p < 1.0:
            raise ValueError(f"p must be a finite number in (0, 1), got {p!r}")
        q = 1.0 - p
        pq = p * q
        set_ = object.__setattr__
        set_(self, "p", p)
        set_(self, "q", q)
        set_(self, "r1", p / (1.0 + p))
        set_(self, "r2", q / (1.0 + p))
        set_(self, "r3", p / (1.0 + p))
        set_(self, "m1", q / (1.0 + q))
        set_(self, "m2", p / (1.0 + q))
        set_(self, "m3", q / (1.0 + q))
        set_(self, "c0", (2.0 + pq) / pq)
        # log(1 + 2/pq) == log 9 exactly when pq == 1/4
        set_(self, "ds", 1.0 if pq == 0.25 else math.log(9.0) / math.log1p(2.0 / pq))

    @property
    def pq(self) -> float:
        return self.p * self.q

    @property
    def r(self) -> tuple[float, float, float]:
        return (self.r1, self.r2, self.r3)

    @property
    def m(self) -> tuple[float, float, float]:
        return (self.m1, self.m2, self.m3)

    @property
    def symmetric(self) -> bool:
        """True when p == q, the classical case."""
        return self.p == self.q

    @property
    def forbidden(self) -> tuple[float, float]:
        """Poles of the extension formula, 1 - p and 1 + p."""
        return (1.0 - self.p, 1.0 + self.p)


def make_params(p: float) -> FractalParams:
    return FractalParams(p)


def word_of_cell(n: int, index: int) -> tuple[int, ...]:
    """Address of the ``index``-th level-``n`` cell as letters in {1, 2, 3}."""
    if not 0 <= index < 3**n:
        raise IndexError(f"cell {index} out of range for level {n}")
    letters = []
    for _ in range(n):
        index, digit = divmod(index, 3)
        letters.append(digit + 1)
    return tuple(reversed(letters))


def cell_of_word(word) -> int:
    index = 0
    for letter in word:
        if letter not in (1, 2, 3):
            raise ValueError(f"letters must be 1, 2 or 3, got {letter!r}")
        index = 3 * index + (letter - 1)
    return index


@lru_cache(maxsize=64)
def _cell_products(weights: tuple[float, float, float], n: int) -> np.ndarray:
    out = np.ones(1)
    w = np.asarray(weights)
    for _ in range(n):
        out = np.kron(out, w)
    out.setflags(write=False)
    return out


def cell_resistances(params: FractalParams, n: int) -> np.ndarray:
    """Product of resistance weights along each level-``n`` cell's word."""
    return _cell_products(params.r, check_level(n))


def cell_measures(params: FractalParams, n: int) -> np.ndarray:
    """Self-similar measure of each level-``n`` cell."""
    return _cell_products(params.m, check_level(n))


def _refine_coords(coords: np.ndarray, w1: float, w3: float) -> np.ndarray:
    x0, x1 = coords[:-1], coords[1:]
    width = x1 - x0
    out = np.empty(3 * (coords.size - 1) + 1)
    out[::3] = coords
    out[1::3] = x0 + w1 * width
    out[2::3] = x1 - w3 * width
    return out


@lru_cache(maxsize=64)
def _nested_coords(w1: float, w3: float, n: int) -> np.ndarray:
    if n == 0:
        out = np.array([0.0, 1.0])
    else:
        out = _refine_coords(_nested_coords(w1, w3, n - 1), w1, w3)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class VertexGrid:
    """Level-``n`` vertices in three coordinate systems.

    ``coords_resistance`` is the geometric position in I (the contractions act
    on it); ``coords_measure`` is the cumulative measure; ``coords_uniform`` is
    plain ``k / 3**n``.
    """

    level: int
    coords_uniform: np.ndarray
    coords_resistance: np.ndarray
    coords_measure: np.ndarray

    @property
    def count(self) -> int:
        return self.coords_uniform.size

    def coords(self, parametrization: str) -> np.ndarray:
        try:
            return {
                "uniform": self.coords_uniform,
                "resistance": self.coords_resistance,
                "measure": self.coords_measure,
            }[parametrization]
        except KeyError:
            raise ValueError(f"unknown parametrization {parametrization!r}") from None


def build_grid(params: FractalParams, n: int, max_level: int = MAX_LEVEL) -> VertexGrid:
    n = check_level(n, max_level)
    uniform = np.arange(3**n + 1) / 3**n
    uniform.setflags(write=False)
    # Nested refinement keeps coarse coordinates bit-identical at every finer level.
    resistance = _nested_coords(params.r1, params.r3, n)
    measure = _nested_coords(params.m1, params.m3, n)
    return VertexGrid(n, uniform, resistance, measure)


@dataclass(frozen=True, eq=False)
class TransitionProfile:
    """Nearest-neighbour transition probabilities on a level grid.

    ``a[k]`` is the probability of stepping right from vertex ``k`` and
    ``b[k] = 1 - a[k]`` of stepping left; ``a = 1`` at 0 and ``a = 0`` at 1.
    """

    level: int
    a: np.ndarray
    b: np.ndarray

    @property
    def to_right(self) -> np.ndarray:
        return self.a

    @property
    def to_left(self) -> np.ndarray:
        return self.b


@lru_cache(maxsize=32)
def _transition_cached(params: FractalParams, n: int) -> TransitionProfile:
    mu = cell_measures(params, n)
    a = np.empty(mu.size + 1)
    a[0] = 1.0
    a[-1] = 0.0
    ratio = mu[1:] / (mu[:-1] + mu[1:])
    # Adjacent cells always have measures in ratio m1:m2 or m2:m3, so the
    # ratio is p or q up to rounding; snap to the exact value.
    snapped = np.where(np.abs(ratio - params.p) <= np.abs(ratio - params.q), params.p, params.q)
    if ratio.size and np.max(np.abs(ratio - snapped)) > 1e-9:
        raise AssertionError("transition ratio is neither p nor q")
    a[1:-1] = snapped
    b = 1.0 - a
    b[1:-1] = np.where(snapped == params.p, params.q, params.p)
    a.setflags(write=False)
    b.setflags(write=False)
    return TransitionProfile(n, a, b)


def transition_profile(params: FractalParams, n: int) -> TransitionProfile:
    return _transition_cached(params, check_level(n))


def stationary_weights(params: FractalParams, n: int) -> np.ndarray:
    """Reversing measure of the level-``n`` walk: half the measure of adjacent cells."""
    mu = cell_measures(params, n)
    w = np.zeros(mu.size + 1)
    w[:-1] += 0.5 * mu
    w[1:] += 0.5 * mu
    return w


def _as_rows(f, count: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 1:
        rows, single = arr[None, :], True
    elif arr.ndim == 2:
        rows, single = arr, False
    else:
        raise ValueError("expected a vertex function or a 2-D stack of them")
    if rows.shape[1] != count:
        raise ValueError(f"function has {rows.shape[1]} values, grid has {count} vertices")
    return rows, single


def apply_laplacian(params: FractalParams, n: int, f) -> np.ndarray:
    """Discrete Laplacian ``I - P`` at level ``n``.

    `f` may be one vertex function or a 2-D array with one function per row.
    """
    prof = transition_profile(params, n)
    rows, single = _as_rows(f, prof.a.size)
    out = kernels.laplacian(rows, prof.a, prof.b)
    return out[0] if single else out


def energy(params: FractalParams, n: int, f) -> float:
    """Discrete energy: sum over cells of squared increments over cell resistance."""
    res = cell_resistances(params, n)
    rows, single = _as_rows(f, res.size + 1)
    out = np.sum(np.diff(rows, axis=1) ** 2 / res, axis=1)
    return float(out[0]) if single else out


def restrict(values, n_from: int, n_to: int) -> np.ndarray:
    """Restriction of a level-``n_from`` function to the coarser grid ``n_to``."""
    if n_to > n_from:
        raise ValueError("can only restrict to a coarser level")
    return np.asarray(values)[..., :: 3 ** (n_from - n_to)]
