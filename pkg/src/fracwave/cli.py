"""Command-line front end: data export and self-verification.

Tables are CSV with one header row; spectra are JSON lines. Every float is
written as its shortest round-trip decimal so identical runs give identical
bytes.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import decimation, delta, eigenfunctions, oracle, wave
from .core import (
    FractalParams,
    LevelBudgetError,
    apply_laplacian,
    build_grid,
    energy,
    make_params,
    stationary_weights,
)

COMMANDS = ("spectrum", "eigenfunction", "delta", "wave", "verify", "dimension")
PARAMETRIZATIONS = ("uniform", "resistance", "measure")
TABLE_HEADER = ("x_uniform", "x_resistance", "x_measure", "value")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_TOLERANCE = {"verify": 1e-8, "dimension": 0.1, "spectrum": 1e-8}
VERIFY_MAX_LEVEL = oracle.DENSE_MAX_LEVEL
ENERGY_SAMPLES = 200


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    p: float = 0.2
    n0: int = 2
    n: int = 4
    k: tuple[int, ...] = (1,)
    times: tuple[float, ...] = (0.0,)
    parametrization: Optional[str] = None
    normalization: str = "fundamental"
    output: Optional[str] = None
    oracle: bool = False
    tolerance: Optional[float] = None
    inject_fault: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.parametrization is not None and self.parametrization not in PARAMETRIZATIONS:
            raise UsageError(f"parametrization must be one of {PARAMETRIZATIONS}")
        if self.normalization not in wave.NORMALIZATIONS:
            raise UsageError(f"normalization must be one of {wave.NORMALIZATIONS}")
        object.__setattr__(self, "k", tuple(int(i) for i in self.k))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if self.tolerance is not None and not self.tolerance > 0:
            raise UsageError("tolerance must be positive")

    @property
    def params(self) -> FractalParams:
        return make_params(self.p)

    @property
    def effective_tolerance(self) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return DEFAULT_TOLERANCE.get(self.command, 1e-8)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["k"] = list(self.k)
        out["times"] = list(self.times)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def fmt(x) -> str:
    return repr(float(x))


def _int_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def _float_list(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracwave",
        description="Spectra, eigenfunctions and waves for self-similar Laplacians on [0, 1].",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="JSON file with run settings; flags override it")
        cmd.add_argument("--p", type=float)
        cmd.add_argument("--n0", type=int)
        cmd.add_argument("--n", type=int)
        cmd.add_argument("--k", type=_int_list, help="comma-separated eigenfunction indices")
        cmd.add_argument("--times", type=_float_list, help="comma-separated times")
        cmd.add_argument("--parametrization", choices=PARAMETRIZATIONS,
                         help="write two columns x,value in this coordinate")
        cmd.add_argument("--normalization", choices=wave.NORMALIZATIONS)
        cmd.add_argument("--output", help="output file (default: stdout)")
        cmd.add_argument("--oracle", action="store_true", default=None,
                         help="use or compare against dense diagonalization")
        cmd.add_argument("--tolerance", type=float)
        cmd.add_argument("--inject-fault", dest="inject_fault", help=argparse.SUPPRESS)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    data["command"] = args.command
    for name in ("p", "n0", "n", "k", "times", "parametrization", "normalization",
                 "output", "oracle", "tolerance", "inject_fault"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    return RunConfig.from_dict(data)


@contextlib.contextmanager
def _sink(path: Optional[str]):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc
    with fh:
        yield fh


def _note(message: str):
    print(message, file=sys.stderr)


def write_table(out, grid, values: np.ndarray, parametrization: Optional[str],
                lead: Optional[tuple[str, np.ndarray]] = None):
    """Vertex table; `values` has one row per leading-column entry (or is 1-D)."""
    rows = np.atleast_2d(values)
    if parametrization is None:
        header = list(TABLE_HEADER)
        coords = [grid.coords_uniform, grid.coords_resistance, grid.coords_measure]
    else:
        header = ["x", "value"]
        coords = [grid.coords(parametrization)]
    coord_text = [",".join(fmt(c[i]) for c in coords) for i in range(grid.count)]
    if lead is not None:
        header.insert(0, lead[0])
    out.write(",".join(header) + "\n")
    for r, row in enumerate(rows):
        prefix = "" if lead is None else _lead_text(lead[1][r]) + ","
        for i in range(grid.count):
            out.write(f"{prefix}{coord_text[i]},{fmt(row[i])}\n")


def _lead_text(v) -> str:
    return str(int(v)) if isinstance(v, (int, np.integer)) else fmt(v)


def _require_supported(cfg: RunConfig):
    if cfg.params.symmetric and not cfg.oracle:
        raise UsageError("p = 1/2 is unsupported by eigenfunction extension; pass --oracle")


def _basis(cfg: RunConfig):
    """Weights at n0 and the matching level-n basis, from decimation or the dense oracle."""
    params = cfg.params
    if cfg.oracle:
        count = 3**cfg.n0 + 1
        return oracle.oracle_delta_weights(params, cfg.n0), oracle.oracle_basis(params, cfg.n, count)
    return delta.delta_weights(params, cfg.n0), eigenfunctions.build_basis(params, cfg.n0, cfg.n)


def cmd_spectrum(cfg: RunConfig) -> int:
    params = cfg.params
    tree = decimation.build_tree(params, cfg.n)
    values = tree.levels[cfg.n]
    ren = tree.renormalized(cfg.n)
    with _sink(cfg.output) as out:
        for k, lam in enumerate(values):
            parent = None if cfg.n == 0 else int(tree.parents[cfg.n][k])
            record = {
                "level": cfg.n,
                "k": k,
                "value": float(lam),
                "renormalized": float(ren[k]),
                "branch": tree.branch_name(cfg.n, k),
                "parent_k": parent,
            }
            out.write(json.dumps(record) + "\n")
    if cfg.oracle:
        gap = oracle.dense_eigensystem(params, cfg.n).compare_spectrum(values)
        ok = gap < cfg.effective_tolerance
        _note(f"CHECK spectrum_oracle {'PASS' if ok else 'FAIL'} margin={fmt(cfg.effective_tolerance - gap)}")
        return EXIT_OK if ok else EXIT_FAIL
    return EXIT_OK


def cmd_eigenfunction(cfg: RunConfig) -> int:
    _require_supported(cfg)
    if any(not 0 <= k <= 3**cfg.n0 for k in cfg.k):
        raise UsageError(f"indices must lie in 0..{3**cfg.n0}")
    _, basis = _basis(cfg)
    rows = np.array([basis[k].values for k in cfg.k])
    for k in cfg.k:
        _note(f"eigenvalue k={k} value={fmt(basis[k].eigenvalue)}")
    grid = build_grid(cfg.params, cfg.n)
    lead = ("k", np.array(cfg.k)) if len(cfg.k) > 1 else None
    with _sink(cfg.output) as out:
        write_table(out, grid, rows, cfg.parametrization, lead)
    return EXIT_OK


def cmd_delta(cfg: RunConfig) -> int:
    _require_supported(cfg)
    weights, basis = _basis(cfg)
    values, _ = eigenfunctions.basis_matrix(basis)
    approx = weights.alpha @ values
    mass = float(approx @ stationary_weights(cfg.params, cfg.n))
    _note(f"quadrature mass={fmt(mass)}")
    with _sink(cfg.output) as out:
        write_table(out, build_grid(cfg.params, cfg.n), approx, cfg.parametrization)
    return EXIT_OK


def cmd_wave(cfg: RunConfig) -> int:
    _require_supported(cfg)
    weights, basis = _basis(cfg)
    wcfg = wave.WaveConfig(cfg.params, cfg.n0, cfg.n, cfg.times, cfg.normalization)
    field = wave.solve_wave(wcfg, weights, basis)
    bound = wave.wave_mass_bound(weights, basis)
    _note(f"amplitude={fmt(field.amplitude)} mass_bound={fmt(bound)}")
    lead = ("t", field.times) if field.times.size > 1 else None
    with _sink(cfg.output) as out:
        write_table(out, build_grid(cfg.params, cfg.n), field.snapshots, cfg.parametrization, lead)
    return EXIT_OK


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: Optional[bool]
    margin: float
    note: str = ""

    def line(self) -> str:
        if self.passed is None:
            return f"CHECK {self.name} SKIP {self.note}"
        return f"CHECK {self.name} {'PASS' if self.passed else 'FAIL'} margin={fmt(self.margin)}"


def _upper(name: str, measured: float, limit: float) -> CheckResult:
    """Passes when ``measured < limit``; the margin is ``limit - measured``."""
    return CheckResult(name, bool(measured < limit), limit - measured)


def run_checks(cfg: RunConfig) -> list[CheckResult]:
    params = cfg.params
    n = cfg.n
    if n > VERIFY_MAX_LEVEL:
        raise LevelBudgetError(f"verify needs n <= {VERIFY_MAX_LEVEL}")
    tol = cfg.effective_tolerance
    tree = decimation.build_tree(params, n)
    values = tree.levels[n].copy()
    if cfg.inject_fault == "spectrum" and values.size > 1:
        values[1] += 1e-3
    dense = oracle.dense_eigensystem(params, n)
    checks = [
        CheckResult("spectrum_count", values.size == 3**n + 1, 0.0),
        _upper("spectrum_oracle", dense.compare_spectrum(values), tol),
    ]
    unsupported = "p=1/2 unsupported by eigenfunction extension"
    if params.symmetric:
        for name in ("eigen_residual", "eigenvector_oracle", "delta_reconstruction",
                     "weights_nonnegative", "weights_sum"):
            checks.append(CheckResult(name, None, 0.0, unsupported))
    else:
        basis = eigenfunctions.full_basis(params, n)
        rows, lams = eigenfunctions.basis_matrix(basis)
        if cfg.inject_fault == "eigenfunction":
            rows = rows.copy()
            rows[1, rows.shape[1] // 2] += 1e-3
        scale = np.maximum(1.0, np.abs(rows).max(axis=1))
        resid = np.abs(apply_laplacian(params, n, rows) - lams[:, None] * rows).max(axis=1) / scale
        checks.append(_upper("eigen_residual", float(resid.max()), 1e-10))
        worst = max(oracle.align(dense.eigenvectors[:, k], rows[k]) for k in range(rows.shape[0]))
        checks.append(_upper("eigenvector_oracle", worst, 1e-7))
        w = delta.delta_weights(params, n)
        err = float(np.abs(w.alpha @ rows - delta.discrete_delta(n)).max())
        checks.append(_upper("delta_reconstruction", err, 1e-9))
        checks.append(CheckResult("weights_nonnegative", bool(w.alpha.min() >= 0), float(w.alpha.min())))
        checks.append(_upper("weights_sum", abs(w.total - 1.0), 1e-12))
    if params.p < 0.5 and n >= 1:
        # k = 0 sits at equality (all three values vanish); the rest must be strict
        margin = math.inf
        for k in range(1, 3**n + 1):
            lo, hi = decimation.eigenvalue_bounds(params, k, n)
            lim = decimation.limit_eigenvalue(params, k).value
            margin = min(margin, (lim - lo) / lim, (hi - lim) / lim)
        zero_ok = decimation.eigenvalue_bounds(params, 0, n) == (0.0, 0.0)
        checks.append(CheckResult("eigenvalue_sandwich", bool(zero_ok and margin > 0), margin))
    else:
        checks.append(CheckResult("eigenvalue_sandwich", None, 0.0, "bounds need p < 1/2"))
    rng = np.random.default_rng(0)
    level = min(n, 4)
    f = rng.standard_normal((ENERGY_SAMPLES, 3**level + 1))
    e0 = energy(params, level, f)
    harm = eigenfunctions.harmonic_extend(params, f)
    other = harm + np.where(np.arange(harm.shape[1]) % 3 == 0, 0.0, rng.standard_normal(harm.shape))
    eq_gap = float(np.max(np.abs(energy(params, level + 1, harm) - e0) / np.maximum(1.0, e0)))
    checks.append(_upper("energy_harmonic", eq_gap, 1e-12))
    checks.append(CheckResult("energy_monotone", bool(np.all(energy(params, level + 1, other) >= e0)),
                              float(np.min(energy(params, level + 1, other) - e0))))
    return checks


def cmd_verify(cfg: RunConfig) -> int:
    checks = run_checks(cfg)
    with _sink(cfg.output) as out:
        for c in checks:
            out.write(c.line() + "\n")
    return EXIT_FAIL if any(c.passed is False for c in checks) else EXIT_OK


def cmd_dimension(cfg: RunConfig) -> int:
    params = cfg.params
    if cfg.n < 6:
        raise UsageError("dimension fit needs n >= 6")
    tree = decimation.build_tree(params, cfg.n)
    fitted = 2.0 * decimation.spectral_dimension_fit(tree, cfg.n)
    deviation = abs(fitted - params.ds) / params.ds
    ok = deviation < cfg.effective_tolerance
    with _sink(cfg.output) as out:
        out.write(f"ds={fmt(params.ds)}\nfitted={fmt(fitted)}\ndeviation={fmt(deviation)}\n")
        out.write(f"CHECK dimension {'PASS' if ok else 'FAIL'} margin={fmt(cfg.effective_tolerance - deviation)}\n")
    return EXIT_OK if ok else EXIT_FAIL


HANDLERS = {
    "spectrum": cmd_spectrum,
    "eigenfunction": cmd_eigenfunction,
    "delta": cmd_delta,
    "wave": cmd_wave,
    "verify": cmd_verify,
    "dimension": cmd_dimension,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        return HANDLERS[cfg.command](cfg)
    except (ValueError, TypeError) as exc:
        # covers UsageError, LevelBudgetError and parameter validation
        _note(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
