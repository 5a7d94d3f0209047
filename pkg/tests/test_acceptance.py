"""End-to-end acceptance criteria, one test per criterion.

Each check returns ``(passed, detail)``; the verdict line is printed and
collected for the pytest summary, then asserted. Run this file directly to
get the verdict lines without pytest.
"""
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import LINES  # noqa: E402

from fracwave.core import energy, make_params, stationary_weights  # noqa: E402
from fracwave.decimation import (  # noqa: E402
    build_tree,
    eigenvalue_bounds,
    limit_eigenvalue,
    spectral_dimension_fit,
    spectrum,
)
from fracwave.delta import delta_weights, discrete_delta  # noqa: E402
from fracwave.eigenfunctions import (  # noqa: E402
    basis_matrix,
    build_basis,
    convergence_bound,
    full_basis,
    harmonic_extend,
    harmonic_fill,
    sup_norm_bound,
)
from fracwave.core import apply_laplacian  # noqa: E402
from fracwave.oracle import dense_spectrum  # noqa: E402
from fracwave.wave import WaveConfig, convergence_gap, solve_wave, wave_mass_bound  # noqa: E402


def spectrum_vs_dense():
    worst, counts_ok = 0.0, True
    for p in (0.2, 0.35, 0.5, 0.8):
        par = make_params(p)
        for n in (1, 2, 3, 4):
            ours = spectrum(par, n)
            counts_ok &= ours.size == 3**n + 1
            worst = max(worst, float(np.max(np.abs(ours - dense_spectrum(par, n)))))
    return counts_ok and worst < 1e-8, f"max_gap={worst:.2e}", 10.0


def classical_limit():
    tree = build_tree(make_params(0.5), 8)
    ren = tree.renormalized(8)
    k = np.arange(1, 6)
    rel = np.abs(ren[1:6] / (k**2 * math.pi**2 / 2) - 1)
    # discrete check: 9^n lambda_{n,k} = 9^n (1 - cos(k pi / 3^n))
    discrete = 9.0**8 * (1 - np.cos(k * np.pi / 3**8))
    disc = np.max(np.abs(ren[1:6] / discrete - 1))
    return rel.max() < 1e-6 and disc < 1e-9, f"max_rel={rel.max():.2e} discrete={disc:.1e}", 5.0


def eigenvalue_sandwich():
    violations, margin = 0, math.inf
    for p in (0.1, 0.2, 0.3, 0.4):
        par = make_params(p)
        for n0 in (2, 3, 4):
            for k in range(3**n0 + 1):
                lo, hi = eigenvalue_bounds(par, k, n0)
                lam = limit_eigenvalue(par, k).value
                if k == 0:
                    violations += not (lo <= lam <= hi)
                    continue
                violations += not (lo < lam < hi)
                margin = min(margin, (lam - lo) / lam, (hi - lam) / lam)
    return violations == 0, f"violations={violations} min_rel_margin={margin:.2e}", 30.0


def eigenfunction_residuals():
    worst, count = 0.0, 0
    for p in (0.2, 0.4):
        par = make_params(p)
        bases = [full_basis(par, n) for n in range(5)]
        bases += [build_basis(par, 4, n) for n in range(5, 9)]
        for n, basis in enumerate(bases):
            rows, lams = basis_matrix(basis)
            lap = apply_laplacian(par, n, rows)
            scale = np.maximum(1.0, np.abs(rows).max(axis=1))
            worst = max(worst, float(np.max(np.abs(lap - lams[:, None] * rows).max(axis=1) / scale)))
            count += len(basis)
    return worst < 1e-10, f"functions={count} max_scaled_residual={worst:.2e}", 60.0


def delta_reconstruction():
    err, mass, neg = 0.0, 0.0, 0
    for p in (0.2, 0.4):
        par = make_params(p)
        for n in range(7):
            w = delta_weights(par, n)
            rows, _ = basis_matrix(full_basis(par, n))
            err = max(err, float(np.max(np.abs(w.alpha @ rows - discrete_delta(n)))))
            mass = max(mass, abs(w.total - 1.0))
            neg += int(np.sum(w.alpha < 0))
    ok = err < 1e-9 and mass < 1e-12 and neg == 0
    return ok, f"max_err={err:.2e} max_mass_dev={mass:.2e} negative={neg}", None


def sup_norm_bounds():
    par = make_params(0.2)
    bases = {m: build_basis(par, 2, m) for m in range(2, 11)}
    violations, ratio = 0, 0.0
    for n in range(2, 10):
        for k in range(10):
            bound = sup_norm_bound(bases[n][k])
            violations += sum(bases[m][k].sup_norm > bound for m in range(n + 1, 11))
    for n in (3, 4, 5):
        for k in range(10):
            bound = convergence_bound(bases[n][k], limit_eigenvalue(par, k).value)
            gap = float(np.max(np.abs(bases[n + 3][k].values - harmonic_fill(par, bases[n][k].values, 3))))
            violations += gap > bound
            if bound > 0:
                ratio = max(ratio, gap / bound)
    return violations == 0, f"violations={violations} worst_gap_over_bound={ratio:.2f}", None


def wave_rate():
    par = make_params(0.2)
    # the gap oscillates in t; a fine grid resolves its running maximum
    ts = np.linspace(0.0, 8.0, 1601)
    rep = convergence_gap(par, 2, range(3, 8), ts)
    j = int(np.flatnonzero(np.isclose(ts, 1.0))[0])
    rel = abs(rep.slopes[j] / rep.target_slope - 1)
    growth = max(float(np.max(rep.envelope_growth(t))) for t in (1.0, 2.0, 4.0))
    fine = convergence_gap(par, 2, range(3, 8), [1.0], delta=3)
    rel3 = abs(fine.slopes[0] / fine.target_slope - 1)
    ok = rel < 0.2 and rel3 < 0.2 and growth <= 2.5
    detail = (f"slope={rep.slopes[j]:.4f} target={rep.target_slope:.4f} rel={rel:.3f} "
              f"rel_delta3={rel3:.3f} max_growth={growth:.3f}")
    return ok, detail, 120.0


def wave_mass():
    par = make_params(0.2)
    values, snapshot_ok = [], True
    for n0 in (2, 3, 4):
        w = delta_weights(par, n0)
        for n in range(n0, 9):
            basis = build_basis(par, n0, n)
            bound = wave_mass_bound(w, basis)
            values.append((n0, n, bound))
            field = solve_wave(WaveConfig(par, n0, n, tuple(np.linspace(0, 4, 41))), w, basis)
            snapshot_ok &= field.amplitude <= bound + 1e-12
    outside = [(n0, n, round(v, 4)) for n0, n, v in values if not 1 < v < 1.5]
    lo, hi = min(v for *_, v in values), max(v for *_, v in values)
    ok = not outside and snapshot_ok
    return ok, f"range=[{lo:.4f}, {hi:.4f}] outside={outside} snapshots_bounded={snapshot_ok}", None


def spectral_dimension():
    devs = []
    for p in (0.2, 0.5):
        par = make_params(p)
        slope = spectral_dimension_fit(build_tree(par, 8), 8)
        devs.append(abs(slope - par.ds / 2) / (par.ds / 2))
    exact = make_params(0.5).ds == 1.0
    return max(devs) < 0.1 and exact, f"rel_dev={devs[0]:.4f},{devs[1]:.4f} ds_half_exact={exact}", None


def energy_laws():
    rng = np.random.default_rng(7)
    eq_gap, mono_ok, const = 0.0, True, 0.0
    for p in (0.2, 0.5, 0.8):
        par = make_params(p)
        for n in range(4):
            f = rng.standard_normal((1000, 3**n + 1))
            e0 = energy(par, n, f)
            harm = harmonic_extend(par, f)
            eq_gap = max(eq_gap, float(np.max(np.abs(energy(par, n + 1, harm) - e0) / np.maximum(1.0, e0))))
            new = np.arange(harm.shape[1]) % 3 != 0
            other = harm + new * rng.standard_normal(harm.shape)
            mono_ok &= bool(np.all(energy(par, n + 1, other) >= e0))
            const = max(const, abs(float(energy(par, n, np.full(3**n + 1, 2.5)))))
    ok = eq_gap < 1e-12 and mono_ok and const == 0.0
    return ok, f"harmonic_gap={eq_gap:.1e} monotone={mono_ok} constant_energy={const}", None


CRITERIA = {
    1: spectrum_vs_dense,
    2: classical_limit,
    3: eigenvalue_sandwich,
    4: eigenfunction_residuals,
    5: delta_reconstruction,
    6: sup_norm_bounds,
    7: wave_rate,
    8: wave_mass,
    9: spectral_dimension,
    10: energy_laws,
}


def verdict(i: int) -> tuple[bool, str]:
    start = time.perf_counter()
    ok, detail, budget = CRITERIA[i]()
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed >= budget:
        ok = False
        detail += f" over_budget={budget:g}s"
    line = f"CRITERION {i} {'PASS' if ok else 'FAIL'} {detail} time={elapsed:.2f}s"
    print(line)
    LINES.append(line)
    return ok, line


def test_criterion_1_spectrum_matches_dense():
    assert verdict(1)[0]


def test_criterion_2_classical_limit():
    assert verdict(2)[0]


def test_criterion_3_eigenvalue_sandwich():
    assert verdict(3)[0]


def test_criterion_4_eigenfunction_residuals():
    assert verdict(4)[0]


def test_criterion_5_delta_reconstruction():
    assert verdict(5)[0]


def test_criterion_6_sup_norm_bounds():
    assert verdict(6)[0]


def test_criterion_7_wave_convergence_rate():
    assert verdict(7)[0]


def test_criterion_8_wave_mass_bound():
    ok, line = verdict(8)
    assert ok, line


def test_criterion_9_spectral_dimension():
    assert verdict(9)[0]


def test_criterion_10_energy_laws():
    assert verdict(10)[0]


if __name__ == "__main__":
    results = [verdict(i)[0] for i in CRITERIA]
    sys.exit(0 if all(results) else 1)
