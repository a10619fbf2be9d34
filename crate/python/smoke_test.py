#!/usr/bin/env python3
"""Smoke test for the pep_lab Python module.

Builds the extension with cargo if needed, imports it, and checks a handful
of closed-form and engine values against known references.

Usage:  python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
SO_SRC = ROOT / "target" / "release" / "libpep_lab.so"
SO_DST = pathlib.Path(__file__).resolve().parent / "pep_lab.so"


def ensure_module():
    if not SO_SRC.exists():
        print("building pep-py (release) ...")
        subprocess.run(
            ["cargo", "build", "-p", "pep-py", "--release"], cwd=ROOT, check=True
        )
    if not SO_DST.exists() or SO_SRC.stat().st_mtime > SO_DST.stat().st_mtime:
        shutil.copy2(SO_SRC, SO_DST)
    sys.path.insert(0, str(SO_DST.parent))


def approx(a, b, tol, label):
    if abs(a - b) > tol:
        raise AssertionError(f"{label}: {a} vs {b} (tol {tol})")
    print(f"  ok  {label}: {a:.8g}")


def main():
    ensure_module()
    import pep_lab as pl

    print("== closed-form layer ==")
    p = pl.ModelParams(delta=1.5, omega=1.0)
    scales = pl.derived_scales(p)
    approx(scales["omega_c"], math.sqrt(2.5), 1e-12, "omega_c at delta=1.5")
    approx(scales["omega_ep"], 1.5, 1e-12, "omega_ep")
    assert pl.classify_regime(p) == "below_ep"
    assert pl.classify_regime(pl.ModelParams(1.5, 1.54)) == "above_ep"

    approx(pl.population_steady(p), 1.0 / 3.0, 1e-12, "steady population 1/3")
    approx(pl.g2(p, 0.0), 4.5, 1e-12, "g2(0) = 2 + (omega_c/omega)^2")
    approx(pl.g1(p, 0.0), 1.0, 1e-12, "g1(0) = 1")

    ep = pl.ModelParams(1.5, 1.5)
    s_total, s_plus, s_minus = pl.spectrum(ep, 0.0)
    approx(s_total, 4.0 / math.pi, 1e-12, "S_EP(0) = 4/(pi gamma)")
    approx(s_plus + s_minus, s_total, 1e-12, "branch decomposition sums")

    vx, vp = pl.quadrature_variances(ep)
    approx(vx, 0.5, 1e-12, "sigma_X^2 = 1/2 at the EP")

    (wp, wm), (lp, lm, l3) = pl.moment_eigenvalues(pl.ModelParams(1.5, 0.5))
    approx(wp.real, math.sqrt(2.0), 1e-12, "Re w+ below the EP")
    approx(l3.imag, -1.0, 1e-12, "Im lambda_3 = -gamma")

    kerr = pl.ModelParams(1.0, 2.0, u=0.01)
    approx(
        pl.semiclassical_kerr_population(kerr),
        100.0 * (math.sqrt(3.75) - 1.0),
        1e-9,
        "semiclassical Kerr population",
    )

    try:
        pl.population_steady(pl.ModelParams(1.5, 2.0))
        raise AssertionError("expected ValueError beyond the critical drive")
    except ValueError:
        print("  ok  no-steady-state error beyond omega_c")

    print("== engine layer (N = 30) ==")
    n, purity, vx, vp = pl.steady_state_summary(p, 30)
    approx(n, 1.0 / 3.0, 1e-5, "engine steady population")
    sx, sp = pl.quadrature_variances(p)
    approx(vx, sx, 1e-4, "engine var_x vs closed form")
    approx(vp, sp, 1e-4, "engine var_p vs closed form")

    times = [0.1 * k for k in range(21)]
    pops = pl.evolve_population(p, 30, 1, times)
    worst = max(
        abs(a - pl.population_transient(p, 1.0, t)) for t, a in zip(times, pops)
    )
    approx(worst, 0.0, 1e-4, "evolved n(t) vs closed form (max dev)")

    taus = [0.2 * k for k in range(11)]
    g2n = pl.regression_g2(p, 30, taus)
    worst = max(abs(a - pl.g2(p, t)) for t, a in zip(taus, g2n))
    approx(worst, 0.0, 1e-3, "regression g2 vs closed form (max dev)")

    gap, zeros = pl.liouvillian_gap(pl.ModelParams(1.0, 0.0), 8)
    approx(gap, 0.5, 1e-9, "undriven Liouvillian gap = gamma/2")
    assert zeros == 1

    re_ax, im_ax, values, integral = pl.husimi_grid(p, 24, extent=4.0, points=81)
    approx(integral, 1.0, 1e-3, "Husimi normalization")
    peak = max(values)
    assert peak <= 1.0 / math.pi + 1e-6, "Husimi bounded by 1/pi"

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
