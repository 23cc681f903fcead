"""Configuration-driven command line driver.

Every subcommand writes a pretty-printed JSON report (inputs echoed,
package version, pass/fail verdicts) into the output directory, delimited
CSV for tabular data, and renders matplotlib figures next to the CSV unless
--no-figures is given.  The process exits non-zero when any verdict fails.
Identical configuration and seed produce byte-identical CSV/JSON artifacts.

The TRICOMILAB_THREADS environment variable, when set, is forwarded to the
BLAS/OpenMP thread-count variables before numpy spins up its pools.
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

if "TRICOMILAB_THREADS" in os.environ:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, os.environ["TRICOMILAB_THREADS"])

import click
import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import __version__, analysis, identities, riemann2d, semilinear, specfun
from .config import ConfigError, ExperimentConfig
from .data import InitialData
from .opalgebra import conormal_probe
from .propagator import GridSpec, TricomiParams, solve_linear, write_field


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_report(out: Path, name: str, payload: dict) -> bool:
    payload = {"version": __version__, **payload}
    (out / name).write_text(json.dumps(payload, indent=2, sort_keys=True,
                                       default=_jsonable) + "\n")
    return _all_pass(payload)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _all_pass(payload) -> bool:
    if isinstance(payload, dict):
        for key, val in payload.items():
            if key in ("pass", "passed", "verdict"):
                if val in (False, "fail"):
                    return False
            if not _all_pass(val):
                return False
    elif isinstance(payload, (list, tuple)):
        return all(_all_pass(v) for v in payload)
    return True


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _fit_payload(fit: analysis.DecayFit) -> dict:
    return {
        "quantity": fit.quantity,
        "expected_exponent": fit.expected,
        "fitted": fit.fitted_exponent,
        "r_squared": fit.r_squared,
        "tolerance": fit.tolerance,
        "pass": fit.passed if fit.passed is not None else True,
    }


def _plot_fits(out: Path, stem: str, fits, figures: bool) -> None:
    if not figures:
        return
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for fit in fits:
        ts, vals = zip(*fit.samples)
        ax.loglog(ts, vals, "o-", ms=3, label=f"{fit.quantity} "
                  f"(slope {fit.fitted_exponent:+.3f})")
    ax.set_xlabel("t or |xi|")
    ax.set_ylabel("value")
    ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out / f"{stem}.png", dpi=130)
    plt.close(fig)


@click.group()
@click.version_option(__version__)
def main():
    """Numerical laboratory for degenerate wave equations of generalized
    Tricomi type."""


# ---------------------------------------------------------------------------
# specfun eval
# ---------------------------------------------------------------------------

@main.group()
def specfun_group():
    """Special-function point evaluation (debugging aid)."""


main.add_command(specfun_group, name="specfun")


@specfun_group.command("eval")
@click.option("--a", type=float, required=True)
@click.option("--c", type=float, required=True)
@click.option("--z-re", type=float, default=0.0, show_default=True)
@click.option("--z-im", type=float, default=0.0, show_default=True)
@click.option("--switch-radius", type=float, default=specfun.DEFAULT_SWITCH_RADIUS,
              show_default=True)
def specfun_eval(a, c, z_re, z_im, switch_radius):
    """Evaluate Kummer's Phi(a, c; z)."""
    ev = specfun.kummer(specfun.KummerParams(a, c, complex(z_re, z_im)),
                        switch_radius)
    click.echo(json.dumps({
        "value_re": ev.value.real, "value_im": ev.value.imag,
        "method": ev.method.value, "abs_error_estimate": ev.abs_error_estimate,
    }, sort_keys=True))


# ---------------------------------------------------------------------------
# solve-linear
# ---------------------------------------------------------------------------

@main.command("solve-linear")
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--n", type=int, default=2, show_default=True)
@click.option("--t", "t_eval", type=float, default=0.5, show_default=True)
@click.option("--grid-n", type=int, default=128, show_default=True)
@click.option("--grid-l", type=float, default=8.0, show_default=True)
@click.option("--data-kind", type=click.Choice(["a1", "a2", "a3"]), default="a3",
              show_default=True)
@click.option("--values", default="1,2,3,4", show_default=True,
              help="comma-separated data constants")
@click.option("--out", default="out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def solve_linear_cmd(m, n, t_eval, grid_n, grid_l, data_kind, values, out,
                     figures):
    """Propagate initial velocity data to time t and dump the field."""
    outdir = _outdir(out)
    params = TricomiParams(m=m, n=n, T=max(1.0, 2.0 * t_eval))
    grid = GridSpec(n, grid_n, grid_l)
    vals = tuple(float(v) for v in values.split(","))
    data = InitialData(data_kind, vals)
    field = solve_linear(params, grid, None, data.sample(grid), t_eval)
    write_field(params, field, outdir / "field")
    phys = field.to_real()
    hermitian = field.hermitian_defect()
    if figures and n == 2:
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        extent = [-grid_l / 2, grid_l / 2, -grid_l / 2, grid_l / 2]
        im = ax.imshow(phys.T, origin="lower", extent=extent, cmap="RdBu_r")
        fig.colorbar(im, ax=ax, label="u")
        ax.set_title(f"u(t={t_eval}) m={m}")
        fig.tight_layout()
        fig.savefig(outdir / "field.png", dpi=130)
        plt.close(fig)
    ok = _write_report(outdir, "solve_linear_report.json", {
        "inputs": {"m": m, "n": n, "t": t_eval, "grid": {"N": grid_n, "L": grid_l},
                   "data": {"kind": data_kind, "values": list(vals)}},
        "sup_norm": float(np.max(np.abs(phys))),
        "hermitian_defect": hermitian,
        "pass": hermitian <= 1e-10,
    })
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# solve-semilinear
# ---------------------------------------------------------------------------

@main.command("solve-semilinear")
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--n", type=int, default=2, show_default=True)
@click.option("--t-local", type=float, default=0.25, show_default=True)
@click.option("--grid-n", type=int, default=64, show_default=True)
@click.option("--grid-l", type=float, default=8.0, show_default=True)
@click.option("--data-kind", type=click.Choice(["a1", "a2", "a3"]), default="a3",
              show_default=True)
@click.option("--values", default="0.2,-0.15,0.25,-0.1", show_default=True)
@click.option("--rhs", type=click.Choice(["zero", "cubic", "source",
                                          "custom-expression"]),
              default="cubic", show_default=True)
@click.option("--expression", default=None, help="for custom-expression rhs")
@click.option("--strength", type=float, default=1.0, show_default=True)
@click.option("--nt", type=int, default=64, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--out", default="out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def solve_semilinear_cmd(m, n, t_local, grid_n, grid_l, data_kind, values, rhs,
                         expression, strength, nt, tol, out, figures):
    """Run the fixed-point solver and report contraction and residuals."""
    outdir = _outdir(out)
    params = TricomiParams(m=m, n=n, T=max(1.0, 2.0 * t_local))
    grid = GridSpec(n, grid_n, grid_l)
    vals = tuple(float(v) for v in values.split(","))
    data = InitialData(data_kind, vals)
    rhs_obj = semilinear.NonlinearRHS.from_name(
        rhs, expression=expression,
        source=(lambda t, X: np.exp(-sum(x * x for x in X))) if rhs == "source"
        else None,
        strength=strength)
    try:
        sol = semilinear.picard_solve(params, grid, data, rhs_obj, t_local,
                                      tol=tol, nt=nt)
        report = sol.report
        failed = None
    except semilinear.DivergenceError as exc:
        report, failed = None, str(exc)
    if report is not None:
        _write_csv(outdir / "contraction.csv", ["iteration", "delta_norm"],
                   list(enumerate(report.delta_norms, start=1)))
        if figures:
            fig, ax = plt.subplots(figsize=(5.5, 4))
            ax.semilogy(range(1, len(report.delta_norms) + 1),
                        report.delta_norms, "o-")
            ax.set_xlabel("iteration")
            ax.set_ylabel("|||w_k - w_{k-1}|||")
            ax.grid(True, alpha=0.3)
            fig.tight_layout()
            fig.savefig(outdir / "contraction.png", dpi=130)
            plt.close(fig)
    payload = {
        "inputs": {"m": m, "n": n, "T_local": t_local, "rhs": rhs,
                   "expression": expression, "strength": strength,
                   "grid": {"N": grid_n, "L": grid_l},
                   "data": {"kind": data_kind, "values": list(vals)},
                   "nt": nt, "tol": tol},
        "report": asdict(report) if report is not None else None,
        "error": failed,
        "pass": report is not None and report.converged,
    }
    ok = _write_report(outdir, "semilinear_report.json", payload)
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# riemann2d
# ---------------------------------------------------------------------------

@main.command("riemann2d")
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--c", "c_values", default="1,2,3,4", show_default=True,
              help="quadrant constants C1,C2,C3,C4")
@click.option("--slice", "slice_spec", default="t=0.8", show_default=True)
@click.option("--points", type=int, default=81, show_default=True)
@click.option("--extent", type=float, default=None,
              help="half-width of the slice; default 1.6 phi(t)")
@click.option("--out", default="out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def riemann2d_cmd(m, c_values, slice_spec, points, extent, out, figures):
    """Evaluate the closed-form quadrant solution on a (t, x)-slice."""
    outdir = _outdir(out)
    if not slice_spec.startswith("t="):
        raise click.BadParameter("slice must look like t=0.8")
    t_eval = float(slice_spec[2:])
    cs = tuple(float(v) for v in c_values.split(","))
    params = TricomiParams(m=m, n=2, T=max(1.0, 2.0 * t_eval))
    data = riemann2d.QuadrantData(*cs)
    sol = riemann2d.ClosedFormSolution(params, data)
    half = extent or 1.6 * float(sol.geometry.phi(t_eval))
    xs = np.linspace(-half, half, points)
    u = riemann2d.eval_u_grid(sol, t_eval, xs, xs)
    rows = [(t_eval, float(a), float(b), float(u[i, j]))
            for i, a in enumerate(xs) for j, b in enumerate(xs)]
    _write_csv(outdir / "slice.csv", ["t", "x1", "x2", "u"], rows)
    grid_field_params = GridSpec(2, _next_pow2(points), 2 * half)
    if figures:
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        im = ax.imshow(u.T, origin="lower", extent=[-half, half, -half, half],
                       cmap="RdBu_r")
        phi_t = float(sol.geometry.phi(t_eval))
        theta = np.linspace(0, 2 * math.pi, 200)
        ax.plot(phi_t * np.cos(theta), phi_t * np.sin(theta), "k--", lw=0.8)
        for s in (-phi_t, phi_t):
            ax.axvline(s, color="k", ls=":", lw=0.8)
            ax.axhline(s, color="k", ls=":", lw=0.8)
        fig.colorbar(im, ax=ax, label="u")
        ax.set_title(f"closed form u(t={t_eval}), m={m}")
        fig.tight_layout()
        fig.savefig(outdir / "slice.png", dpi=130)
        plt.close(fig)
    # singularity probe near Gamma_1+ inside the sonic circle
    phi_t = float(sol.geometry.phi(t_eval))
    probe_x = (0.93 * phi_t, 0.12 * phi_t)
    eps0, levels = 0.01, 7
    b2 = []
    for k in range(levels):
        si = riemann2d.singularity_integrals(sol, t_eval, probe_x, eps0 / 2 ** k)
        b2.append(si.B2_truncated)
    ratios = [b2[k + 1] / b2[k] for k in range(levels - 1)]
    probe = {
        "point": [t_eval, probe_x[0], probe_x[1]],
        "eps_sequence": [eps0 / 2 ** k for k in range(levels)],
        "probe_values": b2,
        "growth_ratios": ratios,
        "A1": si.A1,
        "B1": si.B1,
        "pass": all(abs(r - 2.0) <= 0.2 for r in ratios[-3:]),
    }
    calib = {
        "calibrated_C0": sol.C0,
        "printed_constant": riemann2d.printed_normalization(m),
        "j_selfcheck": riemann2d.j_selfcheck(1.0, (0.3, 0.2)),
    }
    ok = _write_report(outdir, "riemann2d_report.json", {
        "inputs": {"m": m, "C": list(cs), "slice": slice_spec,
                   "points": points, "extent": half},
        "singularity_probe": probe,
        "normalization": calib,
        "pass": probe["pass"],
    })
    sys.exit(0 if ok else 1)


def _next_pow2(k: int) -> int:
    n = 4
    while n < k:
        n *= 2
    return n


# ---------------------------------------------------------------------------
# verify-identities
# ---------------------------------------------------------------------------

@main.command("verify-identities")
@click.option("--lemma", type=click.Choice(identities.LEMMAS), required=True)
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--n", type=int, default=2, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="out", show_default=True)
def verify_identities_cmd(lemma, m, n, samples, seed, out):
    """Mechanically verify the commutator identities of one lemma."""
    outdir = _outdir(out)
    reports = identities.verify_lemma(lemma, m, n, samples=samples, seed=seed)
    table = [{
        "identity": r.name, "mode": r.mode, "residual": r.residual,
        "verdict": r.verdict, "detail": r.detail,
    } for r in reports]
    passed = sum(r.passed for r in reports)
    ok = _write_report(outdir, f"identities_{lemma.replace('.', '_')}.json", {
        "inputs": {"lemma": lemma, "m": m, "n": n, "samples": samples,
                   "seed": seed},
        "identities": table,
        "passed": f"{passed}/{len(reports)}",
        "pass": passed == len(reports),
    })
    click.echo(f"lemma {lemma}: {passed}/{len(reports)} identities pass")
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# verify-estimates
# ---------------------------------------------------------------------------

@main.command("verify-estimates")
@click.option("--suite", type=click.Choice(["data", "multiplier", "duhamel",
                                            "linf"]), required=True)
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--out", default="out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def verify_estimates_cmd(suite, m, out, figures):
    """Empirically verify one family of quantitative estimates."""
    outdir = _outdir(out)
    params = TricomiParams(m=m, n=2, T=4.0)
    fits, extra = [], {}
    if suite == "data":
        gen = InitialData("a3", (2.0, 0.5, 1.5, 0.25))
        fits = [analysis.data_decay_check(gen, 2, direction=d)
                for d in ("axis", "axis2", "diagonal")]
        for f in fits:
            f.tolerance = 0.15 if f.expected == -2.0 else 0.1
        a1 = analysis.data_decay_check(InitialData("a1", (1.0,)), 2,
                                       direction="shell")
        a1.tolerance = 0.25
        fits.append(a1)
    elif suite == "multiplier":
        fits = analysis.multiplier_decay_suite(params, 0.0, 0.0) \
            + analysis.multiplier_decay_suite(params, params.a1, params.a2)
    elif suite == "duhamel":
        p2 = 0.8 * semilinear.p2_of(m)
        fits = analysis.duhamel_gain_suite(params, 0.0, p2, nquad=24)
        hi_p1 = min(0.98, 0.98 * semilinear.p1_of(m))
        fits += analysis.duhamel_gain_suite(params, hi_p1, 0.4 *
                                            semilinear.p2_of(m), nquad=24)
    elif suite == "linf":
        rep = analysis.linf_suite(params, InitialData("a3", (1.0, 2.0, 3.0, 4.0)))
        extra = {
            "sup_by_grid": rep.sup_by_grid,
            "relative_changes": rep.relative_changes,
            "uniformly_bounded": rep.uniformly_bounded,
            "pass": rep.uniformly_bounded and (rep.slope_fit is None
                                               or rep.slope_fit.passed),
        }
        if rep.slope_fit is not None:
            fits = [rep.slope_fit]
    rows = []
    for fit in fits:
        for t, v in fit.samples:
            rows.append((fit.quantity, t, v))
    _write_csv(outdir / f"estimates_{suite}.csv", ["quantity", "t", "value"],
               rows)
    _plot_fits(outdir, f"estimates_{suite}", fits, figures)
    verdicts = [_fit_payload(f) for f in fits]
    ok = _write_report(outdir, f"estimates_{suite}.json", {
        "inputs": {"suite": suite, "m": m},
        "verdicts": verdicts,
        **extra,
    })
    for v in verdicts:
        mark = "pass" if v["pass"] else "FAIL"
        click.echo(f"[{mark}] {v['quantity']}: fitted {v['fitted']:+.4f}"
                   f" expected {v['expected_exponent']}")
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# probe-singularity
# ---------------------------------------------------------------------------

@main.command("probe-singularity")
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--c", "c_values", default="1,2,3,4", show_default=True)
@click.option("--t", "t_eval", type=float, default=0.9, show_default=True)
@click.option("--levels", type=int, default=5, show_default=True)
@click.option("--h0", type=float, default=4e-3, show_default=True)
@click.option("--out", default="out", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def probe_singularity_cmd(m, c_values, t_eval, levels, h0, out, figures):
    """Finite-difference probes of the closed-form solution near the
    corner region of the wedge and the sonic circle.

    The scaling field satisfies L0 u = 2u everywhere.  Tangential probes
    (nested central differences along Lbar1, which is tangent to both local
    singular surfaces) stay bounded while the transversal second difference
    taken at points approaching the circle blows up like h^-(1/2+gamma):
    the computable footprint of the failure of C^2 regularity.
    """
    outdir = _outdir(out)
    cs = tuple(float(v) for v in c_values.split(","))
    params = TricomiParams(m=m, n=2, T=max(1.0, 2.0 * t_eval))
    sol = riemann2d.ClosedFormSolution(params, riemann2d.QuadrantData(*cs))
    phi_t = float(sol.geometry.phi(t_eval))
    u_fn = lambda t, x: riemann2d.eval_u(sol, t, x)

    interior = (t_eval, 0.45 * phi_t, 0.3 * phi_t)
    l0u = conormal_probe(u_fn, ["L0"], interior, 1e-3, m, 2)
    u_val = u_fn(interior[0], interior[1:])
    scaling_residual = abs(l0u - 2.0 * u_val)

    hs = [h0 / 2 ** k for k in range(levels)]
    direction = np.array([0.95, 0.31224989991991997])
    direction /= np.linalg.norm(direction)
    transversal, tangential = [], []
    for h in hs:
        xh = tuple((1.0 - 2.0 * h / phi_t) * phi_t * direction)
        second = (u_fn(t_eval, (xh[0] + h, xh[1]))
                  - 2.0 * u_fn(t_eval, xh)
                  + u_fn(t_eval, (xh[0] - h, xh[1]))) / (h * h)
        transversal.append(abs(second))
        tangential.append(abs(conormal_probe(u_fn, ["Lbar1", "Lbar1"],
                                             (t_eval,) + xh, h, m, 2)))
    growth = [transversal[k + 1] / transversal[k] for k in range(levels - 1)]
    tang_span = max(tangential) / max(min(tangential), 1e-300)
    expected_ratio = 2.0 ** (0.5 + params.gamma)
    payload = {
        "inputs": {"m": m, "C": list(cs), "t": t_eval, "levels": levels,
                   "h0": h0},
        "interior_point": list(interior),
        "L0_scaling": {"L0_u": l0u, "2u": 2.0 * u_val,
                       "residual": scaling_residual,
                       "note": "homogeneity gives L0 u = 2u (the source's "
                               "display prints L0 u = 0)",
                       "pass": scaling_residual <= 1e-3 * max(1.0, abs(u_val))},
        "probe": {
            "direction": direction.tolist(),
            "h_sequence": hs,
            "transversal_second_difference": transversal,
            "growth_ratios": growth,
            "expected_growth": expected_ratio,
            "tangential_Lbar1sq": tangential,
            "tangential_bounded": tang_span <= 1.25,
            "pass": all(g >= 1.3 for g in growth) and tang_span <= 1.25,
        },
    }
    if figures:
        fig, ax = plt.subplots(figsize=(5.5, 4))
        ax.loglog(hs, transversal, "o-", label="transversal d1^2 (blow-up)")
        ax.loglog(hs, tangential, "s-", label="tangential Lbar1^2 (bounded)")
        ax.invert_xaxis()
        ax.set_xlabel("step h")
        ax.set_ylabel("probe value")
        ax.legend(fontsize=8)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(outdir / "singularity_probe.png", dpi=130)
        plt.close(fig)
    ok = _write_report(outdir, "singularity_probe.json", payload)
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# config-driven run
# ---------------------------------------------------------------------------

@main.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", default=None, help="override config.out")
@click.option("--figures/--no-figures", default=True, show_default=True)
@click.pass_context
def run_cmd(ctx, config_path, out, figures):
    """Execute the suites selected in a JSON experiment configuration."""
    try:
        cfg = ExperimentConfig.load(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    outdir = _outdir(out or cfg.out)
    (outdir / "config_echo.json").write_text(cfg.dumps())
    if not cfg.suites:
        click.echo("empty suite selection: nothing to do")
        sys.exit(0)
    status = 0
    for suite in cfg.suites:
        click.echo(f"== suite {suite}")
        args = {
            "data": ["verify-estimates", "--suite", "data"],
            "multiplier": ["verify-estimates", "--suite", "multiplier"],
            "duhamel": ["verify-estimates", "--suite", "duhamel"],
            "linf": ["verify-estimates", "--suite", "linf"],
            "identities-4.2": ["verify-identities", "--lemma", "4.2"],
            "identities-4.3": ["verify-identities", "--lemma", "4.3"],
            "identities-4.4": ["verify-identities", "--lemma", "4.4"],
            "identities-4.5": ["verify-identities", "--lemma", "4.5"],
            "riemann2d": ["riemann2d"],
            "singularity": ["probe-singularity"],
            "semilinear": ["solve-semilinear"],
        }.get(suite)
        if args is None:
            raise click.ClickException(f"config.suites: unknown suite {suite!r}")
        args += ["--m", str(cfg.m), "--out", str(outdir / suite)]
        if suite.startswith("identities"):
            args += ["--n", str(cfg.n), "--seed", str(cfg.seed)]
        if not figures and suite not in ("identities-4.2", "identities-4.3",
                                         "identities-4.4", "identities-4.5"):
            args += ["--no-figures"]
        try:
            main(args=args, standalone_mode=False)
        except SystemExit as exc:
            status |= int(exc.code or 0)
    sys.exit(status)


if __name__ == "__main__":
    main()
