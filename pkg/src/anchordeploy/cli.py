"""Command-line interface.

Angles are degrees on the command line and radians everywhere else.  Every
command writes one table (CSV with a header row, or a JSON list of records
with the same fields) to stdout or ``--out``.  Exit codes: 0 success, 1
input or domain error, 2 internal invariant violation.

``--ssp`` accepts a file path, ``builtin:NAME`` (ssp1, ssp2, experiment) or
``iso:SPEED`` for a constant-speed ocean.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys

import click
import numpy as np

from . import __version__, kernels
from .errors import AnchorDeployError, DomainError, InvariantViolation, ProfileError
from .localizer import LocalizerConfig
from .montecarlo import (
    CSV_FIELDS,
    TrialConfig,
    random_azimuth_trials,
    run_trials,
    sweep_alpha,
    sweep_node_count,
)
from .noise import los_variance_approx
from .optimize import (
    azimuth_layout,
    geometry_from_alpha,
    optimal_deployment,
    solve_optimal_alpha,
    trace_bound_at,
    valid_alpha_range,
)
from .raytrace import elevation_angle, min_grazing_angle, ray_totals
from .ssp import builtin_profile, iso_profile, load_profile_file, standardize

OPTIMAL_FIELDS = ("alpha_star_deg", "radius_m", "betas_deg", "trace_bound", "p_residual", "depth_m", "nodes", "gamma")
SWEEP_FIELDS = ("variable", "tr_bound", "sigma2")
SWEEP_MC_FIELDS = SWEEP_FIELDS + ("mean_error", "failures")
RATIO_FIELDS = ("theta0_deg", "alpha_deg", "ratio")
LAYOUT_FIELDS = ("node", "x_m", "y_m", "z_m", "alpha_deg", "beta_deg")
TRACE_FIELDS = ("theta0_deg", "h_m", "L_m", "t_s", "alpha_deg")
PROFILE_FIELDS = ("depth_m", "speed_mps")


def resolve_profile(spec: str):
    """Standardized profile from a path, ``builtin:NAME`` or ``iso:SPEED``."""
    if spec.startswith("builtin:"):
        raw = builtin_profile(spec.split(":", 1)[1])
    elif spec.startswith("iso:"):
        try:
            speed = float(spec.split(":", 1)[1])
        except ValueError:
            raise ProfileError(f"bad iso-speed profile spec {spec!r}") from None
        raw = iso_profile(speed)
    else:
        raw = load_profile_file(spec)
    return standardize(raw)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def render(rows, fields, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: r[k] for k in fields} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in fields])
    return buf.getvalue()


def emit(ctx, rows, fields):
    text = render(rows, fields, ctx.obj["format"])
    out = ctx.obj["out"]
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _ensure(cond, msg):
    if not cond:
        raise InvariantViolation(msg)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise DomainError(f"could not parse number list {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise DomainError(f"could not parse integer list {text!r}") from None


def _range(lo: float, hi: float, step: float) -> list[float]:
    if not (step > 0) or hi < lo:
        raise DomainError(f"invalid range [{lo}, {hi}] step {step}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 10) for k in range(n)]


def _angles(alphas, alpha_min, alpha_max, alpha_step) -> list[float]:
    vals = _float_list(alphas) if alphas is not None else _range(alpha_min, alpha_max, alpha_step)
    if not vals:
        raise DomainError("empty angle list")
    return vals


def _alpha_or_opt(profile, depth, alpha_deg):
    if alpha_deg is None:
        return solve_optimal_alpha(profile, depth)[0]
    return math.radians(alpha_deg)


def _anchor(depth):
    return np.array([0.0, 0.0, float(depth)])


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="anchordeploy")
@click.option("--ssp", "ssp_spec", default="builtin:ssp1", show_default=True,
              help="Profile file, builtin:NAME or iso:SPEED.")
@click.option("--depth", type=float, default=2500.0, show_default=True, help="Anchor depth (m).")
@click.option("--nodes", "-J", type=int, default=5, show_default=True, help="Reference node count.")
@click.option("--gamma", type=float, default=0.01, show_default=True, help="Per-layer relative noise.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the table here.")
@click.pass_context
def cli(ctx, ssp_spec, depth, nodes, gamma, seed, fmt, out):
    """Anchor deployment: ray tracing, CRLB geometry and localization trials."""
    ctx.ensure_object(dict)
    ctx.obj.update(ssp=ssp_spec, depth=depth, nodes=nodes, gamma=gamma, seed=seed, format=fmt, out=out)


def _profile(ctx):
    if "profile" not in ctx.obj:
        ctx.obj["profile"] = resolve_profile(ctx.obj["ssp"])
    return ctx.obj["profile"]


@cli.command()
@click.option("--step", type=float, default=100.0, show_default=True, help="Depth spacing of the listing (m).")
@click.pass_context
def profile(ctx, step):
    """List the standardized profile.  Columns: depth_m, speed_mps."""
    p = _profile(ctx)
    depths = _range(0.0, p.max_depth, step)
    emit(ctx, [{"depth_m": d, "speed_mps": p.speed_at(d)} for d in depths], PROFILE_FIELDS)


@cli.command()
@click.option("--theta0", "theta_list", required=True, help="Launch grazing angles (deg), comma separated.")
@click.pass_context
def trace(ctx, theta_list):
    """Trace rays to the anchor depth.  Columns: theta0_deg, h_m, L_m, t_s, alpha_deg."""
    p, depth = _profile(ctx), ctx.obj["depth"]
    rows = []
    for th in _float_list(theta_list):
        h, L, t = ray_totals(p, math.radians(th), depth)
        rows.append({"theta0_deg": th, "h_m": h, "L_m": L, "t_s": t,
                     "alpha_deg": math.degrees(elevation_angle(depth, h))})
    emit(ctx, rows, TRACE_FIELDS)


@cli.command()
@click.option("--beta0", type=float, default=0.0, show_default=True, help="Azimuth offset (deg).")
@click.pass_context
def optimal(ctx, beta0):
    """Optimal common elevation and ring layout.

    Columns: alpha_star_deg, radius_m, betas_deg, trace_bound, p_residual,
    depth_m, nodes, gamma.
    """
    p, o = _profile(ctx), ctx.obj
    dep = optimal_deployment(p, o["depth"], o["nodes"], o["gamma"], math.radians(beta0))
    lo, hi = valid_alpha_range(p, o["depth"])
    _ensure(lo < dep.alpha_star < hi, "optimum outside the valid cone")
    _ensure(math.isfinite(dep.trace_at_optimum) and dep.trace_at_optimum > 0, "non-positive bound at optimum")
    row = {
        "alpha_star_deg": dep.alpha_star_deg,
        "radius_m": dep.radius,
        "betas_deg": [math.degrees(b) for b in dep.betas],
        "trace_bound": dep.trace_at_optimum,
        "p_residual": dep.p_alpha_residual,
        "depth_m": o["depth"],
        "nodes": o["nodes"],
        "gamma": o["gamma"],
    }
    emit(ctx, [row], OPTIMAL_FIELDS)


@cli.command()
@click.option("--alpha", "alpha_deg", type=float, default=None, help="Elevation (deg); default the optimum.")
@click.option("--beta0", type=float, default=0.0, show_default=True, help="Azimuth offset (deg).")
@click.pass_context
def layout(ctx, alpha_deg, beta0):
    """Reference node positions on the uniform ring.

    Columns: node, x_m, y_m, z_m, alpha_deg, beta_deg.
    """
    p, o = _profile(ctx), ctx.obj
    alpha = _alpha_or_opt(p, o["depth"], alpha_deg)
    g = geometry_from_alpha(_anchor(o["depth"]), alpha, azimuth_layout(o["nodes"], math.radians(beta0)))
    rows = [
        {"node": j + 1, "x_m": float(r[0]), "y_m": float(r[1]), "z_m": float(r[2]),
         "alpha_deg": math.degrees(a), "beta_deg": math.degrees(b)}
        for j, (r, a, b) in enumerate(zip(g.refs, g.alpha, g.beta))
    ]
    emit(ctx, rows, LAYOUT_FIELDS)


@cli.command()
@click.option("--variable", type=click.Choice(["alpha", "J"]), default="alpha", show_default=True)
@click.option("--alphas", default=None, help="Explicit elevation list (deg); overrides the range.")
@click.option("--alpha-min", type=float, default=5.0, show_default=True)
@click.option("--alpha-max", type=float, default=85.0, show_default=True)
@click.option("--alpha-step", type=float, default=1.0, show_default=True)
@click.option("--j-list", default="3,4,5,6,7,8,9,10", show_default=True)
@click.option("--alpha", "alpha_deg", type=float, default=None, help="Elevation for the J sweep (deg).")
@click.option("--trials", type=int, default=0, show_default=True, help="Add a Monte Carlo mean error column.")
@click.pass_context
def sweep(ctx, variable, alphas, alpha_min, alpha_max, alpha_step, j_list, alpha_deg, trials):
    """Closed-form trace bound versus elevation or node count.

    Columns: variable, tr_bound, sigma2 (and mean_error, failures with --trials).
    """
    p, o = _profile(ctx), ctx.obj
    depth, J, gamma = o["depth"], o["nodes"], o["gamma"]
    if variable == "alpha":
        points = [(a, J, math.radians(a)) for a in _angles(alphas, alpha_min, alpha_max, alpha_step)]
    else:
        a = _alpha_or_opt(p, depth, alpha_deg)
        Js = _int_list(j_list)
        if not Js:
            raise DomainError("empty node-count list")
        points = [(j, j, a) for j in Js]
    rows = []
    for var, nj, a in points:
        s2 = los_variance_approx(p, gamma, a, depth)
        tr = trace_bound_at(p, a, nj, gamma, depth)
        _ensure(tr > 0 or gamma == 0, "non-positive trace bound")
        row = {"variable": var, "tr_bound": tr, "sigma2": s2}
        if trials > 0:
            g = geometry_from_alpha(_anchor(depth), a, azimuth_layout(nj))
            st = run_trials(TrialConfig(p, g, gamma, trials=trials, seed=o["seed"]))
            row.update(mean_error=st.mean, failures=st.failures)
        rows.append(row)
    emit(ctx, rows, SWEEP_MC_FIELDS if trials > 0 else SWEEP_FIELDS)


@cli.command()
@click.option("--mode", type=click.Choice(["alpha", "nodes", "random"]), default="alpha", show_default=True)
@click.option("--alphas", default="12.5,46.5,88.5", show_default=True, help="Elevations (deg) for mode alpha.")
@click.option("--alpha", "alpha_deg", type=float, default=46.5, show_default=True,
              help="Fixed elevation (deg) for modes nodes and random.")
@click.option("--j-list", default="3,4,5,6,7,8,9,10", show_default=True)
@click.option("--trials", type=int, default=50, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.pass_context
def simulate(ctx, mode, alphas, alpha_deg, j_list, trials, workers):
    """Monte Carlo localization trials.

    Columns: variable, mean, std, min, max, failures (errors in m).
    """
    p, o = _profile(ctx), ctx.obj
    depth = o["depth"]
    g = geometry_from_alpha(_anchor(depth), math.radians(alpha_deg), azimuth_layout(max(o["nodes"], 3)))
    cfg = TrialConfig(p, g, o["gamma"], trials=trials, seed=o["seed"],
                      localizer=LocalizerConfig(start_depth=depth + 5.0), workers=workers)
    if mode == "alpha":
        degs = _float_list(alphas)
        if not degs:
            raise DomainError("empty angle list")
        out = sweep_alpha(cfg, [math.radians(a) for a in degs])
        rows = [st.row(d) for d, (_, st) in zip(degs, out)]
    elif mode == "nodes":
        rows = [st.row(J) for J, st in sweep_node_count(cfg, _int_list(j_list), math.radians(alpha_deg))]
    else:
        rows = [st.row(J) for J, st in random_azimuth_trials(cfg, _int_list(j_list), math.radians(alpha_deg))]
    for r in rows:
        _ensure(r["failures"] <= trials, "failure count exceeds trial count")
    emit(ctx, rows, CSV_FIELDS)


@cli.command("ratio-check")
@click.option("--theta-min", type=float, default=None, help="Smallest launch angle (deg); default just above the turning limit.")
@click.option("--theta-max", type=float, default=89.5, show_default=True)
@click.option("--theta-step", type=float, default=0.5, show_default=True)
@click.pass_context
def ratio_check(ctx, theta_min, theta_max, theta_step):
    """Launch angle versus straight-line elevation.

    Columns: theta0_deg, alpha_deg, ratio (= cos^2 theta0 / cos^2 alpha).
    """
    p, depth = _profile(ctx), ctx.obj["depth"]
    lo = math.degrees(min_grazing_angle(p, depth))
    if theta_min is None:
        theta_min = math.floor(lo / theta_step + 1) * theta_step
    rows = []
    for th in _range(theta_min, theta_max, theta_step):
        h, _, _ = ray_totals(p, math.radians(th), depth)
        a = elevation_angle(depth, h)
        rows.append({"theta0_deg": th, "alpha_deg": math.degrees(a),
                     "ratio": math.cos(math.radians(th)) ** 2 / math.cos(a) ** 2})
    emit(ctx, rows, RATIO_FIELDS)


@cli.command()
@click.pass_context
def info(ctx):
    """Kernel backend and version."""
    click.echo(f"anchordeploy {__version__} backend={kernels.BACKEND}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="anchordeploy", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except InvariantViolation as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 2
    except AnchorDeployError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
