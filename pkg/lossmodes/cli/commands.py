"""Analysis commands hosted on the flask command line."""


import functools
import logging

import click
import numpy as np
import pandas as pd
from flask import current_app
from flask.cli import with_appcontext
from scipy.optimize import linear_sum_assignment

from lossmodes.cli.output import write_csv, write_json
from lossmodes.cli.run_config import (RunConfig, parse_beta_grid,
                                      parse_tolerances, parse_vector)
from lossmodes.errors import InvariantViolation, LossModesError
from lossmodes.models.components.enums import ModeFlags
from lossmodes.models.components.tolerances import Tolerances
from lossmodes.models.modes import ModeSet
from lossmodes.models.system import LagrangianSystem, State
from lossmodes.services.asymptotic_service import AsymptoticService
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.dynamics_service import DynamicsService
from lossmodes.services.example_service import ExampleService
from lossmodes.services.linalg import op_norm
from lossmodes.services.pencil_service import PencilService
from lossmodes.services.spectral_service import SpectralService
from lossmodes.services.system_service import SystemService


logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["beta", "mode", "re_zeta", "im_zeta", "q_factor",
                 "overdamped", "branch", "re_predicted", "im_predicted",
                 "abs_error", "q_trend", "overdamped_count", "collision"]


def common_options(f):
    """Options shared by every command."""
    options = [
        click.option("--example", type=click.Choice(ExampleService.EXAMPLES),
                     help="Use a built-in example system."),
        click.option("--input", "input_path", type=click.Path(),
                     help="JSON system definition."),
        click.option("--beta", type=float, help="Override the loss "
                     "parameter."),
        click.option("--beta-grid", help="Loss parameter grid A:B:N[:log]."),
        click.option("--format", "output_format",
                     type=click.Choice(["json", "csv"]), default="json",
                     show_default=True),
        click.option("--out", "output_path", type=click.Path(),
                     help="Output file, standard output when omitted."),
        click.option("--tol", "tol_overrides", multiple=True,
                     metavar="KEY=VAL", help="Tolerance override, e.g. "
                     "overdamped=1e-6."),
        click.option("--seed", type=int, help="Seed of the random example."),
        click.option("--n", type=int, default=3, show_default=True,
                     help="Degrees of freedom of the random example."),
        click.option("--n-r", type=int, default=1, show_default=True,
                     help="Rank of R in the random example."),
        click.option("--gyro", is_flag=True,
                     help="Random example with gyroscopy."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def reports_errors(f):
    """Turn library errors into a message and the error's exit code."""
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except LossModesError as e:
            click.echo(f"Error: {e}", err=True)
            click.get_current_context().exit(e.exit_code)
    return wrapper


@click.command("validate")
@common_options
@with_appcontext
@reports_errors
def validate_command(**options):
    """Check the structural invariants of a system."""
    cfg = _run_config("validate", options)
    sys = cfg.load_system()
    tol = cfg.tolerances
    report = SystemService.validate_system(sys, tol)
    data = {"command": "validate", "system": sys.label, "n": sys.n,
            "beta": sys.beta, **report.as_dict()}
    if report.overall:
        data["loss_fraction"] = SystemService.loss_fraction(sys, tol).as_dict()
        data["nondegenerate"] = SystemService.is_nondegenerate(sys, tol)

    if cfg.output_format == "csv":
        write_csv(pd.DataFrame([c.as_dict() for c in report.checks]),
                  cfg.output_path, {"overall": report.overall})
    else:
        write_json(data, _schema_version(), cfg.output_path)
    if not report.overall:
        click.echo("Validation failed: " + ", ".join(
            check.name for check in report.failed()), err=True)
        click.get_current_context().exit(1)


@click.command("spectrum")
@common_options
@with_appcontext
@reports_errors
def spectrum_command(**options):
    """Eigenmodes of A(beta) with quality factors and classes."""
    cfg = _run_config("spectrum", options)
    sys = cfg.load_system()
    tol = cfg.tolerances
    _require_valid(sys, tol)
    can = CanonicalService.build_canonical(sys, tol)
    ms = SpectralService.modes(can, sys.beta, tol)
    symmetry = SpectralService.check_symmetry(ms, tol)
    summary = _summary(sys, can, tol)
    if not symmetry.passed:
        logger.warning("spectral symmetry check failed: %s",
                       symmetry.as_dict())

    if cfg.output_format == "csv":
        rows = [{"index": k + 1, **m.as_row()} for k, m in enumerate(ms)]
        write_csv(pd.DataFrame(rows), cfg.output_path, summary)
    else:
        write_json({"command": "spectrum", "system": sys.label,
                    "beta": sys.beta,
                    "modes": [{"index": k + 1, **m.as_dict()}
                              for k, m in enumerate(ms)],
                    "dichotomy_holds": ms.dichotomy_holds,
                    "summary": summary, "symmetry": symmetry.as_dict()},
                   _schema_version(), cfg.output_path)


@click.command("sweep")
@common_options
@with_appcontext
@reports_errors
def sweep_command(**options):
    """Tracked eigenvalues over a loss grid against their large-loss
    predictions."""
    cfg = _run_config("sweep", options)
    if cfg.beta_grid is None:
        raise click.BadParameter("the sweep needs a grid",
                                 param_hint="--beta-grid")
    sys = cfg.load_system()
    tol = cfg.tolerances
    _require_valid(sys, tol)
    can = CanonicalService.build_canonical(sys, tol)
    tracked = AsymptoticService.track_modes(can, cfg.beta_grid.values(), tol)
    frame = _sweep_frame(can, tracked, tol)

    collisions = [{"beta": beta, "modes": [j + 1 for j in columns]}
                  for beta, columns in tracked.collisions]
    if collisions:
        click.echo(f"Warning: {len(collisions)} tracking collision(s); "
                   f"affected rows are flagged", err=True)
    if cfg.output_format == "csv":
        write_csv(frame, cfg.output_path, {"warning_count": len(collisions)})
    else:
        write_json({"command": "sweep", "system": sys.label,
                    "columns": SWEEP_COLUMNS,
                    "rows": frame.to_dict(orient="records"),
                    "collisions": collisions,
                    "warning_count": len(collisions)},
                   _schema_version(), cfg.output_path)


@click.command("simulate")
@common_options
@click.option("--q0", help="Initial coordinates, comma separated.")
@click.option("--qdot0", help="Initial velocities, comma separated.")
@click.option("--t", "t_end", type=float, default=10.0, show_default=True,
              help="Duration.")
@click.option("--eigenmode", help="Start on mode j (1-based, in spectrum "
              "order), or on the most (hi) or least (lo) damped mode.")
@click.option("--dt", type=float, default=0.01, show_default=True,
              help="Largest step and sample spacing.")
@with_appcontext
@reports_errors
def simulate_command(q0, qdot0, t_end, eigenmode, dt, **options):
    """Integrate the equations of motion and check the energy balance."""
    cfg = _run_config("simulate", options)
    sys = cfg.load_system()
    tol = cfg.tolerances
    _require_valid(sys, tol)
    beta = sys.beta

    mode = None
    if eigenmode is not None:
        can = CanonicalService.build_canonical(sys, tol)
        ms = SpectralService.modes(can, beta, tol)
        mode = ms[_mode_index(eigenmode, ms)]
        pe = PencilService.canonical_to_pencil(sys, mode.zeta, mode.w, beta,
                                               can, tol)
        initial = DynamicsService.eigenmode_state(pe.zeta, pe.q_vec)
    elif q0 is None and qdot0 is None:
        raise click.BadParameter("give --q0/--qdot0 or --eigenmode",
                                 param_hint="--q0")
    else:
        q = parse_vector(q0, "--q0")
        qdot = parse_vector(qdot0, "--qdot0")
        q = np.zeros(sys.n, dtype=complex) if q is None else q
        qdot = np.zeros(sys.n, dtype=complex) if qdot is None else qdot
        initial = State(q, qdot)

    traj = DynamicsService.integrate(
        sys, beta, initial, t_end, dt, tol=tol,
        max_steps=int(current_app.config["MAX_INTEGRATION_STEPS"]))
    residual = DynamicsService.energy_balance_residual(sys, traj)
    frame = traj.to_frame()

    if cfg.output_format == "csv":
        write_csv(frame, cfg.output_path,
                  {"energy_balance_max_residual": f"{residual:.6e}"})
    else:
        data = {"command": "simulate", "system": sys.label, "beta": beta,
                "t_end": t_end, "dt": dt,
                "energy_balance_max_residual": residual,
                "trajectory": frame.to_dict(orient="list")}
        if mode is not None:
            data["eigenmode"] = {"zeta": mode.zeta,
                                 "q_factor": mode.q_factor}
        write_json(data, _schema_version(), cfg.output_path)


@click.command("classify")
@common_options
@with_appcontext
@reports_errors
def classify_command(**options):
    """Overdamping regime, counts and checked claims (theta = 0)."""
    cfg = _run_config("classify", options)
    sys = cfg.load_system()
    tol = cfg.tolerances
    _require_valid(sys, tol)
    can = CanonicalService.build_canonical(sys, tol)
    report = AsymptoticService.classify_overdamping(sys, can, sys.beta, tol)
    for warning in report.warnings:
        click.echo(f"Warning: {warning}", err=True)

    if cfg.output_format == "csv":
        footer = {"regime": report.regime, "kappa": report.kappa,
                  "claims_hold": report.claims_hold}
        rows = [{key: value for key, value in m.items() if key != "zeta"}
                | {"re_zeta": m["zeta"].real, "im_zeta": m["zeta"].imag}
                for m in report.modes]
        write_csv(pd.DataFrame(rows), cfg.output_path, footer)
    else:
        write_json({"command": "classify", "system": sys.label,
                    **report.as_dict()}, _schema_version(), cfg.output_path)
    if not report.claims_hold:
        click.echo("Claims failed: " + ", ".join(
            claim.name for claim in report.claims
            if claim.applicable and claim.holds is False), err=True)
        click.get_current_context().exit(1)


COMMANDS = (validate_command, spectrum_command, sweep_command,
            simulate_command, classify_command)


def _run_config(command: str, options: dict) -> RunConfig:
    example, input_path = options["example"], options["input_path"]
    if (example is None) == (input_path is None):
        raise click.BadParameter("give exactly one of --example and --input",
                                 param_hint="--example")
    return RunConfig(
        command=command,
        source=example if example is not None else input_path,
        from_example=example is not None,
        beta=options["beta"],
        beta_grid=parse_beta_grid(options["beta_grid"]),
        output_format=options["output_format"],
        output_path=options["output_path"],
        tolerances=parse_tolerances(current_app.config,
                                    options["tol_overrides"]),
        seed=options["seed"], n=options["n"], n_r=options["n_r"],
        gyro=options["gyro"])


def _schema_version() -> str:
    return str(current_app.config["SCHEMA_VERSION"])


def _require_valid(sys: LagrangianSystem, tol: Tolerances) -> None:
    report = SystemService.validate_system(sys, tol)
    if not report.overall:
        raise InvariantViolation("invalid system: " + ", ".join(
            check.name for check in report.failed()))


def _summary(sys, can, tol) -> dict:
    """omega_max, b_min and beta_star (theta = 0 only) with delta_R."""
    summary = {"omega_max": None, "b_min": None, "beta_star": None,
               "delta_r": str(SystemService.loss_fraction(sys, tol).delta_r)}
    if not sys.is_gyroscopic:
        thr = AsymptoticService.thresholds(sys, can, tol)
        summary.update(omega_max=thr.omega_max, b_min=thr.b_min,
                       beta_star=thr.beta_star)
    return summary


def _mode_index(selector: str, ms: ModeSet) -> int:
    """0-based index of a ``--eigenmode`` selector."""
    match selector:
        case "hi":
            return 0
        case "lo":
            return len(ms) - 1
    try:
        index = int(selector)
    except ValueError:
        index = 0
    if not 1 <= index <= len(ms):
        raise click.BadParameter(f"expected hi, lo or 1..{len(ms)}, got "
                                 f"{selector!r}", param_hint="--eigenmode")
    return index - 1


def _sweep_frame(can, tracked, tol) -> pd.DataFrame:
    """Long-format sweep table, one row per (beta, tracked mode).

    Predictions are assigned to tracked columns once, at the largest loss
    parameter of the grid.
    """
    asym = AsymptoticService.asymptotic_spectrum(can, tol)
    betas = tracked.betas
    last = int(np.argmax(betas))
    predicted_last = np.array(AsymptoticService.predict_eigenvalues(
        asym, betas[last]))
    cost = np.abs(predicted_last[:, None] - tracked.zetas[last][None, :])
    rows, cols = linear_sum_assignment(cost)
    prediction_of = {int(j): int(k) for k, j in zip(rows, cols)}

    records = []
    for i, beta in enumerate(betas):
        zetas = tracked.zetas[i]
        scale = op_norm(CanonicalService.system_operator(can, beta))
        predicted = AsymptoticService.predict_eigenvalues(asym, beta) \
            if beta > 0.0 else None
        trends = AsymptoticService.predict_q_factors(asym, beta) \
            if beta > 0.0 else None
        flagged = tracked.flagged(i)
        flags = [SpectralService.mode_flags(complex(z), scale, tol)
                 for z in zetas]
        overdamped_count = sum(bool(f & ModeFlags.overdamped) for f in flags)
        for j, zeta in enumerate(zetas):
            zeta = complex(zeta)
            if flags[j] & ModeFlags.overdamped:
                q_factor = 0.0
            elif flags[j] & ModeFlags.lossless:
                q_factor = float("inf")
            else:
                q_factor = SpectralService.quality_factor(zeta, tol, scale)
            k = prediction_of[j]
            guess = predicted[k] if predicted is not None else complex("nan")
            records.append({
                "beta": float(beta), "mode": j + 1,
                "re_zeta": zeta.real, "im_zeta": zeta.imag,
                "q_factor": q_factor,
                "overdamped": bool(flags[j] & ModeFlags.overdamped),
                "branch": "high-loss" if k < asym.n_r else "low-loss",
                "re_predicted": guess.real, "im_predicted": guess.imag,
                "abs_error": abs(zeta - guess),
                "q_trend": str(trends[k].trend) if trends else None,
                "overdamped_count": overdamped_count,
                "collision": j in flagged})
    return pd.DataFrame(records, columns=SWEEP_COLUMNS)
