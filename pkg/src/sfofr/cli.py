import json as json_lib
import logging
import sys
from importlib.metadata import version
from pathlib import Path

import attrs
import click
import numpy as np
import pandas as pd

from . import storage
from .basis import make_basis
from .config import configure_logging, load_config, with_overrides
from .errors import SchemaError, SfofrError, StorageError
from .estimator import fit as fit_model
from .inference import bootstrap_ci, cpd, interval_score
from .schemas import EstimatorSettings, FunctionalSample, RunConfig
from .simulate import monte_carlo, rmse_r2, simulate_dataset
from .spatial import knn_bisquare_weights, moran_curve
from .utils import spawn_rng

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = "sfofr-out"
FIT_INPUTS = ("y_centered.csv", "x_centered.csv", "w.csv", "theta.json")


class SfofrCommand(click.Command):
    """Custom command class that adds the shared options and maps errors to exit codes."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.params.extend(
            [
                click.Option(
                    ["--config", "config_path"],
                    type=click.Path(dir_okay=False),
                    help="Run config (TOML); defaults to $SFOFR_CONFIG",
                ),
                click.Option(["--seed"], type=int, help="Random seed (overrides config)"),
                click.Option(
                    ["--jobs"], type=int, help="Worker threads (<= 0 uses every core)"
                ),
                click.Option(["--log-level"], help="Log level (overrides $SFOFR_LOG)"),
                click.Option(
                    ["--json"], is_flag=True, help="Output the summary in JSON format"
                ),
            ]
        )

    def invoke(self, ctx):
        """Load the run config, then run the command translating package errors."""
        try:
            configure_logging(ctx.params.pop("log_level"))
            run_config = load_config(ctx.params.pop("config_path"))
            ctx.params["run_config"] = with_overrides(
                run_config,
                seed=ctx.params.pop("seed"),
                jobs=ctx.params.pop("jobs"),
                out_dir=ctx.params.pop("out_dir", None),
            )
            return super().invoke(ctx)
        except SfofrError as e:
            _handle_error(e)


def _handle_error(e: SfofrError):
    """Report a package error and exit with its code."""
    click.echo(f"{type(e).__name__}: {e}", err=True)
    sys.exit(e.exit_code)


def _output_result(data, json_output: bool):
    """Output a summary either as JSON or as readable text."""
    if json_output:
        click.echo(json_lib.dumps(_to_jsonable(data), indent=2, default=str))
        return
    for key, value in data.items():
        click.echo(f"{key}: {value}")


def _to_jsonable(obj):
    """Convert attrs objects and numpy values for JSON serialization."""
    if attrs.has(obj):
        return _to_jsonable(attrs.asdict(obj))
    if isinstance(obj, dict):
        return {key: _to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _out_dir(run_config: RunConfig) -> Path:
    return storage.ensure_dir(run_config.out_dir or DEFAULT_OUT_DIR)


def _load_weights(weights_path, coords_path, run_config: RunConfig, n: int):
    if (weights_path is None) == (coords_path is None):
        raise click.UsageError("Give exactly one of --weights or --coords")
    if weights_path is not None:
        weights = storage.read_weights(weights_path)
    else:
        weights = knn_bisquare_weights(
            storage.read_coords(coords_path),
            h=run_config.neighbors,
            distance=run_config.distance,
        )
    if weights.size != n:
        raise SchemaError(
            f"Weights describe {weights.size} units but the curves have {n}",
            path=str(weights_path or coords_path),
        )
    return weights


out_dir_option = click.option(
    "--out-dir",
    type=click.Path(file_okay=False),
    help=f"Output directory (default: config io.out_dir or ./{DEFAULT_OUT_DIR})",
)
weights_option = click.option(
    "--weights", "weights_path", type=click.Path(dir_okay=False), help="n x n weight matrix CSV"
)
coords_option = click.option(
    "--coords", "coords_path", type=click.Path(dir_okay=False), help="station,lon,lat CSV"
)


@click.command(cls=SfofrCommand)
@out_dir_option
def simulate(run_config, json):
    """Generate one training dataset from the simulation design."""
    sim = run_config.simulation
    data = simulate_dataset(sim, spawn_rng(sim.seed), include_test=False)
    out = _out_dir(run_config)
    points = data.grid.points
    storage.write_curves(out / "y.csv", data.train_y)
    storage.write_curves(out / "x.csv", data.train_x)
    storage.write_weights(out / "w.csv", data.train_w)
    storage.write_surface(out / "beta_true.csv", data.beta_true, points, points)
    storage.write_surface(out / "rho_true.csv", data.rho_true, points, points)
    _output_result(
        {
            "out_dir": str(out),
            "units": sim.n_train,
            "grid_size": sim.grid_size,
            "eta": sim.eta,
            "seed": sim.seed,
        },
        json,
    )


def _centered(sample: FunctionalSample, center: bool) -> FunctionalSample:
    return sample.centered() if center else sample


@click.command(cls=SfofrCommand)
@click.argument("y_path", type=click.Path(dir_okay=False))
@click.argument("x_path", type=click.Path(dir_okay=False))
@weights_option
@coords_option
@click.option("--no-center", is_flag=True, help="Keep curves as given (no mean-curve removal)")
@out_dir_option
def fit(y_path, x_path, weights_path, coords_path, no_center, run_config, json):
    """Fit the model to response and predictor curves."""
    response = _centered(storage.read_curves(y_path), not no_center)
    predictor = _centered(storage.read_curves(x_path), not no_center)
    if predictor.num_curves != response.num_curves:
        raise SchemaError(
            f"Y has {response.num_curves} curves but X has {predictor.num_curves}",
            path=str(x_path),
        )
    weights = _load_weights(weights_path, coords_path, run_config, response.num_curves)

    grid = run_config.lambda_grid()
    if run_config.fixed_lambdas is None and run_config.grid is None:
        logger.info(f"No lambda grid configured; searching the default {grid}")
    result = fit_model(
        response,
        predictor,
        weights,
        run_config.estimator,
        grid=grid,
        jobs=run_config.jobs,
    )
    rmse, r2 = rmse_r2(result.fitted, response)

    out = _out_dir(run_config)
    t_points, s_points = response.grid.axis, predictor.grid.axis
    storage.write_surface(out / "beta_surface.csv", result.beta_surface, t_points, s_points)
    storage.write_surface(out / "rho_surface.csv", result.rho_surface, t_points, t_points)
    storage.write_curves(out / "fitted.csv", result.fitted)
    storage.write_curves(out / "residuals.csv", result.residuals)
    storage.write_curves(out / "y_centered.csv", response)
    storage.write_curves(out / "x_centered.csv", predictor)
    storage.write_weights(out / "w.csv", weights)
    summary = {
        "schema_version": 1,
        "lambdas": {"rho": result.lambdas[0], "beta": result.lambdas[1]},
        "bic": result.bic,
        "edf": result.edf,
        "loglik": result.loglik,
        "sigma2_hat": result.sigma2_hat,
        "rmse": rmse,
        "r2": r2,
        "rho_sup": result.rho_sup,
        "contraction_ok": result.contraction_ok,
        "centered": not no_center,
        "settings": attrs.asdict(result.settings),
        "rho_coeffs": result.theta.rho_coeffs.tolist(),
        "beta_coeffs": result.theta.beta_coeffs.tolist(),
    }
    storage.write_json(out / "theta.json", summary)

    if json:
        _output_result(summary, True)
    else:
        click.echo(str(result))
        click.echo(f"  In-sample RMSE: {rmse:.4f}%, R^2: {r2:.4f}")
        click.echo(f"  Artifacts written to {out}")


@click.command(cls=SfofrCommand)
@click.argument("fit_dir", type=click.Path(file_okay=False))
@click.option("--replicates", "-B", type=int, help="Bootstrap replicates (default: config, 199)")
@click.option("--alpha", type=float, help="Band level is 1 - alpha (default: config, 0.05)")
@click.option("--truth-beta", type=click.Path(dir_okay=False), help="True beta surface CSV")
@click.option("--truth-rho", type=click.Path(dir_okay=False), help="True rho surface CSV")
@out_dir_option
def bootstrap(fit_dir, replicates, alpha, truth_beta, truth_rho, run_config, json):
    """Residual-bootstrap bands for a fit written by `sfofr fit`."""
    fit_dir = Path(fit_dir)
    missing = [name for name in FIT_INPUTS if not (fit_dir / name).exists()]
    if missing:
        raise StorageError(
            f"Missing fit artifact(s): {', '.join(missing)}",
            path=str(fit_dir),
            details="run `sfofr fit` first",
        )
    saved = storage.read_json(fit_dir / "theta.json")
    settings = EstimatorSettings(**saved["settings"])
    lambdas = (saved["lambdas"]["rho"], saved["lambdas"]["beta"])
    response = storage.read_curves(fit_dir / "y_centered.csv")
    predictor = storage.read_curves(fit_dir / "x_centered.csv")
    weights = storage.read_weights(fit_dir / "w.csv")

    result = fit_model(response, predictor, weights, settings, lambdas=lambdas)
    bands = bootstrap_ci(
        result,
        response,
        predictor,
        weights,
        B=replicates or run_config.bootstrap_replicates,
        alpha=alpha if alpha is not None else run_config.alpha,
        seed=run_config.seed,
        jobs=run_config.jobs,
    )

    out = storage.ensure_dir(run_config.out_dir or fit_dir)
    t_points, s_points = response.grid.axis, predictor.grid.axis
    storage.write_surface(out / "lower_beta.csv", bands.lower_beta, t_points, s_points)
    storage.write_surface(out / "upper_beta.csv", bands.upper_beta, t_points, s_points)
    storage.write_surface(out / "lower_rho.csv", bands.lower_rho, t_points, t_points)
    storage.write_surface(out / "upper_rho.csv", bands.upper_rho, t_points, t_points)

    summary = {
        "alpha": bands.alpha,
        "replicates": bands.B,
        "failed": bands.failed,
        "degenerate": bands.is_degenerate,
    }
    for which, path in (("beta", truth_beta), ("rho", truth_rho)):
        if path is None:
            continue
        truth, _, _ = storage.read_surface(path)
        summary[which] = {
            "cpd": cpd(truth, bands, which),
            "score": interval_score(truth, bands, which),
        }
    if truth_beta or truth_rho:
        storage.write_json(out / "coverage.json", summary)
    _output_result(summary, json)


@click.command(cls=SfofrCommand)
@click.option("--replications", type=int, help="Replications (overrides config)")
@click.option("--no-bootstrap", is_flag=True, help="Skip bootstrap bands (no CPD/score)")
@out_dir_option
def bench(replications, no_bootstrap, run_config, json):
    """Run the Monte Carlo experiment and write metric tables."""
    sim = run_config.simulation
    if replications is not None:
        sim = attrs.evolve(sim, replications=replications)
    table = monte_carlo(
        sim,
        run_config.estimator,
        run_config.lambda_grid(),
        bootstrap_replicates=0 if no_bootstrap else run_config.bootstrap_replicates,
        alpha=run_config.alpha,
        jobs=run_config.jobs,
    )

    out = _out_dir(run_config)
    storage.write_frame(out / "metrics.csv", table.to_frame())
    storage.write_frame(out / "summary.csv", table.summary_frame())
    storage.write_json(
        out / "summary.json",
        {
            "replications": table.replications,
            "failed": table.failures,
            "mean": table.means(),
            "se": table.standard_errors(),
        },
    )
    # Timings stay out of the metric files so those are reproducible byte for byte.
    timings = table.timings()
    storage.write_frame(out / "timings.csv", timings)
    storage.write_json(
        out / "timings.json",
        {
            "note": "wall-clock seconds per replication; depends on hardware and --jobs",
            "mean_seconds": float(timings["seconds"].mean()) if len(timings) else None,
            "jobs": run_config.jobs,
        },
    )
    if json:
        _output_result({"mean": table.means(), "se": table.standard_errors()}, True)
    else:
        click.echo(str(table))


@click.command(cls=SfofrCommand)
@click.argument("y_path", type=click.Path(dir_okay=False))
@weights_option
@coords_option
@click.option("--center", is_flag=True, help="Remove the mean curve before smoothing")
@out_dir_option
def moran(y_path, weights_path, coords_path, center, run_config, json):
    """Functional Moran's I curve of the response."""
    response = _centered(storage.read_curves(y_path), center)
    weights = _load_weights(weights_path, coords_path, run_config, response.num_curves)
    basis = make_basis(run_config.moran_num_funcs, run_config.estimator.degree)
    values = moran_curve(response, basis, weights, response.grid.points)

    out = _out_dir(run_config)
    storage.write_frame(
        out / "moran.csv", pd.DataFrame({"t": response.grid.axis, "I": values})
    )
    _output_result(
        {
            "min": float(values.min()),
            "max": float(values.max()),
            "mean": float(values.mean()),
            "file": str(out / "moran.csv"),
        },
        json,
    )


@click.command()
def version_cmd():
    """Show version information."""
    click.echo(version("sfofr"))


@click.group()
def cli():
    """Penalized spatial function-on-function regression."""
    pass


cli.add_command(simulate)
cli.add_command(fit)
cli.add_command(bootstrap)
cli.add_command(bench)
cli.add_command(moran)
cli.add_command(version_cmd, name="version")


def main():
    """Main entry point for the CLI."""
    cli()


if __name__ == "__main__":  # allow direct execution for tests
    main()
