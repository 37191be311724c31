#!/usr/bin/env python3
import os
import sys
import time
import traceback
from typing import Dict, List, Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError
from termcolor import colored
from tqdm import tqdm as pb

from src.api_types import (
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    ConfigError,
    FatalTaskError,
    RunReport,
    SolverError,
)
from src.datasets import Dataset, read_column_deltas, read_dataset, write_boxes, write_dataset
from src.debug_log import configure_debug_log, print_to_debug_log
from src.elm import ElmConfig, fit_elm, init_random, mse
from src.figures import plot_reachable_boxes
from src.interval_core import Activation
from src.model_file import ModelFile, ModelMeta, load_model, save_model
from src.reach import ShallowNet, UncertainDataset, output_radius, reach_boxes
from src.robotarm import ArmGeometry, Zone, sample_dataset
from src.robust import RobustTrainConfig, train_robust
from src.sdp import SolverOptions
from src.settings import Settings, load_settings

METHODS = ("elm", "robust")


class ExitCodeGroup(click.Group):
    """Maps errors raised by commands onto the documented process exit codes."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            rv = super().main(*args, **kwargs)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        except click.UsageError as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except FatalTaskError as exc:
            print_to_debug_log(f"cli -- {type(exc).__name__}: {exc}", color="red")
            print_to_debug_log(traceback.format_exc())
            click.echo(colored(f"Error: {exc}", "red"), err=True)
            if isinstance(exc, SolverError):
                for key, value in (exc.cause.get("solver_report") or {}).items():
                    click.echo(f"  {key}={value}", err=True)
            for line in (exc.cause or {}).get("errors", []) or []:
                click.echo(f"  {line}", err=True)
            sys.exit(exc.status)
        except OSError as exc:
            print_to_debug_log(f"cli -- I/O error: {exc}", color="red")
            click.echo(colored(f"Error: {exc}", "red"), err=True)
            sys.exit(EXIT_IO)
        except Exception as exc:
            print_to_debug_log(f"cli -- unexpected error: {exc}", color="red")
            print_to_debug_log("Traceback:", color="red")
            print_to_debug_log(traceback.format_exc())
            click.echo(colored(f"Error: {exc}", "red"), err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


def _validated(model_cls, **kwargs):
    try:
        return model_cls(**kwargs)
    except ValidationError as exc:
        errors: List[str] = []
        for err in exc.errors():
            loc = err.get("loc", ["field"])[0]
            msg = err.get("msg", "")
            errors.append(f"{loc}: {msg}")
        raise ConfigError(f"Invalid {model_cls.__name__}", errors)


def _solver_options(settings: Settings) -> SolverOptions:
    return _validated(
        SolverOptions,
        tol_gap=settings.tol_gap,
        tol_feas=settings.tol_feas,
        max_iters=settings.max_iters,
        step_fraction=settings.step_fraction,
    )


def _deltas(delta: float, delta_file: Optional[str], n0: int):
    if delta_file is None:
        return delta
    with open(delta_file, "r") as fl:
        return read_column_deltas(fl, n0)


def _delta_meta(deltas) -> List[float]:
    return [float(v) for v in np.atleast_1d(deltas)]


def train_method(
    method: str,
    data: Dataset,
    deltas,
    *,
    hidden: int,
    seed: int,
    activation: str,
    shared_lambda: bool,
    lambda_floor: float,
    ridge: float,
    settings: Settings,
) -> Tuple[ModelFile, RunReport]:
    elm_cfg = _validated(ElmConfig, n_hidden=hidden, activation=activation, seed=seed, ridge=ridge)
    uncertain = UncertainDataset.uniform(data.U, data.Y, deltas)
    config: Dict[str, object] = {
        "n": len(data),
        "hidden": hidden,
        "seed": seed,
        "activation": elm_cfg.activation.value,
        "delta": " ".join(f"{v:.6g}" for v in _delta_meta(deltas)),
    }

    print_to_debug_log(f"train -- starting method '{method}' on {len(data)} samples", color="blue")
    started = time.perf_counter()
    gamma = None
    if method == "elm":
        net = fit_elm(elm_cfg, data.U, data.Y)
    else:
        robust_cfg = _validated(
            RobustTrainConfig,
            shared_lambda=shared_lambda,
            lambda_floor=lambda_floor,
            solver=_solver_options(settings),
        )
        initial = init_random(elm_cfg, data.U.shape[1], data.Y.shape[1])
        result = train_robust(initial, uncertain, robust_cfg)
        net = result.net
        gamma = result.gamma
        config["shared_lambda"] = shared_lambda
    elapsed = time.perf_counter() - started

    report = RunReport(
        method=method,
        radius=output_radius(net, uncertain),
        mse=mse(net, data.U, data.Y),
        gamma=gamma,
        wall_time=elapsed,
        config=config,
    )
    meta = ModelMeta(method=method, seed=seed, delta=_delta_meta(deltas), gamma=gamma)
    print_to_debug_log(f"train -- completed method '{method}' in {elapsed:.3f}s", color="green")
    return ModelFile(net, meta), report


def _write_model(path: str, model: ModelFile) -> None:
    with open(path, "w") as fl:
        save_model(fl, model)


def _read_dataset(path: str) -> Dataset:
    with open(path, "r", newline="") as fl:
        return read_dataset(fl)


@click.group(cls=ExitCodeGroup)
@click.option("--debug-log", type=click.Path(dir_okay=False), default=None, help="Write the debug log to this file")
@click.option("-v", "--verbose", is_flag=True, help="Echo debug log lines to stderr")
@click.option("--max-iters", type=int, default=None, help="SDP iteration limit")
@click.option("--tol-gap", type=float, default=None, help="SDP relative duality-gap tolerance")
@click.pass_context
def cli(ctx, debug_log, verbose, max_iters, tol_gap):
    """Robust training of shallow networks against interval input perturbations."""
    settings = load_settings(
        {
            "debug_log": debug_log,
            "verbose": True if verbose else None,
            "max_iters": max_iters,
            "tol_gap": tol_gap,
        }
    )
    configure_debug_log(settings.debug_log, settings.verbose)
    ctx.obj = settings


@cli.command()
@click.option("--zone", type=click.Choice(Zone.names()), default=Zone.NORMAL.value, show_default=True)
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Number of samples")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("-o", "--output", "output", type=click.Path(dir_okay=False), required=True)
@click.option("--l1", type=float, default=1.0, show_default=True, help="Link 1 length")
@click.option("--l2", type=float, default=1.0, show_default=True, help="Link 2 length")
def gen(zone, n, seed, output, l1, l2):
    """Generate a robot-arm dataset CSV (theta1,theta2,x,y)."""
    geometry = _validated(ArmGeometry, l1=l1, l2=l2)
    data = sample_dataset(geometry, Zone(zone), n, seed)
    with open(output, "w", newline="") as fl:
        write_dataset(fl, data)
    click.echo(f"Wrote {n} samples to {output}")


def _training_options(func):
    options = [
        click.option("--delta", type=click.FloatRange(min=0.0), default=0.01, show_default=True,
                     help="Uniform input perturbation radius"),
        click.option("--delta-file", type=click.Path(dir_okay=False), default=None,
                     help="Per-column perturbation radii, comma-separated"),
        click.option("--hidden", type=click.IntRange(min=1), default=10, show_default=True),
        click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True),
        click.option("--activation", type=click.Choice(Activation.names()), default="sigmoid", show_default=True),
        click.option("--shared-lambda", is_flag=True, help="One multiplier per hidden unit"),
        click.option("--lambda-floor", type=click.FloatRange(min=0.0), default=0.0, show_default=True),
        click.option("--ridge", type=click.FloatRange(min=0.0), default=1e-10, show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@cli.command()
@click.argument("dataset", type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(METHODS), default="elm", show_default=True)
@_training_options
@click.option("-o", "--output", "output", type=click.Path(dir_okay=False), default="model.txt", show_default=True)
@click.option("--porcelain", is_flag=True, help="key=value report lines")
@click.option("--timing", is_flag=True, help="Include wall time in the report")
@click.pass_obj
def train(settings, dataset, method, delta, delta_file, hidden, seed, activation, shared_lambda, lambda_floor,
          ridge, output, porcelain, timing):
    """Train a network on DATASET and print its report."""
    data = _read_dataset(dataset)
    deltas = _deltas(delta, delta_file, data.U.shape[1])
    model, report = train_method(
        method,
        data,
        deltas,
        hidden=hidden,
        seed=seed,
        activation=activation,
        shared_lambda=shared_lambda,
        lambda_floor=lambda_floor,
        ridge=ridge,
        settings=settings,
    )
    _write_model(output, model)
    click.echo(report.to_porcelain(timing) if porcelain else report.to_text(timing))


@cli.command()
@click.argument("model", type=click.Path(dir_okay=False))
@click.argument("dataset", type=click.Path(dir_okay=False))
@click.option("--delta", type=click.FloatRange(min=0.0), default=0.01, show_default=True)
@click.option("--delta-file", type=click.Path(dir_okay=False), default=None)
@click.option("-o", "--output", "output", type=click.Path(dir_okay=False), default=None,
              help="Box CSV (center_x,center_y,rad_x,rad_y)")
@click.option("--svg", "svg", type=click.Path(dir_okay=False), default=None, help="Figure of the reachable boxes")
def reach(model, dataset, delta, delta_file, output, svg):
    """Output reachable boxes of MODEL over the perturbed DATASET."""
    with open(model, "r") as fl:
        loaded = load_model(fl)
    data = _read_dataset(dataset)
    net: ShallowNet = loaded.net
    uncertain = UncertainDataset.uniform(data.U, data.Y, _deltas(delta, delta_file, data.U.shape[1]))
    boxes = reach_boxes(net, uncertain)
    if output is not None:
        with open(output, "w", newline="") as fl:
            write_boxes(fl, boxes.centers, boxes.radii)
    if svg is not None:
        with open(svg, "wb") as fl:
            plot_reachable_boxes(fl, data.Y, boxes.centers, boxes.radii, title=f"{loaded.meta.method} reachable sets")
    click.echo(f"radius={output_radius(net, uncertain, boxes):.6g}")


@cli.group()
def bench():
    """Benchmarks comparing ELM and robust training."""


def _format_table(header: Tuple[str, ...], rows: List[Tuple[str, ...]]) -> str:
    widths = [max(len(r[c]) for r in [header] + rows) for c in range(len(header))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [header] + rows)


def _num(v: Optional[float]) -> str:
    return "-" if v is None else f"{v:.6g}"


@bench.command("robot-arm")
@click.option("--n", "n", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--zone", type=click.Choice(Zone.names()), default=Zone.NORMAL.value, show_default=True)
@click.option("--l1", type=float, default=1.0, show_default=True)
@click.option("--l2", type=float, default=1.0, show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=1, show_default=True,
              help="Repeat over seeds s, s+1, ...")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="Write models and report here")
@_training_options
@click.pass_obj
def bench_robot_arm(settings, n, zone, l1, l2, seeds, out_dir, delta, delta_file, hidden, seed, activation,
                    shared_lambda, lambda_floor, ridge):
    """ELM vs robust training on the two-joint arm dataset."""
    geometry = _validated(ArmGeometry, l1=l1, l2=l2)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    multi = seeds > 1
    header = ("seed", "method", "radius", "mse", "gamma") if multi else ("method", "radius", "mse", "gamma")
    rows: List[Tuple[str, ...]] = []
    smaller_radius = larger_mse = 0
    seed_list = range(seed, seed + seeds)
    for s in pb(seed_list, desc="Seeds", disable=not multi):
        data = sample_dataset(geometry, Zone(zone), n, s)
        deltas = _deltas(delta, delta_file, data.U.shape[1])
        reports = {}
        for method in METHODS:
            model, report = train_method(
                method,
                data,
                deltas,
                hidden=hidden,
                seed=s,
                activation=activation,
                shared_lambda=shared_lambda,
                lambda_floor=lambda_floor,
                ridge=ridge,
                settings=settings,
            )
            reports[method] = report
            if out_dir is not None:
                _write_model(os.path.join(out_dir, f"model_{method}_seed{s}.txt"), model)
            row = (method, _num(report.radius), _num(report.mse), _num(report.gamma))
            rows.append((str(s),) + row if multi else row)
        smaller_radius += reports["robust"].radius < reports["elm"].radius
        larger_mse += reports["robust"].mse >= reports["elm"].mse

    text = _format_table(header, rows)
    if multi:
        text += (
            f"\nrobust radius < elm radius in {smaller_radius}/{seeds} seeds"
            f"\nrobust mse >= elm mse in {larger_mse}/{seeds} seeds"
        )
    if out_dir is not None:
        with open(os.path.join(out_dir, "report.txt"), "w") as fl:
            fl.write(text + "\n")
    click.echo(text)


if __name__ == "__main__":
    cli()
