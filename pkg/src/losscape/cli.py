"""Command-line front door: compute landscapes, inspect and clip CSVs, run
the case studies, and launch the HTTP service.

Every command that writes files also writes a RunManifest JSON next to its
outputs with the fully resolved configuration (all seeds made explicit), so
re-running the recorded argv reproduces the outputs byte for byte.
Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import landscape, nn, train
from .analysis import ClipSpec, clip_radius, laplacian_roughness, summary_stats
from .csvio import CsvFormatError, Experiment, export_csv, parse_csv
from .datasets import synth_dataset
from .kernels import BACKEND
from .modelspec import ModelSpecError, model_to_dicts, parse_model_file
from .train import TrainConfig, TrainingDiverged


class RuntimeFailure(RuntimeError):
    """Failures past validation: divergence, busy ports, and the like."""


def derive_seeds(master: int) -> dict[str, int]:
    """Four independent integer seeds from one master seed, via the SeedSequence
    state expansion (stable across platforms)."""
    init, shuffle, directions, subsample = np.random.SeedSequence(master).generate_state(4)
    return {
        "init_seed": int(init),
        "train_seed": int(shuffle),
        "direction_seed": int(directions),
        "subsample_seed": int(subsample),
    }


def parse_dataset_arg(raw: str):
    parts = raw.split(":")
    if len(parts) != 3:
        raise click.UsageError(f"--dataset expects kind:size:seed, got {raw!r}")
    kind, size, seed = parts
    try:
        return kind, int(size), int(seed)
    except ValueError:
        raise click.UsageError(f"--dataset size/seed must be integers, got {raw!r}")


def parse_grid_arg(raw: str) -> landscape.GridSpec:
    parts = raw.split(":")
    if len(parts) != 6:
        raise click.UsageError(f"--grid expects xmin:xmax:ymin:ymax:resx:resy, got {raw!r}")
    try:
        spec = landscape.GridSpec(
            float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]),
            int(parts[4]), int(parts[5]),
        )
    except ValueError:
        raise click.UsageError(f"--grid has non-numeric fields: {raw!r}")
    spec.validate()
    return spec


def parse_subsample_arg(raw: str):
    if raw == "full":
        return "full"
    try:
        return int(raw)
    except ValueError:
        raise click.UsageError(f"--subsample expects a count or 'full', got {raw!r}")


def write_manifest(manifest_path: Path, command: str, argv: list[str], config: dict,
                   outputs: list[str], started: float) -> Path:
    manifest = {
        "command": command,
        "argv": argv,
        "config": config,
        "outputs": outputs,
        "duration_secs": round(time.time() - started, 3),
        "kernel_backend": BACKEND,
    }
    manifest_path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return manifest_path


def print_stats(experiments: list[Experiment]) -> None:
    for exp in experiments:
        s = summary_stats(exp.grid)
        center = "-" if s.center_loss is None else f"{s.center_loss:.6g}"
        click.echo(
            f"{exp.id}: min={s.min_loss:.6g} mean={s.mean_loss:.6g} max={s.max_loss:.6g} "
            f"center={center} argmin=({s.argmin_x:.6g}, {s.argmin_y:.6g}) "
            f"finite={s.finite_count} masked={s.masked_count}"
        )


def save_weights(path: Path, params) -> None:
    np.savez(path, flat=nn.flatten_params(params))


def load_weights(path: Path, model) -> list:
    with np.load(path) as bundle:
        flat = bundle["flat"]
    layout = nn.params_layout(nn.init_params(model, seed=0))
    return nn.unflatten_params(layout, flat, copy=True)


@click.group(name="losscape")
@click.version_option(version="0.1.0", prog_name="losscape")
def cli():
    """Loss-landscape workbench: compute filter-normalized 2D slices of small
    neural networks, exchange them as 4-column CSVs, and serve them for
    side-by-side comparison in a browser."""


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Model spec file (see docs/model-spec.md).")
@click.option("--weights", "weights_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Trained weights (.npz from --save-weights).")
@click.option("--train", "do_train", is_flag=True, help="Train from scratch before slicing.")
@click.option("--dataset", "dataset_arg", required=True, help="kind:size:seed (kinds: blobs, xor-image).")
@click.option("--grid", "grid_arg", default="-1:1:-1:1:60:60", show_default=True, help="xmin:xmax:ymin:ymax:resx:resy.")
@click.option("--subsample", "subsample_arg", default="100", show_default=True, help="Evaluation examples per grid point, or 'full'.")
@click.option("--seed", default=0, show_default=True, help="Master seed; init/shuffle/direction/subsample seeds derive from it.")
@click.option("--loss", "loss_kind", default="cross-entropy", show_default=True, type=click.Choice(["mse", "cross-entropy"]), help="Loss to evaluate (recorded in metadata).")
@click.option("--id", "exp_id", default=None, help="Experiment id (default: output file stem).")
@click.option("--name", default=None, help="Display name (default: the id).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Output CSV path.")
@click.option("--epochs", default=10, show_default=True, help="Training epochs (with --train).")
@click.option("--batch-size", default=32, show_default=True, help="Training batch size (with --train).")
@click.option("--learning-rate", default=0.01, show_default=True, help="Training learning rate (with --train).")
@click.option("--workers", default=4, show_default=True, help="Grid evaluation worker threads.")
@click.option("--save-weights", "save_weights_path", type=click.Path(dir_okay=False, path_type=Path), help="Also save the sliced weights as .npz.")
def compute(model_path, weights_path, do_train, dataset_arg, grid_arg, subsample_arg, seed,
            loss_kind, exp_id, name, out_path, epochs, batch_size, learning_rate, workers,
            save_weights_path):
    """Evaluate one filter-normalized 2D slice and write it as CSV."""
    started = time.time()
    if do_train == (weights_path is not None):
        raise click.UsageError("pass exactly one of --weights <file> or --train")
    model = parse_model_file(model_path.read_text("utf-8"))
    kind, size, data_seed = parse_dataset_arg(dataset_arg)
    data = synth_dataset(kind, size, data_seed)
    grid = parse_grid_arg(grid_arg)
    subsample = parse_subsample_arg(subsample_arg)
    seeds = derive_seeds(seed)
    out_shape = nn.model_output_shape(model, data.inputs.shape[1:])
    if np.issubdtype(data.targets.dtype, np.integer):
        n_classes = int(data.targets.max()) + 1
        if len(out_shape) != 1 or out_shape[0] < n_classes:
            raise click.UsageError(
                f"model output shape {out_shape} cannot score {n_classes} classes"
            )

    metadata = {
        "loss_kind": loss_kind,
        "subsample": str(subsample),
        "subsample_seed": str(seeds["subsample_seed"]),
        "subsample_strategy": "seeded-permutation-prefix",
        "direction_seed": str(seeds["direction_seed"]),
        "dataset": dataset_arg,
        "model": nn.describe_model(model),
        "kernel_backend": BACKEND,
    }
    if do_train:
        cfg = TrainConfig(batch_size, learning_rate, epochs, seeds["train_seed"])
        cfg.validate(data.size)
        params = nn.init_params(model, seeds["init_seed"])
        losses = []
        params = train.train_sgd(model, params, data, cfg, loss_kind=loss_kind,
                                 on_epoch=lambda e, l: losses.append(l))
        if losses:
            click.echo(f"trained {epochs} epochs; loss {losses[0]:.6g} -> {losses[-1]:.6g}")
        metadata["init_seed"] = str(seeds["init_seed"])
        metadata["train"] = (
            f"batch_size={batch_size},learning_rate={learning_rate},"
            f"epochs={epochs},seed={seeds['train_seed']}"
        )
    else:
        params = load_weights(weights_path, model)
        metadata["weights_file"] = str(weights_path)
    if save_weights_path is not None:
        save_weights(save_weights_path, params)

    pair = landscape.filter_normalize(
        landscape.sample_directions(params, seeds["direction_seed"]), params
    )
    if pair.warnings:
        metadata["warnings"] = "; ".join(pair.warnings)
    cfg_eval = landscape.EvalConfig(subsample, seeds["subsample_seed"], loss_kind)
    result = landscape.evaluate_grid(model, params, pair, data, grid, cfg_eval, workers=workers)

    exp_id = exp_id or out_path.stem
    exp = Experiment(id=exp_id, name=name or exp_id, grid=result, metadata=metadata)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(export_csv([exp]))
    print_stats([exp])

    argv = ["compute", "--model", str(model_path), "--dataset", dataset_arg,
            "--grid", grid_arg, "--subsample", str(subsample), "--seed", str(seed),
            "--loss", loss_kind, "--id", exp_id, "--name", exp.name,
            "--out", str(out_path), "--workers", str(workers)]
    if do_train:
        argv += ["--train", "--epochs", str(epochs), "--batch-size", str(batch_size),
                 "--learning-rate", str(learning_rate)]
    else:
        argv += ["--weights", str(weights_path)]
    if save_weights_path is not None:
        argv += ["--save-weights", str(save_weights_path)]
    config = {
        "model_file": str(model_path), "model": model_to_dicts(model),
        "dataset": dataset_arg, "grid": grid_arg, "subsample": subsample,
        "loss_kind": loss_kind, "master_seed": seed, **seeds,
        "experiment_id": exp_id, "workers": workers,
    }
    outputs = [str(out_path)] + ([str(save_weights_path)] if save_weights_path else [])
    write_manifest(out_path.with_suffix(".manifest.json"), "compute", argv, config, outputs, started)


@cli.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def stats(csv_path):
    """Print summary statistics for every experiment in a CSV."""
    try:
        experiments = parse_csv(csv_path.read_bytes())
    except CsvFormatError as e:
        raise click.ClickException(f"{csv_path}:{e.line or '?'}: {e.reason}")
    print_stats(experiments)


@cli.command()
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--radius", default="auto", show_default=True, help="Positive radius or 'auto' (inscribed circle).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
def clip(csv_path, radius, out_path):
    """Mask grid points beyond a radius from the origin; masked points are
    written as NaN."""
    started = time.time()
    try:
        experiments = parse_csv(csv_path.read_bytes())
    except CsvFormatError as e:
        raise click.ClickException(f"{csv_path}:{e.line or '?'}: {e.reason}")
    if radius != "auto":
        try:
            radius = float(radius)
        except ValueError:
            raise click.UsageError(f"--radius expects a number or 'auto', got {radius!r}")
    spec = ClipSpec(radius=radius)
    spec.validate()
    for exp in experiments:
        exp.grid = clip_radius(exp.grid, spec)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(export_csv(experiments))
    print_stats(experiments)
    argv = ["clip", str(csv_path), "--radius", str(radius), "--out", str(out_path)]
    write_manifest(out_path.with_suffix(".manifest.json"), "clip", argv,
                   {"radius": str(radius)}, [str(out_path)], started)


SKIP_STUDY_MODEL = """\
# conv classifier for 8x8 single-channel images, 2 classes,
# with a residual block whose skip connection is toggled per variant
conv2d in=1 filters=8 kernel=3
relu
flatten
dense in=288 out=32
relu
residual-block width=32 skip={skip}
dense in=32 out=2
"""

BATCH_STUDY_MODEL = """\
# conv classifier for 8x8 single-channel images, 4 classes (~10k params)
conv2d in=1 filters=8 kernel=3
relu
flatten
dense in=288 out=32
relu
dense in=32 out=4
"""


def _study_landscape(model, params, data, *, direction_seed, subsample_seed, loss_kind,
                     grid, workers):
    pair = landscape.filter_normalize(landscape.sample_directions(params, direction_seed), params)
    cfg = landscape.EvalConfig(100, subsample_seed, loss_kind)
    return landscape.evaluate_grid(model, params, pair, data, grid, cfg, workers=workers), pair


def _accuracy(model, params, data) -> float:
    preds = np.argmax(nn.forward(model, params, data.inputs), axis=1)
    return float(np.mean(preds == data.targets))


@cli.command(name="case-study")
@click.argument("study", type=click.Choice(["skip-connections", "batch-size"]))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--workers", default=4, show_default=True)
def case_study(study, out_dir, workers):
    """Run a bundled end-to-end study with fixed seeds.

    skip-connections: matched residual-on/off conv models on xor-image data;
    emits two experiments plus a smoothness report (mean absolute discrete
    Laplacian per grid, lower = smoother). batch-size: one conv model trained
    at batch sizes 8/80/800 on blobs; emits three experiments.
    """
    started = time.time()
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = landscape.GridSpec(-1.0, 1.0, -1.0, 1.0, 31, 31)
    if study == "skip-connections":
        outputs = _run_skip_study(out_dir, grid, workers)
    else:
        outputs = _run_batch_study(out_dir, grid, workers)
    argv = ["case-study", study, "--out-dir", str(out_dir), "--workers", str(workers)]
    write_manifest(out_dir / f"{study}.manifest.json", study, argv,
                   {"grid": "-1:1:-1:1:31:31", "subsample": 100}, outputs, started)


def _run_skip_study(out_dir: Path, grid, workers: int) -> list[str]:
    data = synth_dataset("xor-image", 2000, seed=11)
    experiments = []
    smoothness = {}
    for variant, skip in (("skip-on", "on"), ("skip-off", "off")):
        text = SKIP_STUDY_MODEL.format(skip=skip)
        model_file = out_dir / f"{variant}.model"
        model_file.write_text(text, encoding="utf-8")
        model = parse_model_file(text)
        params = nn.init_params(model, seed=21)
        try:
            params = train.train_sgd(
                model, params, data, TrainConfig(32, 0.02, 20, seed=22), loss_kind="cross-entropy"
            )
        except TrainingDiverged as e:
            raise RuntimeFailure(f"{variant} training diverged: {e}")
        acc = _accuracy(model, params, data)
        result, pair = _study_landscape(
            model, params, data, direction_seed=23, subsample_seed=24,
            loss_kind="cross-entropy", grid=grid, workers=workers,
        )
        metadata = {
            "loss_kind": "cross-entropy", "subsample": "100", "subsample_seed": "24",
            "subsample_strategy": "seeded-permutation-prefix",
            "init_seed": "21", "direction_seed": "23", "dataset": "xor-image:2000:11",
            "model": nn.describe_model(model), "train_accuracy": f"{acc:.4f}",
            "kernel_backend": BACKEND,
        }
        if pair.warnings:
            metadata["warnings"] = "; ".join(pair.warnings)
        exp = Experiment(id=variant, grid=result, metadata=metadata)
        experiments.append(exp)
        smoothness[variant] = laplacian_roughness(result)
        click.echo(f"{variant}: train accuracy {acc:.3f}, roughness {smoothness[variant]:.6g}")
    csv_path = out_dir / "skip-connections.csv"
    csv_path.write_bytes(export_csv(experiments))
    report_path = out_dir / "smoothness.json"
    report_path.write_text(json.dumps({
        "metric": "mean absolute 5-point discrete Laplacian over interior grid points",
        "lower_is_smoother": True,
        "roughness": smoothness,
    }, indent=1) + "\n", encoding="utf-8")
    print_stats(experiments)
    return [str(csv_path), str(report_path)]


def _run_batch_study(out_dir: Path, grid, workers: int) -> list[str]:
    data = synth_dataset("blobs", 2000, seed=31)
    model_file = out_dir / "batch-size.model"
    model_file.write_text(BATCH_STUDY_MODEL, encoding="utf-8")
    model = parse_model_file(BATCH_STUDY_MODEL)
    experiments = []
    report = {}
    for batch_size in (8, 80, 800):
        params = nn.init_params(model, seed=41)
        try:
            params = train.train_sgd(
                model, params, data, TrainConfig(batch_size, 0.01, 10, seed=42),
                loss_kind="cross-entropy",
            )
        except TrainingDiverged as e:
            raise RuntimeFailure(f"batch size {batch_size} training diverged: {e}")
        acc = _accuracy(model, params, data)
        result, pair = _study_landscape(
            model, params, data, direction_seed=43, subsample_seed=44,
            loss_kind="cross-entropy", grid=grid, workers=workers,
        )
        exp_id = f"batch-{batch_size}"
        metadata = {
            "loss_kind": "cross-entropy", "subsample": "100", "subsample_seed": "44",
            "subsample_strategy": "seeded-permutation-prefix",
            "init_seed": "41", "direction_seed": "43", "dataset": "blobs:2000:31",
            "model": nn.describe_model(model), "train_accuracy": f"{acc:.4f}",
            "batch_size": str(batch_size), "kernel_backend": BACKEND,
        }
        if pair.warnings:
            metadata["warnings"] = "; ".join(pair.warnings)
        experiments.append(Experiment(id=exp_id, grid=result, metadata=metadata))
        report[exp_id] = {"train_accuracy": acc, "roughness": laplacian_roughness(result)}
        click.echo(f"{exp_id}: train accuracy {acc:.3f}")
    csv_path = out_dir / "batch-size.csv"
    csv_path.write_bytes(export_csv(experiments))
    report_path = out_dir / "batch-size-report.json"
    report_path.write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    print_stats(experiments)
    return [str(csv_path), str(report_path)]


def _default_ui_dir() -> Path | None:
    packaged = Path(__file__).parent / "ui"
    if packaged.is_dir():
        return packaged
    local = Path("frontend") / "dist"
    if local.is_dir():
        return local
    return None


@cli.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default="losscape-data", show_default=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--workers", default=2, show_default=True, help="Compute-job worker threads.")
@click.option("--fetch-cap-bytes", default=256 * 1024 * 1024, show_default=True)
@click.option("--fetch-timeout-secs", default=30.0, show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False, path_type=Path), help="Static UI bundle (default: packaged bundle or ./frontend/dist).")
@click.option("--open", "show_url", is_flag=True, help="Print the local URL on startup.")
def serve(port, host, data_dir, workers, fetch_cap_bytes, fetch_timeout_secs, ui_dir, show_url):
    """Serve the HTTP API and the web UI from one origin."""
    import socket

    import uvicorn

    from .service import create_app

    # uvicorn exits on its own when the bind fails; probe first for a clear
    # message and the documented exit code
    probe = socket.socket()
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as e:
        raise RuntimeFailure(f"cannot bind {host}:{port} ({e.strerror}); is the port in use?")
    finally:
        probe.close()

    ui = ui_dir if ui_dir is not None else _default_ui_dir()
    app = create_app(
        data_dir, workers=workers, fetch_cap_bytes=fetch_cap_bytes,
        fetch_timeout_secs=fetch_timeout_secs, static_dir=ui,
    )
    if show_url:
        click.echo(f"http://{host}:{port}/")
    if ui is None:
        click.echo("no UI bundle found; serving the API only", err=True)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except SystemExit:
        raise RuntimeFailure(f"server on {host}:{port} failed to start")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="losscape", standalone_mode=False)
    except click.exceptions.Exit as e:
        return int(e.exit_code)
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except (ModelSpecError, CsvFormatError, nn.ShapeError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    except (RuntimeFailure, TrainingDiverged) as e:
        click.echo(f"error: {e}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
