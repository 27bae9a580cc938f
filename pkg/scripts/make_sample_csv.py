"""Regenerate the bundled six-experiment sample (frontend/public/sample.csv).

Three batch sizes x two direction seeds of the batch-study conv model on
blobs data, 31x31 grids. Deterministic; rerunning writes identical bytes.
"""

from pathlib import Path

from losscape import landscape, nn, train
from losscape.cli import BATCH_STUDY_MODEL
from losscape.csvio import Experiment, export_csv
from losscape.datasets import synth_dataset
from losscape.modelspec import parse_model_file

OUT = Path(__file__).resolve().parent.parent / "frontend" / "public" / "sample.csv"


def main():
    data = synth_dataset("blobs", 2000, seed=31)
    model = parse_model_file(BATCH_STUDY_MODEL)
    grid = landscape.GridSpec(-1.0, 1.0, -1.0, 1.0, 31, 31)
    experiments = []
    for batch_size in (8, 80, 800):
        params = train.train_sgd(
            model, nn.init_params(model, seed=41), data,
            train.TrainConfig(batch_size, 0.01, 10, seed=42), loss_kind="cross-entropy",
        )
        for direction_seed in (1, 2):
            pair = landscape.filter_normalize(
                landscape.sample_directions(params, direction_seed), params
            )
            cfg = landscape.EvalConfig(100, 7, "cross-entropy")
            result = landscape.evaluate_grid(model, params, pair, data, grid, cfg, workers=4)
            experiments.append(
                Experiment(id=f"batch{batch_size}-dir{direction_seed}", grid=result)
            )
            print("computed", experiments[-1].id)
    OUT.write_bytes(export_csv(experiments))
    print(f"wrote {OUT} ({OUT.stat().st_size:,} bytes)")


if __name__ == "__main__":
    main()
