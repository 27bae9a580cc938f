"""Benchmark the compiled convolution kernels against the numpy fallback.

Covers the raw kernels at the shapes the workbench actually hits and one
end-to-end grid evaluation. Run with: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from losscape import datasets, kernels, landscape, nn
from losscape.kernels import reference

try:
    from losscape.kernels import _convkern as compiled
except ImportError:
    compiled = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_kernels():
    rng = np.random.default_rng(0)
    shapes = [
        ("grid point batch (100,1,8,8) k3x8", (100, 1, 8, 8), (8, 1, 3, 3)),
        ("full dataset batch (2000,1,8,8) k3x8", (2000, 1, 8, 8), (8, 1, 3, 3)),
        ("wider net (64,8,16,16) k3x16", (64, 8, 16, 16), (16, 8, 3, 3)),
    ]
    print(f"{'case':52s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for label, xs, ws in shapes:
        x = rng.standard_normal(xs)
        w = rng.standard_normal(ws)
        gy = reference.conv2d_forward(x, w)
        rows = [
            ("forward", lambda m: m.conv2d_forward(x, w)),
            ("backward/input", lambda m: m.conv2d_backward_input(gy, w, xs[2], xs[3])),
            ("backward/weights", lambda m: m.conv2d_backward_weights(gy, x, ws[2], ws[3])),
        ]
        for op, runner in rows:
            t_ref = timeit(runner, reference)
            if compiled is None:
                print(f"{label + ' ' + op:52s} {t_ref * 1e3:9.2f}ms {'n/a':>10s}")
                continue
            t_ext = timeit(runner, compiled)
            print(
                f"{label + ' ' + op:52s} {t_ref * 1e3:9.2f}ms {t_ext * 1e3:9.2f}ms "
                f"{t_ref / t_ext:7.1f}x"
            )


def bench_grid(backend_impl, label):
    # swap the kernel functions in place; nn resolves them per call
    saved = (kernels.conv2d_forward, kernels.conv2d_backward_input, kernels.conv2d_backward_weights)
    kernels.conv2d_forward = backend_impl.conv2d_forward
    kernels.conv2d_backward_input = backend_impl.conv2d_backward_input
    kernels.conv2d_backward_weights = backend_impl.conv2d_backward_weights
    try:
        data = datasets.synth_dataset("blobs", 2000, seed=7)
        model = [nn.conv2d(1, 8, 3), nn.relu(), nn.flatten(), nn.dense(288, 32), nn.relu(), nn.dense(32, 4)]
        theta = nn.init_params(model, seed=3)
        pair = landscape.filter_normalize(landscape.sample_directions(theta, seed=11), theta)
        cfg = landscape.EvalConfig(subsample=100, subsample_seed=1)
        spec = landscape.GridSpec(-1, 1, -1, 1, 30, 30)
        start = time.perf_counter()
        landscape.evaluate_grid(model, theta, pair, data, spec, cfg, workers=4)
        elapsed = time.perf_counter() - start
        points = spec.resolution_x * spec.resolution_y
        print(f"30x30 grid, N=100, 4 workers [{label}]: {elapsed:.2f}s ({points / elapsed:,.0f} points/s)")
        return elapsed
    finally:
        (kernels.conv2d_forward, kernels.conv2d_backward_input,
         kernels.conv2d_backward_weights) = saved


def main():
    print(f"active backend at import: {kernels.BACKEND}\n")
    bench_kernels()
    print()
    t_ref = bench_grid(reference, "numpy")
    if compiled is not None:
        t_ext = bench_grid(compiled, "compiled")
        print(f"end-to-end speedup: {t_ref / t_ext:.2f}x")
    else:
        print("compiled kernels unavailable; install with a C compiler to compare")


if __name__ == "__main__":
    main()
