"""Benchmark the two kernel backends on identical workloads.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --rows 500000 --repeats 7

Workloads come from the bundled 25-node stand-in problem: batched
source-sink connectivity over random alive-node bitmasks, and the
minimal-cut reliability bound over random per-node failure probability
rows. Each backend is warmed once, timed `repeats` times, and the best
wall time is reported with the cross-backend speedup. The script also
asserts that both backends return the same values, so it doubles as an
equivalence smoke test.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fortinet import kernels, minimal_cuts
from fortinet.fixtures import fixture_path
from fortinet.problem_io import load_document

BACKENDS = ("numba", "numpy")


def best_time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def connectivity_workload(net, rows: int, p: float, rng):
    """Random alive bitmasks with border nodes always alive."""
    fail = np.zeros(net.n)
    fail[list(net.fallible_indices)] = p
    alive = rng.random((rows, net.n)) >= fail[np.newaxis, :]
    shifts = np.arange(net.n, dtype=np.uint64)
    masks = np.bitwise_or.reduce(
        alive.astype(np.uint64) << shifts[np.newaxis, :], axis=1
    )
    src, dst = net.border_indices[0], net.border_indices[1]
    return lambda backend_rows: kernels.connected_batch(
        net.nbr_masks, net.n, src, dst, backend_rows
    ), masks


def mcub_workload(net, objective, rows: int, rng):
    """Random failure-probability rows against the objective's cut sets."""
    idx, lens = minimal_cuts(net, objective).matrix()
    p = np.zeros((rows, net.n))
    fall = list(net.fallible_indices)
    p[:, fall] = rng.uniform(0.01, 0.3, size=(rows, len(fall)))
    return lambda backend_rows: kernels.mcub_batch(idx, lens, backend_rows), p


def run(kernel_name: str, call, payload, repeats: int):
    timings = {}
    values = {}
    for backend in BACKENDS:
        with kernels.use_backend(backend):
            values[backend] = call(payload[:1024])  # warm (and jit-compile)
            timings[backend] = best_time(lambda: call(payload), repeats)
    if not np.allclose(
        np.asarray(values["numba"], dtype=np.float64),
        np.asarray(values["numpy"], dtype=np.float64),
        atol=1e-12,
    ):
        raise SystemExit(f"{kernel_name}: backends disagree")
    rows = len(payload)
    print(f"{kernel_name} ({rows} rows, best of {repeats}):")
    for backend in BACKENDS:
        seconds = timings[backend]
        print(
            f"  {backend:<6} {seconds * 1e3:9.2f} ms"
            f"  {seconds / rows * 1e9:9.1f} ns/row"
        )
    ratio = timings["numpy"] / timings["numba"]
    print(f"  numba speedup: {ratio:.1f}x\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=200_000, help="batch rows")
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats")
    parser.add_argument("--p", type=float, default=0.12, help="failure probability")
    parser.add_argument("--seed", type=int, default=0, help="workload seed")
    args = parser.parse_args()

    doc = load_document(fixture_path("siilinjarvi-standin.json"))
    net = doc.spec.network
    rng = np.random.default_rng(args.seed)

    call, masks = connectivity_workload(net, args.rows, args.p, rng)
    run("connected_batch", call, masks, args.repeats)

    call, probs = mcub_workload(net, doc.spec.objectives[0], args.rows, rng)
    run("mcub_batch", call, probs, args.repeats)


if __name__ == "__main__":
    main()
