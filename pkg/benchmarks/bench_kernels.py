"""Wall-clock comparison of the compiled and numpy Klein-Gordon kernels.

    python3 benchmarks/bench_kernels.py --nodes 256 1024 4096 --steps 2000
"""
import argparse
import time

import numpy as np

from polyham import _pykernels, kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(impl, nodes, steps, repeat):
    h = 1.0 / nodes
    x = h * np.arange(nodes)
    base = (np.cos(2 * np.pi * x), np.sin(2 * np.pi * x), np.zeros(nodes))

    def ham():
        impl.kg_hamiltonian_steps(*(a.copy() for a in base), h, h / 2, 1.0, steps)

    def ref():
        impl.kg_reference_steps(base[0].copy(), base[0] - h / 2 * base[1], h, h / 2, 1.0, steps)

    return best_of(ham, repeat), best_of(ref, repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = {"python": _pykernels}
    if kernels.BACKEND == "cython":
        backends["cython"] = kernels.get_backend("cython")
    else:
        print("compiled kernels unavailable; timing the numpy fallback only")

    print(f"{'nodes':>6} {'kernel':>12} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for n in args.nodes:
        res = {b: bench(impl, n, args.steps, args.repeat) for b, impl in backends.items()}
        for i, name in enumerate(("hamiltonian", "reference")):
            row = " ".join(f"{res[b][i]:10.4f}" for b in backends)
            speed = res["python"][i] / res["cython"][i] if "cython" in res else float("nan")
            print(f"{n:>6} {name:>12} {row}   {speed:7.1f}x")


if __name__ == "__main__":
    main()
