"""Compiled vs numpy kernels on oracle- and sweep-sized inputs.

Run ``python3 benchmarks/bench_kernels.py``. Results are checked for
agreement before timing; without the compiled extension only the fallback
is timed.
"""

import argparse
import timeit

import numpy as np

from polariton_clone import kernels


def _inputs(rng, cutoff, n_points):
    psi = rng.normal(size=(cutoff, cutoff, cutoff)) + 1j * rng.normal(size=(cutoff, cutoff, cutoff))
    psi3 = psi.reshape(cutoff, cutoff, cutoff)
    S = rng.normal(size=(n_points, 6, 6))
    means = rng.normal(size=(n_points, 6))
    C = rng.normal(size=(n_points, 6, 6))
    cov = C @ np.swapaxes(C, 1, 2)
    return psi3, (S, means, cov)


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cutoff", type=int, default=40)
    parser.add_argument("--points", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    psi3, batch = _inputs(rng, args.cutoff, args.points)
    backends = {"python": kernels.fallback}
    if kernels.compiled is not None:
        backends["cython"] = kernels.compiled
        ref = kernels.fallback.fock_mode_sums(psi3)
        got = kernels.compiled.fock_mode_sums(psi3)
        assert np.allclose(ref, got, rtol=1e-10), "fock_mode_sums backends disagree"
        rm, rc = kernels.fallback.congruence_batch(*batch)
        gm, gc = kernels.compiled.congruence_batch(*batch)
        assert np.allclose(rm, gm) and np.allclose(rc, gc), "congruence_batch backends disagree"

    print(f"fock_mode_sums on {args.cutoff}^3 amplitudes, congruence_batch on {args.points} points")
    print(f"{'kernel':18s} {'backend':8s} {'best [ms]':>10s}")
    timings = {}
    for name, mod in backends.items():
        t1 = _best(lambda: mod.fock_mode_sums(psi3), args.repeat)
        t2 = _best(lambda: mod.congruence_batch(*batch), args.repeat)
        timings[name] = (t1, t2)
        print(f"{'fock_mode_sums':18s} {name:8s} {1e3 * t1:10.2f}")
        print(f"{'congruence_batch':18s} {name:8s} {1e3 * t2:10.2f}")
    if "cython" in timings:
        (p1, p2), (c1, c2) = timings["python"], timings["cython"]
        print(f"speed-up: fock_mode_sums x{p1 / c1:.1f}, congruence_batch x{p2 / c2:.1f}")


if __name__ == "__main__":
    main()
