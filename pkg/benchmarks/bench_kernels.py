"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--n 256] [--steps 200]``.
Prints per-call times for each kernel and a whole-step time for a shear
run, one line per backend, plus the speed-up.
"""

import argparse
import timeit

import numpy as np

from reactmix import _backend
from reactmix.flows import make_shear
from reactmix.grid import Grid2D
from reactmix.species import SpeciesSystem
from reactmix.stepper import Layout, PassiveScalar, StepperConfig
from reactmix.verify import low_mode_pair


def kernel_cases(n):
    rng = np.random.default_rng(0)
    g = Grid2D(n, n)
    lay = Layout(g, True)
    shape = (1,) + lay.shape
    cplx = lambda: np.ascontiguousarray(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    F, out = cplx(), np.empty(shape, complex)
    u, n1, n2, n3, n4 = (cplx().reshape(-1) for _ in range(5))
    e = np.ascontiguousarray(rng.uniform(0.5, 1, u.size))
    e2 = np.sqrt(e)
    flat = np.empty_like(u)
    modes = make_shear(1).sparse_modes(0.0, g)
    q = np.ascontiguousarray(np.fft.rfft(np.sin(2 * np.pi * np.arange(n) / n)))
    lo = np.ascontiguousarray(np.linspace(0.01, 0.4, 64))
    hi = lo + 0.2
    pts = np.ascontiguousarray(rng.uniform(0, 1, 256))
    return {
        "ifrk4_final": lambda k: k.ifrk4_final(u, e, e2, n1, n2, n3, n4, 0.01, flat),
        "sparse_advect": lambda k: k.sparse_advect(F, modes.mx, modes.my, modes.uxh, modes.uyh, lay.kx, lay.ky, out),
        "trig_eval": lambda k: k.trig_eval(q, n, pts, 1),
        "bisect_roots": lambda k: k.bisect_roots(q, n, lo, hi, 1e-14, 100),
    }


def time_call(fn, repeat=5):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def step_time(name, n, steps, species):
    g = Grid2D(n, n)
    k = _backend.load(name)
    cfg = StepperConfig(0.25 / n)
    if species:
        sys = SpeciesSystem(g, low_mode_pair(g), 1e-3, 0.5, make_shear(1), cfg)
    else:
        sys = PassiveScalar(g, low_mode_pair(g)[:1], [1e-3], make_shear(1), cfg)
    sys.k = sys.advection.k = k
    sys.step()
    t = timeit.default_timer()
    for _ in range(steps):
        sys.step()
    return (timeit.default_timer() - t) / steps


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--steps", type=int, default=200)
    args = p.parse_args(argv)
    names = _backend.available()
    print(f"backends: {', '.join(names)}; n={args.n}")
    cases = kernel_cases(args.n)
    results = {}
    for case, fn in cases.items():
        results[case] = {name: time_call(lambda: fn(_backend.load(name))) for name in names}
    results["passive step"] = {name: step_time(name, args.n, args.steps, False) for name in names}
    results["species step"] = {name: step_time(name, args.n, args.steps, True) for name in names}
    width = max(map(len, results))
    for case, times in results.items():
        cols = "  ".join(f"{name} {1e6 * t:10.1f} us" for name, t in times.items())
        speed = f"  x{times['python'] / times['cython']:.1f}" if len(times) == 2 else ""
        print(f"{case:<{width}}  {cols}{speed}")


if __name__ == "__main__":
    main()
