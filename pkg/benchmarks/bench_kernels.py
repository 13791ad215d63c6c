"""Time the compiled kernels against the numpy fallback on dims 2-8.

    python benchmarks/bench_kernels.py [--number N]
"""

import argparse
import timeit

import numpy as np

from qdiv import _pykernels
from qdiv.propcheck import random_density, random_unitary

try:
    from qdiv import _ckernels
except ImportError:
    _ckernels = None


def _inputs(dim, rng):
    rho, sigma = random_density(dim, None, rng), random_density(dim, None, rng)
    w = random_unitary(dim, rng)
    r, u = np.ascontiguousarray(rho.eigenvalues), np.ascontiguousarray(rho.eigenvectors)
    s, v = np.ascontiguousarray(sigma.eigenvalues), np.ascontiguousarray(sigma.eigenvectors)
    return {
        "transition_matrix": (w, u),
        "spectral_overlap_trace": (r, u, s, v, 0.5),
        "pinched_trace": (r, u, s, v, w, 0.5),
        "concavity_bound": (r, u, s, v, w, 0.5),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--number", type=int, default=20000)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the fallback can run")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'dim':>4}{'cython us':>12}{'numpy us':>12}{'speedup':>10}")
    for dim in range(2, 9):
        for name, call_args in _inputs(dim, rng).items():
            fc, fp = getattr(_ckernels, name), getattr(_pykernels, name)
            a, b = fc(*call_args), fp(*call_args)
            assert np.allclose(a, b, atol=1e-12), name
            tc = min(timeit.repeat(lambda: fc(*call_args), number=args.number, repeat=3))
            tp = min(timeit.repeat(lambda: fp(*call_args), number=args.number, repeat=3))
            us_c, us_p = 1e6 * tc / args.number, 1e6 * tp / args.number
            print(f"{name:<24}{dim:>4}{us_c:>12.2f}{us_p:>12.2f}{us_p / us_c:>9.1f}x")


if __name__ == "__main__":
    main()
