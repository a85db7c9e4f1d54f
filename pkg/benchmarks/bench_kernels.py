"""Compare the compiled fused matvec against the pure-scipy fallback.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from kerrchain.fock import FockSpace
from kerrchain.kernels import HAVE_EXT, FusedOperator
from kerrchain.model import ArrayConfig, OscillatorParams, hamiltonian_parts


def bench(op: FusedOperator, x: np.ndarray, repeats: int = 200) -> float:
    out = np.empty_like(x)
    op.apply(1.0, 0.5, 0.25, x, out)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        op.apply(1.0, 0.5, 0.25, x, out)
    return (time.perf_counter() - t0) / repeats


def main() -> None:
    params = OscillatorParams(delta=1.0, drive=0.7, kerr=1.0, drive_order="tripling")
    print(f"compiled extension available: {HAVE_EXT}")
    for n_sites, cutoff in ((2, 20), (3, 14), (3, 20), (4, 12)):
        space = FockSpace(cutoff, n_sites)
        parts = [m.matrix for m in hamiltonian_parts(params, ArrayConfig.ring(n_sites, 0.4), space)]
        rng = np.random.default_rng(0)
        x = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)

        fused = FusedOperator(*parts)
        times = {}
        for label, use_ext in (("compiled", True), ("fallback", False)):
            if use_ext and not HAVE_EXT:
                continue
            fused.uses_ext = use_ext
            times[label] = bench(fused, x)
        line = f"N={n_sites} cutoff={cutoff} dim={space.dim} nnz={fused.d0.size}"
        for label, t in times.items():
            line += f"  {label}: {t * 1e6:8.1f} us"
        if len(times) == 2:
            line += f"  speedup: {times['fallback'] / times['compiled']:.2f}x"
        print(line)


if __name__ == "__main__":
    main()
