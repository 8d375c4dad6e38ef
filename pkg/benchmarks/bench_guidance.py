"""Compare the compiled guidance kernel against the pure-Python fallback.

Usage: python3 benchmarks/bench_guidance.py [--quick]

Times the three kernel entry points on the standard two-packet collision:
vectorized field evaluation, one full trajectory with sample storage, and
an endpoint-only ensemble.  Results are also cross-checked between the
backends while timing.
"""
import argparse
import time

import numpy as np

from qworlds.bohm import available_backends, get_backend, sample_positions, two_packet_collision
from qworlds.bohm.core import pack


def timed(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        started = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - started)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    t_max = 5.0 if args.quick else 20.0
    n_ensemble = 16 if args.quick else 64
    state = two_packet_collision(marked=True)
    packed = pack(state)
    rng = np.random.default_rng(0)
    xs = np.sort(rng.uniform(-14.0, 14.0, size=4096))
    starts = sample_positions(state, n_ensemble, rng)

    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    rows = {}
    for name in backends:
        engine = get_backend(name)
        t_fields, fields_out = timed(lambda: engine.fields(packed, xs, 9.5))
        t_single, single_out = timed(
            lambda: engine.integrate(packed, -10.0, 0.0, t_max, 1e-3, 1e-12), repeat=1
        )
        t_batch, batch_out = timed(
            lambda: engine.integrate_batch(packed, starts, 0.0, t_max, 1e-3, 1e-12),
            repeat=1,
        )
        rows[name] = (t_fields, t_single, t_batch, fields_out, single_out, batch_out)
        print(f"{name:>9}:  fields(4096 pts) {t_fields * 1e3:8.2f} ms   "
              f"trajectory({int(t_max / 1e-3)} steps) {t_single:7.3f} s   "
              f"ensemble({n_ensemble}) {t_batch:7.3f} s")

    if len(backends) == 2:
        c, p = rows["compiled"], rows["pure"]
        print(f"{'speedup':>9}:  fields {p[0] / c[0]:14.1f}x   "
              f"trajectory {p[1] / c[1]:13.1f}x   ensemble {p[2] / c[2]:9.1f}x")
        dv = np.max(np.abs(c[3][0] - p[3][0]))
        dx = abs(c[4][1][-1] - p[4][1][-1])
        db = np.max(np.abs(c[5].x_final - p[5].x_final))
        print(f"agreement:  max |dv| {dv:.2e}   trajectory endpoint {dx:.2e}   "
              f"ensemble endpoints {db:.2e}")


if __name__ == "__main__":
    main()
