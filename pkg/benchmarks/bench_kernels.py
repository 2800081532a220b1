"""Time the compiled and numpy kernel backends on pipeline-sized inputs.

    python benchmarks/bench_kernels.py --frames 600 --size 64 --threads 1 4
"""
import argparse
import time

import numpy as np
from scipy import signal

from skinpulse.ccnn import default_params
from skinpulse.kernels import backends
from skinpulse.pixel_signal import design_bandpass
from skinpulse.wavelet import real_sum_weights


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--frames", type=int, default=600)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--threads", type=int, nargs="+", default=[1])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    p = default_params()
    stim = p.stimulus(rng.uniform(-0.1, 0.3, (args.frames, args.size, args.size)))
    ccnn_args = (stim, p.decay, (p.v_f, p.v_l, p.v_e, p.beta), p.m_kernel, p.w_kernel, real_sum_weights())
    filt = design_bandpass(30.0)
    zi = signal.sosfilt_zi(filt.sos)
    rows = rng.normal(size=(args.size * args.size, args.frames))

    impls = backends()
    ref = {}
    print(f"{'kernel':<22}{'backend':<10}{'threads':>8}{'seconds':>10}{'max |diff|':>14}")
    for kernel in ("ccnn_patch_real_sums", "ccnn_window_real_sums", "sos_filter_rows"):
        for name, mod in impls.items():
            for threads in args.threads if name == "cython" else [1]:
                fn = getattr(mod, kernel)
                if kernel == "sos_filter_rows":
                    call = lambda: fn(filt.sos, zi, rows, filt.padlen, True, threads)  # noqa: E731
                else:
                    call = lambda: fn(*ccnn_args, threads=threads)  # noqa: E731
                sec, out = best_of(call, args.repeat)
                base = ref.setdefault(kernel, out)
                diff = float(np.max(np.abs(out - base)))
                print(f"{kernel:<22}{name:<10}{threads:>8}{sec:>10.3f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
