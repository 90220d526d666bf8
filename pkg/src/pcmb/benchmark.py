"""Backend benchmark: numba-compiled kernels vs the pure-numpy fallback.

Runs a fixed set of sweep workloads twice in subprocesses, once per
backend (the backend is chosen at import time from PCMB_BACKEND, so a
clean interpreter per run keeps the comparison honest), and prints the
timings side by side:

    python -m pcmb.benchmark [--quick]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = {
    "gcmb-ber-2x2-4qam": dict(scheme="pcmb", d=2, m=4, snr=12.0, trials=2000),
    "pc-joint-2x2-4qam": dict(scheme="pc", d=2, m=4, snr=12.0, trials=500),
    "fpmb-2x2-16qam": dict(scheme="fpmb", d=2, m=16, snr=12.0, trials=1000),
    "bicmb-gc-2x2-4qam": dict(scheme="bicmb-pc", d=2, m=4, snr=8.0, trials=20),
}

QUICK_SCALE = 0.1


def run_workloads(scale=1.0):
    """Execute the workloads in-process; returns {name: seconds}."""
    from . import harness

    results = {}
    for name, w in WORKLOADS.items():
        trials = max(2, int(w["trials"] * scale))
        cfg = harness.SimConfig(scheme=w["scheme"], d=w["d"], m=w["m"],
                                snr_db=(w["snr"],), max_trials=trials,
                                target_errors=10**9)
        harness.run_complexity_sweep(cfg)  # warm-up / compile
        t0 = time.perf_counter()
        harness.run_complexity_sweep(cfg)
        results[name] = time.perf_counter() - t0
    return results


def _child(backend, scale):
    env = dict(os.environ, PCMB_BACKEND=backend)
    code = (f"import json, pcmb.benchmark as b;"
            f"print(json.dumps(b.run_workloads({scale})))")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="scale workloads down 10x")
    args = parser.parse_args(argv)
    scale = QUICK_SCALE if args.quick else 1.0

    print("running numba backend ...", file=sys.stderr)
    fast = _child("numba", scale)
    print("running numpy backend ...", file=sys.stderr)
    slow = _child("numpy", scale)

    print(f"{'workload':28s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name in WORKLOADS:
        t_fast, t_slow = fast[name], slow[name]
        print(f"{name:28s} {t_fast:10.3f} {t_slow:10.3f} {t_slow / t_fast:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
