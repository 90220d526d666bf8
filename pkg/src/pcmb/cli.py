"""Command-line interface.

Subcommands:

* ``pcmb ber``         -- BER-vs-SNR sweep, CSV output
* ``pcmb complexity``  -- average real-multiplication sweep, CSV output
* ``pcmb validate``    -- run the invariant suite, nonzero exit on failure

Flags may also come from a config file of ``key = value`` lines (same
names as the long flags, dashes or underscores); explicit flags override
file values.
"""

import argparse
import sys

from . import harness
from .errors import PcmbError


def _parse_snr_list(text):
    parts = text.replace(",", " ").split()
    if not parts:
        raise argparse.ArgumentTypeError("empty SNR list")
    return tuple(float(p) for p in parts)


def _load_config_file(path):
    values = {}
    with open(path) as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise PcmbError(f"malformed config line: {line!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _add_sweep_args(sub):
    sub.add_argument("--config", help="key = value file mirroring the flags")
    sub.add_argument("--scheme", help="pc|gc|pcmb|gcmb|fpmb|uncoded-mb|bicmb-pc|bicmb-gc|bicmb-fp")
    sub.add_argument("--dim", type=int, help="system dimension (2 or 4)")
    sub.add_argument("--mod", type=int, help="QAM size (4, 16, 64, 256)")
    sub.add_argument("--snr", type=_parse_snr_list, help="SNR points in dB, comma separated")
    sub.add_argument("--seed", type=int, help="master seed (default 1)")
    sub.add_argument("--errors", type=int, help="target bit errors per point (default 200)")
    sub.add_argument("--max-trials", type=int, help="trial cap per point")
    sub.add_argument("--rate", help="convolutional code rate for coded schemes (1/2, 2/3, 4/5)")
    sub.add_argument("--precoder", help="unitary precoder file for fpmb / bicmb-fp")
    sub.add_argument("--out", help="output CSV path")
    sub.add_argument("--workers", type=int, help="worker threads across SNR points (default 1)")
    sub.add_argument("--frame-codewords", type=int, help="coded frame length in codewords")


_CASTS = {"dim": int, "mod": int, "seed": int, "errors": int,
          "max_trials": int, "workers": int, "frame_codewords": int,
          "snr": _parse_snr_list}


def _build_config(args):
    merged = {}
    if args.config:
        for key, val in _load_config_file(args.config).items():
            merged[key] = _CASTS.get(key, str)(val)
    for key in ("scheme", "dim", "mod", "snr", "seed", "errors", "max_trials",
                "rate", "precoder", "out", "workers", "frame_codewords"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if "scheme" not in merged:
        raise PcmbError("--scheme is required (flag or config file)")
    if "snr" not in merged:
        raise PcmbError("--snr is required (flag or config file)")
    return harness.SimConfig(
        scheme=merged["scheme"],
        d=merged.get("dim", 2),
        m=merged.get("mod", 4),
        snr_db=tuple(merged["snr"]),
        target_errors=merged.get("errors", harness.DEFAULT_TARGET_ERRORS),
        max_trials=merged.get("max_trials", harness.DEFAULT_MAX_TRIALS),
        seed=merged.get("seed", 1),
        rate=merged.get("rate", "2/3"),
        precoder_path=merged.get("precoder"),
        out_path=merged.get("out"),
        workers=merged.get("workers", 1),
        frame_codewords=merged.get("frame_codewords"),
    ).validated()


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="pcmb",
        description="Link-level simulator for space-time coded multiple beamforming")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("ber", "BER vs SNR sweep"),
                        ("complexity", "average real multiplications vs SNR")):
        sub = subs.add_parser(name, help=help_)
        _add_sweep_args(sub)
    subs.add_parser("validate", help="run the invariant suite")

    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            ok = harness.validate()
            return 0 if ok else 1
        cfg = _build_config(args)
        runner = (harness.run_ber_sweep if args.command == "ber"
                  else harness.run_complexity_sweep)
        records = runner(cfg)
        print(harness.CSV_HEADER)
        for r in records:
            print(harness.record_to_csv_row(r))
        if cfg.out_path:
            print(f"wrote {cfg.out_path}", file=sys.stderr)
        return 0
    except PcmbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
