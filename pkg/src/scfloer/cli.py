"""Experiment runner: every verification suite as a subcommand.

Usage: ``scfloer <suite> [--config PATH] [--out DIR] [--seed N] [--jobs N]``
with suites scales-check, linop-index, floer-solve, glue-identities,
verify-iia, verify-iib, index-sweep, germ-build, contraction, picard-glue,
and full-report (all of them, plus the acceptance summary).

Exit codes: 0 pass, 2 config error, 3 and up: one distinct code per failing
suite (see EXIT_CODES).  Artifacts are deterministic CSV/JSON keyed by the
config hash; headers are documented in docs/formats.md.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, DEFAULTS, dump_config, load_config, validate_config
from .reports import config_hash, write_json
from .suites import SUITES, run_suite

SUITE_ORDER = [
    "scales-check",
    "linop-index",
    "floer-solve",
    "glue-identities",
    "verify-iia",
    "verify-iib",
    "index-sweep",
    "germ-build",
    "contraction",
    "picard-glue",
]

EXIT_CODES = {name: 3 + i for i, name in enumerate(SUITE_ORDER)}
EXIT_CODES["full-report"] = 13


def _load(args) -> dict:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = validate_config({})
    if args.seed is not None:
        cfg["run"]["seed"] = args.seed
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scfloer",
        description="Scale-calculus Fredholm and Floer-gluing verification suites",
    )
    parser.add_argument("suite", choices=SUITE_ORDER + ["full-report", "print-config"])
    parser.add_argument("--config", type=Path, default=None, help="TOML config path")
    parser.add_argument("--out", type=Path, default=None, help="artifact directory")
    parser.add_argument("--seed", type=int, default=None, help="override [run] seed")
    parser.add_argument("--jobs", type=int, default=1,
                        help="accepted for interface stability; suites run serially "
                             "so artifacts are byte-deterministic")
    args = parser.parse_args(argv)

    if args.suite == "print-config":
        print(dump_config(validate_config({})), end="")
        return 0

    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    chash = config_hash(dump_config(cfg))
    outdir = args.out
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)

    names = SUITE_ORDER if args.suite == "full-report" else [args.suite]
    results = []
    for name in names:
        sub = (outdir / name.replace("-", "_")) if outdir is not None else None
        res = run_suite(name, cfg, outdir=sub, seed=cfg["run"]["seed"])
        results.append(res)
        status = "pass" if res.ok else "FAIL"
        print(f"[{name}] {status} ({res.elapsed:.1f} s, config {chash})")
        for line in res.lines():
            print(f"  {line}")

    all_criteria = sorted(
        (c for res in results for c in res.criteria), key=lambda c: c.cid
    )
    if args.suite == "full-report":
        print("acceptance summary:")
        for c in all_criteria:
            print(f"  {c.text()}")
    if outdir is not None:
        write_json(outdir / "summary.json", {
            "config_hash": chash,
            "suites": {res.name: {"ok": res.ok, "lines": res.lines()} for res in results},
            "criteria": {c.cid: {"passed": c.passed, "detail": c.detail}
                         for c in all_criteria},
        })
        (outdir / "config_used.toml").write_text(dump_config(cfg))

    failing = [res for res in results if not res.ok]
    if not failing:
        return 0
    if args.suite == "full-report":
        return EXIT_CODES["full-report"]
    return EXIT_CODES[failing[0].name]


if __name__ == "__main__":
    sys.exit(main())
