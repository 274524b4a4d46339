"""Command-line entry point: ``roughbdg run|selftest|list-experiments``.

Exit codes: 0 success, 1 self-test failure, 2 config schema violation,
3 numeric failure, 4 unsupported configuration or violated precondition.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import jsonschema

from . import __version__
from .errors import InputError, NumericError, UnsupportedConfigurationError

OUT_ENV = "ROUGHBDG_OUT"
EXIT_SCHEMA, EXIT_NUMERIC, EXIT_UNSUPPORTED = 2, 3, 4


def _error(category: str, message: str, code: int) -> int:
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)
    return code


def cmd_run(args) -> int:
    from .config import load_config, resolve, run_config

    try:
        raw = load_config(args.config)
        cfg = resolve(raw, {"seed": args.seed, "workers": args.workers, "out": args.out, "format": args.format})
    except OSError as exc:
        return _error("schema", f"cannot read config: {exc}", EXIT_SCHEMA)
    except jsonschema.ValidationError as exc:
        return _error("schema", exc.message, EXIT_SCHEMA)
    except (UnsupportedConfigurationError, InputError) as exc:
        return _error("unsupported", str(exc), EXIT_UNSUPPORTED)

    out_dir = Path(cfg["output"].get("dir") or os.environ.get(OUT_ENV) or "roughbdg_out")
    try:
        report = run_config(cfg)
    except NumericError as exc:
        return _error("numeric", f"{exc} (residual {exc.residual})", EXIT_NUMERIC)
    except (UnsupportedConfigurationError, InputError) as exc:
        return _error("unsupported", str(exc), EXIT_UNSUPPORTED)

    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = cfg["output"]["format"]
    written = []
    if fmt in ("json", "both"):
        (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
        written.append("report.json")
    if fmt in ("csv", "both"):
        with open(out_dir / "report.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(report.to_csv())
        written.append("report.csv")
    echo = {k: v for k, v in cfg.items() if k != "output"}
    echo["output"] = {"format": fmt}
    manifest = {
        "schema_version": 1,
        "experiment": cfg["experiment"],
        "seed": cfg["seed"],
        "code_version": __version__,
        "config": echo,
        "files": written,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(str(out_dir))
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all()
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status} {r.name}: {r.passed}/{r.total} ({r.seconds:.2f} s)")
    failed = [r.name for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    return 1 if failed else 0


def cmd_list(args) -> int:
    from .experiments import REGISTRY

    for name, fn in REGISTRY.items():
        doc = (fn.__doc__ or "").strip().splitlines()
        print(f"{name}\t{doc[0] if doc else ''}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughbdg", description="Enhanced-martingale BDG experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./roughbdg_out)")
    run.add_argument("--format", choices=["json", "csv", "both"])
    run.set_defaults(func=cmd_run)
    st = sub.add_parser("selftest", help="run the deterministic property suites")
    st.set_defaults(func=cmd_selftest)
    ls = sub.add_parser("list-experiments", help="list available experiments")
    ls.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
