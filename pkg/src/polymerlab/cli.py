"""Command-line entry point: ``polymerlab <command> [options]``.

Commands write their outputs into ``--out DIR`` together with a
``manifest.json`` recording the code version and a hash of the effective
configuration.  Without ``--out`` the small commands print JSON to stdout.
Exit status: 0 on success, 1 on a failed invariant or runtime error, 2 on a
usage error (bad flags, unknown suite, malformed config).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, PolymerLabError
from .lattice import SquareLattice

log = logging.getLogger("polymerlab")

MANIFEST_SCHEMA_VERSION = 1
CONFIG_HELP = "see the 'Configuration' section of the README for the config schema"


class UsageError(Exception):
    pass


def _u64(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}; {CONFIG_HELP}") from exc
    if not isinstance(cfg, dict):
        raise UsageError(f"malformed config {path}: top level must be a JSON object; {CONFIG_HELP}")
    return cfg


def _model(args):
    """Weight model from ``--config`` (model keys only) or from ``--gamma``; ``--seed`` overrides."""
    from .weights import WeightModel

    try:
        if args.config:
            model = WeightModel.from_config(_load_config(args.config))
        else:
            model = WeightModel.mixed(args.gamma, 0)
    except ConfigurationError as exc:
        raise UsageError(f"{exc}; {CONFIG_HELP}") from exc
    if args.seed is not None:
        model = model.with_seed(args.seed)
    return model


def _lattice(args):
    """Lattice from ``--lattice FILE`` or sampled from the model at side ``--n``."""
    from .weights import assign_weights

    if getattr(args, "lattice", None):
        try:
            lat = SquareLattice.from_json(Path(args.lattice).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load lattice {args.lattice}: {exc}") from exc
        return lat, {"lattice_file": str(args.lattice), "lattice_hash": _config_hash(lat.to_dict())}
    if args.n is None:
        raise UsageError("give --n or --lattice")
    model = _model(args)
    return assign_weights(model, args.n, args.replica), {**model.to_config(), "n": args.n, "replica": args.replica}


def _emit(args, command, config, files, stdout_payload=None):
    """Write ``files`` (name -> text) and a manifest into ``--out``, or print ``stdout_payload``."""
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config": config,
        "config_hash": _config_hash(config),
        "files": sorted(files),
    }
    if args.out is None:
        payload = stdout_payload if stdout_payload is not None else {}
        print(json.dumps({**manifest, "result": payload}, indent=2, default=float))
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {', '.join(sorted(files))} to {out}")


def _json(obj):
    return json.dumps(obj, indent=2, default=float) + "\n"


# -- commands ----------------------------------------------------------------------------


def cmd_build(args):
    lat, cfg = _lattice(args)
    text = lat.to_json()
    _emit(args, "build", cfg, {"lattice.json": text + "\n"}, json.loads(text))
    return 0


def cmd_spectrum(args):
    from .spectra import spectral_summary

    lat, cfg = _lattice(args)
    k = args.k or 1
    summary = spectral_summary(lat, k_max=min(k, lat.n * lat.n))
    cfg = {**cfg, "k": k}
    d = summary.to_dict()
    _emit(args, "spectrum", cfg, {"spectrum.json": _json(d)}, d)
    return 0


def cmd_polymer(args):
    from .polymer import f_table, nonintersecting_Z

    lat, cfg = _lattice(args)
    k = args.k or 1
    if not 1 <= k <= lat.n:
        raise UsageError(f"--k must lie in [1, n={lat.n}]")
    values = {}
    for j in range(1, k + 1):
        z = nonintersecting_Z(lat, j)
        values[str(j)] = {"sign": z.sign, "logmag": z.logmag}
    table = f_table(lat, (1, 1))
    d = {"n": lat.n, "corner_Z": values}
    _emit(args, "polymer", {**cfg, "k": k}, {"polymer.json": _json(d), "table_1_1.csv": table.to_csv()}, d)
    return 0


def cmd_surgery(args):
    from .combinatorics.instances import random_nonintersecting_tuple
    from .combinatorics.surgery import lift_to_corner

    n, k, cases = args.n or 8, args.k or 2, args.cases or 10
    seed = args.seed or 0
    rng = np.random.default_rng([seed, n, k])
    reports, failures = [], []
    for case in range(cases):
        tup = random_nonintersecting_tuple(rng, n, k)
        try:
            _, rep = lift_to_corner(tup, n)
        except PolymerLabError as exc:
            failures.append({"case": case, "input": tup.to_dict(), "error": str(exc),
                             "trace": getattr(exc, "trace", None)})
            continue
        reports.append(rep.to_dict(include_trace=args.trace))
    summary = {
        "cases": cases,
        "failures": len(failures),
        "max_removed_edges": max((r["removed_edges"] for r in reports), default=0),
        "max_rounds": max((r["rounds"] for r in reports), default=0),
    }
    payload = {"summary": summary, "reports": reports, "failures": failures}
    _emit(args, "surgery", {"n": n, "k": k, "cases": cases, "seed": seed, "trace": args.trace},
          {"surgery.json": _json(payload)}, payload if args.out is None and cases <= 20 else summary)
    return 0 if not failures else 1


def cmd_verify(args):
    from .verify import SUITES, run_suite

    name = args.suite_pos or args.suite
    if name is None:
        raise UsageError("give a suite name")
    if name not in SUITES + ("all",):
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}, all")
    names = SUITES if name == "all" else (name,)
    results = []
    for s in names:
        res = run_suite(s, n=args.n, k=args.k, cases=args.cases, seed=args.seed or 0)
        print(res.line(), file=sys.stderr if args.out is None else sys.stdout)
        results.append(res.to_dict())
    passed = all(r["passed"] for r in results)
    payload = {"passed": passed, "suites": results}
    cfg = {"suite": name, "n": args.n, "k": args.k, "cases": args.cases, "seed": args.seed or 0}
    _emit(args, "verify", cfg, {"verify.json": _json(payload)}, payload)
    return 0 if passed else 1


def _experiment(args):
    from .fluctuations import ExperimentConfig

    if not args.config:
        raise UsageError(f"mc needs --config; {CONFIG_HELP}")
    raw = _load_config(args.config)
    if args.seed is not None:
        raw = {**raw, "seed": args.seed}
    if args.threads is not None:
        raw = {**raw, "threads": args.threads}
    try:
        return ExperimentConfig.from_dict(raw)
    except ConfigurationError as exc:
        raise UsageError(f"{exc}; {CONFIG_HELP}") from exc


def cmd_mc(args):
    from .fluctuations import ensemble_report, records_to_csv, run_ensemble, timings_to_csv

    cfg = _experiment(args)
    if args.out is None:
        args.out = cfg.output
    if args.out is None:
        raise UsageError("mc needs --out DIR (or an 'output' entry in the config)")
    records = run_ensemble(cfg)
    gamma = cfg.model.gamma if cfg.model.kind == "mixed" else None
    report = ensemble_report(records, cfg)
    files = {
        "records.csv": records_to_csv(records, gamma),
        "timings.csv": timings_to_csv(records),
        "report.json": _json(report),
    }
    _emit(args, "mc", cfg.to_dict(), files)
    return 0


def cmd_report(args):
    from .fluctuations import plot_data_csv, records_from_csv

    if not args.records:
        raise UsageError("report needs --records FILE")
    try:
        records = records_from_csv(Path(args.records).read_text())
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read records {args.records}: {exc}") from exc
    if not records:
        raise UsageError(f"{args.records} holds no records")
    if args.config:
        model = _model(args)
        if model.kind != "mixed":
            raise UsageError("report rescaling needs the mixed model")
        gamma = model.gamma
    else:
        gamma = args.gamma
    text = plot_data_csv(records, gamma)
    cfg = {"records_hash": hashlib.sha256(Path(args.records).read_bytes()).hexdigest()[:16], "gamma": gamma}
    if args.out is None:
        sys.stdout.write(text)
        return 0
    _emit(args, "report", cfg, {"plot_data.csv": text})
    return 0


COMMANDS = {
    "build": (cmd_build, "sample a weighted lattice and write it as JSON"),
    "spectrum": (cmd_spectrum, "spectral summary of one lattice"),
    "polymer": (cmd_polymer, "corner partition functions of one lattice"),
    "surgery": (cmd_surgery, "lift random non-intersecting tuples to the corner, with step traces"),
    "verify": (cmd_verify, "run invariant batteries against independent oracles"),
    "mc": (cmd_mc, "Monte Carlo ensemble from a JSON config"),
    "report": (cmd_report, "plot-data CSV from a records CSV"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--threads", type=_positive, help="worker processes")
    common.add_argument("--n", type=_positive, help="lattice side")
    common.add_argument("--k", type=_positive, help="order / number of paths")
    common.add_argument("--cases", type=_positive, help="number of instances")
    common.add_argument("--suite", help="verification suite")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="polymerlab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_)
        if name in ("build", "spectrum", "polymer"):
            p.add_argument("--gamma", type=float, default=0.5, help="mixed-model gamma when no config is given")
            p.add_argument("--replica", type=int, default=0)
            if name != "build":
                p.add_argument("--lattice", metavar="FILE", help="lattice JSON written by build")
        if name == "surgery":
            p.add_argument("--trace", action="store_true", help="include step traces in the reports")
        if name == "verify":
            p.add_argument("suite_pos", nargs="?", metavar="SUITE", help="duality, inverse, lgv, sandwich, surgery or all")
        if name == "report":
            p.add_argument("--records", metavar="FILE", help="records CSV written by mc")
            p.add_argument("--gamma", type=float, default=0.5)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"polymerlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except PolymerLabError as exc:
        print(f"polymerlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
