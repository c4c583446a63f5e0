"""Command-line entry point: ``esdp run | sweep | validate | oracle-check``.

Every output file carries the full configuration it was produced from, so
any emitted file can be re-executed exactly. Files are written to a temporary
name and renamed into place.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

import numpy as np

from .config import ConfigError, SimConfig, apply_overrides, config_dict, dump_config, load_config, parse_pairs
from .knapdp import cross_check
from .simulator import ConstraintViolation, Summary, aggregate, run_replications

log = logging.getLogger("esdp")

OUTPUT_ENV = "ESDP_OUTPUT_DIR"
DEFAULT_OUTPUT = "esdp-out"
TRACE_COLUMNS = ("t", "policy", "sw", "cum_sw", "oracle_value", "regret", "cum_regret", "wall_ns")
SWEEPABLE = ("arrival_prob", "edge_prob", "capacity_scale", "delta_variant", "g_variant", "alpha")

EXIT_CONFIG = 2
EXIT_VIOLATION = 3
EXIT_CHECK_FAILED = 4


# -- file helpers -------------------------------------------------------------

def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def config_header(cfg: SimConfig) -> str:
    return "".join(f"# {line}\n" for line in dump_config(cfg).splitlines())


def resolve_config_path(name: str | None):
    """A missing ``default.cfg`` falls back to the copy shipped with the package."""
    if name is None or Path(name).exists():
        return name
    if Path(name).name == name:
        packaged = resources.files("esdp").joinpath(name)
        if packaged.is_file():
            return packaged
    raise ConfigError(f"config: file {name!r} not found")


def output_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def _num(v) -> str:
    return repr(float(v))


def _jsonable(a):
    """Lists of floats with NaN mapped to null so the JSON stays strict."""
    return [None if math.isnan(v) else float(v) for v in np.asarray(a, dtype=float).ravel()]


# -- renderers ----------------------------------------------------------------

def trace_csv(cfg: SimConfig, result) -> str:
    buf = io.StringIO()
    buf.write(config_header(cfg))
    buf.write(f"# replication = {result.meta['replication']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    cum_sw, cum_regret = result.cum_sw, result.cum_regret
    for j in range(result.horizon):
        for i, p in enumerate(result.policies):
            w.writerow((j + 1, p, _num(result.sw[i, j]), _num(cum_sw[i, j]), _num(result.oracle_value[j]),
                        _num(result.regret[i, j]), _num(cum_regret[i, j]), int(result.wall_ns[i, j])))
    return buf.getvalue()


def stats_jsonl(result) -> str:
    return "".join(json.dumps(snap, sort_keys=True) + "\n" for snap in result.stats_trace)


def summary_dict(cfg: SimConfig, summary: Summary) -> dict:
    pols = summary.policies
    series = {
        name: {p: {"mean": _jsonable(summary.mean[name][i]), "std": _jsonable(summary.std[name][i])}
               for i, p in enumerate(pols)}
        for name in summary.mean
    }
    return {
        "config": config_dict(cfg),
        "seeds": [[cfg.seed, r] for r in range(cfg.replications)],
        "theorem1_probability": summary.meta["theorem1_probability"],
        "instances": summary.meta["instances"],
        "final_asw": summary.final("cum_sw"),
        "final_cum_regret": summary.final("cum_regret"),
        "final_ratio": {p: _jsonable(r[-1:])[0] for p, r in summary.ratio.items()},
        "series": series,
        "ratio": {p: _jsonable(r) for p, r in summary.ratio.items()},
    }


def report(summary: Summary, out=None):
    out = out or sys.stdout
    print("final ASW (seed mean):", file=out)
    for p, v in summary.final("cum_sw").items():
        print(f"  {p:<7s} {v:12.3f}", file=out)
    for p, r in summary.ratio.items():
        print(f"  esdp/{p:<5s} {r[-1]:8.3f}", file=out)


# -- experiments --------------------------------------------------------------

def execute(cfg: SimConfig, out: Path, write_traces: bool = True) -> Summary:
    results = run_replications(cfg)
    summary = aggregate(results)
    if write_traces:
        for res in results:
            r = res.meta["replication"]
            write_atomic(out / f"trace_rep{r}.csv", trace_csv(cfg, res))
            if cfg.trace_stats:
                write_atomic(out / f"stats_rep{r}.jsonl", stats_jsonl(res))
    write_atomic(out / "config.cfg", dump_config(cfg))
    write_atomic(out / "summary.json", json.dumps(summary_dict(cfg, summary), indent=1, sort_keys=True) + "\n")
    return summary


def build_config(args) -> SimConfig:
    cfg = load_config(resolve_config_path(args.config), args.set or ())
    extra = []
    if args.seed is not None:
        extra.append(f"seed={args.seed}")
    if args.reps is not None:
        extra.append(f"replications={args.reps}")
    if args.policies is not None:
        extra.append(f"policies={args.policies}")
    if getattr(args, "workers", None) is not None:
        extra.append(f"workers={args.workers}")
    return apply_overrides(cfg, extra)


@dataclasses.dataclass
class SweepSpec:
    param: str
    values: tuple
    base: SimConfig

    def points(self):
        for v in self.values:
            yield v, apply_overrides(self.base, [f"{self.param}={v}"])


def load_sweep(path, overrides=()) -> SweepSpec:
    """Sweep file: ``sweep = <key>``, ``values = a, b, ...``, optional ``config = <file>``,
    and any further ``key = value`` lines applied on top of the base config."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"sweep: cannot read {path}: {exc.strerror}") from None
    pairs = parse_pairs(text.splitlines())
    param = pairs.pop("sweep", None)
    raw_values = pairs.pop("values", None)
    base_file = pairs.pop("config", None)
    if param is None:
        raise ConfigError("sweep: missing 'sweep = <parameter>' line")
    if param not in SWEEPABLE:
        raise ConfigError(f"sweep: {param} cannot be swept; choose from {', '.join(SWEEPABLE)}")
    values = tuple(v.strip() for v in (raw_values or "").split(",") if v.strip())
    if not values:
        raise ConfigError("values: sweep grid is empty")
    if base_file is not None:
        beside = Path(path).parent / base_file
        base_file = beside if beside.exists() else resolve_config_path(base_file)
    base = load_config(base_file, [f"{k}={v}" for k, v in pairs.items()] + list(overrides))
    spec = SweepSpec(param, values, base)
    for _ in spec.points():  # validate every grid point before running anything
        pass
    return spec


# -- commands -----------------------------------------------------------------

def cmd_run(args) -> int:
    cfg = build_config(args)
    out = output_dir(args.out)
    summary = execute(cfg, out)
    report(summary)
    print(f"wrote {out}")
    return 0


def cmd_sweep(args) -> int:
    spec = load_sweep(args.sweep_file, args.set or ())
    out = output_dir(args.out)
    buf = io.StringIO()
    buf.write(config_header(spec.base))
    buf.write(f"# sweep = {spec.param}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((spec.param, "policy", "final_asw", "asw_std", "final_cum_regret", "esdp_ratio", "mean_wall_ns"))
    for k, (value, cfg) in enumerate(spec.points()):
        print(f"[{k + 1}/{len(spec.values)}] {spec.param} = {value}")
        point_dir = out / f"point{k:02d}_{spec.param}={value}"
        summary = execute(cfg, point_dir, write_traces=args.traces)
        report(summary)
        for i, p in enumerate(summary.policies):
            ratio = summary.ratio.get(p)
            w.writerow((value, p, _num(summary.mean["cum_sw"][i, -1]), _num(summary.std["cum_sw"][i, -1]),
                        _num(summary.mean["cum_regret"][i, -1]),
                        "" if ratio is None else _num(ratio[-1]), _num(summary.meta["mean_wall_ns"][p])))
    write_atomic(out / "sweep.csv", buf.getvalue())
    print(f"wrote {out}")
    return 0


def cmd_validate(args) -> int:
    cfg = build_config(args)
    sys.stdout.write(dump_config(cfg))
    print("config ok")
    return 0


def cmd_oracle_check(args) -> int:
    bad = cross_check(args.n, seed=args.seed)
    for i in bad:
        print(f"FAIL instance {i}")
    print(f"{args.n - len(bad)}/{args.n} instances agree")
    return 0 if not bad else EXIT_CHECK_FAILED


# -- argument parsing ---------------------------------------------------------

def _add_config_flags(p, with_config=True):
    if with_config:
        p.add_argument("--config", help="key = value configuration file (default.cfg ships with the package)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one configuration key")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int, help="number of replications")
    p.add_argument("--policies", help="comma-separated subset of esdp,hswf,lcf,lwtf,oracle")
    p.add_argument("--workers", type=int, help="parallel replications")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esdp", description="Online job dispatch simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate every policy over seed replications")
    _add_config_flags(p)
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat a run over a grid of one parameter")
    p.add_argument("sweep_file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one base configuration key")
    p.add_argument("--out")
    p.add_argument("--no-traces", dest="traces", action="store_false", help="skip per-replication trace files")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="parse a configuration and print it back")
    _add_config_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle-check", help="compare the DP against enumeration on random instances")
    p.add_argument("-n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConstraintViolation as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
