"""Command line driver: `dunkl-czo-lab run` and `dunkl-czo-lab summary`."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import reports
from .errors import ConfigError, LabError, MissingReports
from .geometry import RootSystemSpec, load_root_system, preset, root_system_from_dict
from .suites import BUDGETS, SUITES, SuiteSettings, run_suite


@dataclass
class RunConfig:
    group: object = "z2"          # preset name, path to a JSON description, or the description itself
    kappa: list | None = None
    symbol: dict = field(default_factory=lambda: {"name": "smooth_invariant"})
    suites: list = field(default_factory=lambda: ["all"])
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "reports"
    budget: str = "quick"

    def __post_init__(self):
        if isinstance(self.suites, str):
            self.suites = [self.suites]
        bad = [s for s in self.suites if s != "all" and s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}; choose from {list(SUITES)} or 'all'")
        if self.kappa is not None:
            self.kappa = [float(k) for k in self.kappa]
            if any(k < 0 for k in self.kappa):
                raise ConfigError("kappa must be nonnegative")
        if self.budget not in BUDGETS:
            raise ConfigError(f"budget must be one of {sorted(BUDGETS)}")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")

    @property
    def suite_list(self) -> list:
        return list(SUITES) if "all" in self.suites else list(dict.fromkeys(self.suites))

    def root_system(self) -> RootSystemSpec:
        g = self.group
        kap = None if self.kappa is None else (self.kappa[0] if len(self.kappa) == 1 else self.kappa)
        if isinstance(g, dict):
            d = dict(g)
            if kap is not None:
                d["kappa"] = self.kappa
            return root_system_from_dict(d)
        if isinstance(g, str) and g.endswith(".json"):
            spec = load_root_system(g)
            if kap is None:
                return spec
            d = spec.to_dict()
            d["kappa"] = self.kappa
            return root_system_from_dict(d)
        return preset(str(g), kap)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    if isinstance(data.get("group"), str) and data["group"].endswith(".json"):
        # group files are resolved relative to the config file
        gp = Path(data["group"])
        if not gp.is_absolute():
            data["group"] = str(Path(path).parent / gp)
    return RunConfig(**data)


def _parse_kappa(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --kappa value {text!r}") from exc


def build_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {}
    if args.suite:
        over["suites"] = [s for part in args.suite for s in part.split(",") if s]
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out is not None:
        over["out"] = args.out
    if args.kappa is not None:
        over["kappa"] = _parse_kappa(args.kappa)
    if args.group is not None:
        over["group"] = args.group
    if args.budget is not None:
        over["budget"] = args.budget
    return RunConfig(**{**asdict(cfg), **over})


def run(cfg: RunConfig, stream=None) -> tuple[int, Path]:
    stream = stream or sys.stdout
    spec = cfg.root_system()
    settings = SuiteSettings(spec, cfg.symbol, cfg.seed, cfg.budget, cfg.tolerances)
    run_dir = reports.new_run_dir(cfg.out)
    record = {**asdict(cfg), "root_system": spec.to_dict()}
    record.pop("out")
    results = []
    for name in cfg.suite_list:
        try:
            result = run_suite(name, settings)
        except LabError as exc:
            raise type(exc)(f"suite {name}: {exc}") from exc
        reports.write_suite(run_dir, result, record)
        results.append(result)
        for c in result.checks:
            print(f"[{name}] {c.status.upper():5s} {c.name} = {c.value:.4g} (tol {c.tolerance:.3g})", file=stream)
    code = reports.exit_status(results)
    print(f"reports written to {run_dir} (exit {code})", file=stream)
    return code, run_dir


def summary(out, stream=None) -> int:
    stream = stream or sys.stdout
    run_dir = reports.latest_run(out)
    rows = reports.load_rows(run_dir)
    print(f"run {run_dir}", file=stream)
    print(reports.summary_table(rows), file=stream)
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dunkl-czo-lab", description="Dunkl commutator verification lab")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run verification suites and write reports")
    r.add_argument("--config", help="JSON configuration file")
    r.add_argument("--suite", action="append", help=f"suite name ({', '.join(SUITES)} or all); repeatable")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="report root directory")
    r.add_argument("--kappa", help="comma-separated multiplicities")
    r.add_argument("--group", help="preset name (z2, z2xz2, b2, i2_6, z2^N) or JSON file")
    r.add_argument("--budget", choices=sorted(BUDGETS), help="probe and grid sizes")
    s = sub.add_parser("summary", help="print the newest report run as a table")
    s.add_argument("--out", default="reports", help="report root directory")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "run":
            code, _ = run(build_config(args))
            return code
        return summary(args.out)
    except (ConfigError, MissingReports) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
