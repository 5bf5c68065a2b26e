"""``dtsched`` command line: plan, run, benchmark, compare.

Exit codes: 0 success, 1 bad input or configuration, 2 infeasible plan,
3 rescheduling failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .decision import LookaheadConfig, benchmark_schedule, open_loop_optimal
from .errors import DtschedError, Infeasible, MismatchedFixtures, NotFound
from .planning import init_model, load_disturbances
from .pta import MachineSpec, OrderSpec
from .records import RESCHEDULING_FAILURE, RunLog
from .simulate import compare, run_fixed, run_llp, timeline_csv
from .store import RunStore
from .tariff import load_prices

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_RESCHEDULE = 0, 1, 2, 3


@dataclass
class CliConfig:
    machine_path: Path | None = None
    order_path: Path | None = None
    prices_path: Path | None = None
    disturbances_path: Path | None = None
    window: int = 2
    out: Path | None = None
    fmt: str = "json"
    data_dir: Path = Path("dtsched-data")
    against: str | None = None
    runs: tuple = ()


class InputError(DtschedError):
    pass


def _read_json(path, what):
    if path is None:
        raise InputError(f"--{what} is required")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"--{what}: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"--{what}: {path} is not valid JSON ({exc})") from None


def _load_inputs(cfg: CliConfig):
    machine = MachineSpec.from_dict(_read_json(cfg.machine_path, "machine"))
    order = OrderSpec.from_dict(_read_json(cfg.order_path, "order"))
    if cfg.prices_path is None:
        raise InputError("--prices is required")
    try:
        prices = load_prices(cfg.prices_path)
    except OSError as exc:
        raise InputError(f"--prices: cannot read {cfg.prices_path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"--prices: not valid JSON ({exc})") from None
    return machine, order, prices


def _emit(cfg: CliConfig, text: str, path: Path | None = None):
    path = path or cfg.out
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _emit_log(cfg: CliConfig, log: RunLog):
    _emit(cfg, timeline_csv(log) if cfg.fmt == "csv" else log.to_json())


def cmd_plan(cfg: CliConfig) -> int:
    machine, order, prices = _load_inputs(cfg)
    model = init_model(machine, order)
    try:
        s, cost = open_loop_optimal(model, prices)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(cfg, json.dumps({"schedule": list(s), "cost": cost}, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_run(cfg: CliConfig) -> int:
    machine, order, prices = _load_inputs(cfg)
    dists = load_disturbances(cfg.disturbances_path) if cfg.disturbances_path else ()
    log = run_llp(machine, order, prices, LookaheadConfig(cfg.window), dists)
    store = RunStore(cfg.data_dir)
    store.append_tariff(prices)
    rid = store.append_run(log)
    print(f"run {rid}: {log.outcome}, schedule {list(log.schedule)}, "
          f"cost {log.totals.cost:.6g}", file=sys.stderr)
    _emit_log(cfg, log)
    return EXIT_RESCHEDULE if log.outcome == RESCHEDULING_FAILURE else EXIT_OK


def cmd_benchmark(cfg: CliConfig) -> int:
    machine, order, prices = _load_inputs(cfg)
    try:
        s = benchmark_schedule(init_model(machine, order))
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    log = run_fixed(machine, order, prices, s)
    rid = RunStore(cfg.data_dir).append_run(log)
    print(f"run {rid}: benchmark {list(s)}, cost {log.totals.cost:.6g}", file=sys.stderr)
    _emit_log(cfg, log)
    return EXIT_OK


def _resolve_run(ref: str, store: RunStore) -> RunLog:
    if ref.isdigit():
        try:
            return store.load_run(int(ref))
        except NotFound:
            raise InputError(f"no run {ref} in {store.root}") from None
    try:
        return RunLog.from_json(Path(ref).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read run {ref}: {exc.strerror}") from None
    except (ValueError, KeyError) as exc:
        raise InputError(f"{ref} is not a run log ({exc})") from None


def cmd_compare(cfg: CliConfig, run_a: str | None = None, run_b: str | None = None) -> int:
    store = RunStore(cfg.data_dir)
    if cfg.against == "benchmark":
        machine, order, prices = _load_inputs(cfg)
        if run_a is None:
            a = run_llp(machine, order, prices, LookaheadConfig(cfg.window))
        else:
            a = _resolve_run(run_a, store)
        b = run_fixed(machine, order, prices, benchmark_schedule(init_model(machine, order)))
        names = ("a", "benchmark")
    else:
        if run_a is None or run_b is None:
            raise InputError("compare needs two runs, or --against benchmark")
        a, b = _resolve_run(run_a, store), _resolve_run(run_b, store)
        names = ("a", "b")
    report = compare(a, b, names)
    _emit(cfg, json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n")
    if cfg.fmt == "csv":
        base = Path(cfg.out) if cfg.out else Path("comparison.json")
        for name, log in report.runs.items():
            _emit(cfg, timeline_csv(log), base.with_name(f"{base.stem}_{name}.csv"))
    print(f"savings {report.savings_percent:.4f}%", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dtsched", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["plan", "run", "benchmark", "compare"])
    p.add_argument("runs", nargs="*", help="compare: run ids or run-log JSON paths")
    p.add_argument("--machine", type=Path)
    p.add_argument("--order", type=Path)
    p.add_argument("--prices", type=Path)
    p.add_argument("--disturbances", type=Path)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--data-dir", type=Path, default=Path("dtsched-data"))
    p.add_argument("--against", choices=["benchmark"])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = CliConfig(
        machine_path=args.machine,
        order_path=args.order,
        prices_path=args.prices,
        disturbances_path=args.disturbances,
        window=args.window,
        out=args.out,
        fmt=args.format,
        data_dir=args.data_dir,
        against=args.against,
        runs=tuple(args.runs),
    )
    try:
        if cfg.window < 1:
            raise InputError("--window must be >= 1")
        if args.command == "plan":
            return cmd_plan(cfg)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "benchmark":
            return cmd_benchmark(cfg)
        runs = list(cfg.runs) + [None, None]
        return cmd_compare(cfg, runs[0], runs[1])
    except MismatchedFixtures as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DtschedError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
