"""
Command line for ktree-bounds.

    ktree-bounds bounds --m 2^64 --k 8 --n 65536
    ktree-bounds solve --m 2^32 --k 4 --n 1626 --seed 7
    ktree-bounds experiment --m 2^32 --k 8 --c 1 --trials 1000
    ktree-bounds search --m 2^64 --k 4 --target 0.99 --criterion ub
    ktree-bounds sweep --m 2^64 --k 4 --c-grid 0.5,1,2 --format csv
    ktree-bounds complexity --m 2^64 --k-grid 4,8,16 --target 0.01
    ktree-bounds schema
"""

import argparse
import csv
import io
import json
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger
from pydantic import BaseModel, ValidationError

from . import __version__
from .bounds import compute_bounds, prob_bounds
from .config import KTreeSettings, load_settings
from .dump import dump_run
from .errors import KTreeError, ParameterError
from .harness import complexity_at_target, n_for_c, run_trials, search_n, sweep
from .models import Criterion, OutputRecord, Side, SumMode
from .params import ProblemParams, check_params, parse_modulus
from .solver import generate_lists, run_ktree, verify_solution

__all__ = ["main", "build_parser", "SWEEP_CSV_COLUMNS"]

SWEEP_CSV_COLUMNS = [
    "n",
    "c",
    "prob_lb",
    "prob_ub",
    "prob_analytic_lb",
    "prob_analytic_ub",
    "size_lb",
    "size_ub",
    "emp_rate",
    "emp_ci99",
    "emp_total_size_mean",
    "emp_total_size_std",
    "emp_max_level_mean",
]


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", required=True, help="range size, decimal or 2^b[+-c]")
    common.add_argument("--mode", choices=[m.value for m in SumMode], default=SumMode.INTEGER.value)
    common.add_argument("--precision", type=int, default=None, help="working precision in bits")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")
    common.add_argument("--digits", type=int, default=None, help="significant digits of decimals")
    common.add_argument("--config", type=Path, default=None, help="YAML settings file")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    common.add_argument("--timing", action="store_true", help="add wall-clock timing to the output")

    single_k = argparse.ArgumentParser(add_help=False)
    single_k.add_argument("--k", type=int, required=True, help="number of lists, a power of 2")

    size = argparse.ArgumentParser(add_help=False)
    group = size.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int, help="input list size")
    group.add_argument("--c", type=float, help="relative list size n*p")

    trials = argparse.ArgumentParser(add_help=False)
    trials.add_argument("--trials", type=int, default=None)
    trials.add_argument("--seed", type=int, default=None)
    trials.add_argument("--parallelism", type=int, default=None)

    parser = argparse.ArgumentParser(
        prog="ktree-bounds",
        description="Bounds and experiments for the k-Tree algorithm",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common, single_k, size], help="probability and size bounds")
    p.add_argument("--analytic", action="store_true", help="add the closed-form bounds")

    p = sub.add_parser("solve", parents=[common, single_k, size], help="run the solver once")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dump", type=Path, default=None, help="write a binary dump of the run")

    sub.add_parser(
        "experiment", parents=[common, single_k, size, trials], help="Monte-Carlo success rate"
    )

    p = sub.add_parser("search", parents=[common, single_k, trials], help="smallest n reaching a target")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--criterion", choices=[c.value for c in Criterion], default=Criterion.LOWER.value)
    p.add_argument("--n-max", type=int, default=None)

    p = sub.add_parser("sweep", parents=[common, single_k, trials], help="bounds over a grid of n")
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--c-grid", type=_float_list, help="comma-separated c values")
    grid.add_argument("--n-grid", type=_int_list, help="comma-separated n values")
    p.add_argument("--empirical", action="store_true", help="add Monte-Carlo results per row")

    p = sub.add_parser("complexity", parents=[common], help="provable complexity per k")
    p.add_argument("--k-grid", type=_int_list, required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--side", choices=[s.value for s in Side], default=Side.SUFFICIENT.value)
    p.add_argument("--n-max", type=int, default=None)

    sub.add_parser("schema", help="print the JSON schema of the output records")
    return parser


class _Run:
    """Resolved arguments of one invocation."""

    def __init__(self, args: argparse.Namespace, settings: KTreeSettings):
        self.args = args
        self.settings = settings
        self.m = parse_modulus(args.m)
        self.mode = SumMode(args.mode)
        self.bits = args.precision if args.precision is not None else settings.precision_bits
        self.digits = args.digits if args.digits is not None else settings.decimal_digits
        if self.bits < 64:
            raise ParameterError(f"precision must be >= 64 bits, got {self.bits}")
        if self.digits < 1:
            raise ParameterError(f"digits must be >= 1, got {self.digits}")

    def opt(self, name: str):
        value = getattr(self.args, name, None)
        return getattr(self.settings, name) if value is None else value

    @property
    def context(self) -> Dict[str, Any]:
        return {"digits": self.digits}

    def dump(self, model: BaseModel) -> Dict[str, Any]:
        return model.model_dump(mode="json", by_alias=True, exclude_none=True, context=self.context)

    def params(self, n: Optional[int] = None) -> ProblemParams:
        k = self.args.k
        check_params(self.m, k, self.mode)
        if n is None:
            n = self.args.n if self.args.n is not None else n_for_c(self.m, k, self.args.c)
        return ProblemParams(m=self.m, k=k, n=n, mode=self.mode, precision_bits=self.bits)

    def echo(self, **extra) -> Dict[str, Any]:
        data = {"m": str(self.m), "mode": self.mode.value, "precisionBits": self.bits}
        if self.m & (self.m - 1) == 0:
            data["mPow2"] = f"2^{self.m.bit_length() - 1}"
        data.update({key: value for key, value in extra.items() if value is not None})
        return data


def _bound_cells(pair: Optional[Dict[str, Any]]) -> List[str]:
    if pair is None:
        return ["", ""]
    return [pair["lower"]["decimal"], pair["upper"]["decimal"]]


def _cmd_bounds(run: _Run):
    params = run.params()
    report = compute_bounds(params, analytic=run.args.analytic)
    results = run.dump(report)
    record = OutputRecord(
        command="bounds",
        params=params.echo(),
        results=results,
        flags=report.flags.model_dump(by_alias=True),
    )
    header = ["n", "prob_lb", "prob_ub", "prob_analytic_lb", "prob_analytic_ub",
              "size_lb", "size_ub", "size_analytic_lb", "size_analytic_ub"]
    row = (
        [params.n]
        + _bound_cells(results["prob"])
        + _bound_cells(results.get("analyticProb"))
        + _bound_cells(results["size"])
        + _bound_cells(results.get("analyticSize"))
    )
    return record, header, [row]


def _cmd_solve(run: _Run):
    params = run.params()
    seed = run.opt("seed")
    lists = generate_lists(params, seed)
    trace = run_ktree(params, lists, run.settings.memory_cap)
    if run.args.dump is not None:
        dump_run(run.args.dump, params, lists, trace)
    results = {"trace": run.dump(trace)}
    if trace.success:
        results["verified"] = verify_solution(lists, trace.solution_indices, params)
    record = OutputRecord(command="solve", params={**params.echo(), "seed": seed}, results=results)
    header = ["success", "zero_count", "total_size", "max_level_size", "solution_indices"]
    indices = " ".join(str(i) for i in trace.solution_indices or [])
    row = [int(trace.success), trace.zero_count, trace.total_size, trace.max_level_size, indices]
    return record, header, [row]


def _cmd_experiment(run: _Run):
    params = run.params()
    seed = run.opt("seed")
    summary = run_trials(
        params, run.opt("trials"), seed, run.opt("parallelism"), run.settings.memory_cap
    )
    bounds = prob_bounds(params.m, params.k, params.n, None, params.mode, params.precision_bits)
    ci = summary.ci_radius99
    within = (
        float(bounds.lower.value) - ci <= summary.success_rate <= float(bounds.upper.value) + ci
    )
    results = {"summary": run.dump(summary), "prob": run.dump(bounds), "withinBounds": within}
    record = OutputRecord(
        command="experiment",
        params={**params.echo(), "seed": seed, "trials": summary.trials},
        results=results,
    )
    header = ["n", "trials", "successes", "emp_rate", "emp_ci99", "prob_lb", "prob_ub",
              "emp_total_size_mean", "emp_total_size_std", "emp_max_level_mean"]
    row = (
        [params.n, summary.trials, summary.successes, summary.success_rate, ci]
        + _bound_cells(results["prob"])
        + [summary.mean_total_size, summary.std_total_size, summary.mean_max_level_size]
    )
    return record, header, [row]


def _cmd_search(run: _Run):
    criterion = Criterion(run.args.criterion)
    empirical = criterion is Criterion.EMPIRICAL
    result = search_n(
        run.m,
        run.args.k,
        run.args.target,
        criterion,
        run.mode,
        run.bits,
        run.opt("n_max"),
        run.opt("trials"),
        run.opt("seed"),
        run.opt("parallelism"),
        run.settings.memory_cap,
    )
    record = OutputRecord(
        command="search",
        params=run.echo(
            k=run.args.k,
            target=run.args.target,
            criterion=criterion.value,
            seed=run.opt("seed") if empirical else None,
            trials=run.opt("trials") if empirical else None,
        ),
        results=run.dump(result),
    )
    header = ["n", "c", "criterion", "target", "value", "previous_value", "probes", "ci99"]
    row = [result.n, result.c, criterion.value, result.target, result.value,
           result.previous_value or "", result.probes,
           "" if result.ci_radius99 is None else result.ci_radius99]
    return record, header, [row]


def _cmd_sweep(run: _Run):
    args = run.args
    rows = sweep(
        run.m,
        args.k,
        c_grid=args.c_grid,
        n_grid=args.n_grid,
        mode=run.mode,
        bits=run.bits,
        empirical=args.empirical,
        trials=run.opt("trials"),
        seed=run.opt("seed"),
        parallelism=run.opt("parallelism"),
        cap=run.settings.memory_cap,
    )
    dumped = [run.dump(row) for row in rows]
    record = OutputRecord(
        command="sweep",
        params=run.echo(
            k=args.k,
            cGrid=args.c_grid,
            nGrid=args.n_grid,
            seed=run.opt("seed") if args.empirical else None,
            trials=run.opt("trials") if args.empirical else None,
        ),
        results={"rows": dumped},
    )
    csv_rows = []
    for i, (row, data) in enumerate(zip(rows, dumped)):
        c_cell = args.c_grid[i] if args.c_grid is not None else f"{row.c:.6g}"
        cells = (
            [row.n, c_cell]
            + _bound_cells(data["prob"])
            + _bound_cells(data.get("analyticProb"))
            + _bound_cells(data["size"])
        )
        emp = row.empirical
        if emp is None:
            cells += ["", "", "", "", ""]
        else:
            cells += [emp.success_rate, emp.ci_radius99, emp.mean_total_size,
                      emp.std_total_size, emp.mean_max_level_size]
        csv_rows.append(cells)
    return record, SWEEP_CSV_COLUMNS, csv_rows


def _cmd_complexity(run: _Run):
    args = run.args
    side = Side(args.side)
    rows = complexity_at_target(
        run.m, args.k_grid, args.target, side, run.mode, run.bits, run.opt("n_max")
    )
    dumped = [run.dump(row) for row in rows]
    record = OutputRecord(
        command="complexity",
        params=run.echo(kGrid=args.k_grid, target=args.target, side=side.value),
        results={"rows": dumped},
    )
    header = ["k", "side", "reachable", "n", "c", "size_bound", "size_bound_log2",
              "best_n", "best_value"]
    csv_rows = []
    for row, data in zip(rows, dumped):
        bound = data.get("sizeBound")
        csv_rows.append([
            row.k,
            side.value,
            int(row.reachable),
            "" if row.n is None else row.n,
            "" if row.c is None else row.c,
            bound["decimal"] if bound else "",
            bound["log2"] if bound else "",
            "" if row.best_n is None else row.best_n,
            row.best_value or "",
        ])
    return record, header, csv_rows


COMMANDS = {
    "bounds": _cmd_bounds,
    "solve": _cmd_solve,
    "experiment": _cmd_experiment,
    "search": _cmd_search,
    "sweep": _cmd_sweep,
    "complexity": _cmd_complexity,
}


def schema_text() -> str:
    return (resources.files("ktree_bounds") / "schema" / "output_record.schema.json").read_text()


def _render(fmt: str, record: OutputRecord, header: Sequence[str], rows: List[list]) -> str:
    if fmt == "json":
        return record.model_dump_json(by_alias=True, exclude_none=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)


def _setup_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level)
    logger.enable("ktree_bounds")


def _fail(error_code: str, message: str, exit_code: int, **extra) -> int:
    sys.stderr.write(json.dumps({"error_code": error_code, "message": message, **extra}) + "\n")
    return exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        sys.stdout.write(schema_text())
        return 0

    try:
        settings = load_settings(args.config)
        _setup_logging("DEBUG" if args.verbose else settings.log_level)
        run = _Run(args, settings)
        started = time.perf_counter()
        record, header, rows = COMMANDS[args.command](run)
        if args.timing:
            record = record.model_copy(update={"timing": {"seconds": time.perf_counter() - started}})
        _emit(_render(args.format, record, header, rows), args.out)
    except KTreeError as exc:
        logger.debug("{} failed: {}", args.command, exc)
        payload = exc.to_dict()
        sys.stderr.write(json.dumps(payload) + "\n")
        return exc.exit_code
    except ValidationError as exc:
        messages = "; ".join(err["msg"] for err in exc.errors())
        return _fail(ParameterError.error_code, messages, ParameterError.exit_code)
    return 0


if __name__ == "__main__":
    sys.exit(main())
