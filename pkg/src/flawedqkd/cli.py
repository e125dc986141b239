"""Command-line front end: single points, loss sweeps, crossover search,
and concentration-bound arithmetic, with CSV or JSON output.

Output is deterministic: identical configuration produces byte-identical
text, with numbers rendered at 10 significant digits and rows ordered by
loss, then method.  Exit codes: 0 on success, 2 for invalid arguments, 3
when the numerical procedure itself fails (singular system, infeasible
statistics).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

from .channel import ChannelModel, ProtocolProbabilities, system_efficiency
from .errors import EstimatorError
from .finite_stats import AzumaBudget, azuma_deviation, count_interval
from .lp_estimator import key_rate_lp
from .lt_estimator import PAPER_FAITHFUL, SOLVER_MODES, KeyRatePoint, key_rate_lt
from .qstates import DeviceModel

METHODS = ("lt", "lp")
_SOLVER_FLAGS = {"paper": PAPER_FAITHFUL, "vertex-lp": "vertex_lp"}
_CROSSOVER_PARAMS = ("theta", "mu")

# Bracket grid for the crossover bisection in delta.
_DELTA_SCAN = tuple(i * 0.01 for i in range(51))


@dataclass(frozen=True)
class SweepConfig:
    """Everything needed to evaluate a loss sweep."""

    device: DeviceModel
    p_d: float
    f_ec: float
    probs: ProtocolProbabilities
    loss_start: float
    loss_stop: float
    loss_step: float
    methods: tuple[str, ...] = METHODS
    solver: str = PAPER_FAITHFUL
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.loss_start > self.loss_stop:
            raise ValueError("loss_start must not exceed loss_stop")
        if self.loss_step <= 0.0:
            raise ValueError(f"loss_step must be positive, got {self.loss_step}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if not self.methods:
            raise ValueError("at least one method is required")
        if self.solver not in SOLVER_MODES:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")


@dataclass(frozen=True)
class CrossoverConfig:
    """Search for the delta where both methods give the same rate.

    One of theta/mu is held fixed, the other takes each value of the swept
    grid; for each grid value the gap rate_lt - rate_lp is bisected in
    delta at the comparison loss.
    """

    fixed_param: str
    fixed_value: float
    swept_param: str
    swept_values: tuple[float, ...]
    compare_loss_db: float = 20.0
    bisection_tolerance: float = 1e-10
    theta_mode: str = "dependent"
    p_d: float = 1e-7
    f_ec: float = 1.16
    probs: ProtocolProbabilities = ProtocolProbabilities()
    solver: str = PAPER_FAITHFUL

    def __post_init__(self) -> None:
        if self.fixed_param not in _CROSSOVER_PARAMS:
            raise ValueError(f"fixed_param must be one of {_CROSSOVER_PARAMS}")
        if self.swept_param not in _CROSSOVER_PARAMS:
            raise ValueError(f"swept_param must be one of {_CROSSOVER_PARAMS}")
        if self.fixed_param == self.swept_param:
            raise ValueError("fixed_param and swept_param must differ")
        if not self.swept_values:
            raise ValueError("swept grid must be nonempty")
        if self.bisection_tolerance <= 0.0:
            raise ValueError("bisection tolerance must be positive")
        if self.solver not in SOLVER_MODES:
            raise ValueError(f"unknown solver {self.solver!r}")


@dataclass(frozen=True)
class SweepRow:
    """One output row; numeric fields are None when this row's estimator
    failed (the error message is kept instead)."""

    loss_db: float
    eta: float
    method: str
    e_z: float | None
    e_x: float | None
    rate_raw: float | None
    rate: float | None
    error: str | None = None


@dataclass(frozen=True)
class CrossoverRecord:
    """Bisection result for one swept value; delta_star is None when the
    rate gap never changes sign on the scan grid."""

    swept_param: str
    swept_value: float
    delta_star: float | None
    rate_lt: float | None
    rate_lp: float | None
    status: str


def loss_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive dB grid; the stop value is included when it lands on the
    grid within floating-point slack."""
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def _evaluate_point(
    method: str,
    device: DeviceModel,
    channel: ChannelModel,
    probs: ProtocolProbabilities,
    solver: str,
) -> KeyRatePoint:
    if method == "lt":
        return key_rate_lt(device, channel, probs, solver)
    return key_rate_lp(device, channel, probs)


def run_sweep(config: SweepConfig) -> list[SweepRow]:
    """Evaluate every (loss, method) pair of the sweep.

    Estimator failures are kept as rows with the error message and no
    rate, so one bad point cannot take down a long sweep.  Results are
    ordered by loss then method regardless of worker count.
    """
    losses = loss_grid(config.loss_start, config.loss_stop, config.loss_step)
    methods = tuple(m for m in METHODS if m in config.methods)
    tasks = [(loss, method) for loss in losses for method in methods]

    def eval_one(task: tuple[float, str]) -> SweepRow:
        loss, method = task
        channel = ChannelModel(loss, config.p_d, config.f_ec)
        try:
            point = _evaluate_point(method, config.device, channel, config.probs, config.solver)
        except EstimatorError as exc:
            return SweepRow(
                loss_db=loss,
                eta=system_efficiency(channel),
                method=method,
                e_z=None,
                e_x=None,
                rate_raw=None,
                rate=None,
                error=str(exc),
            )
        return SweepRow(
            loss_db=loss,
            eta=point.eta,
            method=method,
            e_z=point.e_z,
            e_x=point.e_x,
            rate_raw=point.rate_raw,
            rate=point.rate,
        )

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(eval_one, tasks))
    return [eval_one(t) for t in tasks]


def find_crossover(config: CrossoverConfig) -> list[CrossoverRecord]:
    """Bisect the delta at which both methods give the same key rate.

    For each swept value the gap g(delta) = rate_lt - rate_lp is scanned
    on a fixed delta grid; a strict sign change is bisected down to the
    configured delta tolerance.  Grid values without a sign change yield a
    no-crossover record.
    """
    channel = ChannelModel(config.compare_loss_db, config.p_d, config.f_ec)

    def gap(delta: float, swept_value: float) -> float:
        params = {config.fixed_param: config.fixed_value, config.swept_param: swept_value}
        device = DeviceModel(
            delta=delta,
            theta_hat=params["theta"],
            theta_mode=config.theta_mode,
            mu=params["mu"],
        )
        lt = key_rate_lt(device, channel, config.probs, config.solver)
        lp = key_rate_lp(device, channel, config.probs)
        return lt.rate - lp.rate

    records = []
    for value in config.swept_values:
        gaps = [gap(d, value) for d in _DELTA_SCAN]
        bracket = None
        for i in range(len(_DELTA_SCAN) - 1):
            if gaps[i] != 0.0 and gaps[i + 1] != 0.0 and gaps[i] * gaps[i + 1] < 0.0:
                bracket = (_DELTA_SCAN[i], _DELTA_SCAN[i + 1], gaps[i])
                break
        if bracket is None:
            records.append(
                CrossoverRecord(config.swept_param, value, None, None, None, "no-crossover")
            )
            continue
        lo, hi, g_lo = bracket
        while hi - lo > config.bisection_tolerance:
            mid = (lo + hi) / 2.0
            g_mid = gap(mid, value)
            if g_mid == 0.0:
                lo = hi = mid
                break
            if (g_mid > 0.0) == (g_lo > 0.0):
                lo, g_lo = mid, g_mid
            else:
                hi = mid
        delta_star = (lo + hi) / 2.0
        params = {config.fixed_param: config.fixed_value, config.swept_param: value}
        device = DeviceModel(
            delta=delta_star,
            theta_hat=params["theta"],
            theta_mode=config.theta_mode,
            mu=params["mu"],
        )
        lt = key_rate_lt(device, channel, config.probs, config.solver)
        lp = key_rate_lp(device, channel, config.probs)
        records.append(
            CrossoverRecord(
                config.swept_param, value, delta_star, lt.rate, lp.rate, "crossover"
            )
        )
    return records


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _num(x: float) -> float:
    # Round-trip through the 10-significant-digit rendering so CSV and
    # JSON carry the same values.
    return float(_fmt(x))


def _cell(x: float | None) -> str:
    return "" if x is None else _fmt(x)


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["loss_db,eta,method,e_z,e_x,rate_raw,rate"]
    for r in rows:
        lines.append(
            ",".join(
                [
                    _fmt(r.loss_db),
                    _fmt(r.eta),
                    r.method,
                    _cell(r.e_z),
                    _cell(r.e_x),
                    _cell(r.rate_raw),
                    _cell(r.rate),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def sweep_json(rows: Sequence[SweepRow]) -> str:
    payload: list[dict[str, Any]] = []
    for r in rows:
        item: dict[str, Any] = {
            "loss_db": _num(r.loss_db),
            "eta": _num(r.eta),
            "method": r.method,
            "e_z": None if r.e_z is None else _num(r.e_z),
            "e_x": None if r.e_x is None else _num(r.e_x),
            "rate_raw": None if r.rate_raw is None else _num(r.rate_raw),
            "rate": None if r.rate is None else _num(r.rate),
        }
        if r.error is not None:
            item["error"] = r.error
        payload.append(item)
    return json.dumps(payload, indent=2) + "\n"


def crossover_csv(records: Sequence[CrossoverRecord], compare_loss_db: float) -> str:
    lines = [
        f"# compare_loss_db={_fmt(compare_loss_db)}",
        "swept_param,swept_value,delta_star,rate_lt,rate_lp,status",
    ]
    for r in records:
        lines.append(
            ",".join(
                [
                    r.swept_param,
                    _fmt(r.swept_value),
                    _cell(r.delta_star),
                    _cell(r.rate_lt),
                    _cell(r.rate_lp),
                    r.status,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def crossover_json(records: Sequence[CrossoverRecord], compare_loss_db: float) -> str:
    payload = {
        "compare_loss_db": _num(compare_loss_db),
        "records": [
            {
                "swept_param": r.swept_param,
                "swept_value": _num(r.swept_value),
                "delta_star": None if r.delta_star is None else _num(r.delta_star),
                "rate_lt": None if r.rate_lt is None else _num(r.rate_lt),
                "rate_lp": None if r.rate_lp is None else _num(r.rate_lp),
                "status": r.status,
            }
            for r in records
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def _load_config_file(path: str) -> dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _cfg(cfg: dict[str, Any], *path: str) -> Any:
    node: Any = cfg
    for key in path:
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def _pick(flag: Any, file_value: Any, default: Any) -> Any:
    if flag is not None:
        return flag
    if file_value is not None:
        return file_value
    return default


def _solver_from(name: str | None, cfg: dict[str, Any]) -> str:
    raw = _pick(
        None if name is None else _SOLVER_FLAGS[name], _cfg(cfg, "solver"), PAPER_FAITHFUL
    )
    resolved = _SOLVER_FLAGS.get(raw, raw)
    if resolved not in SOLVER_MODES:
        raise ValueError(f"unknown solver {raw!r}")
    return resolved


def _device_from(args: argparse.Namespace, cfg: dict[str, Any]) -> DeviceModel:
    return DeviceModel(
        delta=_pick(args.delta, _cfg(cfg, "device", "delta"), 0.0),
        theta_hat=_pick(args.theta, _cfg(cfg, "device", "theta_hat"), 0.0),
        theta_mode=_pick(args.theta_mode, _cfg(cfg, "device", "theta_mode"), "dependent"),
        mu=_pick(args.mu, _cfg(cfg, "device", "mu"), 0.0),
    )


def _probs_from(args: argparse.Namespace, cfg: dict[str, Any]) -> ProtocolProbabilities:
    return ProtocolProbabilities(
        p_za=_pick(args.pza, _cfg(cfg, "probs", "p_za"), 0.5),
        p_zb=_pick(args.pzb, _cfg(cfg, "probs", "p_zb"), 0.5),
    )


def _channel_template(args: argparse.Namespace, cfg: dict[str, Any]) -> tuple[float, float]:
    p_d = _pick(args.pd, _cfg(cfg, "channel", "p_d"), 1e-7)
    f_ec = _pick(args.f_ec, _cfg(cfg, "channel", "f_ec"), 1.16)
    return p_d, f_ec


def _methods_from(flag: str | None, cfg: dict[str, Any]) -> tuple[str, ...]:
    raw = _pick(flag, _cfg(cfg, "methods"), "both")
    if isinstance(raw, (list, tuple)):
        return tuple(raw)
    if raw == "both":
        return METHODS
    return (raw,)


def _parse_loss_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"--loss-range needs start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"--loss-range needs numeric start:stop:step, got {text!r}")
    return start, stop, step


def _parse_values(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(",") if p != "")
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flawedqkd",
        description="Key rates for QKD sources with preparation flaws and leakage",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--delta", type=float, default=None, help="encoding phase deviation, radians")
    shared.add_argument("--theta", type=float, default=None, help="polarization rotation magnitude, radians")
    shared.add_argument("--theta-mode", choices=("independent", "dependent"), default=None)
    shared.add_argument("--mu", type=float, default=None, help="back-reflected probe intensity")
    shared.add_argument("--pd", type=float, default=None, help="dark count probability per detector per gate")
    shared.add_argument("--f-ec", type=float, default=None, help="error correction inefficiency")
    shared.add_argument("--pza", type=float, default=None, help="Alice Z-basis probability")
    shared.add_argument("--pzb", type=float, default=None, help="Bob Z-basis probability")
    shared.add_argument("--format", choices=("csv", "json"), default=None)
    shared.add_argument("--config", default=None, help="JSON config file; flags override file values")

    rate = sub.add_parser("rate", parents=[shared], help="single key-rate point")
    rate.add_argument("--loss", type=float, default=None, help="overall system loss, dB")
    rate.add_argument("--method", choices=("lt", "lp", "both"), default=None)
    rate.add_argument("--solver", choices=tuple(_SOLVER_FLAGS), default=None)

    sweep = sub.add_parser("sweep", parents=[shared], help="key rate versus loss")
    sweep.add_argument("--loss-range", default=None, help="start:stop:step in dB")
    sweep.add_argument("--method", choices=("lt", "lp", "both"), default=None)
    sweep.add_argument("--solver", choices=tuple(_SOLVER_FLAGS), default=None)
    sweep.add_argument("--jobs", type=int, default=None, help="worker threads")

    crossover = sub.add_parser(
        "crossover", parents=[shared], help="delta where both methods tie"
    )
    crossover.add_argument("--sweep-param", choices=_CROSSOVER_PARAMS, default=None)
    crossover.add_argument("--sweep-values", default=None, help="comma-separated grid")
    crossover.add_argument("--compare-loss", type=float, default=None, help="comparison loss, dB")
    crossover.add_argument("--bisect-tol", type=float, default=None, help="delta tolerance")
    crossover.add_argument("--solver", choices=tuple(_SOLVER_FLAGS), default=None)

    azuma = sub.add_parser("azuma", help="concentration interval for an observed count")
    azuma.add_argument("--n-trials", type=int, required=True)
    azuma.add_argument("--eps", type=float, required=True)
    azuma.add_argument("--eps-hat", type=float, required=True)
    azuma.add_argument("--observed", type=float, required=True)
    azuma.add_argument("--format", choices=("csv", "json"), default="csv")

    return parser


def _run_rate(args: argparse.Namespace) -> str:
    cfg = _load_config_file(args.config) if args.config else {}
    loss = _pick(args.loss, _cfg(cfg, "loss"), None)
    if loss is None:
        raise ValueError("rate needs --loss (or 'loss' in the config file)")
    p_d, f_ec = _channel_template(args, cfg)
    config = SweepConfig(
        device=_device_from(args, cfg),
        p_d=p_d,
        f_ec=f_ec,
        probs=_probs_from(args, cfg),
        loss_start=loss,
        loss_stop=loss,
        loss_step=1.0,
        methods=_methods_from(args.method, cfg),
        solver=_solver_from(args.solver, cfg),
    )
    device = config.device
    channel = ChannelModel(loss, p_d, f_ec)
    rows = []
    for method in (m for m in METHODS if m in config.methods):
        point = _evaluate_point(method, device, channel, config.probs, config.solver)
        rows.append(
            SweepRow(point.loss_db, point.eta, method, point.e_z, point.e_x, point.rate_raw, point.rate)
        )
    fmt = _pick(args.format, _cfg(cfg, "format"), "csv")
    return sweep_csv(rows) if fmt == "csv" else sweep_json(rows)


def _run_sweep(args: argparse.Namespace) -> str:
    cfg = _load_config_file(args.config) if args.config else {}
    if args.loss_range is not None:
        start, stop, step = _parse_loss_range(args.loss_range)
    else:
        start = _cfg(cfg, "loss_start")
        stop = _cfg(cfg, "loss_stop")
        step = _cfg(cfg, "loss_step")
        if start is None or stop is None or step is None:
            raise ValueError(
                "sweep needs --loss-range (or loss_start/loss_stop/loss_step in the config file)"
            )
    p_d, f_ec = _channel_template(args, cfg)
    config = SweepConfig(
        device=_device_from(args, cfg),
        p_d=p_d,
        f_ec=f_ec,
        probs=_probs_from(args, cfg),
        loss_start=start,
        loss_stop=stop,
        loss_step=step,
        methods=_methods_from(args.method, cfg),
        solver=_solver_from(args.solver, cfg),
        jobs=_pick(args.jobs, _cfg(cfg, "jobs"), 1),
    )
    rows = run_sweep(config)
    for r in rows:
        if r.error is not None:
            print(
                f"warning: loss={_fmt(r.loss_db)} method={r.method}: {r.error}",
                file=sys.stderr,
            )
    fmt = _pick(args.format, _cfg(cfg, "format"), "csv")
    return sweep_csv(rows) if fmt == "csv" else sweep_json(rows)


def _run_crossover(args: argparse.Namespace) -> str:
    cfg = _load_config_file(args.config) if args.config else {}
    swept_param = _pick(args.sweep_param, _cfg(cfg, "swept_param"), None)
    if swept_param is None:
        raise ValueError("crossover needs --sweep-param")
    raw_values = _pick(
        None if args.sweep_values is None else _parse_values(args.sweep_values),
        _cfg(cfg, "swept_values"),
        None,
    )
    if raw_values is None:
        raise ValueError("crossover needs --sweep-values")
    fixed_param = "mu" if swept_param == "theta" else "theta"
    fixed_flag = {"mu": args.mu, "theta": args.theta}[fixed_param]
    fixed_value = _pick(fixed_flag, _cfg(cfg, "fixed_value"), 0.0)
    config = CrossoverConfig(
        fixed_param=fixed_param,
        fixed_value=fixed_value,
        swept_param=swept_param,
        swept_values=tuple(raw_values),
        compare_loss_db=_pick(args.compare_loss, _cfg(cfg, "compare_loss_db"), 20.0),
        bisection_tolerance=_pick(args.bisect_tol, _cfg(cfg, "bisection_tolerance"), 1e-10),
        theta_mode=_pick(args.theta_mode, _cfg(cfg, "device", "theta_mode"), "dependent"),
        p_d=_channel_template(args, cfg)[0],
        f_ec=_channel_template(args, cfg)[1],
        probs=_probs_from(args, cfg),
        solver=_solver_from(args.solver, cfg),
    )
    records = find_crossover(config)
    fmt = _pick(args.format, _cfg(cfg, "format"), "csv")
    if fmt == "csv":
        return crossover_csv(records, config.compare_loss_db)
    return crossover_json(records, config.compare_loss_db)


def _run_azuma(args: argparse.Namespace) -> str:
    budget = AzumaBudget(args.n_trials, args.eps, args.eps_hat)
    low, high = count_interval(args.observed, budget)
    f_eps = azuma_deviation(budget.n_trials, budget.epsilon)
    f_eps_hat = azuma_deviation(budget.n_trials, budget.epsilon_hat)
    if args.format == "csv":
        header = "n_trials,observed,epsilon,epsilon_hat,f_eps,f_eps_hat,low,high"
        row = ",".join(
            _fmt(v)
            for v in (
                budget.n_trials,
                args.observed,
                budget.epsilon,
                budget.epsilon_hat,
                f_eps,
                f_eps_hat,
                low,
                high,
            )
        )
        return header + "\n" + row + "\n"
    payload = {
        "n_trials": budget.n_trials,
        "observed": _num(args.observed),
        "epsilon": _num(budget.epsilon),
        "epsilon_hat": _num(budget.epsilon_hat),
        "f_eps": _num(f_eps),
        "f_eps_hat": _num(f_eps_hat),
        "low": _num(low),
        "high": _num(high),
    }
    return json.dumps(payload, indent=2) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "rate": _run_rate,
        "sweep": _run_sweep,
        "crossover": _run_crossover,
        "azuma": _run_azuma,
    }
    try:
        output = handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EstimatorError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(output)
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
