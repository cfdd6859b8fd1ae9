"""Batch front-end: summarize / fit / select / adequacy / simulate / knockout / report.

Runs are configured by a JSON file with keys mirroring RunConfig; command
line flags override file values. The resolved configuration (including the
seed and software version) is written next to the outputs so every run is
reproducible from its artifacts.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

import remnet
from remnet.analysis import adequacy, concentration_report
from remnet.data import DataError, load_networks, summarize
from remnet.inference import (
    EventDesign,
    FitResult,
    InadmissibleModelError,
    ModelSpec,
    NumericalError,
    PriorSpec,
    fit_map,
    star_codes,
)
from remnet.selection import exhaustive_select, hill_climb_select
from remnet.simulation import (
    KnockoutCondition,
    run_knockout_experiment,
    write_trajectories_csv,
)
from remnet.stats import ALL_TERMS, term_from_name

log = logging.getLogger("remnet")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    events: str = ""
    actors: str = ""
    out: str = "out"
    terms: list[str] = field(default_factory=lambda: [t.value for t in ALL_TERMS])
    prior_location: float = 0.0
    prior_scale: float = 10.0
    prior_df: float = 4.0
    selection: str = "hill"  # hill | exhaustive
    replicates: int = 50
    conditions: list[str] = field(
        default_factory=lambda: [
            "full",
            "pa_removed",
            "ps_removed",
            "icr_removed",
            "all_removed",
        ]
    )
    seed: int | None = None
    tol: float = 1e-6
    max_iter: int = 500
    jobs: int = 1

    def prior(self) -> PriorSpec:
        return PriorSpec(self.prior_location, self.prior_scale, self.prior_df)

    def term_objects(self):
        return tuple(term_from_name(t) for t in self.terms)


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        unknown = set(payload) - set(cfg.__dict__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, value in payload.items():
            setattr(cfg, key, value)
    for key in (
        "events",
        "actors",
        "out",
        "seed",
        "replicates",
        "jobs",
        "selection",
        "tol",
    ):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "conditions", None):
        cfg.conditions = args.conditions
    if getattr(args, "terms", None):
        cfg.terms = args.terms
    if not cfg.events:
        raise ConfigError("no events path given (flag --events or config key)")
    if cfg.selection not in ("hill", "exhaustive"):
        raise ConfigError(f"selection must be 'hill' or 'exhaustive', got {cfg.selection!r}")
    try:
        cfg.term_objects()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for name in cfg.conditions:
        try:
            KnockoutCondition.named(name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


def _prepare_out(cfg: RunConfig, command: str) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    resolved = dict(asdict(cfg), command=command, version=remnet.__version__)
    with open(out / f"{command}_config.json", "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def _load_all(cfg: RunConfig):
    nets = load_networks(cfg.events, cfg.actors or None)
    if not nets:
        raise DataError(f"no networks found in {cfg.events}")
    return dict(sorted(nets.items()))


def _fmt(x: float, digits: int = 4) -> str:
    return f"{x:.{digits}f}"


def cmd_summarize(cfg: RunConfig) -> int:
    out = _prepare_out(cfg, "summarize")
    nets = _load_all(cfg)
    metas = [summarize(actors, seq) for actors, seq in nets.values()]
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["network_id", "actors", "events", "pct_icr", "specialization"]
        )
        for meta in metas:
            spec = ""
            if meta.specialist is not None:
                spec = "Specialist" if meta.specialist else "Non Spec."
            writer.writerow(
                [
                    meta.network_id,
                    meta.n_actors,
                    meta.n_events,
                    _fmt(meta.pct_icr, 2),
                    spec,
                ]
            )
        writer.writerow(
            [
                "Mean",
                _fmt(float(np.mean([m.n_actors for m in metas])), 2),
                _fmt(float(np.mean([m.n_events for m in metas])), 2),
                _fmt(float(np.mean([m.pct_icr for m in metas])), 2),
                "",
            ]
        )
    print(f"wrote {out / 'summary.csv'} ({len(metas)} networks)")
    return EXIT_OK


def _write_coefficient_table(fit: FitResult, path: Path) -> None:
    stars = star_codes(fit)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "estimate", "sd", "stars"])
        for name, est, sd, star in zip(
            fit.spec.term_names(), fit.mode, fit.sd, stars
        ):
            writer.writerow([name, _fmt(float(est)), _fmt(float(sd)), star])
        writer.writerow(["AICc", _fmt(fit.aicc, 2), "", ""])


def _fit_one(item):
    net_id, actors, seq, cfg = item
    design = EventDesign(actors, seq)
    spec = ModelSpec(terms=cfg.term_objects(), network_id=net_id)
    return net_id, fit_map(
        spec,
        prior=cfg.prior(),
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        design=design,
    )


def _select_one(item):
    net_id, actors, seq, cfg = item
    design = EventDesign(actors, seq)
    select = hill_climb_select if cfg.selection == "hill" else exhaustive_select
    trace = select(cfg.term_objects(), prior=cfg.prior(), tol=cfg.tol, design=design)
    return net_id, trace


def _map_networks(worker, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, items))
    return [worker(item) for item in items]


def cmd_fit(cfg: RunConfig) -> int:
    out = _prepare_out(cfg, "fit")
    nets = _load_all(cfg)
    items = [(nid, a, s, cfg) for nid, (a, s) in nets.items()]
    for net_id, fit in _map_networks(_fit_one, items, cfg.jobs):
        fit.save(out / f"fit_{net_id}.json")
        _write_coefficient_table(fit, out / f"coefficients_{net_id}.csv")
        print(f"{net_id}: AICc {fit.aicc:.2f} converged={fit.converged}")
    return EXIT_OK


def cmd_select(cfg: RunConfig) -> int:
    out = _prepare_out(cfg, "select")
    nets = _load_all(cfg)
    items = [(nid, a, s, cfg) for nid, (a, s) in nets.items()]
    for net_id, trace in _map_networks(_select_one, items, cfg.jobs):
        trace.save(out / f"selection_{net_id}.json")
        trace.final.save(out / f"fit_{net_id}.json")
        _write_coefficient_table(trace.final, out / f"coefficients_{net_id}.csv")
        terms = ", ".join(trace.final.spec.term_names()) or "(null)"
        print(f"{net_id}: selected [{terms}] AICc {trace.final.aicc:.2f}")
        for step in trace.steps:
            if step.action in ("add", "remove"):
                print(f"  {step.action} {step.term.value}: AICc {step.aicc:.2f}")
    return EXIT_OK


def _require_fit(out: Path, net_id: str) -> FitResult:
    path = out / f"fit_{net_id}.json"
    if not path.exists():
        raise ConfigError(
            f"no fit for network {net_id!r} at {path}; run 'fit' or 'select' first"
        )
    return FitResult.load(path)


def cmd_adequacy(cfg: RunConfig) -> int:
    out = _prepare_out(cfg, "adequacy")
    nets = _load_all(cfg)
    with open(out / "adequacy.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "network_id",
                "either_match",
                "null_either",
                "both_match",
                "null_both",
                "recall_1pct",
                "recall_5pct",
                "recall_10pct",
            ]
        )
        for net_id, (actors, seq) in nets.items():
            fit = _require_fit(out, net_id)
            report = adequacy(fit, seq, actors)
            writer.writerow(
                [
                    net_id,
                    _fmt(report.either_match),
                    _fmt(report.null_either),
                    _fmt(report.both_match),
                    _fmt(report.null_both),
                    _fmt(report.recall[1]),
                    _fmt(report.recall[5]),
                    _fmt(report.recall[10]),
                ]
            )
            print(
                f"{net_id}: either {report.either_match:.2f} "
                f"(null {report.null_either:.2f}), both {report.both_match:.2f}"
            )
    return EXIT_OK


def _knockout_one(net_id, actors, seq, cfg, out):
    fit = _require_fit(out, net_id)
    conditions = tuple(KnockoutCondition.named(c) for c in cfg.conditions)
    trajectories = run_knockout_experiment(
        fit,
        actors,
        seq.m,
        replicates=cfg.replicates,
        conditions=conditions,
        master_seed=cfg.seed,
    )
    write_trajectories_csv(trajectories, out / f"trajectories_{net_id}.csv")
    report = concentration_report(trajectories, actors)
    report.save_json(out / f"concentration_{net_id}.json")
    return report


def cmd_knockout(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("--seed is mandatory for knockout")
    out = _prepare_out(cfg, "knockout")
    nets = _load_all(cfg)
    reports = []
    for net_id, (actors, seq) in nets.items():
        reports.append(_knockout_one(net_id, actors, seq, cfg, out))
        print(f"{net_id}: {cfg.replicates} x {len(cfg.conditions)} trajectories")
    _write_concentration_csv(reports, out / "concentration.csv")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise ConfigError("--seed is mandatory for simulate")
    out = _prepare_out(cfg, "simulate")
    nets = _load_all(cfg)
    conditions = tuple(KnockoutCondition.named(c) for c in cfg.conditions)
    for net_id, (actors, seq) in nets.items():
        fit = _require_fit(out, net_id)
        trajectories = run_knockout_experiment(
            fit,
            actors,
            seq.m,
            replicates=cfg.replicates,
            conditions=conditions,
            master_seed=cfg.seed,
        )
        write_trajectories_csv(trajectories, out / f"trajectories_{net_id}.csv")
        print(f"{net_id}: wrote {len(trajectories)} trajectories")
    return EXIT_OK


def _write_concentration_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "network_id",
                "condition",
                "mean_theil",
                "pct_change_vs_full",
                "excess_fraction",
                "t_stat",
                "p_value",
            ]
        )
        for report in reports:
            report.write_csv_rows(writer)


def cmd_report(cfg: RunConfig) -> int:
    """Re-render concentration tables from saved knockout JSON outputs."""
    from remnet.analysis import ConcentrationReport, ConditionSummary

    out = _prepare_out(cfg, "report")
    paths = sorted(Path(cfg.out).glob("concentration_*.json"))
    if not paths:
        raise ConfigError(f"no concentration_*.json files under {cfg.out}")
    reports = []
    for path in paths:
        obj = json.loads(path.read_text())
        report = ConcentrationReport(network_id=obj["network_id"])
        for name, c in obj["conditions"].items():
            report.conditions[name] = ConditionSummary(
                condition=name,
                theil_values=c["theil_values"],
                mean_theil=c["mean_theil"],
                pct_change_vs_full=c["pct_change_vs_full"],
                excess_fraction=c["excess_fraction"],
                t_stat=c["t_stat"],
                p_value=c["p_value"],
            )
        reports.append(report)
    _write_concentration_csv(reports, out / "concentration.csv")
    print(f"wrote {out / 'concentration.csv'} ({len(reports)} networks)")
    return EXIT_OK


_COMMANDS = {
    "summarize": cmd_summarize,
    "fit": cmd_fit,
    "select": cmd_select,
    "adequacy": cmd_adequacy,
    "simulate": cmd_simulate,
    "knockout": cmd_knockout,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remnet",
        description="Relational event model pipeline for dyadic communication networks",
    )
    parser.add_argument("--version", action="version", version=remnet.__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--events", help="events CSV/JSON path")
        p.add_argument("--actors", help="actors CSV path")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--replicates", type=int)
        p.add_argument("--conditions", nargs="+")
        p.add_argument("--terms", nargs="+")
        p.add_argument("--jobs", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--selection", choices=["hill", "exhaustive"])
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, InadmissibleModelError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
