"""Command-line front end: ``mvbm {solve,analyze,sweep,fixtures}``.

Exit codes: 0 on success (verdicts are payload, not exit codes), 1 on invalid
input, 2 when an enumeration cap is exceeded. Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from . import engine, oracle
from .fixtures import FIXTURES, fixture, random_instance, thm3_family
from .instance import (EnumerationCapExceeded, Instance, InstanceError, Mode, ReportError,
                       dump_instance, format_value, load_instance, load_report, utilities)
from .mechanisms import Mechanism, MechanismKind, run
from .strategy import (CoalitionWitness, ManipulationWitness, NoEquilibriumFound, Strategy,
                       check_group_sp, check_truthfulness, classify_truthful_inputs,
                       default_cap, empirical_poa_pos, fcfs_profile, truthful_profile,
                       verify_nash)

SWEEP_COLUMNS = ["instance_id", "n", "m", "welfare_bfs", "welfare_dfs", "welfare_ap",
                 "optimum", "ap_ratio", "poa", "pos", "truthful_ap"]
CHECKS = ["truthful", "group-sp", "ne", "poa", "pos", "classes"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- instance sources ---------------------------------------------------------

def parse_generate(spec: str, seed: int | None = None) -> dict:
    params: dict = {"seed": 0, "n": 3, "m": 3, "b_max": 2, "density": 0.5,
                    "value_mode": "with_ties"}
    for item in filter(None, (s.strip() for s in spec.split(","))):
        key, sep, raw = item.partition("=")
        key = {"values": "value_mode", "b": "b_max"}.get(key, key)
        if not sep or key not in params:
            raise UsageError(f"bad --generate item {item!r}")
        params[key] = raw if key == "value_mode" else (float(raw) if key == "density" else int(raw))
    if seed is not None:
        params["seed"] = seed
    return params


def resolve_instance(args) -> tuple[str, Instance]:
    sources = [s for s in (args.instance, args.fixture, args.generate) if s is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --instance, --fixture, --generate")
    if args.instance is not None:
        if args.instance == "-":
            return "stdin", load_instance(sys.stdin.buffer)
        with open(args.instance, "rb") as fh:
            return args.instance, load_instance(fh)
    if args.fixture is not None:
        if args.fixture not in FIXTURES:
            raise UsageError(f"unknown fixture {args.fixture!r}")
        eps = Fraction(args.eps) if args.eps is not None else None
        inst = fixture(args.fixture, eps=eps)
        label = args.fixture if eps is None else f"{args.fixture}[eps={eps}]"
        return label, inst
    params = parse_generate(args.generate, args.seed)
    label = "gen:" + ",".join(f"{k}={v}" for k, v in params.items())
    return label, random_instance(**params)


# -- JSON helpers -------------------------------------------------------------

def _strategy_json(s: Strategy, mode: Mode) -> dict:
    out: dict = {"edges": sorted(s.edges)}
    if mode is Mode.ECMS:
        out["capacity"] = s.capacity
    return out


def _witness_json(w: ManipulationWitness, mode: Mode) -> dict:
    return {"agent": w.agent, **_strategy_json(w.strategy, mode),
            "truthful_utility": format_value(w.truthful_utility),
            "manipulated_utility": format_value(w.manipulated_utility),
            "gain": format_value(w.gain)}


def _coalition_json(w: CoalitionWitness, mode: Mode) -> dict:
    return {"coalition": list(w.coalition),
            "strategies": [_strategy_json(s, mode) for s in w.strategies],
            "truthful_utilities": [format_value(u) for u in w.truthful_utilities],
            "manipulated_utilities": [format_value(u) for u in w.manipulated_utilities]}


def analysis_records(label: str, instance: Instance, kind: MechanismKind, checks: Sequence[str],
                     max_coalition: int, profile_name: str, cap: int) -> list[dict]:
    records = []
    poa_cache = None
    for check in checks:
        rec: dict = {"check": check, "instance_id": label, "mechanism": kind.label,
                     "mode": kind.mode.name}
        if check == "truthful":
            w = check_truthfulness(instance, kind, cap)
            rec["verdict"] = "none" if w is None else "manipulable"
            if w is not None:
                rec["witness"] = _witness_json(w, kind.mode)
        elif check == "group-sp":
            w = check_group_sp(instance, kind, max_coalition, cap)
            rec["verdict"] = "none" if w is None else "coalition"
            if w is not None:
                rec["witness"] = _coalition_json(w, kind.mode)
        elif check == "ne":
            profile = fcfs_profile(instance) if profile_name == "fcfs" else truthful_profile(instance)
            v = verify_nash(instance, profile, kind, cap)
            rec["profile"] = profile_name
            rec["verdict"] = "ne" if v.is_ne else "not-ne"
            if not v.is_ne:
                rec["witness"] = {"agent": v.agent, **_strategy_json(v.strategy, kind.mode),
                                  "gain": format_value(v.gain)}
        elif check in ("poa", "pos"):
            if poa_cache is None:
                poa_cache = empirical_poa_pos(instance, kind, cap)
            p = poa_cache
            rec["verdict"] = "computed"
            rec["ratios"] = {"poa_ratio": format_value(p.poa_ratio),
                             "pos_ratio": format_value(p.pos_ratio),
                             "optimum": format_value(p.optimum),
                             "min_ne_welfare": format_value(p.min_ne_welfare),
                             "max_ne_welfare": format_value(p.max_ne_welfare),
                             "ne_count": p.ne_count}
        elif check == "classes":
            rec["verdict"] = sorted(c.value for c in classify_truthful_inputs(instance))
        else:
            raise UsageError(f"unknown check {check!r}")
        records.append(rec)
    return records


# -- sweep --------------------------------------------------------------------

@dataclass(frozen=True)
class _RowTask:
    label: str
    instance: Instance
    mech: Mechanism
    mode: Mode
    equilibria: bool
    truthful: bool
    cap: int


def _optimum(inst: Instance, cap: int) -> Fraction:
    space = 1
    for j in range(inst.m):
        space *= 1 + sum(1 for e in inst.true_edges if j in e)
    if space <= cap:
        return oracle.brute_force_mvbm(inst.true_edges, inst.capacities, inst.values, cap).optimum
    return oracle.dp_optimum(inst.true_edges, inst.capacities, inst.values)


def sweep_row(task: _RowTask) -> dict:
    inst = task.instance
    welfare = {}
    for mech in Mechanism:
        matching = engine.solve(inst.true_edges, inst.capacities, inst.values, mech.search)
        welfare[mech] = utilities(inst, matching).welfare
    opt = _optimum(inst, task.cap)
    ap = welfare[Mechanism.AP]
    row = {"instance_id": task.label, "n": inst.n, "m": inst.m,
           "welfare_bfs": format_value(welfare[Mechanism.BFS]),
           "welfare_dfs": format_value(welfare[Mechanism.DFS]),
           "welfare_ap": format_value(ap), "optimum": format_value(opt),
           "ap_ratio": format_value(opt / ap if ap else Fraction(1)),
           "poa": "", "pos": "", "truthful_ap": ""}
    if task.equilibria:
        p = empirical_poa_pos(inst, MechanismKind(task.mech, task.mode), task.cap)
        row["poa"], row["pos"] = format_value(p.poa_ratio), format_value(p.pos_ratio)
    if task.truthful:
        w = check_truthfulness(inst, MechanismKind(Mechanism.AP, task.mode), task.cap)
        row["truthful_ap"] = "true" if w is None else "false"
    return row


def _sweep_sources(args) -> Iterator[tuple[str, Instance]]:
    if args.family is not None:
        if args.family != "thm3":
            raise UsageError(f"unknown family {args.family!r}")
        for raw in filter(None, args.eps_list.split(",")):
            eps = Fraction(raw)
            # the member on which M_AP attains the family's worst ratio
            yield f"thm3_tightness/reduced[eps={eps}]", thm3_family(eps)[1]
        return
    if args.random is not None:
        base = args.seed or 0
        for k in range(args.random):
            inst = random_instance(base + k, args.n_max, args.m_max, args.b_max,
                                   args.density, args.value_mode)
            yield f"random:seed={base + k}", inst
        return
    values = [Fraction(v) for v in args.values.split(",")] if args.values else \
        list(oracle.DEFAULT_SWEEP_VALUES)
    for k, inst in enumerate(oracle.exhaustive_instance_sweep(args.n_max, args.m_max,
                                                              args.b_max, values)):
        yield f"sweep:{k}", inst


def run_sweep(args, cap: int) -> list[dict]:
    kind = MechanismKind.of(args.mech, args.mode)
    tasks = (_RowTask(label, inst, kind.mechanism, kind.mode, args.equilibria,
                      args.truthful, cap) for label, inst in _sweep_sources(args))
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            return list(pool.map(sweep_row, tasks, chunksize=256))
    return [sweep_row(t) for t in tasks]


# -- output -------------------------------------------------------------------

def _write_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n",
                            extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v)
                         for k, v in row.items()})
    return buf.getvalue()


def cmd_solve(args, cap: int) -> str:
    label, inst = resolve_instance(args)
    kind = MechanismKind.of(args.mech, args.mode)
    if args.report:
        with open(args.report, "rb") as fh:
            report = load_report(fh)
    else:
        report = inst.truthful_report(kind.mode)
    outcome = run(inst, report, kind)
    if args.out == "csv":
        rows = [{"agent": i, "task": j, "value": format_value(inst.values[j])}
                for i, j in outcome.matching.sorted_pairs()]
        return _write_csv(rows, ["agent", "task", "value"])
    return json.dumps({
        "instance_id": label, "mechanism": kind.label, "mode": kind.mode.name,
        "pairs": [[i, j] for i, j in outcome.matching.sorted_pairs()],
        "utilities": [format_value(u) for u in outcome.utilities.per_agent],
        "welfare": format_value(outcome.welfare),
    }) + "\n"


def cmd_analyze(args, cap: int) -> str:
    label, inst = resolve_instance(args)
    kind = MechanismKind.of(args.mech, args.mode)
    checks = args.check or ["truthful"]
    records = analysis_records(label, inst, kind, checks, args.max_coalition, args.profile, cap)
    if args.out == "csv":
        return _write_csv(records, ["check", "instance_id", "mechanism", "mode", "verdict",
                                    "witness", "ratios"])
    return json.dumps(records) + "\n"


def cmd_sweep(args, cap: int) -> str:
    rows = run_sweep(args, cap)
    if args.out == "json":
        return json.dumps(rows) + "\n"
    return _write_csv(rows, SWEEP_COLUMNS)


def cmd_fixtures(args, cap: int) -> str:
    if args.action == "list":
        return "".join(f"{name}\n" for name in FIXTURES)
    if not args.id:
        raise UsageError("fixtures dump needs a fixture id")
    if args.id not in FIXTURES:
        raise UsageError(f"unknown fixture {args.id!r}")
    eps = Fraction(args.eps) if args.eps is not None else None
    return dump_instance(fixture(args.id, eps=eps), indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mech", choices=[m.value for m in Mechanism], default="bfs")
    common.add_argument("--mode", choices=[m.value for m in Mode], default="ems")
    common.add_argument("--cap", type=int, default=None,
                        help="enumeration cap (default: $MVBM_CAP_DEFAULT or 1000000)")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out", choices=["json", "csv"], default=None)
    common.add_argument("--seed", type=int, default=None)

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--instance", metavar="FILE", help="instance JSON file ('-' for stdin)")
    source.add_argument("--fixture", metavar="ID")
    source.add_argument("--generate", metavar="SPEC",
                        help="random instance, e.g. seed=7,n=3,m=3,b_max=2,density=0.5,values=distinct")
    source.add_argument("--eps", metavar="RATIONAL")

    parser = _Parser(prog="mvbm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common, source], help="run a mechanism")
    p.add_argument("--report", metavar="FILE", help="report JSON: {edges: [[...]], capacities?}")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analyze", parents=[common, source], help="strategic checks")
    p.add_argument("--check", action="append", choices=CHECKS)
    p.add_argument("--max-coalition", type=int, default=2)
    p.add_argument("--profile", choices=["fcfs", "truthful"], default="fcfs",
                   help="profile verified by --check ne")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", parents=[common], help="batch evaluation to CSV")
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--m-max", type=int, default=3)
    p.add_argument("--b-max", type=int, default=2)
    p.add_argument("--values", help="comma-separated value set for the exhaustive sweep")
    p.add_argument("--family", help="named family instead of the exhaustive sweep (thm3)")
    p.add_argument("--eps-list", default="1/10,1/100,1/1000")
    p.add_argument("--random", type=int, metavar="COUNT", help="random batch instead")
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--value-mode", choices=["with_ties", "distinct"], default="with_ties")
    p.add_argument("--equilibria", action="store_true", help="fill poa/pos for --mech")
    p.add_argument("--truthful", action="store_true", help="fill truthful_ap")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fixtures", parents=[common], help="list or dump named instances")
    p.add_argument("action", choices=["list", "dump"])
    p.add_argument("id", nargs="?")
    p.add_argument("--eps", metavar="RATIONAL")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # usage errors and --help
        return exc.code if isinstance(exc.code, int) else 1
    try:
        cap = args.cap if args.cap is not None else default_cap()
        if cap < 1:
            raise UsageError("--cap must be positive")
        text = args.func(args, cap)
    except EnumerationCapExceeded as exc:
        print(f"mvbm: {exc}", file=sys.stderr)
        return 2
    except (UsageError, InstanceError, ReportError, NoEquilibriumFound, ValueError,
            KeyError, OSError) as exc:
        print(f"mvbm: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
