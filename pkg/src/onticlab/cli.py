"""Command-line entry point: ``onticlab {mzi,construct,scan,prove,check-model}``.

Exit codes: 0 success, 2 invalid configuration, 3 infeasible or not
applicable, 4 proof trace and model search disagree.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io as _io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, io
from .construction import (
    build_construction,
    build_restricted_protocol,
    empirical_boundary,
    feasible_overlap_bound,
    scan_feasibility,
    verify_condition,
)
from .errors import (
    ConditionNotMet,
    ConditionViolated,
    Infeasible,
    InvalidConfig,
    OnticLabError,
    PreconditionNotApplicable,
    ScenarioFormatError,
    UnknownName,
)
from .interfero import PHASES, MziConfig, build_mzi
from .nogo import FULL_AXIOMS, FeasibilityProblem, check_trace, derive_nonoverlap, feasibility_search
from .numerics import DEFAULT_TOL, Tolerances, basis_vector
from .ontology import (
    OntologicalModel,
    check_possibilistic_completeness,
    classify_model,
    indifference_violations,
)
from .scenario import QuantumScenario, evaluate, zero_structure

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_DISAGREE = 0, 2, 3, 4

AXIOM_ALIASES = {
    "indifference": "OnticIndifference",
    "completeness": "PossibilisticCompleteness",
    "coverage": "OutcomeCoverage",
    "separability": "ProductSeparability",
}


@dataclasses.dataclass
class RunReport:
    command: str
    inputs: dict
    results: dict
    timings: dict
    tolerances: dict
    version: str = __version__
    schema_version: int = io.SCHEMA_VERSION

    @property
    def inputs_digest(self) -> str:
        return io.digest({"command": self.command, "inputs": self.inputs, "version": self.version})

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "version": self.version,
            "inputs": self.inputs,
            "inputs_digest": self.inputs_digest,
            "tolerances": self.tolerances,
            "results": self.results,
            "timings": self.timings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# configuration ------------------------------------------------------------------------


def load_config(path: str | None) -> Tolerances:
    """Tolerances from a ``key = value`` file; ``#`` comments and ``[section]`` lines are ignored."""
    if path is None:
        return DEFAULT_TOL
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    fields = {f.name for f in dataclasses.fields(Tolerances)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise InvalidConfig(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.removeprefix("tol_")
        if key not in fields:
            raise InvalidConfig(f"{path}:{lineno}: unknown tolerance {key!r}")
        try:
            values[key] = float(val.strip("\"'"))
        except ValueError:
            raise InvalidConfig(f"{path}:{lineno}: {val!r} is not a number") from None
        if not values[key] > 0:
            raise InvalidConfig(f"{path}:{lineno}: tolerances must be positive")
    return dataclasses.replace(DEFAULT_TOL, **values)


def _with_tol(scenario: QuantumScenario, tol: Tolerances) -> QuantumScenario:
    return dataclasses.replace(scenario, tol=tol)


def _phase(text: str) -> float:
    t = text.strip().lower()
    if t in ("0", "0.0"):
        return 0.0
    if t in ("pi", "π", str(math.pi)):
        return math.pi
    raise argparse.ArgumentTypeError("phase must be 0 or pi")


def _parse_axioms(text: str | None) -> frozenset[str]:
    if text is None:
        return FULL_AXIOMS
    out = set()
    for part in filter(None, (p.strip() for p in text.split(","))):
        name = AXIOM_ALIASES.get(part.lower(), part)
        if name not in FULL_AXIOMS:
            raise InvalidConfig(f"unknown axiom {part!r}; choose from {sorted(AXIOM_ALIASES)}")
        out.add(name)
    return frozenset(out)


# output helpers ------------------------------------------------------------------------


def _emit_csv(rows: list[dict], out) -> None:
    if not rows:
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def _table(rows: list[dict]) -> str:
    if not rows:
        return "(empty)"
    cols = list(rows[0])
    cells = [[str(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _finish(args, report: RunReport, human: str, csv_rows: list[dict] | None = None) -> None:
    if args.emit == "json":
        print(report.to_json())
    elif args.emit == "csv":
        buf = _io.StringIO()
        _emit_csv(csv_rows or [], buf)
        sys.stdout.write(buf.getvalue())
    else:
        print(human)
    if getattr(args, "report", None):
        Path(args.report).write_text(report.to_json() + "\n")


def _fmt(p: float) -> str:
    return f"{p:.12f}".rstrip("0").rstrip(".") if p else "0"


# mzi ----------------------------------------------------------------------------------


def probability_rows(scenario: QuantumScenario, members=None) -> list[dict]:
    zeros = zero_structure(scenario)
    rows = []
    for prep in scenario.preparations:
        for member, meas in scenario.contexts():
            if members is not None and member not in members:
                continue
            for outcome, p in evaluate(scenario, prep, member, meas):
                rows.append({
                    "preparation": prep,
                    "member": member,
                    "measurement": meas,
                    "outcome": outcome,
                    "probability": p,
                    "zero": (prep, member, meas, outcome) in zeros.entries,
                })
    return rows


def cmd_mzi(args, tol: Tolerances) -> tuple[RunReport, str, list[dict]]:
    fig = args.figure
    phase = args.phase if args.phase is not None else (math.pi if fig in (2, 4) else 0.0)
    config = MziConfig.figure(fig, args.alpha2, phase)
    sc = _with_tol(build_mzi(config), tol)
    members = [m for m, ph in PHASES.items() if ph == phase] if args.phase is not None else None
    rows = probability_rows(sc, members)
    inputs = {"figure": fig, "phase": "pi" if phase else "0", "alpha2": args.alpha2, "config": config.to_dict()}
    zero_list = [r for r in rows if r["zero"]]
    report = RunReport(
        "mzi",
        inputs,
        {"probabilities": rows, "zero_structure": [[r["preparation"], r["member"], r["outcome"]] for r in zero_list]},
        {},
        tol.as_dict(),
    )
    # one line per (preparation, member): probability of each detector
    lines = [f"figure {fig}  phase={'pi' if phase else '0'}  outcomes {', '.join(config.outcomes)}"]
    grid = []
    for prep in sc.preparations:
        for member in (members or list(PHASES)):
            ps = {r["outcome"]: r["probability"] for r in rows if r["preparation"] == prep and r["member"] == member}
            grid.append({"preparation": prep, "member": member, **{o: _fmt(ps[o]) for o in config.outcomes}})
    lines.append(_table(grid))
    lines.append("zero structure: " + (", ".join(f"P({r['outcome']} | {r['preparation']}, {r['member']})=0"
                                                  for r in zero_list) or "none"))
    return report, "\n".join(lines), rows


# construct ---------------------------------------------------------------------------


def cmd_construct(args, tol: Tolerances) -> tuple[RunReport, str, list[dict]]:
    a2 = args.alpha2
    if not 0 < a2 < 1:
        raise InvalidConfig("alpha2 must lie strictly between 0 and 1")
    if args.N < 1:
        raise InvalidConfig("N must be >= 1")
    con = build_construction(math.sqrt(a2), math.sqrt(1 - a2), args.N, tol)
    cert = verify_condition(con)
    results = {
        "M": con.M,
        "dim": con.dim,
        "gamma": con.gamma,
        "delta": con.delta,
        "invariant_defects": con.invariant_defects(),
        "certificate": cert.to_dict(),
    }
    lines = [
        f"alpha^2={a2} N={args.N} M={con.M} gamma={con.gamma:.6g} delta={con.delta:.6g}",
        _table([{"n": r.n, "disjunct": r.kind, "|<d_n|a0>|": f"{r.a0_overlap:.2e}",
                 "|<d_n|U[n]psi>|": f"{r.c_overlap:.2e}"} for r in cert.per_n]),
        "certificate OK",
    ]
    if args.restricted:
        zero = basis_vector(con.dim, 0)
        proto = build_restricted_protocol(con.phi, zero, con)
        comp = max(float(np.max(np.abs(proto.composite(m) - con.U[m]))) for m in range(con.dim))
        stats = 0.0
        for state in (con.phi, con.psi):
            for m in range(con.dim):
                direct = np.array([abs(np.vdot(d, con.U[m] @ state)) ** 2 for d in con.d_basis])
                stats = max(stats, float(np.max(np.abs(proto.statistics(state, m) - direct))))
        wz = float(np.linalg.norm(proto.W @ con.phi - zero))
        ok = comp <= tol.unitary and stats <= tol.unitary
        results["restricted"] = {"composite_defect": comp, "statistics_defect": stats, "W_phi_defect": wz, "ok": ok}
        lines.append(f"restricted protocol: max|W^dag U~ W - U| = {comp:.2e}, "
                     f"max stat difference = {stats:.2e} -> {'OK' if ok else 'FAILED'}")
    if args.bundle:
        con.save(args.bundle, cert)
        lines.append(f"bundle written to {args.bundle}")
    report = RunReport(
        "construct",
        {"alpha2": a2, "N": args.N, "restricted": bool(args.restricted)},
        results,
        {},
        tol.as_dict(),
    )
    rows = [{"n": r.n, "disjunct": r.kind, "a0_overlap": r.a0_overlap, "c_overlap": r.c_overlap} for r in cert.per_n]
    return report, "\n".join(lines), rows


# scan ---------------------------------------------------------------------------------


def alpha2_grid(step: float) -> list[float]:
    if not 0 < step < 1:
        raise InvalidConfig("alpha2 step must lie in (0, 1)")
    n = int(round(1 / step))
    if abs(n * step - 1) > 1e-9:
        raise InvalidConfig("alpha2 step must divide 1")
    return [round(k * step, 12) for k in range(1, n)]


def cmd_scan(args, tol: Tolerances) -> tuple[RunReport, str, list[dict]]:
    if args.N_min < 1 or args.N_max < args.N_min:
        raise InvalidConfig("need 1 <= N-min <= N-max")
    Ns = list(range(args.N_min, args.N_max + 1))
    grid = alpha2_grid(args.step)
    rows = scan_feasibility(Ns, grid, args.workers)
    boundary = empirical_boundary(rows)
    summary = []
    for N in Ns:
        b = feasible_overlap_bound(N)
        best = boundary.get(N)
        summary.append({
            "N": N,
            "empirical": best,
            "bound": b,
            # agreement within one grid step below the bound
            "agrees": best is not None and best <= b + 1e-12 and b - best < args.step - 1e-12,
        })
    report = RunReport(
        "scan",
        {"N": [args.N_min, args.N_max], "alpha2_step": args.step},
        {"rows": rows, "boundary": summary},
        {},
        tol.as_dict(),
    )
    human = _table([{**s, "empirical": "-" if s["empirical"] is None else f"{s['empirical']:.4g}",
                     "bound": f"{s['bound']:.4g}"} for s in summary])
    return report, human, rows


# prove --------------------------------------------------------------------------------

BUILDERS = ("mzi-fig1", "mzi-fig2", "mzi-fig3", "mzi-fig4", "construction")


def _build_source(args, tol):
    if args.scenario:
        return _with_tol(QuantumScenario.load(args.scenario, tol), tol), None
    tag = args.builder
    if tag is None:
        raise InvalidConfig("give --builder or --scenario")
    if tag.startswith("mzi-fig"):
        fig = int(tag[-1])
        config = MziConfig.figure(fig, args.alpha2 if args.alpha2 is not None else 0.2)
        return _with_tol(build_mzi(config), tol), config
    if tag == "construction":
        a2 = args.alpha2 if args.alpha2 is not None else 0.5
        if not 0 < a2 < 1:
            raise InvalidConfig("alpha2 must lie strictly between 0 and 1")
        con = build_construction(math.sqrt(a2), math.sqrt(1 - a2), args.N, tol)
        return con.scenario(), con
    raise InvalidConfig(f"unknown builder {tag!r}; choose from {BUILDERS}")


def cmd_prove(args, tol: Tolerances) -> tuple[RunReport, str, list[dict], int]:
    sc, source = _build_source(args, tol)
    phi, psi = (s.strip() for s in args.pair.split(","))
    axioms = _parse_axioms(args.axioms)
    timings = {}
    results: dict = {}
    lines = []
    code = EXIT_OK

    t0 = time.perf_counter()
    trace_ok = False
    try:
        trace = derive_nonoverlap(sc, source, args.variant, phi, psi)
        check = check_trace(trace, sc)
        trace_ok = check.ok
        results["trace"] = {**trace.to_dict(), "check": dataclasses.asdict(check)}
        lines.append(trace.render())
        lines.append(f"trace check: {'Ok' if check.ok else f'FirstInvalidStep {check.first_invalid}: {check.reason}'}")
        if args.trace_out:
            trace.save(args.trace_out)
        if not check.ok:
            code = EXIT_DISAGREE
    except (ConditionNotMet, PreconditionNotApplicable) as exc:
        results["trace"] = {"error": str(exc)}
        lines.append(f"no trace: {exc}")
        code = EXIT_INFEASIBLE
    timings["trace_seconds"] = time.perf_counter() - t0

    if args.search is not None:
        t0 = time.perf_counter()
        verdicts = []
        sat = None
        for K in range(1, args.search + 1):
            problem = FeasibilityProblem(sc, axioms, K, (phi, psi), args.set_preserving, int(args.budget),
                                         propagate=not args.no_propagate)
            res = feasibility_search(problem, args.workers)
            entry = {"K": K, "verdict": res.verdict, "explored": res.explored}
            if res.verdict == "unsat":
                entry["lemmas"] = res.lemmas
                entry["assumption"] = res.assumption
            else:
                entry["violated"] = list(res.violated)
                entry["classification"] = type(classify_model(res.model)).__name__
            verdicts.append(entry)
            if res.verdict == "sat":
                sat = res
                break
        timings["search_seconds"] = time.perf_counter() - t0
        results["search"] = {"axioms": sorted(axioms), "set_preserving": args.set_preserving, "runs": verdicts}
        needed = {"OnticIndifference", "PossibilisticCompleteness", "OutcomeCoverage"}
        disagree = trace_ok and sat is not None and needed <= axioms and not args.set_preserving
        results["agreement"] = not disagree
        if sat is not None:
            lines.append(f"search: Sat at K={verdicts[-1]['K']} "
                         f"({verdicts[-1]['classification']}, violates {', '.join(sat.violated) or 'nothing'})")
            if args.witness:
                sat.model.save(args.witness)
                lines.append(f"witness written to {args.witness}")
        else:
            lines.append(f"search: Unsat for K=1..{args.search} "
                         f"({sum(v['explored'] for v in verdicts)} nodes; {verdicts[-1]['assumption']})")
        if disagree:
            lines.append("DISAGREEMENT: the trace proves disjoint supports but the search found an overlapping model")
            code = EXIT_DISAGREE
    inputs = {
        "builder": args.builder,
        "scenario_digest": io.digest(sc.to_dict()),
        "variant": args.variant,
        "pair": [phi, psi],
        "axioms": sorted(axioms),
        "search": args.search,
        "set_preserving": args.set_preserving,
    }
    report = RunReport("prove", inputs, results, timings, tol.as_dict())
    rows = [{"K": v["K"], "verdict": v["verdict"], "explored": v["explored"]}
            for v in results.get("search", {}).get("runs", [])]
    return report, "\n".join(lines), rows, code


# check-model ---------------------------------------------------------------------------


def cmd_check_model(args, tol: Tolerances) -> tuple[RunReport, str, list[dict]]:
    try:
        doc = json.loads(Path(args.model).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig(f"cannot read model {args.model}: {exc}") from exc
    model = OntologicalModel.from_dict(doc)
    if model.scenario is not None:
        model = dataclasses.replace(model, scenario=_with_tol(model.scenario, tol))
    cls = classify_model(model)
    results: dict = {"classification": cls.kind}
    lines = []
    if hasattr(cls, "overlap"):
        results["overlap"] = {"pair": list(cls.pair), "states": sorted(cls.overlap)}
        lines.append(f"PsiEpistemic: supports of {cls.pair[0]} and {cls.pair[1]} share {sorted(cls.overlap)}")
    else:
        lines.append("PsiOntic")
    rows = []
    if model.scenario is not None:
        cv = check_possibilistic_completeness(model)
        results["completeness_violations"] = [[*c.event, c.direction] for c in cv]
        lines.append("possibilistic completeness: " + ("Ok" if not cv else f"{len(cv)} violation(s)"))
        for c in cv:
            lines.append(f"  {c.event}: {c.direction}")
        for mode, flag in (("pointwise", False), ("set-preserving", True)):
            viol = indifference_violations(model, flag)
            results[f"indifference_{mode}"] = [list(v) for v in viol]
            lines.append(f"ontic indifference ({mode}): " + ("Ok" if not viol else "Violation"))
            for m, p, lam in viol:
                lines.append(f"  member {m} on {p}: {lam} is moved")
                rows.append({"mode": mode, "member": m, "preparation": p, "witness": lam})
    else:
        lines.append("model has no scenario; only the classification is available")
    report = RunReport("check-model", {"model_digest": io.digest(doc)}, results, {}, tol.as_dict())
    return report, "\n".join(lines), rows


# parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onticlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit", choices=("table", "json", "csv"), default="table")
    common.add_argument("--config", help="key = value file of tolerances")
    common.add_argument("--report", help="also write the JSON run report here")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mzi", parents=[common], help="interferometer probability table and zero structure")
    m.add_argument("--figure", type=int, choices=(1, 2, 3, 4), default=1)
    m.add_argument("--phase", type=_phase, default=None, help="0 or pi (default depends on the figure)")
    m.add_argument("--alpha2", type=float, default=0.2, help="alpha^2 for the BS3 figures")

    c = sub.add_parser("construct", parents=[common], help="build and certify the unitary construction")
    c.add_argument("--alpha2", type=float, required=True)
    c.add_argument("--N", type=int, required=True)
    c.add_argument("--restricted", action="store_true", help="also check the conjugated protocol")
    c.add_argument("--bundle", help="write the construction and certificate as JSON")

    s = sub.add_parser("scan", parents=[common], help="feasibility over a grid of (N, alpha^2)")
    s.add_argument("--N-min", dest="N_min", type=int, default=2)
    s.add_argument("--N-max", dest="N_max", type=int, default=10)
    s.add_argument("--step", type=float, default=0.05)
    s.add_argument("--workers", type=int, default=None)

    pr = sub.add_parser("prove", parents=[common], help="proof trace plus optional model search")
    src = pr.add_mutually_exclusive_group(required=True)
    src.add_argument("--builder", choices=BUILDERS)
    src.add_argument("--scenario", help="scenario JSON file")
    pr.add_argument("--alpha2", type=float, default=None)
    pr.add_argument("--N", type=int, default=2)
    pr.add_argument("--pair", default="phi,psi", help="the two preparations, comma separated")
    pr.add_argument("--variant", choices=("plain", "restricted"), default="plain")
    pr.add_argument("--axioms", default=None, help="comma list of indifference,completeness,coverage,separability")
    pr.add_argument("--search", type=int, default=None, metavar="K", help="search ontic spaces of size 1..K")
    pr.add_argument("--set-preserving", action="store_true", help="weaker reading of indifference in the search")
    pr.add_argument("--no-propagate", action="store_true", help="disable unary pruning in the search")
    pr.add_argument("--budget", type=float, default=1e7)
    pr.add_argument("--workers", type=int, default=None)
    pr.add_argument("--trace-out")
    pr.add_argument("--witness", help="where to save a Sat witness model")

    cm = sub.add_parser("check-model", parents=[common], help="classify a model and run the assumption checkers")
    cm.add_argument("model")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        tol = load_config(args.config)
        code = EXIT_OK
        if args.command == "mzi":
            report, human, rows = cmd_mzi(args, tol)
        elif args.command == "construct":
            report, human, rows = cmd_construct(args, tol)
        elif args.command == "scan":
            report, human, rows = cmd_scan(args, tol)
        elif args.command == "prove":
            report, human, rows, code = cmd_prove(args, tol)
        else:
            report, human, rows = cmd_check_model(args, tol)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConditionViolated, ConditionNotMet, PreconditionNotApplicable) as exc:
        print(f"not applicable: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvalidConfig, ScenarioFormatError, UnknownName, OnticLabError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report.timings["total_seconds"] = time.perf_counter() - t0
    _finish(args, report, human, rows)
    return code


if __name__ == "__main__":
    sys.exit(main())
