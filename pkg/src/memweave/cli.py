"""``memweave`` command line: run, compare, equiv, corpus list, fences.

Exit codes: 0 all checks pass, 1 semantic mismatch, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .axiomatic import is_axiomatic_candidate
from .corpus import builtin_corpus
from .explore import ExplorationError, Limits
from .litmus import MODEL_IDS, LitmusTest
from .mapping import insert_sc_fences, map_cpp_program, parse_cpp_ops
from .models.fm import TopologyError, parse_topology
from .parser import LitmusSyntaxError, format_litmus, format_program, load_litmus, parse_condition
from .runner import AXIOMATIC, Skip, model_outcomes, run_test

OK, MISMATCH, USAGE = 0, 1, 2
OPERATIONAL = ("SC", "TSO", "PSO", "WMM", "WMM-S")


class UsageError(Exception):
    pass


# -- input handling --------------------------------------------------------

def _load_tests(args) -> tuple[list[LitmusTest], list[dict]]:
    tests, errors = [], []
    if getattr(args, "corpus", False):
        tests.extend(e.test for e in builtin_corpus())
    for path in getattr(args, "paths", []) or []:
        try:
            tests.append(load_litmus(path))
        except OSError as e:
            errors.append({"source": str(path), "message": e.strerror or str(e)})
        except (LitmusSyntaxError, TopologyError) as e:
            errors.append({"source": str(path), "message": str(e)})
    if not tests and not errors:
        raise UsageError("no tests given: pass litmus files or --corpus")
    return tests, errors


def _parse_models(text) -> list[str] | None:
    if text is None:
        return None
    models = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in models if m not in MODEL_IDS]
    if bad or not models:
        raise UsageError(f"unknown model(s): {', '.join(bad) or '(none)'}; choose from {', '.join(MODEL_IDS)}")
    return models


def _topology(args, models):
    if not getattr(args, "topology", None):
        return None
    if models is None or any(m != "FM" for m in models):
        raise UsageError("--topology applies only to the FM model (use --models FM)")
    try:
        return parse_topology(Path(args.topology).read_text())
    except OSError as e:
        raise UsageError(f"{args.topology}: {e.strerror or e}") from None
    except TopologyError as e:
        raise UsageError(f"{args.topology}: {e}") from None


def _limits(args) -> Limits:
    return Limits(max_states=args.max_states)


def _map(fn, items, jobs: int):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# -- report ----------------------------------------------------------------

def _report(command: str, results, errors, extra=None) -> dict:
    mismatches = sum(r["status"] in ("mismatch", "error") for r in results)
    if extra and "equivalences" in extra:
        mismatches += sum(not e["equal"] for e in extra["equivalences"])
    code = USAGE if errors else (MISMATCH if mismatches else OK)
    rep = {
        "command": command,
        "results": results,
        "errors": errors,
        "summary": {"checked": len(results), "mismatches": mismatches, "errors": len(errors)},
        "exit_code": code,
    }
    if extra:
        rep.update(extra)
    return rep


_COLUMNS = ("test", "model", "verdict", "expected", "match", "outcomes", "states", "seconds", "status")


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "NO"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def render_table(rep: dict) -> str:
    out = []
    if rep["results"]:
        rows = [[_cell(r[c]) for c in _COLUMNS] for r in rep["results"]]
        widths = [max(len(c), *(len(row[i]) for row in rows)) for i, c in enumerate(_COLUMNS)]
        out.append("  ".join(c.ljust(w) for c, w in zip(_COLUMNS, widths)).rstrip())
        for r, row in zip(rep["results"], rows):
            out.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
            if r.get("message"):
                out.append(f"    message: {r['message']}")
            for line in r.get("outcome_list", []):
                out.append(f"    outcome: {line}")
            if r.get("trace"):
                out.append("    witness:")
                out.extend(f"      {line}" for line in r["trace"])
    for c in rep.get("comparisons", []):
        models = c["models"]
        w = max(len(m) for m in models) + 1
        out.append(f"\ncontainment for {c['test']} (row subset of column):")
        out.append(" " * w + " ".join(m.rjust(w) for m in models))
        for m, row in zip(models, c["contains"]):
            out.append(m.ljust(w) + " ".join(("yes" if x else "no").rjust(w) for x in row))
    for e in rep.get("equivalences", []):
        status = "equal" if e["equal"] else "DIFFERENT"
        out.append(f"{e['test']}: {status} (WMM {e['operational']} outcomes, WMM-AX {e['axiomatic']})")
        for o in e["only_operational"]:
            out.append(f"    only WMM:    {o}")
        for o in e["only_axiomatic"]:
            out.append(f"    only WMM-AX: {o}")
    for err in rep["errors"]:
        out.append(f"error: {err['source']}: {err['message']}")
    s = rep["summary"]
    out.append(f"checked {s['checked']}, mismatches {s['mismatches']}, errors {s['errors']}, exit {rep['exit_code']}")
    return "\n".join(out)


def _emit(rep: dict, fmt: str) -> int:
    if fmt == "json":
        print(json.dumps(rep, indent=2))
    else:
        print(render_table(rep))
    return rep["exit_code"]


# -- commands --------------------------------------------------------------

def _run_one(task):
    test, models, limits, topology, trace, with_outcomes = task
    return [run_test(test, m, limits, topology, trace).to_dict(with_outcomes) for m in models]


def cmd_run(args) -> int:
    models = _parse_models(args.models)
    topology = _topology(args, models)
    tests, errors = _load_tests(args)
    limits = _limits(args)
    tasks = [(t, models or list(t.expected) or list(MODEL_IDS), limits, topology, args.trace, False)
             for t in tests]
    results = [r for rs in _map(_run_one, tasks, args.jobs) for r in rs]
    return _emit(_report("run", results, errors), args.format)


def _compare_one(task):
    test, models, limits, topology = task
    sets, results = {}, []
    for m in models:
        res = run_test(test, m, limits, topology)
        results.append(res.to_dict(with_outcomes=True))
        if res.status in ("ok", "mismatch"):
            sets[m] = set(res.outcome_list)
    usable = [m for m in models if m in sets]
    matrix = [[sets[a] <= sets[b] for b in usable] for a in usable]
    return results, {"test": test.name, "models": usable, "contains": matrix}


def cmd_compare(args) -> int:
    models = _parse_models(args.models) or list(OPERATIONAL)
    topology = _topology(args, models)
    tests, errors = _load_tests(args)
    limits = _limits(args)
    done = _map(_compare_one, [(t, models, limits, topology) for t in tests], args.jobs)
    results = [r for rs, _ in done for r in rs]
    return _emit(_report("compare", results, errors, {"comparisons": [c for _, c in done]}), args.format)


def _equiv_one(task):
    test, limits = task
    op = model_outcomes("WMM", test, limits)
    ax = model_outcomes(AXIOMATIC, test)
    only_op = sorted(str(o) for o in op.outcomes - ax.outcomes)
    only_ax = sorted(str(o) for o in ax.outcomes - op.outcomes)
    return {"test": test.name, "equal": not only_op and not only_ax, "operational": len(op),
            "axiomatic": len(ax), "only_operational": only_op, "only_axiomatic": only_ax}


def cmd_equiv(args) -> int:
    args.corpus = args.corpus_branch_free
    tests, errors = _load_tests(args)
    explicit = {id(t) for t in tests[len(builtin_corpus()) if args.corpus else 0:]}
    keep = []
    for t in tests:
        if is_axiomatic_candidate(t.program):
            keep.append(t)
        elif id(t) in explicit:
            why = "has branches" if not t.program.is_branch_free else "too large for axiomatic enumeration"
            errors.append({"source": t.name, "message": f"rejected: {why}"})
    try:
        eqs = _map(_equiv_one, [(t, _limits(args)) for t in keep], args.jobs)
    except (ExplorationError, Skip) as e:
        errors.append({"source": "equiv", "message": str(e)})
        eqs = []
    return _emit(_report("equiv", [], errors, {"equivalences": eqs}), args.format)


def cmd_corpus_list(args) -> int:
    entries = builtin_corpus()
    if args.format == "json":
        print(json.dumps([
            {"name": e.name, "family": e.family, "provenance": e.provenance,
             "expected": {m: v.value for m, v in e.test.expectations}}
            for e in entries], indent=2))
        return OK
    w = max(len(e.name) for e in entries)
    for e in entries:
        grid = ", ".join(f"{m}:{v.value}" for m, v in e.test.expectations)
        print(f"{e.name.ljust(w)}  {e.family:14} {grid}")
    return OK


def cmd_fences(args) -> int:
    try:
        text = Path(args.path).read_text()
    except OSError as e:
        raise UsageError(f"{args.path}: {e.strerror or e}") from None
    try:
        if args.cpp:
            body = [ln for ln in text.splitlines() if not ln.strip().startswith("exists")]
            cond = [ln.strip()[len("exists"):] for ln in text.splitlines() if ln.strip().startswith("exists")]
            program = map_cpp_program(parse_cpp_ops("\n".join(body)))
            name = Path(args.path).stem
            if cond:
                test = LitmusTest(name, program, parse_condition(cond[0], program))
                sys.stdout.write(format_litmus(test))
            else:
                print("\n".join([f"# {name}", *format_program(program)]))
            return OK
        test = load_litmus(args.path)
    except (LitmusSyntaxError, TopologyError) as e:
        raise UsageError(f"{args.path}: {e}") from None
    fenced = dataclasses.replace(test, name=test.name + "+SC-fences",
                                 program=insert_sc_fences(test.program), expectations=())
    sys.stdout.write(format_litmus(fenced))
    return OK


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memweave", description="Explore litmus tests under weak memory models.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, models_help):
        sp.add_argument("paths", nargs="*", help="litmus files")
        sp.add_argument("--corpus", action="store_true", help="include the built-in corpus")
        sp.add_argument("--models", help=models_help)
        sp.add_argument("--format", choices=("table", "json"), default="table")
        sp.add_argument("--max-states", type=int, default=None,
                        help="state limit per exploration (default: $MEMWEAVE_MAX_STATES or 5000000)")
        sp.add_argument("--topology", help="FM topology file (only with --models FM)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes, one test per task")

    run = sub.add_parser("run", help="check tests against their expected verdicts")
    common(run, "comma-separated model ids (default: each test's expected models)")
    run.add_argument("--trace", action="store_true", help="attach a shortest witness to every allow verdict")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="outcome sets and pairwise containment")
    common(cmp_, f"comma-separated model ids (default: {','.join(OPERATIONAL)})")
    cmp_.set_defaults(func=cmd_compare)

    eq = sub.add_parser("equiv", help="operational WMM against axiomatic WMM")
    eq.add_argument("paths", nargs="*")
    eq.add_argument("--corpus-branch-free", action="store_true",
                    help="every branch-free corpus test within the enumeration bound")
    eq.add_argument("--format", choices=("table", "json"), default="table")
    eq.add_argument("--max-states", type=int, default=None)
    eq.add_argument("--jobs", type=int, default=1)
    eq.set_defaults(func=cmd_equiv)

    cor = sub.add_parser("corpus", help="built-in corpus")
    cor_sub = cor.add_subparsers(dest="corpus_command", required=True)
    ls = cor_sub.add_parser("list", help="list built-in tests and their expectations")
    ls.add_argument("--format", choices=("table", "json"), default="table")
    ls.set_defaults(func=cmd_corpus_list)

    fen = sub.add_parser("fences", help="print a test with SC fences inserted, or a mapped C++ op file")
    fen.add_argument("path")
    fen.add_argument("--cpp", action="store_true", help="input is a one-op-per-line C++ atomics file")
    fen.set_defaults(func=cmd_fences)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.func(args)
    except UsageError as e:
        print(f"memweave: error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
