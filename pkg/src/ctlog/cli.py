"""Command-line front end.

Exit codes: 0 success (or "holds"), 1 counterexample or no model within the
bound, 2 usage or input error, 3 internal error.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from .bench import DEFAULT_FORMULA, run_bench, to_csv
from .ctl.checker import ModelCheckError, model_check
from .ctl.formula import Formula, atoms
from .ctl.normal import to_enf, to_pnf
from .ctl.parser import FormulaSyntaxError, parse_formula, render_formula
from .datalog.analysis import ProgramError
from .datalog.engine import EvaluationError, evaluate, evaluate_succ
from .datalog.parser import DatalogSyntaxError, parse_program, render_program
from .datalog.syntax import Program
from .decision import (
    CounterexampleFound,
    Holds,
    bounded_contained,
    bounded_satisfiable,
    evaluate_std_via_ctl,
    std_contained,
)
from .facts import FactStore, FactSyntaxError, parse_facts
from .kripke.database import SchemaError, parse_database, total_closure
from .kripke.structure import StructureError
from .kripke.textio import KripkeSyntaxError, parse_kripke, render_kripke
from .operators import TreeError
from .std import NotInFragmentError, ctl_to_std, flatten, recognize_std, std_to_ctl
from .tds import ctl_to_tds, flatten_tds

EXIT_OK, EXIT_COUNTER, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

# errors caused by the input rather than by the program
INPUT_ERRORS = (
    FormulaSyntaxError,
    DatalogSyntaxError,
    KripkeSyntaxError,
    FactSyntaxError,
    SchemaError,
    StructureError,
    ProgramError,
    EvaluationError,
    NotInFragmentError,
    TreeError,
    ModelCheckError,
    OSError,
)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _formula(args, inline: str = "formula", file: str = "formula_file") -> Formula:
    text = getattr(args, inline, None)
    path = getattr(args, file, None)
    if (text is None) == (path is None):
        raise UsageError(f"give exactly one of --{inline.replace('_', '-')} and --{file.replace('_', '-')}")
    return parse_formula(text if text is not None else _read(path))


def _emit(args, text: str) -> None:
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


_ATOMS = re.compile(r"^\s*%\s*atoms\s*:(.*)$", re.MULTILINE)


def _program_atoms(text: str) -> tuple[str, ...] | None:
    m = _ATOMS.search(text)
    return tuple(m.group(1).split()) if m else None


def _with_atoms(program: Program, ap: tuple[str, ...]) -> str:
    text = render_program(program)
    return text.replace("\n", f"\n% atoms: {' '.join(ap)}\n", 1) if ap else text


def _witness(structure, state: str) -> str:
    return render_kripke(structure) + f"# state: {state}\n"


# -- subcommands ----------------------------------------------------------------


def cmd_translate(args) -> int:
    if args.direction == "std2ctl":
        if args.program is None:
            raise UsageError("std2ctl reads a program: give --program")
        text = _read(args.program)
        p = recognize_std(parse_program(text))
        names = tuple(args.atoms) if args.atoms else _program_atoms(text)
        _emit(args, render_formula(std_to_ctl(p, names)) + "\n")
        return EXIT_OK
    f = _formula(args)
    if args.direction == "ctl2std":
        g = to_enf(f)
        p = ctl_to_std(g, tuple(args.atoms) if args.atoms else None)
        _emit(args, _with_atoms(flatten(p), p.ap))
    else:
        g = to_pnf(f)
        p = ctl_to_tds(g, tuple(args.atoms) if args.atoms else None)
        _emit(args, _with_atoms(flatten_tds(p, args.c_max), p.ap))
    return EXIT_OK


def _goal_text(store: FactStore, goal: str) -> str:
    out = FactStore(store.symbols)
    if goal in store:
        out.set_relation(goal, store.relation(goal), store.counter_cols(goal))
    return out.to_text()


def cmd_eval(args) -> int:
    text = _read(args.program)
    program = parse_program(text)
    dbtext = _read(args.database)
    if args.engine == "via-ctl":
        d = parse_database(dbtext)
        p = recognize_std(program)
        _emit(args, evaluate_std_via_ctl(p, d).to_text())
        return EXIT_OK
    facts = parse_facts(dbtext)
    if args.engine == "succ":
        c_max = args.c_max if args.c_max is not None else max(1, len(facts.constants()))
        result = evaluate_succ(program, facts, c_max)
    else:
        if args.c_max is not None:
            raise UsageError("--c-max only applies to --engine succ")
        result = evaluate(program, facts)
    _emit(args, result.to_text() if args.all else _goal_text(result, program.goal))
    return EXIT_OK


def cmd_mc(args) -> int:
    k = parse_kripke(_read(args.kripke))
    truth = model_check(k, _formula(args))
    order = {name: i for i, name in enumerate(k.names.names())}
    _emit(args, "".join(f"{s}\n" for s in sorted(truth, key=order.__getitem__)))
    return EXIT_OK


def cmd_closure(args) -> int:
    _emit(args, total_closure(parse_database(_read(args.database))).to_text())
    return EXIT_OK


def cmd_normalize(args) -> int:
    f = _formula(args)
    g = to_enf(f) if args.form == "enf" else to_pnf(f)
    _emit(args, render_formula(g) + "\n")
    return EXIT_OK


def cmd_sat(args) -> int:
    v = bounded_satisfiable(_formula(args), args.bound)
    if isinstance(v, Holds):
        _emit(args, "satisfiable\n" + _witness(v.structure, v.state))
        return EXIT_OK
    note = "conclusive" if v.complete else f"not conclusive below {v.complete_at} states"
    _emit(args, f"no model with at most {v.bound} states ({note})\n")
    return EXIT_COUNTER


def cmd_contains(args) -> int:
    formulas = args.f1 is not None or args.f2 is not None
    programs = args.p1 is not None or args.p2 is not None
    if formulas == programs:
        raise UsageError("give either --f1/--f2 or --p1/--p2")
    if formulas:
        if args.f1 is None or args.f2 is None:
            raise UsageError("give both --f1 and --f2")
        f1, f2 = parse_formula(args.f1), parse_formula(args.f2)
        ap = tuple(dict.fromkeys(atoms(f1) + atoms(f2)))
        v = bounded_contained(f1, f2, args.bound, ap)
    else:
        if args.p1 is None or args.p2 is None:
            raise UsageError("give both --p1 and --p2")
        t1, t2 = _read(args.p1), _read(args.p2)
        p1, p2 = recognize_std(parse_program(t1)), recognize_std(parse_program(t2))
        names = _program_atoms(t1) or _program_atoms(t2)
        if names:
            p1 = type(p1)(p1.root, p1.n, names[: p1.n])
            p2 = type(p2)(p2.root, p2.n, names[: p2.n])
        v = std_contained(p1, p2, args.bound)
    if isinstance(v, CounterexampleFound):
        text = "counterexample\n" + _witness(v.structure, v.state)
        if v.database is not None:
            text += "# database:\n" + "".join(f"# {line}\n" for line in v.database.to_text().splitlines())
        _emit(args, text)
        return EXIT_COUNTER
    note = "conclusive" if v.complete else f"not conclusive below {v.complete_at} states"
    _emit(args, f"no counterexample with at most {v.bound} states ({note})\n")
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    g = to_enf(_formula(args))
    p = ctl_to_std(g)
    back = std_to_ctl(p)
    _emit(
        args,
        f"enf: {render_formula(g)}\n"
        + _with_atoms(flatten(p), p.ap)
        + f"recovered: {render_formula(back)}\n",
    )
    return EXIT_OK if back == g else EXIT_COUNTER


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if any(s < 1 for s in sizes):
        raise UsageError("sizes must be positive")
    rows = run_bench(sizes, args.formula, seed=args.seed, repeat=args.repeat)
    _emit(args, to_csv(rows))
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------------


def _formula_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--formula", help="formula text")
    p.add_argument("--formula-file", help="file holding the formula")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctlog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="translate between formulas and programs")
    p.add_argument("direction", choices=["ctl2std", "ctl2tds", "std2ctl"])
    _formula_args(p)
    p.add_argument("--program", help="program file (std2ctl)")
    p.add_argument("--atoms", nargs="+", help="atom names for P0, P1, ...")
    p.add_argument("--c-max", type=int, help="counter bound for ctl2tds (default: symbolic)")
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_translate)

    p = sub.add_parser("eval", help="evaluate a program on a database")
    p.add_argument("--program", required=True)
    p.add_argument("--database", required=True)
    p.add_argument("--engine", choices=["datalog", "via-ctl", "succ"], default="datalog")
    p.add_argument("--c-max", type=int, help="counter bound (succ; default: number of constants)")
    p.add_argument("--all", action="store_true", help="print every derived relation, not only the goal")
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("mc", help="model check a formula on a structure")
    p.add_argument("--kripke", required=True)
    _formula_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_mc)

    p = sub.add_parser("closure", help="add self-loops at states without successors")
    p.add_argument("--database", required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_closure)

    p = sub.add_parser("normalize", help="rewrite a formula into a normal form")
    _formula_args(p)
    p.add_argument("--form", choices=["enf", "pnf"], required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_normalize)

    p = sub.add_parser("sat", help="bounded satisfiability")
    _formula_args(p)
    p.add_argument("--bound", type=int, default=3, help="largest number of states to try")
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_sat)

    p = sub.add_parser("contains", help="bounded containment of formulas or programs")
    p.add_argument("--f1")
    p.add_argument("--f2")
    p.add_argument("--p1")
    p.add_argument("--p2")
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_contains)

    p = sub.add_parser("roundtrip", help="formula to program and back")
    _formula_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_roundtrip)

    p = sub.add_parser("bench", help="time both evaluation routes; prints CSV")
    p.add_argument("--sizes", default="1000,2000,4000,8000,16000", help="comma-separated transition counts")
    p.add_argument("--formula", default=DEFAULT_FORMULA)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.run(args)
    except UsageError as e:
        print(f"ctlog {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except INPUT_ERRORS as e:
        print(f"ctlog {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # anything else is a bug
        print(f"ctlog {args.command}: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
