"""Timing of the two evaluation routes on growing random databases."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Iterable

from .ctl.formula import Formula, atoms
from .ctl.normal import to_enf
from .ctl.parser import parse_formula
from .datalog.engine import evaluate
from .decision import evaluate_std_via_ctl
from .generators import random_graph
from .kripke.database import kripke_to_db
from .std import ctl_to_std, flatten

DEFAULT_FORMULA = "E[ p U q ]"
ROUTES = ("via-ctl", "datalog")


@dataclass(frozen=True)
class Timing:
    size: int
    route: str
    millis: float


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best * 1000.0


def run_bench(
    sizes: Iterable[int],
    formula: Formula | str = DEFAULT_FORMULA,
    seed: int = 0,
    repeat: int = 3,
) -> list[Timing]:
    """Best-of-``repeat`` wall time per route for each transition count in ``sizes``."""
    f = parse_formula(formula) if isinstance(formula, str) else formula
    f = to_enf(f)
    ap = tuple(dict.fromkeys(("p", "q") + atoms(f)))
    p = ctl_to_std(f, ap)
    prog = flatten(p)
    rng = random.Random(seed)
    out = []
    for n_edges in sizes:
        d = kripke_to_db(random_graph(rng, int(n_edges), ap))
        out.append(Timing(int(n_edges), "via-ctl", _best(lambda: evaluate_std_via_ctl(p, d), repeat)))

        def direct():
            # start cold: no indexes or derived relations from earlier runs
            d.facts.clear_cache()
            evaluate(prog, d)

        out.append(Timing(int(n_edges), "datalog", _best(direct, repeat)))
    return out


def to_csv(rows: list[Timing]) -> str:
    lines = ["size,route,millis"]
    lines += [f"{r.size},{r.route},{r.millis:.3f}" for r in rows]
    return "\n".join(lines) + "\n"


def growth_ratios(rows: list[Timing], route: str) -> list[float]:
    """Time ratio between consecutive sizes for one route."""
    pts = sorted((r.size, r.millis) for r in rows if r.route == route)
    return [b[1] / a[1] if a[1] > 0 else float("inf") for a, b in zip(pts, pts[1:])]
