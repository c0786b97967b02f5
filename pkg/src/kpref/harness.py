"""Instances, random generation, duels by name, sweeps, and report emission.

Instance files are JSON:

    {"metric": {"kind": "uniform", "n": 4},
     "k": 3,
     "initial": [0, 1, 2],                  # index i is server i+1
     "requests": [{"loc": 3}, {"loc": 0, "server": 1}]}

A request without "server" is general.  Line locations may be integers,
"p/q" strings (parsed exactly) or floats.  Every ratio the harness reports is
an exact fraction whenever all underlying costs are integral.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import engine
from .adversary import eval_bounds, make_adversary
from .engine import AdversaryError, StepBudgetExceeded, duel
from .metric import (
    ExplicitMetric, LineMetric, UniformMetric,
    location_to_json, metric_from_json, parse_location,
)
from .metric_algos import Dc2, Wfa
from .model import Request, share_or_none
from .uniform_algos import Conf, Def, ExampleLru, combined_conf_def


class InstanceError(ValueError):
    pass


@dataclass
class Instance:
    metric: object
    k: int
    initial: dict                 # server -> location
    requests: list = field(default_factory=list)

    @classmethod
    def from_json(cls, obj):
        try:
            metric = metric_from_json(obj["metric"])
            k = int(obj["k"])
            raw_initial = obj["initial"]
            if len(raw_initial) != k:
                raise InstanceError(f"expected {k} initial positions, got {len(raw_initial)}")
            initial = {i + 1: parse_location(metric, loc) for i, loc in enumerate(raw_initial)}
            requests = []
            for r in obj.get("requests", []):
                loc = parse_location(metric, r["loc"])
                server = r.get("server")
                if server is not None:
                    server = int(server)
                    if not 1 <= server <= k:
                        raise InstanceError(f"request names unknown server {server}")
                requests.append(Request(loc, server))
            return cls(metric=metric, k=k, initial=initial, requests=requests)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"malformed instance: {exc}") from exc

    def to_json(self):
        return {
            "metric": self.metric.to_json(),
            "k": self.k,
            "initial": [location_to_json(self.initial[j]) for j in sorted(self.initial)],
            "requests": [
                {"loc": location_to_json(r.loc), **({"server": r.server} if r.is_specific else {})}
                for r in self.requests
            ],
        }

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")


ALGORITHMS = {
    "example-lru": ExampleLru,
    "conf": Conf,
    "def": Def,
    "dc2": Dc2,
    "wfa": Wfa,
}


def make_algorithm(name, metric, initial, wf_cap=None):
    """Build an algorithm by CLI name; "conf+def:L" is the hybrid variant."""
    if name.startswith("conf+def:"):
        return combined_conf_def(metric, initial, int(name.split(":", 1)[1]))
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; known: "
                         f"{sorted(ALGORITHMS) + ['conf+def:L']}")
    if name == "wfa":
        return Wfa(metric, initial, state_cap=wf_cap)
    return ALGORITHMS[name](metric, initial)


def standard_duel_instance(k, locations=None):
    """The canonical adversary arena: uniform metric, server j at point j-1."""
    n = (k + 1) if locations is None else locations
    return UniformMetric(n), {j: j - 1 for j in range(1, k + 1)}


def run_duel(algo_name, adversary, k, cycles, *, audit=False, wf_cap=None,
             step_budget=None):
    if isinstance(adversary, str):
        adversary = make_adversary(adversary, k)
    locations = adversary.locations_needed or k + 1
    metric, initial = standard_duel_instance(k, locations)
    factory = lambda: make_algorithm(algo_name, metric, initial, wf_cap=wf_cap)
    return duel(factory, adversary, cycles, audit=audit, step_budget=step_budget)


def fraction_str(value):
    """Exact "p/q" (or "p") for Fractions and ints; repr for floats."""
    if value is None:
        return "undefined"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    return repr(value)


def report_to_json(report):
    return {
        "algorithm": report.algorithm,
        "adversary": report.adversary,
        "k": report.k,
        "cycles": report.cycles,
        "per_cycle": [
            {"index": row.index, "alg_cost": row.alg_cost, "opt_cost": row.opt_cost,
             "requests": row.requests, "g": row.g, "f": row.f}
            for row in report.rows
        ],
        "total_alg_cost": report.total_alg_cost,
        "total_opt_cost": report.total_opt_cost,
        "ratio": fraction_str(report.ratio),
        "measured_s": fraction_str(report.measured_s),
        "wall_time_s": round(report.wall_time, 6),
    }


def run_instance(algo_name, instance, *, audit=False, wf_cap=None):
    alg = make_algorithm(algo_name, instance.metric, instance.initial, wf_cap=wf_cap)
    engine.run(alg, instance.requests, audit=audit)
    return alg


def _number_json(value):
    return fraction_str(value) if isinstance(value, Fraction) else value


def run_report(alg):
    ledger = alg.ledger
    return {
        "algorithm": alg.name,
        "total_cost": _number_json(ledger.total_cost),
        "moves": [
            {"time": m.time, "server": m.server,
             "from": location_to_json(m.src), "to": location_to_json(m.dst),
             "cost": _number_json(m.cost)}
            for m in ledger.moves
        ],
        "g": ledger.g_count,
        "f": ledger.f_count,
        "s": fraction_str(share_or_none(ledger)),
        "final": {str(j): location_to_json(p) for j, p in sorted(alg.config.pos.items())},
    }


# ---------------------------------------------------------------------------
# Random instance generation (seeded, reproducible)
# ---------------------------------------------------------------------------

def gen_random(seed, k, metric_kind="uniform", n_locations=None, n_requests=20,
               s_target=0.3, line_span=100):
    """Deterministic random instance.  Request kinds approximate s_target;
    the exact share of movement-requiring requests is whatever the run
    measures.  Uniform/explicit locations are drawn from the point set, line
    coordinates are integers in [0, line_span]."""
    rng = random.Random(seed)
    s_target = Fraction(s_target) if not isinstance(s_target, float) else s_target
    if metric_kind == "uniform":
        n = n_locations or (k + 1)
        metric = UniformMetric(n)
        pool = list(range(n))
    elif metric_kind == "line":
        metric = LineMetric()
        pool = None
    elif metric_kind == "explicit":
        n = n_locations or (k + 1)
        metric = random_explicit_metric(rng, n)
        pool = list(range(n))
    else:
        raise ValueError(f"unknown metric kind {metric_kind!r}")

    def draw_location():
        if pool is not None:
            return rng.choice(pool)
        return rng.randint(0, line_span)     # exact and cheap; swaps introduce halves

    positions = []
    while len(positions) < k:
        loc = draw_location()
        if loc not in positions:
            positions.append(loc)
    initial = {j: positions[j - 1] for j in range(1, k + 1)}
    requests = []
    for _ in range(n_requests):
        if rng.random() < float(s_target):
            requests.append(Request(draw_location(), rng.randint(1, k)))
        else:
            requests.append(Request(draw_location()))
    return Instance(metric=metric, k=k, initial=initial, requests=requests)


def random_explicit_metric(rng, n, max_weight=9):
    """Random integer metric: symmetric weights run through the all-pairs
    shortest-path closure so the triangle inequality holds."""
    d = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w = rng.randint(1, max_weight)
            d[i][j] = d[j][i] = w
    for m in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][m] + d[m][j] < d[i][j]:
                    d[i][j] = d[i][m] + d[m][j]
    return ExplicitMetric(d)


# ---------------------------------------------------------------------------
# Sweeps over the share grid
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ["s", "k", "algo", "ratio", "lower", "conf_upper", "def_upper"]


def sweep_point(s, k, algo_names, cycles):
    """One grid point: duel each algorithm against the share-targeted
    adversary (the pure-general probe at s=0, pure-specific cycles at s=1)
    and attach the bound curves."""
    from .adversary import AdaptiveLowerBound
    s = Fraction(s)
    bounds = eval_bounds(k, s)
    rows = []
    for algo in algo_names:
        if s == 0:
            adversary = make_adversary("defensive-lb", k)
        elif s == 1:
            adversary = AdaptiveLowerBound(k, s, allow_pure_specific=True)
        else:
            adversary = make_adversary(f"adaptive-lb:{s}", k)
        try:
            report = run_duel(algo, adversary, k, cycles)
            ratio = fraction_str(report.ratio)
        except (AdversaryError, StepBudgetExceeded):
            # the generator's contract assumes lazy responses; measure what
            # can be measured and mark the rest
            ratio = "n/a"
        rows.append({
            "s": fraction_str(s), "k": k, "algo": algo,
            "ratio": ratio,
            "lower": fraction_str(bounds.lower),
            "conf_upper": fraction_str(bounds.conf_upper),
            "def_upper": fraction_str(bounds.def_upper),
        })
    return rows


def sweep(k, grid, algo_names, cycles=2, workers=1):
    """CSV-ready rows for every (s, algo) grid point, merged in grid order."""
    points = [Fraction(s) for s in grid]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        args = [(str(s), k, tuple(algo_names), cycles) for s in points]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_point_args, args))
    else:
        chunks = [sweep_point(s, k, algo_names, cycles) for s in points]
    rows = []
    for chunk in chunks:
        rows.extend(chunk)
    return rows


def _sweep_point_args(args):
    s, k, algos, cycles = args
    return sweep_point(Fraction(s), k, list(algos), cycles)


def sweep_csv(rows):
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"
