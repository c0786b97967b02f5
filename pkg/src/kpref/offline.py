"""Exact offline optimum and supporting number theory.

The optimum is a dynamic program over labeled configurations on the instance's
point set (initial positions plus every requested location).  Transitions are
lazy: a general request is answered by leaving it covered or relocating
exactly one server onto it, a specific request relocates the named server.
Restricting to such schedules is lossless: any schedule rewrites, server by
server, into one that only ever moves the server answering the current
request, at no extra cost by the triangle inequality.  The brute-force oracle
below enumerates server assignments independently and is used to validate the
DP on small instances.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_STATE_CAP = 2_000_000


class StateCapExceeded(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def state_cap_from_env(default=DEFAULT_STATE_CAP):
    raw = os.environ.get("KPREF_STATE_CAP")
    if raw:
        return int(raw)
    return default


def _point_set(initial, requests):
    points = []
    seen = set()
    for loc in list(initial.values()) + [r.loc for r in requests]:
        if loc not in seen:
            seen.add(loc)
            points.append(loc)
    return points


@dataclass
class OptSolution:
    cost: object
    schedule: list          # per request: (server, src, dst) or None
    final_config: dict
    configs: list           # configuration dict after each request (len n+1, [0]=initial)


def opt_cost(metric, initial, requests, *, state_cap=None, want_schedule=False):
    """Minimum offline cost to serve the request sequence from `initial`.

    Returns an OptSolution; schedule/configs are filled only when
    want_schedule is set (they cost memory proportional to states x steps).
    """
    if state_cap is None:
        state_cap = state_cap_from_env()
    servers = sorted(initial)
    k = len(servers)
    points = _point_set(initial, requests)
    n = len(points)
    if n ** k > state_cap:
        raise StateCapExceeded(f"{n}^{k} labeled configurations exceed cap {state_cap}")
    pindex = {loc: i for i, loc in enumerate(points)}
    dist = [[metric.distance(a, b) for b in points] for a in points]
    powers = [n ** i for i in range(k)]
    size = n ** k
    INF = math.inf

    start = sum(pindex[initial[servers[i]]] * powers[i] for i in range(k))
    values = [INF] * size
    values[start] = 0
    trace = [] if want_schedule else None

    for req in requests:
        target = pindex[req.loc]
        new_values = [INF] * size
        back = [None] * size if want_schedule else None
        if req.is_specific:
            si = servers.index(req.server)
            pw = powers[si]
            for s, w in enumerate(values):
                if w is INF:
                    continue
                d = (s // pw) % n
                t = s + (target - d) * pw
                cand = w + dist[d][target]
                if cand < new_values[t]:
                    new_values[t] = cand
                    if back is not None:
                        back[t] = (s, si, d)
        else:
            for s, w in enumerate(values):
                if w is INF:
                    continue
                covered = False
                for i in range(k):
                    d = (s // powers[i]) % n
                    if d == target:
                        covered = True
                    t = s + (target - d) * powers[i]
                    cand = w + dist[d][target]
                    if cand < new_values[t]:
                        new_values[t] = cand
                        if back is not None:
                            back[t] = (s, i, d)
                if covered and w < new_values[s]:
                    new_values[s] = w
                    if back is not None:
                        back[s] = (s, None, None)
        values = new_values
        if trace is not None:
            trace.append(back)

    best_state = min(range(size), key=lambda s: values[s])
    best = values[best_state]
    if best is INF:
        raise RuntimeError("unreachable: no feasible end state")

    def decode(s):
        return {servers[i]: points[(s // powers[i]) % n] for i in range(k)}

    schedule = []
    configs = []
    if want_schedule:
        s = best_state
        states = [s]
        for back in reversed(trace):
            s = back[s][0]
            states.append(s)
        states.reverse()
        configs = [decode(st) for st in states]
        for before, after in zip(configs, configs[1:]):
            moved = [(j, before[j], after[j]) for j in servers if before[j] != after[j]]
            assert len(moved) <= 1
            schedule.append(moved[0] if moved else None)
        final = configs[-1]
    else:
        final = decode(best_state)
    return OptSolution(cost=best, schedule=schedule, final_config=final, configs=configs)


def opt_cost_bruteforce(metric, initial, requests, budget=2_000_000):
    """Enumerate which server answers each request (specific ones are forced),
    simulate lazily, return the minimum cost.  Independent of the DP."""
    servers = sorted(initial)
    k = len(servers)
    general_slots = [i for i, r in enumerate(requests) if not r.is_specific]
    if k ** len(general_slots) > budget:
        raise BudgetExceeded(f"{k}^{len(general_slots)} assignments exceed budget {budget}")

    best = None
    assignment = [r.server for r in requests]

    def explore(slot_idx):
        nonlocal best
        if slot_idx == len(general_slots):
            pos = dict(initial)
            cost = 0
            for r, who in zip(requests, assignment):
                src = pos[who]
                if src != r.loc:
                    cost += metric.distance(src, r.loc)
                    pos[who] = r.loc
            if best is None or cost < best:
                best = cost
            return
        for j in servers:
            assignment[general_slots[slot_idx]] = j
            explore(slot_idx + 1)

    explore(0)
    return best if best is not None else 0


# ---------------------------------------------------------------------------
# Rational split: x = (a*floor(x) + b*ceil(x)) / (a+b)
# ---------------------------------------------------------------------------

def split_floor_ceil(x):
    """Positive integers (a, b) with x = (a*floor(x) + b*ceil(x))/(a+b),
    for any positive non-integer rational x."""
    if not isinstance(x, Fraction):
        raise TypeError(f"exact rational required, got {type(x).__name__}")
    if x <= 0 or x.denominator == 1:
        raise ValueError(f"need a positive non-integer rational, got {x}")
    eps = x - math.floor(x)            # c/d in lowest terms
    a, b = eps.denominator - eps.numerator, eps.numerator
    assert Fraction(a * math.floor(x) + b * math.ceil(x), a + b) == x
    return a, b


def rational_split(x):
    """The (a, b) pair for rationals strictly above 1 (and not integral)."""
    if isinstance(x, float):
        raise TypeError("float input rejected; pass an exact Fraction")
    x = Fraction(x)
    if x <= 1:
        raise ValueError(f"x must be greater than one, got {x}")
    if x.denominator == 1:
        raise ValueError(f"x must not be an integer, got {x}")
    return split_floor_ceil(x)


# ---------------------------------------------------------------------------
# Per-phase lower-bound certificates for the phase algorithms
# ---------------------------------------------------------------------------

def phase_opt_certificate(snapshot, opt_config):
    """Lower bound on the optimum's cost inside one phase window.

    `opt_config` is the optimal schedule's configuration right after the
    phase's last request.  Counts the tracked general locations the optimum
    fails to cover plus the frozen servers it keeps away from their freeze
    location; every non-final phase is additionally worth at least 1.
    """
    if snapshot.is_first:
        return 0
    occupied = set(opt_config.values())
    p1 = sum(1 for loc in snapshot.general_locations if loc not in occupied)
    p2 = sum(1 for j, loc in snapshot.frozen.items() if opt_config[j] != loc)
    p = p1 + p2
    return p if snapshot.is_final else max(1, p)


def certificates_for_run(snapshots, opt_solution, request_times=None):
    """Evaluate phase_opt_certificate for every snapshot of a finished run,
    reading the optimum's configuration at each phase end from an OptSolution
    computed with want_schedule=True."""
    total = []
    for snap in snapshots:
        cfg = opt_solution.configs[min(snap.end_time, len(opt_solution.configs) - 1)]
        total.append(phase_opt_certificate(snap, cfg))
    return total
