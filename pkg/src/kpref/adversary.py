"""Adaptive request generators realizing the lower-bound constructions.

Every generator plays full cycles against a live algorithm and returns a
certificate per cycle: the emitted requests, an explicit optimal schedule
serving them, and its cost.  Certificates are replay-validated by the engine;
tests additionally cross-check them against the exact DP optimum for small k.

All generators here work on a uniform metric with k+1 locations (the
lru-killer uses exactly k = 3 locations).  They track a claimed optimal
configuration across cycles; specific requests always target positions of
that configuration, which keeps each cycle servable by the optimum at the
advertised cost no matter how the labels of the online algorithm drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .engine import AdversaryError
from .model import Request
from .offline import split_floor_ceil


class MetadataContradiction(AdversaryError):
    """Declared strictly-confident server acted defensively."""


@dataclass
class Certificate:
    """(sequence, optimal schedule, claimed cost) for one cycle."""
    start_config: dict
    requests: list
    schedule: dict               # request index -> [(server, dest), ...] applied right before it
    cost: object
    end_config: dict = field(default_factory=dict)

    def validate(self, metric):
        pos = dict(self.start_config)
        cost = 0
        for t, req in enumerate(self.requests):
            for server, dest in self.schedule.get(t, ()):
                cost += metric.distance(pos[server], dest)
                pos[server] = dest
            if req.is_specific:
                if pos[req.server] != req.loc:
                    raise AdversaryError(
                        f"certificate fails {req}: optimal server at {pos[req.server]}")
            elif req.loc not in pos.values():
                raise AdversaryError(f"certificate fails {req}: location uncovered")
        if cost != self.cost:
            raise AdversaryError(f"certificate cost {cost} != claimed {self.cost}")
        if self.end_config and pos != self.end_config:
            raise AdversaryError("certificate end configuration mismatch")
        return cost


def gen(loc):
    return Request(loc)


def spec(server, loc):
    return Request(loc, server)


class UniformAdversary:
    """Shared bookkeeping: location roles, first-move observation, claimed
    optimal configuration carried across cycles."""

    name = "abstract-lb"
    locations_needed = None     # k+1 unless overridden

    def __init__(self, k):
        if k < 2:
            raise ValueError("constructions need k >= 2")
        self.k = k
        self.opt = None

    # -- helpers ---------------------------------------------------------
    def _begin(self, ctx):
        need = self.locations_needed or self.k + 1
        if ctx.metric.kind != "uniform" or ctx.metric.n != need:
            raise AdversaryError(f"{self.name} needs uniform({need})")
        if ctx.k != self.k:
            raise AdversaryError(f"{self.name} built for k={self.k}, algorithm has {ctx.k}")
        start = ctx.positions()
        if len(set(start.values())) != self.k:
            raise AdversaryError("cycle must start from pairwise distinct positions")
        if self.opt is None:
            self.opt = dict(start)
        return start

    def _holes(self, ctx):
        occupied = set(ctx.positions().values())
        return [loc for loc in range(ctx.metric.n) if loc not in occupied]

    def _sole_hole(self, ctx):
        holes = self._holes(ctx)
        if len(holes) != 1:
            raise AdversaryError(f"expected exactly one unoccupied location, got {holes}")
        return holes[0]

    def _observe(self, outcome, moved, order):
        for m in outcome.moves:
            if m.server not in moved:
                moved.add(m.server)
                order.append(m.server)

    def _walk_until_all_moved(self, ctx, moved, order, probe_hook=None):
        """Phase 1: request the unique hole until every server has moved."""
        out = ctx.serve(gen(self._sole_hole(ctx)))
        self._observe(out, moved, order)
        while len(moved) < self.k:
            u = self._sole_hole(ctx)
            out = ctx.serve(gen(u))
            if probe_hook is not None:
                probe_hook(u, out)
            self._observe(out, moved, order)
        return self._sole_hole(ctx)

    def _force_config(self, ctx, target, spec_allowed=None):
        """Drive the algorithm onto `target` (a labeled placement) using
        general requests on uncovered target locations and specific requests
        at claimed-optimal positions.  All of it is free for the optimum."""
        target_locs = set(target.values())
        budget = 6 * self.k * (self.k + 1)
        for _ in range(budget):
            pos = ctx.positions()
            if pos == target:
                return
            holes = sorted(target_locs - set(pos.values()))
            if holes:
                ctx.serve(gen(holes[0]))
                continue
            off = [j for j in sorted(target) if pos[j] != target[j]
                   and (spec_allowed is None or j in spec_allowed)]
            if not off:
                raise AdversaryError("cannot reach target configuration with allowed requests")
            j = off[0]
            ctx.serve(spec(j, target[j]))
        raise AdversaryError("configuration closure did not converge")


class GeneralLowerBound(UniformAdversary):
    """The 2k-1 construction: walk the hole until every server moved once,
    pull all but the last first-mover home with specific requests, then close
    the cycle onto the claimed optimal placement."""

    name = "general-lb"

    def play_cycle(self, ctx):
        start = self._begin(ctx)
        if start != self.opt:
            raise AdversaryError("cycle start diverged from claimed optimal configuration")
        spare = self._sole_hole(ctx)
        moved, order = set(), []
        final_hole = self._walk_until_all_moved(ctx, moved, order)
        z = order[-1]
        if final_hole != start[z]:
            raise AdversaryError("hole after phase 1 is not the last mover's start")
        for j in order[:-1]:
            ctx.serve(spec(j, self.opt[j]))
        target = dict(self.opt)
        target[z] = spare
        self._force_config(ctx, target)
        cert = Certificate(start_config=dict(self.opt), requests=list(ctx.requests),
                           schedule={0: [(z, spare)]}, cost=1, end_config=target)
        self.opt = target
        return cert


class DefensiveLowerBound(UniformAdversary):
    """Pure-general probe: phase 1 of the construction above, nothing else.
    Costs any always-defensive algorithm at least 2k-1 per cycle and any
    always-confident one exactly k; the optimum pays 1.

    Runs against a fresh algorithm instance every cycle: the probe exploits
    servers sitting on their remembered positions, and a pure-general
    sequence can never re-arm that memory once it goes stale."""

    name = "defensive-lb"
    fresh_instance_each_cycle = True

    def play_cycle(self, ctx):
        self.opt = None
        start = self._begin(ctx)
        if set(start.values()) != set(self.opt.values()):
            raise AdversaryError("covered set diverged from claimed optimal covered set")
        spare = self._sole_hole(ctx)
        moved, order = set(), []
        final_hole = self._walk_until_all_moved(ctx, moved, order)
        w = next(j for j in sorted(self.opt) if self.opt[j] == final_hole)
        target = dict(self.opt)
        target[w] = spare
        cert = Certificate(start_config=dict(self.opt), requests=list(ctx.requests),
                           schedule={0: [(w, spare)]}, cost=1, end_config=target)
        self.opt = target
        return cert


class StrictConfidentLowerBound(UniformAdversary):
    """The 2k+l-2 construction against algorithms that never act defensively
    for a declared server set: after the probing phase, repeatedly pull a
    displaced never-defensive server home and re-cover, displacing another."""

    name = "strict-confident-lb"

    def __init__(self, k, ell, declared=None):
        super().__init__(k)
        if not 1 <= ell <= k:
            raise ValueError("declared strictly-confident server count must be in 1..k")
        self.ell = ell
        self.declared = set(declared) if declared is not None else set(range(1, ell + 1))
        if len(self.declared) != ell:
            raise ValueError("declared server set size must equal ell")

    def play_cycle(self, ctx):
        start = self._begin(ctx)
        if start != self.opt:
            raise AdversaryError("cycle start diverged from claimed optimal configuration")
        spare = self._sole_hole(ctx)
        moved, order = set(), []
        probed, acted_defensively = set(), set()

        def probe_hook(u, outcome):
            owner = [j for j, p in start.items() if p == u]
            if not owner:
                return
            j = owner[0]
            if j in moved and j not in probed:
                probed.add(j)
                if ctx.positions()[j] == u:
                    acted_defensively.add(j)

        final_hole = self._walk_until_all_moved(ctx, moved, order, probe_hook)
        contradiction = self.declared & acted_defensively
        if contradiction:
            raise MetadataContradiction(
                f"declared strictly-confident servers {sorted(contradiction)} acted defensively")
        z = order[-1]
        cover = (set(start.values()) - {final_hole}) | {spare}
        confident = [j for j in sorted(start) if j not in acted_defensively and j != z]
        budget = 4 * self.k
        for _ in range(budget):
            displaced = [j for j in confident if ctx.positions()[j] != self.opt[j]]
            if not displaced:
                break
            j = displaced[0]
            ctx.serve(spec(j, self.opt[j]))
            self._cover(ctx, cover)
        for j in sorted(start):
            if j != z and ctx.positions()[j] != self.opt[j]:
                ctx.serve(spec(j, self.opt[j]))
                self._cover(ctx, cover)
        target = dict(self.opt)
        target[z] = spare
        self._force_config(ctx, target)
        cert = Certificate(start_config=dict(self.opt), requests=list(ctx.requests),
                           schedule={0: [(z, spare)]}, cost=1, end_config=target)
        self.opt = target
        return cert

    def _cover(self, ctx, cover):
        for _ in range(2 * self.k):
            holes = sorted(cover - set(ctx.positions().values()))
            if not holes:
                return
            ctx.serve(gen(holes[0]))
        raise AdversaryError("covering loop did not converge")


class ConfKiller(UniformAdversary):
    """Worst case for the confident phase algorithm: after the probing phase,
    alternate a specific request pulling server i home with a general request
    on its vacated position; costs the target 3k-2 per cycle."""

    name = "conf-killer"

    def __init__(self, k, strict=False):
        super().__init__(k)
        self.strict = strict

    def play_cycle(self, ctx):
        start = self._begin(ctx)
        if start != self.opt:
            raise AdversaryError("cycle start diverged from claimed optimal configuration")
        spare = self._sole_hole(ctx)
        moved, order = set(), []
        self._walk_until_all_moved(ctx, moved, order)
        z = order[-1]
        allowed = (set(self.opt.values()) - {start[z]}) | {spare}
        for j in order[:-1]:
            prev = ctx.positions()[j]
            ctx.serve(spec(j, self.opt[j]))
            if prev in set(ctx.positions().values()):
                continue                      # vacated spot already refilled
            if prev not in allowed:
                raise AdversaryError(f"vacated position {prev} is not optimally covered")
            if self.strict and prev != spare:
                raise AdversaryError("trace diverged from the expected confident response")
            ctx.serve(gen(prev))
        target = dict(self.opt)
        target[z] = spare
        self._force_config(ctx, target)
        cert = Certificate(start_config=dict(self.opt), requests=list(ctx.requests),
                           schedule={0: [(z, spare)]}, cost=1, end_config=target)
        self.opt = target
        return cert


class LruKiller(UniformAdversary):
    """Static killer for the naive LRU adaption: one setup request, then a
    fixed six-request loop the optimum serves at zero cost forever."""

    name = "lru-killer"
    locations_needed = 3

    def __init__(self, k=3):
        if k != 3:
            raise ValueError("the unboundedness construction uses exactly k = 3")
        super().__init__(k)
        self.roles = None

    def play_setup(self, ctx):
        start = self._begin(ctx)
        v = {i: start[i] for i in (1, 2, 3)}
        self.roles = v
        initial = dict(start)
        ctx.serve(spec(1, v[2]))
        self.opt = {1: v[2], 2: v[3], 3: v[1]}
        return Certificate(
            start_config=initial, requests=list(ctx.requests),
            schedule={0: [(1, v[2]), (2, v[3]), (3, v[1])]},
            cost=3, end_config=dict(self.opt))

    def play_cycle(self, ctx):
        v = self.roles
        for req in (gen(v[1]), spec(3, v[1]), gen(v[3]),
                    gen(v[2]), spec(1, v[2]), gen(v[3])):
            ctx.serve(req)
        return Certificate(start_config=dict(self.opt), requests=list(ctx.requests),
                           schedule={}, cost=0, end_config=dict(self.opt))


class AdaptiveLowerBound(UniformAdversary):
    """Share-targeted construction.  One play_cycle emits a whole super-cycle
    whose realized share of movement-requiring specific requests equals the
    target s exactly (rational arithmetic), mixing the two boundary cycle
    shapes in the proportion given by the floor/ceiling split."""

    name = "adaptive-lb"

    def __init__(self, k, s, allow_pure_specific=False):
        super().__init__(k)
        if isinstance(s, float):
            raise ValueError("target share must be an exact rational, not a float")
        s = Fraction(s)
        if not 0 < s < 1 and not (allow_pure_specific and s == 1):
            raise ValueError(f"target share must lie strictly between 0 and 1, got {s}")
        self.s = s
        low = Fraction(k - 1, 2 * k - 1)
        high = Fraction(k, 2 * k - 1)
        if s <= low:
            xbar = s / (1 - s) * k
            self.plan = self._split_plan("A", xbar)
        elif s >= high:
            xbar = (1 - s) / s * k
            self.plan = self._split_plan("C", xbar)
        else:
            y = s * (2 * k - 1)            # strictly between k-1 and k
            a, b = split_floor_ceil(y)
            self.plan = [("A", k - 1)] * a + [("C", k - 1)] * b
        self.cycles_per_play = len(self.plan)

    @staticmethod
    def _split_plan(kind, xbar):
        if xbar.denominator == 1:
            return [(kind, int(xbar))]
        a, b = split_floor_ceil(xbar)
        return [(kind, math.floor(xbar))] * a + [(kind, math.ceil(xbar))] * b

    def play_cycle(self, ctx):
        start_opt = dict(self.opt) if self.opt is not None else None
        merged_schedule = {}
        total_cost = 0
        offset = 0
        for kind, x in self.plan:
            before = len(ctx.requests)
            if kind == "A":
                cert = self._cycle_a(ctx, x)
            else:
                cert = self._cycle_c(ctx, x)
            if start_opt is None:
                start_opt = dict(cert.start_config)
            for t, ms in cert.schedule.items():
                merged_schedule[t + offset] = list(ms)
            total_cost += cert.cost
            offset += len(ctx.requests) - before
        return Certificate(start_config=start_opt, requests=list(ctx.requests),
                           schedule=merged_schedule, cost=total_cost,
                           end_config=dict(self.opt))

    # -- the two boundary cycle shapes ------------------------------------
    def _pairs(self, ctx, x, spare, moved, order):
        """x rounds of: general on the spare, then the mover is specifically
        requested at its claimed-optimal position."""
        specd = []
        for _ in range(x):
            out = ctx.serve(gen(spare))
            self._observe(out, moved, order)
            at_spare = ctx.alg.config.servers_at(spare)
            if len(at_spare) != 1:
                raise AdversaryError(f"expected one server on the spare, got {at_spare}")
            m = at_spare[0]
            if self.opt[m] == spare:
                raise AdversaryError("claimed optimum covers the spare; construction broken")
            out = ctx.serve(spec(m, self.opt[m]))
            self._observe(out, moved, order)
            specd.append(m)
        return specd

    def _cycle_a(self, ctx, x):
        start = self._begin(ctx)
        if set(start.values()) != set(self.opt.values()):
            raise AdversaryError("covered set diverged from claimed optimal covered set")
        spare = self._sole_hole(ctx)
        opt0 = dict(self.opt)
        first = len(ctx.requests)
        moved, order = set(), []
        gen_locs = {spare} if x else set()
        specd = self._pairs(ctx, x, spare, moved, order)
        opt_ok = set(self.opt.values()) | {spare}
        while len(moved) < self.k:
            holes = self._holes(ctx)
            # the walk resumes on the spare whenever it is open, then on the
            # optimally covered holes
            cand = ([spare] if spare in holes else []) + \
                sorted(h for h in holes if h != spare and h in opt_ok)
            if not cand:
                raise AdversaryError("no optimally-covered hole to request")
            u = cand[0]
            gen_locs.add(u)
            out = ctx.serve(gen(u))
            self._observe(out, moved, order)
        final_hole = self._sole_hole(ctx)
        w = next((j for j in sorted(self.opt) if self.opt[j] == final_hole), None)
        if w is None or w in specd or self.opt[w] in gen_locs:
            raise AdversaryError("no valid single-move optimal schedule for this cycle")
        target = dict(self.opt)
        target[w] = spare
        cert = Certificate(start_config=opt0,
                           requests=list(ctx.requests[first:]),
                           schedule={0: [(w, spare)]}, cost=1, end_config=target)
        self.opt = target
        return cert

    def _cycle_c(self, ctx, x):
        start = self._begin(ctx)
        if set(start.values()) != set(self.opt.values()):
            raise AdversaryError("covered set diverged from claimed optimal covered set")
        spare = self._sole_hole(ctx)
        opt0 = dict(self.opt)
        first = len(ctx.requests)
        moved, order = set(), []
        self._pairs(ctx, x, spare, moved, order)
        unmoved = [j for j in self.opt if j not in moved]
        if not unmoved:
            raise AdversaryError("pair phase exhausted every server; no anchor left")
        z = max(unmoved)
        ring = sorted(j for j in unmoved if j != z)
        chain = ring + [z]
        schedule = {}
        target = dict(self.opt)
        for i, j in enumerate(ring):
            dest = self.opt[chain[i + 1]]
            if ctx.positions()[j] == dest:
                raise AdversaryError("shift target does not require a movement")
            schedule[len(ctx.requests) - first] = [(j, dest)]
            ctx.serve(spec(j, dest))
            target[j] = dest
        move_z = (z, spare)
        if x > 0:
            schedule.setdefault(0, []).insert(0, move_z)
        else:
            schedule[len(ctx.requests) - first] = [move_z]
        ctx.serve(spec(z, spare))
        target[z] = spare
        # Re-freeze everyone in place with covered (movement-free) specific
        # requests.  This is free for both sides and leaves phase-based
        # algorithms exactly as after their silent opening phase, so the next
        # cycle opens with a clean reset instead of a stale half-filled one.
        for j in sorted(target):
            if ctx.positions()[j] == target[j]:
                ctx.serve(spec(j, target[j]))
        cert = Certificate(start_config=opt0,
                           requests=list(ctx.requests[first:]),
                           schedule=schedule, cost=1 + len(ring), end_config=target)
        self.opt = target
        return cert


# ---------------------------------------------------------------------------
# Closed-form bound curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundTriple:
    lower: Fraction
    conf_upper: Fraction
    def_upper: Fraction


def eval_bounds(k, s):
    """Lower bound and the two algorithm upper bounds as exact rationals."""
    s = Fraction(s)
    if not 0 <= s <= 1:
        raise ValueError(f"share must lie in [0, 1], got {s}")
    low = Fraction(k - 1, 2 * k - 1)
    high = Fraction(k, 2 * k - 1)
    if s <= low:
        lower = (1 + s / (1 - s)) * k
    elif s < high:
        lower = Fraction(2 * k - 1)
    else:
        lower = 1 / Fraction(2 * s - 1)
    candidates = [Fraction(3 * k - 2)]
    if s < Fraction(1, 2):
        candidates.append(k + Fraction(2) * s / (1 - 2 * s) * k)
    if s > 0:
        candidates.append(1 + Fraction(2) * (1 - s) / s * k)
    if s > Fraction(1, 2):
        candidates.append(1 / Fraction(2 * s - 1))
    return BoundTriple(lower=Fraction(lower), conf_upper=min(candidates),
                       def_upper=Fraction(2 * k + 14))


ADVERSARIES = {
    "general-lb": GeneralLowerBound,
    "defensive-lb": DefensiveLowerBound,
    "strict-confident-lb": StrictConfidentLowerBound,
    "conf-killer": ConfKiller,
    "lru-killer": LruKiller,
    "adaptive-lb": AdaptiveLowerBound,
}


def make_adversary(spec_string, k):
    """Parse CLI names like "adaptive-lb:2/5" or "strict-confident-lb:3"."""
    name, _, arg = spec_string.partition(":")
    if name not in ADVERSARIES:
        raise ValueError(f"unknown adversary {name!r}; known: {sorted(ADVERSARIES)}")
    if name == "adaptive-lb":
        if not arg:
            raise ValueError("adaptive-lb needs a target share, e.g. adaptive-lb:2/5")
        return AdaptiveLowerBound(k, Fraction(arg))
    if name == "strict-confident-lb":
        if not arg:
            raise ValueError("strict-confident-lb needs a server count, e.g. :3")
        return StrictConfidentLowerBound(k, int(arg))
    if arg:
        raise ValueError(f"{name} takes no argument")
    return ADVERSARIES[name](k)
