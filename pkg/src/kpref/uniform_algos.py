"""Online algorithms for uniform metrics.

The strategies:

* ExampleLru - the naive least-recently-used adaption.  Optimal on pure
  general inputs, unboundedly bad on mixed ones; kept as the cautionary
  baseline.
* Conf - phase-based strategy that never deliberately returns a server to its
  last specifically-requested position ("confident" play).  Optimal at the
  pure-general and specific-dominated extremes, worst case 3k-2.
* Def - phase-based strategy that always returns a server to its last
  specifically-requested position when that position is requested again
  ("defensive" play).  Worst case 2k+14.

Both phase algorithms reset their bookkeeping sets when a phase ends: either
the tracked locations plus frozen servers would exceed k, or a frozen server
is specifically requested somewhere new.  The very first phase freezes
everybody (the start configuration is trusted), so real activity begins with
a phase restart.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .engine import Algorithm


class UniformOnly(ValueError):
    pass


def _require_uniform(metric):
    if metric.kind != "uniform":
        raise UniformOnly("this algorithm is defined for uniform metrics only")


@dataclass(frozen=True)
class PhaseSnapshot:
    """End-of-phase state used for the per-phase optimal-cost certificates."""
    index: int
    is_first: bool
    is_final: bool
    general_locations: frozenset   # locations where only general requests appeared
    frozen: dict                   # frozen server -> location it was frozen at
    end_time: int                  # time of the last request inside the phase


class ExampleLru(Algorithm):
    """LRU with specific requests bolted on.

    General request: move the least recently used server (if the location is
    uncovered); the mover becomes most recent.  Specific request: move the
    requested server if needed; it becomes most recent either way.  A covered
    general request changes nothing.
    """

    name = "example-lru"

    def __init__(self, metric, initial):
        _require_uniform(metric)
        super().__init__(metric, initial)
        self.recency = list(self.servers)   # least recent first

    def _touch(self, server):
        self.recency.remove(server)
        self.recency.append(server)

    def _serve(self, r):
        if r.is_specific:
            if self.config.pos[r.server] != r.loc:
                self._move(r.server, r.loc)
            self._touch(r.server)
        elif not self.config.covers(r.loc):
            mover = self.recency[0]
            self._move(mover, r.loc)
            self._touch(mover)

    def audit(self):
        assert sorted(self.recency) == self.servers


class Conf(Algorithm):
    """Confident phase algorithm.

    Per phase it partitions the servers into a FIFO candidate queue C, the
    set G of servers answering general requests, and the frozen set F; L is
    the set of locations where only general requests appeared (tracked even
    when a freeze pulls their server away).  A location never stays in L once
    a server freezes on it, and |L| + |F| <= k always holds; breaching either
    rule would mean the request pattern can no longer be handled without the
    offline optimum paying, so the phase restarts instead.
    """

    name = "conf"

    def __init__(self, metric, initial):
        _require_uniform(metric)
        super().__init__(metric, initial)
        self.phase_index = 1
        self.C = deque()
        self.G = set()
        self.L = set()
        self.F = set(self.servers)     # first phase: everyone frozen, no cost
        self.phase_log = []

    # -- phase bookkeeping --
    def _snapshot(self, is_final):
        return PhaseSnapshot(
            index=self.phase_index,
            is_first=self.phase_index == 1,
            is_final=is_final,
            general_locations=frozenset(self.L),
            frozen={j: self.config.pos[j] for j in self.F},
            end_time=self.time,
        )

    def _start_next_phase(self):
        self.phase_log.append(self._snapshot(is_final=False))
        self.phase_index += 1
        self.C = deque(self.servers)
        self.G = set()
        self.L = set()
        self.F = set()
        self._step_restarted = True

    def finish(self):
        """Close the trace; returns all phase snapshots including the open one."""
        return self.phase_log + [self._snapshot(is_final=True)]

    # -- candidate selection --
    def _take_candidate(self, loc):
        for j in self.C:                      # zero-cost if one already stands there
            if self.config.pos[j] == loc:
                self.C.remove(j)
                return j
        return self.C.popleft()

    def _freeze(self, j, loc):
        if j in self.C:
            self.C.remove(j)
        self.G.discard(j)
        self.F.add(j)
        if loc in self.L:
            self.L.discard(loc)
        displaced = [s for s in self.config.servers_at(loc) if s != j and s not in self.F]
        for s in displaced:
            if s in self.G:
                self.G.discard(s)
                self.C.append(s)

    # -- request handlers --
    def _serve(self, r):
        if r.is_specific:
            self._serve_specific(r)
        else:
            self._serve_general(r)

    def _serve_general(self, r):
        loc = r.loc
        covered = any(self.config.pos[j] == loc for j in self.G | self.F)
        if covered:
            return
        if loc in self.L:
            j = self._take_candidate(loc)
            self._move(j, loc)
            self.G.add(j)
        elif len(self.L) + len(self.F) == self.k:
            self._start_next_phase()
            self._serve_general(r)
        else:
            self.L.add(loc)
            j = self._take_candidate(loc)
            self._move(j, loc)
            self.G.add(j)

    def _serve_specific(self, r):
        j, loc = r.server, r.loc
        if loc == self.config.pos[j]:
            # freezing a candidate in place can also overflow |L| + |F|
            if j not in self.F and len(self.L) + len(self.F) == self.k:
                self._start_next_phase()
            self._freeze(j, loc)
            return
        if j in self.F or len(self.L) + len(self.F) == self.k:
            self._start_next_phase()
            assert j not in self.F and len(self.L) + len(self.F) < self.k
            self._serve_specific(r)
            return
        self._move(j, loc)
        self._freeze(j, loc)

    def audit(self):
        in_c, g, f = set(self.C), self.G, self.F
        assert in_c | g | f == set(self.servers)
        assert not (in_c & g) and not (in_c & f) and not (g & f)
        assert len(self.C) == len(in_c)
        frozen_locs = {self.config.pos[j] for j in f}
        assert not (self.L & frozen_locs), "tracked general location holds a frozen server"
        assert all(self.config.pos[j] in self.L for j in g), "answering server off tracked set"
        assert len(self.L) + len(f) <= self.k
        locs_g = [self.config.pos[j] for j in g]
        assert len(set(locs_g)) == len(locs_g), "two answering servers share a location"


class Def(Algorithm):
    """Defensive phase algorithm.

    Keeps the Conf phase structure but always sends a server back to its last
    specifically-requested position when a general request lands there.  The
    candidate queue and the general-answering set split in two (C1/G1 never
    acted defensively this phase, C2/G2 did), a set D holds servers currently
    parked defensively, and no location where generals appeared is allowed to
    become unoccupied: whenever a non-candidate server leaves one, a synthetic
    general request refills it before the step returns.
    """

    name = "def"

    def __init__(self, metric, initial, defensive_servers=None):
        _require_uniform(metric)
        super().__init__(metric, initial)
        self.defensive_servers = (set(self.servers) if defensive_servers is None
                                  else set(defensive_servers))
        self.phase_index = 1
        self.C1 = deque()
        self.C2 = deque()
        self.G1 = set()
        self.G2 = set()
        self.D = set()
        self.F = set(self.servers)
        self.ever_in_D = set()
        self.phase_log = []
        self._cascade_depth = 0

    # -- derived views --
    @property
    def G(self):
        return self.G1 | self.G2

    def _core_size(self):
        return len(self.G1) + len(self.G2) + len(self.D) + len(self.F)

    def _snapshot(self, is_final):
        return PhaseSnapshot(
            index=self.phase_index,
            is_first=self.phase_index == 1,
            is_final=is_final,
            general_locations=frozenset(self.config.pos[j] for j in self.G | self.D),
            frozen={j: self.config.pos[j] for j in self.F},
            end_time=self.time,
        )

    def _start_next_phase(self):
        self.phase_log.append(self._snapshot(is_final=False))
        self.phase_index += 1
        self.C1 = deque(self.servers)
        self.C2 = deque()
        self.G1 = set()
        self.G2 = set()
        self.D = set()
        self.F = set()
        self.ever_in_D = set()
        self._step_restarted = True

    def finish(self):
        return self.phase_log + [self._snapshot(is_final=True)]

    # -- defender lookup --
    def _defender(self, loc):
        """Which server would answer a general request on loc defensively?
        Candidates are non-frozen, non-parked servers whose last specific
        position is loc; the latest specifically requested wins, smaller id
        on equal timestamps."""
        candidates = [j for j in self.servers
                      if j not in self.F and j not in self.D
                      and j in self.defensive_servers
                      and self.memory[j] == loc]
        if not candidates:
            return None
        return max(candidates, key=lambda j: (self.last_specific_time[j], -j))

    def _remove_candidate(self, j):
        if j in self.C1:
            self.C1.remove(j)
        elif j in self.C2:
            self.C2.remove(j)

    def _select(self, loc):
        """Pick the candidate to answer a fresh general request on loc."""
        for q in (self.C1, self.C2):          # zero-cost pick first
            for j in q:
                if self.config.pos[j] == loc:
                    q.remove(j)
                    return j
        if self.C1:
            for j in self.C1:                 # prefer one whose home is guarded by another
                other = self._defender(self.memory[j])
                if other is not None and other != j:
                    self.C1.remove(j)
                    return j
            return self.C1.popleft()
        return self.C2.popleft()

    def _simulate_general(self, loc):
        self._cascade_depth += 1
        assert self._cascade_depth <= self.k + 1, "defensive refill cascade too deep"
        self._handle_general(loc)
        self._cascade_depth -= 1

    # -- request handlers --
    def _serve(self, r):
        self._cascade_depth = 0
        if r.is_specific:
            self._serve_specific(r)
        else:
            self._handle_general(r.loc, external=True)

    def _handle_general(self, loc, external=False):
        covered = any(self.config.pos[j] == loc for j in self.G | self.D | self.F)
        if covered:
            return
        if self._core_size() == self.k:
            assert external, "phase restart triggered from inside a refill"
            self._start_next_phase()
            self._handle_general(loc, external=external)
            return
        defender = self._defender(loc)
        if defender is not None:
            j = defender
            was_in_g = j in self.G
            prev = self.config.pos[j]
            self._remove_candidate(j)
            self.G1.discard(j)
            self.G2.discard(j)
            self._move(j, loc)
            self.D.add(j)
            self.ever_in_D.add(j)
            if was_in_g:
                self._simulate_general(prev)
        else:
            j = self._select(loc)
            self._move(j, loc)
            (self.G2 if j in self.ever_in_D else self.G1).add(j)

    def _serve_specific(self, r):
        j, loc = r.server, r.loc
        if loc == self.config.pos[j]:
            self._freeze_only(j)
            return
        if j in self.F or self._core_size() == self.k:
            self._start_next_phase()
            assert j not in self.F and self._core_size() < self.k
            self._serve_specific(r)
            return
        was_in_gd = j in self.G or j in self.D
        prev = self.config.pos[j]
        self._remove_candidate(j)
        self.G1.discard(j)
        self.G2.discard(j)
        self.D.discard(j)
        self._move(j, loc)
        self.F.add(j)
        self._displace_resident(j, loc)
        if was_in_gd:
            self._simulate_general(prev)

    def _displace_resident(self, j, loc):
        """A freeze landing re-candidates any co-located answering or
        defensively-parked server (frozen positions stay disjoint from
        theirs)."""
        displaced = [s for s in self.config.servers_at(loc)
                     if s != j and s not in self.F and (s in self.G or s in self.D)]
        for s in displaced:
            from_one = s in self.G1
            self.G1.discard(s)
            self.G2.discard(s)
            self.D.discard(s)
            (self.C1 if from_one and s not in self.ever_in_D else self.C2).append(s)

    def _freeze_only(self, j):
        self._remove_candidate(j)
        self.G1.discard(j)
        self.G2.discard(j)
        self.D.discard(j)
        self.F.add(j)
        self._displace_resident(j, self.config.pos[j])

    def audit(self):
        parts = [set(self.C1), set(self.C2), self.G1, self.G2, self.D, self.F]
        union = set()
        total = 0
        for p in parts:
            union |= p
            total += len(p)
        assert union == set(self.servers) and total == self.k, "sets do not partition"
        pg = {self.config.pos[j] for j in self.G}
        pd = {self.config.pos[j] for j in self.D}
        pf = {self.config.pos[j] for j in self.F}
        assert not (pg & pd) and not (pg & pf) and not (pd & pf), \
            "general/defensive/frozen location sets overlap"
        assert self._core_size() <= self.k
        for group in (self.G, self.D):
            locs = [self.config.pos[j] for j in group]
            assert len(set(locs)) == len(locs)
        assert (set(self.C2) | self.G2) <= self.ever_in_D


def combined_conf_def(metric, initial, confident_count):
    """Hybrid: never acts defensively for servers 1..confident_count, always
    for the rest.  Measured only; no competitive-ratio claims are asserted."""
    k = len(initial)
    if not 0 <= confident_count <= k:
        raise ValueError(f"confident server count must be in 0..{k}")
    defensive = {j for j in sorted(initial) if j > confident_count}
    alg = Def(metric, initial, defensive_servers=defensive)
    alg.name = f"conf+def:{confident_count}"
    return alg
