"""Algorithms for non-uniform metrics.

Both treat every request as a general one first and correct themselves
afterwards when the request named a server:

* Dc2 - double coverage for two servers on the line, plus a swap move when
  the wrong server ends on a specific request: the squatter walks halfway
  toward the requested server, which then takes the request.
* Wfa - the work function algorithm over *labeled* configurations (servers
  have identities here, so transport cost between configurations is the sum
  of per-server distances, not a minimum matching), then the named server is
  pulled onto the request.
"""

from __future__ import annotations

import itertools
import math
import os
from fractions import Fraction

from .engine import Algorithm
from .offline import StateCapExceeded

DEFAULT_WF_CAP = 20_000


def wf_cap_from_env(default=DEFAULT_WF_CAP):
    raw = os.environ.get("KPREF_STATE_CAP")
    if raw:
        return int(raw)
    return default


class Dc2(Algorithm):
    """Double coverage with a swap correction; exactly 2 servers on the line."""

    name = "dc2"

    def __init__(self, metric, initial):
        if metric.kind != "line":
            raise ValueError("dc2 runs on the line metric only")
        if len(initial) != 2:
            raise ValueError("dc2 is defined for exactly 2 servers")
        super().__init__(metric, initial)

    def _serve(self, r):
        loc = r.loc
        p1, p2 = self.config.pos[1], self.config.pos[2]
        lo, hi = min(p1, p2), max(p1, p2)
        if self.config.covers(loc):
            pass
        elif not lo <= loc <= hi:
            nearest = 1 if abs(p1 - loc) <= abs(p2 - loc) else 2
            self._move(nearest, loc)
        else:
            # strictly inside: both walk toward the request, equal distance;
            # the nearer one is placed exactly on it (no float drift)
            below = 1 if p1 < loc else 2
            above = 2 if below == 1 else 1
            d_lo = loc - self.config.pos[below]
            d_hi = self.config.pos[above] - loc
            if d_lo <= d_hi:
                self._move(below, loc)
                self._move(above, self.config.pos[above] - d_lo)
            else:
                self._move(below, self.config.pos[below] + d_hi)
                self._move(above, loc)
        if r.is_specific and self.config.pos[r.server] != loc:
            j = r.server
            i = 2 if j == 1 else 1
            assert self.config.pos[i] == loc, "double coverage left the request unserved"
            pi, pj = self.config.pos[i], self.config.pos[j]
            if isinstance(pi, float) or isinstance(pj, float):
                half = (pi + pj) / 2
            else:
                half = Fraction(pi + pj) / 2
            self._move(i, half)
            self._move(j, loc)


class WorkFunctionTable:
    """Values of the labeled work function over P^k, P = seen locations.

    After t requests, table[X] is the cheapest offline cost of serving the
    first t request locations (their general projections) and parking the
    labeled servers exactly at X.  Values stay 1-Lipschitz in the labeled
    transport distance.  A request at an unseen location re-expands the table
    by replaying the request log over the grown point set; the triangle
    inequality makes that replay exact.
    """

    def __init__(self, metric, initial, state_cap=None):
        self.metric = metric
        self.servers = sorted(initial)
        self.k = len(self.servers)
        self.initial = dict(initial)
        self.state_cap = state_cap if state_cap is not None else wf_cap_from_env()
        self.points = []
        self.history = []
        for loc in initial.values():
            if loc not in self.points:
                self.points.append(loc)
        self._rebuild()

    def _check_cap(self, npoints):
        if npoints ** self.k > self.state_cap:
            raise StateCapExceeded(
                f"{npoints}^{self.k} work-function states exceed cap {self.state_cap}")

    def _rebuild(self):
        self._check_cap(len(self.points))
        pts = self.points
        self._dist = [[self.metric.distance(a, b) for b in pts] for a in pts]
        self._pindex = {loc: i for i, loc in enumerate(pts)}
        start = tuple(self._pindex[self.initial[j]] for j in self.servers)
        table = {}
        for conf in itertools.product(range(len(pts)), repeat=self.k):
            table[conf] = sum(self._dist[start[i]][conf[i]] for i in range(self.k))
        self.table = table
        history, self.history = self.history, []
        for loc in history:
            self._relax(loc)

    def _relax(self, loc):
        li = self._pindex[loc]
        dist = self._dist
        old = self.table
        new = {}
        for conf, _ in old.items():
            best = math.inf
            for i in range(self.k):
                moved = conf[:i] + (li,) + conf[i + 1:]
                cand = old[moved] + dist[li][conf[i]]
                if cand < best:
                    best = cand
            new[conf] = best
        self.table = new
        self.history.append(loc)

    def value_of_tuple(self, conf):
        return self.table[conf]

    def update(self, loc):
        if loc not in self._pindex:
            self.points.append(loc)
            self._rebuild()
        self._relax(loc)

    def value(self, positions):
        """Work function value at a labeled placement {server: location}."""
        conf = tuple(self._pindex[positions[j]] for j in self.servers)
        return self.table[conf]

    def lipschitz_holds(self, conf_a, conf_b):
        d = sum(self._dist[a][b] for a, b in zip(conf_a, conf_b))
        return self.table[conf_a] <= self.table[conf_b] + d


class Wfa(Algorithm):
    """Work function algorithm with specific-request correction.

    Each request is entered into the table as a general one; the server
    minimizing  W_t(X with i on r) + d(p(i), r)  moves onto it (ties prefer
    the cheaper move, then the server idle longest, then the smaller id).
    If the request named a different server, that server follows onto the
    request; the corrected placement is the real configuration from then on.
    """

    name = "wfa"

    def __init__(self, metric, initial, state_cap=None):
        super().__init__(metric, initial)
        self.wf = WorkFunctionTable(metric, initial, state_cap=state_cap)
        self.last_move_time = {j: 0 for j in self.servers}

    def _serve(self, r):
        loc = r.loc
        self.wf.update(loc)
        pos = self.config.pos
        best = None
        for i in self.servers:
            shifted = dict(pos)
            shifted[i] = loc
            d = self.metric.distance(pos[i], loc)
            key = (self.wf.value(shifted) + d, d, self.last_move_time[i], i)
            if best is None or key < best[0]:
                best = (key, i)
        mover = best[1]
        if pos[mover] != loc:
            self._move(mover, loc)
            self.last_move_time[mover] = self.time
        if r.is_specific and pos[r.server] != loc:
            self._move(r.server, loc)
            self.last_move_time[r.server] = self.time
