"""Simulation contract: algorithms, single steps, static runs, and duels.

An algorithm instance owns its configuration, its p-star memory, and its cost
ledger.  The engine drives it one request at a time, audits the serving
condition after every step, and (for duels) hands an adaptive adversary read
access to the live configuration plus a fresh-instance factory for shadow
simulation.  Algorithms are deterministic: identical request histories yield
identical moves.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from fractions import Fraction

from .model import Configuration, CostLedger, ServerMemory, requires_movement


class ContractViolation(RuntimeError):
    """An algorithm returned from serve() without serving the request."""


class StepBudgetExceeded(RuntimeError):
    """An adversary cycle emitted more requests than its declared budget."""


class AdversaryError(RuntimeError):
    """An adversary observed behavior outside its construction's contract."""


@dataclass(frozen=True)
class StepOutcome:
    moves: tuple            # paid movements, in execution order
    config: dict            # configuration right after the step
    phase_restarted: bool = False


class Algorithm:
    """Base class for online algorithms.

    Subclasses implement _serve(request) and perform movements through
    self._move(server, destination).  The base class maintains the
    configuration, p-star memory, per-server last-specific-request timestamps,
    and the cost ledger.
    """

    name = "abstract"

    def __init__(self, metric, initial):
        self.metric = metric
        self.k = len(initial)
        self.servers = sorted(initial)
        if self.servers != list(range(1, self.k + 1)):
            raise ValueError(f"server ids must be 1..k, got {self.servers}")
        for loc in initial.values():
            metric.check_location(loc)
        self.config = Configuration(initial)
        self.memory = ServerMemory(initial)
        self.last_specific_time = {j: 0 for j in self.servers}
        self.time = 0
        self.ledger = CostLedger()
        self._step_moves = []
        self._step_restarted = False

    # -- movement helper used by subclasses --
    def _move(self, server, dest):
        src = self.config.pos[server]
        cost = self.metric.distance(src, dest)
        self.config.pos[server] = dest
        if cost != 0:
            move = self.ledger.record(self.time, server, src, dest, cost)
            self._step_moves.append(move)

    def p_star(self, server):
        return self.memory[server]

    def serve(self, request) -> StepOutcome:
        self.time += 1
        self._step_moves = []
        self._step_restarted = False
        if requires_movement(self.config, request):
            self.ledger.count_required(request)
        self._serve(request)
        if request.is_specific:
            self.memory.note_specific(request.server, request.loc)
            self.last_specific_time[request.server] = self.time
        return StepOutcome(tuple(self._step_moves), self.config.as_dict(),
                           self._step_restarted)

    def _serve(self, request):
        raise NotImplementedError

    def audit(self):
        """Check internal invariants; raises AssertionError on violation."""

    @property
    def total_cost(self):
        return self.ledger.total_cost


def check_served(config, request):
    if request.is_specific:
        if config.pos[request.server] != request.loc:
            raise ContractViolation(
                f"{request} not served: server {request.server} ended at "
                f"{config.pos[request.server]}")
    elif not config.covers(request.loc):
        raise ContractViolation(f"{request} not served: no server at {request.loc}")


def serve_checked(alg, request, audit=False):
    outcome = alg.serve(request)
    check_served(alg.config, request)
    if audit:
        alg.audit()
    return outcome


def run(alg, requests, audit=False):
    """Fold serve over a static sequence; returns (ledger, final config)."""
    for r in requests:
        serve_checked(alg, r, audit=audit)
    return alg.ledger, alg.config


class Lazify(Algorithm):
    """Laziness wrapper: shadows the wrapped algorithm, but only performs the
    single movement each request actually demands.

    The inner algorithm runs on a virtual configuration; the real configuration
    moves a server only onto the current request (the server the inner
    algorithm keeps there).  Real cost never exceeds the inner cost on uniform
    metrics; on general metrics it never exceeds it either (triangle
    inequality, one virtual path per server).
    """

    def __init__(self, inner):
        super().__init__(inner.metric, inner.config.as_dict())
        self.inner = inner
        self.name = f"lazy({inner.name})"

    def _serve(self, request):
        serve_checked(self.inner, request)
        r = request
        if r.is_specific:
            if self.config.pos[r.server] != r.loc:
                self._move(r.server, r.loc)
        elif not self.config.covers(r.loc):
            candidates = self.inner.config.servers_at(r.loc)
            if not candidates:
                raise ContractViolation(f"inner algorithm did not serve {request}")
            self._move(candidates[0], r.loc)


# ---------------------------------------------------------------------------
# Duels: adaptive adversary vs one algorithm instance
# ---------------------------------------------------------------------------

DEFAULT_STEP_BUDGET_FACTOR = 50


class DuelContext:
    """What an adaptive adversary sees during one cycle: the live algorithm
    (read access), a serve() channel with a step budget, and a factory for
    fresh shadow instances."""

    def __init__(self, alg, factory, budget, audit=False):
        self.alg = alg
        self.factory = factory
        self.budget = budget
        self.audit = audit
        self.requests = []

    @property
    def metric(self):
        return self.alg.metric

    @property
    def k(self):
        return self.alg.k

    def positions(self):
        return self.alg.config.as_dict()

    def serve(self, request):
        if len(self.requests) >= self.budget:
            raise StepBudgetExceeded(
                f"cycle exceeded {self.budget} requests (adversary stuck?)")
        self.requests.append(request)
        return serve_checked(self.alg, request, audit=self.audit)

    def fresh_instance(self):
        """New algorithm instance from the duel's factory (shadow simulation)."""
        return self.factory()


@dataclass
class CycleRow:
    index: int
    alg_cost: object
    opt_cost: object
    requests: int
    g: int
    f: int


@dataclass
class DuelReport:
    algorithm: str
    adversary: str
    k: int
    cycles: int
    rows: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def total_alg_cost(self):
        return sum(r.alg_cost for r in self.rows) if self.rows else 0

    @property
    def total_opt_cost(self):
        return sum(r.opt_cost for r in self.rows) if self.rows else 0

    @property
    def ratio(self):
        opt = self.total_opt_cost
        if opt == 0:
            return None
        alg = self.total_alg_cost
        if isinstance(alg, int) and isinstance(opt, int):
            return Fraction(alg, opt)
        return alg / opt

    @property
    def measured_s(self):
        g = sum(r.g for r in self.rows)
        f = sum(r.f for r in self.rows)
        return Fraction(f, g + f) if g + f else None


def duel(factory, adversary, cycles, *, audit=False, verify_certificates=True,
         step_budget=None) -> DuelReport:
    """Run an adaptive adversary against a fresh algorithm for R cycles.

    The adversary emits requests through a DuelContext and returns a
    per-cycle certificate carrying its claimed optimal schedule; certificates
    are replay-validated here unless disabled.
    """
    alg = factory()
    if step_budget is None:
        step_budget = DEFAULT_STEP_BUDGET_FACTOR * alg.k
    fresh_each_cycle = getattr(adversary, "fresh_instance_each_cycle", False)
    report = DuelReport(algorithm=alg.name, adversary=adversary.name,
                        k=alg.k, cycles=cycles)
    t0 = _time.perf_counter()

    # one play may span several construction cycles (share-targeted plans)
    per_play_budget = step_budget * getattr(adversary, "cycles_per_play", 1)

    def play(index, player):
        nonlocal alg
        if fresh_each_cycle and index > 0:
            alg = factory()
        cost0 = alg.total_cost
        g0, f0 = alg.ledger.g_count, alg.ledger.f_count
        ctx = DuelContext(alg, factory, per_play_budget, audit=audit)
        cert = player(ctx)
        if cert is None:
            return
        if list(cert.requests) != ctx.requests:
            raise AdversaryError("certificate does not match the emitted requests")
        if verify_certificates:
            cert.validate(alg.metric)
        report.rows.append(CycleRow(
            index=index,
            alg_cost=alg.total_cost - cost0,
            opt_cost=cert.cost,
            requests=len(ctx.requests),
            g=alg.ledger.g_count - g0,
            f=alg.ledger.f_count - f0,
        ))
        report.certificates.append(cert)

    setup = getattr(adversary, "play_setup", None)
    if setup is not None:
        play(0, setup)
    for c in range(1, cycles + 1):
        play(c, adversary.play_cycle)
    report.wall_time = _time.perf_counter() - t0
    return report
