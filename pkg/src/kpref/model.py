"""Requests, configurations, the movement ledger, and the specific share s.

Servers carry identities 1..k throughout a run.  A request is either general
(any server may answer) or specific to one server.  The ledger records every
paid movement and counts, separately for general and specific requests, how
many of them required a movement; the ratio f/(g+f) is the statistic the
adaptive bounds are parameterized by.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class Request:
    loc: object
    server: int | None = None   # None means general

    @property
    def is_specific(self):
        return self.server is not None

    def __str__(self):
        if self.is_specific:
            return f"spec({self.server})@{self.loc}"
        return f"gen@{self.loc}"


@dataclass(frozen=True)
class Move:
    time: int
    server: int
    src: object
    dst: object
    cost: object


class Configuration:
    """Labeled server placement; several servers may share a location."""

    def __init__(self, pos):
        self.pos = dict(pos)

    def copy(self):
        return Configuration(self.pos)

    def servers_at(self, loc):
        return sorted(j for j, p in self.pos.items() if p == loc)

    def covers(self, loc):
        return any(p == loc for p in self.pos.values())

    def occupied(self):
        return set(self.pos.values())

    def as_dict(self):
        return dict(self.pos)

    def __eq__(self, other):
        if isinstance(other, Configuration):
            return self.pos == other.pos
        if isinstance(other, dict):
            return self.pos == other
        return NotImplemented

    def __repr__(self):
        inner = ", ".join(f"{j}@{p}" for j, p in sorted(self.pos.items()))
        return f"Configuration({inner})"


class ServerMemory:
    """Last location each server was specifically requested at (p-star).

    Starts at the initial configuration; a specific request for j updates
    j's entry even when j was already on the requested location.
    """

    def __init__(self, initial):
        self.p_star = dict(initial)

    def note_specific(self, server, loc):
        self.p_star[server] = loc

    def __getitem__(self, server):
        return self.p_star[server]


class UndefinedShare(ValueError):
    """specific_share asked for before any request required a movement."""


@dataclass
class CostLedger:
    moves: list = field(default_factory=list)
    g_count: int = 0
    f_count: int = 0

    @property
    def total_cost(self):
        return sum(m.cost for m in self.moves) if self.moves else 0

    def record(self, time, server, src, dst, cost):
        """Append one paid movement; zero-cost moves are not recorded."""
        if cost == 0:
            return None
        move = Move(time, server, src, dst, cost)
        self.moves.append(move)
        return move

    def count_required(self, request):
        if request.is_specific:
            self.f_count += 1
        else:
            self.g_count += 1


def requires_movement(config, request):
    """Does this request force a lazy algorithm to move, given the current
    configuration (evaluated before serving)?"""
    if request.is_specific:
        return config.pos[request.server] != request.loc
    return not config.covers(request.loc)


def specific_share(ledger):
    """s = f/(g+f) over requests that required a movement; exact Fraction."""
    total = ledger.g_count + ledger.f_count
    if total == 0:
        raise UndefinedShare("no request has required a movement")
    return Fraction(ledger.f_count, total)


def share_or_none(ledger):
    try:
        return specific_share(ledger)
    except UndefinedShare:
        return None


def apply_move(config, metric, server, to, ledger, time=0):
    """Relocate one server, recording the cost (nothing recorded for cost 0)."""
    src = config.pos[server]
    cost = metric.distance(src, to)
    config.pos[server] = to
    ledger.record(time, server, src, to, cost)
    return config


def replay_moves(initial, moves):
    """Re-apply a ledger's moves to an initial placement; returns final dict."""
    pos = dict(initial)
    for m in moves:
        if pos[m.server] != m.src:
            raise ValueError(f"replay mismatch at {m}: server {m.server} is at {pos[m.server]}")
        pos[m.server] = m.dst
    return pos
