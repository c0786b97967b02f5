import random
from fractions import Fraction

import pytest

from kpref.metric import LineMetric, UniformMetric
from kpref.model import (
    Configuration, CostLedger, Request, UndefinedShare, apply_move,
    replay_moves, requires_movement, specific_share,
)


def cfg(*pairs):
    return Configuration(dict(pairs))


def test_requires_movement_general_covered():
    c = cfg((1, 0), (2, 1))
    assert requires_movement(c, Request(1)) is False
    assert requires_movement(c, Request(2)) is True


def test_requires_movement_specific():
    c = cfg((1, 0), (2, 1))
    assert requires_movement(c, Request(1, 1)) is True      # wrong server covers it
    assert requires_movement(c, Request(1, 2)) is False


def test_specific_share_values():
    led = CostLedger(g_count=4, f_count=0)
    assert specific_share(led) == 0
    led = CostLedger(g_count=0, f_count=7)
    assert specific_share(led) == 1
    led = CostLedger(g_count=3, f_count=3)
    assert specific_share(led) == Fraction(1, 2)


def test_specific_share_undefined():
    with pytest.raises(UndefinedShare):
        specific_share(CostLedger())


def test_apply_move_records_cost():
    m = UniformMetric(4)
    c = cfg((1, 0), (2, 1))
    led = CostLedger()
    apply_move(c, m, 1, 2, led, time=1)
    assert c.pos[1] == 2
    assert len(led.moves) == 1 and led.moves[0].cost == 1


def test_apply_move_zero_cost_not_recorded():
    m = UniformMetric(4)
    c = cfg((1, 0))
    led = CostLedger()
    apply_move(c, m, 1, 0, led)
    assert led.moves == [] and led.total_cost == 0


def test_apply_move_line_cost():
    m = LineMetric()
    c = cfg((1, Fraction(0)), (2, Fraction(2)))
    led = CostLedger()
    apply_move(c, m, 2, Fraction(0), led)
    assert led.total_cost == Fraction(2)


def test_ledger_replay_reproduces_final_configuration():
    rng = random.Random(11)
    m = UniformMetric(5)
    initial = {1: 0, 2: 1, 3: 2}
    c = Configuration(initial)
    led = CostLedger()
    for t in range(50):
        apply_move(c, m, rng.randint(1, 3), rng.randrange(5), led, time=t)
    assert replay_moves(initial, led.moves) == c.pos


def test_configuration_allows_stacking():
    c = cfg((1, 0), (2, 0))
    assert c.servers_at(0) == [1, 2]
    assert c.covers(0) and not c.covers(1)
