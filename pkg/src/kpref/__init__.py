"""k-server with preferences: algorithms, adversaries, and exact optimum."""

from .metric import ExplicitMetric, LineMetric, MetricSpace, UniformMetric
from .model import Configuration, CostLedger, Request, requires_movement, specific_share
from .engine import Algorithm, DuelReport, Lazify, duel, run
from .uniform_algos import Conf, Def, ExampleLru, combined_conf_def
from .metric_algos import Dc2, Wfa, WorkFunctionTable
from .offline import opt_cost, opt_cost_bruteforce, phase_opt_certificate, rational_split
from .adversary import eval_bounds, make_adversary
from .harness import Instance, gen_random, make_algorithm, run_duel, sweep

__all__ = [
    "Algorithm", "Conf", "Configuration", "CostLedger", "Dc2", "Def", "DuelReport",
    "ExampleLru", "ExplicitMetric", "Instance", "Lazify", "LineMetric", "MetricSpace",
    "Request", "UniformMetric", "Wfa", "WorkFunctionTable", "combined_conf_def",
    "duel", "eval_bounds", "gen_random", "make_adversary", "make_algorithm",
    "opt_cost", "opt_cost_bruteforce", "phase_opt_certificate", "rational_split",
    "requires_movement", "run", "run_duel", "specific_share", "sweep",
]

__version__ = "0.1.0"
