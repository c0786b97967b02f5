"""Shared helpers: standard instances, corpus builders, independent oracles."""

import itertools
import random
from fractions import Fraction

import pytest

from kpref.engine import serve_checked
from kpref.harness import gen_random, run_duel, standard_duel_instance
from kpref.metric import UniformMetric
from kpref.model import Request


def uniform_start(k, n=None):
    """Uniform metric with server j at location j-1 and one spare point."""
    return standard_duel_instance(k, n)


def serve_all(alg, requests, audit=True):
    for r in requests:
        serve_checked(alg, r, audit=audit)
    return alg


def brute_min_cost_ending_at(metric, initial, locations, end_config):
    """Independent oracle for work-function values: enumerate which server
    answers each location, simulate lazily, add the final transport."""
    servers = sorted(initial)
    best = None
    for assign in itertools.product(servers, repeat=len(locations)):
        pos = dict(initial)
        cost = 0
        for loc, who in zip(locations, assign):
            if pos[who] != loc:
                cost += metric.distance(pos[who], loc)
                pos[who] = loc
        cost += sum(metric.distance(pos[j], end_config[j]) for j in servers)
        if best is None or cost < best:
            best = cost
    return best


def random_uniform_instance(rng, k_max=3, n_locations_max=4, n_requests_max=6):
    k = rng.randint(2, k_max)
    n = rng.randint(k, n_locations_max)
    metric = UniformMetric(n)
    initial = {j + 1: loc for j, loc in enumerate(rng.sample(range(n), k))}
    requests = []
    for _ in range(rng.randint(0, n_requests_max)):
        loc = rng.randrange(n)
        if rng.random() < 0.4:
            requests.append(Request(loc, rng.randint(1, k)))
        else:
            requests.append(Request(loc))
    return metric, initial, requests


def adversarial_traces(seed=0):
    """Static instances replaying adversary duels, for the upper-bound corpora."""
    traces = []
    plans = [
        ("conf", "conf-killer", 2, 3), ("conf", "conf-killer", 3, 3),
        ("conf", "conf-killer", 4, 2),
        ("conf", "general-lb", 2, 3), ("conf", "general-lb", 3, 3),
        ("conf", "general-lb", 4, 2),
        ("def", "general-lb", 3, 3), ("def", "general-lb", 4, 2),
        ("example-lru", "general-lb", 3, 3),
        ("conf", "adaptive-lb:1/5", 3, 2), ("conf", "adaptive-lb:2/5", 3, 2),
        ("conf", "adaptive-lb:1/2", 3, 2), ("conf", "adaptive-lb:3/5", 3, 2),
        ("conf", "adaptive-lb:9/10", 3, 2), ("conf", "adaptive-lb:3/4", 4, 2),
        ("conf", "defensive-lb", 2, 3), ("conf", "defensive-lb", 3, 3),
        ("def", "defensive-lb", 4, 2),
        ("example-lru", "strict-confident-lb:2", 2, 3),
        ("example-lru", "strict-confident-lb:3", 3, 3),
        ("example-lru", "strict-confident-lb:4", 4, 2),
    ]
    for algo, adv, k, cycles in plans:
        report = run_duel(algo, adv, k, cycles)
        metric, initial = standard_duel_instance(
            k, 3 if adv == "lru-killer" else k + 1)
        requests = []
        for cert in report.certificates:
            requests.extend(cert.requests)
        traces.append((metric, dict(initial), requests[:30]))
    return traces


def uniform_corpus(count=520, seed=20240905):
    """Seeded mix of random and adversarial uniform instances, k <= 4, n <= 30."""
    rng = random.Random(seed)
    instances = []
    for trace in adversarial_traces():
        instances.append(trace)
    i = 0
    while len(instances) < count:
        k = rng.choice([2, 2, 3, 3, 3, 4])
        n_loc = rng.randint(k + 1, 5 if k == 4 else 6)
        inst = gen_random(seed * 1000 + i, k, "uniform", n_locations=n_loc,
                          n_requests=rng.randint(5, 30),
                          s_target=rng.choice(
                              [0, Fraction(1, 5), Fraction(1, 3), Fraction(1, 2),
                               Fraction(2, 3), Fraction(9, 10), 1]))
        instances.append((inst.metric, dict(inst.initial), list(inst.requests)))
        i += 1
    return instances


@pytest.fixture(scope="session")
def corpus():
    return uniform_corpus()
