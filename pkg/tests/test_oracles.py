"""The reference implementations must be able to tell wrong answers apart."""

import random

from actbridge.ec import step
from actbridge.ontology import Ontology, realize
from generators import random_realize_instance, random_step_instance
from oracles import brute_step, minimal_models, naive_realize


def test_minimal_models_of_horn_clauses():
    # a; a -> b; c -> d
    assert minimal_models(4, [(0, 0b0001), (0b0001, 0b0010), (0b0100, 0b1000)]) == [0b0011]
    assert minimal_models(2, []) == [0]


def test_step_oracle_notices_missing_event_constraints():
    differs = 0
    for seed in range(300):
        inst = random_step_instance(random.Random(seed))
        if step(inst.gamma, inst.delta, inst.sigma, None, time=0) != \
                brute_step(inst.gamma, inst.delta, inst.sigma, inst.event_pairs):
            differs += 1
    assert differs > 10


def test_random_steps_are_not_trivial():
    nonempty = sum(bool(brute_step(i.gamma, i.delta, i.sigma, i.event_pairs))
                   for i in (random_step_instance(random.Random(s)) for s in range(300)))
    assert nonempty > 150


def test_realize_oracle_notices_a_missing_tbox():
    differs = 0
    for seed in range(300):
        onto, m = random_realize_instance(random.Random(seed))
        if realize(Ontology(), m) != naive_realize(onto, m):
            differs += 1
    assert differs > 50
