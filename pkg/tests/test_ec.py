import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actbridge.abox import parse_triples
from actbridge.constraints import ConstraintSet, StateConstraint
from actbridge.ec import (INITIATES, EffectAxiom, Event, Happens, Observation, Trace, UnboundVariable,
                          check_consistent, close_events, entails, format_observations, parse_observation,
                          parse_observations, parse_time, render_time, resolve_event, step)
from actbridge.terms import Fn, Var
from dec_cases import CASES, ax, ev, psi
from generators import random_step_instance
from oracles import brute_step


@pytest.mark.parametrize("case", CASES, ids=[c.name for c in CASES])
def test_dec_table(case):
    got = step(case.gamma_obs, case.delta, case.sigma, case.constraints, time=case.time)
    assert got == case.expected_obs


@pytest.mark.parametrize("case", CASES, ids=[c.name for c in CASES])
def test_dec_table_agrees_with_oracle(case):
    pairs = [(c.trigger, c.implied) for c in case.constraints.event]
    assert brute_step(case.gamma_obs, case.delta, case.sigma, pairs, t=case.time) == case.expected_obs


def test_step_matches_brute_force_1000():
    for seed in range(1000):
        inst = random_step_instance(random.Random(seed))
        assert step(inst.gamma, inst.delta, inst.sigma, inst.psi, time=0) == \
            brute_step(inst.gamma, inst.delta, inst.sigma, inst.event_pairs), seed


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_step_is_order_invariant(seed):
    inst = random_step_instance(random.Random(seed))
    shuffled = list(inst.sigma)
    random.Random(seed + 1).shuffle(shuffled)
    assert step(inst.gamma, inst.delta, inst.sigma, inst.psi, time=0) == \
        step(inst.gamma, inst.delta, shuffled, inst.psi, time=0)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_without_events_only_positive_fluents_persist(seed):
    inst = random_step_instance(random.Random(seed))
    got = step(inst.gamma, [], inst.sigma, inst.psi, time=0)
    released = {o.fluent for o in inst.gamma if o.predicate == "ReleasedAt"}
    kept = {Observation(o.fluent, 1) for o in inst.gamma
            if o.predicate == "HoldsAt" and o.holds and o.fluent not in released}
    assert {o for o in got if o.predicate == "HoldsAt"} == kept


def test_event_closure_trace():
    trace = Trace()
    closed = close_events([ev("A")], psi(("A", "B"), ("B", "C")), trace)
    assert {h.event.act for h in closed} == {"A", "B", "C"}
    assert len(trace) == 2


def test_role_bound_axiom_needs_role():
    axiom = EffectAxiom("Ask", ((INITIATES, Fn("asked", (Var("r"),))),), bindings=(("receiver", Var("r")),))
    with pytest.raises(UnboundVariable) as exc:
        step([], [ev("Ask")], [axiom])
    assert exc.value.role == "receiver"
    resolved = Happens(Event("Ask", "m", (("receiver", Fn("bob")),)), 0)
    assert step([], [resolved], [axiom]) == {parse_observation("HoldsAt(asked(bob),t0+1)")}


def test_generic_axiom_without_role_does_not_fire():
    axiom = EffectAxiom(None, ((INITIATES, Fn("asked", (Var("r"),))),), bindings=(("receiver", Var("r")),))
    assert step([], [ev("Ask")], [axiom]) == frozenset()


def test_unbound_effect_variable_rejected():
    with pytest.raises(ValueError):
        EffectAxiom("A", ((INITIATES, Fn("g", (Var("x"),))),))


def test_resolve_event_from_abox():
    m = parse_triples("m hasSender a01\nm hasReceiver a02\nm hasContent f01\n")
    e = resolve_event("Inquiry", "m", m)
    assert e.render() == "send(Inquiry(a01,a02,f01))"
    assert e.render(resolved=False) == "send(Inquiry(m))"
    assert e.agent == Fn("a01")


def test_mixed_timepoints_rejected():
    with pytest.raises(ValueError):
        step(parse_observations("HoldsAt(f,t0)"), [ev("A", t=2)], [])


def test_consistency():
    assert check_consistent(parse_observations("HoldsAt(f,t0)\nHoldsAt(g,t0)"))
    assert not check_consistent(parse_observations("HoldsAt(f,t0)\n¬HoldsAt(f,t0)"))
    assert check_consistent(parse_observations("HoldsAt(f,t0)\n¬HoldsAt(f,t0+1)"))


def test_entailment_uses_state_constraints():
    m = Var("m")
    constraints = ConstraintSet(state=frozenset({StateConstraint((Fn("Sub", (m,)),), Fn("Super", (m,)))}))
    strong = parse_observations("HoldsAt(Sub(x),t0+1)")
    weak = parse_observations("HoldsAt(Super(x),t0+1)")
    assert entails(strong, weak, constraints) == (True, frozenset())
    ok, missing = entails(weak, strong, constraints)
    assert not ok and missing == strong


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_entailment_is_reflexive(seed):
    inst = random_step_instance(random.Random(seed))
    phi = step(inst.gamma, inst.delta, inst.sigma, inst.psi, time=0)
    assert entails(phi, phi, inst.psi)[0]


@pytest.mark.parametrize("text", ["HoldsAt(f,t0)", "¬HoldsAt(g(a,'x y'),t0+2)", "ReleasedAt(f,t0+1)"])
def test_observation_text_round_trip(text):
    assert parse_observation(text).render() == text


def test_observation_parsing_variants():
    assert parse_observation("not HoldsAt(f, 3)") == Observation(Fn("f"), 3, holds=False)
    assert parse_observation("-HoldsAt(f,t0+0)") == Observation(Fn("f"), 0, holds=False)
    assert parse_time("t0+12") == 12 and render_time(0) == "t0" and render_time(2) == "t0+2"
    with pytest.raises(ValueError):
        parse_observation("Holds(f,t0)")
    with pytest.raises(ValueError):
        parse_observation("HoldsAt(?x,t0)")
    obs = parse_observations("# context\nHoldsAt(f,t0)\n\nHoldsAt(g,t0)  # second\n")
    assert format_observations(obs) == "HoldsAt(f,t0)\nHoldsAt(g,t0)\n"


def test_step_trace_names_rules():
    trace = Trace()
    step(parse_observations("HoldsAt(f,t0)"), [ev("A")], [ax("A", (INITIATES, "g"))], trace=trace)
    reasons = {d.conclusion: d.reason for d in trace}
    assert reasons["HoldsAt(g,t0+1)"] == "DEC9"
    assert reasons["HoldsAt(f,t0+1)"] == "DEC5"
