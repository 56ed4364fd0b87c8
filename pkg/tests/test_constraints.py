import random

from hypothesis import given, settings
from hypothesis import strategies as st

from actbridge.abox import ClassAssertion, PropertyAssertion
from actbridge.constraints import EventConstraint, generate
from actbridge.ec import HOLDS, Observation, close_state
from actbridge.ontology import load_many, parse_ontology, saturate
from actbridge.terms import Fn
from conftest import DATA
from generators import random_realize_instance


def test_inform_ref_definition_gives_three_constraints():
    onto = parse_ontology("Inquiry SubClassOf CommunicationAct\n"
                          "FIPA-Inform-Ref EquivalentTo ReportAct and (hasQuery some RefExpression)")
    text = generate(onto).to_text()
    assert "state: HoldsAt(FIPA-Inform-Ref(?m),t) → HoldsAt(ReportAct(?m),t)" in text
    assert ("state: HoldsAt(ReportAct(?m),t) ∧ HoldsAt(hasQuery(?m,?op),t) ∧ HoldsAt(RefExpression(?op),t)"
            " → HoldsAt(FIPA-Inform-Ref(?m),t)") in text
    assert "FIPA-Inform-Ref" not in "".join(line for line in text.splitlines() if line.startswith("event:"))


def test_without_an_act_root_every_class_is_an_act():
    onto = parse_ontology("B SubClassOf A")
    assert {(c.trigger, c.implied) for c in generate(onto).event} == {("B", "A")}


def test_event_constraints_only_between_acts():
    onto = load_many([DATA / "common.ont", DATA / "aingeru.ont"])
    psi = generate(onto)
    assert EventConstraint("FIPA-Query-Ref", "Inquiry") in {EventConstraint(c.trigger, c.implied) for c in psi.event}
    assert EventConstraint("A-VitalSignQueryRef", "Inquiry") in {EventConstraint(c.trigger, c.implied)
                                                                 for c in psi.event}
    acts = {c.trigger for c in psi.event} | {c.implied for c in psi.event}
    assert not acts & {"ReportAct", "RefExpression", "VitalSignInfGive", "Content"}


def test_constraints_carry_their_axiom():
    onto = parse_ontology("Inquiry SubClassOf Directive")
    (c,) = generate(onto).state
    assert c.source == "Inquiry SubClassOf Directive"


def _as_fluents(abox):
    out = set()
    for a in abox.assertions:
        if isinstance(a, ClassAssertion):
            out.add(Observation(Fn(a.cls, (Fn(a.individual),)), 0))
        elif isinstance(a, PropertyAssertion) and isinstance(a.object, str):
            out.add(Observation(Fn(a.prop, (Fn(a.subject), Fn(a.object))), 0))
    return out


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_state_closure_is_sound_for_realization(seed):
    """Whatever the state constraints derive, realization also derives."""
    onto, m = random_realize_instance(random.Random(seed))
    closed = {o for o in close_state(_as_fluents(m), generate(onto)) if o.predicate == HOLDS}
    assert closed <= _as_fluents(saturate(onto, m))
