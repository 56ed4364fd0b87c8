import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actbridge.abox import parse_triples
from actbridge.checker import ConversionCase, Side, check, content_features
from actbridge.codec import RawMessage, Syntax
from actbridge.ec import check_consistent, parse_observations
from actbridge.mediator import Mediator
from conftest import golden
from generators import ACTS, random_step_instance


def _random_side(seed: int) -> tuple[Side, frozenset]:
    rng = random.Random(seed)
    inst = random_step_instance(rng)
    abox = parse_triples(f"m hasSender {rng.choice(['alice', 'bob'])}\nm hasContent c\nc rdf:type K\n")
    return Side(rng.choice(ACTS), "m", abox, frozenset(inst.sigma), inst.psi), inst.gamma


def test_worked_example_is_satisfactory(registry, message01):
    with Mediator(registry) as med:
        result = med.convert(message01, "MedicalFIPAAgents", "Aingeru", check_gamma=frozenset(), refuse=False)
    report = result.report
    assert report.satisfactory and report.consistent and not report.missing
    assert report.to_text() + "trace:\n" + report.trace_text() == golden("message01.check.txt")


def test_worked_example_phi_sets(registry, message01):
    with Mediator(registry) as med:
        _, report = med.convert_and_check(message01, "MedicalFIPAAgents", "Aingeru")
    a = registry.aliases
    assert {o.render(a) for o in report.phi_source} == {
        "HoldsAt(CC(a02,a01,accept(a02,a01,f01),f01),t0+1)", "HoldsAt(Fir(f01),t0+1)",
        "HoldsAt(hasQuery(f01,RE01),t0+1)", "HoldsAt(RefExpression(RE01),t0+1)"}
    assert {o.render(a) for o in report.phi_target} == {
        "HoldsAt(CC(a02,a01,accept(a02,a01,f01),f01),t0+1)", "HoldsAt(Vsig(f01),t0+1)",
        "HoldsAt(hasQuery(f01,RE01),t0+1)", "HoldsAt(Vsir(RE01),t0+1)"}


def test_context_decides_the_synthetic_pair(synthetic, m1):
    with Mediator(synthetic) as med:
        raw, report = med.convert_and_check(m1, "Sys1", "Sys2", parse_observations("HoldsAt(f,t0)"))
        assert raw is None and not report.satisfactory
        assert report.missing == parse_observations("HoldsAt(g,t0+1)")
        raw, report = med.convert_and_check(m1, "Sys1", "Sys2", frozenset())
        assert raw is not None and report.satisfactory
        assert raw.text.startswith("(achieve-a2")


def test_unaligned_act_loses_its_commitment(negative):
    raw_text = (negative.root / "q7.kqml").read_text()
    with Mediator(negative) as med:
        raw, report = med.convert_and_check(RawMessage(Syntax.KQML, raw_text), "Legacy", "Aingeru")
    assert raw is None and not report.satisfactory
    assert [o.fluent.functor for o in report.missing] == ["CC"]


@settings(max_examples=120, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_a_conversion_to_itself_is_satisfactory_when_consistent(seed):
    side, gamma = _random_side(seed)
    report = check(ConversionCase(side, side, gamma))
    assert report.satisfactory == check_consistent(report.phi_target)
    assert report.phi_source == report.phi_target
    assert not report.missing


@settings(max_examples=120, deadline=None)
@given(st.integers(min_value=0, max_value=10**9), st.integers(min_value=0, max_value=10**9))
def test_report_does_not_depend_on_input_order(seed, shuffle_seed):
    side, gamma = _random_side(seed)
    other, _ = _random_side(seed + 1)
    other = Side(other.act, "m", other.abox, other.sigma, other.psi)
    rng = random.Random(shuffle_seed)
    sigma = list(other.sigma)
    rng.shuffle(sigma)
    shuffled = Side(other.act, "m", other.abox, frozenset(reversed(sigma)), other.psi)
    first = check(ConversionCase(side, other, gamma))
    second = check(ConversionCase(side, shuffled, frozenset(reversed(list(gamma)))))
    assert first.to_text() == second.to_text()
    assert first.trace_text() == second.trace_text()


def test_content_features_use_most_specific_types(registry, message01):
    with Mediator(registry) as med:
        out = med.manager("MedicalFIPAAgents").prepare(message01, "Aingeru")
    cfg = registry.system("MedicalFIPAAgents")
    side = Side("FIPA-Query-Ref", "Message01", out.saturated, cfg.sigma, cfg.psi, cfg.ontology)
    rendered = {o.render() for o in content_features(side, 0)}
    assert rendered == {"HoldsAt(FIPA-Inform-Ref(FIR01),t0)", "HoldsAt(hasQuery(FIR01,RE01),t0)",
                        "HoldsAt(RefExpression(RE01),t0)"}


def test_case_validation():
    side, _ = _random_side(0)
    other = Side(side.act, "other", side.abox, side.sigma, side.psi)
    with pytest.raises(ValueError):
        ConversionCase(side, other)
    with pytest.raises(ValueError):
        ConversionCase(side, side, parse_observations("HoldsAt(f,t0+1)"))


def test_foreign_context_terms_are_noted(registry, message01):
    with Mediator(registry) as med:
        result = med.convert(message01, "MedicalFIPAAgents", "Aingeru",
                             check_gamma=parse_observations("HoldsAt(Urgent(m),t0)"), refuse=False)
    assert "context uses terms unknown" in result.report.trace_text()
