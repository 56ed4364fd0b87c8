"""One test per acceptance criterion.

Each test records a pass/fail line in ``conftest.ACCEPTANCE`` before asserting,
so the terminal summary lists every criterion even when one fails.
Run directly (``python3 tests/test_acceptance.py``) for the lines alone.
"""

from __future__ import annotations

import random
import time

from actbridge.abox import ClassAssertion, parse_triples
from actbridge.checker import ConversionCase, Side, check
from actbridge.codec import RawMessage, Syntax, join, parse, serialize, split
from actbridge.ec import check_consistent, parse_observations, step
from actbridge.mediator import Mediator, SystemRegistry
from actbridge.ontology import realize

import conftest
from commitment_cases import LIFECYCLE, SIGMA
from conftest import DATA, SYNTHETIC, golden
from dec_cases import CASES
from generators import ACTS, random_block_message, random_realize_instance, random_sexpr_message, random_step_instance
from oracles import brute_step, naive_realize

N = 1000


def record(name: str, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE[name] = (ok, detail)
    assert ok, detail


def _message01() -> RawMessage:
    return RawMessage(Syntax.FIPA_ACL, (DATA / "message01.acl").read_text(encoding="utf-8"))


def test_1_end_to_end_conversion():
    registry = SystemRegistry.load()
    start = time.perf_counter()
    with Mediator(registry) as med:
        result = med.convert(_message01(), "MedicalFIPAAgents", "Aingeru")
    elapsed = time.perf_counter() - start
    expected = parse_triples(golden("message01.saturated.ttl"))
    inferred = {ClassAssertion("VitalSignInfRef", "RE01"), ClassAssertion("VitalSignInfGive", "FIR01"),
                ClassAssertion("A-VitalSignQueryRef", "Message01")}
    ok = (result.target_abox == expected and inferred <= set(result.target_abox.assertions)
          and result.target_act == "A-VitalSignQueryRef" and result.raw.text == golden("message01.aingeru.txt")
          and elapsed < 1.0)
    record("1 end-to-end conversion", ok, f"saturated set match={result.target_abox == expected}, "
                                          f"root typed {result.target_act}, {elapsed:.3f}s (< 1s)")


def test_2_proof_reproduction():
    registry = SystemRegistry.load()
    with Mediator(registry) as med:
        _, report = med.convert_and_check(_message01(), "MedicalFIPAAgents", "Aingeru")
    text = report.to_text() + "trace:\n" + report.trace_text()
    a = registry.aliases
    phi_src = {o.render(a) for o in report.phi_source}
    phi_tgt = {o.render(a) for o in report.phi_target}
    expected_src = {"HoldsAt(CC(a02,a01,accept(a02,a01,f01),f01),t0+1)", "HoldsAt(Fir(f01),t0+1)",
                    "HoldsAt(hasQuery(f01,RE01),t0+1)", "HoldsAt(RefExpression(RE01),t0+1)"}
    expected_tgt = {"HoldsAt(CC(a02,a01,accept(a02,a01,f01),f01),t0+1)", "HoldsAt(Vsig(f01),t0+1)",
                    "HoldsAt(hasQuery(f01,RE01),t0+1)", "HoldsAt(Vsir(RE01),t0+1)"}
    derived = {d.conclusion for d in report.trace}
    steps = {"HoldsAt(ReportAct(f01),t0+1)", "HoldsAt(RefExpression(RE01),t0+1)", "HoldsAt(Fir(f01),t0+1)"}
    ok = (report.satisfactory and phi_src == expected_src and phi_tgt == expected_tgt and steps <= derived
          and text == golden("message01.check.txt"))
    record("2 proof reproduction", ok, f"satisfactory={report.satisfactory}, phi sets match="
                                       f"{phi_src == expected_src and phi_tgt == expected_tgt}, "
                                       f"entailment steps in trace={steps <= derived}")


def test_3_context_pair():
    registry = SystemRegistry.load(SYNTHETIC / "registry.yaml")
    m1 = RawMessage(Syntax.KQML, (SYNTHETIC / "m1.kqml").read_text(encoding="utf-8"))
    with Mediator(registry) as med:
        _, with_f = med.convert_and_check(m1, "Sys1", "Sys2", parse_observations("HoldsAt(f,t0)"))
        _, empty = med.convert_and_check(m1, "Sys1", "Sys2", frozenset())
    ok = (not with_f.satisfactory and with_f.missing == parse_observations("HoldsAt(g,t0+1)")
          and empty.satisfactory)
    record("3 context pair", ok, f"Γ={{f}}: satisfactory={with_f.satisfactory}, "
                                 f"missing={sorted(o.render() for o in with_f.missing)}; "
                                 f"Γ=∅: satisfactory={empty.satisfactory}")


def test_4_dec_table():
    failures = [c.name for c in CASES
                if step(c.gamma_obs, c.delta, c.sigma, c.constraints, time=c.time) != c.expected_obs]
    ok = len(CASES) >= 20 and not failures
    record("4 DEC table", ok, f"{len(CASES) - len(failures)}/{len(CASES)} handcrafted cases exact"
                              + (f"; failing: {failures}" if failures else ""))


def test_5_commitment_lifecycle():
    failures = []
    for case in LIFECYCLE:
        t = case.event.time
        got = step(case.gamma_obs, [case.event], SIGMA, time=t)
        if got != case.expected_obs or brute_step(case.gamma_obs, [case.event], SIGMA, t=t) != got:
            failures.append(case.name)
    record("5 commitment lifecycle", not failures,
           f"{len(LIFECYCLE) - len(failures)}/{len(LIFECYCLE)} lifecycle steps agree with oracle")


def test_6_oracle_equivalence():
    start = time.perf_counter()
    step_bad = [seed for seed in range(N)
                if (inst := random_step_instance(random.Random(seed)))
                and step(inst.gamma, inst.delta, inst.sigma, inst.psi, time=0)
                != brute_step(inst.gamma, inst.delta, inst.sigma, inst.event_pairs)]
    realize_bad = [seed for seed in range(N)
                   if (pair := random_realize_instance(random.Random(seed)))
                   and realize(*pair) != naive_realize(*pair)]
    elapsed = time.perf_counter() - start
    ok = not step_bad and not realize_bad and elapsed < 60
    record("6 oracle equivalence", ok, f"step {N - len(step_bad)}/{N}, realize {N - len(realize_bad)}/{N} "
                                       f"agree, {elapsed:.1f}s")


def test_7_codec_round_trips():
    bad: dict[str, int] = {}
    for syntax in Syntax:
        gen = random_block_message if syntax is Syntax.ASSERTION_BLOCK else random_sexpr_message
        count = 0
        for seed in range(N):
            msg = gen(random.Random(seed))
            back = parse(serialize(msg, syntax))
            if back != msg or join(*split(back)) != back:
                count += 1
        bad[syntax.name] = count
    record("7 codec round-trips", not any(bad.values()),
           ", ".join(f"{name} {N - n}/{N}" for name, n in bad.items()) + " (parse∘serialize and split/join)")


def _side(seed: int) -> tuple[Side, frozenset]:
    rng = random.Random(seed)
    inst = random_step_instance(rng)
    abox = parse_triples(f"m hasSender {rng.choice(['alice', 'bob'])}\nm hasContent c\nc rdf:type K\n")
    return Side(rng.choice(ACTS), "m", abox, frozenset(inst.sigma), inst.psi), inst.gamma


def test_8_checker_algebra():
    cases = 200
    reflexive = order = 0
    for seed in range(cases):
        side, gamma = _side(seed)
        report = check(ConversionCase(side, side, gamma))
        reflexive += (report.satisfactory == check_consistent(report.phi_target) and not report.missing)
        other, _ = _side(seed + cases)
        other = Side(other.act, "m", other.abox, other.sigma, other.psi)
        sigma = list(other.sigma)
        random.Random(seed).shuffle(sigma)
        shuffled = Side(other.act, "m", other.abox, frozenset(sigma), other.psi)
        first = check(ConversionCase(side, other, gamma))
        second = check(ConversionCase(side, shuffled, frozenset(reversed(list(gamma)))))
        order += first.to_text() == second.to_text()
    record("8 checker algebra", reflexive == cases and order == cases,
           f"reflexivity {reflexive}/{cases}, order invariance {order}/{cases}")


if __name__ == "__main__":
    for name, fn in sorted(((k, v) for k, v in globals().items() if k.startswith("test_")),
                           key=lambda kv: int(kv[0].split("_")[1])):
        try:
            fn()
        except AssertionError:
            pass
    for name in sorted(conftest.ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = conftest.ACCEPTANCE[name]
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
