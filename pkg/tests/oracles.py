"""Reference implementations used only by the tests.

Both are deliberately naive and share no reasoning code with the package:

* ``brute_step`` grounds every effect axiom over a finite domain, then finds
  minimal models by enumerating all subsets of candidate atoms, and applies the
  one-step event calculus rules to every combination of minimal models.
* ``naive_realize`` applies the TBox to the ABox until nothing changes.
"""

from __future__ import annotations

import itertools
from typing import Iterable

import numpy as np

from actbridge.abox import ABox, ClassAssertion, PropertyAssertion
from actbridge.ec import HOLDS, INITIATES, RELEASED, RELEASES, TERMINATES, Happens, Observation
from actbridge.ontology import PRIMITIVES, Atomic, AxiomKind, Conjunction, Existential
from actbridge.terms import Fn, Var

MAX_ATOMS = 18


# -- minimal models of propositional Horn clauses ------------------------------------

def minimal_models(n: int, clauses: list[tuple[int, int]]) -> list[int]:
    """All subset-minimal bitmasks over ``n`` atoms satisfying ``body -> head`` clauses."""
    if n > MAX_ATOMS:
        raise ValueError(f"oracle limited to {MAX_ATOMS} atoms, got {n}")
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.shape, dtype=bool)
    for body, head in clauses:
        fires = (masks & body) == body
        ok &= ~fires | ((masks & head) == head)
    models = masks[ok]
    out: list[int] = []
    while models.size:
        pop = np.array([bin(int(m)).count("1") for m in models])
        least = int(models[int(np.argmin(pop))])
        out.append(least)
        models = models[(models & least) != least]
    return out


# -- grounding -------------------------------------------------------------------------

def _vars(term) -> set:
    if isinstance(term, Var):
        return {term}
    if isinstance(term, Fn):
        out = set()
        for a in term.args:
            out |= _vars(a)
        return out
    return set()


def _subst(term, env: dict):
    if isinstance(term, Var):
        return env.get(term, term)
    if isinstance(term, Fn):
        return Fn(term.functor, tuple(_subst(a, env) for a in term.args))
    return term


def _subterms(term) -> Iterable:
    yield term
    if isinstance(term, Fn):
        for a in term.args:
            yield from _subterms(a)


def _axiom_vars(ax) -> list:
    found = set()
    for t in (*ax.holds, *ax.initiated, *(f for _, f in ax.effects), *(v for _, v in ax.bindings)):
        found |= _vars(t)
    if ax.agent is not None:
        found |= _vars(ax.agent)
    return sorted(found, key=lambda v: v.name)


def _ground_clauses(sigma, event, true_now: set, domain: list) -> list[tuple[tuple, tuple]]:
    """Ground (initiated-body, effect-heads) pairs of ``sigma`` for one event."""
    out = []
    for ax in sigma:
        if ax.act is not None and ax.act != event.act:
            continue
        names = _axiom_vars(ax)
        for values in itertools.product(domain, repeat=len(names)):
            env = dict(zip(names, values))
            if ax.agent is not None and _subst(ax.agent, env) != event.agent:
                continue
            if any(event.role(r) is None or event.role(r) != _subst(p, env) for r, p in ax.bindings):
                continue
            if not all(_subst(c, env) in true_now for c in ax.holds):
                continue
            body = tuple((INITIATES, _subst(c, env)) for c in ax.initiated)
            heads = tuple((k, _subst(f, env)) for k, f in ax.effects)
            out.append((body, heads))
    return out


def _domain(gamma, events, sigma) -> list:
    terms = set()
    for o in gamma:
        terms |= set(_subterms(o.fluent))
    for e in events:
        terms.add(Fn(e.message))
        for _, v in e.roles:
            terms |= set(_subterms(v))
    for ax in sigma:
        for t in (*ax.holds, *ax.initiated, *(f for _, f in ax.effects), *(v for _, v in ax.bindings)):
            terms |= {s for s in _subterms(t) if not _vars(s)}
    return sorted(terms, key=repr)


# -- one step ---------------------------------------------------------------------------

def _happens_models(delta: frozenset, constraints: list[tuple[str, str]], t: int) -> list[frozenset]:
    base_events = {h.event for h in delta}
    acts = sorted({e.act for e in base_events} | {a for c in constraints for a in c})
    atoms = sorted({Happens(e.with_act(a), t) for e in base_events for a in acts}, key=Happens.key)
    index = {a: i for i, a in enumerate(atoms)}
    clauses = [(0, 1 << index[h]) for h in delta]
    for trigger, implied in constraints:
        for e in base_events:
            clauses.append((1 << index[Happens(e.with_act(trigger), t)], 1 << index[Happens(e.with_act(implied), t)]))
    return [frozenset(a for a, i in index.items() if m >> i & 1) for m in minimal_models(len(atoms), clauses)]


def _effect_models(clauses: list[tuple[tuple, tuple]]) -> list[frozenset]:
    atoms = sorted({h for _, heads in clauses for h in heads}, key=repr)
    index = {a: i for i, a in enumerate(atoms)}
    bits = []
    for body, heads in clauses:
        if any(b not in index for b in body):
            continue  # a body atom nothing can produce is false in every minimal model
        b = sum(1 << index[x] for x in set(body))
        for h in heads:
            bits.append((b, 1 << index[h]))
    return [frozenset(a for a, i in index.items() if m >> i & 1) for m in minimal_models(len(atoms), bits)]


def _dec(gamma: frozenset, effects: set, t: int) -> frozenset:
    initiated = {f for k, f in effects if k == INITIATES}
    terminated = {f for k, f in effects if k == TERMINATES}
    released_by_event = {f for k, f in effects if k == RELEASES}
    was_released = {o.fluent for o in gamma if o.predicate == RELEASED and o.holds and o.time == t}
    released = released_by_event | {f for f in was_released if f not in initiated and f not in terminated}
    out = set()
    for f in initiated:
        out.add(Observation(f, t + 1))
    for f in terminated:
        out.add(Observation(f, t + 1, holds=False))
    for o in gamma:
        if o.predicate == HOLDS and o.holds and o.time == t and o.fluent not in released and o.fluent not in terminated:
            out.add(Observation(o.fluent, t + 1))
    for f in released:
        out.add(Observation(f, t + 1, predicate=RELEASED))
    return frozenset(out)


def brute_step(gamma, delta, sigma, constraints: Iterable[tuple[str, str]] = (), t: int = 0) -> frozenset:
    """Observations true at ``t+1`` in every minimal model."""
    gamma, delta, sigma = frozenset(gamma), frozenset(delta), list(sigma)
    constraints = list(constraints)
    true_now = {o.fluent for o in gamma if o.predicate == HOLDS and o.holds and o.time == t}
    answers = []
    for happens in _happens_models(delta, constraints, t):
        events = sorted({h.event for h in happens}, key=lambda e: (e.act, e.message))
        domain = _domain(gamma, events, sigma)
        per_event = [[{(k, f) for k, f in m} for m in _effect_models(_ground_clauses(sigma, e, true_now, domain))]
                     for e in events]
        for combo in itertools.product(*per_event):
            merged = set().union(*combo) if combo else set()
            answers.append(_dec(gamma, merged, t))
    if not answers:
        return frozenset()
    return frozenset.intersection(*answers)


# -- realization -------------------------------------------------------------------------

def _flatten(expr) -> list:
    if isinstance(expr, Conjunction):
        return [p for c in expr.conjuncts for p in _flatten(c)]
    return [expr]


def naive_realize(onto, abox: ABox) -> ABox:
    """Derived class assertions, by repeated passes over every axiom and element.

    An existential the TBox forces on an element gets a witness element named
    after its filler; the witness is given the filler's parts the same way.
    """
    types: dict[str, set[str]] = {}
    edges: set[tuple[str, str, str]] = set()
    for a in abox.assertions:
        if isinstance(a, ClassAssertion):
            types.setdefault(a.individual, set()).add(a.cls)
        elif isinstance(a, PropertyAssertion) and isinstance(a.object, str):
            edges.add((a.subject, a.prop, a.object))
    named = abox.individuals()
    for x in named:
        types.setdefault(x, set())

    def holds(x: str, expr) -> bool:
        if isinstance(expr, Atomic):
            return expr.name in types[x]
        if isinstance(expr, Existential):
            return any(holds(o, expr.filler) for s, p, o in edges if s == x and p == expr.prop)
        return all(holds(x, c) for c in expr.conjuncts)

    def impose(x: str, expr) -> bool:
        """Make ``x`` satisfy ``expr`` by adding types and witness edges; report growth."""
        grew = False
        for part in _flatten(expr):
            if isinstance(part, Atomic):
                if part.name not in types[x]:
                    types[x].add(part.name)
                    grew = True
            else:
                w = f"~{part.filler}"
                if w not in types:
                    types[w] = set()
                    grew = True
                if (x, part.prop, w) not in edges:
                    edges.add((x, part.prop, w))
                    grew = True
                grew |= impose(w, part.filler)
        return grew

    changed = True
    while changed:
        changed = False
        for ax in onto.tbox:
            for x in sorted(types):
                if ax.lhs in types[x]:
                    changed |= impose(x, ax.rhs)
                if ax.kind is AxiomKind.EQUIVALENT and ax.lhs not in PRIMITIVES and ax.lhs not in types[x] \
                        and holds(x, ax.rhs):
                    types[x].add(ax.lhs)
                    changed = True
    return ABox.of(ClassAssertion(c, x) for x in named for c in types[x]
                   if ClassAssertion(c, x) not in abox.assertions)
