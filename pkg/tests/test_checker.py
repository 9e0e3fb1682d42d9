import random

import pytest

from archpat import (
    Inconclusive, Limits, UnknownProperty, check_all, check_formula, check_property,
    verify_lasso,
)
from archpat.model import Atom, BoolLit, PortRef, Finally, Globally, LNot
from archpat.patterns import get_spec
from archpat.semantics import reachable
from helpers import brute_force_holds, count_temporal, oracle_cases, random_spec

CASES = oracle_cases(24, seed=1000)


@pytest.mark.parametrize("case", range(len(CASES)))
@pytest.mark.parametrize("engine", ["scc", "ndfs"])
def test_verdicts_match_brute_force(case, engine):
    spec, formulas, bound = CASES[case]
    n = reachable(spec).states_visited
    assert n <= 5000 and bound >= n
    for f in formulas:
        assert count_temporal(f) <= 2
        expected, _ = brute_force_holds(spec, f, bound)
        v = check_formula(spec, f, engine=engine)
        assert v.holds == expected, f
        assert (v.counterexample is None) == v.holds
        if not v.holds:
            assert verify_lasso(spec, f, v.counterexample)


def test_globally_true_holds_everywhere():
    for name in ("singleton", "broker"):
        v = check_formula(get_spec(name), Globally(Atom(BoolLit(True))))
        assert v.holds and v.counterexample is None


def _dual(f):
    # G φ  ==  ¬F¬φ
    assert isinstance(f, Globally)
    return LNot(Finally(LNot(f.operand)))


@pytest.mark.parametrize("name", ["singleton", "broker", "singleton_mutant_grant",
                                  "broker_mutant_ack"])
def test_duality(name):
    spec = get_spec(name)
    for prop in spec.properties:
        a = check_formula(spec, prop.formula)
        b = check_formula(spec, _dual(prop.formula))
        assert a.holds == b.holds, prop.name


@pytest.mark.parametrize("name", ["singleton", "broker_mutant_ack", "singleton_mutant_grant"])
def test_counterexamples_are_certified_and_bounded(name):
    spec = get_spec(name)
    for prop_name, v in check_all(spec):
        st = v.stats
        assert st.product_states <= st.system_states * st.buchi_states
        if not v.holds:
            assert verify_lasso(spec, spec.property(prop_name).formula, v.counterexample)


def test_mutants_fail_their_target_property():
    assert not check_property(get_spec("singleton_mutant_grant"), "S2").holds
    assert not check_property(get_spec("broker_mutant_ack"), "B2@server1").holds


def test_monotone_limits():
    spec = get_spec("singleton_mutant_grant")
    final = {p.name: check_property(spec, p.name).holds for p in spec.properties}
    n = reachable(spec).states_visited
    for bound in (1, 10, n - 1, n, n + 1, 10 * n):
        for prop in spec.properties:
            try:
                v = check_property(spec, prop.name, Limits(max_states=bound))
            except Inconclusive as exc:
                assert bound < 10 * n
                assert exc.reason
                continue
            assert v.holds == final[prop.name]


def test_time_limit_is_inconclusive():
    spec = random_spec(random.Random(4))
    # a fresh equal spec has no cached graph
    with pytest.raises(Inconclusive):
        check_formula(spec, Globally(Atom(PortRef(None, "e"))), Limits(max_time=1e-9))


def test_unknown_property():
    with pytest.raises(UnknownProperty):
        check_property(get_spec("singleton"), "S9")


def test_check_all_keeps_declaration_order_and_collects_errors():
    spec = get_spec("broker")
    names = [p.name for p in spec.properties]
    results = check_all(spec)
    assert [n for n, _ in results] == names
    limited = check_all(spec, Limits(max_states=5))
    assert all(isinstance(r, Inconclusive) for _, r in limited)


def test_workers_do_not_change_results():
    spec = get_spec("broker_mutant_ack")
    serial = check_all(spec, workers=1)
    parallel = check_all(spec, workers=2)
    assert [(n, v.holds) for n, v in serial] == [(n, v.holds) for n, v in parallel]
    assert [v.counterexample for _, v in serial] == [v.counterexample for _, v in parallel]


def test_engines_agree_on_builtins():
    for name in ("singleton", "broker", "broker_mutant_ack", "singleton_mutant_grant"):
        spec = get_spec(name)
        for prop in spec.properties:
            a = check_formula(spec, prop.formula, engine="scc")
            b = check_formula(spec, prop.formula, engine="ndfs")
            assert a.holds == b.holds
            if not b.holds:
                assert verify_lasso(spec, prop.formula, b.counterexample)
