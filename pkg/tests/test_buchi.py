import itertools
import random

import pytest
from hypothesis import given, strategies as st

from archpat import parse_ltl, to_buchi
from archpat.buchi import accepts_lasso
from archpat.certify import eval_lasso
from archpat.model import Atom, PortRef
from archpat.semantics import eval_expr
from helpers import random_formula

ATOMS = [Atom(PortRef(None, n)) for n in ("p", "q")]


def f(text):
    formula, diags = parse_ltl(text)
    assert diags == []
    return formula


def value(a, letter):
    return bool(eval_expr(a.expr, letter))


def _letters(aut, word):
    """Map {name: bool} letters to the automaton's atom order."""
    return [[value(a, w) for a in aut.atoms] for w in word]


def _all_lassos(max_prefix=2, max_cycle=3):
    letters = [dict(zip("pq", bits)) for bits in itertools.product((False, True), repeat=2)]
    for lp in range(max_prefix + 1):
        for lc in range(1, max_cycle + 1):
            for word in itertools.product(letters, repeat=lp + lc):
                yield list(word[:lp]), list(word[lp:])


LASSOS = list(_all_lassos())


def agrees(formula, lassos=LASSOS):
    aut = to_buchi(formula)
    for prefix, cycle in lassos:
        word = prefix + cycle
        direct = eval_lasso(formula, len(word), len(prefix), lambda a, i: value(a, word[i]))
        if direct != accepts_lasso(aut, _letters(aut, prefix), _letters(aut, cycle)):
            return False, (prefix, cycle)
    return True, None


def test_eventually_has_two_states():
    aut = to_buchi(f("F p"))
    assert aut.size == 2
    assert len(aut.accepting) == 1
    assert agrees(f("F p"))[0]


def test_globally_true_is_trivial():
    aut = to_buchi(f("G true"))
    assert aut.size == 1
    assert aut.accepting == {0}
    assert aut.transitions == [(None, (), 0), (0, (), 0)]


def test_false_has_no_runs():
    aut = to_buchi(f("false"))
    assert aut.size == 0 or not aut.init


def test_response_rejects_unanswered_request():
    aut = to_buchi(f("G (p -> F q)"))
    p_only = {"p": True, "q": False}
    quiet = {"p": False, "q": False}
    assert not accepts_lasso(aut, _letters(aut, [p_only]), _letters(aut, [quiet]))
    answered = {"p": False, "q": True}
    assert accepts_lasso(aut, _letters(aut, [p_only]), _letters(aut, [answered]))


@pytest.mark.parametrize("text", [
    "F p", "G p", "X p", "p U q", "G F p", "F G p", "G (p -> F q)", "G (p -> X q)",
    "!(p U q)", "(G F p) & (G F q)", "(F p) | (G q)", "X X p", "p U (q U p)", "G (p -> G !q)",
    "F (p & X !p)", "!(G F p) -> F G !p",
])
def test_fixed_formulas_agree_with_direct_evaluation(text):
    ok, witness = agrees(f(text))
    assert ok, witness


@given(st.integers(0, 100_000))
def test_random_formulas_agree_with_direct_evaluation(seed):
    r = random.Random(seed)
    formula = random_formula(r, None, temporal=3, atoms=ATOMS)
    sample = r.sample(LASSOS, 120)
    ok, witness = agrees(formula, sample)
    assert ok, (formula, witness)


def test_guards_only_reference_declared_atoms():
    r = random.Random(5)
    for _ in range(100):
        aut = to_buchi(random_formula(r, None, temporal=3, atoms=ATOMS))
        assert len(aut.atoms) <= 2
        for src, guard, dst in aut.transitions:
            assert src is None or src in aut.states
            assert dst in aut.states
            assert all(0 <= a < len(aut.atoms) for a, _ in guard)


def test_construction_is_deterministic():
    text = "G ((p -> F q) & (q -> X (p U q)))"
    a, b = to_buchi(f(text)), to_buchi(f(text))
    assert (a.transitions, a.accepting) == (b.transitions, b.accepting)
