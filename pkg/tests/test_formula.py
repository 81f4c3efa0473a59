import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varconf.formula import (FALSE, TRUE, And, FormulaSyntaxError, Not, Or,
                             UnsupportedExpression, VarTable, evaluate,
                             parse_formula, semantically_equal, to_cnf, to_text)


def brute_models(cnf, n_total):
    out = []
    for a in itertools.product((False, True), repeat=n_total):
        if all(any(a[abs(l) - 1] == (l > 0) for l in c) for c in cnf.clauses):
            out.append(a)
    return out


def test_parse_examples():
    vt = VarTable()
    f = parse_formula("C2 && C1", vt)
    assert f == And((vt["C2"], vt["C1"]))
    assert parse_formula("true", vt) == TRUE
    g = parse_formula("!C5 && C6", vt)
    assert g == And((Not(vt["C5"]), vt["C6"]))
    assert vt.names == ["C2", "C1", "C5", "C6"]


def test_precedence():
    vt = VarTable()
    f = parse_formula("a || b && !c", vt)
    a, b, c = vt["a"], vt["b"], vt["c"]
    assert f == Or((a, And((b, Not(c)))))
    assert parse_formula("(a || b) && c", vt) == And((Or((a, b)), c))


@pytest.mark.parametrize("text, offset", [
    ("C1 &&", 5), ("(C1", 3), ("C1 C2", 3), ("&& C1", 0), ("C1 $ C2", 3), ("", 0),
])
def test_syntax_errors_carry_offset(text, offset):
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula(text, VarTable())
    assert exc.value.offset == offset


def test_preprocessor_mode():
    vt = VarTable()
    assert parse_formula("defined(X) && !defined Y", vt, preprocessor=True) == \
        And((vt["X"], Not(vt["Y"])))
    assert parse_formula("1", vt, preprocessor=True) == TRUE
    assert parse_formula("0 || X", vt, preprocessor=True) == Or((FALSE, vt["X"]))
    with pytest.raises(UnsupportedExpression):
        parse_formula("X > 1", vt, preprocessor=True)
    with pytest.raises(UnsupportedExpression):
        parse_formula("VERSION == 3", vt, preprocessor=True)
    with pytest.raises(FormulaSyntaxError):
        parse_formula("defined(X)", VarTable())


def test_interning_is_stable():
    vt = VarTable()
    assert vt.intern("A") is vt.intern("A")
    assert [v.index for v in vt] == [0]
    vt.freeze()
    with pytest.raises(KeyError):
        vt.intern("B")


def test_evaluate_examples():
    vt = VarTable(["C4", "C5", "C6"])
    a = vt.assignment({"C4": 0, "C5": 1, "C6": 0})
    assert evaluate(parse_formula("C4 || C5", vt), a)
    assert not evaluate(parse_formula("!C5 && C6", vt), a)
    assert evaluate(TRUE, a)


def test_to_cnf_examples():
    vt = VarTable(["C1", "C2", "C3"])
    cnf = to_cnf(vt["C1"])
    assert cnf.clauses == [[1]] and cnf.num_aux_vars == 0
    assert to_cnf(FALSE).clauses == [[]]
    f = parse_formula("C1 && (C2 || !C3)", vt)
    cnf = to_cnf(f, 3)
    models = brute_models(cnf, cnf.num_vars)
    restricted = {m[:3] for m in models}
    # truth-table count of the source formula
    assert sum(evaluate(f, a) for a in itertools.product((False, True), repeat=3)) == 3
    assert len(restricted) == 3
    assert all(evaluate(f, m) for m in restricted)


def test_semantically_equal_examples():
    vt = VarTable()
    p = lambda s: parse_formula(s, vt)
    assert semantically_equal(p("C1 && C2"), p("C2 && C1"))
    assert semantically_equal(p("C5"), p("!(!C5)"))
    assert not semantically_equal(p("C4 || C5"), p("C5"))
    # C4=1, C5=0 separates them
    a = vt.assignment({"C4": True})
    assert evaluate(p("C4 || C5"), a) != evaluate(p("C5"), a)
    assert semantically_equal(p("a && (b || c)"), p("a && b || a && c"))
    assert semantically_equal(p("a || !a"), TRUE)


# -- properties -----------------------------------------------------------------

NAMES = [f"V{i}" for i in range(8)]


def formulas(vt, max_depth=6):
    leaves = st.sampled_from([vt.intern(n) for n in NAMES] + [TRUE, FALSE])

    def extend(children):
        return st.one_of(
            children.map(Not),
            st.lists(children, min_size=1, max_size=3).map(lambda cs: And(tuple(cs))),
            st.lists(children, min_size=1, max_size=3).map(lambda cs: Or(tuple(cs))),
        )
    return st.recursive(leaves, extend, max_leaves=2 ** max_depth // 4)


_VT = VarTable(NAMES)


@settings(max_examples=200, deadline=None)
@given(formulas(_VT))
def test_print_parse_round_trip(f):
    g = parse_formula(to_text(f), _VT)
    assert semantically_equal(f, g)


@settings(max_examples=200, deadline=None)
@given(formulas(_VT))
def test_round_trip_is_structural(f):
    # printing is exact, not just equivalent, for formulas the parser could produce
    parsed = parse_formula(to_text(f), _VT)
    text = to_text(parsed)
    assert parse_formula(text, _VT) == parsed
    assert to_text(parse_formula(text, _VT)) == text


def random_formula(rng, n, depth):
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.05:
            return TRUE
        if r < 0.1:
            return FALSE
        return _VT10.intern(f"x{rng.randrange(n)}")
    op = rng.choice(["not", "and", "or"])
    if op == "not":
        return Not(random_formula(rng, n, depth - 1))
    kids = tuple(random_formula(rng, n, depth - 1) for _ in range(rng.randint(1, 3)))
    return And(kids) if op == "and" else Or(kids)


_VT10 = VarTable([f"x{i}" for i in range(10)])


def test_cnf_soundness_500_random():
    from varconf.backend import SatCore
    rng = random.Random(7)
    for _ in range(500):
        n = rng.randint(1, 10)
        f = random_formula(rng, n, rng.randint(1, 5))
        brute = any(evaluate(f, a) for a in itertools.product((False, True), repeat=10))
        cnf = to_cnf(f, 10)
        core = SatCore(cnf.num_vars)
        for c in cnf.clauses:
            core.add_clause(c)
        got = core.solve()
        assert got == brute
        if got:
            assert evaluate(f, tuple(core.model()[:10]))


def _truth_table_eval(f, a):
    # independent interpretation by structural recursion on the constructor list
    kind = type(f).__name__
    if kind == "Var":
        return a[f.index]
    if kind == "Const":
        return f.value
    if kind == "Not":
        return not _truth_table_eval(f.child, a)
    vals = [_truth_table_eval(c, a) for c in f.children]
    return min(vals) if kind == "And" else max(vals)


def test_evaluate_matches_truth_table():
    rng = random.Random(3)
    for _ in range(200):
        f = random_formula(rng, 6, 4)
        for a in itertools.product((False, True), repeat=10):
            if any(a[6:]):
                continue
            assert evaluate(f, a) == bool(_truth_table_eval(f, a))
