import random
import textwrap
from fractions import Fraction

import pytest

from varconf.extract import PCMap, SourceLocation
from varconf.formula import VarTable
from varconf.metrics import (ABSOLUTE_COST, LCU_COST, NoConfigurableUnits, build_call_graph,
                             ccu, dump_line_costs, kl_free_costs, line_costs,
                             load_line_costs, weigh)

from conftest import NESTED, REPEATED, conf


def test_weigh_lcu_and_absolute(rep_map):
    assert weigh(rep_map, LCU_COST).weights == [1, 2, 1]
    assert weigh(rep_map, ABSOLUTE_COST).weights == [1, 3, 1]
    assert weigh(rep_map, LCU_COST).total == 4


def test_weigh_free(rep_map, rep_free):
    f = str(REPEATED)
    assert rep_free.costs == {SourceLocation(f, 2): 1, SourceLocation(f, 10): 1}
    rep = weigh(rep_map, rep_free)
    assert rep.weights == [1, 0, 1]
    assert rep.nonzero() == [0, 2]


def test_nested_free(nested_map, nested_free):
    f = str(NESTED)
    assert nested_free.costs == {SourceLocation(f, n): 1 for n in (2, 7, 11)}
    assert weigh(nested_map, nested_free).weights == [1, 1, 1]


def test_empty_map():
    rep = weigh(PCMap([], VarTable()), LCU_COST)
    assert rep.weights == [] and rep.total == 0
    with pytest.raises(NoConfigurableUnits):
        ccu(PCMap([], VarTable()), [()])


def test_negative_cost_rejected():
    with pytest.raises(ValueError):
        line_costs({SourceLocation("a", 1): -1})


def test_ccu_examples(rep_map):
    assert ccu(rep_map, [conf(rep_map, C4=1)]) == Fraction(1, 4)
    assert ccu(rep_map, [conf(rep_map, C5=1)]) == Fraction(3, 4)
    assert ccu(rep_map, [conf(rep_map, C5=1), conf(rep_map, C4=1, C6=1)]) == 1
    assert ccu(rep_map, []) == 0


def test_ccu_monotone(rep_map):
    rng = random.Random(5)
    for _ in range(50):
        confs = []
        prev = Fraction(0)
        for _ in range(5):
            confs.append(tuple(rng.random() < 0.5 for _ in range(3)))
            cur = ccu(rep_map, confs)
            assert cur >= prev
            prev = cur


CHAIN = """\
void g(void *p)
{
    free(p);
}

static void h(void *p) {
    g(p);
}

int main(void)
{
    char *a = malloc(4);
    h(a);
    g(a);
    free(a); free(a);
    puts("free(a)"); /* free(b) */
    return 0;
}
"""


def test_indirection_depth(tmp_path):
    src = tmp_path / "chain.c"
    src.write_text(CHAIN)
    loc = lambda n: SourceLocation(str(src), n)
    k1 = kl_free_costs([src], 1).costs
    assert k1 == {loc(3): 1, loc(15): 2}
    k2 = kl_free_costs([src], 2).costs
    assert k2 == {loc(3): 1, loc(7): 1, loc(14): 1, loc(15): 2}
    k3 = kl_free_costs([src], 3).costs
    assert k3 == {**k2, loc(13): 1}


def test_one_level_wrapper(tmp_path):
    src = tmp_path / "w.c"
    lines = ["void g(void *p) { free(p); }"] + ["/* */"] * 18 + ["void f(void) { g(0); }"]
    src.write_text("\n".join(lines) + "\n")
    assert SourceLocation(str(src), 20) not in kl_free_costs([src], 1).costs
    assert kl_free_costs([src], 2).costs[SourceLocation(str(src), 20)] == 1


def test_no_sinks(tmp_path):
    src = tmp_path / "n.c"
    src.write_text("int f(int x) { return g(x); }\n")
    assert kl_free_costs([src], 3).costs == {}


def test_declarations_are_not_calls(tmp_path):
    src = tmp_path / "d.c"
    src.write_text("void free(void *);\nextern void *xfree(void *p);\nint (*fp)(void*) = free;\n")
    g = build_call_graph([src])
    assert g.sites == []


def test_custom_sink_names(tmp_path):
    src = tmp_path / "s.c"
    src.write_text("void f(void) {\n  release(x);\n  free(y);\n}\n")
    costs = kl_free_costs([src], 1, sink_names=("release",)).costs
    assert costs == {SourceLocation(str(src), 2): 1}
    with pytest.raises(ValueError):
        kl_free_costs([src], 0)


def test_monotone_in_k(tmp_path):
    rng = random.Random(9)
    for trial in range(20):
        names = [f"f{i}" for i in range(6)]
        body = []
        for n in names:
            calls = rng.sample(names + ["free", "free"], rng.randint(0, 3))
            body.append(f"void {n}(void) {{\n" + "".join(f"  {c}(0);\n" for c in calls) + "}\n")
        src = tmp_path / f"r{trial}.c"
        src.write_text("".join(body))
        prev = {}
        for k in range(1, 6):
            cur = kl_free_costs([src], k).costs
            assert all(cur.get(loc, 0) >= v for loc, v in prev.items())
            prev = cur


def test_line_cost_file_round_trip(tmp_path, rep_map, rep_free):
    path = tmp_path / "costs.json"
    path.write_text(dump_line_costs(rep_free))
    back = load_line_costs(path)
    assert back.costs == rep_free.costs
    assert weigh(rep_map, back).weights == [1, 0, 1]
    bad = tmp_path / "bad.json"
    bad.write_text('{"nofile": 1}')
    with pytest.raises(ValueError):
        load_line_costs(bad)
    bad.write_text('{"a.c:1": -2}')
    with pytest.raises(ValueError):
        load_line_costs(bad)


def test_braces_in_preprocessor_branches(tmp_path):
    src = tmp_path / "b.c"
    src.write_text(textwrap.dedent("""\
        void f(void)
        #if A
        {
        #else
        {
        #endif
            free(p);
        }
        """))
    assert kl_free_costs([src], 1).costs == {SourceLocation(str(src), 7): 1}
