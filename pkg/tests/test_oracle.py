import pytest

from varconf.formula import TRUE, VarTable, parse_formula
from varconf.metrics import LCU_COST, weigh
from varconf.oracle import (TooLarge, brute_maxsat, brute_min_cover, brute_sat,
                            covers_all_tuples, reference_pc_walk)
from varconf.solver import HardUnsat

from conftest import NESTED, REPEATED


def soft_for(pcmap, c):
    return [(e.pc, w) for e, w in zip(pcmap.entries, weigh(pcmap, c).weights) if w > 0]


def test_brute_maxsat_examples(rep_map, rep_free):
    best, _ = brute_maxsat([], soft_for(rep_map, LCU_COST), 3)
    assert best == 3
    best, optimal = brute_maxsat([], soft_for(rep_map, rep_free), 3)
    assert best == 2 and (True, False, True) in optimal
    vt = VarTable(["a"])
    with pytest.raises(HardUnsat):
        brute_maxsat([parse_formula("a && !a", vt)], [], 1)


def test_too_large():
    with pytest.raises(TooLarge):
        brute_sat([], 21)


def test_brute_min_cover(rep_map, rep_free, nested_map):
    assert brute_min_cover(rep_map, LCU_COST) == 2
    assert brute_min_cover(rep_map, rep_free) == 1
    from varconf.extract import PCMap, PCEntry, CodeUnit
    vt = VarTable(["C1"])
    one = PCMap([PCEntry(vt["C1"], [CodeUnit("f", (1,))])], vt)
    assert brute_min_cover(one, LCU_COST) == 1
    # C2&&C1 and C2&&!C1 exclude each other
    assert brute_min_cover(nested_map, LCU_COST) == 2


def test_reference_walk():
    vt = VarTable()
    ref = reference_pc_walk(NESTED, vt)
    from varconf.formula import semantically_equal
    assert semantically_equal(ref[8], parse_formula("C2 && C1", vt))
    assert ref[4] == TRUE
    ref_b = reference_pc_walk(REPEATED, vt)
    assert semantically_equal(ref_b[10], parse_formula("!C5 && C6", vt))
    assert reference_pc_walk("x\n#if A\ny\n#endif\n")[1] == TRUE


def test_reference_walk_errors():
    with pytest.raises(ValueError):
        reference_pc_walk("#if A\nx\n")
    with pytest.raises(ValueError):
        reference_pc_walk("#endif\n")


def test_covers_all_tuples():
    rows = [(False, False), (True, True)]
    assert not covers_all_tuples(rows, 2, 2)
    assert covers_all_tuples(rows, 2, 1)
