import itertools
from math import comb

import pytest

from varconf.cit import (CoveringArray, FormatError, array_csv, generate_pairwise,
                         import_array, parse_array, score_array, uncovered_tuples)
from varconf.metrics import LCU_COST

NAMES3 = ["C4", "C5", "C6"]


def exhaustive_cover(rows, n, t):
    # independent of uncovered_tuples: count distinct patterns per combination
    for combo in itertools.combinations(range(n), t):
        if len({tuple(r[v] for v in combo) for r in rows}) != 2 ** t:
            return False
    return True


def test_import_row(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("C4,C5,C6\n1,0,1\n")
    arr = import_array(p, NAMES3)
    assert arr.rows == [(True, False, True)]


def test_import_partial_columns():
    arr = parse_array("C6, C4\n1,1\n", NAMES3)
    assert arr.rows == [(True, False, True)]


@pytest.mark.parametrize("text, row, column", [
    ("C4,C5,C6\n1,2,0\n", 2, 2),
    ("C4,X\n1,0\n", 1, 2),
    ("C4,C5\n1\n", 2, None),
    ("", None, None),
])
def test_import_errors(text, row, column):
    with pytest.raises(FormatError) as exc:
        parse_array(text, NAMES3)
    assert (exc.value.row, exc.value.column) == (row, column)


def test_small_arrays():
    arr = generate_pairwise(NAMES3, 2)
    assert len(arr.rows) <= 6
    assert exhaustive_cover(arr.rows, 3, 2)
    two = generate_pairwise(["A", "B"], 2)
    assert sorted(two.rows) == sorted(itertools.product((False, True), repeat=2))


@pytest.mark.parametrize("n", range(6, 13))
@pytest.mark.parametrize("t", [2, 3])
def test_generated_arrays_cover(n, t):
    names = [f"V{i}" for i in range(n)]
    arr = generate_pairwise(names, t, rng_seed=n)
    assert exhaustive_cover(arr.rows, n, t)
    assert not uncovered_tuples(n, t, arr.rows)
    assert 2 ** t <= len(arr.rows) <= 2 ** t * comb(n, t)


def test_generation_is_seeded():
    names = [f"V{i}" for i in range(8)]
    assert generate_pairwise(names, 2, 4).rows == generate_pairwise(names, 2, 4).rows


def test_bad_strength():
    with pytest.raises(ValueError):
        generate_pairwise(["A"], 2)


def test_csv_round_trip():
    arr = generate_pairwise(NAMES3, 2)
    assert parse_array(array_csv(arr), NAMES3).rows == arr.rows


def test_score_array(rep_map, rep_free):
    arr = CoveringArray(2, NAMES3, [(False, False, False), (False, True, False)])
    sc = score_array(arr, rep_map, LCU_COST)
    assert sc.rows == [(0, 0), (1, 3)]
    assert (sc.best_score, sc.best_step) == (3, 2)
    assert score_array(arr, rep_map, LCU_COST) == sc
    one = CoveringArray(2, NAMES3, [(False, False, False)])
    assert (score_array(one, rep_map, LCU_COST).best_score,
            score_array(one, rep_map, LCU_COST).best_step) == (0, 1)
    free = CoveringArray(2, NAMES3, [(True, False, True)])
    s = score_array(free, rep_map, rep_free)
    assert (s.best_score, s.best_step) == (2, 1)


def test_feature_model_violations(rep_map):
    from varconf.formula import parse_formula
    rep_map.feature_model = parse_formula("!C4", rep_map.vars)
    arr = CoveringArray(2, NAMES3, [(True, False, False), (False, True, False)])
    assert score_array(arr, rep_map, LCU_COST).fm_violations == 1
