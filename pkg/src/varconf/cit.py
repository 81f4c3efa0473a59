"""Combinatorial interaction testing: t-way covering arrays and their metric scores."""

from __future__ import annotations

import csv
import io
import itertools
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from varconf.extract import PCMap
from varconf.formula import Assignment, evaluate
from varconf.metrics import CostFunction, weigh


class FormatError(ValueError):
    def __init__(self, msg, row=None, column=None):
        where = ""
        if row is not None:
            where = f"row {row}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + msg)
        self.row = row
        self.column = column


@dataclass
class CoveringArray:
    strength: int
    names: list
    rows: list


def import_array(path, names: Sequence[str], strength: int = 0) -> CoveringArray:
    """CSV with a header of variable names and rows of 0/1.

    Columns must name known variables; variables without a column are 0.
    """
    text = Path(path).read_text()
    return parse_array(text, names, strength)


def parse_array(text: str, names: Sequence[str], strength: int = 0) -> CoveringArray:
    reader = csv.reader(io.StringIO(text))
    rows_in = [r for r in reader if any(cell.strip() for cell in r)]
    if not rows_in:
        raise FormatError("missing header row")
    header = [h.strip() for h in rows_in[0]]
    index = {n: i for i, n in enumerate(names)}
    for col, h in enumerate(header, 1):
        if h not in index:
            raise FormatError(f"unknown variable {h!r}", row=1, column=col)
    if len(set(header)) != len(header):
        raise FormatError("duplicate column", row=1)
    rows = []
    for r, raw in enumerate(rows_in[1:], 2):
        if len(raw) != len(header):
            raise FormatError(f"expected {len(header)} values, got {len(raw)}", row=r)
        values = [False] * len(names)
        for col, (h, cell) in enumerate(zip(header, raw), 1):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise FormatError(f"value {cell!r} is not 0/1", row=r, column=col)
            values[index[h]] = cell == "1"
        rows.append(tuple(values))
    return CoveringArray(strength, list(names), rows)


def array_csv(arr: CoveringArray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(arr.names)
    for row in arr.rows:
        w.writerow([int(x) for x in row])
    return buf.getvalue()


def uncovered_tuples(n: int, t: int, rows) -> set:
    """(variable combination, value pattern) pairs no row exhibits."""
    missing = set()
    for combo in itertools.combinations(range(n), t):
        have = {tuple(row[v] for v in combo) for row in rows}
        for pattern in itertools.product((False, True), repeat=t):
            if pattern not in have:
                missing.add((combo, pattern))
    return missing


def generate_pairwise(names: Sequence[str], t: int = 2, rng_seed: int = 0,
                      candidates: int = 30) -> CoveringArray:
    """Greedy AETG-style t-way covering array.

    Each row is the best of ``candidates`` greedily completed rows, all
    seeded from an uncovered tuple, so every row covers at least one new
    tuple.  Coverage is verified before returning.
    """
    n = len(names)
    if t < 1 or n < t:
        raise ValueError(f"need 1 <= t <= number of variables (t={t}, n={n})")
    rng = random.Random(rng_seed)
    combos = list(itertools.combinations(range(n), t))
    by_var: list = [[] for _ in range(n)]
    for combo in combos:
        for v in combo:
            by_var[v].append(combo)
    uncovered = {combo: set(itertools.product((False, True), repeat=t)) for combo in combos}
    remaining = len(combos) * 2 ** t
    rows: list = []

    def gain(row, combo_list):
        return sum(1 for combo in combo_list
                   if tuple(row[v] for v in combo) in uncovered[combo])

    while remaining:
        open_tuples = sorted((c, p) for c, pats in uncovered.items() for p in pats)
        best_row, best_gain = None, -1
        for _ in range(candidates):
            combo, pattern = open_tuples[rng.randrange(len(open_tuples))]
            row: list = [None] * n
            for v, val in zip(combo, pattern):
                row[v] = val
            order = [v for v in range(n) if row[v] is None]
            rng.shuffle(order)
            for v in order:
                scores = []
                for val in (False, True):
                    row[v] = val
                    ready = [c for c in by_var[v] if all(row[u] is not None for u in c)]
                    scores.append(gain(row, ready))
                if scores[0] == scores[1]:
                    row[v] = rng.random() < 0.5
                else:
                    row[v] = scores[1] > scores[0]
            g = gain(row, combos)
            if g > best_gain:
                best_row, best_gain = tuple(row), g
        rows.append(best_row)
        for combo in combos:
            pat = tuple(best_row[v] for v in combo)
            if pat in uncovered[combo]:
                uncovered[combo].discard(pat)
                remaining -= 1
    assert not uncovered_tuples(n, t, rows)
    return CoveringArray(t, list(names), rows)


@dataclass
class ArrayScore:
    rows: list               # (row index, score), 0-based
    best_score: int
    best_step: int           # 1-based index of the first row reaching best_score
    fm_violations: int


def score_array(arr: CoveringArray, pcmap: PCMap, c: CostFunction) -> ArrayScore:
    weights = weigh(pcmap, c).weights
    scored = []
    violations = 0
    for k, row in enumerate(arr.rows):
        if not evaluate(pcmap.feature_model, row):
            violations += 1
        s = sum(w for e, w in zip(pcmap.entries, weights) if w > 0 and evaluate(e.pc, row))
        scored.append((k, s))
    if not scored:
        return ArrayScore([], 0, 0, 0)
    best = max(s for _, s in scored)
    step = next(k for k, s in scored if s == best) + 1
    return ArrayScore(scored, best, step, violations)
