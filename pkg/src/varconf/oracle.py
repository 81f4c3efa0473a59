"""Brute-force references for small inputs.

Nothing here touches the SAT core, the Tseitin encoder or the line
scanner.  Exhaustive search runs on bit-parallel truth tables; only the
formula classes, the parser and (for the cover helpers)
:func:`varconf.formula.evaluate` are shared with the code under check.
"""

from __future__ import annotations

import itertools
import re
from pathlib import Path
from typing import Sequence

from varconf.formula import TRUE, And, Formula, Not, VarTable, evaluate, parse_formula
from varconf.solver import HardUnsat

MAX_BRUTE_VARS = 20
MAX_COVER_VARS = 12
MAX_COVER_ENTRIES = 12


class TooLarge(ValueError):
    pass


def all_assignments(n: int):
    return itertools.product((False, True), repeat=n)


def truth_table(f: Formula, n: int) -> int:
    """Bit ``k`` is the value of ``f`` under the ``k``-th assignment of
    :func:`all_assignments` (variable 0 is the most significant)."""
    size = 1 << n
    full = (1 << size) - 1
    cache: dict = {}

    def var_table(i):
        # blocks of 2**(n-1-i) zeros then ones, repeated
        run = 1 << (n - 1 - i)
        block = ((1 << run) - 1) << run
        period = 2 * run
        t = 0
        for start in range(0, size, period):
            t |= block << start
        return t

    def go(g):
        kind = type(g).__name__
        if kind == "Const":
            return full if g.value else 0
        if kind == "Var":
            if g.index >= n:
                raise ValueError(f"variable {g.name} outside the first {n}")
            if g.index not in cache:
                cache[g.index] = var_table(g.index)
            return cache[g.index]
        if kind == "Not":
            return full ^ go(g.child)
        vals = [go(c) for c in g.children]
        out = full if kind == "And" else 0
        for v in vals:
            out = out & v if kind == "And" else out | v
        return out

    return go(f)


def _bits(table: int, n: int):
    size = 1 << n
    text = format(table, f"0{size}b")[::-1]
    return [k for k, ch in enumerate(text) if ch == "1"]


def _assignment(k: int, n: int) -> tuple:
    return tuple(bool((k >> (n - 1 - i)) & 1) for i in range(n))


def brute_sat(hard: Sequence[Formula], n: int) -> list:
    """Every model of the conjunction, in lexicographic order (False < True)."""
    if n > MAX_BRUTE_VARS:
        raise TooLarge(f"{n} variables > {MAX_BRUTE_VARS}")
    table = (1 << (1 << n)) - 1
    for f in hard:
        table &= truth_table(f, n)
    return [_assignment(k, n) for k in _bits(table, n)]


def brute_maxsat(hard: Sequence[Formula], soft: Sequence, n: int):
    """(best weight, all optimal assignments); ``soft`` holds (formula, weight) pairs
    or objects with ``formula``/``weight`` attributes."""
    if n > MAX_BRUTE_VARS:
        raise TooLarge(f"{n} variables > {MAX_BRUTE_VARS}")
    pairs = [(s.formula, s.weight) if hasattr(s, "formula") else tuple(s) for s in soft]
    allowed = (1 << (1 << n)) - 1
    for f in hard:
        allowed &= truth_table(f, n)
    if not allowed:
        raise HardUnsat("hard constraints are unsatisfiable")
    score = [0] * (1 << n)
    for f, w in pairs:
        for k in _bits(truth_table(f, n), n):
            score[k] += w
    models = _bits(allowed, n)
    best = max(score[k] for k in models)
    return best, [_assignment(k, n) for k in models if score[k] == best]


def brute_min_cover(pcmap, c) -> int:
    """Fewest configurations that together enable every nonzero-weight entry."""
    from varconf.metrics import entry_weight

    n = len(pcmap.vars)
    if n > MAX_COVER_VARS or len(pcmap.entries) > MAX_COVER_ENTRIES:
        raise TooLarge("instance too large for exact minimum cover")
    targets = frozenset(i for i, e in enumerate(pcmap.entries) if entry_weight(e, c) > 0)
    if not targets:
        return 0
    sets = set()
    for a in brute_sat([pcmap.feature_model], n):
        sets.add(frozenset(i for i in targets if evaluate(pcmap.entries[i].pc, a)))
    # only inclusion-maximal sets matter
    maximal = [s for s in sets if s and not any(s < o for o in sets)]
    if frozenset().union(*maximal) != targets:
        raise HardUnsat("some nonzero-weight entries cannot be enabled")
    for k in range(1, len(maximal) + 1):
        for pick in itertools.combinations(maximal, k):
            if frozenset().union(*pick) == targets:
                return k
    raise AssertionError("unreachable")


def brute_max_weight(pcmap, weights, candidates) -> int:
    """Best total weight over ``candidates`` entries among feature-model models."""
    best = -1
    for a in brute_sat([pcmap.feature_model], len(pcmap.vars)):
        best = max(best, sum(weights[i] for i in candidates
                             if evaluate(pcmap.entries[i].pc, a)))
    return best


def covers_all_tuples(rows, n: int, t: int) -> bool:
    for combo in itertools.combinations(range(n), t):
        seen = {tuple(r[v] for v in combo) for r in rows}
        if len(seen) < 2 ** t:
            return False
    return True


# -- reference presence-condition walker ------------------------------------------

_DIR = re.compile(r"^\s*#\s*(if|ifdef|ifndef|elif|else|endif)\b(.*)$")


class _Branch:
    def __init__(self, kind, expr):
        self.kind = kind
        self.expr = expr
        self.body = []        # ints (line numbers) and _IfNode


class _IfNode:
    def __init__(self):
        self.branches = []


def _build_tree(lines):
    """Recursive descent over directive lines; returns (top-level body, next index)."""

    def parse_body(i, stop_kinds):
        body = []
        while i < len(lines):
            no, text = lines[i]
            m = _DIR.match(text)
            if m is None:
                body.append(no)
                i += 1
                continue
            kind = m.group(1)
            if kind in stop_kinds:
                return body, i
            if kind in ("if", "ifdef", "ifndef"):
                node, i = parse_if(i)
                body.append(node)
                continue
            raise ValueError(f"line {no}: unexpected #{kind}")
        if stop_kinds:
            raise ValueError("missing #endif")
        return body, i

    def parse_if(i):
        node = _IfNode()
        no, text = lines[i]
        m = _DIR.match(text)
        branch = _Branch(m.group(1), m.group(2))
        i += 1
        while True:
            branch.body, i = parse_body(i, {"elif", "else", "endif"})
            node.branches.append(branch)
            if i >= len(lines):
                raise ValueError("missing #endif")
            m = _DIR.match(lines[i][1])
            kind = m.group(1)
            i += 1
            if kind == "endif":
                return node, i
            if node.branches[-1].kind == "else":
                raise ValueError("branch after #else")
            branch = _Branch(kind, m.group(2))

    body, _ = parse_body(0, set())
    return body


def _condition(branch, vars):
    expr = re.sub(r"/\*.*?\*/|//.*$", " ", branch.expr).strip()
    if branch.kind == "ifdef":
        return vars.intern(expr)
    if branch.kind == "ifndef":
        return Not(vars.intern(expr))
    return parse_formula(expr, vars, preprocessor=True)


def reference_pc_walk(source, vars: VarTable | None = None) -> dict:
    """Line number -> governing presence condition for every non-directive line.

    ``source`` is a path or the file text.  Conditions are built without
    simplification: a branch's condition is the parent condition, the
    negations of all earlier siblings and its own test, joined by ``And``.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = source
    vars = VarTable() if vars is None else vars
    phys = text.splitlines()
    lines = []
    i = 0
    while i < len(phys):
        line, start = phys[i], i + 1
        if line.lstrip().startswith("#"):
            while line.endswith("\\") and i + 1 < len(phys):
                i += 1
                line = line[:-1] + " " + phys[i]
        lines.append((start, line))
        i += 1
    tree = _build_tree(lines)
    out: dict = {}

    def walk(body, pc):
        for item in body:
            if isinstance(item, int):
                out[item] = pc
                continue
            earlier = []
            for br in item.branches:
                parts = [] if pc is TRUE else [pc]
                parts += [Not(c) for c in earlier]
                if br.kind != "else":
                    cond = _condition(br, vars)
                    parts.append(cond)
                    earlier.append(cond)
                walk(br.body, And(tuple(parts)) if parts else TRUE)

    walk(tree, TRUE)
    return out
