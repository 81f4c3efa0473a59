"""Code metrics: per-location costs, presence-condition weights and CCU."""

from __future__ import annotations

import json
import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from varconf.extract import PCMap, SourceLocation, logical_lines
from varconf.formula import Assignment, evaluate

LCU = "lcu"
ABSOLUTE = "absolute"
LINES = "lines"


@dataclass(frozen=True)
class CostFunction:
    kind: str
    costs: dict = field(default_factory=dict, compare=False, hash=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in (LCU, ABSOLUTE, LINES):
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if any(c < 0 for c in self.costs.values()):
            raise ValueError("line costs must be nonnegative")

    def cost(self, loc: SourceLocation) -> int:
        return self.costs.get(loc, 0)

    @property
    def is_lcu(self) -> bool:
        return self.kind == LCU


LCU_COST = CostFunction(LCU, label="lcu")
ABSOLUTE_COST = CostFunction(ABSOLUTE, label="absolute")


def line_costs(costs: dict, label: str = "costs") -> CostFunction:
    return CostFunction(LINES, dict(costs), label)


@dataclass
class MetricReport:
    weights: list

    @property
    def total(self) -> int:
        return sum(self.weights)

    def nonzero(self) -> list:
        return [i for i, w in enumerate(self.weights) if w > 0]


def entry_weight(entry, c: CostFunction) -> int:
    if c.kind == LCU:
        return entry.lcu_weight
    if c.kind == ABSOLUTE:
        return entry.absolute_weight
    return sum(c.cost(loc) for loc in entry.locations())


def weigh(pcmap: PCMap, c: CostFunction) -> MetricReport:
    return MetricReport([entry_weight(e, c) for e in pcmap.entries])


class NoConfigurableUnits(ZeroDivisionError):
    pass


def ccu(pcmap: PCMap, confs: Sequence[Assignment]) -> Fraction:
    """Fraction of logical code units enabled by at least one configuration."""
    total = pcmap.total_units
    if total == 0:
        raise NoConfigurableUnits("no configurable units")
    covered = sum(e.lcu_weight for e in pcmap.entries
                  if any(evaluate(e.pc, a) for a in confs))
    return Fraction(covered, total)


# -- line-cost files -------------------------------------------------------------

def load_line_costs(path) -> CostFunction:
    """Read ``{"file:line": cost}`` JSON."""
    raw = json.loads(Path(path).read_text())
    costs = {}
    for key, cost in raw.items():
        file, sep, line = key.rpartition(":")
        if not sep or not line.isdigit():
            raise ValueError(f"bad location key {key!r}")
        if not isinstance(cost, int) or cost < 0:
            raise ValueError(f"bad cost for {key!r}: {cost!r}")
        costs[SourceLocation(file, int(line))] = cost
    return line_costs(costs, f"costs:{path}")


def dump_line_costs(c: CostFunction) -> str:
    doc = {f"{loc.file}:{loc.line}": v for loc, v in sorted(c.costs.items()) if v}
    return json.dumps(doc, indent=2) + "\n"


# -- call-graph based free metrics ----------------------------------------------

_TOKEN = re.compile(
    r'"(?:\\.|[^"\\\n])*"|\'(?:\\.|[^\'\\\n])*\'|[A-Za-z_][A-Za-z0-9_]*|\d[\w.]*|\S')
_KEYWORDS = {
    "if", "while", "for", "switch", "return", "sizeof", "do", "else", "case",
    "goto", "typeof", "__typeof__", "alignof", "_Alignof", "__attribute__",
    "__asm__", "asm", "defined", "_Generic", "__builtin_offsetof", "offsetof",
}
_TYPE_WORDS = {
    "void", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "struct", "union", "enum", "const", "volatile", "static",
    "extern", "inline", "register", "_Bool", "bool", "size_t", "ssize_t",
    "FAST_FUNC", "NOINLINE", "ALWAYS_INLINE",
}


def _tokens(text: str):
    """(token, line) pairs with comments, string literals and directives removed."""
    out = []
    in_comment = False
    for lineno, line, is_directive in logical_lines(text):
        if is_directive and not in_comment:
            continue
        pos = 0
        while pos < len(line):
            if in_comment:
                end = line.find("*/", pos)
                if end < 0:
                    break
                in_comment = False
                pos = end + 2
                continue
            m = _TOKEN.search(line, pos)
            if m is None:
                break
            tok = m.group()
            if tok == "/" and line.startswith("//", m.start()):
                break
            if tok == "/" and line.startswith("/*", m.start()):
                in_comment = True
                pos = m.start() + 2
                continue
            pos = m.end()
            if tok[0] in "\"'":
                continue
            out.append((tok, lineno))
    return out


@dataclass
class CallGraph:
    edges: dict       # caller -> set of callees
    sites: list       # (file, line, callee)


def build_call_graph(sources: Iterable) -> CallGraph:
    """Heuristic token-level call graph.

    A definition is ``name ( ... ) {`` at brace depth 0; a call is
    ``name (`` that is not a keyword, not directly preceded by a type word
    and not a definition.  Function pointers and macros are not resolved.
    """
    edges: dict = defaultdict(set)
    sites: list = []
    for path in sources:
        path = str(path)
        toks = _tokens(Path(path).read_text(errors="replace"))
        depth = 0
        current = None
        i = 0
        n = len(toks)
        while i < n:
            tok, line = toks[i]
            if tok == "{":
                depth += 1
            elif tok == "}":
                depth = max(0, depth - 1)
                if depth == 0:
                    current = None
            elif (tok[0].isalpha() or tok[0] == "_") and i + 1 < n and toks[i + 1][0] == "(":
                close = _match_paren(toks, i + 1)
                after = toks[close + 1][0] if close + 1 < n else ""
                if depth == 0 and after == "{":
                    current = tok
                    i = close + 1
                    continue
                prev = toks[i - 1][0] if i > 0 else ""
                if (tok not in _KEYWORDS and tok not in _TYPE_WORDS
                        and prev not in _TYPE_WORDS and prev not in (".", "->")):
                    if depth > 0 or current is not None:
                        sites.append((path, line, tok))
                        if current is not None:
                            edges[current].add(tok)
                    elif prev != "*" and not _is_word(prev):
                        # top-level statement (snippet files); a declaration
                        # would have a type name before it
                        sites.append((path, line, tok))
            i += 1
    return CallGraph(dict(edges), sites)


def _is_word(tok: str) -> bool:
    return bool(tok) and (tok[0].isalpha() or tok[0] == "_")


def _match_paren(toks, i):
    depth = 0
    for j in range(i, len(toks)):
        t = toks[j][0]
        if t == "(":
            depth += 1
        elif t == ")":
            depth -= 1
            if depth == 0:
                return j
    return len(toks) - 1


def sink_distance(graph: CallGraph, sinks: set) -> dict:
    """Fewest call edges from each function to a sink (sinks are at 0)."""
    reverse: dict = defaultdict(set)
    for caller, callees in graph.edges.items():
        for callee in callees:
            reverse[callee].add(caller)
    dist = {s: 0 for s in sinks}
    queue = deque(sinks)
    while queue:
        f = queue.popleft()
        for caller in reverse.get(f, ()):
            if caller not in dist:
                dist[caller] = dist[f] + 1
                queue.append(caller)
    return dist


def kl_free_costs(sources: Iterable, k: int = 1, sink_names=("free",)) -> CostFunction:
    """Per-line count of calls that reach a sink through at most ``k - 1`` call edges."""
    if k < 1:
        raise ValueError("k must be >= 1")
    sinks = set(sink_names)
    if not sinks:
        raise ValueError("need at least one sink name")
    graph = build_call_graph(sources)
    dist = sink_distance(graph, sinks)
    costs: dict = defaultdict(int)
    for file, line, callee in graph.sites:
        d = dist.get(callee)
        if d is not None and d <= k - 1:
            costs[SourceLocation(file, line)] += 1
    return line_costs(dict(costs), f"free:{k}")
