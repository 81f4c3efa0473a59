"""Presence-condition extraction from preprocessor-conditional sources.

The scanner is line oriented.  Every body line inside a conditional region
is attributed to the conjunction of its enclosing branch conditions; a
maximal run of body lines between two conditional directives forms one
logical code unit.  Units governed by a literally-true condition are not
configurable and are dropped.
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from varconf.formula import (FALSE, TRUE, Assignment, Formula,
                             FormulaSyntaxError, UnsupportedExpression,
                             VarTable, conj, evaluate, negate, normal_key,
                             parse_formula, semantically_equal, to_text)
from varconf.solver import sat

log = logging.getLogger(__name__)

SOURCE_SUFFIXES = (".c", ".h", ".cc", ".cpp", ".hpp", ".hh", ".cxx")


class ExtractError(Exception):
    def __init__(self, msg: str, file: str = "", line: int = 0):
        where = f"{file}:{line}: " if file else ""
        super().__init__(where + msg)
        self.file = file
        self.line = line


class UnbalancedDirective(ExtractError):
    pass


class UnsupportedDirectiveExpression(ExtractError):
    pass


@dataclass(frozen=True, order=True)
class SourceLocation:
    file: str
    line: int


@dataclass(frozen=True, order=True)
class CodeUnit:
    file: str
    lines: tuple

    @property
    def locations(self):
        return tuple(SourceLocation(self.file, n) for n in self.lines)


@dataclass(frozen=True)
class PCInstance:
    pc: Formula
    unit: CodeUnit


@dataclass
class PCEntry:
    pc: Formula
    units: list

    @property
    def lcu_weight(self) -> int:
        return len(self.units)

    @property
    def absolute_weight(self) -> int:
        return sum(len(u.lines) for u in self.units)

    def locations(self):
        for u in self.units:
            yield from u.locations


@dataclass
class PCMap:
    entries: list
    vars: VarTable
    feature_model: Formula = TRUE
    files: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    @property
    def total_units(self) -> int:
        return sum(e.lcu_weight for e in self.entries)


# -- scanning -------------------------------------------------------------------

_DIRECTIVE = re.compile(r"\s*#\s*([A-Za-z_]+)\b(.*)$", re.S)
_COND = {"if", "ifdef", "ifndef", "elif", "elifdef", "elifndef", "else", "endif"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def strip_comments(text: str) -> str:
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    text = re.sub(r"/\*.*$", " ", text, flags=re.S)
    return re.sub(r"//.*$", "", text)


def logical_lines(text: str):
    """Yield ``(first_line_no, text, is_directive)``; directive continuations are joined."""
    phys = text.splitlines()
    i = 0
    while i < len(phys):
        line = phys[i]
        start = i + 1
        if line.lstrip().startswith("#"):
            while line.endswith("\\") and i + 1 < len(phys):
                i += 1
                line = line[:-1] + " " + phys[i]
            yield start, line, True
        else:
            yield start, line, False
        i += 1


def parse_condition(kind: str, expr: str, vars: VarTable, where=("", 0)) -> Formula:
    """Condition of an ``#if``-family directive as a formula."""
    expr = strip_comments(expr).strip()
    try:
        if kind in ("ifdef", "ifndef", "elifdef", "elifndef"):
            if not _IDENT.match(expr):
                raise UnbalancedDirective(f"#{kind} needs one identifier", *where)
            f = vars.intern(expr)
            return negate(f) if kind.endswith("ndef") else f
        if not expr:
            raise UnbalancedDirective(f"#{kind} without a condition", *where)
        return parse_formula(expr, vars, preprocessor=True)
    except UnsupportedExpression as exc:
        raise UnsupportedDirectiveExpression(str(exc), *where) from exc
    except FormulaSyntaxError as exc:
        raise UnsupportedDirectiveExpression(f"cannot parse {expr!r}: {exc.msg}",
                                             *where) from exc


class _Frame:
    __slots__ = ("parent", "prior", "pc", "has_else", "line")

    def __init__(self, parent, prior, pc, line):
        self.parent = parent
        self.prior = prior
        self.pc = pc
        self.has_else = False
        self.line = line


def scan_text(text: str, vars: VarTable, file: str = "<string>") -> list:
    """PC instances of ``text`` in source order (see :func:`scan_file`)."""
    out: list = []
    stack: list[_Frame] = []
    block: list[int] = []

    def flush():
        if block and stack:
            pc = stack[-1].pc
            if pc != TRUE:
                out.append(PCInstance(pc, CodeUnit(file, tuple(block))))
        block.clear()

    for lineno, line, is_directive in logical_lines(text):
        if is_directive:
            m = _DIRECTIVE.match(line)
            kind = m.group(1) if m else ""
            if kind in _COND:
                flush()
                rest = m.group(2)
                where = (file, lineno)
                if kind in ("if", "ifdef", "ifndef"):
                    cond = parse_condition(kind, rest, vars, where)
                    parent = stack[-1].pc if stack else TRUE
                    stack.append(_Frame(parent, [cond], conj(parent, cond), lineno))
                    continue
                if not stack:
                    raise UnbalancedDirective(f"#{kind} without matching #if", *where)
                top = stack[-1]
                if kind == "endif":
                    stack.pop()
                    continue
                if top.has_else:
                    raise UnbalancedDirective(f"#{kind} after #else", *where)
                negs = [negate(c) for c in top.prior]
                if kind == "else":
                    top.has_else = True
                    top.pc = conj(top.parent, *negs)
                else:
                    cond = parse_condition(kind[2:] if kind != "elif" else "if",
                                           rest, vars, where)
                    top.pc = conj(top.parent, *negs, cond)
                    top.prior.append(cond)
                continue
        if not stack or not line.strip():
            continue
        block.append(lineno)
    if stack:
        raise UnbalancedDirective("missing #endif", file, stack[-1].line)
    return out


def scan_file(path, vars: VarTable) -> list:
    """PC instances of one source file.

    Raises :class:`UnbalancedDirective` for a missing ``#endif`` or a stray
    ``#else``/``#elif``/``#endif`` and :class:`UnsupportedDirectiveExpression`
    for non-boolean ``#if`` arithmetic.
    """
    path = str(path)
    text = Path(path).read_text(errors="replace")
    return scan_text(text, vars, path)


def collect_sources(paths: Iterable) -> list:
    """Expand directories into their C/C++ sources, sorted; files pass through."""
    out = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            out.extend(str(q) for q in sorted(p.rglob("*"))
                       if q.is_file() and q.suffix in SOURCE_SUFFIXES)
        else:
            out.append(str(p))
    return out


# -- merging -------------------------------------------------------------------

_N_PROBES = 64


def _fingerprint(f: Formula, probes) -> int:
    fp = 0
    for k, a in enumerate(probes):
        if evaluate(f, a):
            fp |= 1 << k
    return fp


def build_pcmap(instances: Sequence[PCInstance], vars: VarTable,
                feature_model: Formula = TRUE, files: Sequence[str] = ()) -> PCMap:
    """Merge semantically equal PCs and drop those dead under the feature model.

    Candidates for merging are bucketed by their truth values on a fixed set
    of pseudo-random assignments (equal formulas agree on every probe);
    within a bucket equality is decided by SAT.
    """
    n = len(vars)
    rng = random.Random(0x5EED)
    probes = [tuple(rng.random() < 0.5 for _ in range(n)) for _ in range(_N_PROBES)]
    entries: list[PCEntry] = []
    by_key: dict = {}
    buckets: dict[int, list[int]] = {}
    for inst in instances:
        key = normal_key(inst.pc)
        idx = by_key.get(key)
        if idx is None:
            fp = _fingerprint(inst.pc, probes)
            for j in buckets.get(fp, ()):
                if semantically_equal(entries[j].pc, inst.pc):
                    idx = j
                    break
            if idx is None:
                idx = len(entries)
                entries.append(PCEntry(inst.pc, []))
                buckets.setdefault(fp, []).append(idx)
            by_key[key] = idx
        entries[idx].units.append(inst.unit)
    live = []
    for e in entries:
        if e.pc == FALSE or sat([e.pc, feature_model], n) is None:
            log.debug("dropping dead presence condition %s", to_text(e.pc))
            continue
        live.append(e)
    return PCMap(live, vars, feature_model, list(files))


def load_feature_model(path, vars: VarTable) -> Formula:
    """Conjunction of the formulas in ``path``, one per line (``#`` starts a comment)."""
    parts = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts.append(parse_formula(line, vars))
    return conj(*parts)


def extract(sources: Iterable, feature_model_path=None) -> PCMap:
    """Scan ``sources`` (files or directories) and build the PC map."""
    files = collect_sources(sources)
    vars = VarTable()
    instances = []
    for f in files:
        instances.extend(scan_file(f, vars))
    fm = TRUE if feature_model_path is None else load_feature_model(feature_model_path, vars)
    return build_pcmap(instances, vars.freeze(), fm, files)


def enabled_pcs(pcmap: PCMap, conf: Assignment) -> set:
    return {i for i, e in enumerate(pcmap.entries) if evaluate(e.pc, conf)}


# -- manifest ------------------------------------------------------------------

def manifest_dict(pcmap: PCMap) -> dict:
    return {
        "vars": pcmap.vars.names,
        "feature_model": to_text(pcmap.feature_model),
        "files": list(pcmap.files),
        "entries": [
            {
                "pc": to_text(e.pc),
                "units": [{"file": u.file, "lines": list(u.lines)} for u in e.units],
                "lcu_weight": e.lcu_weight,
                "absolute_weight": e.absolute_weight,
            }
            for e in pcmap.entries
        ],
    }


def dump_manifest(pcmap: PCMap) -> str:
    return json.dumps(manifest_dict(pcmap), indent=2) + "\n"


def save_manifest(pcmap: PCMap, path) -> None:
    Path(path).write_text(dump_manifest(pcmap))


class ManifestError(ValueError):
    pass


def manifest_from_dict(doc: dict) -> PCMap:
    try:
        vars = VarTable(doc["vars"])
        entries = []
        for raw in doc["entries"]:
            units = [CodeUnit(u["file"], tuple(int(n) for n in u["lines"]))
                     for u in raw["units"]]
            entries.append(PCEntry(parse_formula(raw["pc"], vars), units))
        fm = parse_formula(doc.get("feature_model", "true"), vars)
    except (KeyError, TypeError, ValueError, FormulaSyntaxError) as exc:
        raise ManifestError(f"malformed manifest: {exc}") from exc
    return PCMap(entries, vars.freeze(), fm, list(doc.get("files", [])))


def load_manifest(path) -> PCMap:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not JSON: {exc}") from exc
    return manifest_from_dict(doc)
