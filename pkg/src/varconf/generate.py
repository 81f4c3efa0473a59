"""MaxSAT-based generators: maximal configuration, greedy cover and variants."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from varconf.extract import PCMap
from varconf.formula import (Assignment, conj, evaluate, variables)
from varconf.metrics import CostFunction, weigh
from varconf.solver import HardUnsat, SoftConstraint, max_sat, sat


class InfeasibleResidual(RuntimeError):
    """A greedy iteration could not enable any remaining presence condition."""


@dataclass
class GenResult:
    configuration: Assignment
    enabled: frozenset
    score: int
    unsatisfied: frozenset


@dataclass
class CoverSet:
    configs: list = field(default_factory=list)

    def __len__(self):
        return len(self.configs)

    def __iter__(self):
        return iter(self.configs)


@dataclass(frozen=True)
class Variant:
    pcs: frozenset
    witness: Assignment
    source: int          # index of the cover configuration it was derived from


def _clear_unused(pcmap: PCMap, model: Assignment, pcs) -> Assignment:
    """Set every variable outside the support of ``pcs`` to false, if the
    feature model allows it."""
    keep = set()
    for i in pcs:
        keep.update(v.index for v in variables(pcmap.entries[i].pc))
    cleared = tuple(bool(x) and i in keep for i, x in enumerate(model))
    if evaluate(pcmap.feature_model, cleared):
        return cleared
    return tuple(model)


def _maximal_over(pcmap: PCMap, weights: Sequence[int], candidates) -> GenResult:
    idx = [i for i in candidates if weights[i] > 0]
    soft = [SoftConstraint(pcmap.entries[i].pc, weights[i]) for i in idx]
    res = max_sat([pcmap.feature_model], soft, len(pcmap.vars))
    enabled = frozenset(idx[k] for k in res.satisfied)
    model = _clear_unused(pcmap, res.model, enabled)
    enabled = frozenset(i for i in idx if evaluate(pcmap.entries[i].pc, model))
    return GenResult(
        configuration=model,
        enabled=enabled,
        score=sum(weights[i] for i in enabled),
        unsatisfied=frozenset(idx) - enabled,
    )


def maximal(pcmap: PCMap, c: CostFunction) -> GenResult:
    """Configuration of maximum total weight; hard constraints are the feature model.

    Raises :class:`HardUnsat` if the feature model is unsatisfiable.
    """
    weights = weigh(pcmap, c).weights
    return _maximal_over(pcmap, weights, range(len(pcmap.entries)))


def maximal_iterative(pcmap: PCMap, c: CostFunction) -> CoverSet:
    """Greedy cover: repeat :func:`maximal` over the still-unsatisfied entries.

    Each result's ``enabled`` set only counts entries that were still
    uncovered when it was generated.
    """
    weights = weigh(pcmap, c).weights
    remaining = [i for i, w in enumerate(weights) if w > 0]
    cover = CoverSet()
    while remaining:
        res = _maximal_over(pcmap, weights, remaining)
        if not res.enabled:
            raise InfeasibleResidual(
                f"{len(remaining)} presence conditions cannot be enabled under the feature model")
        cover.configs.append(res)
        remaining = sorted(res.unsatisfied)
    return cover


def maximal_variants(pcmap: PCMap, cover: CoverSet) -> list:
    """Same-size swaps of each cover configuration's enabled set.

    For cover configuration ``mc`` with enabled set ``E`` (all entries
    true under its model), every ``p1`` in ``E`` is exchanged for every
    ``p2`` outside ``E`` that another cover configuration enables; the swap
    is kept if its conjunction with the feature model is satisfiable.
    """
    configs = list(cover)
    if not configs:
        return []
    n = len(pcmap.vars)
    enabled = [frozenset(i for i, e in enumerate(pcmap.entries)
                         if evaluate(e.pc, mc.configuration)) for mc in configs]
    found: dict = {}
    for k, cpc in enumerate(enabled):
        alt = set().union(*(enabled[j] for j in range(len(configs)) if j != k))
        for p1 in sorted(cpc):
            for p2 in sorted(alt - cpc):
                v = (cpc - {p1}) | {p2}
                if v in found:
                    continue
                f = conj(pcmap.feature_model, *(pcmap.entries[i].pc for i in sorted(v)))
                model = sat([f], n)
                if model is not None:
                    found[v] = Variant(v, _clear_unused(pcmap, model, v), k)
    return sorted(found.values(), key=lambda var: (var.source, sorted(var.pcs)))


# -- output formats --------------------------------------------------------------

def config_text(names: Sequence[str], a: Assignment) -> str:
    """``.config`` style: ``NAME=y`` or ``# NAME is not set``."""
    lines = [f"{n}=y" if a[i] else f"# {n} is not set" for i, n in enumerate(names)]
    return "\n".join(lines) + "\n"


def config_json(names: Sequence[str], a: Assignment) -> dict:
    return {n: bool(a[i]) for i, n in enumerate(names)}


class ConfigFormatError(ValueError):
    pass


class UnknownVariable(ConfigFormatError):
    pass


def parse_config(text: str, names: Sequence[str], lenient: bool = False,
                 warnings: list | None = None) -> Assignment:
    """Read ``.config`` text or a JSON object; unmentioned variables are false."""
    index = {n: i for i, n in enumerate(names)}
    values = [False] * len(names)
    pairs = []
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigFormatError(f"bad JSON configuration: {exc}") from exc
        if "config" in doc and isinstance(doc["config"], dict):
            doc = doc["config"]
        for k, v in doc.items():
            if not isinstance(v, bool) and v not in (0, 1):
                raise ConfigFormatError(f"non-boolean value for {k}: {v!r}")
            pairs.append((k, bool(v)))
    else:
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.endswith(" is not set"):
                    pairs.append((body[: -len(" is not set")].strip(), False))
                continue
            name, sep, val = line.partition("=")
            if not sep:
                raise ConfigFormatError(f"line {lineno}: expected NAME=value")
            val = val.strip().strip('"')
            if val in ("y", "m", "1"):
                pairs.append((name.strip(), True))
            elif val in ("n", "0", ""):
                pairs.append((name.strip(), False))
            else:
                raise ConfigFormatError(f"line {lineno}: non-boolean value {val!r}")
    for name, v in pairs:
        i = index.get(name)
        if i is None:
            if not lenient:
                raise UnknownVariable(f"unknown variable {name}")
            if warnings is not None:
                warnings.append(name)
            continue
        values[i] = v
    return tuple(values)


__all__ = [
    "CoverSet", "GenResult", "HardUnsat", "InfeasibleResidual", "Variant",
    "config_json", "config_text", "maximal", "maximal_iterative",
    "maximal_variants", "parse_config",
]
