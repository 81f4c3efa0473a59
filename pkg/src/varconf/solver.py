"""SAT and exact weighted partial MaxSAT over :mod:`varconf.formula` formulas.

MaxSAT uses model-improving linear search: every soft constraint ``f_i``
gets an indicator ``b_i`` with ``b_i -> f_i``, and after each model of
weight ``w`` the solver is asked for weight at least ``w + 1`` by bounding
the weight of the *falsified* indicators with a generalized totalizer.
The last model found is optimal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from varconf.backend import SatCore
from varconf.formula import (Assignment, Formula, TseitinEncoder, evaluate,
                             max_index)


class HardUnsat(Exception):
    """The hard constraints have no model."""


@dataclass(frozen=True)
class SoftConstraint:
    formula: Formula
    weight: int

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("soft constraint weight must be positive")


@dataclass
class MaxSatResult:
    model: Assignment
    satisfied: frozenset
    unsatisfied: frozenset
    total_weight: int
    sat_calls: int = field(default=0, compare=False)


class Solver:
    """One incremental SAT instance over ``num_vars`` original variables.

    Original variable ``i`` is SAT variable ``i + 1`` as in
    :class:`varconf.formula.CnfInstance`.
    """

    def __init__(self, num_vars: int, core_class=None):
        self.num_vars = num_vars
        self.core = (core_class or SatCore)(num_vars)
        self.encoder = TseitinEncoder(self.core.new_var, self.core.add_clause)
        self.calls = 0

    def new_var(self) -> int:
        return self.core.new_var()

    def add_clause(self, lits) -> None:
        self.core.add_clause(lits)

    def lit(self, f: Formula) -> int:
        return self.encoder.lit(f)

    def add(self, f: Formula) -> None:
        self.encoder.assert_formula(f)

    def solve(self) -> Optional[Assignment]:
        self.calls += 1
        if not self.core.solve():
            return None
        return tuple(self.core.model()[: self.num_vars])

    def raw_model(self) -> list:
        return self.core.model()


def _width(formulas, num_vars):
    need = max_index(formulas)
    if num_vars is None:
        return need
    if num_vars < need:
        raise ValueError(f"num_vars={num_vars} but formulas use {need} variables")
    return num_vars


def sat(hard: Sequence[Formula], num_vars: int | None = None) -> Optional[Assignment]:
    """A model of the conjunction of ``hard``, or None."""
    s = Solver(_width(hard, num_vars))
    for f in hard:
        s.add(f)
    return s.solve()


def encode_weighted_at_most(solver: Solver, terms, bound: int) -> None:
    """Constrain ``sum(w for lit, w in terms if lit) <= bound``.

    Generalized totalizer: each tree node has one output literal per
    reachable partial sum, with sums above ``bound`` merged into
    ``bound + 1``; the root's overflow output is forbidden.
    """
    if bound < 0:
        solver.add_clause([])
        return
    if sum(w for _, w in terms) <= bound:
        return
    cap = bound + 1

    def build(lo, hi):
        if hi - lo == 1:
            lit, w = terms[lo]
            return {min(w, cap): lit}
        mid = (lo + hi) // 2
        left, right = build(lo, mid), build(mid, hi)
        out = {}
        pairs = [(0, None)] + sorted(left.items())
        rpairs = [(0, None)] + sorted(right.items())
        for a, la in pairs:
            for b, rb in rpairs:
                s = min(a + b, cap)
                if s == 0:
                    continue
                o = out.get(s)
                if o is None:
                    o = out[s] = solver.new_var()
                clause = [o]
                if la is not None:
                    clause.append(-la)
                if rb is not None:
                    clause.append(-rb)
                solver.add_clause(clause)
        return out

    root = build(0, len(terms))
    if cap in root:
        solver.add_clause([-root[cap]])


def max_sat(hard: Sequence[Formula], soft: Sequence[SoftConstraint],
            num_vars: int | None = None, core_class=None) -> MaxSatResult:
    """Exact maximum total weight of satisfied soft constraints under ``hard``."""
    n = _width(list(hard) + [sc.formula for sc in soft], num_vars)
    s = Solver(n, core_class)
    for f in hard:
        s.add(f)
    indicators = []
    for sc in soft:
        b = s.new_var()
        s.add_clause([-b, s.lit(sc.formula)])
        indicators.append(b)
    total = sum(sc.weight for sc in soft)

    def weight_of(model):
        return sum(sc.weight for sc in soft if evaluate(sc.formula, model))

    best = s.solve()
    if best is None:
        raise HardUnsat("hard constraints are unsatisfiable")
    best_w = weight_of(best)
    while best_w < total:
        # at least best_w + 1 satisfied  <=>  at most total - best_w - 1 falsified
        encode_weighted_at_most(
            s, [(-b, sc.weight) for b, sc in zip(indicators, soft)],
            total - best_w - 1)
        model = s.solve()
        if model is None:
            break
        w = weight_of(model)
        assert w > best_w
        best, best_w = model, w
    satisfied = frozenset(i for i, sc in enumerate(soft) if evaluate(sc.formula, best))
    return MaxSatResult(
        model=best,
        satisfied=satisfied,
        unsatisfied=frozenset(range(len(soft))) - satisfied,
        total_weight=best_w,
        sat_calls=s.calls,
    )


def to_wcnf(hard: Sequence[Formula], soft: Sequence[SoftConstraint],
            num_vars: int | None = None) -> str:
    """DIMACS WCNF text for cross-checking with external MaxSAT solvers.

    Soft formulas are relaxed through indicator variables: ``b_i -> f_i``
    is hard and the unit ``b_i`` carries the weight.  Variables
    ``1..num_vars`` are the original configuration variables.
    """
    n = _width(list(hard) + [sc.formula for sc in soft], num_vars)
    clauses: list = []
    counter = [n]

    def new_var():
        counter[0] += 1
        return counter[0]

    enc = TseitinEncoder(new_var, clauses.append)
    for f in hard:
        enc.assert_formula(f)
    units = []
    for sc in soft:
        b = new_var()
        clauses.append([-b, enc.lit(sc.formula)])
        units.append((sc.weight, b))
    top = 1 + sum(sc.weight for sc in soft)
    lines = [f"p wcnf {counter[0]} {len(clauses) + len(units)} {top}"]
    lines += [" ".join(map(str, [top, *c, 0])) for c in clauses]
    lines += [f"{w} {b} 0" for w, b in units]
    return "\n".join(lines) + "\n"
