"""Metric-guided configuration fuzzing over fixed-width bit strings.

``cvf`` mutates one bit per configuration variable; ``pcf`` one bit per
unique presence condition; ``spcf`` one bit per presence condition with a
nonzero weight.  For the PC-indexed types a bit string fixes which
presence conditions hold: it is kept only if the selected conditions, the
negations of the unselected ones and the feature model are jointly
satisfiable, and the SAT model is the configuration.  With
``unconstrained=True`` unselected conditions are left free instead.

Interaction-aware mutation modes are not implemented; :func:`mutants`
is the place to add them.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from varconf.extract import PCMap
from varconf.formula import Assignment, conj, evaluate, negate
from varconf.metrics import CostFunction, weigh
from varconf.solver import Solver

CVF = "cvf"
PCF = "pcf"
SPCF = "spcf"
TYPES = (CVF, PCF, SPCF)

DEFAULT_CYCLES = {CVF: 5, PCF: 25, SPCF: 25}
DEFAULT_RNG_SEED = 20240101
CONFQUEUE_CAP = 100_000
AFL_WINDOWS = (1, 2, 4)


@dataclass(frozen=True)
class FuzzCandidate:
    bits: tuple
    score: int
    model: Optional[Assignment] = None
    step: int = 0


@dataclass
class FuzzResult:
    configuration: Assignment
    score: int
    step: int
    bits: tuple


class MaxQueue:
    """Max-priority queue on score; equal scores pop in insertion order."""

    def __init__(self):
        self._heap: list = []
        self._count = itertools.count()

    def push(self, score: int, item) -> None:
        heapq.heappush(self._heap, (-score, next(self._count), item))

    def pop(self):
        neg, _, item = heapq.heappop(self._heap)
        return -neg, item

    def scores(self):
        return [-entry[0] for entry in self._heap]

    def __len__(self):
        return len(self._heap)


class ConfQueue:
    """Bounded output collection; once full, the lowest score (latest among
    ties) is evicted."""

    def __init__(self, cap: int = CONFQUEUE_CAP):
        self.cap = cap
        self._heap: list = []          # (score, -order, candidate): min first
        self._count = itertools.count()

    def add(self, cand: FuzzCandidate) -> None:
        heapq.heappush(self._heap, (cand.score, -next(self._count), cand))
        if len(self._heap) > self.cap:
            heapq.heappop(self._heap)

    def top(self, m: int) -> list:
        ordered = sorted(self._heap, key=lambda e: (-e[0], -e[1]))
        return [e[2] for e in ordered[:m]]

    def __len__(self):
        return len(self._heap)


class Fuzzer:
    """State of one fuzzing session: both queues, the seen set and a step counter."""

    def __init__(self, pcmap: PCMap, type: str, c: CostFunction,
                 lcu_count_unique: bool = False, confqueue_cap: int = CONFQUEUE_CAP,
                 unconstrained: bool = False):
        if type not in TYPES:
            raise ValueError(f"unknown fuzzing type {type!r}")
        self.pcmap = pcmap
        self.type = type
        self.cost = c
        self.unconstrained = unconstrained
        self.weights = weigh(pcmap, c).weights
        if c.is_lcu and lcu_count_unique:
            self.weights = [1 if w > 0 else 0 for w in self.weights]
        if type == CVF:
            self.positions = list(range(len(pcmap.vars)))
        elif type == PCF:
            self.positions = list(range(len(pcmap.entries)))
        else:
            self.positions = [i for i, w in enumerate(self.weights) if w > 0]
        self.queue = MaxQueue()
        self.confqueue = ConfQueue(confqueue_cap)
        self.seen: set = set()
        self.models_seen: set = set()
        self.steps = 0
        self.pops: list = []

    @property
    def width(self) -> int:
        return len(self.positions)

    def score_assignment(self, a: Assignment) -> int:
        return sum(w for e, w in zip(self.pcmap.entries, self.weights)
                   if w > 0 and evaluate(e.pc, a))

    def score_bits(self, bits) -> int:
        if self.type == CVF:
            return self.score_assignment(bits)
        return sum(self.weights[self.positions[k]] for k, b in enumerate(bits) if b)

    def selected(self, bits) -> list:
        """Entry indices a PC-indexed bit string selects."""
        return [self.positions[k] for k, b in enumerate(bits) if b]

    def bits_for(self, a: Assignment) -> tuple:
        """Seed bit string for a configuration."""
        if self.type == CVF:
            return tuple(bool(x) for x in a)
        return tuple(evaluate(self.pcmap.entries[i].pc, a) for i in self.positions)

    def feasible_model(self, bits) -> Optional[Assignment]:
        fm = self.pcmap.feature_model
        if self.type == CVF:
            return tuple(bits) if evaluate(fm, bits) else None
        entries = self.pcmap.entries
        parts = [fm]
        for k, b in enumerate(bits):
            pc = entries[self.positions[k]].pc
            if b:
                parts.append(pc)
            elif not self.unconstrained:
                parts.append(negate(pc))
        f = conj(*parts)
        s = Solver(len(self.pcmap.vars))
        s.add(f)
        return s.solve()

    def check_and_add(self, bits) -> Optional[FuzzCandidate]:
        """Feasibility-check ``bits``; on success enqueue it for mutation and
        record its configuration.  Returns the candidate, or None if it was
        a duplicate or infeasible."""
        bits = tuple(bool(b) for b in bits)
        if len(bits) != self.width:
            raise ValueError(f"bit string has length {len(bits)}, expected {self.width}")
        if bits in self.seen:
            return None
        self.seen.add(bits)
        self.steps += 1
        model = self.feasible_model(bits)
        if model is None:
            return None
        score = self.score_bits(bits)
        cand = FuzzCandidate(bits, score, model, self.steps)
        self.queue.push(score, cand)
        if model not in self.models_seen:
            self.models_seen.add(model)
            out_score = score if self.type == CVF else self.score_assignment(model)
            self.confqueue.add(FuzzCandidate(bits, out_score, model, self.steps))
        return cand

    def pop(self) -> FuzzCandidate:
        score, cand = self.queue.pop()
        self.pops.append((score, max(self.queue.scores(), default=None)))
        return cand

    def results(self, m: int) -> list:
        return [FuzzResult(c.model, c.score, c.step, c.bits) for c in self.confqueue.top(m)]


def flip(bits: Sequence[bool], positions: Iterable[int]) -> tuple:
    out = list(bits)
    for p in positions:
        out[p] = not out[p]
    return tuple(out)


def deterministic_mutants(bits, cycle: int, afl_windows: bool = False) -> list:
    """Consecutive-bit flips.

    Default: one window of each length 1..len, anchored at offset
    ``(cycle - 1) mod (len - i + 1)``.  With ``afl_windows`` every window of
    length 1, 2 and 4 at every offset.
    """
    n = len(bits)
    out = []
    if afl_windows:
        for i in AFL_WINDOWS:
            for off in range(n - i + 1):
                out.append(flip(bits, range(off, off + i)))
    else:
        for i in range(1, n + 1):
            off = (cycle - 1) % (n - i + 1)
            out.append(flip(bits, range(off, off + i)))
    return out


def random_mutants(bits, rng: random.Random, afl_windows: bool = False) -> list:
    """For each count ``i`` in the schedule, flip ``i`` distinct random bits."""
    n = len(bits)
    counts = [i for i in AFL_WINDOWS if i <= n] if afl_windows else range(1, n + 1)
    return [flip(bits, rng.sample(range(n), i)) for i in counts]


def mutants(bits, cycle: int, rng: random.Random, afl_windows: bool = False) -> list:
    return deterministic_mutants(bits, cycle, afl_windows) + random_mutants(bits, rng, afl_windows)


def fuzz(pcmap: PCMap, type: str, c: CostFunction, seeds: Sequence | None = None,
         cycles: int | None = None, m: int = 10, rng_seed: int = DEFAULT_RNG_SEED,
         afl_windows: bool = False, lcu_count_unique: bool = False,
         confqueue_cap: int = CONFQUEUE_CAP, unconstrained: bool = False,
         fuzzer: Fuzzer | None = None) -> list:
    """Run a fuzzing session and return the ``m`` best configurations.

    ``seeds`` are bit strings of the type's width (default: all false).
    Each cycle pops the best candidate and feeds its deterministic and
    random mutants through :meth:`Fuzzer.check_and_add`.
    """
    if type not in TYPES:
        raise ValueError(f"unknown fuzzing type {type!r}")
    cycles = DEFAULT_CYCLES[type] if cycles is None else cycles
    if cycles < 1 or m < 1:
        raise ValueError("cycles and m must be >= 1")
    fz = fuzzer or Fuzzer(pcmap, type, c, lcu_count_unique, confqueue_cap, unconstrained)
    rng = random.Random(rng_seed)
    if seeds is None:
        seeds = [(False,) * fz.width]
    if not seeds:
        raise ValueError("need at least one seed")
    for sc in seeds:
        fz.check_and_add(sc)
    cycle = 1
    while cycle <= cycles and len(fz.queue):
        cur = fz.pop()
        for mutant in mutants(cur.bits, cycle, rng, afl_windows):
            fz.check_and_add(mutant)
        cycle += 1
    return fz.results(m)
