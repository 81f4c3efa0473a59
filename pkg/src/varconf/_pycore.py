"""Pure-Python CDCL solver.

This is the fallback for :mod:`varconf._core` and implements the same
algorithm step for step, so both back-ends return identical models:
two watched literals, first-UIP learning with local minimization, VSIDS
ordering with index tie-breaking, negative decision polarity and Luby
restarts.  There is no clause deletion.

Literals are DIMACS integers at the interface and ``2*v + sign`` inside,
with ``sign == 1`` for negative literals.
"""

UNDEF = -1
VAR_DECAY_INV = 1.0 / 0.95
RESCALE_LIMIT = 1e100
RESTART_UNIT = 100


def luby(y, x):
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


class SatCore:
    def __init__(self, num_vars=0):
        self.nvars = 0
        self.clauses = []
        self.watches = []
        self.assigns = []
        self.level = []
        self.reason = []
        self.activity = []
        self.seen = []
        self.heap = []
        self.heap_pos = []
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.var_inc = 1.0
        self.ok = True
        self.conflicts = 0
        self._model = None
        for _ in range(num_vars):
            self.new_var()

    # -- public interface --------------------------------------------------

    @property
    def num_vars(self):
        return self.nvars

    def new_var(self):
        v = self.nvars
        self.nvars += 1
        self.watches.append([])
        self.watches.append([])
        self.assigns.append(UNDEF)
        self.level.append(0)
        self.reason.append(-1)
        self.activity.append(0.0)
        self.seen.append(0)
        self.heap_pos.append(-1)
        self._heap_insert(v)
        return v + 1

    def add_clause(self, lits):
        """Add a clause of DIMACS literals; returns False once the formula is UNSAT."""
        if not self.ok:
            return False
        internal = set()
        for d in lits:
            v = abs(d) - 1
            if d == 0 or v >= self.nvars:
                raise ValueError(f"literal {d} out of range")
            internal.add(2 * v + (1 if d < 0 else 0))
        c = []
        for p in sorted(internal):
            if p ^ 1 in internal:
                return True
            val = self._value(p)
            if val == 1:
                return True
            if val == UNDEF:
                c.append(p)
        if not c:
            self.ok = False
            return False
        if len(c) == 1:
            self._enqueue(c[0], -1)
            if self._propagate() != -1:
                self.ok = False
                return False
            return True
        ci = len(self.clauses)
        self.clauses.append(c)
        self.watches[c[0]].append(ci)
        self.watches[c[1]].append(ci)
        return True

    def solve(self):
        self._model = None
        if not self.ok:
            return False
        if self._propagate() != -1:
            self.ok = False
            return False
        curr_restarts = 0
        while True:
            budget = luby(2, curr_restarts) * RESTART_UNIT
            status = self._search(budget)
            if status != 0:
                break
            curr_restarts += 1
        if status == 1:
            self._model = [a == 1 for a in self.assigns]
        self._cancel_until(0)
        if status == -1:
            self.ok = False
        return status == 1

    def model(self):
        """Values of all variables from the last successful ``solve``."""
        if self._model is None:
            raise RuntimeError("no model available")
        return list(self._model)

    # -- internals ---------------------------------------------------------

    def _value(self, p):
        a = self.assigns[p >> 1]
        if a == UNDEF:
            return UNDEF
        return a ^ (p & 1)

    def _enqueue(self, p, from_clause):
        v = p >> 1
        self.assigns[v] = (p & 1) ^ 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = from_clause
        self.trail.append(p)

    def _propagate(self):
        clauses = self.clauses
        watches = self.watches
        assigns = self.assigns
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                a = assigns[first >> 1]
                if a != UNDEF and (a ^ (first & 1)) == 1:
                    ws[j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    q = c[k]
                    a = assigns[q >> 1]
                    if a == UNDEF or (a ^ (q & 1)) == 1:
                        c[1] = q
                        c[k] = false_lit
                        watches[q].append(ci)
                        found = True
                        break
                if found:
                    continue
                ws[j] = ci
                j += 1
                a = assigns[first >> 1]
                if a != UNDEF and (a ^ (first & 1)) == 0:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self.qhead = len(trail)
                    return ci
                self._enqueue(first, ci)
            del ws[j:]
        return -1

    def _search(self, budget):
        """1 = SAT, -1 = UNSAT, 0 = restart."""
        conflicts_here = 0
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    return -1
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[learnt[0]].append(ci)
                    self.watches[learnt[1]].append(ci)
                    self._enqueue(learnt[0], ci)
                self.var_inc *= VAR_DECAY_INV
            else:
                if conflicts_here >= budget:
                    self._cancel_until(0)
                    return 0
                v = self._pick_branch_var()
                if v == -1:
                    return 1
                self.trail_lim.append(len(self.trail))
                self._enqueue(2 * v + 1, -1)

    def _analyze(self, confl):
        seen = self.seen
        level = self.level
        dl = len(self.trail_lim)
        learnt = [0]
        path_c = 0
        p = -1
        idx = len(self.trail) - 1
        while True:
            c = self.clauses[confl]
            for k in range(0 if p == -1 else 1, len(c)):
                q = c[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    self._bump(v)
                    seen[v] = 1
                    if level[v] >= dl:
                        path_c += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            confl = self.reason[p >> 1]
            seen[p >> 1] = 0
            path_c -= 1
            if path_c <= 0:
                break
        learnt[0] = p ^ 1

        # drop literals implied by the rest of the clause
        to_clear = [q >> 1 for q in learnt[1:]]
        out = [learnt[0]]
        for q in learnt[1:]:
            r = self.reason[q >> 1]
            if r == -1:
                out.append(q)
                continue
            rc = self.clauses[r]
            for k in range(1, len(rc)):
                u = rc[k] >> 1
                if not seen[u] and level[u] > 0:
                    out.append(q)
                    break
        for v in to_clear:
            seen[v] = 0

        if len(out) == 1:
            return out, 0
        best = 1
        for k in range(2, len(out)):
            if level[out[k] >> 1] > level[out[best] >> 1]:
                best = k
        out[1], out[best] = out[best], out[1]
        return out, level[out[1] >> 1]

    def _cancel_until(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        for k in range(len(self.trail) - 1, stop - 1, -1):
            v = self.trail[k] >> 1
            self.assigns[v] = UNDEF
            self.reason[v] = -1
            if self.heap_pos[v] == -1:
                self._heap_insert(v)
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = stop

    def _pick_branch_var(self):
        while self.heap:
            v = self._heap_pop()
            if self.assigns[v] == UNDEF:
                return v
        return -1

    def _bump(self, v):
        act = self.activity
        act[v] += self.var_inc
        if act[v] > RESCALE_LIMIT:
            for u in range(self.nvars):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
        if self.heap_pos[v] != -1:
            self._heap_up(self.heap_pos[v])

    # -- binary max-heap on (activity, -index) -----------------------------

    def _before(self, a, b):
        aa, ab = self.activity[a], self.activity[b]
        return aa > ab or (aa == ab and a < b)

    def _heap_insert(self, v):
        self.heap_pos[v] = len(self.heap)
        self.heap.append(v)
        self._heap_up(len(self.heap) - 1)

    def _heap_up(self, i):
        heap, pos = self.heap, self.heap_pos
        v = heap[i]
        while i > 0:
            parent = (i - 1) >> 1
            if not self._before(v, heap[parent]):
                break
            heap[i] = heap[parent]
            pos[heap[i]] = i
            i = parent
        heap[i] = v
        pos[v] = i

    def _heap_pop(self):
        heap, pos = self.heap, self.heap_pos
        top = heap[0]
        last = heap.pop()
        pos[top] = -1
        if heap:
            heap[0] = last
            pos[last] = 0
            self._heap_down(0)
        return top

    def _heap_down(self, i):
        heap, pos = self.heap, self.heap_pos
        v = heap[i]
        n = len(heap)
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and self._before(heap[child + 1], heap[child]):
                child += 1
            if not self._before(heap[child], v):
                break
            heap[i] = heap[child]
            pos[heap[i]] = i
            i = child
        heap[i] = v
        pos[v] = i
