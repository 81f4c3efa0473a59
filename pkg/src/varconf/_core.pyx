# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CDCL solver.

Mirror of :mod:`varconf._pycore`; every branching, learning and restart
decision is made in the same order, so models agree between back-ends.
"""

from libcpp.vector cimport vector

cdef int UNDEF = -1
cdef double VAR_DECAY_INV = 1.0 / 0.95
cdef double RESCALE_LIMIT = 1e100
cdef int RESTART_UNIT = 100


cdef double luby(double y, int x):
    cdef int size = 1, seq = 0
    cdef double r = 1.0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    for _ in range(seq):
        r *= y
    return r


cdef class SatCore:
    cdef int nvars
    cdef vector[vector[int]] clauses
    cdef vector[vector[int]] watches
    cdef vector[int] assigns
    cdef vector[int] level
    cdef vector[int] reason
    cdef vector[double] activity
    cdef vector[char] seen
    cdef vector[int] heap
    cdef vector[int] heap_pos
    cdef vector[int] trail
    cdef vector[int] trail_lim
    cdef int qhead
    cdef double var_inc
    cdef public bint ok
    cdef public long conflicts
    cdef object _model

    def __init__(self, int num_vars=0):
        self.nvars = 0
        self.qhead = 0
        self.var_inc = 1.0
        self.ok = True
        self.conflicts = 0
        self._model = None
        for _ in range(num_vars):
            self.new_var()

    @property
    def num_vars(self):
        return self.nvars

    def new_var(self):
        cdef int v = self.nvars
        self.nvars += 1
        self.watches.push_back(vector[int]())
        self.watches.push_back(vector[int]())
        self.assigns.push_back(UNDEF)
        self.level.push_back(0)
        self.reason.push_back(-1)
        self.activity.push_back(0.0)
        self.seen.push_back(0)
        self.heap_pos.push_back(-1)
        self._heap_insert(v)
        return v + 1

    def add_clause(self, lits):
        """Add a clause of DIMACS literals; returns False once the formula is UNSAT."""
        cdef int p, val, v, ci
        cdef vector[int] c
        if not self.ok:
            return False
        internal = set()
        for d in lits:
            v = abs(d) - 1
            if d == 0 or v >= self.nvars:
                raise ValueError(f"literal {d} out of range")
            internal.add(2 * v + (1 if d < 0 else 0))
        for p in sorted(internal):
            if p ^ 1 in internal:
                return True
            val = self._value(p)
            if val == 1:
                return True
            if val == UNDEF:
                c.push_back(p)
        if c.size() == 0:
            self.ok = False
            return False
        if c.size() == 1:
            self._enqueue(c[0], -1)
            if self._propagate() != -1:
                self.ok = False
                return False
            return True
        ci = self.clauses.size()
        self.clauses.push_back(c)
        self.watches[c[0]].push_back(ci)
        self.watches[c[1]].push_back(ci)
        return True

    def solve(self):
        cdef int status = 0, curr_restarts = 0
        cdef double budget
        self._model = None
        if not self.ok:
            return False
        if self._propagate() != -1:
            self.ok = False
            return False
        while True:
            budget = luby(2.0, curr_restarts) * RESTART_UNIT
            status = self._search(budget)
            if status != 0:
                break
            curr_restarts += 1
        if status == 1:
            self._model = [self.assigns[v] == 1 for v in range(self.nvars)]
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

    cdef inline int _value(self, int p):
        cdef int a = self.assigns[p >> 1]
        if a == UNDEF:
            return UNDEF
        return a ^ (p & 1)

    cdef inline void _enqueue(self, int p, int from_clause):
        cdef int v = p >> 1
        self.assigns[v] = (p & 1) ^ 1
        self.level[v] = self.trail_lim.size()
        self.reason[v] = from_clause
        self.trail.push_back(p)

    cdef int _propagate(self):
        cdef int p, false_lit, ci, first, q, a, k
        cdef size_t i, j, n
        cdef vector[int]* ws
        cdef vector[int]* c
        cdef bint found
        while self.qhead < <int>self.trail.size():
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = &self.watches[false_lit]
            i = 0
            j = 0
            n = ws.size()
            while i < n:
                ci = ws[0][i]
                i += 1
                c = &self.clauses[ci]
                if c[0][0] == false_lit:
                    c[0][0] = c[0][1]
                    c[0][1] = false_lit
                first = c[0][0]
                a = self.assigns[first >> 1]
                if a != UNDEF and (a ^ (first & 1)) == 1:
                    ws[0][j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, <int>c.size()):
                    q = c[0][k]
                    a = self.assigns[q >> 1]
                    if a == UNDEF or (a ^ (q & 1)) == 1:
                        c[0][1] = q
                        c[0][k] = false_lit
                        self.watches[q].push_back(ci)
                        found = True
                        break
                if found:
                    continue
                ws[0][j] = ci
                j += 1
                a = self.assigns[first >> 1]
                if a != UNDEF and (a ^ (first & 1)) == 0:
                    while i < n:
                        ws[0][j] = ws[0][i]
                        j += 1
                        i += 1
                    ws.resize(j)
                    self.qhead = self.trail.size()
                    return ci
                self._enqueue(first, ci)
            ws.resize(j)
        return -1

    cdef int _search(self, double budget):
        cdef int confl, bt, ci, v
        cdef long conflicts_here = 0
        cdef vector[int] learnt
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                conflicts_here += 1
                if self.trail_lim.size() == 0:
                    return -1
                learnt.clear()
                bt = self._analyze(confl, learnt)
                self._cancel_until(bt)
                if learnt.size() == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    ci = self.clauses.size()
                    self.clauses.push_back(learnt)
                    self.watches[learnt[0]].push_back(ci)
                    self.watches[learnt[1]].push_back(ci)
                    self._enqueue(learnt[0], ci)
                self.var_inc *= VAR_DECAY_INV
            else:
                if conflicts_here >= budget:
                    self._cancel_until(0)
                    return 0
                v = self._pick_branch_var()
                if v == -1:
                    return 1
                self.trail_lim.push_back(self.trail.size())
                self._enqueue(2 * v + 1, -1)

    cdef int _analyze(self, int confl, vector[int]& out):
        cdef int dl = self.trail_lim.size()
        cdef int path_c = 0, p = -1, idx = self.trail.size() - 1
        cdef int k, q, v, r, u, best, tmp
        cdef size_t m
        cdef vector[int]* c
        cdef vector[int] learnt
        cdef bint keep
        learnt.push_back(0)
        while True:
            c = &self.clauses[confl]
            for k in range(0 if p == -1 else 1, <int>c.size()):
                q = c[0][k]
                v = q >> 1
                if not self.seen[v] and self.level[v] > 0:
                    self._bump(v)
                    self.seen[v] = 1
                    if self.level[v] >= dl:
                        path_c += 1
                    else:
                        learnt.push_back(q)
            while not self.seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            confl = self.reason[p >> 1]
            self.seen[p >> 1] = 0
            path_c -= 1
            if path_c <= 0:
                break
        learnt[0] = p ^ 1

        out.push_back(learnt[0])
        for m in range(1, learnt.size()):
            q = learnt[m]
            r = self.reason[q >> 1]
            if r == -1:
                out.push_back(q)
                continue
            c = &self.clauses[r]
            for k in range(1, <int>c.size()):
                u = c[0][k] >> 1
                if not self.seen[u] and self.level[u] > 0:
                    out.push_back(q)
                    break
        for m in range(1, learnt.size()):
            self.seen[learnt[m] >> 1] = 0

        if out.size() == 1:
            return 0
        best = 1
        for k in range(2, <int>out.size()):
            if self.level[out[k] >> 1] > self.level[out[best] >> 1]:
                best = k
        tmp = out[1]
        out[1] = out[best]
        out[best] = tmp
        return self.level[out[1] >> 1]

    cdef void _cancel_until(self, int lvl):
        cdef int stop, k, v
        if <int>self.trail_lim.size() <= lvl:
            return
        stop = self.trail_lim[lvl]
        for k in range(<int>self.trail.size() - 1, stop - 1, -1):
            v = self.trail[k] >> 1
            self.assigns[v] = UNDEF
            self.reason[v] = -1
            if self.heap_pos[v] == -1:
                self._heap_insert(v)
        self.trail.resize(stop)
        self.trail_lim.resize(lvl)
        self.qhead = stop

    cdef int _pick_branch_var(self):
        cdef int v
        while self.heap.size() > 0:
            v = self._heap_pop()
            if self.assigns[v] == UNDEF:
                return v
        return -1

    cdef void _bump(self, int v):
        cdef int u
        self.activity[v] += self.var_inc
        if self.activity[v] > RESCALE_LIMIT:
            for u in range(self.nvars):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        if self.heap_pos[v] != -1:
            self._heap_up(self.heap_pos[v])

    # -- binary max-heap on (activity, -index) -----------------------------

    cdef inline bint _before(self, int a, int b):
        cdef double aa = self.activity[a], ab = self.activity[b]
        return aa > ab or (aa == ab and a < b)

    cdef void _heap_insert(self, int v):
        self.heap_pos[v] = self.heap.size()
        self.heap.push_back(v)
        self._heap_up(self.heap.size() - 1)

    cdef void _heap_up(self, int i):
        cdef int v = self.heap[i], parent
        while i > 0:
            parent = (i - 1) >> 1
            if not self._before(v, self.heap[parent]):
                break
            self.heap[i] = self.heap[parent]
            self.heap_pos[self.heap[i]] = i
            i = parent
        self.heap[i] = v
        self.heap_pos[v] = i

    cdef int _heap_pop(self):
        cdef int top = self.heap[0]
        cdef int last = self.heap.back()
        self.heap.pop_back()
        self.heap_pos[top] = -1
        if self.heap.size() > 0:
            self.heap[0] = last
            self.heap_pos[last] = 0
            self._heap_down(0)
        return top

    cdef void _heap_down(self, int i):
        cdef int v = self.heap[i], child
        cdef int n = self.heap.size()
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and self._before(self.heap[child + 1], self.heap[child]):
                child += 1
            if not self._before(self.heap[child], v):
                break
            self.heap[i] = self.heap[child]
            self.heap_pos[self.heap[i]] = i
            i = child
        self.heap[i] = v
        self.heap_pos[v] = i
