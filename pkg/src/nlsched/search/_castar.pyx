# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled A* kernel over the subset lattice.

Same arithmetic, iteration order and tie-breaking as ``_pyastar.py``.
"""

from libc.math cimport pow, expm1, log1p, INFINITY
from libc.stdint cimport uint64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

import numpy as np

cdef extern from *:
    """
    #include <queue>
    #include <vector>
    struct Entry {
        double f;
        double g;
        unsigned long long mask;
        int label;
    };
    struct EntryLater {
        // true when a is popped after b: smaller f first, then larger g,
        // then smaller mask, then smaller label
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.f != b.f) return a.f > b.f;
            if (a.g != b.g) return a.g < b.g;
            if (a.mask != b.mask) return a.mask > b.mask;
            return a.label > b.label;
        }
    };
    typedef std::priority_queue<Entry, std::vector<Entry>, EntryLater> EntryQueue;
    """
    cdef struct Entry:
        double f
        double g
        unsigned long long mask
        int label

    cdef cppclass EntryQueue:
        EntryQueue() except +
        void push(Entry&) except +
        Entry& top()
        void pop()
        bint empty()
        size_t size()


cdef inline double fdiff(double lo, double delta, double beta) nogil:
    if lo == 0.0:
        return pow(delta, beta)
    return pow(lo, beta) * expm1(beta * log1p(delta / lo))


cdef inline double phi(double pa, double pb, double t, double beta) nogil:
    if beta == 1.0:
        return pa / pb
    return fdiff(t + pb, pa, beta) / fdiff(t + pa, pb, beta)


cdef inline double mask_sum(uint64_t mask, const double* p) nogil:
    cdef double s = 0.0
    cdef int k = 0
    while mask:
        if mask & 1:
            s += p[k]
        mask >>= 1
        k += 1
    return s


cdef double heuristic(uint64_t mask, bint forward, const double* p, const double* w,
                      const double* c, double beta, int n) nogil:
    cdef double h = 0.0
    cdef double t
    cdef int k
    if forward:
        t = mask_sum(mask, p)
        for k in range(n):
            if not ((mask >> k) & 1):
                h += w[k] * pow(t + p[k], beta)
    else:
        for k in range(n):
            if (mask >> k) & 1:
                h += c[k]
    return h


def astar(p_in, w_in, double beta, bint forward, bint use_local, double margin,
          before_in, after_in, head_in, tail_in, long long node_cap,
          bint check_consistency=False):
    """Return ``(order, g, generated, expanded, max_queue, capped)``."""
    cdef double[::1] p_arr = np.ascontiguousarray(p_in, dtype=np.float64)
    cdef double[::1] w_arr = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef int n = p_arr.shape[0]
    if n > 64:
        raise ValueError("kernel supports at most 64 jobs")
    cdef uint64_t[::1] before = np.ascontiguousarray(
        [int(x) for x in before_in], dtype=np.uint64) if n else np.zeros(0, np.uint64)
    cdef uint64_t[::1] after = np.ascontiguousarray(
        [int(x) for x in after_in], dtype=np.uint64) if n else np.zeros(0, np.uint64)
    cdef double[:, ::1] head = np.ascontiguousarray(head_in, dtype=np.float64).reshape(n, n)
    cdef double[:, ::1] tail = np.ascontiguousarray(tail_in, dtype=np.float64).reshape(n, n)
    cdef double[::1] c_arr = np.empty(n, dtype=np.float64)
    cdef const double* p = &p_arr[0]
    cdef const double* w = &w_arr[0]
    cdef const double* c = &c_arr[0]
    cdef int k, i, lab
    for k in range(n):
        c_arr[k] = w[k] * pow(p[k], beta)

    cdef uint64_t full = (<uint64_t>0xFFFFFFFFFFFFFFFF) if n == 64 else ((<uint64_t>1 << n) - 1)
    cdef uint64_t root = 0 if forward else full
    cdef uint64_t goal = full if forward else 0
    cdef uint64_t mask, child, m, rest, bit
    cdef double g, t, s, cost, gc, hc, h_parent
    cdef int label
    cdef bint inside, prune
    cdef long long generated = 1
    cdef long long expanded = 0
    cdef size_t max_queue = 1

    cdef EntryQueue heap
    cdef unordered_map[uint64_t, int] closed
    cdef unordered_map[uint64_t, double] best_g
    cdef Entry e
    e.f = heuristic(root, forward, p, w, c, beta, n)
    e.g = 0.0
    e.mask = root
    e.label = -1
    heap.push(e)
    best_g[root] = 0.0

    while not heap.empty():
        e = heap.top()
        heap.pop()
        mask = e.mask
        label = e.label
        g = e.g
        if closed.count(mask):
            continue
        closed[mask] = label
        if mask == goal:
            order = []
            m = goal
            while m != root:
                lab = closed[m]
                order.append(lab)
                m ^= (<uint64_t>1) << lab
            if forward:
                order.reverse()
            return order, g, generated, expanded, max_queue, False
        expanded += 1
        t = mask_sum(mask, p)
        h_parent = heuristic(mask, forward, p, w, c, beta, n) if check_consistency else 0.0
        for i in range(n):
            bit = (<uint64_t>1) << i
            inside = (mask & bit) != 0
            prune = False
            if forward:
                if inside:
                    continue
                if use_local and label >= 0:
                    s = t - p[label]
                    if s < 0.0:
                        s = 0.0
                    if w[i] / w[label] >= phi(p[i], p[label], s, beta) * (1.0 + margin):
                        continue
                rest = full & ~mask & ~bit
                if after[i] & rest:
                    continue
                for k in range(n):
                    if (rest >> k) & 1 and tail[k, i] <= t:
                        prune = True
                        break
                if prune:
                    continue
                child = mask | bit
                cost = w[i] * pow(mask_sum(child, p), beta)
            else:
                if not inside:
                    continue
                if use_local and label >= 0:
                    s = t - p[i]
                    if s < 0.0:
                        s = 0.0
                    if w[label] / w[i] >= phi(p[label], p[i], s, beta) * (1.0 + margin):
                        continue
                if before[i] & mask & ~bit:
                    continue
                for k in range(n):
                    if (mask >> k) & 1 and head[i, k] >= t:
                        prune = True
                        break
                if prune:
                    continue
                child = mask & ~bit
                cost = w[i] * pow(t, beta)
            gc = g + cost
            if child != goal:
                if generated >= node_cap:
                    return None, None, generated, expanded, max_queue, True
                generated += 1
            if check_consistency:
                hc = heuristic(child, forward, p, w, c, beta, n)
                if h_parent > cost + hc + 1e-9 * (h_parent + 1.0):
                    raise AssertionError(
                        f"inconsistent bound on arc {mask:#x} -> {child:#x}: "
                        f"{h_parent} > {cost} + {hc}")
            if closed.count(child):
                continue
            if best_g.count(child) and best_g[child] <= gc:
                continue
            best_g[child] = gc
            hc = heuristic(child, forward, p, w, c, beta, n)
            e.f = gc + hc
            e.g = gc
            e.mask = child
            e.label = i
            heap.push(e)
            if heap.size() > max_queue:
                max_queue = heap.size()
    raise RuntimeError("search exhausted without reaching the goal; pruning removed every schedule")
