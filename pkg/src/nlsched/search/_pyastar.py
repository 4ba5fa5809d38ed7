"""Pure-Python A* kernel over the subset lattice.

Mirrors ``_castar.pyx`` operation for operation so both backends produce the
same node counts; keep the two in sync.
"""

import heapq
import math


def fdiff(lo, delta, beta):
    if lo == 0.0:
        return delta ** beta
    return lo ** beta * math.expm1(beta * math.log1p(delta / lo))


def phi(pa, pb, t, beta):
    if beta == 1.0:
        return pa / pb
    return fdiff(t + pb, pa, beta) / fdiff(t + pa, pb, beta)


def mask_sum(mask, p):
    s = 0.0
    k = 0
    while mask:
        if mask & 1:
            s += p[k]
        mask >>= 1
        k += 1
    return s


def heuristic(mask, forward, p, w, c, beta, n):
    h = 0.0
    if forward:
        t = mask_sum(mask, p)
        for k in range(n):
            if not (mask >> k) & 1:
                h += w[k] * (t + p[k]) ** beta
    else:
        for k in range(n):
            if (mask >> k) & 1:
                h += c[k]
    return h


def pruned_backward(mask, label, i, t1, p, w, beta, use_local, margin,
                    before, head_lists):
    """Arc placing ``i`` last among the open set ``mask``, right before ``label``."""
    if use_local and label >= 0:
        t = t1 - p[i]
        if t < 0.0:
            t = 0.0
        if w[label] / w[i] >= phi(p[label], p[i], t, beta) * (1.0 + margin):
            return True
    if before[i] & mask & ~(1 << i):
        return True
    for k, t_head in head_lists[i]:
        if (mask >> k) & 1 and t_head >= t1:
            return True
    return False


def pruned_forward(mask, label, i, t, full, p, w, beta, use_local, margin,
                   after, tail_lists):
    """Arc appending ``i`` after the prefix ``mask`` whose last job is ``label``."""
    if use_local and label >= 0:
        s = t - p[label]
        if s < 0.0:
            s = 0.0
        if w[i] / w[label] >= phi(p[i], p[label], s, beta) * (1.0 + margin):
            return True
    rest = full & ~mask & ~(1 << i)
    if after[i] & rest:
        return True
    for k, t_tail in tail_lists[i]:
        if (rest >> k) & 1 and t_tail <= t:
            return True
    return False


def astar(p, w, beta, forward, use_local, margin, before, after, head_eff, tail_eff,
          node_cap, check_consistency=False):
    """Return ``(order, g, generated, expanded, max_queue, capped)``.

    ``head_eff[i][k]`` / ``tail_eff[k][i]`` are interval thresholds already
    shifted by their tolerance (-inf / +inf when absent).
    """
    n = len(p)
    full = (1 << n) - 1
    c = [w[k] * p[k] ** beta for k in range(n)]
    head_lists = [[(k, head_eff[i][k]) for k in range(n) if head_eff[i][k] != -math.inf]
                  for i in range(n)]
    tail_lists = [[(k, tail_eff[k][i]) for k in range(n) if tail_eff[k][i] != math.inf]
                  for i in range(n)]
    root = 0 if forward else full
    goal = full if forward else 0

    heap = [(heuristic(root, forward, p, w, c, beta, n), -0.0, root, -1, 0.0)]
    best_g = {root: 0.0}
    closed = {}
    generated = 1
    expanded = 0
    max_queue = 1
    while heap:
        _, _, mask, label, g = heapq.heappop(heap)
        if mask in closed:
            continue
        closed[mask] = label
        if mask == goal:
            order = []
            m = goal
            while m != root:
                lab = closed[m]
                order.append(lab)
                m ^= 1 << lab
            if forward:
                order.reverse()
            return order, g, generated, expanded, max_queue, False
        expanded += 1
        t = mask_sum(mask, p)
        h_parent = heuristic(mask, forward, p, w, c, beta, n) if check_consistency else 0.0
        for i in range(n):
            inside = (mask >> i) & 1
            if forward:
                if inside:
                    continue
                if pruned_forward(mask, label, i, t, full, p, w, beta, use_local, margin,
                                  after, tail_lists):
                    continue
                child = mask | (1 << i)
                cost = w[i] * mask_sum(child, p) ** beta
            else:
                if not inside:
                    continue
                if pruned_backward(mask, label, i, t, p, w, beta, use_local, margin,
                                   before, head_lists):
                    continue
                child = mask & ~(1 << i)
                cost = w[i] * t ** beta
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
            if child in closed:
                continue
            if child in best_g and best_g[child] <= gc:
                continue
            best_g[child] = gc
            hc = heuristic(child, forward, p, w, c, beta, n)
            heapq.heappush(heap, (gc + hc, -gc, child, i, gc))
            if len(heap) > max_queue:
                max_queue = len(heap)
    raise RuntimeError("search exhausted without reaching the goal; pruning removed every schedule")
