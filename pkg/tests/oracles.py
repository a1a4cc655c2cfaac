"""Slow reference implementations used as independent test oracles.

Everything here is written with explicit Python loops and shares no code with
the package under test.
"""

from __future__ import annotations

import math
from collections import deque


def convolve_naive(img, kernel):
    """Textbook convolution with edge replication."""
    h, w = len(img), len(img[0])
    k = len(kernel)
    r = k // 2
    out = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            s = 0.0
            for i in range(k):
                for j in range(k):
                    yy = min(max(y - (i - r), 0), h - 1)
                    xx = min(max(x - (j - r), 0), w - 1)
                    s += kernel[i][j] * img[yy][xx]
            out[y][x] = s
    return out


def gaussian_center(sigma, radius):
    total = 0.0
    for i in range(-radius, radius + 1):
        for j in range(-radius, radius + 1):
            total += math.exp(-(i * i + j * j) / (2 * sigma * sigma))
    return 1.0 / total


def quantile_linear(values, q):
    s = sorted(values)
    h = (len(s) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (h - lo) * (s[hi] - s[lo])


def memberships_naive(x, V, m):
    """u_ij = 1 / sum_k (d_ij / d_kj)^(1/(m-1)), coincident points split equally."""
    c = len(V)
    U = [[0.0] * len(x) for _ in range(c)]
    for j, xj in enumerate(x):
        d = [(xj - v) ** 2 for v in V]
        zeros = [i for i in range(c) if d[i] == 0.0]
        if zeros:
            for i in zeros:
                U[i][j] = 1.0 / len(zeros)
            continue
        for i in range(c):
            try:
                U[i][j] = 1.0 / sum((d[i] / d[k]) ** (1.0 / (m - 1.0)) for k in range(c))
            except OverflowError:  # some ratio is astronomically large: u is 0
                U[i][j] = 0.0
    return U


def centroids_naive(x, U, m):
    V = []
    for row in U:
        num = sum((u ** m) * xj for u, xj in zip(row, x))
        den = sum(u ** m for u in row)
        V.append(num / den)
    return V


def objective_naive(x, U, V, m):
    return sum(U[i][j] ** m * (x[j] - V[i]) ** 2 for i in range(len(V)) for j in range(len(x)))


def fcm_naive(x, V0, m, sweeps):
    """Run exactly ``sweeps`` alternations; return the per-sweep (U, V) trace."""
    V = list(V0)
    trace = []
    for _ in range(sweeps):
        U = memberships_naive(x, V, m)
        V = centroids_naive(x, U, m)
        trace.append((U, V))
    return trace


def components_naive(mask, eight=True):
    """Connected components by BFS; returns a list of pixel sets."""
    h, w = len(mask), len(mask[0])
    seen = [[False] * w for _ in range(h)]
    steps = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    if not eight:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    comps = []
    for y in range(h):
        for x in range(w):
            if not mask[y][x] or seen[y][x]:
                continue
            comp = set()
            q = deque([(y, x)])
            seen[y][x] = True
            while q:
                cy, cx = q.popleft()
                comp.add((cy, cx))
                for dy, dx in steps:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and mask[ny][nx] and not seen[ny][nx]:
                        seen[ny][nx] = True
                        q.append((ny, nx))
            comps.append(comp)
    return comps


def closing_naive(mask, radius):
    """Dilation then erosion by a Euclidean disk; the plane outside is background."""
    h, w = len(mask), len(mask[0])
    offs = [(dy, dx) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)
            if dy * dy + dx * dx <= radius * radius]
    pad = radius + 1
    H, W = h + 2 * pad, w + 2 * pad

    def at(img, y, x):
        return 0 <= y < H and 0 <= x < W and img[y][x]

    big = [[False] * W for _ in range(H)]
    for y in range(h):
        for x in range(w):
            big[y + pad][x + pad] = bool(mask[y][x])
    dil = [[any(at(big, y + dy, x + dx) for dy, dx in offs) for x in range(W)] for y in range(H)]
    ero = [[all(at(dil, y + dy, x + dx) for dy, dx in offs) for x in range(W)] for y in range(H)]
    return [[ero[y + pad][x + pad] for x in range(w)] for y in range(h)]
