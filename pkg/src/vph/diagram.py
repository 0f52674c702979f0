"""Metrics and measure views on the space of diagram points.

The matching distance is the bottleneck-style infimum over pure bijections
of equal-cardinality multisets under the l-infinity cost; it is infinite
on cardinality mismatch. Binned measures are the finite stand-in for the
normalized diagram measures that the growing-window experiments track.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .homology import VerboseDiagram

INF = math.inf


def d_inf(p: tuple[float, float], q: tuple[float, float]) -> float:
    """l-infinity distance on the extended half-plane.

    Finite for two finite deaths (max coordinate gap) and for two infinite
    deaths (birth gap alone); infinite when exactly one death is infinite.
    """
    pb, pd = p
    qb, qd = q
    if math.isinf(pd) and math.isinf(qd):
        return abs(pb - qb)
    if math.isinf(pd) or math.isinf(qd):
        return INF
    return max(abs(pb - qb), abs(pd - qd))


@dataclass(frozen=True)
class DiagramDistanceReport:
    value: float
    witness: tuple[tuple[int, int], ...] | None = None


def _max_bipartite_matching(adj: list[list[int]], n: int) -> tuple[int, list[int]]:
    """Kuhn's augmenting paths; adj[i] lists right-nodes reachable from i."""
    match_right = [-1] * n
    match_left = [-1] * n

    def try_augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_right[j] == -1 or try_augment(match_right[j], seen):
                    match_right[j] = i
                    match_left[i] = j
                    return True
        return False

    size = 0
    for i in range(n):
        if try_augment(i, [False] * n):
            size += 1
    return size, match_left


def matching_distance(a: VerboseDiagram, b: VerboseDiagram) -> DiagramDistanceReport:
    """Minimal worst displacement over bijections; infinite if sizes differ.

    Binary-searches the sorted multiset of realized pairwise costs, testing
    feasibility with maximum bipartite matching, so the answer is exact.
    """
    if a.q != b.q:
        raise ValueError(f"degree mismatch: {a.q} vs {b.q}")
    n = len(a)
    if n != len(b):
        return DiagramDistanceReport(INF, None)
    if n == 0:
        return DiagramDistanceReport(0.0, ())

    cost = [[d_inf(p, q) for q in b.pairs] for p in a.pairs]
    finite = sorted({c for row in cost for c in row if not math.isinf(c)})

    def feasible(threshold: float):
        adj = [[j for j in range(n) if cost[i][j] <= threshold] for i in range(n)]
        size, match_left = _max_bipartite_matching(adj, n)
        return (size == n), match_left

    if not finite:
        return DiagramDistanceReport(INF, None)
    ok, match = feasible(finite[-1])
    if not ok:
        return DiagramDistanceReport(INF, None)
    lo, hi = 0, len(finite) - 1
    best = match
    while lo < hi:
        mid = (lo + hi) // 2
        ok, match = feasible(finite[mid])
        if ok:
            hi = mid
            best = match
        else:
            lo = mid + 1
    witness = tuple((i, best[i]) for i in range(n))
    return DiagramDistanceReport(finite[lo], witness)


def translate_diagram(vd: VerboseDiagram, v: tuple[float, float]) -> VerboseDiagram:
    """Shift every pair by (t1, t2) with 0 <= t1 <= t2; infinity is absorbing."""
    t1, t2 = v
    if not (0 <= t1 <= t2):
        raise ValueError(f"translation must satisfy 0 <= t1 <= t2, got {v}")
    pairs = tuple((b + t1, d if math.isinf(d) else d + t2) for b, d in vd.pairs)
    return VerboseDiagram(vd.q, pairs, t_max=vd.t_max)


# ---------------------------------------------------------------------------
# Binned empirical measures.
# ---------------------------------------------------------------------------


class BinnedMeasure:
    """Histogram of a diagram over a uniform grid, normalized by volume.

    Finite pairs with both coordinates below L land in half-open square
    bins; finite deaths at or beyond L are tracked in a separate overflow
    row, and infinite deaths in a dedicated infinity row, both keyed by
    birth bin. Mass is counts divided by the normalizer.
    """

    __slots__ = ("L", "h", "nbins", "counts", "finite_overflow", "inf_row",
                 "normalizer", "t_max")

    def __init__(self, L: float, h: float, normalizer: float, t_max: float,
                 counts=None, finite_overflow=None, inf_row=None):
        if h <= 0:
            raise ValueError(f"bin width must be positive, got {h}")
        if normalizer <= 0:
            raise ValueError(f"normalizer must be positive, got {normalizer}")
        nbins = round(L / h)
        if nbins < 1 or abs(nbins * h - L) > 1e-9 * max(1.0, L):
            raise ValueError(f"L={L} must be a positive multiple of h={h}")
        self.L = float(L)
        self.h = float(h)
        self.nbins = nbins
        self.normalizer = float(normalizer)
        self.t_max = float(t_max)
        self.counts = (np.zeros((nbins, nbins)) if counts is None
                       else np.asarray(counts, dtype=float))
        self.finite_overflow = (np.zeros(nbins) if finite_overflow is None
                                else np.asarray(finite_overflow, dtype=float))
        self.inf_row = (np.zeros(nbins) if inf_row is None
                        else np.asarray(inf_row, dtype=float))

    def same_grid(self, other: "BinnedMeasure") -> bool:
        return self.L == other.L and self.h == other.h

    def total_count(self) -> float:
        return float(self.counts.sum() + self.finite_overflow.sum()
                     + self.inf_row.sum())

    def mass(self) -> np.ndarray:
        return self.counts / self.normalizer

    def _birth_bin(self, b: float) -> int:
        return min(int(b // self.h), self.nbins - 1)

    def add_pair(self, b: float, d: float) -> None:
        if math.isinf(d):
            self.inf_row[self._birth_bin(b)] += 1
        elif d >= self.L:
            self.finite_overflow[self._birth_bin(b)] += 1
        else:
            self.counts[int(b // self.h), int(d // self.h)] += 1


def bin_measure(vd: VerboseDiagram, L: float, h: float, volume: float) -> BinnedMeasure:
    """Empirical measure of a diagram on a grid over [0, L]^2, mass / volume."""
    m = BinnedMeasure(L, h, normalizer=volume, t_max=vd.t_max)
    for b, d in vd.pairs:
        m.add_pair(b, d)
    return m


def mean_measure(measures: list[BinnedMeasure]) -> BinnedMeasure:
    """Across-replication average of identically gridded measures."""
    if not measures:
        raise ValueError("need at least one measure")
    first = measures[0]
    for m in measures[1:]:
        if not first.same_grid(m) or m.normalizer != first.normalizer:
            raise ValueError("measures must share grid and normalizer")
    k = len(measures)
    return BinnedMeasure(
        first.L, first.h, first.normalizer, min(m.t_max for m in measures),
        counts=sum(m.counts for m in measures) / k,
        finite_overflow=sum(m.finite_overflow for m in measures) / k,
        inf_row=sum(m.inf_row for m in measures) / k,
    )


def measure_discrepancy(m1: BinnedMeasure, m2: BinnedMeasure,
                        region: tuple[tuple[float, float], tuple[float, float]]) -> float:
    """Sup over bins intersecting a compact rectangle of |mass difference|."""
    if not m1.same_grid(m2):
        raise ValueError("grid mismatch")
    (x0, x1), (y0, y1) = region
    trust = min(m1.t_max, m2.t_max)
    if x1 > trust or y1 > trust:
        raise ValueError(f"region exceeds trusted threshold {trust}")
    if not (0 <= x0 <= x1 and 0 <= y0 <= y1):
        raise ValueError(f"invalid region {region}")
    h, nb = m1.h, m1.nbins
    i0, i1 = int(x0 // h), min(nb - 1, int(math.ceil(x1 / h)) - 1)
    j0, j1 = int(y0 // h), min(nb - 1, int(math.ceil(y1 / h)) - 1)
    if i1 < i0 or j1 < j0:
        return 0.0
    diff = (m1.counts[i0:i1 + 1, j0:j1 + 1] / m1.normalizer
            - m2.counts[i0:i1 + 1, j0:j1 + 1] / m2.normalizer)
    return float(np.abs(diff).max()) if diff.size else 0.0


def total_mass(m: BinnedMeasure) -> float:
    """All counts, overflow and infinity rows included, over the normalizer."""
    return m.total_count() / m.normalizer


# ---------------------------------------------------------------------------
# Serialization: CSV of nonzero bins plus a JSON sidecar with the grid.
# ---------------------------------------------------------------------------


def write_measure_csv(path, m: BinnedMeasure, sidecar_path=None) -> None:
    with open(path, "w", newline="") as f:
        f.write("birth_bin,death_bin,mass\n")
        for i in range(m.nbins):
            for j in range(m.nbins):
                if m.counts[i, j]:
                    f.write(f"{i},{j},{m.counts[i, j] / m.normalizer!r}\n")
        for i in range(m.nbins):
            if m.finite_overflow[i]:
                f.write(f"{i},overflow,{m.finite_overflow[i] / m.normalizer!r}\n")
        for i in range(m.nbins):
            if m.inf_row[i]:
                f.write(f"{i},inf,{m.inf_row[i] / m.normalizer!r}\n")
    if sidecar_path is not None:
        meta = {"L": m.L, "h": m.h, "normalizer": m.normalizer,
                "t_max": "inf" if math.isinf(m.t_max) else m.t_max}
        with open(sidecar_path, "w") as f:
            json.dump(meta, f, sort_keys=True, indent=2)
            f.write("\n")


def read_measure_csv(path, sidecar_path) -> BinnedMeasure:
    with open(sidecar_path) as f:
        meta = json.load(f)
    t_max = INF if meta["t_max"] == "inf" else float(meta["t_max"])
    m = BinnedMeasure(meta["L"], meta["h"], meta["normalizer"], t_max)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    for row in rows[1:]:
        if not row:
            continue
        i = int(row[0])
        mass = float(row[2]) * m.normalizer
        if row[1] == "inf":
            m.inf_row[i] = mass
        elif row[1] == "overflow":
            m.finite_overflow[i] = mass
        else:
            m.counts[i, int(row[1])] = mass
    return m
