"""Shared fixtures and independent oracles for the test suite.

Oracles here deliberately avoid the library's main code paths: Hausdorff
by double loop, enclosing balls by grid refinement, matching distance by
permutation enumeration, complexes by direct subset enumeration.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from vph import MarkedPointCloud


def random_cloud(rng: np.random.Generator, n: int, dim: int = 2,
                 marked: bool = False, r0: float = 0.25,
                 scale: float = 2.0) -> MarkedPointCloud:
    coords = rng.uniform(-scale, scale, size=(n, dim))
    if marked:
        marks = rng.uniform(0.0, r0, size=n)
        return MarkedPointCloud.from_coords(coords, marks, r0=r0)
    return MarkedPointCloud.from_coords(coords)


def hausdorff_oracle(a: MarkedPointCloud, b: MarkedPointCloud) -> float:
    pa = [p.coords for p in a.points]
    pb = [p.coords for p in b.points]

    def directed(src, dst):
        worst = 0.0
        for s in src:
            best = min(math.dist(s, t) for t in dst)
            worst = max(worst, best)
        return worst

    return max(directed(pa, pb), directed(pb, pa))


def meb_oracle(pts, iters: int = 60) -> float:
    """Enclosing-ball radius by shrinking lattice search over centers."""
    pts = np.asarray(pts, dtype=float)
    dim = pts.shape[1]
    center = pts.mean(axis=0)
    span = float(np.abs(pts - center).max()) + 1.0

    def radius_at(c):
        d = pts - c
        return float(np.sqrt((d * d).sum(axis=1)).max())

    best = radius_at(center)
    steps = (-1.0, -0.5, 0.0, 0.5, 1.0)
    lattice = [np.array(o) for o in itertools.product(steps, repeat=dim)]
    for _ in range(400):
        improved = False
        for offset in lattice:
            cand = center + span * offset
            r = radius_at(cand)
            if r < best:
                best, center = r, cand
                improved = True
        if not improved:
            span *= 0.5
            if span < 1e-9:
                break
    return best


def matching_distance_oracle(a_pairs, b_pairs) -> float:
    """Exhaustive minimum over bijections of the worst l-infinity move."""
    from vph import d_inf

    if len(a_pairs) != len(b_pairs):
        return math.inf
    if not a_pairs:
        return 0.0
    best = math.inf
    for perm in itertools.permutations(range(len(b_pairs))):
        worst = max(d_inf(a_pairs[i], b_pairs[perm[i]])
                    for i in range(len(a_pairs)))
        best = min(best, worst)
    return best


def enumerate_complex_oracle(cloud: MarkedPointCloud, kappa, max_dim: int,
                             t_max: float = math.inf):
    """All simplices with kappa <= t_max, by direct subset enumeration."""
    n = len(cloud)
    out = []
    for d in range(0, max_dim + 1):
        for ids in itertools.combinations(range(n), d + 1):
            kv = kappa(cloud, ids)
            if kv <= t_max:
                out.append((kv, d, ids))
    return sorted(out)
