"""Filtration functions and construction of filtered simplicial complexes.

A filtration function kappa maps nonempty vertex subsets of a marked point
cloud to [0, inf) and must be monotone under inclusion, invariant under
translations of the coordinates, and regular (two far-apart vertices force
a late value). The sublevel sets of kappa define the filtered complex.

Kappa values are plain Python floats and are compared exactly downstream:
a simplex and a facet with the same kappa produce a zero-lifetime diagram
point, so the evaluation paths here are arranged to return bitwise equal
floats whenever the underlying geometry makes the values equal.
"""

from __future__ import annotations

import itertools
import math
import re
import weakref
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceededError
from .geometry import MarkedPointCloud, min_enclosing_ball, pairwise_distances

DEFAULT_SIMPLEX_BUDGET = 5_000_000


class FiltrationFunction:
    """Base class for filtration functions.

    Subclasses implement ``_compute_pairs`` (the dense matrix of values on
    vertex pairs) and ``_eval`` (values on larger vertex subsets). Results
    on pairs are cached per cloud; clouds are immutable so the cache is
    sound, and it is weakly keyed so it dies with the cloud.
    """

    def __init__(self, name: str, r0: float = 0.0, lipschitz_c: float | None = None,
                 rho=None):
        self.name = name
        self.r0 = float(r0)
        self.lipschitz_c = lipschitz_c
        #: increasing bound with ||x - y|| <= rho(kappa({x, y}))
        self.rho = rho
        self._pair_cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()

    def pair_values(self, cloud: MarkedPointCloud) -> np.ndarray:
        m = self._pair_cache.get(cloud)
        if m is None:
            m = self._compute_pairs(cloud)
            self._pair_cache[cloud] = m
        return m

    def _compute_pairs(self, cloud: MarkedPointCloud) -> np.ndarray:
        raise NotImplementedError

    def _eval(self, cloud: MarkedPointCloud, ids: tuple[int, ...]) -> float:
        raise NotImplementedError

    def __call__(self, cloud: MarkedPointCloud, ids: Iterable[int]) -> float:
        ids = tuple(sorted(set(ids)))
        if not ids:
            raise ValueError("kappa is undefined on the empty set")
        if len(ids) == 1:
            return self._vertex_value(cloud, ids[0])
        if len(ids) == 2:
            return float(self.pair_values(cloud)[ids[0], ids[1]])
        return self._eval(cloud, ids)

    def _vertex_value(self, cloud: MarkedPointCloud, i: int) -> float:
        return 0.0

    def extend_value(self, cloud: MarkedPointCloud, ids: tuple[int, ...],
                     value: float, v: int) -> float:
        """Value of ids + (v,), given the value on ids. Hook for fast paths."""
        return self(cloud, ids + (v,))


class RipsFiltration(FiltrationFunction):
    """Largest pairwise gap between closed balls; diameter when unmarked."""

    def __init__(self, use_marks: bool, r0: float = 0.0):
        name = "rips-marked" if use_marks else "rips"
        r0 = r0 if use_marks else 0.0
        super().__init__(name, r0=r0, lipschitz_c=2.0,
                         rho=lambda t, _r0=r0: t + 2.0 * _r0)
        self.use_marks = use_marks

    def _compute_pairs(self, cloud):
        d = pairwise_distances(cloud.coords_array())
        if self.use_marks:
            r = cloud.marks_array()
            d = d - (r[:, None] + r[None, :])
        m = np.maximum(d, 0.0)
        np.fill_diagonal(m, 0.0)
        return m

    def _eval(self, cloud, ids):
        m = self.pair_values(cloud)
        sub = m[np.ix_(ids, ids)]
        return float(sub.max())

    def extend_value(self, cloud, ids, value, v):
        m = self.pair_values(cloud)
        return float(max(value, m[list(ids), v].max()))


class CechFiltration(FiltrationFunction):
    """Smallest max gap to a witness center; enclosing radius when unmarked.

    Values on simplices of three or more vertices are clamped from below by
    the facet values (a mathematical identity, since the function is
    monotone), which makes monotonicity hold bitwise and keeps the build
    order well defined even when the minimax solve rounds the last ulp.
    """

    def __init__(self, use_marks: bool, r0: float = 0.0):
        name = "cech-marked" if use_marks else "cech"
        r0 = r0 if use_marks else 0.0
        super().__init__(name, r0=r0, lipschitz_c=1.0,
                         rho=lambda t, _r0=r0: 2.0 * t + 2.0 * _r0)
        self.use_marks = use_marks
        self._memo: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()

    def _compute_pairs(self, cloud):
        d = pairwise_distances(cloud.coords_array())
        if self.use_marks:
            r = cloud.marks_array()
            d = 0.5 * d - 0.5 * (r[:, None] + r[None, :])
        else:
            d = 0.5 * d
        m = np.maximum(d, 0.0)
        np.fill_diagonal(m, 0.0)
        return m

    def _eval(self, cloud, ids):
        memo = self._memo.get(cloud)
        if memo is None:
            memo = {}
            self._memo[cloud] = memo
        return self._eval_rec(cloud, ids, memo)

    def _eval_rec(self, cloud, ids, memo):
        val = memo.get(ids)
        if val is not None:
            return val
        if len(ids) == 2:
            val = float(self.pair_values(cloud)[ids[0], ids[1]])
        else:
            val = self._direct(cloud, ids)
            for j in range(len(ids)):
                facet = ids[:j] + ids[j + 1:]
                fv = self._eval_rec(cloud, facet, memo)
                if fv > val:
                    val = fv
        memo[ids] = val
        return val

    def _direct(self, cloud, ids) -> float:
        coords = cloud.coords_array()[list(ids)]
        if not self.use_marks:
            return max(0.0, min_enclosing_ball(coords)[1])
        marks = cloud.marks_array()[list(ids)]
        first = marks[0]
        if np.all(marks == first):
            # equal marks reduce to the unweighted problem
            return max(0.0, min_enclosing_ball(coords)[1] - float(first))
        return max(0.0, _weighted_minimax(coords, marks))


def _objective(coords: np.ndarray, marks: np.ndarray, w: np.ndarray) -> float:
    d = coords - w
    return float((np.sqrt((d * d).sum(axis=1)) - marks).max())


def _tangency_centers(pts: np.ndarray, marks: np.ndarray) -> list[np.ndarray]:
    """Centers w with ||x_s - w|| = t + r_s for every support point.

    The tangency system is linear in (w, t) up to one residual quadratic;
    the one-parameter solution family is intersected with that quadratic.
    """
    k = len(pts)
    if k == 1:
        return [pts[0]]
    p0, r0 = pts[0], marks[0]
    v = pts[1:] - p0  # (k-1, N)
    a = np.hstack([2.0 * (v @ v.T), 2.0 * (marks[1:] - r0)[:, None]])  # (k-1, k)
    b = (v * v).sum(axis=1) - marks[1:] ** 2 + r0 ** 2
    z0, *_ = np.linalg.lstsq(a, b, rcond=None)
    _, _, vh = np.linalg.svd(a)
    # right singular vectors with (numerically) vanishing image span the kernel
    dirs = [u for u in vh if np.linalg.norm(a @ u) <= 1e-9 * max(1.0, np.abs(a).max())]
    if not dirs:
        dirs = [vh[-1]]
    centers = []
    for u in dirs:
        y0, t0 = z0[:-1], z0[-1]
        uy, ut = u[:-1], u[-1]
        avec = v.T @ y0
        bvec = v.T @ uy
        s0 = t0 + r0
        qa = float((bvec * bvec).sum()) - ut * ut
        qb = 2.0 * (float((avec * bvec).sum()) - s0 * ut)
        qc = float((avec * avec).sum()) - s0 * s0
        roots: list[float] = []
        if abs(qa) < 1e-14 * max(1.0, abs(qb), abs(qc)):
            if abs(qb) > 0:
                roots = [-qc / qb]
        else:
            disc = qb * qb - 4.0 * qa * qc
            if disc >= 0.0:
                sq = math.sqrt(disc)
                roots = [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
        for alpha in roots:
            y = y0 + alpha * uy
            centers.append(p0 + v.T @ y)
    return centers


def _weighted_minimax(coords: np.ndarray, marks: np.ndarray) -> float:
    """min over centers w of max_i (||x_i - w|| - r_i), by support enumeration.

    The optimum is attained with an active set of at most N+1 points; each
    candidate center is scored with the true objective, so the returned
    value is exact up to the tangency solve.
    """
    n, dim = coords.shape
    # canonical processing order: sort by (coords, mark)
    order = sorted(range(n), key=lambda i: (tuple(coords[i]), marks[i]))
    coords = coords[order]
    marks = marks[order]
    best = math.inf
    max_support = min(n, dim + 1)
    for size in range(1, max_support + 1):
        for subset in itertools.combinations(range(n), size):
            for w in _tangency_centers(coords[list(subset)], marks[list(subset)]):
                val = _objective(coords, marks, w)
                if val < best:
                    best = val
    return best


class ShiftedFiltration(FiltrationFunction):
    """Adds t to the base value on simplices of dimension above k."""

    def __init__(self, base: FiltrationFunction, k: int, t: float):
        if t < 0:
            raise ValueError(f"shift amount must be nonnegative, got {t}")
        if k < 0:
            raise ValueError(f"shift degree must be nonnegative, got {k}")
        super().__init__(f"shift({base.name},{k},{t!r})", r0=base.r0,
                         lipschitz_c=None, rho=base.rho)
        self.base = base
        self.k = int(k)
        self.t = float(t)

    def _compute_pairs(self, cloud):
        m = self.base.pair_values(cloud)
        if self.k >= 1:
            return m
        return m + self.t

    def _vertex_value(self, cloud, i):
        return self.base._vertex_value(cloud, i)

    def _eval(self, cloud, ids):
        val = self.base(cloud, ids)
        if len(ids) - 1 <= self.k:
            return val
        return val + self.t


def shift_kappa(base: FiltrationFunction, k: int, t: float) -> FiltrationFunction:
    """The t-shift of a filtration function at degree k."""
    return ShiftedFiltration(base, k, t)


_SHIFT_RE = re.compile(r"^shift\(\s*([a-z-]+)\s*,\s*(\d+)\s*,\s*([^,)]+)\)$")


def filtration_by_name(name: str, r0: float = 0.0) -> FiltrationFunction:
    """Resolve `rips | cech | rips-marked | cech-marked | shift(<base>,k,t)`."""
    name = name.strip()
    m = _SHIFT_RE.match(name)
    if m:
        base = filtration_by_name(m.group(1), r0=r0)
        return ShiftedFiltration(base, int(m.group(2)), float(m.group(3)))
    if name == "rips":
        return RipsFiltration(use_marks=False)
    if name == "rips-marked":
        return RipsFiltration(use_marks=True, r0=r0)
    if name == "cech":
        return CechFiltration(use_marks=False)
    if name == "cech-marked":
        return CechFiltration(use_marks=True, r0=r0)
    raise ValueError(f"unknown filtration function {name!r}")


# ---------------------------------------------------------------------------
# Filtered complexes.
# ---------------------------------------------------------------------------


class FilteredComplex:
    """Simplices with kappa values in canonical filtration order.

    The order is (kappa, dim, lexicographic vertex ids): faces always
    precede cofaces, ties included, and the reduction downstream becomes
    deterministic. Entries are (kappa, dim, ids) tuples.
    """

    __slots__ = ("n_vertices", "entries", "t_max", "q_max", "index", "_reductions")

    def __init__(self, n_vertices: int, entries, t_max: float, q_max: int,
                 validate: bool = True):
        self.n_vertices = int(n_vertices)
        self.entries = tuple(sorted(entries))
        self.t_max = float(t_max)
        self.q_max = int(q_max)
        self.index = {ids: pos for pos, (_, _, ids) in enumerate(self.entries)}
        self._reductions: dict = {}
        if validate:
            self._validate()

    def _validate(self):
        prev = -math.inf
        for pos, (kv, dim, ids) in enumerate(self.entries):
            if kv < prev:
                raise ValueError("kappa values decrease along the order")
            prev = kv
            if kv > self.t_max:
                raise ValueError(f"kappa {kv} exceeds t_max {self.t_max}")
            if dim != len(ids) - 1:
                raise ValueError(f"dimension {dim} inconsistent with ids {ids}")
            if dim >= 1:
                for j in range(len(ids)):
                    facet = ids[:j] + ids[j + 1:]
                    fpos = self.index.get(facet)
                    if fpos is None:
                        raise ValueError(f"missing face {facet} of {ids}")
                    if fpos >= pos:
                        raise ValueError(f"face {facet} does not precede {ids}")

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, FilteredComplex):
            return NotImplemented
        return (self.n_vertices == other.n_vertices
                and self.entries == other.entries
                and self.t_max == other.t_max
                and self.q_max == other.q_max)

    def __hash__(self):
        return id(self)

    def kappa_of(self, pos: int) -> float:
        return self.entries[pos][0]

    def dim_of(self, pos: int) -> int:
        return self.entries[pos][1]

    def positions_of_dim(self, dim: int) -> list[int]:
        return [p for p, (_, d, _) in enumerate(self.entries) if d == dim]

    def counts_by_dim(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, d, _ in self.entries:
            out[d] = out.get(d, 0) + 1
        return out


def _full_complex_size(n: int, max_dim: int) -> int:
    total = 0
    for d in range(0, max_dim + 1):
        total += math.comb(n, d + 1)
    return total


def build_filtered_complex(
    x: MarkedPointCloud,
    kappa: FiltrationFunction,
    q_max: int,
    t_max: float = math.inf,
    budget: int = DEFAULT_SIMPLEX_BUDGET,
) -> FilteredComplex:
    """Enumerate all simplices of dimension <= q_max + 1 with kappa <= t_max.

    Candidates are grown by edge-pruned incremental expansion: a simplex is
    examined only when its facet and all connecting edges already passed,
    which is complete because kappa is monotone. Simplicity of the cloud is
    enforced by the MarkedPointCloud constructor.
    """
    if q_max < 0:
        raise ValueError(f"q_max must be nonnegative, got {q_max}")
    n = len(x)
    max_dim = min(q_max + 1, n - 1)
    if math.isinf(t_max):
        running = 0
        for d in range(0, max_dim + 1):
            running += math.comb(n, d + 1)
            if running > budget:
                raise BudgetExceededError(d, budget)

    entries: list[tuple[float, int, tuple[int, ...]]] = []
    vertex_ok = np.zeros(n, dtype=bool)
    for i in range(n):
        kv = kappa(x, (i,))
        if kv <= t_max:
            vertex_ok[i] = True
            entries.append((kv, 0, (i,)))

    if max_dim >= 1:
        m = kappa.pair_values(x)
        iu, ju = np.triu_indices(n, k=1)
        sel = (m[iu, ju] <= t_max) & vertex_ok[iu] & vertex_ok[ju]
        above: list[list[int]] = [[] for _ in range(n)]
        frontier: list[tuple[tuple[int, ...], float]] = []
        for i, j in zip(iu[sel], ju[sel]):
            i, j = int(i), int(j)
            kv = float(m[i, j])
            entries.append((kv, 1, (i, j)))
            above[i].append(j)
            frontier.append(((i, j), kv))
        if len(entries) > budget:
            raise BudgetExceededError(1, budget)
        above_sets = [set(a) for a in above]

        for d in range(2, max_dim + 1):
            new_frontier: list[tuple[tuple[int, ...], float]] = []
            for ids, val in frontier:
                cands = above_sets[ids[0]]
                for u in ids[1:]:
                    cands = cands & above_sets[u]
                    if not cands:
                        break
                for v in sorted(cands):
                    tau = ids + (v,)
                    kv = kappa.extend_value(x, ids, val, v)
                    if kv <= t_max:
                        entries.append((kv, d, tau))
                        new_frontier.append((tau, kv))
                if len(entries) > budget:
                    raise BudgetExceededError(d, budget)
            frontier = new_frontier

    return FilteredComplex(n, entries, t_max=t_max, q_max=q_max)
