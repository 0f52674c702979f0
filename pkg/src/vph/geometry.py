"""Point clouds, Euclidean/Hausdorff distances, and smallest enclosing balls.

Everything here is mark-agnostic: marks ride along on the points but never
enter a distance computation. Filtration functions are the only consumers
of marks.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CloudFormatError

# Absolute tolerance for geometry-internal float comparisons. Never used
# for kappa-value comparisons downstream; those are exact.
GEOM_TOL = 1e-9

# Seed of the internal permutation used by the enclosing-ball search.
_WELZL_SEED = 0x5EB1

# Inputs above this size get move-to-front reordering during the ball scan.
_MTF_THRESHOLD = 64


@dataclass(frozen=True)
class MarkedPoint:
    """A point of R^N with a nonnegative mark (radius)."""

    coords: tuple[float, ...]
    mark: float = 0.0

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ValueError("point must have at least one coordinate")
        if self.mark < 0:
            raise ValueError(f"mark must be nonnegative, got {self.mark}")


class MarkedPointCloud:
    """A finite simple set of marked points sharing one ambient dimension.

    Simple means the coordinate tuples are pairwise distinct; marks may
    repeat. Instances are immutable and hashable by identity, which lets
    filtration functions cache per-cloud work.
    """

    __slots__ = ("points", "dim", "r0", "_coords", "_marks", "__weakref__")

    def __init__(self, points: Sequence[MarkedPoint], r0: float | None = None,
                 dim: int | None = None):
        points = tuple(points)
        if not points:
            if dim is None:
                raise ValueError("an empty cloud needs an explicit dimension")
            self.points = points
            self.dim = int(dim)
            self.r0 = float(r0) if r0 is not None else 0.0
            self._coords = None
            self._marks = None
            return
        dim = len(points[0].coords)
        seen: set[tuple[float, ...]] = set()
        max_mark = 0.0
        for p in points:
            if len(p.coords) != dim:
                raise ValueError(
                    f"all points must share dimension {dim}, got {len(p.coords)}"
                )
            if p.coords in seen:
                raise ValueError(f"duplicate coordinates {p.coords}: cloud not simple")
            seen.add(p.coords)
            max_mark = max(max_mark, p.mark)
        if r0 is None:
            r0 = max_mark
        elif max_mark > r0:
            raise ValueError(f"mark {max_mark} exceeds bound r0={r0}")
        self.points = points
        self.dim = dim
        self.r0 = float(r0)
        self._coords: np.ndarray | None = None
        self._marks: np.ndarray | None = None

    @classmethod
    def from_coords(
        cls,
        coords: Iterable[Sequence[float]],
        marks: Iterable[float] | None = None,
        r0: float | None = None,
        dim: int | None = None,
    ) -> "MarkedPointCloud":
        coords = [tuple(float(c) for c in row) for row in coords]
        if marks is None:
            marks = [0.0] * len(coords)
        else:
            marks = [float(m) for m in marks]
        if len(marks) != len(coords):
            raise ValueError("coords and marks must have equal length")
        return cls([MarkedPoint(c, m) for c, m in zip(coords, marks)], r0=r0, dim=dim)

    def __len__(self) -> int:
        return len(self.points)

    def coords_array(self) -> np.ndarray:
        """(n, N) float64 view of the coordinates."""
        if self._coords is None:
            self._coords = np.array([p.coords for p in self.points],
                                    dtype=np.float64).reshape(len(self.points),
                                                              self.dim)
        return self._coords

    def marks_array(self) -> np.ndarray:
        if self._marks is None:
            self._marks = np.array([p.mark for p in self.points], dtype=np.float64)
        return self._marks

    def permuted(self, order: Sequence[int]) -> "MarkedPointCloud":
        """Cloud with the same points listed in a different order."""
        return MarkedPointCloud([self.points[i] for i in order], r0=self.r0)

    def translated(self, offset: Sequence[float]) -> "MarkedPointCloud":
        off = tuple(float(x) for x in offset)
        pts = [
            MarkedPoint(tuple(c + o for c, o in zip(p.coords, off)), p.mark)
            for p in self.points
        ]
        return MarkedPointCloud(pts, r0=self.r0)


def pairwise_distances(coords: np.ndarray) -> np.ndarray:
    """Dense symmetric matrix of Euclidean distances."""
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def hausdorff_distance(a: MarkedPointCloud, b: MarkedPointCloud) -> float:
    """Hausdorff distance between the coordinate projections (marks ignored)."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    xa, xb = a.coords_array(), b.coords_array()
    diff = xa[:, None, :] - xb[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=-1))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def min_separation(x: MarkedPointCloud) -> float:
    """Minimum pairwise distance of the coordinate projections."""
    if len(x) < 2:
        raise ValueError("min_separation needs at least two points")
    d = pairwise_distances(x.coords_array())
    n = len(x)
    return float(d[np.triu_indices(n, k=1)].min())


# ---------------------------------------------------------------------------
# Smallest enclosing ball (Welzl).
# ---------------------------------------------------------------------------


def _ball_from_support(support: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Smallest ball with every support point on its boundary.

    The support list is canonicalized (sorted lexicographically) before
    solving, so the result is a pure function of the support *set*. That
    keeps kappa values of face/coface simplices bitwise equal whenever
    their enclosing balls share a support set.
    """
    pts = sorted((tuple(p) for p in support))
    k = len(pts)
    if k == 1:
        return np.array(pts[0]), 0.0
    p0 = np.array(pts[0])
    if k == 2:
        p1 = np.array(pts[1])
        d = p1 - p0
        center = (p0 + p1) * 0.5
        return center, float(np.sqrt((d * d).sum())) * 0.5
    v = np.array(pts[1:]) - p0  # (k-1, N)
    gram = 2.0 * (v @ v.T)
    rhs = (v * v).sum(axis=1)
    try:
        y = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        y, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    center = p0 + v.T @ y
    radius = 0.0
    for p in pts:
        d = np.array(p) - center
        radius = max(radius, float(np.sqrt((d * d).sum())))
    return center, radius


def _in_ball(p: np.ndarray, center: np.ndarray, radius: float) -> bool:
    d = p - center
    return float(np.sqrt((d * d).sum())) <= radius + 1e-12 * (1.0 + radius)


def _mb_scan(pts: list[np.ndarray], boundary: list[np.ndarray], dim: int, mtf: bool):
    """Welzl scan: smallest ball of ``pts`` with ``boundary`` on the sphere.

    Recursion depth is bounded by the support size (at most N+2 frames),
    not the input size; move-to-front keeps rescans short on big inputs.
    """
    if len(boundary) == dim + 1:
        return _ball_from_support(boundary)
    ball = _ball_from_support(boundary) if boundary else None
    i = 0
    while i < len(pts):
        p = pts[i]
        if ball is None or not _in_ball(p, ball[0], ball[1]):
            ball = _mb_scan(pts[:i], boundary + [p], dim, mtf)
            if mtf and i > 0:
                pts.insert(0, pts.pop(i))
        i += 1
    return ball


def min_enclosing_ball(pts: Iterable[Sequence[float]]) -> tuple[np.ndarray, float]:
    """Center and radius of the smallest ball containing all points.

    Deterministic: the internal shuffle uses a fixed seed, so repeated
    calls on the same input list return bitwise identical results.
    """
    arr = np.asarray(list(pts), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("min_enclosing_ball needs at least one point")
    if arr.ndim == 1:
        arr = arr[None, :]
    work = [arr[i] for i in range(arr.shape[0])]
    random.Random(_WELZL_SEED).shuffle(work)
    center, radius = _mb_scan(work, [], arr.shape[1], mtf=len(work) > _MTF_THRESHOLD)
    return center, radius


def min_enclosing_ball_radius(pts: Iterable[Sequence[float]]) -> float:
    return min_enclosing_ball(pts)[1]


# ---------------------------------------------------------------------------
# CSV interface: one row per point, header x1..xN[,mark].
# ---------------------------------------------------------------------------


def read_cloud_csv(path) -> MarkedPointCloud:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise CloudFormatError("empty cloud file", row=0)
    header = [h.strip() for h in rows[0]]
    has_mark = header and header[-1] == "mark"
    ncols = len(header) - (1 if has_mark else 0)
    expected = [f"x{i + 1}" for i in range(ncols)]
    if ncols < 1 or header[:ncols] != expected:
        raise CloudFormatError(
            f"header must be x1..xN[,mark], got {','.join(header)}", row=1
        )
    coords, marks = [], []
    for rno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CloudFormatError(
                f"expected {len(header)} columns, got {len(row)}", row=rno
            )
        try:
            vals = [float(c) for c in row]
        except ValueError as e:
            raise CloudFormatError(str(e), row=rno) from None
        coords.append(tuple(vals[:ncols]))
        marks.append(vals[ncols] if has_mark else 0.0)
    if not coords:
        raise CloudFormatError("cloud file contains no points", row=len(rows))
    try:
        return MarkedPointCloud.from_coords(coords, marks)
    except ValueError as e:
        raise CloudFormatError(str(e)) from None


def write_cloud_csv(path, cloud: MarkedPointCloud) -> None:
    has_mark = any(p.mark != 0.0 for p in cloud.points) or cloud.r0 > 0
    with open(path, "w", newline="") as f:
        header = [f"x{i + 1}" for i in range(cloud.dim)]
        if has_mark:
            header.append("mark")
        f.write(",".join(header) + "\n")
        for p in cloud.points:
            cells = [repr(c) for c in p.coords]
            if has_mark:
                cells.append(repr(p.mark))
            f.write(",".join(cells) + "\n")


def diameter(coords: np.ndarray) -> float:
    if coords.shape[0] < 2:
        return 0.0
    return float(pairwise_distances(coords).max())


def _euclidean(p: Sequence[float], q: Sequence[float]) -> float:
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))
