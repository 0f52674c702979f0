"""Boundary-matrix reduction, verbose diagrams, and persistent Betti numbers.

Two independent routes to the same numbers live here on purpose. The
left-to-right column reduction produces the verbose diagram; plain
Gaussian elimination produces cycle/boundary ranks and the rank-based
extended persistent Betti number. Their agreement is the correctness
contract for the diagram.

Coefficients are F2 by default (columns are int bitmasks); any odd prime
field is available behind the same interface.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dataclass_field

from .filtration import FilteredComplex

INF = math.inf


@dataclass(frozen=True)
class VerboseDiagram:
    """Multiset of (birth, death) pairs, zero-lifetime points included.

    Pairs live in {0 <= x <= y <= inf} minus (inf, inf) and are kept
    sorted, so multiset equality is tuple equality. ``t_max`` records the
    truncation threshold of the source complex: deaths reported as inf
    only mean "later than t_max" when t_max is finite.
    """

    q: int
    pairs: tuple[tuple[float, float], ...]
    t_max: float = INF

    def __post_init__(self):
        pairs = tuple(sorted((float(b), float(d)) for b, d in self.pairs))
        for b, d in pairs:
            if not (0.0 <= b <= d):
                raise ValueError(f"({b}, {d}) is not in the ordered half-plane")
            if math.isinf(b):
                raise ValueError("birth must be finite")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class ExtendedPBNQuery:
    """Thresholds (r, s) for a degree-q persistent Betti number; r > s allowed."""

    q: int
    r: float
    s: float

    def __post_init__(self):
        if not (self.r >= 0 and self.s >= 0):
            raise ValueError("thresholds must be nonnegative")
        if math.isinf(self.r) or math.isinf(self.s):
            raise ValueError("thresholds must be finite")


@dataclass(frozen=True)
class BoundaryMatrix:
    """Sparse boundary matrix in filtration order.

    Column j lists the facet positions of simplex j; all listed rows are
    strictly below j because faces precede cofaces. For odd-prime fields
    the parallel ``coefficients`` carry the alternating facet signs.
    """

    field: int
    n_rows: int
    columns: tuple[tuple[int, ...], ...]
    coefficients: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.field != 2 and self.coefficients is None:
            raise ValueError("odd-prime matrices need coefficient lists")
        for j, col in enumerate(self.columns):
            for i in col:
                if i >= j:
                    raise ValueError(f"column {j} references row {i} >= {j}")


@dataclass(frozen=True)
class Reduction:
    """Outcome of the column reduction: per-column pivot rows and the pairing."""

    lows: tuple[int | None, ...]
    pairs: tuple[tuple[int, int], ...]
    paired_rows: frozenset = dataclass_field(default_factory=frozenset)


def boundary_matrix(fc: FilteredComplex, field: int = 2) -> BoundaryMatrix:
    """Global boundary matrix of a filtered complex (one column per simplex)."""
    _check_field(field)
    cols = []
    coeffs = [] if field != 2 else None
    for kv, dim, ids in fc.entries:
        if dim == 0:
            cols.append(())
            if coeffs is not None:
                coeffs.append(())
            continue
        rows = []
        signs = []
        for j in range(len(ids)):
            facet = ids[:j] + ids[j + 1:]
            rows.append(fc.index[facet])
            signs.append(1 if j % 2 == 0 else field - 1)
        order = sorted(range(len(rows)), key=lambda a: rows[a])
        cols.append(tuple(rows[a] for a in order))
        if coeffs is not None:
            coeffs.append(tuple(signs[a] for a in order))
    return BoundaryMatrix(field, len(fc.entries), tuple(cols),
                          tuple(coeffs) if coeffs is not None else None)


def _check_field(field: int) -> None:
    if field == 2:
        return
    if field < 3 or field % 2 == 0 or field >= 2 ** 31:
        raise ValueError(f"field must be 2 or an odd prime below 2^31, got {field}")
    for d in range(3, int(math.isqrt(field)) + 1, 2):
        if field % d == 0:
            raise ValueError(f"{field} is not prime")


def reduce(bm: BoundaryMatrix) -> Reduction:
    """Standard left-to-right column reduction; low is injective on survivors."""
    if bm.field == 2:
        lows = _reduce_f2([_mask(c) for c in bm.columns])
    else:
        cols = []
        for col, cf in zip(bm.columns, bm.coefficients):
            cols.append(dict(zip(col, cf)))
        lows = _reduce_fp(cols, bm.field)
    pairs = tuple((i, j) for j, i in enumerate(lows) if i is not None)
    return Reduction(tuple(lows), pairs, frozenset(i for i, _ in pairs))


def _mask(rows) -> int:
    m = 0
    for r in rows:
        m |= 1 << r
    return m


def _reduce_f2(cols: list[int]) -> list[int | None]:
    lows: list[int | None] = [None] * len(cols)
    pivot_col: dict[int, int] = {}
    for j, col in enumerate(cols):
        while col:
            r = col.bit_length() - 1
            k = pivot_col.get(r)
            if k is None:
                pivot_col[r] = j
                lows[j] = r
                break
            col ^= cols[k]
        cols[j] = col
    return lows


def _reduce_fp(cols: list[dict[int, int]], p: int) -> list[int | None]:
    lows: list[int | None] = [None] * len(cols)
    pivot_col: dict[int, int] = {}
    for j, col in enumerate(cols):
        while col:
            r = max(col)
            k = pivot_col.get(r)
            if k is None:
                pivot_col[r] = j
                lows[j] = r
                break
            other = cols[k]
            factor = (col[r] * pow(other[r], p - 2, p)) % p
            col = _fp_axpy(col, other, (p - factor) % p, p)
        cols[j] = col
    return lows


def _fp_axpy(a: dict[int, int], b: dict[int, int], c: int, p: int) -> dict[int, int]:
    out = dict(a)
    for r, v in b.items():
        nv = (out.get(r, 0) + c * v) % p
        if nv:
            out[r] = nv
        else:
            out.pop(r, None)
    return out


def _reduction_of(fc: FilteredComplex, field: int) -> Reduction:
    red = fc._reductions.get(field)
    if red is None:
        red = reduce(boundary_matrix(fc, field))
        fc._reductions[field] = red
    return red


def verbose_diagram(fc: FilteredComplex, q: int, field: int = 2) -> VerboseDiagram:
    """Degree-q verbose diagram read off the reduction pairing.

    Every (q, q+1) pivot pair contributes (kappa_i, kappa_j), equal values
    included; every q-column that reduces to zero and is never a pivot row
    contributes (kappa_i, inf).
    """
    if not (0 <= q <= fc.q_max):
        raise ValueError(f"degree {q} outside supported range 0..{fc.q_max}")
    red = _reduction_of(fc, field)
    pairs: list[tuple[float, float]] = []
    for i, j in red.pairs:
        if fc.dim_of(j) == q + 1:
            pairs.append((fc.kappa_of(i), fc.kappa_of(j)))
    for pos, (kv, dim, _) in enumerate(fc.entries):
        if dim == q and red.lows[pos] is None and pos not in red.paired_rows:
            pairs.append((kv, INF))
    return VerboseDiagram(q, tuple(pairs), t_max=fc.t_max)


def concise_diagram(vd: VerboseDiagram) -> VerboseDiagram:
    """Sub-multiset of points with strictly positive lifetime."""
    return VerboseDiagram(vd.q, tuple((b, d) for b, d in vd.pairs if d > b),
                          t_max=vd.t_max)


# ---------------------------------------------------------------------------
# Rank oracles: independent Gaussian elimination, not the reduction pairing.
# ---------------------------------------------------------------------------


def _gf2_elim(cols: list[int]) -> tuple[int, list[int]]:
    """Column elimination over F2: rank and null-space combinations.

    Each returned combination is a bitmask over input column indices whose
    XOR of columns vanishes; together they form a null-space basis.
    """
    pivots: dict[int, tuple[int, int]] = {}
    rank = 0
    nulls: list[int] = []
    for idx, col in enumerate(cols):
        combo = 1 << idx
        while col:
            r = col.bit_length() - 1
            entry = pivots.get(r)
            if entry is None:
                pivots[r] = (col, combo)
                rank += 1
                break
            col ^= entry[0]
            combo ^= entry[1]
        else:
            nulls.append(combo)
    return rank, nulls


def _gfp_elim(cols: list[dict[int, int]], p: int) -> tuple[int, list[dict[int, int]]]:
    pivots: dict[int, tuple[dict, dict]] = {}
    rank = 0
    nulls: list[dict[int, int]] = []
    for idx, col in enumerate(cols):
        col = dict(col)
        combo = {idx: 1}
        while col:
            r = max(col)
            entry = pivots.get(r)
            if entry is None:
                pivots[r] = (col, combo)
                rank += 1
                break
            pc, pcombo = entry
            factor = (col[r] * pow(pc[r], p - 2, p)) % p
            col = _fp_axpy(col, pc, (p - factor) % p, p)
            combo = _fp_axpy(combo, pcombo, (p - factor) % p, p)
        else:
            nulls.append(combo)
    return rank, nulls


def _restricted_columns(fc: FilteredComplex, dim: int, t: float, field: int):
    """Boundary columns of dim-simplices with kappa <= t, rows = global positions."""
    out = []
    members = []
    for pos, (kv, d, ids) in enumerate(fc.entries):
        if d != dim or kv > t:
            continue
        members.append(pos)
        if field == 2:
            m = 0
            for j in range(len(ids)):
                facet = ids[:j] + ids[j + 1:]
                m |= 1 << fc.index[facet]
            out.append(m)
        else:
            col = {}
            for j in range(len(ids)):
                facet = ids[:j] + ids[j + 1:]
                col[fc.index[facet]] = 1 if j % 2 == 0 else field - 1
            out.append(col)
    return out, members


def cycle_dim(fc: FilteredComplex, q: int, t: float, field: int = 2) -> int:
    """dim Z_q of the sublevel complex at t, by independent elimination."""
    _check_field(field)
    if t > fc.t_max:
        raise ValueError(f"threshold {t} beyond truncation t_max={fc.t_max}")
    if not (0 <= q <= fc.q_max + 1):
        raise ValueError(f"degree {q} outside enumerated range 0..{fc.q_max + 1}")
    n_q = sum(1 for kv, d, _ in fc.entries if d == q and kv <= t)
    if q == 0:
        return n_q
    cols, _ = _restricted_columns(fc, q, t, field)
    if field == 2:
        rank, _ = _gf2_elim(cols)
    else:
        rank, _ = _gfp_elim(cols, field)
    return n_q - rank


def boundary_dim(fc: FilteredComplex, q: int, t: float, field: int = 2) -> int:
    """dim B_q of the sublevel complex at t (column rank of the next boundary)."""
    _check_field(field)
    if t > fc.t_max:
        raise ValueError(f"threshold {t} beyond truncation t_max={fc.t_max}")
    if not (0 <= q <= fc.q_max):
        raise ValueError(f"degree {q} outside supported range 0..{fc.q_max}")
    cols, _ = _restricted_columns(fc, q + 1, t, field)
    if field == 2:
        rank, _ = _gf2_elim(cols)
    else:
        rank, _ = _gfp_elim(cols, field)
    return rank


def epbn_rank(fc: FilteredComplex, query: ExtendedPBNQuery, field: int = 2) -> int:
    """Extended persistent Betti number via cycle/boundary subspace ranks.

    Computes dim Z_q(K_r) - dim(Z_q(K_r) cap B_q(K_s)); the intersection
    dimension comes from the rank of the concatenated spanning sets.
    """
    _check_field(field)
    q, r, s = query.q, query.r, query.s
    if r > fc.t_max or s > fc.t_max:
        raise ValueError(f"query thresholds beyond t_max={fc.t_max}")
    if not (0 <= q <= fc.q_max):
        raise ValueError(f"degree {q} outside supported range 0..{fc.q_max}")

    # local coordinates: all q-simplices of the complex, in filtration order
    q_positions = [pos for pos, (_, d, _) in enumerate(fc.entries) if d == q]
    local = {pos: a for a, pos in enumerate(q_positions)}

    if field == 2:
        z_basis = _cycle_basis_f2(fc, q, r, local)
        b_gens = _boundary_gens_f2(fc, q, s, local)
        dim_z = len(z_basis)
        dim_b, _ = _gf2_elim(list(b_gens))
        dim_zb, _ = _gf2_elim(list(z_basis) + list(b_gens))
    else:
        z_basis = _cycle_basis_fp(fc, q, r, local, field)
        b_gens = _boundary_gens_fp(fc, q, s, local, field)
        dim_z = len(z_basis)
        dim_b, _ = _gfp_elim(list(b_gens), field)
        dim_zb, _ = _gfp_elim(list(z_basis) + list(b_gens), field)
    dim_intersection = dim_z + dim_b - dim_zb
    return dim_z - dim_intersection


def _cycle_basis_f2(fc, q, r, local) -> list[int]:
    sub = [pos for pos, (kv, d, _) in enumerate(fc.entries) if d == q and kv <= r]
    if q == 0:
        return [1 << local[pos] for pos in sub]
    cols = []
    for pos in sub:
        ids = fc.entries[pos][2]
        m = 0
        for j in range(len(ids)):
            facet = ids[:j] + ids[j + 1:]
            m |= 1 << fc.index[facet]
        cols.append(m)
    _, nulls = _gf2_elim(cols)
    basis = []
    for combo in nulls:
        vec = 0
        k = 0
        while combo:
            if combo & 1:
                vec |= 1 << local[sub[k]]
            combo >>= 1
            k += 1
        basis.append(vec)
    return basis


def _boundary_gens_f2(fc, q, s, local) -> list[int]:
    gens = []
    for kv, d, ids in fc.entries:
        if d != q + 1 or kv > s:
            continue
        vec = 0
        for j in range(len(ids)):
            facet = ids[:j] + ids[j + 1:]
            vec |= 1 << local[fc.index[facet]]
        gens.append(vec)
    return gens


def _cycle_basis_fp(fc, q, r, local, p) -> list[dict[int, int]]:
    sub = [pos for pos, (kv, d, _) in enumerate(fc.entries) if d == q and kv <= r]
    if q == 0:
        return [{local[pos]: 1} for pos in sub]
    cols = []
    for pos in sub:
        ids = fc.entries[pos][2]
        col = {}
        for j in range(len(ids)):
            facet = ids[:j] + ids[j + 1:]
            col[fc.index[facet]] = 1 if j % 2 == 0 else p - 1
        cols.append(col)
    _, nulls = _gfp_elim(cols, p)
    basis = []
    for combo in nulls:
        basis.append({local[sub[k]]: c for k, c in combo.items()})
    return basis


def _boundary_gens_fp(fc, q, s, local, p) -> list[dict[int, int]]:
    gens = []
    for kv, d, ids in fc.entries:
        if d != q + 1 or kv > s:
            continue
        col = {}
        for j in range(len(ids)):
            facet = ids[:j] + ids[j + 1:]
            col[local[fc.index[facet]]] = 1 if j % 2 == 0 else p - 1
        gens.append(col)
    return gens


def epbn_diagram(vd: VerboseDiagram, query: ExtendedPBNQuery) -> int:
    """Extended persistent Betti number as a diagram region count.

    Counts pairs with birth <= r and death > s; infinite deaths count.
    """
    if query.q != vd.q:
        raise ValueError(f"query degree {query.q} does not match diagram {vd.q}")
    if query.r > vd.t_max or query.s > vd.t_max:
        raise ValueError(f"query thresholds beyond diagram t_max={vd.t_max}")
    return sum(1 for b, d in vd.pairs if b <= query.r and d > query.s)


# ---------------------------------------------------------------------------
# Diagram CSV: header q,birth,death; death 'inf' for infinity.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(x)


def write_diagrams_csv(path, diagrams) -> None:
    """Write diagrams (iterable or dict by degree) sorted by (q, birth, death)."""
    if isinstance(diagrams, dict):
        diagrams = [diagrams[q] for q in sorted(diagrams)]
    else:
        diagrams = sorted(diagrams, key=lambda vd: vd.q)
    with open(path, "w", newline="") as f:
        f.write("q,birth,death\n")
        for vd in diagrams:
            for b, d in vd.pairs:
                f.write(f"{vd.q},{_fmt(b)},{_fmt(d)}\n")


def read_diagrams_csv(path, t_max: float = INF) -> dict[int, VerboseDiagram]:
    from .errors import CloudFormatError

    by_q: dict[int, list[tuple[float, float]]] = {}
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or [h.strip() for h in rows[0]] != ["q", "birth", "death"]:
        raise CloudFormatError("diagram CSV must start with header q,birth,death",
                               row=1)
    for rno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise CloudFormatError(f"expected 3 columns, got {len(row)}", row=rno)
        try:
            q = int(row[0])
            b = float(row[1])
            d = float(row[2])
        except ValueError as e:
            raise CloudFormatError(str(e), row=rno) from None
        by_q.setdefault(q, []).append((b, d))
    return {q: VerboseDiagram(q, tuple(pairs), t_max=t_max)
            for q, pairs in by_q.items()}
