"""Seeded point-process samplers and growing-window experiment runners.

Every report is a deterministic function of (config, seed): replication i
in window w draws from an independent substream keyed by (seed, w, i), and
results are aggregated in replication order, so parallel scheduling cannot
change a single output byte.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .diagram import (BinnedMeasure, bin_measure, matching_distance,
                      mean_measure, measure_discrepancy)
from .errors import ConfigError
from .filtration import build_filtered_complex, filtration_by_name
from .geometry import MarkedPointCloud, hausdorff_distance, min_separation
from .homology import ExtendedPBNQuery, cycle_dim, epbn_diagram, verbose_diagram

INF = math.inf

DEFAULT_TOLERANCES = {
    "mass_rel": 0.05,          # q = 0 total-mass relative error
    "growth_fraction": 0.9,    # q >= 1 divergence proxy: share of growing pairs
    "skewness": 0.5,
    "excess_kurtosis": 1.0,
    "variance_ratio": 2.0,     # volume-normalized variance across windows
}


@dataclass(frozen=True)
class WindowSpec:
    """Cubical observation window [-side/2, side/2)^dim."""

    dim: int
    side: float

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError(f"window side must be positive, got {self.side}")
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")

    @property
    def volume(self) -> float:
        return float(self.side) ** self.dim


def substream(seed: int, *indices: int) -> np.random.Generator:
    """Independent generator for one unit of work, keyed by (seed, indices)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, indices)]))


# ---------------------------------------------------------------------------
# Samplers.
# ---------------------------------------------------------------------------


def _dedupe(coords: np.ndarray, resample, rng) -> np.ndarray:
    # exact coordinate collisions have probability zero; guard anyway
    while len({tuple(c) for c in coords}) < len(coords):
        seen: set = set()
        for i in range(len(coords)):
            t = tuple(coords[i])
            while t in seen:
                coords[i] = resample(rng)
                t = tuple(coords[i])
            seen.add(t)
    return coords


def sample_poisson_box(lam: float, w: WindowSpec,
                       rng: np.random.Generator) -> MarkedPointCloud:
    """Homogeneous Poisson sample on the window: count first, then positions."""
    if lam <= 0:
        raise ValueError(f"intensity must be positive, got {lam}")
    count = int(rng.poisson(lam * w.volume))
    half = w.side / 2.0
    coords = rng.uniform(-half, half, size=(count, w.dim))
    coords = _dedupe(coords, lambda g: g.uniform(-half, half, size=w.dim), rng)
    return MarkedPointCloud.from_coords(coords, dim=w.dim)


def sample_marked_poisson(lam: float, r0: float, w: WindowSpec,
                          rng: np.random.Generator) -> MarkedPointCloud:
    """Poisson ground process with i.i.d. uniform [0, r0] marks."""
    if r0 < 0:
        raise ValueError(f"mark bound must be nonnegative, got {r0}")
    ground = sample_poisson_box(lam, w, rng)
    marks = rng.uniform(0.0, r0, size=len(ground)) if r0 > 0 else np.zeros(len(ground))
    return MarkedPointCloud.from_coords(ground.coords_array(), marks, r0=r0,
                                        dim=w.dim)


def _lattice_points(jitter: float, w: WindowSpec, offset: np.ndarray,
                    rng: np.random.Generator) -> np.ndarray:
    half = w.side / 2.0
    lo = math.floor(-half - 1.0)
    hi = math.ceil(half + 1.0)
    axes = [np.arange(lo, hi + 1, dtype=float) for _ in range(w.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, w.dim)
    pts = grid + offset
    if jitter > 0:
        pts = pts + np.array([_uniform_in_ball(w.dim, jitter, rng) for _ in pts])
    keep = np.all((pts >= -half) & (pts < half), axis=1)
    return pts[keep]


def _uniform_in_ball(dim: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.uniform(-radius, radius, size=dim)
        if float((v * v).sum()) <= radius * radius:
            return v


def sample_perturbed_lattice(jitter: float, w: WindowSpec,
                             rng: np.random.Generator) -> MarkedPointCloud:
    """Unit lattice under a global uniform shift, with i.i.d. jitter in a ball.

    The global shift makes the process stationary; it is an auxiliary
    second ergodic process for the growing-window experiments.
    """
    if not (0 <= jitter < 0.5):
        raise ValueError(f"jitter must lie in [0, 1/2), got {jitter}")
    offset = rng.uniform(0.0, 1.0, size=w.dim)
    pts = _lattice_points(jitter, w, offset, rng)
    coords = _dedupe(pts, lambda g: g.uniform(-w.side / 2, w.side / 2, size=w.dim),
                     rng)
    return MarkedPointCloud.from_coords(coords, dim=w.dim)


def sample_process(cfg: "ExperimentConfig", w: WindowSpec,
                   rng: np.random.Generator) -> MarkedPointCloud:
    if cfg.process_kind == "poisson":
        return sample_poisson_box(cfg.intensity, w, rng)
    if cfg.process_kind == "marked-poisson":
        return sample_marked_poisson(cfg.intensity, cfg.r0, w, rng)
    if cfg.process_kind == "perturbed-lattice":
        return sample_perturbed_lattice(cfg.jitter, w, rng)
    raise ConfigError([f"unknown process kind {cfg.process_kind!r}"])


# ---------------------------------------------------------------------------
# Configuration.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    process_kind: str
    intensity: float
    dim: int
    kappa: str
    q: int
    windows: tuple[float, ...]
    replications: int
    seed: int
    t_max: float = INF
    grid_L: float | None = None
    grid_h: float | None = None
    query_r: float | None = None
    query_s: float | None = None
    r0: float = 0.0
    jitter: float = 0.0
    field: int = 2
    epsilon: float | None = None
    max_points: int = 8
    tolerances: dict = dc_field(default_factory=dict)

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def window(self, w_index: int) -> WindowSpec:
        return WindowSpec(self.dim, self.windows[w_index])

    def to_dict(self) -> dict:
        d = {
            "process": {"kind": self.process_kind},
            "dim": self.dim,
            "kappa": self.kappa,
            "q": self.q,
            "windows": list(self.windows),
            "replications": self.replications,
            "seed": self.seed,
            "t_max": "inf" if math.isinf(self.t_max) else self.t_max,
            "field": self.field,
        }
        if self.process_kind in ("poisson", "marked-poisson"):
            d["process"]["intensity"] = self.intensity
        if self.process_kind == "marked-poisson":
            d["process"]["r0"] = self.r0
        if self.process_kind == "perturbed-lattice":
            d["process"]["jitter"] = self.jitter
        if self.grid_L is not None:
            d["grid"] = {"L": self.grid_L, "h": self.grid_h}
        if self.query_r is not None:
            d["query"] = {"r": self.query_r, "s": self.query_s}
        if self.epsilon is not None:
            d["epsilon"] = self.epsilon
            d["max_points"] = self.max_points
        if self.tolerances:
            d["tolerances"] = dict(sorted(self.tolerances.items()))
        return d


def config_from_dict(raw: dict, experiment: str, seed: int | None = None
                     ) -> ExperimentConfig:
    """Validate a JSON config document for the named experiment."""
    problems: list[str] = []

    def need(field, cond, msg):
        if not cond:
            problems.append(f"{field}: {msg}")

    proc = raw.get("process") or {}
    kind = proc.get("kind")
    need("process.kind", kind in ("poisson", "marked-poisson", "perturbed-lattice"),
         f"must be poisson | marked-poisson | perturbed-lattice, got {kind!r}")
    intensity = float(proc.get("intensity", 1.0))
    if kind in ("poisson", "marked-poisson"):
        need("process.intensity", intensity > 0, "must be positive")
    r0 = float(proc.get("r0", 0.0))
    need("process.r0", r0 >= 0, "must be nonnegative")
    jitter = float(proc.get("jitter", 0.0))
    need("process.jitter", 0 <= jitter < 0.5, "must lie in [0, 1/2)")

    dim = raw.get("dim")
    need("dim", isinstance(dim, int) and dim >= 1, "must be an integer >= 1")
    kappa = raw.get("kappa", "")
    try:
        filtration_by_name(kappa, r0=r0)
    except ValueError as e:
        problems.append(f"kappa: {e}")
    q = raw.get("q", 0)
    need("q", isinstance(q, int) and q >= 0, "must be an integer >= 0")

    windows = raw.get("windows") or []
    need("windows", isinstance(windows, list) and len(windows) >= 1
         and all(isinstance(n, (int, float)) and n > 0 for n in windows),
         "must be a nonempty list of positive sides")
    reps = raw.get("replications", 0)
    need("replications", isinstance(reps, int) and reps >= 1,
         "must be an integer >= 1")

    t_raw = raw.get("t_max", "inf")
    t_max = INF if t_raw in ("inf", None) else float(t_raw)
    need("t_max", t_max > 0, "must be positive")

    grid = raw.get("grid")
    grid_L = grid_h = None
    if grid is not None:
        grid_L = float(grid.get("L", 0))
        grid_h = float(grid.get("h", 0))
        need("grid.h", grid_h > 0, "must be positive")
        need("grid.L", grid_L > 0 and grid_h > 0
             and abs(round(grid_L / grid_h) * grid_h - grid_L) <= 1e-9 * max(1, grid_L),
             "must be a positive multiple of h")
        need("t_max", t_max <= grid_L, f"must not exceed grid L={grid_L}")

    query = raw.get("query")
    query_r = query_s = None
    if query is not None:
        query_r = float(query.get("r", -1))
        query_s = float(query.get("s", -1))
        need("query.r", query_r >= 0, "must be nonnegative")
        need("query.s", query_s >= 0, "must be nonnegative")
        need("query", max(query_r, query_s) <= t_max, "thresholds must be <= t_max")

    field = raw.get("field", 2)
    need("field", isinstance(field, int) and (field == 2 or field % 2 == 1),
         "must be 2 or an odd prime")

    epsilon = raw.get("epsilon")
    if epsilon is not None:
        epsilon = float(epsilon)
        need("epsilon", epsilon >= 0, "must be nonnegative")
    max_points = raw.get("max_points", 8)
    need("max_points", isinstance(max_points, int) and max_points >= 2,
         "must be an integer >= 2")

    if seed is None:
        seed = raw.get("seed")
    need("seed", isinstance(seed, int) and seed >= 0,
         "must be a nonnegative integer (config field or --seed)")

    # experiment-specific requirements
    if experiment == "slln":
        need("windows", len(windows) >= 2, "slln needs at least two windows")
        need("replications", isinstance(reps, int) and reps >= 2,
             "slln needs at least two replications")
        need("grid", grid is not None, "slln needs a grid")
        need("t_max", not math.isinf(t_max), "slln needs a finite t_max")
    elif experiment == "mass":
        if isinstance(q, int) and q >= 1:
            need("t_max", math.isinf(t_max),
                 "total-mass at q >= 1 needs the full diagram (t_max = inf)")
    elif experiment == "clt":
        need("query", query is not None, "clt needs a query (r, s)")
        need("t_max", not math.isinf(t_max), "clt needs a finite t_max")
    elif experiment == "support":
        need("kappa", kappa == "cech", "support check requires unmarked cech")
        need("dim", dim == 2, "support check is specified for dimension 2")
        need("t_max", not math.isinf(t_max), "support check needs a finite t_max")
    elif experiment == "stability":
        need("epsilon", epsilon is not None, "stability needs a perturbation radius")
        need("kappa", kappa in ("rips", "cech"),
             "stability is specified for unmarked rips or cech")
    else:
        problems.append(f"experiment: unknown name {experiment!r}")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        process_kind=kind, intensity=intensity, dim=dim, kappa=kappa, q=q,
        windows=tuple(float(n) for n in windows), replications=reps, seed=seed,
        t_max=t_max, grid_L=grid_L, grid_h=grid_h, query_r=query_r,
        query_s=query_s, r0=r0, jitter=jitter, field=field, epsilon=epsilon,
        max_points=max_points, tolerances=dict(raw.get("tolerances") or {}))


# ---------------------------------------------------------------------------
# Reports.
# ---------------------------------------------------------------------------


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    seed: int
    windows: list
    verdicts: list
    warnings: list = dc_field(default_factory=list)
    tables: dict = dc_field(default_factory=dict)
    measures: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v["passed"] is not False for v in self.verdicts)

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "windows": self.windows,
            "verdicts": self.verdicts,
            "warnings": self.warnings,
            "passed": self.passed,
        }


def _verdict(name: str, passed, detail: str) -> dict:
    return {"name": name, "passed": passed, "detail": detail}


def _worker_count() -> int:
    raw = os.environ.get("VPH_THREADS", "")
    if raw == "":
        return 1
    try:
        k = int(raw)
    except ValueError:
        return 1
    if k == 0:
        return os.cpu_count() or 1
    return max(1, k)


def parallel_map(fn, tasks: list) -> list:
    """Order-preserving map over replication tasks, optionally in processes."""
    workers = min(_worker_count(), len(tasks))
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        chunk = max(1, len(tasks) // (4 * workers))
        return list(ex.map(fn, tasks, chunksize=chunk))


def _skewness(x: np.ndarray) -> float:
    m = x.mean()
    s = x.std()
    if s == 0:
        return 0.0
    return float(((x - m) ** 3).mean() / s ** 3)


def _excess_kurtosis(x: np.ndarray) -> float:
    m = x.mean()
    s = x.std()
    if s == 0:
        return 0.0
    return float(((x - m) ** 4).mean() / s ** 4 - 3.0)


# ---------------------------------------------------------------------------
# Experiment runners.
# ---------------------------------------------------------------------------


def _slln_task(args: tuple) -> dict:
    cfg_raw, experiment, w_index, rep = args
    cfg = config_from_dict(cfg_raw, experiment)
    w = cfg.window(w_index)
    rng = substream(cfg.seed, w_index, rep)
    cloud = sample_process(cfg, w, rng)
    if len(cloud) == 0:
        nb = round(cfg.grid_L / cfg.grid_h)
        return {"counts": np.zeros((nb, nb)), "overflow": np.zeros(nb),
                "inf_row": np.zeros(nb), "cardinality": 0}
    kappa = filtration_by_name(cfg.kappa, r0=cfg.r0)
    fc = build_filtered_complex(cloud, kappa, q_max=cfg.q, t_max=cfg.t_max)
    vd = verbose_diagram(fc, cfg.q, field=cfg.field)
    m = bin_measure(vd, cfg.grid_L, cfg.grid_h, volume=w.volume)
    return {"counts": m.counts, "overflow": m.finite_overflow,
            "inf_row": m.inf_row, "cardinality": len(vd)}


def run_slln(config: ExperimentConfig) -> ExperimentReport:
    """Concentration of normalized diagram measures as the window grows.

    For each window: per-replication binned measures, discrepancies between
    disjoint replicate pairs (a concentration proxy), and discrepancies
    between consecutive mean measures. The verdict that the replicate-pair
    median shrinks from the smallest to the largest window is a heuristic;
    the limit statement itself fixes no rate.
    """
    cfg_raw = config.to_dict()
    region = ((0.0, config.t_max), (0.0, config.t_max))
    windows_out = []
    per_window_measures = []
    medians = []
    pair_rows = []
    for w_index, side in enumerate(config.windows):
        tasks = [(cfg_raw, "slln", w_index, rep)
                 for rep in range(config.replications)]
        results = parallel_map(_slln_task, tasks)
        vol = config.window(w_index).volume
        ms = [BinnedMeasure(config.grid_L, config.grid_h, vol, config.t_max,
                            counts=r["counts"], finite_overflow=r["overflow"],
                            inf_row=r["inf_row"]) for r in results]
        discrepancies = []
        for k in range(0, len(ms) - 1, 2):
            d = measure_discrepancy(ms[k], ms[k + 1], region)
            discrepancies.append(d)
            pair_rows.append([side, k // 2, repr(d)])
        med = float(np.median(discrepancies)) if discrepancies else INF
        medians.append(med)
        mm = mean_measure(ms)
        per_window_measures.append(mm)
        windows_out.append({
            "side": side,
            "replications": config.replications,
            "pair_discrepancies": discrepancies,
            "median_pair_discrepancy": med,
            "mean_cardinality": float(np.mean([r["cardinality"] for r in results])),
        })
    for k in range(1, len(per_window_measures)):
        windows_out[k]["mean_discrepancy_from_previous"] = measure_discrepancy(
            per_window_measures[k - 1], per_window_measures[k], region)
    verdicts = [_verdict(
        "replicate-concentration-improves",
        medians[-1] < medians[0],
        f"median pair discrepancy {medians[-1]:.6g} at n={config.windows[-1]:g} vs "
        f"{medians[0]:.6g} at n={config.windows[0]:g} (heuristic: no rate is implied)")]
    report = ExperimentReport("slln", cfg_raw, config.seed, windows_out, verdicts)
    for w_index, mm in enumerate(per_window_measures):
        report.measures[f"mean_n{config.windows[w_index]:g}"] = mm
    report.tables["pair_discrepancies"] = (
        ["side", "pair", "discrepancy"], pair_rows)
    return report


def _mass_task(args: tuple) -> dict:
    cfg_raw, experiment, w_index, rep = args
    cfg = config_from_dict(cfg_raw, experiment)
    w = cfg.window(w_index)
    rng = substream(cfg.seed, w_index, rep)
    cloud = sample_process(cfg, w, rng)
    if cfg.q == 0:
        # every vertex opens a class, so the count is the cloud size
        count = len(cloud)
    elif len(cloud) <= cfg.q:
        count = 0
    else:
        kappa = filtration_by_name(cfg.kappa, r0=cfg.r0)
        fc = build_filtered_complex(cloud, kappa, q_max=cfg.q - 1, t_max=cfg.t_max)
        count = cycle_dim(fc, cfg.q, cfg.t_max, field=cfg.field)
    return {"count": count, "statistic": count / w.volume}


def run_total_mass(config: ExperimentConfig) -> ExperimentReport:
    """Normalized diagram cardinality per window.

    At q = 0 the statistic is exactly the point count over the volume and
    should settle at the process intensity; at q >= 1 it must grow with the
    window, which is checked on per-replication pairs between the smallest
    and largest window.
    """
    cfg_raw = config.to_dict()
    windows_out = []
    stats_rows = []
    per_window_stats = []
    for w_index, side in enumerate(config.windows):
        tasks = [(cfg_raw, "mass", w_index, rep)
                 for rep in range(config.replications)]
        results = parallel_map(_mass_task, tasks)
        stats = np.array([r["statistic"] for r in results])
        per_window_stats.append(stats)
        for rep, r in enumerate(results):
            stats_rows.append([side, rep, r["count"], repr(r["statistic"])])
        windows_out.append({
            "side": side,
            "replications": config.replications,
            "mean_statistic": float(stats.mean()),
            "sd_statistic": float(stats.std(ddof=1)) if len(stats) > 1 else 0.0,
        })
    intensity = 1.0 if config.process_kind == "perturbed-lattice" else config.intensity
    verdicts = []
    if config.q == 0:
        mean_last = windows_out[-1]["mean_statistic"]
        rel = abs(mean_last - intensity) / intensity
        verdicts.append(_verdict(
            "mass-matches-intensity",
            rel <= config.tol("mass_rel"),
            f"mean statistic {mean_last:.6g} vs intensity {intensity} "
            f"(relative error {rel:.4f}, tolerance {config.tol('mass_rel')})"))
    else:
        grew = int(np.sum(per_window_stats[-1] > per_window_stats[0]))
        frac = grew / config.replications
        verdicts.append(_verdict(
            "mass-diverges-with-window",
            frac >= config.tol("growth_fraction"),
            f"statistic grew from n={config.windows[0]} to n={config.windows[-1]} "
            f"in {grew}/{config.replications} replications "
            f"(needed fraction {config.tol('growth_fraction')})"))
    report = ExperimentReport("mass", cfg_raw, config.seed, windows_out, verdicts)
    report.tables["statistics"] = (
        ["side", "replication", "count", "statistic"], stats_rows)
    return report


def _clt_task(args: tuple) -> dict:
    cfg_raw, experiment, w_index, rep = args
    cfg = config_from_dict(cfg_raw, experiment)
    w = cfg.window(w_index)
    rng = substream(cfg.seed, w_index, rep)
    cloud = sample_process(cfg, w, rng)
    if len(cloud) == 0:
        return {"beta": 0}
    kappa = filtration_by_name(cfg.kappa, r0=cfg.r0)
    fc = build_filtered_complex(cloud, kappa, q_max=cfg.q, t_max=cfg.t_max)
    vd = verbose_diagram(fc, cfg.q, field=cfg.field)
    beta = epbn_diagram(vd, ExtendedPBNQuery(cfg.q, cfg.query_r, cfg.query_s))
    return {"beta": beta}


def run_clt(config: ExperimentConfig) -> ExperimentReport:
    """Normality proxy for the extended persistent Betti number.

    Reports the standardized sample, its skewness and excess kurtosis per
    window, and the volume-normalized variance across windows. The theorem
    hypothesis is a unit-intensity Poisson process; other intensities run
    flagged.
    """
    cfg_raw = config.to_dict()
    warnings = []
    if config.process_kind != "poisson" or config.intensity != 1.0:
        warnings.append("clt hypothesis wants a unit-intensity Poisson process; "
                        "run proceeds flagged")
    windows_out = []
    beta_rows = []
    var_per_vol = []
    verdicts = []
    for w_index, side in enumerate(config.windows):
        tasks = [(cfg_raw, "clt", w_index, rep)
                 for rep in range(config.replications)]
        results = parallel_map(_clt_task, tasks)
        betas = np.array([r["beta"] for r in results], dtype=float)
        for rep, b in enumerate(betas):
            beta_rows.append([side, rep, int(b)])
        mean = float(betas.mean())
        sd = float(betas.std(ddof=1)) if len(betas) > 1 else 0.0
        var = sd * sd
        entry = {
            "side": side,
            "replications": config.replications,
            "mean_beta": mean,
            "variance": var,
            "variance_per_volume": var / config.window(w_index).volume,
        }
        if sd == 0:
            entry["inconclusive"] = True
            verdicts.append(_verdict(
                f"clt-shape-n{side:g}", None,
                "degenerate sample (sd = 0); inconclusive, not a failure"))
        else:
            std_sample = (betas - mean) / sd
            skew = _skewness(std_sample)
            kurt = _excess_kurtosis(std_sample)
            entry["skewness"] = skew
            entry["excess_kurtosis"] = kurt
            ok = (abs(skew) < config.tol("skewness")
                  and abs(kurt) < config.tol("excess_kurtosis"))
            verdicts.append(_verdict(
                f"clt-shape-n{side:g}", ok,
                f"|skewness| = {abs(skew):.4f} (< {config.tol('skewness')}), "
                f"|excess kurtosis| = {abs(kurt):.4f} "
                f"(< {config.tol('excess_kurtosis')})"))
        var_per_vol.append(entry["variance_per_volume"])
        windows_out.append(entry)
    if len(config.windows) >= 2:
        lo, hi = var_per_vol[0], var_per_vol[-1]
        if lo == 0 or hi == 0:
            verdicts.append(_verdict("clt-variance-scaling", None,
                                     "degenerate variance; inconclusive"))
        else:
            ratio = max(lo, hi) / min(lo, hi)
            verdicts.append(_verdict(
                "clt-variance-scaling",
                ratio <= config.tol("variance_ratio"),
                f"variance/volume ratio across windows {ratio:.4f} "
                f"(tolerance {config.tol('variance_ratio')})"))
    report = ExperimentReport("clt", cfg_raw, config.seed, windows_out, verdicts,
                              warnings=warnings)
    report.tables["betas"] = (["side", "replication", "beta"], beta_rows)
    return report


def _support_task(args: tuple) -> dict:
    cfg_raw, experiment, w_index, rep = args
    cfg = config_from_dict(cfg_raw, experiment)
    w = cfg.window(w_index)
    rng = substream(cfg.seed, w_index, rep)
    cloud = sample_process(cfg, w, rng)
    out = {"n_points": len(cloud), "q0_nonzero_births": 0,
           "top_offdiagonal": 0, "q1_diagonal": 0, "q1_offdiagonal": 0}
    if len(cloud) == 0:
        return out
    kappa = filtration_by_name(cfg.kappa, r0=cfg.r0)
    n_dim = cfg.dim
    fc = build_filtered_complex(cloud, kappa, q_max=n_dim, t_max=cfg.t_max)
    d0 = verbose_diagram(fc, 0, field=cfg.field)
    out["q0_nonzero_births"] = sum(1 for b, _ in d0.pairs if b != 0.0)
    if n_dim >= 1 and len(cloud) > n_dim:
        dtop = verbose_diagram(fc, n_dim, field=cfg.field)
        out["top_offdiagonal"] = sum(1 for b, d in dtop.pairs if d != b)
    if n_dim >= 2:
        d1 = verbose_diagram(fc, 1, field=cfg.field)
        out["q1_diagonal"] = sum(1 for b, d in d1.pairs if d == b)
        out["q1_offdiagonal"] = sum(1 for b, d in d1.pairs if d > b)
    return out


def run_support_check(config: ExperimentConfig) -> ExperimentReport:
    """Realizable-set geometry of sampled diagrams for the plain cech filtration.

    Degree 0 points sit on the birth = 0 axis exactly; degree N points sit
    on the diagonal exactly; degree 1 should populate both the diagonal and
    the open region above it.
    """
    cfg_raw = config.to_dict()
    windows_out = []
    tot = {"q0_nonzero_births": 0, "top_offdiagonal": 0,
           "q1_diagonal": 0, "q1_offdiagonal": 0}
    for w_index, side in enumerate(config.windows):
        tasks = [(cfg_raw, "support", w_index, rep)
                 for rep in range(config.replications)]
        results = parallel_map(_support_task, tasks)
        agg = {k: int(np.sum([r[k] for r in results])) for k in tot}
        for k in tot:
            tot[k] += agg[k]
        windows_out.append({"side": side, "replications": config.replications,
                            **agg,
                            "mean_points": float(np.mean([r["n_points"]
                                                          for r in results]))})
    verdicts = [
        _verdict("degree-0-births-are-zero", tot["q0_nonzero_births"] == 0,
                 f"{tot['q0_nonzero_births']} nonzero degree-0 births observed"),
        _verdict("top-degree-on-diagonal", tot["top_offdiagonal"] == 0,
                 f"{tot['top_offdiagonal']} off-diagonal degree-{config.dim} "
                 "points observed"),
        _verdict("degree-1-populates-both",
                 tot["q1_diagonal"] >= 1 and tot["q1_offdiagonal"] >= 1,
                 f"degree-1 diagonal points: {tot['q1_diagonal']}, "
                 f"off-diagonal: {tot['q1_offdiagonal']}"),
    ]
    return ExperimentReport("support", cfg_raw, config.seed, windows_out, verdicts)


def _stability_task(args: tuple) -> dict:
    cfg_raw, experiment, w_index, trial = args
    cfg = config_from_dict(cfg_raw, experiment)
    w = cfg.window(w_index)
    rng = substream(cfg.seed, w_index, trial)
    # condition the sample on a workable size; the continuity bound is a
    # per-cloud statement, so reshaping the size distribution is harmless
    cloud = sample_process(cfg, w, rng)
    attempts = 0
    while not (2 <= len(cloud) <= cfg.max_points):
        cloud = sample_process(cfg, w, rng)
        attempts += 1
        if attempts > 1000:
            raise RuntimeError("could not draw a cloud of workable size")
    delta = min_separation(cloud) / 2.0
    eps = cfg.epsilon
    if eps >= delta:
        return {"skipped": True}
    coords = cloud.coords_array()
    if eps > 0:
        jolt = np.array([_uniform_in_ball(cfg.dim, eps, rng)
                         for _ in range(len(cloud))])
        coords = coords + jolt
    perturbed = MarkedPointCloud.from_coords(coords, dim=cfg.dim)
    dh = hausdorff_distance(cloud, perturbed)
    kappa = filtration_by_name(cfg.kappa, r0=0.0)
    c_kappa = kappa.lipschitz_c
    fc_a = build_filtered_complex(cloud, kappa, q_max=2)
    kappa_b = filtration_by_name(cfg.kappa, r0=0.0)
    fc_b = build_filtered_complex(perturbed, kappa_b, q_max=2)
    out = {"skipped": False, "d_h": dh, "n_points": len(cloud), "per_q": []}
    for q in range(3):
        da = verbose_diagram(fc_a, q, field=cfg.field)
        db = verbose_diagram(fc_b, q, field=cfg.field)
        rep = matching_distance(da, db)
        ratio = 0.0 if dh == 0 else (rep.value / dh if math.isfinite(rep.value)
                                     else INF)
        out["per_q"].append({
            "q": q, "d_m": rep.value,
            "violation": bool(rep.value > c_kappa * dh),
            "finite": bool(math.isfinite(rep.value)),
            "ratio": ratio,
        })
    return out


def run_stability(config: ExperimentConfig) -> ExperimentReport:
    """Matching-distance continuity under small perturbations.

    Each trial perturbs every point inside a ball of radius epsilon; trials
    where epsilon reaches half the minimum separation are skipped and
    counted. Asserts d_M <= c_kappa * d_H for degrees up to 2.
    """
    cfg_raw = config.to_dict()
    kappa = filtration_by_name(config.kappa)
    c_kappa = kappa.lipschitz_c
    tasks = [(cfg_raw, "stability", 0, trial)
             for trial in range(config.replications)]
    results = parallel_map(_stability_task, tasks)
    skipped = sum(1 for r in results if r["skipped"])
    used = [r for r in results if not r["skipped"]]
    violations = sum(1 for r in used for pq in r["per_q"] if pq["violation"])
    infinite = sum(1 for r in used for pq in r["per_q"] if not pq["finite"])
    max_ratio = max((pq["ratio"] for r in used for pq in r["per_q"]), default=0.0)
    rows = []
    for t, r in enumerate(used):
        for pq in r["per_q"]:
            rows.append([t, pq["q"], repr(r["d_h"]),
                         "inf" if math.isinf(pq["d_m"]) else repr(pq["d_m"]),
                         repr(pq["ratio"]) if math.isfinite(pq["ratio"]) else "inf"])
    windows_out = [{
        "side": config.windows[0],
        "trials": config.replications,
        "skipped": skipped,
        "used": len(used),
        "max_ratio": max_ratio,
        "lipschitz_c": c_kappa,
    }]
    verdicts = [
        _verdict("matching-distance-bounded", violations == 0,
                 f"{violations} violations of d_M <= {c_kappa} * d_H over "
                 f"{len(used)} trials (max ratio {max_ratio:.6g})"),
        _verdict("cardinality-preserved", infinite == 0,
                 f"{infinite} trials produced an infinite matching distance"),
    ]
    report = ExperimentReport("stability", cfg_raw, config.seed, windows_out,
                              verdicts)
    report.tables["trials"] = (["trial", "q", "d_h", "d_m", "ratio"], rows)
    return report


RUNNERS = {
    "slln": run_slln,
    "mass": run_total_mass,
    "clt": run_clt,
    "support": run_support_check,
    "stability": run_stability,
}


def run_experiment(name: str, config: ExperimentConfig) -> ExperimentReport:
    if name not in RUNNERS:
        raise ConfigError([f"experiment: unknown name {name!r}"])
    return RUNNERS[name](config)
