"""Monte Carlo campaigns over random geometric graphs.

Every campaign draws each trial from its own RNG substream derived from
the master seed and the trial index, so results are independent of
execution order and of the thread count; reruns with the same
configuration are byte-identical.  Trials whose sample is degenerate
(fewer than two points) are redrawn from the next substream and counted
in a separate column rather than discarded silently.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import _kernels
from .analysis import is_connected, is_s_connected
from .knn import NeighborGraph, build_knn, longest_edge, restrict_k
from .local_events import (
    BoxSpec,
    confined_components,
    confined_dense_tiles,
    make_box,
    reflected_cap_empty,
)
from .points import PointSet, Region, sample_poisson
from .rng import derive_key

Z95 = 1.959963984540054  # two-sided 95% normal quantile


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion at 95% confidence.

    Center (p + z^2/2n) / (1 + z^2/n), half-width
    z * sqrt(p(1-p)/n + z^2/4n^2) / (1 + z^2/n).  Behaves sensibly at
    p = 0 and p = 1, where the threshold tails live.
    """
    if not (isinstance(trials, (int, np.integer)) and trials >= 1):
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    if not (isinstance(successes, (int, np.integer)) and 0 <= successes <= trials):
        raise ValueError(f"successes must lie in [0, {trials}], got {successes!r}")
    z2 = Z95 * Z95
    p = successes / trials
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    # the exact interval brackets p; snap away rounding dust so callers
    # can rely on lo <= p <= hi
    return (max(0.0, min(center - half, p)), min(1.0, max(center + half, p)))


@dataclass(frozen=True)
class EstimateResult:
    """Binomial estimate with its Wilson 95% interval and provenance."""

    successes: int
    trials: int
    degenerate: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    wall_time: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.ci_lo <= self.p_hat <= self.ci_hi <= 1.0:
            raise AssertionError("estimate interval must bracket the point estimate")


def _estimate(successes: int, trials: int, degenerate: int, wall: float, seed: int) -> EstimateResult:
    lo, hi = wilson_interval(successes, trials)
    return EstimateResult(successes, trials, degenerate, successes / trials, lo, hi, wall, seed)


def _require_scale(n) -> float:
    if isinstance(n, bool) or not (np.isreal(n) and math.isfinite(float(n)) and float(n) > 1.0):
        raise ValueError(f"n must be a finite real > 1, got {n!r}")
    return float(n)


def _require_int(name: str, v, lo: int) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
        raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")
    return int(v)


def _map_trials(fn, trials: int, threads: int) -> list:
    """Evaluate fn(0..trials-1), in index order, optionally in parallel.

    Aggregation downstream must treat the list as ordered by trial
    index; with that, any thread count yields identical results.
    """
    if threads <= 1:
        return [fn(t) for t in range(trials)]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, trials // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(trials), chunksize=chunk))


def _resampled_pointset(region: Region, intensity: float, master_seed: int, trial: int) -> tuple[PointSet, int]:
    """Poisson sample for one trial, redrawn until it has >= 2 points.

    Redraw r uses the substream (master, trial, r); the number of
    redraws is returned for the degenerate column.
    """
    base = derive_key(master_seed, trial)
    attempt = 0
    while True:
        ps = sample_poisson(region, intensity, derive_key(base, attempt))
        if len(ps) >= 2:
            return ps, attempt
        attempt += 1


# ---------------------------------------------------------------------------
# connectivity estimates and sweeps


def _conn_trial(cfg, trial: int):
    n, k, s, master = cfg
    region = Region(0.0, 0.0, math.sqrt(n))
    ps, attempts = _resampled_pointset(region, 1.0, master, trial)
    g = build_knn(ps, k)
    ok = is_connected(g) if s == 1 else is_s_connected(g, s)
    return bool(ok), attempts


def estimate_connectivity(n, k: int, trials: int, seed: int, threads: int = 1) -> EstimateResult:
    """Fraction of Poisson samples on [0, sqrt(n)]^2 whose k-NN graph connects."""
    n = _require_scale(n)
    k = _require_int("k", k, 1)
    trials = _require_int("trials", trials, 1)
    t0 = time.perf_counter()
    rows = _map_trials(partial(_conn_trial, (n, k, 1, seed)), trials, threads)
    succ = sum(r[0] for r in rows)
    deg = sum(r[1] for r in rows)
    return _estimate(succ, trials, deg, time.perf_counter() - t0, seed)


@dataclass(frozen=True)
class SweepRow:
    n: float
    k: int
    trials: int
    successes: int
    p_hat: float
    ci_lo: float
    ci_hi: float


def _sweep_trial(cfg, trial: int):
    n, ks, master = cfg
    region = Region(0.0, 0.0, math.sqrt(n))
    ps, attempts = _resampled_pointset(region, 1.0, master, trial)
    g = build_knn(ps, max(ks))
    flags = tuple(bool(is_connected(restrict_k(g, k))) for k in ks)
    return flags, attempts


def connectivity_sweep(n, ks, trials: int, seed: int, threads: int = 1):
    """Connectivity estimates over a k-range, one shared sample per trial.

    The out-lists are built once at max(ks) per sample and each k is
    read off as a prefix, so the per-k estimates are coupled but each
    one matches an independent estimate_connectivity run on the same
    seeds.  Returns (rows, degenerate, wall_time).
    """
    n = _require_scale(n)
    ks = sorted({_require_int("k", k, 1) for k in ks})
    if not ks:
        raise ValueError("k range is empty")
    trials = _require_int("trials", trials, 1)
    t0 = time.perf_counter()
    rows = _map_trials(partial(_sweep_trial, (n, tuple(ks), seed)), trials, threads)
    deg = sum(r[1] for r in rows)
    out = []
    for j, k in enumerate(ks):
        succ = sum(r[0][j] for r in rows)
        lo, hi = wilson_interval(succ, trials)
        out.append(SweepRow(n, k, trials, succ, succ / trials, lo, hi))
    return out, deg, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# per-sample connectivity thresholds


def _threshold_with_graph(ps: PointSet, graph: NeighborGraph | None = None, k_hint: int = 12):
    m = len(ps)
    if m < 2:
        raise ValueError("threshold search needs at least two points")
    k_hi = max(1, min(k_hint, m - 1))
    g = graph if graph is not None and graph.width >= min(k_hi, m - 1) else build_knn(ps, k_hi)
    while not is_connected(restrict_k(g, min(k_hi, g.k))) and k_hi < m - 1:
        k_hi = min(2 * k_hi, m - 1)
        g = build_knn(ps, k_hi)
    lo, hi = 1, k_hi
    while lo < hi:
        mid = (lo + hi) // 2
        if is_connected(restrict_k(g, mid)):
            hi = mid
        else:
            lo = mid + 1
    return lo, g


def sample_threshold_k(ps: PointSet, graph: NeighborGraph | None = None, k_hint: int = 12) -> int:
    """Minimal k whose k-NN graph on this sample is connected.

    Binary search over prefix graphs; valid because the edge set only
    grows with k, so connectivity is monotone.
    """
    return _threshold_with_graph(ps, graph, k_hint)[0]


def threshold_profile(ps: PointSet, s_max: int, graph: NeighborGraph | None = None, k_hint: int = 12) -> np.ndarray:
    """Minimal k for s-fold connectivity, for each s = 1..s_max.

    Upward scan from the plain connectivity threshold; each step tests
    the capped vertex connectivity exactly.  Monotone in s because a
    larger s is a strictly stronger demand at every k.
    """
    s_max = _require_int("s_max", s_max, 1)
    m = len(ps)
    if m <= s_max:
        raise ValueError(f"s-connectivity at s={s_max} needs more than {s_max} points, got {m}")
    k1, g = _threshold_with_graph(ps, graph, k_hint)
    out = np.empty(s_max, dtype=np.int64)
    out[0] = k1
    k = k1
    for s in range(2, s_max + 1):
        while True:
            if g.width < min(k, m - 1):
                g = build_knn(ps, min(max(k, 2 * g.width), m - 1))
            if is_s_connected(restrict_k(g, min(k, g.k)), s):
                break
            k += 1  # reaches m-1 at worst, where the complete graph succeeds
        out[s - 1] = k
    return out


def _threshold_trial(cfg, trial: int):
    n, k_hint, master = cfg
    region = Region(0.0, 0.0, math.sqrt(n))
    ps, attempts = _resampled_pointset(region, 1.0, master, trial)
    return sample_threshold_k(ps, k_hint=k_hint), attempts


def threshold_samples(n, trials: int, seed: int, threads: int = 1, k_hint: int = 12):
    """Per-trial minimal connectivity k over fresh samples; the campaign engine.

    Returns (samples array, degenerate count, wall_time).  Trial t only
    depends on (seed, t), so a longer campaign extends a shorter one
    sample for sample.
    """
    n = _require_scale(n)
    trials = _require_int("trials", trials, 1)
    t0 = time.perf_counter()
    rows = _map_trials(partial(_threshold_trial, (n, k_hint, seed)), trials, threads)
    ks = np.array([r[0] for r in rows], dtype=np.int64)
    deg = sum(r[1] for r in rows)
    return ks, deg, time.perf_counter() - t0


def _lower_quantile(sorted_ks: np.ndarray, q: float) -> int:
    t = sorted_ks.size
    idx = min(t - 1, max(0, math.ceil(q * t) - 1))
    return int(sorted_ks[idx])


@dataclass(frozen=True)
class ThresholdConstantResult:
    n: float
    quantile: float
    trials: int
    k_q: int
    c_hat: float
    band: tuple  # rigorous (lower, upper) band for the limiting constant
    cdf_k: np.ndarray
    cdf_fraction: np.ndarray
    samples: np.ndarray
    degenerate: int
    wall_time: float
    seed: int


def estimate_threshold_constant(n, trials: int, quantile: float, seed: int, threads: int = 1) -> ThresholdConstantResult:
    """Empirical quantile of the per-sample threshold, scaled by log n."""
    from .constants import threshold_constant_band

    n = _require_scale(n)
    if not (0.0 < quantile < 1.0):
        raise ValueError(f"quantile must lie in (0, 1), got {quantile}")
    ks, deg, wall = threshold_samples(n, trials, seed, threads)
    s = np.sort(ks)
    k_q = _lower_quantile(s, quantile)
    uniq, counts = np.unique(s, return_counts=True)
    return ThresholdConstantResult(
        n,
        float(quantile),
        int(trials),
        k_q,
        k_q / math.log(n),
        threshold_constant_band(),
        uniq,
        np.cumsum(counts) / s.size,
        ks,
        deg,
        wall,
        seed,
    )


@dataclass(frozen=True)
class SharpnessResult:
    n: float
    eps: float
    trials: int
    k_lo: int  # eps-quantile of the per-sample threshold
    k_hi: int  # (1 - eps)-quantile
    width: int
    log_inv_eps: float
    samples: np.ndarray
    degenerate: int
    wall_time: float
    seed: int


def sharpness_width(n, eps: float, trials: int, seed: int, threads: int = 1, samples: np.ndarray | None = None) -> SharpnessResult:
    """Width of the threshold window between the eps and 1-eps quantiles.

    eps = 1/2 degenerates to width zero by construction.  A precomputed
    sample array (from threshold_samples with the same n/seed) may be
    passed to share one campaign across several eps values.
    """
    n = _require_scale(n)
    if not (0.0 < eps <= 0.5):
        raise ValueError(f"eps must lie in (0, 1/2], got {eps}")
    if samples is None:
        ks, deg, wall = threshold_samples(n, trials, seed, threads)
    else:
        ks, deg, wall = np.asarray(samples, dtype=np.int64), 0, 0.0
        if ks.size != trials:
            raise ValueError("provided samples disagree with the trial count")
    s = np.sort(ks)
    k_lo = _lower_quantile(s, eps)
    k_hi = _lower_quantile(s, 1.0 - eps)
    return SharpnessResult(
        n, float(eps), int(trials), k_lo, k_hi, k_hi - k_lo, math.log(1.0 / eps), ks, deg, wall, seed
    )


# ---------------------------------------------------------------------------
# local events in the analysis box


@dataclass(frozen=True)
class EventRow:
    """One trial of the box campaign; mirrors the event report CSV schema."""

    trial: int
    box_index: int
    event: bool  # the confined-component event
    max_tile_count: int
    dense_tile_count: int
    cap_check: bool
    component_size: int


@dataclass(frozen=True)
class LocalEventResult:
    event_rate: EstimateResult
    dense_rate: EstimateResult  # joint: event and some overfull tile
    conditional_dense: float | None  # overfull-tile frequency given the event
    rows: tuple
    box: BoxSpec
    N: int
    eta: float


def _event_trial(cfg, trial: int):
    n, k, M, N, eta, master = cfg
    box = make_box(n, M)
    ps, attempts = _resampled_pointset(box.region(), 1.0, master, trial)
    g = build_knn(ps, k)
    witnesses = confined_components(ps, k, g)
    occurred = len(witnesses) > 0
    ev = confined_dense_tiles(ps, box, k, N=N, eta=eta, graph=g)
    cap_ok = all(reflected_cap_empty(ps, w, g) for w in witnesses)
    size = max((len(w) for w in witnesses), default=0)
    return occurred, len(ev.dense), ev.max_tile_count, cap_ok, size, attempts


def local_event_rate(
    n,
    k: int,
    M: int,
    trials: int,
    seed: int,
    N: int = 16,
    eta: float = 0.25,
    threads: int = 1,
) -> LocalEventResult:
    """Monte Carlo rates of the confined-component event in the analysis box.

    Samples the box directly at unit intensity; reports the event rate,
    the joint rate with an overfull tile, the conditional overfull-tile
    frequency given the event, and the per-trial report rows.
    """
    n = _require_scale(n)
    k = _require_int("k", k, 1)
    M = _require_int("M", M, 1)
    N = _require_int("N", N, 1)
    trials = _require_int("trials", trials, 1)
    t0 = time.perf_counter()
    rows = _map_trials(partial(_event_trial, (n, k, M, N, eta, seed)), trials, threads)
    wall = time.perf_counter() - t0
    deg = sum(r[5] for r in rows)
    n_event = sum(r[0] for r in rows)
    n_joint = sum(1 for r in rows if r[0] and r[1] > 0)
    report = tuple(
        EventRow(t, 0, r[0], r[2], r[1], r[3], r[4]) for t, r in enumerate(rows)
    )
    return LocalEventResult(
        _estimate(n_event, trials, deg, wall, seed),
        _estimate(n_joint, trials, deg, wall, seed),
        (n_joint / n_event) if n_event else None,
        report,
        make_box(n, M),
        N,
        float(eta),
    )


# ---------------------------------------------------------------------------
# event-rate decay in k


@dataclass(frozen=True)
class RatioDecayRow:
    L: int
    base_events: int
    events: int
    ratio: float | None
    ci_lo: float | None
    ci_hi: float | None
    defined: bool


@dataclass(frozen=True)
class RatioDecayResult:
    n: float
    k: int
    trials: int
    rows: tuple
    base_rate: EstimateResult
    reference: float  # exp(-1), the decay target per step of decay_step
    degenerate: int
    wall_time: float
    seed: int


def _ratio_trial(cfg, trial: int):
    n, k, levels, M, master = cfg
    box = make_box(n, M)
    ps, attempts = _resampled_pointset(box.region(), 1.0, master, trial)
    m = len(ps)
    g = build_knn(ps, k + max(levels))
    flags = []
    for L in levels:
        kk = max(1, min(k + L, m - 1))
        flags.append(bool(len(confined_components(ps, k + L, restrict_k(g, kk)))))
    return tuple(flags), attempts


def ratio_decay(
    n,
    k: int,
    L_list,
    M: int,
    trials: int,
    seed: int,
    threads: int = 1,
) -> RatioDecayResult:
    """Coupled decay table: event rate at k+L relative to the rate at k.

    The same box samples are evaluated at every level via out-list
    prefixes, so the event at k+L implies the event at k and each ratio
    is a conditional frequency with a meaningful Wilson interval.  A
    zero base count flags the ratios as undefined instead of raising.
    """
    n = _require_scale(n)
    k = _require_int("k", k, 1)
    M = _require_int("M", M, 1)
    trials = _require_int("trials", trials, 1)
    levels = sorted({_require_int("L", L, 0) for L in L_list})
    if not levels:
        raise ValueError("L list is empty")
    eval_levels = sorted({0, *levels})
    t0 = time.perf_counter()
    rows = _map_trials(partial(_ratio_trial, (n, k, tuple(eval_levels), M, seed)), trials, threads)
    wall = time.perf_counter() - t0
    deg = sum(r[1] for r in rows)
    counts = {L: sum(r[0][j] for r in rows) for j, L in enumerate(eval_levels)}
    base = counts[0]
    table = []
    for L in levels:
        if base > 0:
            lo, hi = wilson_interval(counts[L], base)
            table.append(RatioDecayRow(L, base, counts[L], counts[L] / base, lo, hi, True))
        else:
            table.append(RatioDecayRow(L, 0, 0, None, None, None, False))
    return RatioDecayResult(
        n,
        k,
        trials,
        tuple(table),
        _estimate(base, trials, deg, wall, seed),
        math.exp(-1.0),
        deg,
        wall,
        seed,
    )


# ---------------------------------------------------------------------------
# s-connectivity


@dataclass(frozen=True)
class SConnectivityResult:
    n: float
    s: int
    k_effective: int
    estimate: EstimateResult
    thresholds: np.ndarray | None  # per-sample minimal k for s-connectivity


def _sconn_trial(cfg, trial: int):
    n, k_eff, s, coupled, master = cfg
    region = Region(0.0, 0.0, math.sqrt(n))
    ps, attempts = _resampled_pointset(region, 1.0, master, trial)
    g = build_knn(ps, k_eff)
    ok = bool(is_s_connected(g, s))
    ks = int(threshold_profile(ps, s, graph=g)[-1]) if coupled else -1
    return ok, ks, attempts


def s_connectivity_experiment(
    n,
    k_base: int,
    s: int,
    delta_k: int,
    trials: int,
    seed: int,
    coupled: bool = False,
    threads: int = 1,
) -> SConnectivityResult:
    """Rate of s-fold connectivity at k_base + delta_k extra neighbours.

    With coupled=True the per-sample minimal k for s-connectivity is
    computed as well (slower: exact capped connectivity per candidate k).
    At s = 1 and delta_k = 0 this reproduces estimate_connectivity on
    the same seeds, sample for sample.
    """
    n = _require_scale(n)
    k_base = _require_int("k_base", k_base, 1)
    s = _require_int("s", s, 1)
    delta_k = _require_int("delta_k", delta_k, 0)
    trials = _require_int("trials", trials, 1)
    k_eff = k_base + delta_k
    t0 = time.perf_counter()
    rows = _map_trials(partial(_sconn_trial, (n, k_eff, s, bool(coupled), seed)), trials, threads)
    wall = time.perf_counter() - t0
    succ = sum(r[0] for r in rows)
    deg = sum(r[2] for r in rows)
    thresholds = np.array([r[1] for r in rows], dtype=np.int64) if coupled else None
    return SConnectivityResult(n, s, k_eff, _estimate(succ, trials, deg, wall, seed), thresholds)


# ---------------------------------------------------------------------------
# Gilbert disc model: connection radius vs isolation radius


@dataclass(frozen=True)
class GilbertTrialRow:
    trial: int
    r_connect: float
    r_no_isolated: float
    coincident: bool


@dataclass(frozen=True)
class GilbertCompareResult:
    n: float
    trials: int
    rows: tuple
    coincidence_fraction: float
    order_violations: int  # trials with r_connect < r_no_isolated; must be 0
    tolerance: float
    degenerate: int
    wall_time: float
    seed: int


def _gilbert_trial(cfg, trial: int):
    n, master = cfg
    region = Region(0.0, 0.0, math.sqrt(n))
    ps, attempts = _resampled_pointset(region, 1.0, master, trial)
    r_iso = longest_edge(build_knn(ps, 1))
    r_conn = float(_kernels.prim_bottleneck(ps.x, ps.y))
    return r_conn, r_iso, attempts


def gilbert_penrose_compare(n, trials: int, seed: int, threads: int = 1, tolerance: float = 1e-12) -> GilbertCompareResult:
    """Per-trial smallest disc radius connecting the sample vs killing isolation.

    The connection radius is the longest edge of the Euclidean minimum
    spanning tree (the bottleneck, invariant across ties); the isolation
    radius is the largest nearest-neighbour distance.  The former always
    dominates; at these scales they usually coincide exactly.
    """
    n = _require_scale(n)
    trials = _require_int("trials", trials, 1)
    t0 = time.perf_counter()
    out = _map_trials(partial(_gilbert_trial, (n, seed)), trials, threads)
    wall = time.perf_counter() - t0
    deg = sum(r[2] for r in out)
    rows = tuple(
        GilbertTrialRow(t, rc, ri, abs(rc - ri) <= tolerance) for t, (rc, ri, _) in enumerate(out)
    )
    coincident = sum(r.coincident for r in rows)
    violations = sum(1 for r in rows if r.r_connect < r.r_no_isolated)
    return GilbertCompareResult(
        n, trials, rows, coincident / trials, violations, tolerance, deg, wall, seed
    )


# ---------------------------------------------------------------------------
# CSV emission (plain integers, 17-significant-digit reals, no locale)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return format(float(x), ".17g")


def _write_rows(path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(path, rows) -> None:
    _write_rows(
        path,
        "n,k,trials,successes,p_hat,ci_lo,ci_hi",
        ((r.n, r.k, r.trials, r.successes, r.p_hat, r.ci_lo, r.ci_hi) for r in rows),
    )


def write_event_csv(path, rows) -> None:
    _write_rows(
        path,
        "trial,box_index,A_k,max_tile_count,dense_tile_count,cap_check,component_size",
        (
            (r.trial, r.box_index, r.event, r.max_tile_count, r.dense_tile_count, r.cap_check, r.component_size)
            for r in rows
        ),
    )


def write_cdf_csv(path, result: ThresholdConstantResult) -> None:
    uniq, counts = np.unique(result.samples, return_counts=True)
    cum = np.cumsum(counts) / result.samples.size
    _write_rows(
        path,
        "k,count,cum_fraction",
        ((int(k), int(c), f) for k, c, f in zip(uniq, counts, cum)),
    )


def write_threshold_samples_csv(path, samples) -> None:
    _write_rows(path, "trial,K", ((t, int(k)) for t, k in enumerate(samples)))


def write_ratio_csv(path, result: RatioDecayResult) -> None:
    _write_rows(
        path,
        "L,base_events,events,ratio,ci_lo,ci_hi,defined",
        (
            (r.L, r.base_events, r.events, r.ratio, r.ci_lo, r.ci_hi, r.defined)
            for r in result.rows
        ),
    )


def write_gilbert_csv(path, result: GilbertCompareResult) -> None:
    _write_rows(
        path,
        "trial,r_connect,r_no_isolated,coincident",
        ((r.trial, r.r_connect, r.r_no_isolated, r.coincident) for r in result.rows),
    )
