"""Interval scanning and greedy recursive segmentation.

``exhaustive_scan`` evaluates every interval in a region and is the accuracy
reference.  ``iterative_grid_scan`` evaluates a geometric ladder of interval
widths on coarse endpoint grids and then refines the retained candidates down
to single-read resolution, keeping the total work near-linear in the region
size.  ``cbs_segment`` applies the scan recursively, inserting the most
significant interval's endpoints as change points until reaching ``max_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .process import CombinedProcess
from .stats import IntervalStat, StatKernel


@dataclass(frozen=True)
class ScanResult:
    """Best interval found in one region, plus the retained candidates."""

    best: IntervalStat | None
    objective: float
    candidates: list[IntervalStat] = field(default_factory=list)


@dataclass(frozen=True)
class ScanStep:
    """One greedy insertion: which change points were added, where, and why."""

    taus_added: tuple[int, ...]
    region: tuple[int, int]
    objective: float


@dataclass
class ChangePointSequence:
    """Ordered change-point insertions produced by cbs_segment."""

    steps: list[ScanStep]
    m: int

    def insertion_order(self) -> list[int]:
        """Individual change points in the order they were added."""
        return [t for step in self.steps for t in step.taus_added]

    def taus_at(self, k: int) -> list[int]:
        """Sorted change points after the first k individual insertions."""
        return sorted(self.insertion_order()[:k])

    @property
    def n_taus(self) -> int:
        return sum(len(step.taus_added) for step in self.steps)


def _argbest(I: np.ndarray, J: np.ndarray, v: np.ndarray):
    """Max objective with deterministic lexicographic (i, j) tie-break."""
    vmax = v.max()
    mask = v == vmax
    Im, Jm = I[mask], J[mask]
    k = np.lexsort((Jm, Im))[0]
    return int(Im[k]), int(Jm[k]), float(vmax)


def _argbest_diverse(I: np.ndarray, J: np.ndarray, v: np.ndarray, k: int, radius: int):
    """Up to k well-separated top candidates (same tie-break as _argbest)."""
    out = []
    alive = np.ones(v.size, dtype=bool)
    for _ in range(k):
        if not alive.any():
            break
        Ia, Ja, va = I[alive], J[alive], v[alive]
        ci, cj, cv = _argbest(Ia, Ja, va)
        out.append((ci, cj, cv))
        alive &= ~((np.abs(I - ci) < radius) & (np.abs(J - cj) < radius))
    return out


def _better(i, j, v, best):
    """Candidate replacement rule: higher objective, then smaller (i, j)."""
    if best is None:
        return True
    bi, bj, bv = best
    return v > bv or (v == bv and (i, j) < (bi, bj))


def _check_region(process: CombinedProcess, lo: int, hi: int) -> None:
    if not (1 <= lo and hi <= process.m):
        raise ValueError(f"region [{lo}, {hi}] outside [1, {process.m}]")


def exhaustive_scan(process: CombinedProcess, stat_kind: str, lo: int, hi: int) -> ScanResult:
    """Evaluate every interval with lo <= i <= j <= hi and return the argmax.

    The region is scanned as its own sequence, so the full-range interval is
    skipped for the likelihood-ratio statistic (it has no outside reads).  A
    region narrower than 2 reads yields an empty result.
    """
    _check_region(process, lo, hi)
    if hi - lo < 1:
        return ScanResult(best=None, objective=float("-inf"))
    kernel = StatKernel(process, stat_kind, lo, hi)
    n = hi - lo + 1
    ii, jj = np.triu_indices(n)
    I = ii.astype(np.int64) + lo
    J = jj.astype(np.int64) + lo
    v = kernel.objective(I, J)
    i, j, obj = _argbest(I, J, v)
    best = kernel.stat(i, j)
    return ScanResult(best=best, objective=obj, candidates=[best])


def _ladder(n: int, G: int) -> list[int]:
    ws = [n]
    while ws[-1] > 2:
        ws.append(max(2, ws[-1] // G))
    return ws


def _grid_work_estimate(n: int, G: int) -> int:
    """Number of interval evaluations the grid scheme would spend on a region.

    Counts the dense small-width sweep, every ladder level, and a refinement
    budget per retained candidate.  Used to fall back to the exhaustive scan
    whenever the grid path would do at least as much work.
    """
    total = min(3 * G, n) * n
    ws = _ladder(n, G)
    n_cand = 1
    for t, w in enumerate(ws):
        if w <= 3 * G:
            continue
        floor = max(ws[t + 1] if t + 1 < len(ws) else 1, 3 * G - 1)
        g = _level_spacing(n, w, floor, G)
        n_widths = max(1, (w - floor) // g)
        total += (n // g + 1) * n_widths
        n_cand += 3
    dense_cut = max(4, 64 // G)
    box_dense = (2 * dense_cut + 1) ** 2
    box_grid = (2 * G + 3) ** 2
    rounds = max(1, int(np.log2(max(n, 2))))
    total += n_cand * (3 * box_dense + rounds * box_grid)
    return total


def _level_spacing(n: int, width_cap: int, width_floor: int, G: int) -> int:
    """Endpoint grid spacing for one ladder level.

    Starts at width/(2G) and widens until the level stays within a linear
    evaluation budget, so total work per scan does not depend on where the
    region size falls between powers of G.
    """
    g = max(1, width_cap // (2 * G))
    budget = 2 * n
    while ((n // g + 1) * max(1, (width_cap - width_floor) // g)) > budget:
        g += max(1, g // 4)
    return g


def _level_pairs(lo: int, hi: int, width_cap: int, width_floor: int, g: int):
    """Intervals with endpoints on a spacing-g grid and width in (floor, cap]."""
    starts = np.arange(lo, hi + 1, g, dtype=np.int64)
    d0 = max(g * ((width_floor // g) + 1), g)
    deltas = list(range(d0, width_cap, g))
    if width_cap - 1 >= width_floor:
        deltas.append(width_cap - 1)
    out_I, out_J = [], []
    for d in sorted(set(deltas)):
        I = starts[starts + d <= hi]
        if I.size:
            out_I.append(I)
            out_J.append(I + d)
        # right-anchored interval keeps the region edge reachable
        if hi - d >= lo:
            out_I.append(np.array([hi - d], dtype=np.int64))
            out_J.append(np.array([hi], dtype=np.int64))
    if not out_I:
        return None
    return np.concatenate(out_I), np.concatenate(out_J)


def _refine(kernel: StatKernel, lo: int, hi: int, cand, spacing: int, G: int):
    """Walk a candidate interval to a local argmax with shrinking step sizes."""
    best = cand
    s = max(1, spacing)
    dense_cut = max(4, 64 // G)
    guard = 0
    while True:
        guard += 1
        if guard > 10_000:
            break
        if s <= dense_cut:
            off = np.arange(-s, s + 1, dtype=np.int64)
        else:
            step = max(1, s // G)
            off = np.unique(np.concatenate([np.arange(-s, s + 1, step), [s]])).astype(np.int64)
        bi, bj, _ = best
        Ii = np.unique(np.clip(bi + off, lo, hi))
        Jj = np.unique(np.clip(bj + off, lo, hi))
        I = np.repeat(Ii, Jj.size)
        J = np.tile(Jj, Ii.size)
        keep = I <= J
        I, J = I[keep], J[keep]
        v = kernel.objective(I, J)
        i2, j2, v2 = _argbest(I, J, v)
        if _better(i2, j2, v2, best):
            best = (i2, j2, v2)
            continue
        if s == 1:
            break
        s = max(1, s // 2)
    return best


def _coord_refine(kernel: StatKernel, lo: int, hi: int, cand, rounds: int = 2):
    """Re-optimize one endpoint at a time over the whole region.

    Each sweep holds one endpoint fixed and moves the other across the full
    axis (endpoints swap roles when they cross), so every sweep evaluates the
    region once and the cost is a fixed function of the region size.
    """
    best = cand
    axis = np.arange(lo, hi + 1, dtype=np.int64)
    for _ in range(rounds):
        for fixed in (best[0], best[1]):
            anchor = np.full(axis.size, fixed, dtype=np.int64)
            I = np.minimum(anchor, axis)
            J = np.maximum(anchor, axis)
            i2, j2, v2 = _argbest(I, J, kernel.objective(I, J))
            if _better(i2, j2, v2, best):
                best = (i2, j2, v2)
    return best


def iterative_grid_scan(
    process: CombinedProcess, stat_kind: str, lo: int, hi: int, grid_step: int = 10
) -> ScanResult:
    """Coarse-to-fine interval scan.

    Phase 1 walks a geometric ladder of interval widths; each level evaluates
    intervals whose endpoints sit on a grid proportional to the level width
    and keeps its best candidate.  All intervals up to width 3*grid_step are
    evaluated exactly.  Phase 2 refines every retained candidate by repeated
    local re-scans with shrinking step sizes and returns the overall best.
    Small regions fall back to the exhaustive scan.
    """
    G = int(grid_step)
    if G < 2:
        raise ValueError("grid_step must be >= 2")
    _check_region(process, lo, hi)
    n = hi - lo + 1
    if n < 2:
        return ScanResult(best=None, objective=float("-inf"))
    # the grid degenerates to all pairs whenever it would cost as much anyway
    if n <= 3 * G or _grid_work_estimate(n, G) >= n * (n + 1) // 2:
        return exhaustive_scan(process, stat_kind, lo, hi)

    kernel = StatKernel(process, stat_kind, lo, hi)
    level_best: list[tuple] = []

    # dense sweep of all small widths, batched per width
    small = None
    for d in range(0, min(3 * G, n)):
        I = np.arange(lo, hi - d + 1, dtype=np.int64)
        J = I + d
        i, j, v = _argbest(I, J, kernel.objective(I, J))
        if _better(i, j, v, small):
            small = (i, j, v)
    level_best.append((small, 1))

    ws = _ladder(n, G)
    for t, w in enumerate(ws):
        floor = ws[t + 1] if t + 1 < len(ws) else 1
        if w <= 3 * G:
            continue  # densely covered above
        g = _level_spacing(n, w, max(floor, 3 * G - 1), G)
        pairs = _level_pairs(lo, hi, w, max(floor, 3 * G - 1), g)
        if pairs is None:
            continue
        I, J = pairs
        v = kernel.objective(I, J)
        for cand in _argbest_diverse(I, J, v, k=3, radius=max(2 * g, w // 4)):
            level_best.append((cand, g))

    refined: list[tuple] = []
    for cand, spacing in level_best:
        if cand is None:
            continue
        refined.append(_refine(kernel, lo, hi, cand, spacing, G))
    refined.sort(key=lambda c: (-c[2], c[0], c[1]))
    # the full-range seed catches argmaxes hugging both region edges
    refined.append((lo, hi, float(kernel.objective(np.array([lo]), np.array([hi]))[0])))

    best = None
    for k, cand in enumerate(refined):
        r = _coord_refine(kernel, lo, hi, cand) if k < 4 or k == len(refined) - 1 else cand
        refined[k] = r
        if _better(r[0], r[1], r[2], best):
            best = r

    i, j, obj = best
    stats = [kernel.stat(ri, rj) for ri, rj, _ in sorted(refined, key=lambda c: (-c[2], c[0], c[1]))]
    return ScanResult(best=kernel.stat(i, j), objective=obj, candidates=stats)


def _scan(process, stat_kind, lo, hi, grid_step) -> ScanResult:
    if hi - lo + 1 <= 3 * grid_step:
        return exhaustive_scan(process, stat_kind, lo, hi)
    return iterative_grid_scan(process, stat_kind, lo, hi, grid_step)




def cbs_segment(
    process: CombinedProcess,
    stat_kind: str = "glr",
    grid_step: int = 10,
    max_k: int = 50,
) -> ChangePointSequence:
    """Greedy recursive segmentation of the whole read stream.

    Maintains a partition of [1, m].  Each step scans every current region,
    takes the region whose best interval has the highest objective, and
    inserts that interval's endpoints as change points (one endpoint when the
    interval touches the region edge).  Regions whose best interval adds no
    new change point are retired.  Stops after ``max_k`` change points or
    when no region has a positive objective.
    """
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    m = process.m
    steps: list[ScanStep] = []
    if m < 2:
        return ChangePointSequence(steps=steps, m=m)

    regions: list[tuple[int, int]] = [(1, m)]
    cache: dict[tuple[int, int], tuple | None] = {}
    n_taus = 0

    while n_taus < max_k:
        for reg in regions:
            if reg in cache:
                continue
            a, b = reg
            if b - a < 1:
                cache[reg] = None
                continue
            res = _scan(process, stat_kind, a, b, grid_step)
            if res.best is None:
                cache[reg] = None
            else:
                cache[reg] = (res.best.i, res.best.j, res.objective)

        live = [(reg, cache[reg]) for reg in regions if cache[reg] is not None]
        if not live:
            break
        reg, cand = max(live, key=lambda rc: (rc[1][2], -rc[0][0]))
        a, b = reg
        i, j, obj = cand
        if obj <= 0.0:
            break

        new_taus = []
        if i > a:
            new_taus.append(i)
        if j < b and j + 1 <= m - 1:
            new_taus.append(j + 1)
        new_taus = new_taus[: max_k - n_taus]
        if not new_taus:
            cache[reg] = None  # interval spans the region: nothing left to split
            continue

        steps.append(ScanStep(taus_added=tuple(new_taus), region=reg, objective=obj))
        n_taus += len(new_taus)

        bounds = [a] + sorted(new_taus) + [b + 1]
        parts = [(s, e - 1) for s, e in zip(bounds, bounds[1:]) if s <= e - 1]
        regions.remove(reg)
        del cache[reg]
        regions.extend(parts)
        regions.sort()

    return ChangePointSequence(steps=steps, m=m)
