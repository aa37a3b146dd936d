"""Score and binomial likelihood-ratio statistics for read-index intervals.

Both statistics compare the case fraction inside an interval [i, j] of the
merged read stream against the rest of the chromosome.  All evaluations use
prefix sums, so each interval costs O(1) after O(m) setup; the vectorized
kernels additionally precompute an x*log(x) table so the likelihood ratio
needs no transcendental calls per interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .process import CombinedProcess


@dataclass(frozen=True)
class IntervalStat:
    """Statistics for one index interval [i, j] (1-based, inclusive)."""

    i: int
    j: int
    s_ij: float | None = None
    sigma_ij: float | None = None
    t_ij: float | None = None
    lambda_ij: float | None = None
    p_hat: float | None = None
    p_hat_in: float | None = None
    p_hat_out: float | None = None

    @property
    def width(self) -> int:
        return self.j - self.i + 1


def _check_interval(process: CombinedProcess, i: int, j: int) -> None:
    if not (1 <= i <= j <= process.m):
        raise ValueError(f"invalid interval [{i}, {j}] for m={process.m}")


def score(process: CombinedProcess, i: int, j: int) -> IntervalStat:
    """Observed-minus-expected case count on [i, j], with its standardization.

    The raw score is centered with the pooled case fraction; the null standard
    deviation standardizes it across interval widths.  t_ij is defined as 0
    whenever the null variance vanishes (whole-sequence interval, or a stream
    that is all case or all control).
    """
    _check_interval(process, i, j)
    m = process.m
    if m < 2:
        raise ValueError("need at least 2 reads")
    p = process.m1 / m
    n_in = j - i + 1
    s = process.case_count(i, j) - p * n_in
    var = (1.0 - n_in / m) * n_in * p * (1.0 - p)
    sigma = math.sqrt(var) if var > 0 else 0.0
    t = s / sigma if sigma > 0 else 0.0
    return IntervalStat(i=i, j=j, s_ij=s, sigma_ij=sigma, t_ij=t, p_hat=p)


def glr(process: CombinedProcess, i: int, j: int) -> IntervalStat:
    """Exact binomial generalized likelihood ratio for [i, j] versus the rest.

    Compares the two-parameter model (one case probability inside the
    interval, one outside) against the pooled single-probability model, in
    natural log.  The 0*log(0) := 0 convention applies at degenerate MLEs.
    The whole-sequence interval has no outside MLE and is rejected.
    """
    _check_interval(process, i, j)
    m = process.m
    if i == 1 and j == m:
        raise ValueError("GLR undefined on the whole-sequence interval: no outside reads")
    n_in = j - i + 1
    n_out = m - n_in
    x_in = process.case_count(i, j)
    x_out = process.m1 - x_in
    p = process.m1 / m
    p_in = x_in / n_in
    p_out = x_out / n_out
    lam = (
        xlogy(x_in, p_in)
        + xlogy(n_in - x_in, 1.0 - p_in)
        + xlogy(x_out, p_out)
        + xlogy(n_out - x_out, 1.0 - p_out)
        - xlogy(x_in + x_out, p)
        - xlogy(n_in + n_out - x_in - x_out, 1.0 - p)
    )
    return IntervalStat(
        i=i,
        j=j,
        lambda_ij=max(float(lam), 0.0),
        p_hat=p,
        p_hat_in=p_in,
        p_hat_out=p_out,
    )


def xlogx_table(m: int) -> np.ndarray:
    """k*log(k) for every count 0..m, with 0*log(0) = 0."""
    k = np.arange(m + 1, dtype=np.float64)
    return xlogy(k, k)


class StatKernel:
    """Vectorized per-interval objectives over one window of the process.

    The window [lo, hi] is treated as its own sequence: the null success
    probability is the window's pooled case fraction and "outside" means the
    rest of the window.  On the whole stream this is exactly the chromosome
    statistic; recursive segmentation scans sub-regions the same way.  The
    scan objective is |t_ij| for the score statistic and lambda_ij for the
    likelihood ratio.  Arrays I and J are 1-based interval endpoints.
    """

    def __init__(
        self,
        process: CombinedProcess,
        stat_kind: str,
        lo: int = 1,
        hi: int | None = None,
        xlogx: np.ndarray | None = None,
    ):
        if stat_kind not in ("score", "glr"):
            raise ValueError(f"unknown statistic {stat_kind!r}")
        hi = process.m if hi is None else hi
        self.process = process
        self.stat_kind = stat_kind
        self.lo = lo
        self.hi = hi
        self.m = hi - lo + 1
        self.S = process.S
        self.m1 = int(process.S[hi] - process.S[lo - 1])
        p = self.m1 / self.m if self.m else 0.0
        self._p = p
        self._pq = p * (1.0 - p)
        if stat_kind == "glr":
            self._xlogx = xlogx_table(self.m) if xlogx is None else xlogx
            self._null_ll = (
                self._xlogx[self.m1]
                + self._xlogx[self.m - self.m1]
                - self._xlogx[self.m]
            )

    # evaluation block size: temporaries stay cache-resident on large batches
    CHUNK = 32768

    def objective(self, I: np.ndarray, J: np.ndarray) -> np.ndarray:
        I = np.asarray(I, dtype=np.int64)
        J = np.asarray(J, dtype=np.int64)
        if I.size <= self.CHUNK:
            return self._objective_block(I, J)
        out = np.empty(I.size)
        for k in range(0, I.size, self.CHUNK):
            sl = slice(k, k + self.CHUNK)
            out[sl] = self._objective_block(I[sl], J[sl])
        return out

    def _objective_block(self, I: np.ndarray, J: np.ndarray) -> np.ndarray:
        x_in = self.S[J] - self.S[I - 1]
        n_in = J - I + 1
        if self.stat_kind == "score":
            s = x_in - self._p * n_in
            var = (1.0 - n_in / self.m) * n_in * self._pq
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(var > 0, s / np.sqrt(var), 0.0)
            return np.abs(t)
        x_out = self.m1 - x_in
        n_out = self.m - n_in
        xlogx = self._xlogx
        lam = (
            xlogx[x_in]
            + xlogx[n_in - x_in]
            - xlogx[n_in]
            + xlogx[x_out]
            + xlogx[n_out - x_out]
            - xlogx[n_out]
            - self._null_ll
        )
        # the whole-window interval has no outside MLE: never a candidate
        lam = np.where(n_in == self.m, -np.inf, np.maximum(lam, 0.0))
        return lam

    def stat(self, i: int, j: int) -> IntervalStat:
        """Scalar IntervalStat of the configured kind for one interval.

        Computed on the window, mirroring the whole-stream definitions.
        """
        if self.stat_kind == "score":
            if self.lo == 1 and self.hi == self.process.m:
                return score(self.process, int(i), int(j))
            return self._window_score(int(i), int(j))
        if self.lo == 1 and self.hi == self.process.m:
            return glr(self.process, int(i), int(j))
        return self._window_glr(int(i), int(j))

    def _window_score(self, i: int, j: int) -> IntervalStat:
        n_in = j - i + 1
        s = float(self.S[j] - self.S[i - 1]) - self._p * n_in
        var = (1.0 - n_in / self.m) * n_in * self._pq
        sigma = math.sqrt(var) if var > 0 else 0.0
        return IntervalStat(
            i=i, j=j, s_ij=s, sigma_ij=sigma, t_ij=s / sigma if sigma > 0 else 0.0, p_hat=self._p
        )

    def _window_glr(self, i: int, j: int) -> IntervalStat:
        lam = float(self.objective(np.array([i]), np.array([j]))[0])
        n_in = j - i + 1
        x_in = int(self.S[j] - self.S[i - 1])
        n_out = self.m - n_in
        return IntervalStat(
            i=i,
            j=j,
            lambda_ij=max(lam, 0.0),
            p_hat=self._p,
            p_hat_in=x_in / n_in,
            p_hat_out=(self.m1 - x_in) / n_out if n_out else None,
        )
