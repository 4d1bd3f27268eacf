"""Bandwidth families, local-linear smoothers and derivative draws.

Each bandwidth ``h`` gives two linear operators on signals sampled at the
observation times: ``S_h`` (smoothed value) and ``D_h`` (smoothed slope),
both from a Gaussian-kernel weighted straight-line fit centered at each
target time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindow, DimensionMismatch, InvalidRange
from .model import PosteriorDraws
from .series_io import TimeSeries

# Condition number (after unit-diagonal scaling) above which the local
# 2x2 normal equations receive the ridge term.
RIDGE_TRIGGER = 1e12


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    bandwidths: np.ndarray
    display_scales: tuple[float, ...] = ()

    def __post_init__(self):
        h = np.array(self.bandwidths, dtype=float)
        if h.ndim != 1 or h.size < 1:
            raise InvalidRange("need at least one bandwidth")
        if not np.all(np.isfinite(h)) or np.any(h <= 0):
            raise InvalidRange("bandwidths must be positive and finite")
        if np.any(np.diff(h) <= 0):
            raise InvalidRange("bandwidths must be strictly increasing")
        if len(self.display_scales) > 3:
            raise InvalidRange("at most three display scales")
        h.setflags(write=False)
        object.__setattr__(self, "bandwidths", h)
        object.__setattr__(self, "display_scales",
                           tuple(float(h[self.snap(d)]) for d in self.display_scales))

    @property
    def K(self) -> int:
        return self.bandwidths.size

    def snap(self, h: float) -> int:
        """Index of the grid bandwidth nearest to ``h`` on a log scale."""
        if not h > 0:
            raise InvalidRange(f"display scale must be positive, got {h}")
        return int(np.argmin(np.abs(np.log(self.bandwidths) - np.log(h))))

    def display_indices(self) -> list[int]:
        return [self.snap(d) for d in self.display_scales]


def make_scale_grid(series: TimeSeries, K: int = 30, h_min: float | None = None,
                    h_max: float | None = None, display=None) -> ScaleGrid:
    """Geometric grid of ``K`` bandwidths on ``[h_min, h_max]``.

    Defaults: ``h_min`` is twice the median spacing, ``h_max`` half the time
    range. Display scales default to the members nearest ``h_max``, the
    geometric mean and ``h_min`` (coarse, middle, fine).
    """
    if int(K) != K or K < 1:
        raise InvalidRange(f"K must be a positive integer, got {K}")
    t = series.times
    if h_min is None:
        h_min = 2.0 * float(np.median(np.diff(t)))
    if h_max is None:
        h_max = (float(t[-1]) - float(t[0])) / 2.0
    if not (np.isfinite(h_min) and np.isfinite(h_max) and 0 < h_min):
        raise InvalidRange(f"invalid bandwidth range [{h_min}, {h_max}]")
    if K == 1:
        bw = np.array([h_min], dtype=float)
    else:
        if not h_min < h_max:
            raise InvalidRange(f"need h_min < h_max, got [{h_min}, {h_max}]")
        bw = np.geomspace(h_min, h_max, int(K))
    if display is None:
        targets = [h_max, float(np.sqrt(h_min * h_max)), h_min]
        grid = ScaleGrid(bw)
        idx = []
        for d in targets:
            i = grid.snap(d)
            if i not in idx:
                idx.append(i)
        display = [float(bw[i]) for i in idx]
    return ScaleGrid(bw, tuple(float(d) for d in display))


@dataclass(frozen=True, eq=False)
class SmootherPair:
    h: float
    S: np.ndarray
    D_h: np.ndarray
    ridged_rows: np.ndarray


def local_linear_smoother(times, h: float, ridge: float = 1e-8) -> SmootherPair:
    """Smoother and derivative matrices of the local-linear Gaussian-kernel fit.

    Row ``i`` of ``S`` (resp. ``D_h``) maps a signal to the intercept (resp.
    slope) of the weighted line fitted around ``t_i``. The fit is computed
    in centered form, which is algebraically identical to the 2x2 normal
    equations but avoids cancellation in the determinant.
    """
    t = np.asarray(times, dtype=float)
    if not (np.isfinite(h) and h > 0):
        raise InvalidRange(f"bandwidth must be positive, got {h}")
    # u[i, j] = (t_j - t_i) / h
    u = (t[None, :] - t[:, None]) / h
    w = np.exp(-0.5 * u * u)
    s0 = w.sum(axis=1)
    if np.any(s0 <= 0):
        raise DegenerateWindow(f"all kernel weights vanish at h={h}")
    s1 = (w * u).sum(axis=1)
    s2 = (w * u * u).sum(axis=1)
    ubar = s1 / s0
    uc = u - ubar[:, None]
    s2c = (w * uc * uc).sum(axis=1)

    # unit-diagonal condition: (1 + |r|) / (1 - |r|), 1 - r^2 = s2c / s2
    with np.errstate(divide="ignore", invalid="ignore"):
        one_minus_r2 = np.where(s2 > 0, s2c / s2, 0.0)
        r = np.sqrt(np.clip(1.0 - one_minus_r2, 0.0, 1.0))
        cond = np.where(r < 1, (1 + r) / (1 - r), np.inf)
    ridged = cond > RIDGE_TRIGGER

    # centered solution in scaled coordinates u; slope per year is /h
    with np.errstate(divide="ignore", invalid="ignore"):
        Wslope = w * uc / s2c[:, None]
    S = w / s0[:, None] - ubar[:, None] * Wslope
    Dh = Wslope / h

    if np.any(ridged):
        if ridge <= 0:
            raise DegenerateWindow(f"local design singular at h={h} and ridge is zero")
        for i in np.flatnonzero(ridged):
            A = np.array([[s0[i], s1[i]], [s1[i], s2[i] + ridge]])
            X = np.vstack([w[i], w[i] * u[i]])
            coef = np.linalg.solve(A, X)
            S[i] = coef[0]
            Dh[i] = coef[1] / h
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Dh))):
        raise DegenerateWindow(f"non-finite smoother weights at h={h}")
    S.setflags(write=False)
    Dh.setflags(write=False)
    return SmootherPair(float(h), S, Dh, np.flatnonzero(ridged))


@dataclass(frozen=True, eq=False)
class DerivativeField:
    """Smoothed-derivative draws per scale plus posterior-mean smooths."""

    grid: ScaleGrid
    times: np.ndarray
    Z: list[np.ndarray]
    mean_smooth: np.ndarray
    mean_deriv: np.ndarray

    @property
    def K(self) -> int:
        return len(self.Z)

    @property
    def n(self) -> int:
        return self.times.size


def push_draws(draws: PosteriorDraws, grid: ScaleGrid, ridge: float | None = None,
               smoothers: list[SmootherPair] | None = None) -> DerivativeField:
    """Map every posterior draw of ``mu`` through each scale's operators.

    ``Z_k = mu_draws @ D_k.T``. By linearity the mean smooth equals the
    smooth of the posterior mean, which is what is stored.
    """
    mu = draws.mu_draws
    if mu.ndim != 2 or mu.shape[1] != draws.times.size:
        raise DimensionMismatch(f"mu_draws shape {mu.shape} vs {draws.times.size} times")
    if ridge is None:
        ridge = draws.config_echo.ridge
    if smoothers is None:
        smoothers = [local_linear_smoother(draws.times, h, ridge) for h in grid.bandwidths]
    if len(smoothers) != grid.K:
        raise DimensionMismatch("one smoother per bandwidth required")
    mean_mu = mu.mean(axis=0)
    Z = []
    mean_smooth = np.empty((grid.K, mu.shape[1]))
    mean_deriv = np.empty((grid.K, mu.shape[1]))
    for k, sp in enumerate(smoothers):
        if sp.S.shape != (mu.shape[1], mu.shape[1]):
            raise DimensionMismatch(f"smoother {k} has shape {sp.S.shape}")
        Zk = mu @ sp.D_h.T
        Zk.setflags(write=False)
        Z.append(Zk)
        mean_smooth[k] = sp.S @ mean_mu
        mean_deriv[k] = sp.D_h @ mean_mu
    return DerivativeField(grid, np.array(draws.times), Z, mean_smooth, mean_deriv)
