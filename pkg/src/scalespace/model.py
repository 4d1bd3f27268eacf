"""Additive-error model ``y = mu(t) + eps`` and its Gibbs sampler.

Prior structure (shape/rate parameterization throughout)::

    mu | lam      ~ intrinsic Gaussian, density  lam^((n-2)/2) exp(-lam/2 |D mu|^2)
    eps | sigma2  ~ Normal(0, sigma2 * Sigma_e)
    sigma2        ~ InvGamma(a0, b0)
    lam           ~ Gamma(a_lam, b_lam)

``D`` is the scaled second divided-difference operator, so linear trends
are unpenalized, and ``Sigma_e`` is a fixed AR(1) correlation matrix
scaled by the known per-point standard errors.

The rate ``b_lam`` is stated for time rescaled to the unit interval, so
the same hyperprior means the same thing whatever the time unit and span.
On the year-scaled operator the effective rate is ``b_lam / span**4``;
``lambda_draws`` are reported on the year-scaled operator.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .errors import (
    CholeskyFailure,
    DegenerateSpacing,
    InvalidConfig,
    NonFiniteDraw,
    RhoOutOfRange,
)
from .series_io import TimeSeries


@dataclass(frozen=True)
class ModelConfig:
    a0: float = 0.01
    b0: float = 0.01
    a_lam: float = 0.01
    b_lam: float = 0.01
    rho: float = 0.0
    burn_in: int = 1000
    n_draws: int = 4000
    thin: int = 1
    seed: int = 42
    ridge: float = 1e-8
    # Holds lam at this value instead of sampling it (limiting-case checks).
    lambda_fixed: float | None = None

    def __post_init__(self):
        for name in ("a0", "b0", "a_lam", "b_lam"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidConfig(f"{name} must be positive and finite, got {v}")
        if not (math.isfinite(self.rho) and abs(self.rho) < 1):
            raise RhoOutOfRange(f"rho must lie in (-1, 1), got {self.rho}")
        if self.burn_in < 0 or int(self.burn_in) != self.burn_in:
            raise InvalidConfig("burn_in must be a nonnegative integer")
        if self.n_draws < 1 or int(self.n_draws) != self.n_draws:
            raise InvalidConfig("n_draws must be a positive integer")
        if self.thin < 1 or int(self.thin) != self.thin:
            raise InvalidConfig("thin must be a positive integer")
        if self.seed < 0 or int(self.seed) != self.seed:
            raise InvalidConfig("seed must be a nonnegative integer")
        if not (math.isfinite(self.ridge) and self.ridge >= 0):
            raise InvalidConfig("ridge must be nonnegative")
        if self.lambda_fixed is not None and not (
            math.isfinite(self.lambda_fixed) and self.lambda_fixed > 0
        ):
            raise InvalidConfig("lambda_fixed must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    mu_draws: np.ndarray
    sigma2_draws: np.ndarray
    lambda_draws: np.ndarray
    config_echo: ModelConfig
    times: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("mu_draws", "sigma2_draws", "lambda_draws", "times"):
            getattr(self, name).setflags(write=False)

    @property
    def n_draws(self) -> int:
        return self.mu_draws.shape[0]

    def posterior_mean(self) -> np.ndarray:
        return self.mu_draws.mean(axis=0)


def second_difference_operator(times) -> np.ndarray:
    """``(n-2) x n`` matrix whose rows are twice the second divided differences.

    For equally spaced unit times each row is the stencil ``(1, -2, 1)``.
    """
    t = np.asarray(times, dtype=float)
    n = t.size
    if n < 3:
        raise DegenerateSpacing(f"need at least 3 times, got {n}")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise DegenerateSpacing("times must be strictly increasing (duplicate or decreasing time)")
    h0 = dt[:-1]
    h1 = dt[1:]
    span = h0 + h1
    D = np.zeros((n - 2, n))
    rows = np.arange(n - 2)
    D[rows, rows] = 2.0 / (h0 * span)
    D[rows, rows + 1] = -2.0 / (h0 * h1)
    D[rows, rows + 2] = 2.0 / (h1 * span)
    return D


def error_covariance(series: TimeSeries, rho: float):
    """Unit-variance error covariance ``diag(s) C diag(s)``, ``C_ij = rho^|i-j|``.

    Returns ``(Sigma_e, L)`` with ``L`` the lower Cholesky factor.
    """
    if not (math.isfinite(rho) and abs(rho) < 1):
        raise RhoOutOfRange(f"rho must lie in (-1, 1), got {rho}")
    n = series.n
    idx = np.arange(n)
    lag = np.abs(idx[:, None] - idx[None, :])
    C = np.power(rho, lag) if rho != 0 else np.eye(n)
    s = series.stderrs if series.stderrs is not None else np.ones(n)
    cov = s[:, None] * C * s[None, :]
    try:
        L = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise CholeskyFailure(f"error covariance not positive definite: {exc}") from None
    return cov, L


class GibbsSampler:
    """Full conditionals of the model for one series.

    The three ``draw_*`` methods are exposed so the conditionals can be
    checked in isolation; :meth:`run` chains them in the order mu, sigma2,
    lam.
    """

    def __init__(self, series: TimeSeries, config: ModelConfig):
        self.series = series
        self.config = config
        self.y = np.asarray(series.values, dtype=float)
        self.n = series.n
        self.D = second_difference_operator(series.times)
        self.DtD = self.D.T @ self.D
        _, L = error_covariance(series, config.rho)
        Linv = linalg.solve_triangular(L, np.eye(self.n), lower=True)
        # Sigma_e^{-1} = L^{-T} L^{-1}
        self.prec_e = Linv.T @ Linv
        self.prec_e = 0.5 * (self.prec_e + self.prec_e.T)
        self.prec_y = self.prec_e @ self.y
        span = float(series.times[-1] - series.times[0])
        self.lambda_rate = config.b_lam / span**4
        self.cholesky_calls = 0

    def draw_mu(self, rng: np.random.Generator, sigma2: float, lam: float) -> np.ndarray:
        """Sample ``mu ~ N(Q^{-1} b, Q^{-1})`` with ``Q = Sigma_e^{-1}/sigma2 + lam D'D``."""
        Q = self.prec_e / sigma2 + lam * self.DtD
        try:
            U = linalg.cholesky(Q, lower=False, check_finite=True)
        except (linalg.LinAlgError, ValueError) as exc:
            raise CholeskyFailure(
                f"posterior precision not positive definite (sigma2={sigma2:g}, lam={lam:g}): {exc}"
            ) from None
        self.cholesky_calls += 1
        b = self.prec_y / sigma2
        # Q = U'U: mean solves U'U m = b; U^{-1} z has covariance Q^{-1}
        w = linalg.solve_triangular(U, b, trans="T", lower=False)
        z = rng.standard_normal(self.n)
        return linalg.solve_triangular(U, w + z, lower=False)

    def draw_sigma2(self, rng: np.random.Generator, mu: np.ndarray) -> float:
        r = self.y - mu
        shape = self.config.a0 + 0.5 * self.n
        rate = self.config.b0 + 0.5 * float(r @ self.prec_e @ r)
        return rate / rng.gamma(shape)

    def draw_lambda(self, rng: np.random.Generator, mu: np.ndarray) -> float:
        if self.config.lambda_fixed is not None:
            return float(self.config.lambda_fixed)
        dm = self.D @ mu
        shape = self.config.a_lam + 0.5 * (self.n - 2)
        rate = self.lambda_rate + 0.5 * float(dm @ dm)
        return rng.gamma(shape) / rate

    def initial_state(self) -> tuple[float, float]:
        dy = self.D @ self.y
        roughness = float(dy @ dy)
        lam = (self.n - 2) / roughness if roughness > 0 else 1.0
        if self.config.lambda_fixed is not None:
            lam = float(self.config.lambda_fixed)
        sigma2 = float(np.var(self.y))
        if not sigma2 > 0:
            sigma2 = 1.0
        return sigma2, lam

    def run(self, rng: np.random.Generator | None = None) -> PosteriorDraws:
        cfg = self.config
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        M = cfg.n_draws
        mu_out = np.empty((M, self.n))
        s2_out = np.empty(M)
        lam_out = np.empty(M)

        sigma2, lam = self.initial_state()
        total = cfg.burn_in + M * cfg.thin
        kept = 0
        for sweep in range(total):
            mu = self.draw_mu(rng, sigma2, lam)
            sigma2 = self.draw_sigma2(rng, mu)
            lam = self.draw_lambda(rng, mu)
            if not (np.all(np.isfinite(mu)) and math.isfinite(sigma2) and math.isfinite(lam)
                    and sigma2 > 0 and lam > 0):
                raise NonFiniteDraw(f"non-finite or non-positive state at sweep {sweep}")
            past = sweep - cfg.burn_in
            if past >= 0 and (past + 1) % cfg.thin == 0:
                mu_out[kept] = mu
                s2_out[kept] = sigma2
                lam_out[kept] = lam
                kept += 1

        diagnostics = {
            "sweeps": total,
            "cholesky_ok": self.cholesky_calls,
            "retained": kept,
        }
        return PosteriorDraws(mu_out, s2_out, lam_out, cfg,
                              np.array(self.series.times, dtype=float), diagnostics)


def gibbs_sample(series: TimeSeries, config: ModelConfig) -> PosteriorDraws:
    """Run one seeded chain; output is a deterministic function of the inputs."""
    return GibbsSampler(series, config).run()
