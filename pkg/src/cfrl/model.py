"""Hierarchical treatment-effect regression over rule-list subgroups.

Given a subgroup assignment z with L blocks (block L is the fall-through
default), each row n contributes

    y_n ~ Normal(t_n * D_{z_n} + x_n . beta_{z_n}, 1 / lam_{z_n})

with per-block treatment effects reparameterized through positive gaps,

    D_l = delta_l + delta_{l+1} + ... + delta_L,

so delta_l ~ U(0, s0) for l < L and delta_L ~ U(r0, s0) force
D_1 > D_2 > ... > D_L: effects fall down the list by construction.

Coefficient vectors beta_l live on K = k_h + k_i covariate columns. The
first k_h columns are hierarchical, beta ~ N(m, (tau I)^-1) with m ~
N(0, (c0 I)^-1) and tau ~ Gamma(v0/2, 1/(2 w0)) (the 1-D Wishart); the
remaining columns get the fixed prior N(0, (u0 I)^-1). Noise precisions are
lam_l ~ Gamma(alpha0, beta0), shape-rate.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class Hyperparameters:
    s0: float  # upper end of every gap box
    r0: float  # lower end of the last gap box; 0 or negative in practice
    v0: float = 2.0
    w0: float = 1.0
    c0: float = 1e-2
    u0: float = 1e-2
    alpha0: float = 1e-2
    beta0: float = 1e-2

    def __post_init__(self):
        if not np.isfinite(self.s0) or self.s0 <= 0:
            raise ParameterError(f"s0 must be positive and finite, got {self.s0}")
        if not np.isfinite(self.r0) or self.r0 >= self.s0:
            raise ParameterError(f"r0 must be below s0, got r0={self.r0}, s0={self.s0}")
        for name in ("v0", "w0", "c0", "u0", "alpha0", "beta0"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be positive and finite, got {value}")

    @classmethod
    def from_outcomes(cls, y, **overrides):
        """Outcome-scaled gap box: s0 = 10 sd(y), r0 = -s0."""
        y = np.asarray(y, dtype=float)
        sd = float(y.std())
        if sd == 0.0:
            raise ParameterError("outcomes are constant; cannot scale the gap box")
        base = {"s0": 10.0 * sd, "r0": -10.0 * sd}
        base.update(overrides)
        return cls(**base)

    def gap_box(self, l, n_blocks):
        """Support (lo, hi) of delta_l, 1-based l."""
        if l == n_blocks:
            return self.r0, self.s0
        return 0.0, self.s0


@dataclass
class LatentParams:
    """One point in parameter space for a fixed block count L."""

    delta: np.ndarray  # (L,) effect gaps
    beta: np.ndarray  # (L, K) per-block coefficients
    lam: np.ndarray  # (L,) noise precisions
    m: np.ndarray  # (k_h,) hierarchical coefficient mean
    tau: float  # hierarchical coefficient precision

    def __post_init__(self):
        L = len(self.delta)
        if self.beta.shape[0] != L or len(self.lam) != L:
            raise DimensionError("delta, beta, lam disagree on the block count")

    @property
    def n_blocks(self):
        return len(self.delta)

    @property
    def k_h(self):
        return len(self.m)

    @property
    def effects(self):
        """Block treatment effects D, the reverse cumulative gaps."""
        return treatment_effects(self.delta)

    def with_(self, **fields):
        return replace(self, **fields)


def treatment_effects(delta):
    delta = np.asarray(delta, dtype=float)
    return np.cumsum(delta[::-1])[::-1]


def sample_prior(hyper, n_blocks, n_covariates, k_h, rng):
    """One prior draw; draw order is tau, m, beta, lam, delta."""
    if not 0 <= k_h <= n_covariates:
        raise ParameterError(f"k_h must lie in [0, {n_covariates}], got {k_h}")
    tau = rng.gamma(shape=hyper.v0 / 2.0, scale=2.0 * hyper.w0)
    m = rng.normal(0.0, 1.0 / np.sqrt(hyper.c0), size=k_h)
    prior_mean = np.concatenate([m, np.zeros(n_covariates - k_h)])
    prior_sd = np.concatenate(
        [np.full(k_h, 1.0 / np.sqrt(tau)), np.full(n_covariates - k_h, 1.0 / np.sqrt(hyper.u0))]
    )
    beta = prior_mean + prior_sd * rng.standard_normal((n_blocks, n_covariates))
    lam = rng.gamma(shape=hyper.alpha0, scale=1.0 / hyper.beta0, size=n_blocks)
    delta = rng.uniform(0.0, hyper.s0, size=n_blocks)
    delta[-1] = rng.uniform(hyper.r0, hyper.s0)
    return LatentParams(delta=delta, beta=beta, lam=lam, m=m, tau=float(tau))


@dataclass(frozen=True)
class PotentialOutcomes:
    y0: np.ndarray
    y1: np.ndarray

    def observed(self, t):
        return np.where(np.asarray(t) == 1, self.y1, self.y0)


def simulate_outcomes(params, z, covariates, rng):
    """Draw both potential outcomes; y1 - y0 is exactly the block effect."""
    z = np.asarray(z)
    covariates = np.asarray(covariates, dtype=float)
    block = z - 1
    base = np.einsum("nk,nk->n", covariates, params.beta[block])
    noise = rng.standard_normal(len(z)) / np.sqrt(params.lam[block])
    y0 = base + noise
    return PotentialOutcomes(y0=y0, y1=y0 + params.effects[block])


# ---------------------------------------------------------------------------
# joint density

_LOG_2PI = np.log(2.0 * np.pi)


def _in_support(params, hyper):
    L = params.n_blocks
    lo = np.zeros(L)
    lo[-1] = hyper.r0
    if np.any(params.delta < lo) or np.any(params.delta > hyper.s0):
        return False
    if np.any(params.lam <= 0) or params.tau <= 0:
        return False
    return True


def log_joint(params, hyper, z, covariates, t, y):
    """log p(params, y | z, x, t); -inf outside the parameter support."""
    if not _in_support(params, hyper):
        return -np.inf
    z = np.asarray(z)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    covariates = np.asarray(covariates, dtype=float)
    L = params.n_blocks
    k_h = params.k_h
    k_i = params.beta.shape[1] - k_h

    block = z - 1
    mean = t * params.effects[block] + np.einsum("nk,nk->n", covariates, params.beta[block])
    resid = y - mean
    lam_n = params.lam[block]
    total = 0.5 * np.sum(np.log(lam_n)) - 0.5 * len(y) * _LOG_2PI
    total -= 0.5 * np.sum(lam_n * resid**2)

    # gap priors: uniform boxes, one widened box for the last block
    total -= (L - 1) * np.log(hyper.s0) + np.log(hyper.s0 - hyper.r0)

    # coefficient priors
    beta_h = params.beta[:, :k_h]
    beta_i = params.beta[:, k_h:]
    total += 0.5 * L * k_h * (np.log(params.tau) - _LOG_2PI)
    total -= 0.5 * params.tau * np.sum((beta_h - params.m) ** 2)
    total += 0.5 * L * k_i * (np.log(hyper.u0) - _LOG_2PI)
    total -= 0.5 * hyper.u0 * np.sum(beta_i**2)

    # hierarchical mean and precision
    total += 0.5 * k_h * (np.log(hyper.c0) - _LOG_2PI) - 0.5 * hyper.c0 * np.sum(params.m**2)
    shape, rate = hyper.v0 / 2.0, 1.0 / (2.0 * hyper.w0)
    total += shape * np.log(rate) - gammaln(shape)
    total += (shape - 1.0) * np.log(params.tau) - rate * params.tau

    # noise precisions
    total += L * (hyper.alpha0 * np.log(hyper.beta0) - gammaln(hyper.alpha0))
    total += np.sum((hyper.alpha0 - 1.0) * np.log(params.lam) - hyper.beta0 * params.lam)
    return float(total)


def log_joint_grad(params, hyper, z, covariates, t, y):
    """Analytic gradient of log_joint in each continuous coordinate.

    Returned as a LatentParams of the same shapes. The delta components are
    the interior gradients; uniform priors contribute nothing there.
    """
    z = np.asarray(z)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    covariates = np.asarray(covariates, dtype=float)
    L = params.n_blocks
    k_h = params.k_h

    block = z - 1
    resid = y - t * params.effects[block] - np.einsum(
        "nk,nk->n", covariates, params.beta[block]
    )
    lam_n = params.lam[block]

    # per-block likelihood pieces
    g_beta = np.zeros_like(params.beta)
    g_D = np.zeros(L)
    g_lam = np.zeros(L)
    for l in range(L):
        rows = block == l
        g_beta[l] = params.lam[l] * covariates[rows].T @ resid[rows]
        g_D[l] = params.lam[l] * np.sum(t[rows] * resid[rows])
        g_lam[l] = 0.5 * np.sum(rows) / params.lam[l] - 0.5 * np.sum(resid[rows] ** 2)
    # delta_j feeds every effect above it: dD_l/ddelta_j = 1 for l <= j
    g_delta = np.cumsum(g_D)

    centered = params.beta[:, :k_h] - params.m
    g_beta[:, :k_h] -= params.tau * centered
    g_beta[:, k_h:] -= hyper.u0 * params.beta[:, k_h:]
    g_m = params.tau * centered.sum(axis=0) - hyper.c0 * params.m
    g_tau = 0.5 * L * k_h / params.tau - 0.5 * np.sum(centered**2)
    g_tau += (hyper.v0 / 2.0 - 1.0) / params.tau - 1.0 / (2.0 * hyper.w0)
    g_lam += (hyper.alpha0 - 1.0) / params.lam - hyper.beta0
    return LatentParams(delta=g_delta, beta=g_beta, lam=g_lam, m=g_m, tau=float(g_tau))


# ---------------------------------------------------------------------------
# sufficient statistics

@dataclass(frozen=True)
class SubgroupStats:
    """Per-block data moments; everything downstream of the raw rows.

    Both posterior routines score a candidate subgroup structure through
    these, so a fit costs O(L K^3) per pass after one O(N K^2) reduction.
    """

    n: np.ndarray  # (L,) row counts
    nt: np.ndarray  # (L,) treated row counts; t is 0/1 so this is sum t^2 too
    sy: np.ndarray  # (L,) sum y
    syy: np.ndarray  # (L,) sum y^2
    sty: np.ndarray  # (L,) sum t y
    sx: np.ndarray  # (L, K) sum x
    stx: np.ndarray  # (L, K) sum t x
    sxy: np.ndarray  # (L, K) sum y x
    sxx: np.ndarray  # (L, K, K) sum x x'

    @property
    def n_blocks(self):
        return len(self.n)

    @property
    def n_covariates(self):
        return self.sx.shape[1]

    @classmethod
    def from_data(cls, z, covariates, t, y, n_blocks):
        z = np.asarray(z)
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        x = np.asarray(covariates, dtype=float)
        if np.any(z < 1) or np.any(z > n_blocks):
            raise DimensionError("subgroup labels out of range")
        k = x.shape[1]
        n = np.zeros(n_blocks)
        nt = np.zeros(n_blocks)
        sy = np.zeros(n_blocks)
        syy = np.zeros(n_blocks)
        sty = np.zeros(n_blocks)
        sx = np.zeros((n_blocks, k))
        stx = np.zeros((n_blocks, k))
        sxy = np.zeros((n_blocks, k))
        sxx = np.zeros((n_blocks, k, k))
        for l in range(n_blocks):
            rows = z == l + 1
            xl = x[rows]
            tl = t[rows]
            yl = y[rows]
            n[l] = len(yl)
            nt[l] = tl.sum()
            sy[l] = yl.sum()
            syy[l] = yl @ yl
            sty[l] = tl @ yl
            sx[l] = xl.sum(axis=0)
            stx[l] = tl @ xl
            sxy[l] = yl @ xl
            sxx[l] = xl.T @ xl
        return cls(n=n, nt=nt, sy=sy, syy=syy, sty=sty, sx=sx, stx=stx, sxy=sxy, sxx=sxx)

    def ssr(self, beta, effects):
        """Per-block sum of squared residuals at point parameters."""
        quad = np.einsum("lk,lkj,lj->l", beta, self.sxx, beta)
        cross = np.einsum("lk,lk->l", self.sxy, beta)
        tcross = np.einsum("lk,lk->l", self.stx, beta)
        return (
            self.syy
            - 2.0 * effects * self.sty
            - 2.0 * cross
            + 2.0 * effects * tcross
            + effects**2 * self.nt
            + quad
        )
