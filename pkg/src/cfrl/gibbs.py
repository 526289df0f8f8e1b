"""Blocked Gibbs sampling of the block regression posterior.

One sweep resamples, in order, each coefficient block from its Gaussian
conditional, each gap from its truncated-Gaussian conditional (top to
bottom), each noise precision from its Gamma conditional, then the hierarchy
mean and precision. The conditionals mirror the coordinate-ascent updates
with point values in place of moments, which is what makes the sampler a
useful cross-check on the variational answers.

The per-distribution conditional parameter functions are module level so a
test can target one conditional at a time.
"""

from dataclasses import dataclass

import numpy as np

from . import truncnorm
from ._util import write_csv
from .errors import NumericalError, ParameterError
from .model import LatentParams, sample_prior


def _gap_box(hyper, j, n_blocks):
    if j == n_blocks - 1:
        return hyper.r0, hyper.s0
    return 0.0, hyper.s0


def cond_beta(l, params, stats, hyper):
    """Gaussian conditional of coefficient block l (0-based): (mean, cov)."""
    k = stats.n_covariates
    k_h = params.k_h
    prior_diag = np.concatenate([np.full(k_h, params.tau), np.full(k - k_h, hyper.u0)])
    prior_term = np.zeros(k)
    prior_term[:k_h] = params.tau * params.m
    precision = params.lam[l] * stats.sxx[l] + np.diag(prior_diag)
    rhs = params.lam[l] * (stats.sxy[l] - params.effects[l] * stats.stx[l]) + prior_term
    try:
        cov = np.linalg.inv(precision)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            "coefficient conditional not invertible", subgroup=l + 1
        ) from exc
    return cov @ rhs, cov


def cond_delta(j, params, stats, hyper):
    """Truncated-Gaussian conditional of gap j (0-based): (loc, scale, lo, hi).

    scale is inf when no treated rows reach block j or above, in which case
    the conditional falls back to the flat prior box.
    """
    lo, hi = _gap_box(hyper, j, params.n_blocks)
    effects = params.effects
    tcross = np.einsum("lk,lk->l", stats.stx[: j + 1], params.beta[: j + 1])
    rest = effects[: j + 1] - params.delta[j]
    weight = params.lam[: j + 1] * stats.nt[: j + 1]
    p = float(np.sum(weight))
    h = float(np.sum(params.lam[: j + 1] * (stats.sty[: j + 1] - tcross) - weight * rest))
    if p <= 0.0:
        return 0.0, np.inf, lo, hi
    return h / p, 1.0 / np.sqrt(p), lo, hi


def cond_lam(l, params, stats, hyper):
    """Gamma conditional of noise precision l (0-based): (shape, rate)."""
    ssr = stats.ssr(params.beta, params.effects)[l]
    return hyper.alpha0 + 0.5 * stats.n[l], hyper.beta0 + 0.5 * max(ssr, 0.0)


def cond_m(params, stats, hyper):
    """Gaussian conditional of the hierarchy mean: (mean, shared variance)."""
    precision = hyper.c0 + params.n_blocks * params.tau
    mean = params.tau * params.beta[:, : params.k_h].sum(axis=0) / precision
    return mean, 1.0 / precision


def cond_tau(params, stats, hyper):
    """Gamma conditional of the hierarchy precision: (shape, rate)."""
    k_h = params.k_h
    dev = float(np.sum((params.beta[:, :k_h] - params.m) ** 2))
    shape = hyper.v0 / 2.0 + 0.5 * params.n_blocks * k_h
    return shape, 1.0 / (2.0 * hyper.w0) + 0.5 * dev


def gibbs_step(params, stats, hyper, rng):
    """One systematic sweep over every conditional; returns a new state.

    Within the sweep each conditional sees the freshest values of everything
    already resampled, which is what makes the scan a valid kernel.
    """
    work = LatentParams(
        delta=params.delta.copy(),
        beta=params.beta.copy(),
        lam=params.lam.copy(),
        m=params.m.copy(),
        tau=params.tau,
    )
    L = work.n_blocks
    for l in range(L):
        mean, cov = cond_beta(l, work, stats, hyper)
        try:
            root = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "coefficient conditional covariance not positive definite",
                subgroup=l + 1,
            ) from exc
        work.beta[l] = mean + root @ rng.standard_normal(len(mean))
    for j in range(L):
        loc, scale, lo, hi = cond_delta(j, work, stats, hyper)
        work.delta[j] = truncnorm.tn_sample(loc, scale, lo, hi, rng)
    # noise blocks are conditionally independent; one residual pass serves all
    ssr = stats.ssr(work.beta, work.effects)
    shapes = hyper.alpha0 + 0.5 * stats.n
    rates = hyper.beta0 + 0.5 * np.maximum(ssr, 0.0)
    work.lam = rng.gamma(shape=shapes, scale=1.0 / rates)
    if work.k_h:
        mean, var = cond_m(work, stats, hyper)
        work.m = mean + np.sqrt(var) * rng.standard_normal(work.k_h)
    shape, rate = cond_tau(work, stats, hyper)
    work.tau = float(rng.gamma(shape=shape, scale=1.0 / rate))
    return work


# ---------------------------------------------------------------------------
# chain driver

@dataclass
class GibbsTrace:
    """Kept draws, one row per retained sweep."""

    delta: np.ndarray  # (S, L)
    beta: np.ndarray  # (S, L, K)
    lam: np.ndarray  # (S, L)
    m: np.ndarray  # (S, k_h)
    tau: np.ndarray  # (S,)
    n_steps: int
    burn_in: int
    thin: int

    @property
    def n_kept(self):
        return len(self.tau)

    @property
    def effects(self):
        """(S, L) block effects per draw, reverse-cumulated gaps."""
        return np.cumsum(self.delta[:, ::-1], axis=1)[:, ::-1]

    def params_at(self, s):
        return LatentParams(
            delta=self.delta[s].copy(),
            beta=self.beta[s].copy(),
            lam=self.lam[s].copy(),
            m=self.m[s].copy(),
            tau=float(self.tau[s]),
        )

    def to_csv(self, path):
        L = self.delta.shape[1]
        k = self.beta.shape[2]
        k_h = self.m.shape[1]
        header = ["draw"]
        header += [f"delta_{l + 1}" for l in range(L)]
        header += [f"effect_{l + 1}" for l in range(L)]
        header += [f"lam_{l + 1}" for l in range(L)]
        header += [f"beta_{l + 1}_{j + 1}" for l in range(L) for j in range(k)]
        header += [f"m_{j + 1}" for j in range(k_h)]
        header += ["tau"]
        effects = self.effects
        rows = []
        for s in range(self.n_kept):
            row = [s]
            row += list(self.delta[s])
            row += list(effects[s])
            row += list(self.lam[s])
            row += list(self.beta[s].ravel())
            row += list(self.m[s])
            row += [self.tau[s]]
            rows.append(row)
        write_csv(path, header, rows)


def run_gibbs(stats, hyper, n_steps, rng, k_h=None, init=None, burn_in=None, thin=1):
    """Run the sweep kernel and keep the post-burn-in, thinned draws.

    burn_in defaults to 20% of n_steps. init defaults to a prior draw.
    """
    if k_h is None:
        k_h = stats.n_covariates
    if burn_in is None:
        burn_in = n_steps // 5
    if not 0 <= burn_in < n_steps:
        raise ParameterError(f"burn_in must lie in [0, {n_steps}), got {burn_in}")
    if thin < 1:
        raise ParameterError(f"thin must be >= 1, got {thin}")
    L = stats.n_blocks
    k = stats.n_covariates
    state = init if init is not None else sample_prior(hyper, L, k, k_h, rng)

    kept = []
    for step in range(1, n_steps + 1):
        state = gibbs_step(state, stats, hyper, rng)
        if step > burn_in and (step - burn_in) % thin == 0:
            kept.append(state)
    return GibbsTrace(
        delta=np.stack([s.delta for s in kept]),
        beta=np.stack([s.beta for s in kept]),
        lam=np.stack([s.lam for s in kept]),
        m=np.stack([s.m for s in kept]),
        tau=np.asarray([s.tau for s in kept]),
        n_steps=n_steps,
        burn_in=burn_in,
        thin=thin,
    )


def trace_effect_summary(trace):
    """Posterior means/sds of the block effects and gaps across kept draws."""
    effects = trace.effects
    return {
        "effect_mean": effects.mean(axis=0),
        "effect_sd": effects.std(axis=0, ddof=1),
        "delta_mean": trace.delta.mean(axis=0),
        "delta_sd": trace.delta.std(axis=0, ddof=1),
    }
