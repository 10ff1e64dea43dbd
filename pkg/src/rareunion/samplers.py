"""Low-level conditional tail samplers.

All routines are pure functions of their parameters and the supplied
generator; thread safety is the caller's stream discipline (one derived
stream per worker).  Scalar and batched forms share one code path: pass
``size=None`` for a single draw.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "shifted_exponential_rate",
    "sample_truncated_std_normal",
    "GaussianConditional",
    "sample_conditional_mvn",
    "sample_conditional_mvn_pair",
    "gibbs_bivariate_truncated",
    "sample_inverse_gaussian",
    "laplace_conditional_exceedance",
]

SQRT2 = math.sqrt(2.0)


def shifted_exponential_rate(gamma: float) -> float:
    """Optimal rate of the shifted-exponential proposal for the tail beyond gamma.

    Maximizes the acceptance probability of the rejection scheme; the
    acceptance stays above one half for any non-negative truncation point
    and tends to one deep in the tail.
    """
    return 0.5 * (gamma + math.sqrt(gamma * gamma + 4.0))


def _trunc_std_normal_batch(gammas: np.ndarray, rng) -> np.ndarray:
    """N(0,1) conditioned on exceeding per-element thresholds.

    Shifted-exponential proposals where the threshold is non-negative,
    plain rejection from the untruncated normal elsewhere (acceptance at
    least one half in both regimes).
    """
    gammas = np.asarray(gammas, dtype=float)
    out = np.empty(gammas.shape)
    pending = np.arange(gammas.size)
    flat = gammas.ravel()
    res = out.ravel()
    while pending.size:
        g = flat[pending]
        pos = g >= 0.0
        n = pending.size
        cand = np.empty(n)
        accept = np.zeros(n, dtype=bool)
        if pos.any():
            gp = g[pos]
            lam = 0.5 * (gp + np.sqrt(gp * gp + 4.0))
            c = gp + rng.exponential(1.0, gp.size) / lam
            logu = np.log(rng.random(gp.size))
            cand[pos] = c
            accept[pos] = logu < -0.5 * (c - lam) ** 2
        if (~pos).any():
            m = int((~pos).sum())
            c = rng.standard_normal(m)
            cand[~pos] = c
            accept[~pos] = c > g[~pos]
        res[pending[accept]] = cand[accept]
        pending = pending[~accept]
    return out


def sample_truncated_std_normal(gamma: float, rng, size=None):
    """Draw from N(0,1) conditioned on being greater than ``gamma``."""
    if size is None:
        return float(_trunc_std_normal_batch(np.array([gamma]), rng)[0])
    return _trunc_std_normal_batch(np.full(int(size), float(gamma)), rng)


class GaussianConditional:
    """Conditional law of the remaining coordinates of a Gaussian vector.

    Precomputes the regression coefficients and the Cholesky factor of the
    Schur complement for a fixed set of conditioning indices, so repeated
    draws are a matrix multiply plus white noise.
    """

    def __init__(self, mu, sigma, given):
        mu = np.asarray(mu, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        d = mu.size
        given = tuple(int(i) for i in given)
        if len(set(given)) != len(given):
            raise ValueError("conditioning indices must be distinct")
        rest = tuple(k for k in range(d) if k not in given)
        self.given = given
        self.rest = rest
        self.mu_given = mu[list(given)]
        self.mu_rest = mu[list(rest)]
        s_gg = sigma[np.ix_(given, given)]
        s_rg = sigma[np.ix_(rest, given)]
        self.coef = np.linalg.solve(s_gg, s_rg.T).T  # (len(rest), len(given))
        cond_cov = sigma[np.ix_(rest, rest)] - self.coef @ s_rg.T
        # symmetrize before factoring; tiny asymmetry comes from the solve
        cond_cov = 0.5 * (cond_cov + cond_cov.T)
        if rest:
            self.chol = np.linalg.cholesky(cond_cov + 0.0)
        else:
            self.chol = np.zeros((0, 0))

    def draw(self, values, rng):
        """Sample the remaining coordinates given the conditioned values.

        ``values`` has shape (n, k) for k conditioning indices; returns
        (n, d-k) in the order of the non-conditioned indices.
        """
        values = np.atleast_2d(np.asarray(values, dtype=float))
        n = values.shape[0]
        mean = self.mu_rest + (values - self.mu_given) @ self.coef.T
        z = rng.standard_normal((n, len(self.rest)))
        return mean + z @ self.chol.T


def sample_conditional_mvn(model, i: int, x_i, rng, size=None):
    """Draw the other coordinates of a Gaussian model given ``X_i = x_i``.

    ``x_i`` may be a scalar (with ``size`` draws at that value) or a batch;
    output rows follow the order of the remaining indices.
    """
    cond = GaussianConditional(model.mu, model.sigma, (i,))
    x_i = np.asarray(x_i, dtype=float)
    if x_i.ndim == 0:
        n = 1 if size is None else int(size)
        values = np.full((n, 1), float(x_i))
        out = cond.draw(values, rng)
        return out[0] if size is None else out
    return cond.draw(x_i[:, None], rng)


def sample_conditional_mvn_pair(model, i: int, j: int, x_i, x_j, rng, size=None):
    """Same as :func:`sample_conditional_mvn` for two conditioned coordinates."""
    cond = GaussianConditional(model.mu, model.sigma, (i, j))
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if x_i.ndim == 0:
        n = 1 if size is None else int(size)
        values = np.column_stack([np.full(n, float(x_i)), np.full(n, float(x_j))])
        out = cond.draw(values, rng)
        return out[0] if size is None else out
    return cond.draw(np.column_stack([x_i, x_j]), rng)


def gibbs_bivariate_truncated(model, i: int, j: int, gamma: float, burnin: int, rng, size=None):
    """Approximate draw from ``(X_i, X_j)`` given both exceed ``gamma``.

    Alternates the two univariate truncated-normal full conditionals.  One
    independent chain per requested draw, each burned in from an
    independent-truncation start, so draws carry no serial correlation;
    the only approximation is the finite burn-in.  Every returned pair
    satisfies the constraint by construction.
    """
    if burnin < 1:
        raise ValueError("burnin must be at least 1")
    n = 1 if size is None else int(size)
    mu = np.asarray(model.mu, dtype=float)
    sigma = np.asarray(model.sigma, dtype=float)
    si = math.sqrt(sigma[i, i])
    sj = math.sqrt(sigma[j, j])
    rho = sigma[i, j] / (si * sj)
    ti = (gamma - mu[i]) / si
    tj = (gamma - mu[j]) / sj
    s = math.sqrt(max(1.0 - rho * rho, 0.0))
    if s == 0.0:
        raise ValueError("degenerate pair correlation; the chain cannot move")
    zi = _trunc_std_normal_batch(np.full(n, ti), rng)
    zj = _trunc_std_normal_batch(np.full(n, tj), rng)
    for _ in range(int(burnin)):
        zj = rho * zi + s * _trunc_std_normal_batch((tj - rho * zi) / s, rng)
        zi = rho * zj + s * _trunc_std_normal_batch((ti - rho * zj) / s, rng)
    xi = mu[i] + si * zi
    xj = mu[j] + sj * zj
    if size is None:
        return float(xi[0]), float(xj[0])
    return xi, xj


def sample_inverse_gaussian(mu, lam, rng, size=None):
    """Inverse Gaussian draws by the transform-with-rejection method.

    Solves the quadratic for the transformed chi-square variate and picks
    the root with the correct probability.  Parameters may be scalars or
    arrays (broadcast elementwise).
    """
    mu = np.asarray(mu, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if (mu <= 0).any() or (lam <= 0).any():
        raise ValueError("inverse Gaussian parameters must be strictly positive")
    shape = np.broadcast_shapes(mu.shape, lam.shape, () if size is None else (int(size),))
    mu = np.broadcast_to(mu, shape)
    lam = np.broadcast_to(lam, shape)
    nu = rng.standard_normal(shape)
    y = nu * nu
    w = mu * y / lam
    # smaller root of the quadratic, written without cancellation
    denom = 1.0 + 0.5 * w + 0.5 * np.sqrt(w * (4.0 + w))
    x = mu / denom
    take_root = rng.random(shape) <= mu / (mu + x)
    out = np.where(take_root, x, mu * denom)
    if size is None and out.ndim == 0:
        return float(out)
    return out


def laplace_conditional_exceedance(d: int, i: int, gamma: float, rng, size=None):
    """Sample the common-factor Laplace vector given ``X_i > gamma``.

    Exploits memorylessness of the exponential tail of component i and the
    exact conditional law of the underlying Gaussian coordinate given the
    product ``sqrt(R) Y_i``: that coordinate is the square root of an
    inverse Gaussian.  Requires a positive threshold.
    """
    if gamma <= 0.0:
        raise ValueError("the conditional exceedance sampler needs gamma > 0")
    if not 0 <= i < d:
        raise ValueError(f"index {i} out of range for dimension {d}")
    n = 1 if size is None else int(size)
    x_i = gamma + rng.exponential(1.0 / SQRT2, n)
    y_i = np.sqrt(sample_inverse_gaussian(SQRT2 * x_i, 2.0 * x_i * x_i, rng))
    out = np.empty((n, d))
    out[:, i] = x_i
    rest = [k for k in range(d) if k != i]
    if rest:
        y_rest = rng.standard_normal((n, d - 1))
        out[:, rest] = (x_i / y_i)[:, None] * y_rest
    return out[0] if size is None else out


def rejection_pair_exceedance_oracle(model, i: int, j: int, gamma: float, rng, raw: int):
    """Reference sampler for ``(X_i, X_j) | min > gamma`` by plain rejection.

    Draws ``raw`` unconditional vectors and keeps the qualifying pairs.
    Only feasible at moderate thresholds; used to validate the Gibbs
    sampler empirically.
    """
    kept_i = []
    kept_j = []
    step = 1 << 16
    done = 0
    while done < raw:
        m = min(step, raw - done)
        x = model.sample(rng, m)
        ok = (x[:, i] > gamma) & (x[:, j] > gamma)
        kept_i.append(x[ok, i])
        kept_j.append(x[ok, j])
        done += m
    return np.concatenate(kept_i), np.concatenate(kept_j)


def _laplace_sqrt_ig_pdf(y, x_i):
    """Density of the Gaussian coordinate given the observed product, at x_i.

    It is the density of the square root of an inverse Gaussian with mean
    ``sqrt(2) x_i`` and shape ``2 x_i**2``; used by distribution tests.
    """
    y = np.asarray(y, dtype=float)
    x = float(x_i)
    out = np.zeros_like(y)
    pos = y > 0
    yy = y[pos]
    out[pos] = (
        2.0 * x / (math.sqrt(math.pi) * yy * yy)
        * np.exp(-(x * x) / (yy * yy) - 0.5 * yy * yy + SQRT2 * x)
    )
    return out
