"""Joint laws of the underlying vector and their exceedance events.

Every model describes a random vector ``X`` of dimension ``d`` together
with the events ``A_i = {X_i > gamma}``.  The common surface is sampling,
marginal and pairwise exceedance probabilities, and handles for drawing
from the law conditioned on one event or on a pair of events.  Models are
immutable after construction and safe to share between workers; all
randomness flows through caller-supplied generators.

Models advertise what they can do through :class:`Capabilities`; the
estimators check those flags as preconditions instead of failing deep in
a sampling loop.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

from . import events as ev
from . import samplers
from .errors import CapabilityError, ModelSpecError
from .special import bivariate_normal_orthant, integrate, norm_sf

__all__ = [
    "Capabilities",
    "DependenceModel",
    "NormalModel",
    "LaplaceModel",
    "ArchimedeanModel",
    "AR1Model",
    "FinitePatternModel",
    "build_model",
]


@dataclass(frozen=True)
class Capabilities:
    marginal_prob: bool
    pair_prob: bool
    conditional_single: bool
    conditional_pair: bool


class DependenceModel(abc.ABC):
    """Abstract joint law with threshold-exceedance events."""

    @property
    @abc.abstractmethod
    def d(self) -> int:
        ...

    @property
    @abc.abstractmethod
    def capabilities(self) -> Capabilities:
        ...

    @abc.abstractmethod
    def sample(self, rng, size=None) -> np.ndarray:
        """One draw (shape ``(d,)``) or ``size`` draws (shape ``(size, d)``)."""

    def exceedance_patterns(self, x, gamma) -> np.ndarray:
        """Boolean event indicators for sampled vectors."""
        return np.atleast_2d(np.asarray(x, dtype=float)) > gamma

    def marginal_survival(self, i: int, gamma: float) -> float:
        raise CapabilityError(f"{type(self).__name__} cannot compute marginal probabilities")

    def pair_survival(self, i: int, j: int, gamma: float) -> float:
        raise CapabilityError(f"{type(self).__name__} cannot compute pairwise probabilities")

    def conditional_given_exceedance(self, i: int, gamma: float):
        raise CapabilityError(f"{type(self).__name__} cannot sample conditioned on one event")

    def conditional_given_pair_exceedance(self, i: int, j: int, gamma: float):
        raise CapabilityError(f"{type(self).__name__} cannot sample conditioned on event pairs")

    def _check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.d:
            raise ValueError(f"event index {i} out of range for d={self.d}")
        return i

    def _check_pair(self, i: int, j: int) -> tuple[int, int]:
        i, j = self._check_index(i), self._check_index(j)
        if i == j:
            raise ValueError("pair indices must differ")
        return i, j


# ---------------------------------------------------------------------------
# Gaussian


class NormalModel(DependenceModel):
    """Multivariate normal law, optionally flagged as equicorrelated.

    Construction validates positive definiteness through the Cholesky
    factorization, which is also what sampling uses.  The equicorrelated
    constructor keeps the common correlation around because the
    deterministic union oracle has a one-factor fast path for it.
    """

    def __init__(self, sigma, mu=None):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ModelSpecError("covariance must be a square matrix")
        if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-12):
            raise ModelSpecError("covariance must be symmetric")
        d = sigma.shape[0]
        if mu is None:
            mu = np.zeros(d)
        mu = np.asarray(mu, dtype=float)
        if mu.shape != (d,):
            raise ModelSpecError(f"mean must have length {d}")
        if (np.diag(sigma) <= 0).any():
            raise ModelSpecError("covariance diagonal must be positive")
        try:
            chol = np.linalg.cholesky(0.5 * (sigma + sigma.T))
        except np.linalg.LinAlgError as exc:
            raise ModelSpecError("covariance is not positive-definite") from exc
        self._mu = mu.copy()
        self._mu.setflags(write=False)
        self._sigma = 0.5 * (sigma + sigma.T)
        self._sigma.setflags(write=False)
        self._chol = chol
        self._chol.setflags(write=False)
        self._sd = np.sqrt(np.diag(self._sigma))
        self._equicorr_rho = None

    @classmethod
    def equicorrelated(cls, d: int, rho: float) -> "NormalModel":
        """Unit-variance zero-mean model with constant pairwise correlation."""
        d = int(d)
        if d < 1:
            raise ModelSpecError("dimension must be at least 1")
        rho = float(rho)
        if d > 1:
            lo = -1.0 / (d - 1) + 1e-9
            if not lo <= rho < 1.0:
                raise ModelSpecError(
                    f"equicorrelation must lie in [{lo:.9f}, 1) for d={d}, got {rho}"
                )
        sigma = (1.0 - rho) * np.eye(d) + rho * np.ones((d, d))
        if d == 1:
            sigma = np.eye(1)
        model = cls(sigma)
        model._equicorr_rho = rho if d > 1 else 0.0
        return model

    @property
    def d(self) -> int:
        return self._mu.size

    @property
    def mu(self) -> np.ndarray:
        return self._mu

    @property
    def sigma(self) -> np.ndarray:
        return self._sigma

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    @property
    def equicorrelation(self):
        """Common correlation when built by the equicorrelated constructor, else None."""
        return self._equicorr_rho

    @property
    def capabilities(self) -> Capabilities:
        return Capabilities(True, True, True, True)

    def correlation(self, i: int, j: int) -> float:
        return float(self._sigma[i, j] / (self._sd[i] * self._sd[j]))

    def sample(self, rng, size=None) -> np.ndarray:
        n = 1 if size is None else int(size)
        z = rng.standard_normal((n, self.d))
        x = self._mu + z @ self._chol.T
        return x[0] if size is None else x

    def marginal_survival(self, i: int, gamma: float) -> float:
        i = self._check_index(i)
        return norm_sf((gamma - self._mu[i]) / self._sd[i])

    def pair_survival(self, i: int, j: int, gamma: float) -> float:
        i, j = self._check_pair(i, j)
        ti = (gamma - self._mu[i]) / self._sd[i]
        tj = (gamma - self._mu[j]) / self._sd[j]
        return bivariate_normal_orthant(ti, tj, self.correlation(i, j))

    def conditional_given_exceedance(self, i: int, gamma: float):
        i = self._check_index(i)
        return _NormalSingleTail(self, i, float(gamma))

    def conditional_given_pair_exceedance(self, i: int, j: int, gamma: float, burnin: int = 100):
        i, j = self._check_pair(i, j)
        return _NormalPairTail(self, i, j, float(gamma), int(burnin))


class _NormalSingleTail:
    """Draws from the Gaussian law given ``X_i > gamma``.

    Composes a truncated-normal draw of the conditioned coordinate with the
    exact Gaussian conditional of the rest.
    """

    def __init__(self, model: NormalModel, i: int, gamma: float):
        self.model = model
        self.i = i
        self.gamma = gamma
        self._t = (gamma - model.mu[i]) / model._sd[i]
        self._cond = (
            samplers.GaussianConditional(model.mu, model.sigma, (i,))
            if model.d > 1
            else None
        )

    def draw(self, rng, size=None) -> np.ndarray:
        n = 1 if size is None else int(size)
        model, i = self.model, self.i
        z = samplers.sample_truncated_std_normal(self._t, rng, n)
        x_i = model.mu[i] + model._sd[i] * z
        out = np.empty((n, model.d))
        out[:, i] = x_i
        if self._cond is not None:
            out[:, list(self._cond.rest)] = self._cond.draw(x_i[:, None], rng)
        return out[0] if size is None else out


class _NormalPairTail:
    """Draws from the Gaussian law given ``min(X_i, X_j) > gamma``.

    The constrained pair comes from an independently restarted Gibbs chain;
    the remaining coordinates are exact Gaussian conditionals given the
    pair.
    """

    def __init__(self, model: NormalModel, i: int, j: int, gamma: float, burnin: int):
        self.model = model
        self.i = i
        self.j = j
        self.gamma = gamma
        self.burnin = burnin
        self._cond = (
            samplers.GaussianConditional(model.mu, model.sigma, (i, j))
            if model.d > 2
            else None
        )

    def draw(self, rng, size=None) -> np.ndarray:
        n = 1 if size is None else int(size)
        model = self.model
        xi, xj = samplers.gibbs_bivariate_truncated(
            model, self.i, self.j, self.gamma, self.burnin, rng, size=n
        )
        out = np.empty((n, model.d))
        out[:, self.i] = xi
        out[:, self.j] = xj
        if self._cond is not None:
            out[:, list(self._cond.rest)] = self._cond.draw(
                np.column_stack([xi, xj]), rng
            )
        return out[0] if size is None else out


# ---------------------------------------------------------------------------
# Common-factor Laplace


class LaplaceModel(DependenceModel):
    """Multivariate Laplace: a standard normal vector scaled by one
    exponential factor, ``X = sqrt(R) Y`` with ``R ~ Exp(1)``.

    Marginals are symmetric Laplace with unit variance; the shared factor
    couples the tails.  Pairwise exceedance probabilities integrate the
    conditional Gaussian orthant over the factor.
    """

    def __init__(self, d: int):
        d = int(d)
        if d < 1:
            raise ModelSpecError("dimension must be at least 1")
        self._d = d

    @property
    def d(self) -> int:
        return self._d

    @property
    def capabilities(self) -> Capabilities:
        return Capabilities(True, True, True, False)

    def sample(self, rng, size=None) -> np.ndarray:
        n = 1 if size is None else int(size)
        r = rng.exponential(1.0, n)
        y = rng.standard_normal((n, self._d))
        x = np.sqrt(r)[:, None] * y
        return x[0] if size is None else x

    def marginal_survival(self, i: int, gamma: float) -> float:
        self._check_index(i)
        g = float(gamma)
        if g >= 0.0:
            return 0.5 * math.exp(-samplers.SQRT2 * g)
        return 1.0 - 0.5 * math.exp(samplers.SQRT2 * g)

    def pair_survival(self, i: int, j: int, gamma: float) -> float:
        self._check_pair(i, j)
        g = float(gamma)

        def f(r):
            tail = norm_sf(g / math.sqrt(r))
            return math.exp(-r) * tail * tail

        peak = abs(g) / samplers.SQRT2
        hi = max(60.0, 6.0 * peak)
        return integrate(f, 0.0, hi, points=[peak], epsrel=1e-11)

    def conditional_given_exceedance(self, i: int, gamma: float):
        i = self._check_index(i)
        if gamma <= 0.0:
            raise ValueError("the Laplace conditional sampler requires gamma > 0")
        return _LaplaceTail(self._d, i, float(gamma))


class _LaplaceTail:
    def __init__(self, d: int, i: int, gamma: float):
        self.d = d
        self.i = i
        self.gamma = gamma

    def draw(self, rng, size=None) -> np.ndarray:
        return samplers.laplace_conditional_exceedance(self.d, self.i, self.gamma, rng, size=size)


# ---------------------------------------------------------------------------
# Archimedean copulas (uniform marginals)


class _ArchGenerator:
    """One Archimedean generator: psi, its inverse, and a frailty law.

    The frailty law V has Laplace transform equal to the generator inverse,
    so ``U_i = psi_inv(E_i / V)`` with i.i.d. unit exponentials is an exact
    d-dimensional draw.  Families keep their textbook parameter ranges for
    construction; sampling is limited to the range where the frailty law
    exists.
    """

    name = ""

    def __init__(self, theta: float):
        self.theta = float(theta)

    def psi(self, t):
        raise NotImplementedError

    def psi_inv(self, s):
        raise NotImplementedError

    def sampleable(self) -> bool:
        raise NotImplementedError

    def frailty(self, rng, n: int) -> np.ndarray:
        raise NotImplementedError


class _Clayton(_ArchGenerator):
    name = "clayton"
    valid_lo, valid_hi = -1.0, math.inf
    lo_closed, hi_closed = True, False

    def psi(self, t):
        th = self.theta
        if th == 0.0:
            return -np.log(t)
        return (np.power(t, -th) - 1.0) / th

    def psi_inv(self, s):
        th = self.theta
        if th == 0.0:
            return np.exp(-s)
        base = 1.0 + th * np.asarray(s, dtype=float)
        if th < 0.0:
            base = np.maximum(base, 0.0)
        out = np.power(base, -1.0 / th)
        return float(out) if out.ndim == 0 else out

    def sampleable(self):
        return self.theta >= 0.0

    def frailty(self, rng, n):
        if self.theta == 0.0:
            return np.ones(n)
        # Laplace transform of Gamma(1/theta, scale=theta) is (1 + theta s)^(-1/theta)
        return rng.gamma(1.0 / self.theta, self.theta, n)


class _GumbelHougaard(_ArchGenerator):
    name = "gumbel-hougaard"
    valid_lo, valid_hi = 1.0, math.inf
    lo_closed, hi_closed = True, False

    def psi(self, t):
        return np.power(-np.log(t), self.theta)

    def psi_inv(self, s):
        out = np.exp(-np.power(np.asarray(s, dtype=float), 1.0 / self.theta))
        return float(out) if out.ndim == 0 else out

    def sampleable(self):
        return True

    def frailty(self, rng, n):
        if self.theta == 1.0:
            return np.ones(n)
        alpha = 1.0 / self.theta
        # positive stable draw, totally skewed, unit scale
        u = rng.random(n) * math.pi
        w = rng.exponential(1.0, n)
        a = np.sin(alpha * u) / np.power(np.sin(u), 1.0 / alpha)
        b = np.power(np.sin((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha)
        return a * b


class _Frank(_ArchGenerator):
    name = "frank"
    valid_lo, valid_hi = -math.inf, math.inf
    lo_closed, hi_closed = False, False

    def psi(self, t):
        th = self.theta
        if th == 0.0:
            return -np.log(t)
        return -np.log(np.expm1(-th * np.asarray(t, dtype=float)) / math.expm1(-th))

    def psi_inv(self, s):
        th = self.theta
        if th == 0.0:
            return np.exp(-s)
        out = -np.log1p(np.exp(-np.asarray(s, dtype=float)) * math.expm1(-th)) / th
        return float(out) if out.ndim == 0 else out

    def sampleable(self):
        return self.theta >= 0.0

    def frailty(self, rng, n):
        if self.theta == 0.0:
            return np.ones(n)
        return rng.logseries(-math.expm1(-self.theta), n).astype(float)


class _AliMikhailHaq(_ArchGenerator):
    name = "ali-mikhail-haq"
    valid_lo, valid_hi = -1.0, 1.0
    lo_closed, hi_closed = True, False

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        return np.log((1.0 - self.theta * (1.0 - t)) / t)

    def psi_inv(self, s):
        out = (1.0 - self.theta) / (np.exp(np.asarray(s, dtype=float)) - self.theta)
        return float(out) if out.ndim == 0 else out

    def sampleable(self):
        return 0.0 <= self.theta < 1.0

    def frailty(self, rng, n):
        if self.theta == 0.0:
            return np.ones(n)
        return rng.geometric(1.0 - self.theta, n).astype(float)


_ARCH_FAMILIES = {
    "clayton": _Clayton,
    "gumbel-hougaard": _GumbelHougaard,
    "gumbel": _GumbelHougaard,
    "frank": _Frank,
    "ali-mikhail-haq": _AliMikhailHaq,
    "amh": _AliMikhailHaq,
}


class ArchimedeanModel(DependenceModel):
    """Exchangeable Archimedean copula with uniform marginals.

    Thresholds are taken directly on the uniform scale: the events are
    ``{U_i > u}`` for ``u`` in (0, 1), so the marginal exceedance
    probability is ``1 - u`` and the pairwise one follows from
    the copula diagonal.  Sampling uses the frailty construction and is
    available for parameter values where the frailty law exists
    (non-negative association); construction accepts the full textbook
    parameter range so the model can still be interrogated analytically.
    """

    def __init__(self, family: str, theta: float, d: int):
        d = int(d)
        if d < 1:
            raise ModelSpecError("dimension must be at least 1")
        key = str(family).strip().lower().replace("_", "-").replace(" ", "-")
        if key not in _ARCH_FAMILIES:
            raise ModelSpecError(
                f"unknown Archimedean family {family!r}; choose from "
                f"{sorted(set(_ARCH_FAMILIES))}"
            )
        gen_cls = _ARCH_FAMILIES[key]
        theta = float(theta)
        lo_ok = theta >= gen_cls.valid_lo if gen_cls.lo_closed else theta > gen_cls.valid_lo
        hi_ok = theta <= gen_cls.valid_hi if gen_cls.hi_closed else theta < gen_cls.valid_hi
        if not (lo_ok and hi_ok):
            raise ModelSpecError(
                f"theta={theta} outside the valid range for {gen_cls.name}"
            )
        self._gen = gen_cls(theta)
        self._d = d

    @property
    def d(self) -> int:
        return self._d

    @property
    def family(self) -> str:
        return self._gen.name

    @property
    def theta(self) -> float:
        return self._gen.theta

    @property
    def capabilities(self) -> Capabilities:
        return Capabilities(True, True, False, False)

    def _check_threshold(self, u: float) -> float:
        u = float(u)
        if not 0.0 < u < 1.0:
            raise ValueError("Archimedean thresholds live on the uniform scale (0, 1)")
        return u

    def sample(self, rng, size=None) -> np.ndarray:
        if not self._gen.sampleable():
            raise CapabilityError(
                f"no frailty construction for {self.family} with theta={self.theta}; "
                "sampling supports the non-negative-association range only"
            )
        n = 1 if size is None else int(size)
        v = self._gen.frailty(rng, n)
        e = rng.exponential(1.0, (n, self._d))
        u = self._gen.psi_inv(e / v[:, None])
        return u[0] if size is None else u

    def diagonal(self, u: float) -> float:
        """Copula diagonal ``C(u, u)``."""
        u = self._check_threshold(u)
        return float(self._gen.psi_inv(2.0 * self._gen.psi(u)))

    def marginal_survival(self, i: int, gamma: float) -> float:
        self._check_index(i)
        return 1.0 - self._check_threshold(gamma)

    def pair_survival(self, i: int, j: int, gamma: float) -> float:
        self._check_pair(i, j)
        u = self._check_threshold(gamma)
        return 1.0 - 2.0 * u + self.diagonal(u)


# ---------------------------------------------------------------------------
# Stationary AR(1)


class AR1Model(DependenceModel):
    """Stationary Gaussian AR(1) path observed at d consecutive times.

    The marginal law is centred normal with variance
    ``sigma_eps**2 / (1 - phi**2)`` and lag-k correlation ``phi**k``, so
    marginal and pairwise exceedance probabilities reduce to the Gaussian
    formulas.  Conditional event sampling is not wired up for paths.
    """

    def __init__(self, phi: float, sigma_eps: float, d: int):
        phi = float(phi)
        sigma_eps = float(sigma_eps)
        d = int(d)
        if not -1.0 < phi < 1.0:
            raise ModelSpecError("autoregression coefficient must lie in (-1, 1)")
        if sigma_eps <= 0.0:
            raise ModelSpecError("innovation standard deviation must be positive")
        if d < 1:
            raise ModelSpecError("path length must be at least 1")
        self.phi = phi
        self.sigma_eps = sigma_eps
        self._d = d
        self.sigma_marginal = sigma_eps / math.sqrt(1.0 - phi * phi)

    @property
    def d(self) -> int:
        return self._d

    @property
    def capabilities(self) -> Capabilities:
        return Capabilities(True, True, False, False)

    def sample(self, rng, size=None) -> np.ndarray:
        n = 1 if size is None else int(size)
        x = np.empty((n, self._d))
        x[:, 0] = self.sigma_marginal * rng.standard_normal(n)
        for t in range(1, self._d):
            x[:, t] = self.phi * x[:, t - 1] + self.sigma_eps * rng.standard_normal(n)
        return x[0] if size is None else x

    def marginal_survival(self, i: int, gamma: float) -> float:
        self._check_index(i)
        return norm_sf(gamma / self.sigma_marginal)

    def pair_survival(self, i: int, j: int, gamma: float) -> float:
        i, j = self._check_pair(i, j)
        t = gamma / self.sigma_marginal
        rho = self.phi ** abs(i - j)
        return bivariate_normal_orthant(t, t, rho)


# ---------------------------------------------------------------------------
# Finite pattern distributions (exhaustive test oracle)


class FinitePatternModel(DependenceModel):
    """Explicit distribution over the ``2**d`` event patterns.

    Exists so that every estimator can be checked against exhaustive
    enumeration.  Thresholds are ignored: the events are the pattern bits
    themselves.  Samples are 0/1 vectors.
    """

    def __init__(self, pmf, d=None):
        pmf = np.asarray(pmf, dtype=float)
        if pmf.ndim != 1:
            raise ModelSpecError("pmf must be one-dimensional")
        size = pmf.size
        inferred = int(round(math.log2(size))) if size > 0 else 0
        if size < 2 or (1 << inferred) != size:
            raise ModelSpecError("pmf length must be a power of two (one entry per pattern)")
        if d is not None and int(d) != inferred:
            raise ModelSpecError(f"pmf length {size} does not match d={d}")
        if inferred > 20:
            raise ModelSpecError("finite pattern models support d <= 20")
        if (pmf < 0).any() or abs(float(pmf.sum()) - 1.0) > 1e-12:
            raise ModelSpecError("pmf must be non-negative and sum to 1 within 1e-12")
        self._pmf = pmf.copy()
        self._pmf.setflags(write=False)
        self._d = inferred

    @property
    def d(self) -> int:
        return self._d

    @property
    def pmf(self) -> np.ndarray:
        return self._pmf

    @property
    def patterns(self) -> np.ndarray:
        return ev.enumerate_patterns(self._d)

    @property
    def capabilities(self) -> Capabilities:
        return Capabilities(True, True, True, True)

    def exceedance_patterns(self, x, gamma) -> np.ndarray:
        return np.atleast_2d(np.asarray(x, dtype=float)) > 0.5

    def sample(self, rng, size=None) -> np.ndarray:
        n = 1 if size is None else int(size)
        idx = rng.choice(self._pmf.size, size=n, p=self._pmf)
        x = self.patterns[idx].astype(float)
        return x[0] if size is None else x

    def marginal_survival(self, i: int, gamma: float = 0.0) -> float:
        i = self._check_index(i)
        return float(self._pmf[self.patterns[:, i]].sum())

    def pair_survival(self, i: int, j: int, gamma: float = 0.0) -> float:
        i, j = self._check_pair(i, j)
        mask = self.patterns[:, i] & self.patterns[:, j]
        return float(self._pmf[mask].sum())

    def _restricted(self, required: tuple[int, ...]) -> "_FiniteConditional":
        mask = np.ones(self._pmf.size, dtype=bool)
        for idx in required:
            mask &= self.patterns[:, idx]
        total = float(self._pmf[mask].sum())
        if total <= 0.0:
            raise ValueError(f"conditioning event {required} has probability zero")
        return _FiniteConditional(self, np.where(mask)[0], self._pmf[mask] / total)

    def conditional_given_exceedance(self, i: int, gamma: float = 0.0):
        return self._restricted((self._check_index(i),))

    def conditional_given_pair_exceedance(self, i: int, j: int, gamma: float = 0.0):
        return self._restricted(self._check_pair(i, j))

    def to_json(self) -> dict:
        return {"d": self._d, "pmf": [float(p) for p in self._pmf]}

    @classmethod
    def from_json(cls, obj: dict) -> "FinitePatternModel":
        return cls(obj["pmf"], d=obj.get("d"))


class _FiniteConditional:
    def __init__(self, model: FinitePatternModel, indices: np.ndarray, probs: np.ndarray):
        self.model = model
        self.indices = indices
        self.probs = probs

    def draw(self, rng, size=None) -> np.ndarray:
        n = 1 if size is None else int(size)
        pick = rng.choice(self.indices.size, size=n, p=self.probs)
        x = self.model.patterns[self.indices[pick]].astype(float)
        return x[0] if size is None else x


# ---------------------------------------------------------------------------
# Declarative construction


def build_model(spec: dict) -> DependenceModel:
    """Build a model from its JSON-style description.

    Recognized forms::

        {"type": "normal", "d": 4, "rho": 0.75}
        {"type": "normal", "sigma": [[...], ...], "mu": [...]}
        {"type": "laplace", "d": 4}
        {"type": "archimedean", "family": "clayton", "theta": 2.0, "d": 3}
        {"type": "ar1", "phi": 0.5, "sigma_eps": 0.866, "d": 8}
        {"type": "finite", "d": 2, "pmf": [...]}
    """
    if not isinstance(spec, dict):
        raise ModelSpecError("model spec must be a JSON object")
    kind = spec.get("type")
    try:
        if kind == "normal":
            if "sigma" in spec:
                return NormalModel(np.asarray(spec["sigma"], dtype=float), spec.get("mu"))
            if "rho" in spec:
                return NormalModel.equicorrelated(spec["d"], spec["rho"])
            raise ModelSpecError("normal spec needs either 'sigma' or ('d', 'rho')")
        if kind == "laplace":
            return LaplaceModel(spec["d"])
        if kind == "archimedean":
            return ArchimedeanModel(spec["family"], spec["theta"], spec["d"])
        if kind == "ar1":
            return AR1Model(spec["phi"], spec["sigma_eps"], spec["d"])
        if kind == "finite":
            return FinitePatternModel(spec["pmf"], d=spec.get("d"))
    except KeyError as exc:
        raise ModelSpecError(f"model spec missing field {exc}") from exc
    raise ModelSpecError(f"unknown model type {kind!r}")
