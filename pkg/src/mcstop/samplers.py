"""Verification samplers with known or independently checkable truth.

VAR(1) processes carry an analytic asymptotic covariance, so every
estimator in the package can be checked against ground truth. The
random-walk Metropolis sampler targets a Bayesian logistic posterior
for the bundled dataset. All samplers are deterministic given a seed,
and chain sources hand out prefix-stable extensions: take(n) returns
the same rows no matter how the calls were sliced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol, Union

import numpy as np
from scipy.signal import lfilter

from .chain import ChainMatrix, load_chain
from .errors import DomainError, InsufficientData, NotStationary

# Posterior mean for the bundled logistic dataset, used by the
# replication studies as the proxy truth.
LOGIT_REFERENCE_MEAN = np.array([0.5706, 0.7516, 1.0559, 0.4517, 0.6545])
LOGIT_REFERENCE_MEAN.setflags(write=False)

# Draws are generated in fixed-size blocks so that the random stream
# never depends on how take() calls are sliced.
_BLOCK = 4096


def ar1_cov(rho: float, p: int, scale: float = 1.0) -> np.ndarray:
    """AR(1) covariance matrix: entry (i, j) = scale · rho^|i-j|."""
    if not (-1.0 < rho < 1.0):
        raise DomainError(f"autocorrelation must lie in (-1,1), got {rho}")
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if scale <= 0.0:
        raise DomainError(f"scale must be positive, got {scale}")
    idx = np.arange(p)
    return scale * rho ** np.abs(idx[:, None] - idx[None, :])


def spectral_radius(matrix: np.ndarray) -> float:
    """Spectral radius via normalized power iteration on matrix squares.

    Repeated squaring drives the Gelfand limit ‖A^m‖^{1/m} to machine
    precision within ~60 doublings, and handles rotating (complex
    eigenvalue) iterates that defeat single-vector power iteration.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("spectral radius requires a square matrix")
    if not np.isfinite(a).all():
        raise DomainError("spectral radius requires finite entries")
    if a.shape[0] == 0:
        return 0.0
    # After k squarings a ∝ A^(2^k); the estimate is ‖A^(2^k)‖^(1/2^k)
    # with the per-step normalizations folded back in through log_rho.
    log_rho = 0.0
    inv_pow = 1.0
    est = 0.0
    for _ in range(64):
        nrm = float(np.linalg.norm(a))
        if nrm == 0.0:
            return 0.0
        new_est = math.exp(log_rho + inv_pow * math.log(nrm))
        if est > 0.0 and abs(new_est - est) <= 1e-13 * est:
            return new_est
        est = new_est
        a = a / nrm
        a = a @ a
        log_rho += inv_pow * math.log(nrm)
        inv_pow *= 0.5
    return est


def var1_true_cov(phi: np.ndarray, omega: np.ndarray) -> tuple:
    """Stationary covariance V and asymptotic covariance Σ of a VAR(1).

    V solves V = Φ V Φᵀ + Ω through the vec identity (a p²-by-p²
    linear solve); Σ = (I - Φ)⁻¹ V + V (I - Φ)⁻ᵀ - V.
    """
    phi = np.asarray(phi, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
        raise DomainError("phi must be square")
    if omega.shape != phi.shape:
        raise DomainError("omega must match phi's shape")
    p = phi.shape[0]
    if np.abs(omega - omega.T).max() > 1e-10 * max(1.0, np.abs(omega).max()):
        raise DomainError("omega must be symmetric")
    rho = spectral_radius(phi)
    if rho >= 1.0 - 1e-10:
        raise NotStationary(f"spectral radius {rho:.12f} is not below 1")
    eye2 = np.eye(p * p)
    v = np.linalg.solve(eye2 - np.kron(phi, phi), omega.reshape(-1)).reshape(p, p)
    v = (v + v.T) * 0.5
    x = np.linalg.solve(np.eye(p) - phi, v)
    sigma = x + x.T - v
    sigma = (sigma + sigma.T) * 0.5
    return v, sigma


@dataclass(frozen=True)
class Var1Model:
    """VAR(1) process Y_t = Φ Y_{t-1} + ε_t, ε_t ~ N(0, Ω).

    The stationary covariance V and the asymptotic covariance Σ of the
    mean are derived at construction and serve as analytic oracles.
    """

    phi: np.ndarray
    omega: np.ndarray
    v: np.ndarray = field(init=False)
    sigma_true: np.ndarray = field(init=False)

    def __post_init__(self):
        phi = np.ascontiguousarray(self.phi, dtype=np.float64)
        omega = np.ascontiguousarray(self.omega, dtype=np.float64)
        v, sigma = var1_true_cov(phi, omega)
        try:
            np.linalg.cholesky(omega)
        except np.linalg.LinAlgError:
            raise DomainError("omega must be positive definite") from None
        for name, arr in (("phi", phi), ("omega", omega), ("v", v), ("sigma_true", sigma)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def p(self) -> int:
        return self.phi.shape[0]


@dataclass(frozen=True)
class LogisticModel:
    """Bayesian logistic regression with a N(0, tau2 I) prior on β.

    Attributes
    ----------
    x : ndarray
        K-by-r design matrix (intercept column included when wanted).
    y : ndarray
        Length-K binary responses.
    tau2 : float
        Prior variance, positive.
    proposal_sd : float
        Random walk proposal scale; 0.35 approximates the optimal
        acceptance probability for this posterior.
    """

    x: np.ndarray
    y: np.ndarray
    tau2: float = 1.0
    proposal_sd: float = 0.35

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise DomainError("design matrix rows must match response length")
        if not np.isfinite(x).all():
            raise DomainError("design matrix must be finite")
        if not np.isin(y, (0.0, 1.0)).all():
            raise DomainError("responses must be 0 or 1")
        if self.tau2 <= 0.0:
            raise DomainError(f"tau2 must be positive, got {self.tau2}")
        if self.proposal_sd <= 0.0:
            raise DomainError(f"proposal_sd must be positive, got {self.proposal_sd}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def r(self) -> int:
        return self.x.shape[1]


def load_logit_data(tau2: float = 1.0, proposal_sd: float = 0.35) -> LogisticModel:
    """The bundled 100-observation logistic dataset.

    The CSV carries a binary response and four predictors; an intercept
    column of ones is prepended, so the model has r = 5 coefficients.
    """
    raw = resources.files("mcstop").joinpath("data/logit.csv").read_bytes()
    chain = load_chain(raw, format="csv")
    y = chain.data[:, 0]
    preds = chain.data[:, 1:]
    design = np.hstack([np.ones((preds.shape[0], 1)), preds])
    return LogisticModel(x=design, y=y, tau2=tau2, proposal_sd=proposal_sd)


def log_posterior_logistic(beta: np.ndarray, model: LogisticModel) -> float:
    """Unnormalized log posterior of the logistic model at beta.

    The Bernoulli log likelihood is written through log(1 + e^η) with
    logaddexp stabilization, so large |x·β| cannot overflow.
    """
    b = np.asarray(beta, dtype=np.float64).reshape(-1)
    if b.size != model.r:
        raise DomainError(f"beta length {b.size} != r={model.r}")
    if not np.isfinite(b).all():
        raise DomainError("beta must be finite")
    eta = model.x @ b
    loglik = float(model.y @ eta - np.logaddexp(0.0, eta).sum())
    return loglik - float(b @ b) / (2.0 * model.tau2)


class ChainSource(Protocol):
    """A prefix-stable stream of draws: take(n) yields the first n rows."""

    @property
    def p(self) -> int: ...

    def take(self, n: int) -> ChainMatrix: ...


class _BlockSource:
    """Shared buffering: subclasses generate rows one block at a time."""

    def __init__(self, p: int):
        self._p = p
        self._rows: list = []
        self._count = 0

    @property
    def p(self) -> int:
        return self._p

    def _generate_block(self) -> np.ndarray:
        raise NotImplementedError

    def _meta(self, n: int) -> dict:
        return {}

    def take(self, n: int) -> ChainMatrix:
        if n < 1:
            raise DomainError(f"take needs n >= 1, got {n}")
        while self._count < n:
            block = self._generate_block()
            self._rows.append(block)
            self._count += block.shape[0]
        data = np.concatenate(self._rows, axis=0)[:n]
        return ChainMatrix(np.ascontiguousarray(data), meta=self._meta(n))


class IidGaussianSource(_BlockSource):
    """Independent N(0, I_p) rows; the ESS ≈ n sanity baseline."""

    def __init__(self, p: int, seed: int):
        if p < 1:
            raise DomainError(f"p must be >= 1, got {p}")
        super().__init__(p)
        self._rng = np.random.default_rng(seed)

    def _generate_block(self) -> np.ndarray:
        return self._rng.standard_normal((_BLOCK, self._p))


class Var1Source(_BlockSource):
    """VAR(1) rows with a stationary N(0, V) start."""

    def __init__(self, model: Var1Model, seed: int):
        super().__init__(model.p)
        self._model = model
        self._rng = np.random.default_rng(seed)
        self._chol_v = np.linalg.cholesky(model.v)
        self._chol_omega = np.linalg.cholesky(model.omega)
        d = np.diag(model.phi)
        self._diag_phi = d if np.array_equal(np.diag(d), model.phi) else None
        y0 = self._chol_v @ self._rng.standard_normal(model.p)
        self._rows.append(y0[None, :])
        self._count = 1
        self._last = y0

    def _generate_block(self) -> np.ndarray:
        eps = self._rng.standard_normal((_BLOCK, self._p)) @ self._chol_omega.T
        if self._diag_phi is not None:
            out = np.empty_like(eps)
            for j in range(self._p):
                phi_j = self._diag_phi[j]
                col, _ = lfilter(
                    [1.0], [1.0, -phi_j], eps[:, j], zi=[phi_j * self._last[j]]
                )
                out[:, j] = col
        else:
            out = np.empty_like(eps)
            prev = self._last
            for t in range(_BLOCK):
                prev = self._model.phi @ prev + eps[t]
                out[t] = prev
        self._last = out[-1].copy()
        return out


class RwmLogisticSource(_BlockSource):
    """Random-walk Metropolis chain for the logistic posterior."""

    def __init__(
        self,
        model: LogisticModel,
        seed: int,
        init: Union[str, np.ndarray] = "prior_draw",
    ):
        super().__init__(model.r)
        self._model = model
        self._rng = np.random.default_rng(seed)
        if isinstance(init, str):
            if init != "prior_draw":
                raise DomainError(f"unknown init {init!r}")
            beta0 = math.sqrt(model.tau2) * self._rng.standard_normal(model.r)
        else:
            beta0 = np.asarray(init, dtype=np.float64).reshape(-1)
            if beta0.size != model.r:
                raise DomainError(f"init length {beta0.size} != r={model.r}")
        self._cur = beta0
        self._cur_lp = log_posterior_logistic(beta0, model)
        self._accept_flags: list = []
        self._rows.append(beta0[None, :].copy())
        self._count = 1

    def _generate_block(self) -> np.ndarray:
        model = self._model
        z = self._rng.standard_normal((_BLOCK, model.r))
        u = self._rng.random(_BLOCK)
        out = np.empty((_BLOCK, model.r))
        flags = np.empty(_BLOCK, dtype=bool)
        cur, cur_lp = self._cur, self._cur_lp
        with np.errstate(divide="ignore"):
            log_u = np.log(u)
        for t in range(_BLOCK):
            prop = cur + model.proposal_sd * z[t]
            prop_lp = log_posterior_logistic(prop, model)
            if log_u[t] < prop_lp - cur_lp:
                cur, cur_lp = prop, prop_lp
                flags[t] = True
            else:
                flags[t] = False
            out[t] = cur
        self._cur, self._cur_lp = cur, cur_lp
        self._accept_flags.append(flags)
        return out

    def _meta(self, n: int) -> dict:
        steps = n - 1
        if steps < 1:
            return {"acceptance_rate": 0.0}
        flags = np.concatenate(self._accept_flags)[:steps]
        return {"acceptance_rate": float(flags.mean())}


class FileChainSource:
    """Wrap an already materialized chain as a (finite) source."""

    def __init__(self, chain: ChainMatrix):
        self._chain = chain

    @property
    def p(self) -> int:
        return self._chain.p

    def take(self, n: int) -> ChainMatrix:
        if n > self._chain.n:
            raise InsufficientData(
                f"stored chain has {self._chain.n} rows, {n} requested"
            )
        return ChainMatrix(self._chain.data[:n].copy(), meta=dict(self._chain.meta))


def simulate_var1(model: Var1Model, n: int, seed: int) -> ChainMatrix:
    """n rows of the VAR(1) process, stationary start, seed-deterministic."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return Var1Source(model, seed).take(n)


def rwm_logistic(
    model: LogisticModel,
    n: int,
    seed: int,
    init: Union[str, np.ndarray] = "prior_draw",
) -> ChainMatrix:
    """n states of the random-walk Metropolis chain, first row = init.

    The returned chain's meta carries the realized acceptance rate.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return RwmLogisticSource(model, seed, init=init).take(n)
