"""Covariance estimation for correlated output.

Provides the sample covariance of the draws, the multivariate batch
means (mBM) estimator of the asymptotic covariance, its univariate
diagonal variant, and a Cholesky-based log-determinant that reports
non-positive-definiteness as a value rather than an exception.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .chain import ChainMatrix
from .errors import DomainError, InsufficientData


class _NotPDType:
    """Singleton flag: a matrix with no Cholesky factorization."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotPD"

    def __reduce__(self):
        return (_NotPDType, ())


NotPD = _NotPDType()

LogDet = Union[float, _NotPDType]


@dataclass(frozen=True)
class BatchPolicy:
    """Batch size selection rule: b_n = ⌊n^nu⌋ or a fixed b.

    Attributes
    ----------
    kind : {"exponent", "fixed"}
    nu : float
        Exponent in (0, 1); used when kind="exponent".
    b : int
        Fixed batch size, at least 1; used when kind="fixed".
    """

    kind: str
    nu: float = 0.5
    b: int = 0

    def __post_init__(self):
        if self.kind == "exponent":
            if not (0.0 < self.nu < 1.0):
                raise DomainError(f"batch exponent must lie in (0,1), got {self.nu}")
        elif self.kind == "fixed":
            if self.b < 1:
                raise DomainError(f"fixed batch size must be >= 1, got {self.b}")
        else:
            raise DomainError(f"unknown batch policy kind {self.kind!r}")

    @classmethod
    def exponent(cls, nu: float = 0.5) -> "BatchPolicy":
        return cls(kind="exponent", nu=float(nu))

    @classmethod
    def fixed(cls, b: int) -> "BatchPolicy":
        return cls(kind="fixed", b=int(b))


@dataclass(frozen=True)
class CovEstimate:
    """A p-by-p symmetric covariance estimate with cached log-determinant.

    Attributes
    ----------
    matrix : ndarray
        Symmetric estimate; write-protected.
    method : {"mbm", "sample", "ubm_diag"}
    a_n : int
        Batch count (0 when method="sample").
    b_n : int
        Batch size (0 when method="sample").
    log_det : float or NotPD
        Log-determinant when the matrix is positive definite and enough
        batches back it, NotPD otherwise.
    """

    matrix: np.ndarray
    method: str
    a_n: int
    b_n: int
    log_det: LogDet

    def __post_init__(self):
        arr = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DomainError("covariance estimate must be a square matrix")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        if self.method not in ("mbm", "sample", "ubm_diag"):
            raise DomainError(f"unknown estimator method {self.method!r}")

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_pd(self) -> bool:
        return not isinstance(self.log_det, _NotPDType)


def batch_size(n: int, policy: BatchPolicy) -> int:
    """Resolve a batch policy at chain length n.

    Exponent policy gives max(1, ⌊n^nu⌋); fixed policy gives b capped
    at ⌊n/2⌋ so at least two batches remain available.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if policy.kind == "exponent":
        # tolerance absorbs pow() landing a few ulps under an exact
        # integer power (e.g. 1000^(1/3))
        return max(1, int(math.floor(n ** policy.nu + 1e-9)))
    return max(1, min(policy.b, n // 2))


def log_det(matrix: np.ndarray) -> LogDet:
    """Log-determinant of a symmetric matrix via Cholesky.

    Returns NotPD when factorization fails (the matrix has a
    non-positive pivot); raises DomainError for asymmetric input.
    """
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError("log_det requires a square matrix")
    if not np.isfinite(arr).all():
        raise DomainError("log_det requires finite entries")
    scale = float(np.abs(arr).max()) if arr.size else 0.0
    asym = float(np.abs(arr - arr.T).max()) if arr.size else 0.0
    if asym > 1e-8 * max(1.0, scale):
        raise DomainError(f"matrix asymmetry {asym:.3e} exceeds tolerance")
    sym = (arr + arr.T) * 0.5
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        return NotPD
    diag = np.diag(chol)
    if not (diag > 0.0).all():
        return NotPD
    return float(2.0 * np.log(diag).sum())


def _scaled_gram(dev: np.ndarray, scale: float) -> np.ndarray:
    # shared kernel so mbm at b_n=1 reproduces sample_covariance bitwise
    m = dev.T @ dev
    return (m + m.T) * (0.5 * scale)


def sample_covariance(chain: ChainMatrix) -> CovEstimate:
    """The (n-1)-denominator sample covariance Λ_n of the rows."""
    n, p = chain.n, chain.p
    if n < 2:
        raise InsufficientData(f"sample covariance needs n >= 2, got n={n}")
    data = chain.data
    center = data.mean(axis=0)
    mat = _scaled_gram(data - center, 1.0 / (n - 1.0))
    ld: LogDet = log_det(mat) if p < n else NotPD
    return CovEstimate(matrix=mat, method="sample", a_n=0, b_n=0, log_det=ld)


def mbm(chain: ChainMatrix, b_n: int) -> CovEstimate:
    """Multivariate batch means estimate Σ_n of the asymptotic covariance.

    Splits the first a_n·b_n rows (a_n = ⌊n/b_n⌋) into a_n consecutive
    batches, and returns

        (b_n / (a_n - 1)) Σ_k (Ȳ_k - θ_n)(Ȳ_k - θ_n)ᵀ

    where Ȳ_k is the k-th batch mean and θ_n the mean of the retained
    rows. Trailing remainder rows are dropped. The log-determinant is
    attempted only when a_n > p; fewer batches cannot produce a
    positive definite estimate.
    """
    n, p = chain.n, chain.p
    if b_n < 1:
        raise DomainError(f"batch size must be >= 1, got {b_n}")
    a_n = n // b_n
    if a_n < 2:
        raise InsufficientData(
            f"mbm needs at least 2 batches, got a_n={a_n} from n={n}, b_n={b_n}"
        )
    prefix = chain.data[: a_n * b_n]
    center = prefix.mean(axis=0)
    means = prefix.reshape(a_n, b_n, p).mean(axis=1)
    mat = _scaled_gram(means - center, b_n / (a_n - 1.0))
    ld: LogDet = log_det(mat) if a_n > p else NotPD
    return CovEstimate(matrix=mat, method="mbm", a_n=a_n, b_n=b_n, log_det=ld)


def ubm_diag(chain: ChainMatrix, b_n: int) -> np.ndarray:
    """Univariate batch means variances, one per component.

    Equals the diagonal of mbm(chain, b_n).
    """
    est = mbm(chain, b_n)
    out = np.diag(est.matrix).copy()
    out.setflags(write=False)
    return out
