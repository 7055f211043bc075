"""Sequential stopping rules for simulation length.

The headline rule terminates when the confidence region's volume,
normalized to a length scale, drops below a tolerance times a relative
standard deviation metric. An absolute variant and two univariate
fixed-width baselines (with and without Bonferroni correction) share
the same driver, which grows the chain geometrically and recomputes
every estimate on the full retained output at each checkpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfns
from .chain import ChainMatrix
from .errors import ConfigError, DomainError, InsufficientData, NotPositiveDefinite
from .estimators import BatchPolicy, batch_size, mbm, sample_covariance, ubm_diag
from .ess import min_ess, multivariate_ess
from .regions import hotelling_cutoff, region_volume

_METRICS = ("relative_sd", "absolute", "univariate_bonferroni", "univariate_uncorrected")


@dataclass(frozen=True)
class StoppingConfig:
    """Parameters of a sequential stopping rule.

    Attributes
    ----------
    epsilon : float
        Tolerance ε, positive.
    alpha : float
        One minus the confidence level, in (0, 1).
    n_star : int
        Minimum simulation effort; the rule cannot fire below it.
    batch_policy : BatchPolicy
    metric : str
        One of "relative_sd", "absolute", "univariate_bonferroni",
        "univariate_uncorrected".
    check_growth : float
        Fractional growth of the checkpoint grid (default 0.10).
    n_max : int
        Hard cap on the chain length.
    memory_budget_bytes : int
        The driver refuses to grow the chain past this storage budget
        (8 bytes per entry).
    """

    epsilon: float
    alpha: float
    n_star: int
    batch_policy: BatchPolicy = field(default_factory=BatchPolicy.exponent)
    metric: str = "relative_sd"
    check_growth: float = 0.10
    n_max: int = 10**8
    memory_budget_bytes: int = 4 * 2**30

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.n_star < 0:
            raise DomainError(f"n_star must be >= 0, got {self.n_star}")
        if self.metric not in _METRICS:
            raise DomainError(f"unknown metric {self.metric!r}")
        if self.check_growth <= 0.0:
            raise DomainError(f"check_growth must be positive, got {self.check_growth}")
        if self.n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {self.n_max}")
        if self.memory_budget_bytes < 1:
            raise DomainError("memory budget must be positive")


@dataclass(frozen=True)
class StoppingResult:
    """Outcome of one sequential run.

    terminated is true only when the criterion fired; hitting the
    length cap reports reason "n_max_reached" instead. ESS and log
    volume are evaluated on the final chain; nan marks quantities the
    final estimates could not support (e.g. a non-PD matrix at the
    cap).
    """

    terminated: bool
    n_final: int
    ess_at_termination: float
    log_volume: float
    reason: str


def n_pos(p: int, policy: BatchPolicy) -> int:
    """Smallest n whose batch count exceeds the dimension.

    Literal first n with ⌊n / b_n⌋ > p under the policy. The scan
    jumps: from an unsatisfying n, no m < (p+1)·b_n can satisfy the
    condition because b is nondecreasing in n, so the skip is safe.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    n = 1
    while True:
        b = batch_size(n, policy)
        if n // b > p:
            return n
        n = max(n + 1, (p + 1) * b)


def default_nstar(p: int, alpha: float, eps: float, batch_policy: BatchPolicy) -> int:
    """Natural minimum effort: max of the PD threshold and the ESS bound."""
    bound = min_ess(p, alpha, eps)
    return max(n_pos(p, batch_policy), int(math.ceil(bound)))


def _pd_estimates(chain: ChainMatrix, config: StoppingConfig):
    """Λ_n, Σ_n, b_n for the elliptical rules; None when not yet PD."""
    n = chain.n
    if n < 2:
        return None
    b = batch_size(n, config.batch_policy)
    try:
        sig = mbm(chain, b)
    except InsufficientData:
        return None
    lam = sample_covariance(chain)
    if not (sig.is_pd and lam.is_pd):
        return None
    return lam, sig


def check_relative_sd(chain: ChainMatrix, config: StoppingConfig) -> bool:
    """The relative standard deviation fixed-volume rule.

    True iff n ≥ n*, both covariance estimates are positive definite,
    and Vol^{1/p} + 1/n ≤ ε |Λ_n|^{1/(2p)}. Estimates that are not yet
    positive definite yield false, never an error.
    """
    n, p = chain.n, chain.p
    if n < config.n_star:
        return False
    est = _pd_estimates(chain, config)
    if est is None:
        return False
    lam, sig = est
    cutoff = hotelling_cutoff(config.alpha, p, sig.a_n)
    log_vol = region_volume(n, p, cutoff, sig.log_det)
    lhs = math.exp(log_vol / p) + 1.0 / n
    return lhs <= config.epsilon * math.exp(lam.log_det / (2.0 * p))


def check_absolute(chain: ChainMatrix, config: StoppingConfig) -> bool:
    """Fixed-volume rule with the constant metric K = 1.

    True iff n ≥ n*, estimates are positive definite, and
    Vol^{1/p} + 1/n ≤ ε.
    """
    n, p = chain.n, chain.p
    if n < config.n_star:
        return False
    est = _pd_estimates(chain, config)
    if est is None:
        return False
    _, sig = est
    cutoff = hotelling_cutoff(config.alpha, p, sig.a_n)
    log_vol = region_volume(n, p, cutoff, sig.log_det)
    return math.exp(log_vol / p) + 1.0 / n <= config.epsilon


def _t_star(alpha: float, p: int, a_n: int, bonferroni: bool) -> float:
    level = 1.0 - alpha / (2.0 * p) if bonferroni else 1.0 - alpha / 2.0
    return specfns.quantile(specfns.student_t(a_n - 1), level)


def check_univariate(
    chain: ChainMatrix, config: StoppingConfig, bonferroni=None
) -> bool:
    """Component-wise relative standard deviation fixed-width rule.

    True iff n ≥ n* and, for every component,
    2 t_* σ_{n,i}/√n + 1/n ≤ ε λ_{n,i}, with t_* at level 1 - α/2
    (uncorrected) or 1 - α/(2p) (Bonferroni). When bonferroni is None
    the choice follows config.metric.
    """
    n, p = chain.n, chain.p
    if bonferroni is None:
        bonferroni = config.metric == "univariate_bonferroni"
    if n < max(config.n_star, 2):
        return False
    b = batch_size(n, config.batch_policy)
    a_n = n // b
    if a_n < 2:
        return False
    sig2 = ubm_diag(chain, b)
    lam = np.sqrt(chain.data.var(axis=0, ddof=1))
    t_star = _t_star(config.alpha, p, a_n, bonferroni)
    lhs = 2.0 * t_star * np.sqrt(sig2) / math.sqrt(n) + 1.0 / n
    return bool((lhs <= config.epsilon * lam).all())


def rectangle_log_volume(
    chain: ChainMatrix, alpha: float, b_n: int, bonferroni: bool
) -> float:
    """Log volume of the simultaneous fixed-width hyperrectangle.

    Product over components of the interval widths 2 t_* σ_{n,i}/√n.
    """
    n, p = chain.n, chain.p
    a_n = n // b_n
    if a_n < 2:
        raise InsufficientData(f"need at least 2 batches, got a_n={a_n}")
    sig2 = ubm_diag(chain, b_n)
    t_star = _t_star(alpha, p, a_n, bonferroni)
    with np.errstate(divide="ignore"):
        logs = math.log(2.0 * t_star / math.sqrt(n)) + 0.5 * np.log(sig2)
    return float(logs.sum())


_CHECKS = {
    "relative_sd": check_relative_sd,
    "absolute": check_absolute,
    "univariate_bonferroni": lambda c, cfg: check_univariate(c, cfg, bonferroni=True),
    "univariate_uncorrected": lambda c, cfg: check_univariate(c, cfg, bonferroni=False),
}


def _resolve_rule(rule, config: StoppingConfig):
    if rule is None:
        return _CHECKS[config.metric]
    if isinstance(rule, str):
        if rule not in _CHECKS:
            raise DomainError(f"unknown rule {rule!r}")
        return _CHECKS[rule]
    if callable(rule):
        return rule
    raise DomainError("rule must be None, a metric name, or a callable")


def _final_summary(chain: ChainMatrix, config: StoppingConfig) -> tuple:
    """(ESS-hat, log volume) on the final chain; nan when unsupported."""
    n, p = chain.n, chain.p
    ess_val = float("nan")
    log_vol = float("nan")
    if n < 2:
        return ess_val, log_vol
    b = batch_size(n, config.batch_policy)
    try:
        sig = mbm(chain, b)
        lam = sample_covariance(chain)
        ess_val = multivariate_ess(lam, sig, n)
    except (InsufficientData, NotPositiveDefinite):
        sig = None
    if config.metric in ("relative_sd", "absolute"):
        if sig is not None and sig.is_pd:
            cutoff = hotelling_cutoff(config.alpha, p, sig.a_n)
            log_vol = region_volume(n, p, cutoff, sig.log_det)
    else:
        bonf = config.metric == "univariate_bonferroni"
        try:
            log_vol = rectangle_log_volume(chain, config.alpha, b, bonf)
        except InsufficientData:
            pass
    return ess_val, log_vol


def run_sequential(sampler, rule, config: StoppingConfig) -> StoppingResult:
    """Drive a stopping rule over a growing chain.

    The first checkpoint sits at n* (at least 2 rows so estimators are
    defined); each failure grows the chain by ⌈check_growth · n⌉. The
    whole retained chain is re-examined at every checkpoint. A memory
    budget caps the effective n_max; configurations whose n* does not
    fit are refused.
    """
    check = _resolve_rule(rule, config)
    n0 = max(config.n_star, 2)
    effective_max = config.n_max
    p_hint = getattr(sampler, "p", None)
    if p_hint is not None:
        effective_max = min(effective_max, config.memory_budget_bytes // (8 * int(p_hint)))
    if effective_max < n0:
        raise ConfigError(
            f"n_star={config.n_star} does not fit the cap of {effective_max} rows "
            "(n_max or the memory budget)"
        )
    take = sampler.take if hasattr(sampler, "take") else sampler
    n = n0
    while True:
        chain = take(n)
        if p_hint is None:
            p_hint = chain.p
            effective_max = min(
                effective_max, config.memory_budget_bytes // (8 * int(p_hint))
            )
            if effective_max < n0:
                raise ConfigError(
                    f"n_star={config.n_star} does not fit the memory budget"
                )
        if check(chain, config):
            reason = "criterion_met"
            break
        if n >= effective_max:
            reason = "n_max_reached"
            break
        n = min(n + int(math.ceil(config.check_growth * n)), effective_max)
    ess_val, log_vol = _final_summary(chain, config)
    return StoppingResult(
        terminated=(reason == "criterion_met"),
        n_final=n,
        ess_at_termination=ess_val,
        log_volume=log_vol,
        reason=reason,
    )
