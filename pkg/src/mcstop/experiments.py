"""Replication studies at desk scale.

Each study runs R independent replications (seed_base + r for
replication r), retains one row per replication and grid cell, and
aggregates means with standard errors sample-sd/sqrt(R). Studies are
deterministic: rerunning a spec reproduces the report bitwise.

Worker-pool parallelism over replications is available through the
MCSTOP_WORKERS environment variable; aggregation order never depends
on worker scheduling.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .chain import MeanVector, column_means
from .errors import ConfigError, DomainError, McstopError
from .estimators import BatchPolicy, batch_size, mbm, sample_covariance, ubm_diag
from .ess import multivariate_ess
from .regions import contains, make_region
from .samplers import (
    LOGIT_REFERENCE_MEAN,
    IidGaussianSource,
    LogisticModel,
    RwmLogisticSource,
    Var1Model,
    Var1Source,
    ar1_cov,
    load_logit_data,
)
from .stopping import (
    StoppingConfig,
    default_nstar,
    rectangle_log_volume,
    run_sequential,
)
from .stopping import _t_star  # shared quantile helper

_METHODS = ("mbm", "ubm_bonferroni", "ubm")
_METHOD_METRIC = {
    "ubm_bonferroni": "univariate_bonferroni",
    "ubm": "univariate_uncorrected",
}


# ---------------------------------------------------------------------------
# model specs


@dataclass(frozen=True)
class Var1Spec:
    """VAR(1) study model; truth is the analytic zero mean."""

    model: Var1Model
    kind: str = field(default="var1", init=False)

    @property
    def p(self) -> int:
        return self.model.p

    @property
    def truth(self) -> np.ndarray:
        return np.zeros(self.model.p)

    @property
    def sigma_true(self) -> np.ndarray:
        return self.model.sigma_true

    def make_source(self, seed: int) -> Var1Source:
        return Var1Source(self.model, seed)


@dataclass(frozen=True)
class LogisticSpec:
    """Logistic RWM study model; truth defaults to the proxy reference mean."""

    model: LogisticModel
    proxy_truth: np.ndarray = field(default_factory=lambda: LOGIT_REFERENCE_MEAN)
    kind: str = field(default="logistic", init=False)

    @property
    def p(self) -> int:
        return self.model.r

    @property
    def truth(self) -> np.ndarray:
        return np.asarray(self.proxy_truth, dtype=np.float64)

    def make_source(self, seed: int) -> RwmLogisticSource:
        return RwmLogisticSource(self.model, seed, init="prior_draw")


@dataclass(frozen=True)
class IidGaussianSpec:
    """Independent N(0, I_p) model; the exact-theory baseline."""

    dim: int
    kind: str = field(default="iid_gaussian", init=False)

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"p must be >= 1, got {self.dim}")

    @property
    def p(self) -> int:
        return self.dim

    @property
    def truth(self) -> np.ndarray:
        return np.zeros(self.dim)

    def make_source(self, seed: int) -> IidGaussianSource:
        return IidGaussianSource(self.dim, seed)


def var1_benchmark(p: int) -> Var1Spec:
    """The diagonal VAR(1) benchmark: Φ = diag(.9, .5, .1, ...), AR(1) Ω.

    p = 5 is the coverage/termination workhorse; p = 50 drives the
    relative-error study.
    """
    if p < 2:
        raise DomainError(f"benchmark needs p >= 2, got {p}")
    phi = np.diag(np.array([0.9, 0.5] + [0.1] * (p - 2)))
    omega = ar1_cov(0.9, p)
    return Var1Spec(Var1Model(phi=phi, omega=omega))


def logistic_benchmark(tau2: float = 1.0, proposal_sd: float = 0.35) -> LogisticSpec:
    """The bundled-dataset logistic model with the proxy truth attached."""
    return LogisticSpec(load_logit_data(tau2=tau2, proposal_sd=proposal_sd))


def parse_model_spec(text: str):
    """Parse the model minilanguage used by configs and the CLI.

    Forms:
      iid:p=5
      var1_bench5 | var1_bench50
      var1:phi=0.9,0.5,0.1;rho=0.9[;scale=1.0]   (diagonal Φ, AR(1) Ω)
      logistic[:tau2=1.0;proposal_sd=0.35]
    """
    text = text.strip()
    if text == "var1_bench5":
        return var1_benchmark(5)
    if text == "var1_bench50":
        return var1_benchmark(50)
    head, _, rest = text.partition(":")
    if head not in ("iid", "logistic", "var1"):
        raise ConfigError(f"unknown model kind {head!r} in {text!r}")
    opts = {}
    if rest:
        for item in rest.split(";"):
            k, sep, v = item.partition("=")
            if not sep:
                raise ConfigError(f"bad model option {item!r} in {text!r}")
            opts[k.strip()] = v.strip()
    if head == "iid":
        if set(opts) != {"p"}:
            raise ConfigError(f"iid model takes exactly p=<dim>, got {text!r}")
        try:
            return IidGaussianSpec(int(opts["p"]))
        except ValueError:
            raise ConfigError(f"bad dimension in {text!r}") from None
    if head == "logistic":
        bad = set(opts) - {"tau2", "proposal_sd"}
        if bad:
            raise ConfigError(f"unknown logistic options {sorted(bad)}")
        try:
            return logistic_benchmark(
                tau2=float(opts.get("tau2", 1.0)),
                proposal_sd=float(opts.get("proposal_sd", 0.35)),
            )
        except ValueError:
            raise ConfigError(f"bad numeric option in {text!r}") from None
    bad = set(opts) - {"phi", "rho", "scale"}
    if bad:
        raise ConfigError(f"unknown var1 options {sorted(bad)}")
    if "phi" not in opts or "rho" not in opts:
        raise ConfigError("var1 model needs phi=<floats> and rho=<float>")
    try:
        diag = [float(x) for x in opts["phi"].split(",")]
        rho = float(opts["rho"])
        scale = float(opts.get("scale", 1.0))
    except ValueError:
        raise ConfigError(f"bad numeric option in {text!r}") from None
    phi = np.diag(np.array(diag))
    return Var1Spec(Var1Model(phi=phi, omega=ar1_cov(rho, len(diag), scale)))


# ---------------------------------------------------------------------------
# study spec and report


@dataclass(frozen=True)
class StudySpec:
    """One replication study.

    stopping is either a StoppingConfig (sequential studies) or a
    sequence of chain lengths (fixed-n studies). In fixed-n mode the
    confidence level and batch policy ride in alpha / batch_policy;
    in sequential mode they ride in the StoppingConfig.
    """

    model: object
    replications: int
    stopping: object
    methods: Sequence[str] = ("mbm",)
    truth: Optional[np.ndarray] = None
    seed_base: int = 0
    alpha: Optional[float] = None
    batch_policy: Optional[BatchPolicy] = None

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")
        methods = tuple(self.methods)
        if not methods:
            raise DomainError("methods must be nonempty")
        bad = set(methods) - set(_METHODS)
        if bad:
            raise DomainError(f"unknown methods {sorted(bad)}")
        object.__setattr__(self, "methods", methods)
        if isinstance(self.stopping, StoppingConfig):
            if self.alpha is not None or self.batch_policy is not None:
                raise DomainError(
                    "sequential studies take alpha and batch policy from "
                    "the StoppingConfig"
                )
        else:
            try:
                sizes = tuple(int(n) for n in self.stopping)
            except TypeError:
                raise DomainError(
                    "stopping must be a StoppingConfig or a sequence of lengths"
                ) from None
            if not sizes or any(n < 2 for n in sizes):
                raise DomainError("fixed-n lengths must all be >= 2")
            object.__setattr__(self, "stopping", sizes)
        if self.truth is not None:
            t = np.asarray(self.truth, dtype=np.float64).reshape(-1)
            if t.size != self.model.p:
                raise DomainError(f"truth length {t.size} != p={self.model.p}")
            object.__setattr__(self, "truth", t)

    @property
    def is_fixed_n(self) -> bool:
        return not isinstance(self.stopping, StoppingConfig)

    @property
    def eff_alpha(self) -> float:
        if isinstance(self.stopping, StoppingConfig):
            return self.stopping.alpha
        return 0.10 if self.alpha is None else self.alpha

    @property
    def eff_policy(self) -> BatchPolicy:
        if isinstance(self.stopping, StoppingConfig):
            return self.stopping.batch_policy
        return BatchPolicy.exponent() if self.batch_policy is None else self.batch_policy

    @property
    def eff_truth(self) -> np.ndarray:
        return self.model.truth if self.truth is None else self.truth


@dataclass(frozen=True)
class StudyReport:
    """Per-replication rows plus grouped aggregates.

    summary rows carry mean_<col> and se_<col> pairs (coverage /
    se_coverage for the membership indicator), where the standard
    error is the sample standard deviation over replications divided
    by sqrt(R).
    """

    study: str
    rows: tuple
    summary: tuple

    def write_csv(self, path: str) -> None:
        """Per-replication rows as CSV (one header from the row keys)."""
        if not self.rows:
            raise DomainError("report has no rows")
        cols = list(self.rows[0].keys())
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols)
            writer.writeheader()
            writer.writerows(self.rows)

    def write_json(self, path: str) -> None:
        """Summary groups as JSON; non-finite values serialize as null."""
        payload = {
            "study": self.study,
            "groups": [_jsonable(g) for g in self.summary],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")

    def format_table(self) -> str:
        """Aligned text table of the summary, mean (se) per cell."""
        if not self.summary:
            return "(empty report)"
        group_cols = [k for k in self.summary[0] if not k.startswith(("mean_", "se_"))
                      and k not in ("coverage", "se_coverage", "count")]
        value_cols = []
        for k in self.summary[0]:
            if k == "coverage" or k.startswith("mean_"):
                value_cols.append(k)
        header = group_cols + value_cols + ["count"]
        lines = []
        for g in self.summary:
            cells = [_fmt_cell(g[c]) for c in group_cols]
            for c in value_cols:
                se_key = "se_coverage" if c == "coverage" else "se_" + c[5:]
                se = g.get(se_key)
                cells.append(
                    f"{_fmt_cell(g[c])} ({_fmt_cell(se)})" if se is not None
                    else _fmt_cell(g[c])
                )
            cells.append(str(g["count"]))
            lines.append(cells)
        widths = [max(len(header[i]), *(len(row[i]) for row in lines))
                  for i in range(len(header))]
        out = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        out.append("  ".join("-" * w for w in widths))
        for row in lines:
            out.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
        return "\n".join(out)


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.4g}"
    return str(v)


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.integer,)):
            v = int(v)
        elif isinstance(v, (np.floating,)):
            v = float(v)
        if isinstance(v, float) and not math.isfinite(v):
            v = None
        out[k] = v
    return out


def _aggregate(rows: list, group_keys: list, value_cols: list) -> tuple:
    """Group rows and attach mean/se per value column, in first-seen order."""
    groups: dict = {}
    for row in rows:
        key = tuple(row[k] for k in group_keys)
        groups.setdefault(key, []).append(row)
    summary = []
    for key, grp in groups.items():
        out = dict(zip(group_keys, key))
        for col in value_cols:
            vals = np.array([float(r[col]) for r in grp])
            mean = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
            if col == "covered":
                out["coverage"] = mean
                out["se_coverage"] = se
            else:
                out[f"mean_{col}"] = mean
                out[f"se_{col}"] = se
        out["count"] = len(grp)
        summary.append(out)
    return tuple(summary)


def _workers() -> int:
    raw = os.environ.get("MCSTOP_WORKERS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"MCSTOP_WORKERS must be an integer, got {raw!r}") from None
    return max(1, w)


def _map_replications(worker, payloads: list) -> list:
    """Run one payload per replication, preserving replication order."""
    w = _workers()
    if w > 1:
        with ProcessPoolExecutor(max_workers=w) as pool:
            results = list(pool.map(worker, payloads))
    else:
        results = [worker(p) for p in payloads]
    return [row for sub in results for row in sub]


# ---------------------------------------------------------------------------
# coverage study


def _rect_covered(chain, truth, alpha: float, b_n: int, bonferroni: bool) -> bool:
    n, p = chain.n, chain.p
    a_n = n // b_n
    sig2 = ubm_diag(chain, b_n)
    t_star = _t_star(alpha, p, a_n, bonferroni)
    half = t_star * np.sqrt(sig2) / math.sqrt(n)
    diff = np.abs(column_means(chain).values - truth)
    return bool((diff < half).all())


def _coverage_eval(chain, method: str, truth, alpha: float, policy: BatchPolicy):
    """(ess, covered, log_volume) for one chain under one method."""
    n = chain.n
    b = batch_size(n, policy)
    sig = mbm(chain, b)
    ess_val = float("nan")
    if sig.is_pd:
        lam = sample_covariance(chain)
        if lam.is_pd:
            ess_val = multivariate_ess(lam, sig, n)
    if method == "mbm":
        if not sig.is_pd:
            return ess_val, False, float("nan")
        region = make_region(column_means(chain), sig, n, alpha)
        covered = contains(region, MeanVector(truth))
        return ess_val, covered, region.log_volume
    bonf = method == "ubm_bonferroni"
    log_vol = rectangle_log_volume(chain, alpha, b, bonf)
    covered = _rect_covered(chain, truth, alpha, b, bonf)
    return ess_val, covered, log_vol


def _coverage_rep(payload) -> list:
    spec, r = payload
    seed = spec.seed_base + r
    truth = spec.eff_truth
    p = spec.model.p
    rows = []
    try:
        source = spec.model.make_source(seed)
        if spec.is_fixed_n:
            for n in spec.stopping:
                chain = source.take(n)
                for method in spec.methods:
                    t0 = time.perf_counter()
                    ess_val, covered, log_vol = _coverage_eval(
                        chain, method, truth, spec.eff_alpha, spec.eff_policy
                    )
                    rows.append({
                        "replication": r,
                        "method": method,
                        "n": int(n),
                        "ess": ess_val,
                        "covered": int(covered),
                        "vol_p": math.exp(log_vol / p) if math.isfinite(log_vol) else float("nan"),
                        "log_volume": log_vol,
                        "reason": "fixed_n",
                        "seconds": time.perf_counter() - t0,
                    })
        else:
            config = spec.stopping
            for method in spec.methods:
                metric = _METHOD_METRIC.get(method, config.metric)
                if method == "mbm" and metric not in ("relative_sd", "absolute"):
                    metric = "relative_sd"
                cfg = dataclasses.replace(config, metric=metric)
                t0 = time.perf_counter()
                result = run_sequential(source, None, cfg)
                chain = source.take(result.n_final)
                ess_val, covered, log_vol = _coverage_eval(
                    chain, method, truth, cfg.alpha, cfg.batch_policy
                )
                rows.append({
                    "replication": r,
                    "method": method,
                    "n": result.n_final,
                    "ess": result.ess_at_termination,
                    "covered": int(covered),
                    "vol_p": math.exp(log_vol / p) if math.isfinite(log_vol) else float("nan"),
                    "log_volume": log_vol,
                    "reason": result.reason,
                    "seconds": time.perf_counter() - t0,
                })
    except McstopError:
        raise
    except Exception as exc:
        raise McstopError(f"replication {r} failed: {exc}") from exc
    return rows


def coverage_study(spec: StudySpec) -> StudyReport:
    """Region coverage (and termination statistics) over replications.

    Fixed-n studies evaluate each method on the same chain prefix;
    sequential studies run each method's own stopping rule on a shared
    underlying chain realization per replication.
    """
    payloads = [(spec, r) for r in range(spec.replications)]
    rows = _map_replications(_coverage_rep, payloads)
    group_keys = ["method", "n"] if spec.is_fixed_n else ["method"]
    summary = _aggregate(rows, group_keys, ["n", "ess", "covered", "vol_p"])
    if spec.is_fixed_n:
        for g in summary:
            g.pop("mean_n", None)
            g.pop("se_n", None)
    return StudyReport(study="coverage", rows=tuple(rows), summary=summary)


# ---------------------------------------------------------------------------
# relative error study


def _relerr_rep(payload) -> list:
    spec, r, sizes = payload
    seed = spec.seed_base + r
    sigma = spec.model.sigma_true
    denom = float(np.linalg.norm(sigma))
    policy = spec.eff_policy
    rows = []
    try:
        source = spec.model.make_source(seed)
        for n in sizes:
            chain = source.take(n)
            b = batch_size(n, policy)
            t0 = time.perf_counter()
            est = mbm(chain, b)
            seconds = time.perf_counter() - t0
            rel = float(np.linalg.norm(est.matrix - sigma)) / denom
            rows.append({
                "replication": r,
                "n": int(n),
                "rel_error": rel,
                "seconds": seconds,
            })
    except McstopError:
        raise
    except Exception as exc:
        raise McstopError(f"replication {r} failed: {exc}") from exc
    return rows


def relative_error_study(spec: StudySpec, sizes: Sequence[int]) -> StudyReport:
    """Relative Frobenius error of the batch means estimate per size.

    Needs a model with an analytic asymptotic covariance (VAR(1)).
    """
    if not hasattr(spec.model, "sigma_true"):
        raise DomainError("relative error study needs a model with analytic Σ")
    sizes = tuple(int(n) for n in sizes)
    if not sizes or any(n < 2 for n in sizes):
        raise DomainError("sizes must all be >= 2")
    payloads = [(spec, r, sizes) for r in range(spec.replications)]
    rows = _map_replications(_relerr_rep, payloads)
    summary = _aggregate(rows, ["n"], ["rel_error", "seconds"])
    return StudyReport(study="relative_error", rows=tuple(rows), summary=summary)


# ---------------------------------------------------------------------------
# batch sensitivity study


def _sensitivity_rep(payload) -> list:
    spec, r, nus, eps_list = payload
    seed = spec.seed_base + r
    truth = spec.eff_truth
    config = spec.stopping
    p = spec.model.p
    rows = []
    try:
        for nu in nus:
            for eps in eps_list:
                cfg = dataclasses.replace(
                    config,
                    epsilon=eps,
                    batch_policy=BatchPolicy.exponent(nu),
                    metric="relative_sd",
                )
                source = spec.model.make_source(seed)
                t0 = time.perf_counter()
                result = run_sequential(source, None, cfg)
                chain = source.take(result.n_final)
                b = batch_size(chain.n, cfg.batch_policy)
                sig = mbm(chain, b)
                if sig.is_pd:
                    region = make_region(
                        column_means(chain), sig, chain.n, cfg.alpha
                    )
                    covered = contains(region, MeanVector(truth))
                    max_eig = float(np.linalg.eigvalsh(sig.matrix)[-1])
                else:
                    covered = False
                    max_eig = float("nan")
                rows.append({
                    "replication": r,
                    "nu": float(nu),
                    "eps": float(eps),
                    "n": result.n_final,
                    "ess": result.ess_at_termination,
                    "covered": int(covered),
                    "vol_p": math.exp(result.log_volume / p)
                    if math.isfinite(result.log_volume) else float("nan"),
                    "max_eigenvalue": max_eig,
                    "reason": result.reason,
                    "seconds": time.perf_counter() - t0,
                })
    except McstopError:
        raise
    except Exception as exc:
        raise McstopError(f"replication {r} failed: {exc}") from exc
    return rows


def batch_sensitivity_study(
    spec: StudySpec, nus: Sequence[float], eps_list: Optional[Sequence[float]] = None
) -> StudyReport:
    """Coverage at termination over a (nu, eps) grid.

    Each cell reruns the relative-sd rule with b_n = ⌊n^nu⌋; the
    per-replication largest eigenvalue of the final estimate is
    retained for spread analysis.
    """
    if spec.is_fixed_n:
        raise DomainError("batch sensitivity study needs a sequential StoppingConfig")
    nus = tuple(float(v) for v in nus)
    if not nus:
        raise DomainError("nus must be nonempty")
    eps_list = (
        (spec.stopping.epsilon,) if eps_list is None
        else tuple(float(e) for e in eps_list)
    )
    payloads = [(spec, r, nus, eps_list) for r in range(spec.replications)]
    rows = _map_replications(_sensitivity_rep, payloads)
    summary = _aggregate(
        rows, ["nu", "eps"], ["n", "ess", "covered", "vol_p", "max_eigenvalue"]
    )
    return StudyReport(study="batch_sensitivity", rows=tuple(rows), summary=summary)


# ---------------------------------------------------------------------------
# study config files


_STUDY_KEYS = {
    "study", "model", "replications", "methods", "mode", "fixed_n",
    "epsilon", "alpha", "n_star", "batch", "metric", "n_max",
    "check_growth", "seed_base", "sizes", "nus", "eps_list",
}


def _parse_batch(text: str) -> BatchPolicy:
    kind, sep, val = text.partition(":")
    if not sep:
        raise ConfigError(f"batch must be nu:<float> or fixed:<int>, got {text!r}")
    try:
        if kind == "nu":
            return BatchPolicy.exponent(float(val))
        if kind == "fixed":
            return BatchPolicy.fixed(int(val))
    except ValueError:
        raise ConfigError(f"bad batch value {val!r}") from None
    raise ConfigError(f"unknown batch kind {kind!r}")


def read_study_config(path: str) -> dict:
    """Parse a key = value study config file.

    Returns a validated dict ready for run_study. Unknown keys are an
    error and are listed, blank lines and # comments are skipped.
    """
    with open(path) as fh:
        text = fh.read()
    raw = {}
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, val = stripped.partition("=")
        if not sep:
            raise ConfigError(f"line {i}: expected key = value, got {stripped!r}")
        key = key.strip()
        if key in raw:
            raise ConfigError(f"line {i}: duplicate key {key!r}")
        raw[key] = val.strip()
    unknown = sorted(set(raw) - _STUDY_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return _validate_study_config(raw)


def _need(raw: dict, key: str) -> str:
    if key not in raw:
        raise ConfigError(f"missing required config key {key!r}")
    return raw[key]


def _conv(raw: dict, key: str, conv, default=None):
    if key not in raw:
        return default
    try:
        return conv(raw[key])
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw[key]!r}") from None


def _validate_study_config(raw: dict) -> dict:
    study = _need(raw, "study")
    if study not in ("coverage", "relative_error", "batch_sensitivity"):
        raise ConfigError(f"unknown study {study!r}")
    model = parse_model_spec(_need(raw, "model"))
    replications = _conv(raw, "replications", int)
    if replications is None:
        raise ConfigError("missing required config key 'replications'")
    seed_base = _conv(raw, "seed_base", int)
    if seed_base is None:
        raise ConfigError("missing required config key 'seed_base'")
    alpha = _conv(raw, "alpha", float, 0.10)
    policy = _parse_batch(raw["batch"]) if "batch" in raw else BatchPolicy.exponent()
    out = {"study": study, "model": model}

    def floats(key):
        return tuple(float(x) for x in raw[key].split(","))

    def ints(key):
        return tuple(int(x) for x in raw[key].split(","))

    def build_config(epsilon):
        n_star_raw = raw.get("n_star", "auto")
        if n_star_raw == "auto":
            n_star = default_nstar(model.p, alpha, epsilon, policy)
        else:
            try:
                n_star = int(n_star_raw)
            except ValueError:
                raise ConfigError("n_star must be an integer or auto") from None
        return StoppingConfig(
            epsilon=epsilon,
            alpha=alpha,
            n_star=n_star,
            batch_policy=policy,
            metric=raw.get("metric", "relative_sd"),
            check_growth=_conv(raw, "check_growth", float, 0.10),
            n_max=_conv(raw, "n_max", int, 10**8),
        )

    try:
        if study == "coverage":
            mode = raw.get("mode", "sequential")
            methods = tuple(
                m.strip() for m in raw.get("methods", "mbm").split(",")
            )
            if mode == "fixed":
                sizes = ints("fixed_n") if "fixed_n" in raw else None
                if sizes is None:
                    raise ConfigError("fixed mode needs fixed_n = <comma list>")
                spec = StudySpec(
                    model=model, replications=replications, stopping=sizes,
                    methods=methods, seed_base=seed_base,
                    alpha=alpha, batch_policy=policy,
                )
            elif mode == "sequential":
                epsilon = _conv(raw, "epsilon", float)
                if epsilon is None:
                    raise ConfigError("sequential mode needs epsilon")
                spec = StudySpec(
                    model=model, replications=replications,
                    stopping=build_config(epsilon),
                    methods=methods, seed_base=seed_base,
                )
            else:
                raise ConfigError(f"unknown mode {mode!r}")
            out.update({"spec": spec})
        elif study == "relative_error":
            if "sizes" not in raw:
                raise ConfigError("relative_error study needs sizes = <comma list>")
            spec = StudySpec(
                model=model, replications=replications,
                stopping=ints("sizes"),
                methods=("mbm",), seed_base=seed_base,
                alpha=alpha, batch_policy=policy,
            )
            out.update({"spec": spec, "sizes": ints("sizes")})
        else:
            epsilon = _conv(raw, "epsilon", float, 0.05)
            if "nus" not in raw:
                raise ConfigError("batch_sensitivity study needs nus = <comma list>")
            spec = StudySpec(
                model=model, replications=replications,
                stopping=build_config(epsilon),
                methods=("mbm",), seed_base=seed_base,
            )
            eps_list = floats("eps_list") if "eps_list" in raw else None
            out.update({"spec": spec, "nus": floats("nus"), "eps_list": eps_list})
    except ValueError:
        raise ConfigError("bad numeric list in config") from None
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return out


def run_study(parsed: dict) -> StudyReport:
    """Execute a config parsed by read_study_config."""
    study = parsed["study"]
    if study == "coverage":
        return coverage_study(parsed["spec"])
    if study == "relative_error":
        return relative_error_study(parsed["spec"], parsed["sizes"])
    return batch_sensitivity_study(
        parsed["spec"], parsed["nus"], parsed.get("eps_list")
    )
