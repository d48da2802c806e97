"""Monte Carlo simulation of erasure decoding.

Each trial draws its randomness from ``SeedSequence(master_seed,
spawn_key=(rate_index, trial_index))``, so results do not depend on how
trials are split across worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing as mp
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .cluster_decomp import build_cluster_forest
from .css_code import CssCode
from .decoders import DecoderConfig, ErasureDecoder
from .gf2_linalg import BitVector, mat_vec_mul_t


class Outcome(str, Enum):
    NO_SOLUTION = "no_solution"
    EXACT = "exact"
    DEGENERATE = "degenerate"
    LOGICAL = "logical"
    OVERSIZE = "oversize"

    @property
    def is_failure(self) -> bool:
        return self in (Outcome.NO_SOLUTION, Outcome.LOGICAL, Outcome.OVERSIZE)


@dataclass(frozen=True)
class TrialOutcome:
    tag: Outcome
    peelable: bool
    max_cluster_size: int | None = None


class DecoderReturnedNonSolution(AssertionError):
    """A decoder reported an estimate whose syndrome differs from the input."""


def sample_erasure(n: int, p: float, rng: np.random.Generator) -> BitVector:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure rate {p} outside [0, 1]")
    return BitVector.from_list(rng.random(n) < p)


def sample_error(erasure: BitVector, rng: np.random.Generator) -> BitVector:
    """Uniform X component on the erased positions."""
    support = erasure.support()
    flips = rng.integers(0, 2, size=len(support))
    return BitVector.from_indices(erasure.length, (v for v, b in zip(support, flips) if b))


def classify(
    code: CssCode, x: BitVector, x_hat: BitVector | None, found: bool, oversize: bool = False
) -> Outcome:
    if oversize:
        return Outcome.OVERSIZE
    if not found or x_hat is None:
        return Outcome.NO_SOLUTION
    if mat_vec_mul_t(code.h1, x_hat) != mat_vec_mul_t(code.h1, x):
        raise DecoderReturnedNonSolution("decoder output does not reproduce the syndrome")
    if x_hat == x:
        return Outcome.EXACT
    if code.is_stabilizer(x_hat ^ x):
        return Outcome.DEGENERATE
    return Outcome.LOGICAL


def wilson_ci(failures: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    if not 0 <= failures <= trials:
        raise ValueError("failures must lie in [0, trials]")
    z = NormalDist().inv_cdf(0.5 + level / 2)
    p = failures / trials
    z2n = z * z / trials
    denom = 1 + z2n
    centre = (p + z2n / 2) / denom
    half = z / denom * np.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    low = 0.0 if failures == 0 else max(0.0, centre - half)
    high = 1.0 if failures == trials else min(1.0, centre + half)
    return float(low), float(high)


# --- configuration and results -------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    decoder: DecoderConfig
    erasure_rates: tuple[float, ...]
    trials: int
    master_seed: int = 0
    threads: int = 1
    keep_outcomes: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for p in self.erasure_rates:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"erasure rate {p} outside [0, 1]")


@dataclass
class RateResult:
    rate: float
    trials: int
    failures: int
    failure_rate: float
    ci_low: float
    ci_high: float
    histogram: dict[str, int]
    not_peelable_fraction: float
    mean_max_cluster_size: float
    max_cluster_size: int
    outcomes: list[TrialOutcome] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("outcomes")
        return d


@dataclass
class SimResult:
    config: SimConfig
    rates: list[RateResult]
    residuals_checked: int = 0

    def to_csv(self) -> str:
        """Plot-ready layout: x, y, upper CI delta, lower CI delta."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "error1", "error2"])
        for r in self.rates:
            w.writerow(
                [
                    f"{r.rate:.4f}",
                    f"{r.failure_rate:.10f}",
                    f"{r.ci_high - r.failure_rate:.10f}",
                    f"{r.failure_rate - r.ci_low:.10f}",
                ]
            )
        return buf.getvalue()

    def to_json(self) -> dict:
        cfg = self.config
        return {
            "decoder": str(cfg.decoder),
            "decoder_kind": cfg.decoder.kind,
            "max_cluster_size": cfg.decoder.max_cluster_size,
            "erasure_rates": list(cfg.erasure_rates),
            "trials": cfg.trials,
            "master_seed": cfg.master_seed,
            "residuals_checked": self.residuals_checked,
            "rates": [r.to_dict() for r in self.rates],
        }


def read_results_csv(text: str) -> list[tuple[float, float, float, float]]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["x", "y", "error1", "error2"]:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    return [(float(r["x"]), float(r["y"]), float(r["error1"]), float(r["error2"])) for r in reader]


# --- trial execution -------------------------------------------------------


def trial_rng(master_seed: int, rate_index: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(rate_index, trial_index))
    )


class _TrialRunner:
    def __init__(self, code: CssCode, decoder: DecoderConfig) -> None:
        self.code = code
        self.decoder = ErasureDecoder(code.h1, decoder)

    def run(self, seed: int, rate_index: int, p: float, start: int, stop: int) -> list[TrialOutcome]:
        code = self.code
        out = []
        for t in range(start, stop):
            rng = trial_rng(seed, rate_index, t)
            erasure = sample_erasure(code.n, p, rng)
            x = sample_error(erasure, rng)
            s = mat_vec_mul_t(code.h1, x)
            res = self.decoder.decode(s, erasure)
            tag = classify(code, x, res.x_hat, res.found, res.oversize)
            size = res.max_cluster_size if not res.peelable else 0
            out.append(TrialOutcome(tag, res.peelable, size))
        return out


class _StatsRunner:
    def __init__(self, code: CssCode) -> None:
        self.code = code
        self.decoder = ErasureDecoder(code.h1, DecoderConfig("peeling"))

    def run(self, seed: int, rate_index: int, p: float, start: int, stop: int) -> list[int]:
        """Maximum cluster size per trial; 0 means the erasure was peelable."""
        n = self.code.n
        zero = BitVector.zeros(self.code.h1.rows)
        out = []
        for t in range(start, stop):
            rng = trial_rng(seed, rate_index, t)
            erasure = sample_erasure(n, p, rng)
            _, residual = self.decoder.peel(zero, erasure)
            if residual.is_empty():
                out.append(0)
            else:
                out.append(build_cluster_forest(residual, self.decoder.graph).max_size())
        return out


_worker: _TrialRunner | _StatsRunner | None = None


def _init_worker(factory: Callable[[], _TrialRunner | _StatsRunner]) -> None:
    global _worker
    _worker = factory()


def _run_chunk(args: tuple[int, int, float, int, int]) -> list:
    assert _worker is not None
    return _worker.run(*args)


def _resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads or os.cpu_count() or 1


def _execute(
    factory: Callable[[], _TrialRunner | _StatsRunner],
    seed: int,
    rates: Sequence[float],
    trials: int,
    threads: int,
    chunk: int = 500,
) -> list[list]:
    tasks = [
        (seed, ri, p, start, min(start + chunk, trials))
        for ri, p in enumerate(rates)
        for start in range(0, trials, chunk)
    ]
    workers = _resolve_threads(threads)
    if workers == 1:
        runner = factory()
        chunks = [runner.run(*t) for t in tasks]
    else:
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_init_worker, initargs=(factory,)) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    per_rate: list[list] = [[] for _ in rates]
    for (_, ri, *_rest), part in zip(tasks, chunks):
        per_rate[ri].extend(part)
    return per_rate


class _Factory:
    """Picklable constructor for per-process runners."""

    def __init__(self, kind: str, code: CssCode, decoder: DecoderConfig | None = None) -> None:
        self.kind = kind
        self.code = code
        self.decoder = decoder

    def __call__(self) -> _TrialRunner | _StatsRunner:
        if self.kind == "trials":
            assert self.decoder is not None
            return _TrialRunner(self.code, self.decoder)
        return _StatsRunner(self.code)


def _aggregate(rate: float, outcomes: list[TrialOutcome], keep: bool) -> RateResult:
    n = len(outcomes)
    hist = Counter(o.tag for o in outcomes)
    failures = sum(c for tag, c in hist.items() if tag.is_failure)
    low, high = wilson_ci(failures, n)
    stuck = [o.max_cluster_size or 0 for o in outcomes if not o.peelable]
    return RateResult(
        rate=rate,
        trials=n,
        failures=failures,
        failure_rate=failures / n,
        ci_low=low,
        ci_high=high,
        histogram={tag.value: hist.get(tag, 0) for tag in Outcome},
        not_peelable_fraction=len(stuck) / n,
        mean_max_cluster_size=float(np.mean(stuck)) if stuck else 0.0,
        max_cluster_size=max(stuck, default=0),
        outcomes=outcomes if keep else None,
    )


def run_trials(code: CssCode, cfg: SimConfig) -> SimResult:
    """Estimate failure rates of ``cfg.decoder`` at each erasure rate."""
    per_rate = _execute(
        _Factory("trials", code, cfg.decoder), cfg.master_seed, cfg.erasure_rates, cfg.trials, cfg.threads
    )
    rates = [_aggregate(p, outs, cfg.keep_outcomes) for p, outs in zip(cfg.erasure_rates, per_rate)]
    return SimResult(cfg, rates, residuals_checked=cfg.trials * len(cfg.erasure_rates))


@dataclass
class ClusterStats:
    rate: float
    trials: int
    not_peelable_fraction: float
    exceed_fraction: dict[int, float]
    max_sizes: list[int] = field(default_factory=list, repr=False)


def cluster_stats(
    code: CssCode,
    rates: Sequence[float],
    trials: int,
    thresholds: Sequence[int],
    master_seed: int = 0,
    threads: int = 1,
) -> list[ClusterStats]:
    """Per rate: fraction not peelable and fraction with max cluster size above each threshold.

    Erasures are drawn exactly as in :func:`run_trials` with the same seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    per_rate = _execute(_Factory("stats", code), master_seed, rates, trials, threads)
    out = []
    for p, sizes in zip(rates, per_rate):
        arr = np.asarray(sizes)
        out.append(
            ClusterStats(
                rate=p,
                trials=len(sizes),
                not_peelable_fraction=float(np.mean(arr > 0)),
                exceed_fraction={t: float(np.mean(arr > t)) for t in thresholds},
                max_sizes=list(sizes),
            )
        )
    return out


def stats_to_csv(stats: Sequence[ClusterStats], thresholds: Sequence[int]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rate", "not_peelable_fraction", *[f"smax_gt_{t}" for t in thresholds]])
    for st in stats:
        w.writerow(
            [f"{st.rate:.4f}", f"{st.not_peelable_fraction:.10f}", *[f"{st.exceed_fraction[t]:.10f}" for t in thresholds]]
        )
    return buf.getvalue()


def dumps_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
