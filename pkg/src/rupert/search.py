"""Seeded random-restart search over passages, with an append-only improvement log."""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import Polyhedron
from .mu import Passage, mu_value
from .projection import DegenerateSilhouetteError
from .solver import SolverConfig, run

log = logging.getLogger(__name__)

MAX_RESAMPLES = 1000


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    trials: int | None = 100
    seconds: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    u_v_range: float = 0.1
    zero_translation_share: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.trials is None and self.seconds is None:
            raise ValueError("need a trial count or a time budget")
        if (self.trials is not None and self.trials <= 0) or (self.seconds is not None and self.seconds <= 0):
            raise ValueError("budget must be positive")
        if not self.u_v_range > 0:
            raise ValueError("u_v_range must be positive")
        if not 0 <= self.zero_translation_share <= 1:
            raise ValueError("zero_translation_share must lie in [0, 1]")


@dataclass
class BestRecord:
    shape: str
    x: list[float]
    mu_double: float
    certificate_norm: float
    seed: int
    trials: int
    iterations_total: int
    trial: int = 0
    iters: int = 0
    mu_certified: str | None = None

    def to_json(self) -> dict:
        out = {
            "shape": self.shape,
            "x": [float(v) for v in self.x],
            "mu": self.mu_double,
            "certificate_norm": self.certificate_norm,
            "seed": self.seed,
            "trial": self.trial,
            "iters": self.iters,
            "trials": self.trials,
            "iterations_total": self.iterations_total,
        }
        if self.mu_certified is not None:
            out["mu_certified"] = self.mu_certified
        return out

    @classmethod
    def from_json(cls, d: dict) -> "BestRecord":
        return cls(
            shape=d["shape"],
            x=[float(v) for v in d["x"]],
            mu_double=float(d["mu"]),
            certificate_norm=float(d.get("certificate_norm", math.nan)),
            seed=int(d.get("seed", 0)),
            trials=int(d.get("trials", d.get("trial", 0) + 1)),
            iterations_total=int(d.get("iterations_total", d.get("iters", 0))),
            trial=int(d.get("trial", 0)),
            iters=int(d.get("iters", 0)),
            mu_certified=d.get("mu_certified"),
        )

    @property
    def passage(self) -> Passage:
        return Passage(*self.x)


def read_records(path) -> list[BestRecord]:
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(BestRecord.from_json(json.loads(line)))
    return records


def write_records(path, records) -> None:
    Path(path).write_text("".join(json.dumps(r.to_json()) + "\n" for r in records))


def append_record(path, record: BestRecord) -> None:
    with open(path, "a") as fh:
        fh.write(json.dumps(record.to_json()) + "\n")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, trial), independent of scheduling."""
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial)])
    return np.random.Generator(np.random.Philox(key))


def sample_init(rng: np.random.Generator, u_v_range: float = 0.1, zero_translation_share: float = 0.5) -> Passage:
    zero = rng.random() < zero_translation_share
    u, v = rng.uniform(-u_v_range, u_v_range, size=2)
    theta_p = rng.uniform(0.0, np.pi)
    phi_p = rng.uniform(0.0, 2 * np.pi)
    alpha = rng.uniform(0.0, 2 * np.pi)
    theta_q = rng.uniform(0.0, np.pi)
    phi_q = rng.uniform(0.0, 2 * np.pi)
    if zero:
        u = v = 0.0
    return Passage(float(u), float(v), theta_p, phi_p, alpha, theta_q, phi_q)


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    x: np.ndarray
    mu: float
    certificate_norm: float
    iters: int
    status: str


def run_trial(P: Polyhedron, cfg: SearchConfig, trial: int) -> TrialOutcome | None:
    rng = trial_rng(cfg.seed, trial)
    for _ in range(MAX_RESAMPLES):
        x0 = np.array(sample_init(rng, cfg.u_v_range, cfg.zero_translation_share))
        if math.isfinite(mu_value(P, x0)):
            break
    else:
        return None
    try:
        it, cert = run(P, x0, cfg.solver)
    except DegenerateSilhouetteError:
        return None
    return TrialOutcome(trial, it.x, it.mu, cert.norm, it.k, it.status)


def _outcomes(P: Polyhedron, cfg: SearchConfig):
    """Yield trial outcomes in trial order until the budget is spent."""
    start = time.monotonic()

    def more(t):
        if cfg.trials is not None and t >= cfg.trials:
            return False
        # the clock is read between trials only, and the first trial always runs
        return t == 0 or cfg.seconds is None or time.monotonic() - start < cfg.seconds

    t = 0
    if cfg.workers <= 1:
        while more(t):
            yield run_trial(P, cfg, t)
            t += 1
        return
    with ProcessPoolExecutor(cfg.workers) as pool:
        while more(t):
            batch = [t + k for k in range(cfg.workers) if cfg.trials is None or t + k < cfg.trials]
            for outcome in pool.map(run_trial, [P] * len(batch), [cfg] * len(batch), batch):
                yield outcome
            t += len(batch)


def run_search(P: Polyhedron, cfg: SearchConfig, log_path=None, progress=None) -> BestRecord | None:
    """Best outcome over all trials (ties go to the lowest trial index).

    Each strict improvement is appended to ``log_path``.  Returns ``None`` if
    no trial produced a finite passage.
    """
    best: BestRecord | None = None
    n = iters = 0
    for outcome in _outcomes(P, cfg):
        n += 1
        if outcome is None:
            continue
        iters += outcome.iters
        if progress is not None:
            progress(outcome)
        if best is None or outcome.mu > best.mu_double:
            best = BestRecord(
                shape=P.name,
                x=[float(v) for v in outcome.x],
                mu_double=float(outcome.mu),
                certificate_norm=float(outcome.certificate_norm),
                seed=cfg.seed,
                trials=n,
                iterations_total=iters,
                trial=outcome.trial,
                iters=outcome.iters,
            )
            log.info("trial %d: mu = %.15f", outcome.trial, outcome.mu)
            if log_path is not None:
                append_record(log_path, best)
    if best is not None:
        best.trials = n
        best.iterations_total = iters
    return best


__all__ = [
    "SearchConfig",
    "BestRecord",
    "TrialOutcome",
    "sample_init",
    "trial_rng",
    "run_trial",
    "run_search",
    "read_records",
    "write_records",
]
