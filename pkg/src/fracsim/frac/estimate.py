"""Exact and Monte Carlo bias estimation, and the report they produce."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import NormalDist

import numpy as np

from .protocols import Protocol
from .sequences import count_sequences, sample_sequences

CHUNK = 1 << 14
MIN_TRIALS = 1000
CONFIDENCE = 0.99
Z_SCORE = NormalDist().inv_cdf(0.5 + CONFIDENCE / 2)
PER_S_LIMIT = 4096
JOBS_ENV = "FRACSIM_JOBS"

CSV_COLUMNS = ("protocol", "n", "m", "k", "f", "ell", "trials", "bias_avg", "bias_worst", "ci",
               "stab_lower", "thm44_upper")


def format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


@dataclass
class BiasReport:
    """Bias of one protocol configuration, exact or estimated.

    ``bias_worst`` is the minimum over (x, S) of 2 Pr[success] - 1 and is
    only known in exact mode or over an explicit grid of points.
    ``ci`` is the half-width of the 99% normal interval on ``bias_avg``.
    """

    protocol: str
    n: int
    m: float
    k: int
    f: str
    ell: int | None
    mode: str
    bias_avg: float
    bias_worst: float | None = None
    ci: float = 0.0
    trials: int | None = None
    seed: int | None = None
    per_S: list | None = None
    stab_lower: float | None = None
    thm44_upper: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bias_worst is not None and self.bias_worst > self.bias_avg + 1e-12 + 2 * self.ci:
            raise ValueError("worst-case bias exceeds the average")

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.per_S is not None and len(self.per_S) > 64:
            out["per_S"] = None
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default) + "\n"

    def csv_row(self) -> list[str]:
        return [format_number(getattr(self, col)) for col in CSV_COLUMNS]


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _report(protocol: Protocol, mode: str, **values) -> BiasReport:
    return BiasReport(protocol=protocol.resource, n=protocol.n, m=protocol.m, k=protocol.k,
                      f=protocol.f.name, ell=protocol.ell, mode=mode, **values)


def exact_bias(protocol: Protocol) -> BiasReport:
    """Enumerate every input, query and discrete random choice."""
    success = protocol.exact_success()
    per_S = 2.0 * success.mean(axis=0) - 1.0
    return _report(protocol, "exact",
                   bias_avg=float(2.0 * success.mean() - 1.0),
                   bias_worst=float(2.0 * success.min() - 1.0),
                   trials=None, per_S=per_S.tolist())


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ValueError(f"{JOBS_ENV} must be an integer, got {raw!r}") from exc


def chunk_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for one chunk, fixed by the seed and the chunk key alone."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def sequence_ranks(S: np.ndarray, n: int) -> np.ndarray:
    """Lexicographic rank of each row of S within S_n^k (vectorized)."""
    S = np.asarray(S, dtype=np.int64)
    k = S.shape[1]
    rank = np.zeros(len(S), dtype=np.int64)
    for pos in range(k):
        smaller = S[:, pos] - (S[:, :pos] < S[:, pos : pos + 1]).sum(axis=1)
        rank += smaller * math.perm(n - pos - 1, k - pos - 1)
    return rank


def _chunks(trials: int):
    for c, start in enumerate(range(0, trials, CHUNK)):
        yield c, min(CHUNK, trials - start)


def _run(tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda task: task(), tasks))


def _interval(successes: int, trials: int) -> tuple[float, float]:
    p = successes / trials
    return 2.0 * p - 1.0, Z_SCORE * 2.0 * math.sqrt(p * (1.0 - p) / trials)


def mc_bias(protocol: Protocol, trials: int, seed: int, jobs: int | None = None,
            points=None) -> BiasReport:
    """Monte Carlo bias with a 99% normal confidence interval.

    Trials are split into fixed chunks; chunk c draws from the stream keyed
    by (seed, c), so the estimate does not depend on ``jobs``.  Inputs and
    queries are uniform unless ``points`` lists explicit (x, S) pairs, in
    which case each pair gets ``trials`` runs and the worst one is reported.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"Monte Carlo needs at least {MIN_TRIALS} trials, got {trials}")
    if seed < 0 or seed >= 1 << 64:
        raise ValueError("seed must be a 64-bit non-negative integer")
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if points is not None:
        return _mc_points(protocol, trials, seed, jobs, points)

    n, k = protocol.n, protocol.k
    n_seq = count_sequences(n, k)
    track = n_seq <= PER_S_LIMIT

    def task(c, size):
        def work():
            rng = chunk_rng(seed, c)
            x = np.where(rng.random((size, n)) < 0.5, 1, -1).astype(np.int8)
            S = sample_sequences(n, k, size, rng)
            hit = protocol.simulate(x, S, rng) == protocol.truth(x, S)
            if not track:
                return int(hit.sum()), None, None
            ranks = sequence_ranks(S, n)
            return (int(hit.sum()), np.bincount(ranks, weights=hit, minlength=n_seq),
                    np.bincount(ranks, minlength=n_seq))
        return work

    results = _run([task(c, size) for c, size in _chunks(trials)], jobs)
    successes = sum(r[0] for r in results)
    bias, ci = _interval(successes, trials)
    per_S = None
    if track:
        hits = sum(r[1] for r in results)
        seen = sum(r[2] for r in results)
        # unseen sequences get None so the JSON stays standard
        per_S = [float(2.0 * h / s - 1.0) if s > 0 else None for h, s in zip(hits, seen)]
    return _report(protocol, "mc", bias_avg=bias, ci=ci, trials=trials, seed=seed, per_S=per_S)


def _mc_points(protocol, trials, seed, jobs, points):
    points = [(np.asarray(x, dtype=np.int8), np.asarray(S, dtype=np.int64)) for x, S in points]
    if not points:
        raise ValueError("empty grid of points")

    def task(p, c, size):
        x, S = points[p]

        def work():
            rng = chunk_rng(seed, p, c)
            xs = np.broadcast_to(x, (size, protocol.n))
            Ss = np.broadcast_to(S, (size, protocol.k))
            return p, int((protocol.simulate(xs, Ss, rng) == protocol.truth(xs, Ss)).sum())
        return work

    tasks = [task(p, c, size) for p in range(len(points)) for c, size in _chunks(trials)]
    counts = np.zeros(len(points), dtype=np.int64)
    for p, hits in _run(tasks, jobs):
        counts[p] += hits
    estimates = [_interval(int(h), trials) for h in counts]
    biases = [b for b, _ in estimates]
    return _report(protocol, "mc-grid", bias_avg=float(np.mean(biases)), bias_worst=float(min(biases)),
                   ci=max(ci for _, ci in estimates), trials=trials * len(points), seed=seed,
                   per_S=biases)
