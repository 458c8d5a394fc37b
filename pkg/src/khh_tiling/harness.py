"""Monte Carlo sweeps locating the tiling phase transition.

A sweep runs seeded trials on a grid of (n, c) cells with edge probability
p = c * n**(-exponent), estimates the success probability per cell, finds the
c where it crosses 1/2 for each n, and fits a log-log line through the
crossover points.  The fitted slope is what the experiment reports; the model
specific prediction is exposed separately for comparison, never asserted.

Determinism: the seed of row i is trial_seed(base_seed, i) and trial t inside
a row uses trial_seed(row_seed, t), so results are byte-identical regardless
of worker count or scheduling.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .generate import GenSpec, generate, trial_seed
from .tiling import Budget, has_perfect_tiling, max_partial_tiling

__all__ = [
    "TrialConfig",
    "SweepRow",
    "SweepResult",
    "estimate_success_prob",
    "sweep",
    "wilson_interval",
    "isotonic_smooth",
    "fit_crossover",
    "crossovers",
    "fit_exponent",
    "predicted_slope",
    "default_exponent",
    "write_sweep_csv",
    "read_sweep_csv",
    "CSV_HEADER",
]

# models an experiment can sweep: each has a random part driven by p
SWEEP_MODELS = ("random", "perturbed_lower", "perturbed_half")

CSV_HEADER = (
    "model,h,alpha,n,c,p,trials,successes,failures,undecided,"
    "mean_coverage,wilson_lo,wilson_hi,seed"
)

# rows where the solver gave up too often say nothing reliable about the
# success probability; they are excluded from crossover fits
MAX_UNDECIDED_FRACTION = 0.05

_Z95 = 1.959963984540054


def default_exponent(model: str, h: int) -> float:
    """Grid exponent e in p = c * n**(-e) matching the model's transition scale."""
    if model == "perturbed_half":
        return (h + 1) / h
    return (2 * h - 1) / h**2


def predicted_slope(model: str, h: int) -> float:
    return -default_exponent(model, h)


@dataclass(frozen=True)
class TrialConfig:
    """Full description of one sweep experiment."""

    model: str
    h: int
    n_list: tuple[int, ...]
    c_grid: tuple[float, ...]
    trials: int
    base_seed: int = 0
    alpha: float = 0.0
    exponent: float | None = None  # None: default_exponent(model, h)
    mode: str = "perfect"  # perfect | partial
    epsilon: float = 0.1  # partial mode: success iff >= (1-epsilon) of 2n covered
    budget: Budget | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_list", tuple(self.n_list))
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))
        if self.model not in SWEEP_MODELS:
            raise ValueError(
                f"model {self.model!r} has no random part to sweep; "
                f"expected one of {SWEEP_MODELS}"
            )
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n_list:
            raise ValueError("n_list must be nonempty")
        if not self.c_grid:
            raise ValueError("c_grid must be nonempty")
        if any(c <= 0 for c in self.c_grid):
            raise ValueError("all c values must be positive")
        if list(self.c_grid) != sorted(set(self.c_grid)):
            raise ValueError("c_grid must be strictly increasing")
        if self.mode not in ("perfect", "partial"):
            raise ValueError(f"mode must be 'perfect' or 'partial', got {self.mode!r}")
        if self.mode == "partial" and not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        for n in self.n_list:
            if n < 1:
                raise ValueError("all n must be >= 1")
            if self.mode == "perfect" and n % self.h:
                raise ValueError(f"n = {n} is not divisible by h = {self.h}")
        if self.model == "perturbed_lower" and not 0.0 < self.alpha < 1.0 / (2 * self.h):
            raise ValueError(
                f"alpha must be in (0, 1/(2h)) for perturbed_lower, got {self.alpha}"
            )
        e = self.resolved_exponent
        for n, c in product(self.n_list, self.c_grid):
            if c * n ** (-e) > 1.0:
                raise ValueError(
                    f"edge probability c*n**(-e) = {c * n ** (-e)} exceeds 1 "
                    f"at n={n}, c={c}; shrink the grid"
                )

    @property
    def resolved_exponent(self) -> float:
        if self.exponent is not None:
            return self.exponent
        return default_exponent(self.model, self.h)

    def edge_probability(self, n: int, c: float) -> float:
        return c * n ** (-self.resolved_exponent)


@dataclass(frozen=True)
class SweepRow:
    """Aggregated outcome of all trials in one (n, c) cell."""

    model: str
    h: int
    alpha: float
    n: int
    c: float
    p: float
    trials: int
    successes: int
    failures: int
    undecided: int
    mean_coverage: float
    wilson_lo: float
    wilson_hi: float
    seed: int

    @property
    def decided(self) -> int:
        return self.successes + self.failures

    @property
    def success_rate(self) -> float:
        return self.successes / self.decided if self.decided else math.nan


@dataclass(frozen=True)
class SweepResult:
    config: TrialConfig
    rows: tuple[SweepRow, ...]
    crossovers: tuple[tuple[int, float], ...]  # (n, p at crossover)
    skipped: tuple[tuple[int, str], ...]  # n values with no crossover, with reason
    fit: dict | None  # slope/intercept/residual when >= 3 crossovers


def wilson_interval(successes: int, total: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; (0, 1) when total = 0."""
    if total == 0:
        return 0.0, 1.0
    phat = successes / total
    denom = 1.0 + z * z / total
    center = phat + z * z / (2 * total)
    spread = z * math.sqrt(phat * (1.0 - phat) / total + z * z / (4 * total * total))
    return (center - spread) / denom, (center + spread) / denom


def estimate_success_prob(
    config: TrialConfig, n: int, c: float, seed: int | None = None
) -> SweepRow:
    """Run config.trials seeded trials in the (n, c) cell and aggregate.

    Perfect mode counts solver verdicts (None verdicts land in undecided);
    partial mode packs greedily and succeeds when at least (1-epsilon) of the
    2n vertices are covered.  mean_coverage is the decided success rate in
    perfect mode and the mean covered fraction in partial mode.
    """
    if seed is None:
        seed = config.base_seed
    p = config.edge_probability(n, c)
    if p > 1.0:
        raise ValueError(f"edge probability {p} exceeds 1 at n={n}, c={c}")
    successes = failures = undecided = 0
    coverage_sum = 0.0
    for t in range(config.trials):
        s = trial_seed(seed, t)
        inst = generate_for_trial(config, n, p, s)
        if config.mode == "perfect":
            out = has_perfect_tiling(inst, config.h, budget=config.budget)
            if out.exists is True:
                successes += 1
            elif out.exists is False:
                failures += 1
            else:
                undecided += 1
        else:
            tiling = max_partial_tiling(inst, config.h)
            frac = tiling.coverage() / (2 * n)
            coverage_sum += frac
            if frac >= 1.0 - config.epsilon:
                successes += 1
            else:
                failures += 1
    decided = successes + failures
    if config.mode == "perfect":
        mean_cov = successes / decided if decided else math.nan
    else:
        mean_cov = coverage_sum / config.trials
    lo, hi = wilson_interval(successes, decided)
    return SweepRow(
        model=config.model,
        h=config.h,
        alpha=config.alpha,
        n=n,
        c=c,
        p=p,
        trials=config.trials,
        successes=successes,
        failures=failures,
        undecided=undecided,
        mean_coverage=mean_cov,
        wilson_lo=lo,
        wilson_hi=hi,
        seed=seed,
    )


def generate_for_trial(config: TrialConfig, n: int, p: float, seed: int):
    spec = GenSpec(
        model=config.model, n=n, h=config.h, alpha=config.alpha, p=p, seed=seed
    )
    return generate(spec).graph


def _row_task(packed):
    config, n, c, seed = packed
    return estimate_success_prob(config, n, c, seed=seed)


def sweep(config: TrialConfig, workers: int = 1) -> SweepResult:
    """Run every (n, c) cell, then crossovers per n and the final slope fit."""
    tasks = []
    for i, (n, c) in enumerate(product(config.n_list, config.c_grid)):
        tasks.append((config, n, c, trial_seed(config.base_seed, i)))
    if workers <= 1:
        rows = [_row_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_row_task, tasks))
    found, skipped = crossovers(rows)
    fit = fit_exponent(found) if len(found) >= 3 else None
    return SweepResult(config, tuple(rows), tuple(found), tuple(skipped), fit)


def isotonic_smooth(values, weights) -> list[float]:
    """Weighted pool-adjacent-violators fit, nondecreasing."""
    blocks: list[tuple[float, float, int]] = []  # (mean, weight, run length)
    for v, w in zip(values, weights):
        cur = (float(v), float(w), 1)
        while blocks and blocks[-1][0] > cur[0]:
            v0, w0, k0 = blocks.pop()
            v1, w1, k1 = cur
            wt = w0 + w1
            mean = (v0 * w0 + v1 * w1) / wt if wt > 0 else min(v0, v1)
            cur = (mean, wt, k0 + k1)
        blocks.append(cur)
    smoothed: list[float] = []
    for v, _, k in blocks:
        smoothed.extend([v] * k)
    return smoothed


def fit_crossover(rows) -> tuple[float | None, str]:
    """p at which the isotonic-smoothed success rate crosses 1/2 for one n.

    Returns (p_half, "ok") or (None, reason).  Rows with too many undecided
    trials or no decided trials are dropped first.
    """
    if not rows:
        return None, "no rows"
    n_values = {r.n for r in rows}
    if len(n_values) != 1:
        raise ValueError(f"rows span several n values: {sorted(n_values)}")
    usable = [
        r
        for r in rows
        if r.decided > 0 and r.undecided <= MAX_UNDECIDED_FRACTION * r.trials
    ]
    if len(usable) < 2:
        return None, "fewer than 2 usable rows"
    usable.sort(key=lambda r: r.c)
    rates = [r.success_rate for r in usable]
    weights = [r.decided for r in usable]
    smooth = isotonic_smooth(rates, weights)
    hits = [i for i, s in enumerate(smooth) if s == 0.5]
    if hits:
        return math.sqrt(usable[hits[0]].p * usable[hits[-1]].p), "ok"
    for i in range(len(smooth) - 1):
        if smooth[i] < 0.5 < smooth[i + 1]:
            return math.sqrt(usable[i].p * usable[i + 1].p), "ok"
    if all(s < 0.5 for s in smooth):
        return None, "success rate never reaches 1/2 on this grid"
    return None, "success rate already above 1/2 at the smallest c"


def crossovers(rows) -> tuple[list[tuple[int, float]], list[tuple[int, str]]]:
    """Group rows by n and fit each crossover; returns (found, skipped)."""
    by_n: dict[int, list] = {}
    for r in rows:
        by_n.setdefault(r.n, []).append(r)
    found: list[tuple[int, float]] = []
    skipped: list[tuple[int, str]] = []
    for n in sorted(by_n):
        p_half, reason = fit_crossover(by_n[n])
        if p_half is None:
            skipped.append((n, reason))
        else:
            found.append((n, p_half))
    return found, skipped


def fit_exponent(pairs) -> dict:
    """Least-squares line through (ln n, ln p_half); residual is RMS."""
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 (n, p_half) pairs, got {len(pairs)}")
    ns = [n for n, _ in pairs]
    if len(set(ns)) != len(ns):
        raise ValueError("repeated n values in crossover pairs")
    x = np.log([float(n) for n, _ in pairs])
    y = np.log([float(p) for _, p in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "residual": float(math.sqrt(float(np.mean(resid**2)))),
    }


_CSV_INT = {"h", "n", "trials", "successes", "failures", "undecided", "seed"}
_CSV_FLOAT = {"alpha", "c", "p", "mean_coverage", "wilson_lo", "wilson_hi"}


def write_sweep_csv(rows, path) -> None:
    """One line per row, floats via repr so rereads round-trip exactly."""
    names = CSV_HEADER.split(",")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(CSV_HEADER + "\n")
        for r in rows:
            vals = []
            for name in names:
                v = getattr(r, name)
                vals.append(repr(v) if name in _CSV_FLOAT else str(v))
            f.write(",".join(vals) + "\n")


def read_sweep_csv(path) -> list[SweepRow]:
    rows: list[SweepRow] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        expected = CSV_HEADER.split(",")
        if reader.fieldnames != expected:
            raise ValueError(
                f"unexpected CSV header {reader.fieldnames}, expected {expected}"
            )
        for rec in reader:
            kwargs = {}
            for name in expected:
                raw = rec[name]
                if name in _CSV_INT:
                    kwargs[name] = int(raw)
                elif name in _CSV_FLOAT:
                    kwargs[name] = float(raw)
                else:
                    kwargs[name] = raw
            rows.append(SweepRow(**kwargs))
    return rows
