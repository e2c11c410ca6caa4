"""Synchronization measurement over event logs and phase vectors."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class SyncPair:
    ref_onset_ms: float
    agent_onset_ms: float
    error_ms: float  # ref - agent: negative when the agent fires after the reference


@dataclass(frozen=True)
class SyncSeries:
    pairs: tuple[SyncPair, ...]

    @property
    def errors(self) -> list[float]:
        return [p.error_ms for p in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)


def sync_error_series(
    ref_times: Sequence[float],
    agent_times: Sequence[float],
    warmup_cycles: int = 0,
) -> SyncSeries:
    """Pair each agent onset (after warmup) with its nearest reference onset.

    The first ``warmup_cycles`` *agent* onsets are dropped, so agents that
    take long to entrain are measured only once settled.  Equidistant ties
    resolve to the earlier reference onset.
    """
    if not ref_times or not agent_times:
        raise ValueError("both event lists must be non-empty")
    agent_times = list(agent_times)[warmup_cycles:]
    if not agent_times:
        raise ValueError("no agent onsets left after warmup")
    pairs = []
    j = 0
    for t in agent_times:
        while j + 1 < len(ref_times) and ref_times[j + 1] < t:
            j += 1
        best = ref_times[j]
        if j + 1 < len(ref_times):
            # Strict inequality: ties keep the earlier reference onset.
            if abs(ref_times[j + 1] - t) < abs(best - t):
                best = ref_times[j + 1]
        pairs.append(SyncPair(best, t, best - t))
    return SyncSeries(tuple(pairs))


def summarize(series: SyncSeries | Sequence[float]) -> tuple[float, float, int]:
    """Arithmetic mean and sample standard deviation (n-1 denominator)."""
    errors = series.errors if isinstance(series, SyncSeries) else list(series)
    n = len(errors)
    if n < 2:
        raise ValueError(f"need at least 2 errors, got {n}")
    mean = sum(errors) / n
    var = sum((e - mean) ** 2 for e in errors) / (n - 1)
    return mean, math.sqrt(var), n


def order_parameter(phases: Sequence[float]) -> float:
    """Magnitude of the mean unit phase vector.

    Phases are beat fractions in [0, 1).  1 means perfect alignment; a
    balanced spread cancels to ~0.  Evaluated through pairwise phase
    differences, R^2 = 1 - (2/n^2) * sum(1 - cos(dphi)), so identical
    phases give exactly 1.0 and the result depends on the phases only
    through their differences (rotation invariance is structural).
    O(n^2) in the population size, which stays small here.
    """
    n = len(phases)
    if n == 0:
        raise ValueError("need at least one phase")
    spread = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            spread += 1.0 - math.cos(2.0 * math.pi * (phases[j] - phases[k]))
    r_sq = 1.0 - 2.0 * spread / (n * n)
    return math.sqrt(max(r_sq, 0.0))


def simultaneity(events, window_ms: float) -> float:
    """Fraction of the window during which two or more vocalizations overlap."""
    if window_ms <= 0.0:
        raise ValueError("window_ms must be positive")
    bounds = []
    for e in events:
        start = e.time_ms
        end = min(e.time_ms + e.duration_ms, window_ms)
        if end > start:
            bounds.append((start, +1))
            bounds.append((end, -1))
    if not bounds:
        return 0.0
    bounds.sort()
    active = 0
    overlap = 0.0
    prev_t = bounds[0][0]
    for t, delta in bounds:
        if active >= 2:
            overlap += t - prev_t
        prev_t = t
        active += delta
    return overlap / window_ms


SUMMARY_CSV_HEADER = "position,mode,mean_error_ms,std_error_ms,n_onsets,trials"


def summary_rows_to_csv(rows: list[dict]) -> str:
    """Rows with keys position, mode, mean_error_ms, std_error_ms, n_onsets, trials."""
    buf = io.StringIO()
    buf.write(SUMMARY_CSV_HEADER + "\n")
    for r in rows:
        buf.write(
            f"{r['position']},{r['mode']},{r['mean_error_ms']:.6f},"
            f"{r['std_error_ms']:.6f},{r['n_onsets']},{r['trials']}\n"
        )
    return buf.getvalue()
