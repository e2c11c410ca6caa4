"""Per-agent control laws.

Two proportional loops act once per beat:

* the *other* loop turns the mean asynchrony of heard onsets into a
  one-shot time shift of the next beat (negative shift = fire earlier
  when the agent lags what it hears);
* the *self* loop relaxes the current period toward the agent's
  preferred period.

With a single heard source, zero noise and equal periods the beat error
obeys ``a_next = (1 - gain_other) * a``, so gains below 2 converge
(monotonically below 1, with overshoot between 1 and 2) and gains above
2 diverge.  The action-reaction baseline bypasses all of this and simply
fires a fixed latency after each heard onset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from vocalsync.model import AgentParams, AgentState


@dataclass(frozen=True)
class ControlUpdate:
    phase_shift_ms: float   # applied to the next onset time; |shift| <= period/2
    new_period_ms: float


def nearest_beat_offset(next_beat_ms: float, period_ms: float, heard_time_ms: float) -> float:
    """Signed offset from the heard onset to the nearest own beat.

    The beat grid is ``next_beat_ms - k * period_ms`` for integer k >= 0.
    Result lies in (-period/2, period/2]; positive means the nearest own
    beat is after the heard onset (the agent lags it).
    """
    if period_ms <= 0.0:
        raise ValueError("period must be positive")
    a = next_beat_ms - heard_time_ms
    half = period_ms / 2.0
    a = math.remainder(a, period_ms)
    # math.remainder ties round to even; fold the open edge -period/2 -> +period/2.
    if a <= -half:
        a += period_ms
    return a


def perceived_asynchrony(
    state: AgentState, heard_time_ms: float, now_ms: float
) -> float | None:
    """Asynchrony of a heard onset against the agent's own beat grid.

    Returns None when the agent has no beat grid yet (action-reaction
    agents never build one).  ``now_ms`` is unused beyond sanity: the
    grid is carried in the state as the current cycle.
    """
    if state.cycle_start_ms is None or state.cycle_end_ms is None:
        return None
    span = state.cycle_end_ms - state.cycle_start_ms
    return nearest_beat_offset(state.cycle_end_ms, span, heard_time_ms)


def clamp_shift(shift_ms: float, period_ms: float) -> float:
    """Keep one-shot corrections under half a period so beat order is preserved."""
    half = period_ms / 2.0
    return min(max(shift_ms, -half), half)


def phase_shift_for(sum_ms: float, count: int, gain_other: float, period_ms: float) -> float:
    """Other-loop law: shift = -gain * mean asynchrony, clamped to +-period/2."""
    if count <= 0:
        return 0.0
    return clamp_shift(-gain_other * (sum_ms / count), period_ms)


def period_update(current_period_ms: float, preferred_period_ms: float, gain_self: float) -> float:
    """Self-loop law: move the period a fraction gain_self toward preferred."""
    return current_period_ms + gain_self * (preferred_period_ms - current_period_ms)


def feedback_update(state: AgentState, params: AgentParams) -> ControlUpdate:
    """Both loops, evaluated at a beat boundary.

    Pure: reads the accumulated asynchronies and the current period from
    the state and returns the resulting correction; the caller owns the
    accumulator reset.
    """
    new_period = period_update(
        state.current_period_ms, params.preferred_period_ms, params.gain_self
    )
    shift = phase_shift_for(
        state.asynchrony_sum_ms, state.asynchrony_count, params.gain_other, new_period
    )
    return ControlUpdate(phase_shift_ms=shift, new_period_ms=new_period)


def action_reaction_update(heard_time_ms: float, params: AgentParams) -> float:
    """Baseline: schedule one onset a fixed latency after the heard one."""
    return heard_time_ms + params.reaction_latency_ms
