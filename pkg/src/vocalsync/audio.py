"""Offline rendering of an event log to audio.

Each onset becomes a short tone burst at the emitting agent's pitch:
a sine for "human", an upward chirp (pitch -> 1.5x pitch) for "bird",
and 50 Hz amplitude-modulated band-limited noise for "insect".  Bursts
get a 5 ms linear attack inside the vocalization and a 5 ms release tail
after it, overlapping bursts sum, and the mix is normalized to peak 0.9
only if it would clip.  Rendering is deterministic in (events, agents):
the noise burst for onset i of agent a is seeded from (a, i) alone.
"""

from __future__ import annotations

import wave

import numpy as np

from vocalsync.model import AgentParams

ATTACK_MS = 5.0
RELEASE_MS = 5.0
_NOISE_STREAM_TAG = 0x5EED


def _envelope(n_body: int, n_release: int, sample_rate_hz: float) -> np.ndarray:
    n_attack = min(int(round(ATTACK_MS * 1e-3 * sample_rate_hz)), n_body)
    env = np.ones(n_body + n_release)
    if n_attack > 0:
        env[:n_attack] = np.linspace(0.0, 1.0, n_attack, endpoint=False)
    if n_release > 0:
        env[n_body:] = np.linspace(1.0, 0.0, n_release, endpoint=False)
    return env


def _burst(
    kind: str, pitch_hz: float, n_body: int, n_release: int,
    sample_rate_hz: float, noise_seed: tuple[int, ...],
) -> np.ndarray:
    n = n_body + n_release
    t = np.arange(n) / sample_rate_hz
    if kind == "human":
        wavef = np.sin(2.0 * np.pi * pitch_hz * t)
    elif kind == "bird":
        # Linear sweep from pitch to 1.5x pitch across the burst.
        dur = max(n / sample_rate_hz, 1e-9)
        inst = pitch_hz * (t + 0.25 * t * t / dur)
        wavef = np.sin(2.0 * np.pi * inst)
    elif kind == "insect":
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=_NOISE_STREAM_TAG, spawn_key=noise_seed)))
        noise = rng.standard_normal(n)
        spec = np.fft.rfft(noise)
        freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
        band = (freqs >= 0.75 * pitch_hz) & (freqs <= 1.25 * pitch_hz)
        spec[~band] = 0.0
        wavef = np.fft.irfft(spec, n)
        peak = np.max(np.abs(wavef))
        if peak > 0.0:
            wavef = wavef / peak
        wavef *= 0.5 * (1.0 - np.cos(2.0 * np.pi * 50.0 * t))
    else:
        raise ValueError(f"unknown voice kind {kind!r}")
    return wavef * _envelope(n_body, n_release, sample_rate_hz)


def render(
    events,
    agents: list[AgentParams],
    sample_rate_hz: int = 44100,
    total_ms: float | None = None,
) -> np.ndarray:
    """Mix all onsets into one mono float buffer.

    The buffer covers the last onset plus its duration and release (or
    ``total_ms`` if that is longer); an empty log yields silence of the
    requested length.
    """
    by_id = {a.id: a for a in agents}
    events = sorted(events, key=lambda e: (e.time_ms, e.agent_id))
    end_ms = total_ms or 0.0
    for e in events:
        if e.agent_id not in by_id:
            raise ValueError(f"unknown agent id {e.agent_id}")
        end_ms = max(end_ms, e.time_ms + e.duration_ms + RELEASE_MS)
    n_total = int(np.ceil(end_ms * 1e-3 * sample_rate_hz))
    mix = np.zeros(n_total)
    onset_index: dict[int, int] = {}
    for e in events:
        idx = onset_index.get(e.agent_id, 0)
        onset_index[e.agent_id] = idx + 1
        if e.amplitude <= 0.0 or e.duration_ms <= 0.0:
            continue
        a = by_id[e.agent_id]
        start = int(round(e.time_ms * 1e-3 * sample_rate_hz))
        n_body = int(round(e.duration_ms * 1e-3 * sample_rate_hz))
        n_release = int(round(RELEASE_MS * 1e-3 * sample_rate_hz))
        if n_body <= 0:
            continue
        burst = e.amplitude * _burst(
            a.voice_kind, a.pitch_hz, n_body, n_release,
            float(sample_rate_hz), (e.agent_id, idx),
        )
        stop = min(start + len(burst), n_total)
        if start < n_total:
            mix[start:stop] += burst[: stop - start]
    peak = np.max(np.abs(mix)) if n_total else 0.0
    if peak > 1.0:
        mix *= 0.9 / peak
    return mix


def write_wav(buffer: np.ndarray, path: str, sample_rate_hz: int = 44100) -> None:
    """16-bit signed PCM, mono, little-endian RIFF/WAVE."""
    if not np.all(np.isfinite(buffer)):
        raise ValueError("buffer contains non-finite samples")
    clipped = np.clip(buffer, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    with wave.open(path, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate_hz)
        wav.writeframes(pcm.tobytes())


def read_wav(path: str) -> tuple[np.ndarray, int]:
    """Read back a mono 16-bit file as int16 samples (for round-trip checks)."""
    with wave.open(path, "rb") as wav:
        if wav.getnchannels() != 1 or wav.getsampwidth() != 2:
            raise ValueError("expected mono 16-bit PCM")
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    return np.frombuffer(raw, dtype="<i2").copy(), rate
