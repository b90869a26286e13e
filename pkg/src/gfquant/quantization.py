"""Subtractively-dithered uniform quantization of exchanged messages.

A transmitter adds a pseudo-random dither d ~ U[-Delta/2, Delta/2], rounds the
sum to the nearest multiple of the stepsize Delta, and the receiver subtracts
the same dither (both sides run generators agreed on beforehand, modeled here
by seeding from (seed, link, iteration)). The resulting noise is zero mean
with variance Delta^2/12 and independent of the input, which is what every
closed-form MSE expression downstream assumes.

Stepsize schedules are fixed, geometric (Delta_t = rate^t * Delta_0), or an
explicit list, with optional per-iteration bit caps; bit accounting follows
Delta_t = r_t / 2^(b_t) for quantization range r_t.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class StepsizeSchedule:
    """Quantization stepsize Delta as a function of iteration index.

    kind is "fixed", "geometric", or "explicit"; max_bits (chi), when set,
    caps the per-iteration bit count: a stepsize finer than range/2^chi is
    raised to range/2^chi.
    """

    kind: str
    delta0: float = 1.0
    rate: float = 1.0
    steps: tuple = ()
    max_bits: int | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "geometric", "explicit"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "explicit":
            if not self.steps or any(d <= 0 for d in self.steps):
                raise ValueError("explicit schedule needs strictly positive steps")
        else:
            if self.delta0 <= 0:
                raise ValueError("delta0 must be positive")
            if self.rate <= 0:
                raise ValueError("rate must be positive")
        if self.max_bits is not None and self.max_bits < 1:
            raise ValueError("max_bits must be a positive integer")

    @classmethod
    def fixed(cls, delta: float, max_bits: int | None = None) -> "StepsizeSchedule":
        return cls("fixed", delta0=delta, max_bits=max_bits)

    @classmethod
    def geometric(
        cls, delta0: float, rate: float, max_bits: int | None = None
    ) -> "StepsizeSchedule":
        return cls("geometric", delta0=delta0, rate=rate, max_bits=max_bits)

    @classmethod
    def explicit(cls, steps, max_bits: int | None = None) -> "StepsizeSchedule":
        return cls("explicit", steps=tuple(float(d) for d in steps), max_bits=max_bits)


def stepsize_at(s: StepsizeSchedule, t: int) -> float:
    """Scheduled stepsize Delta_t before any bit-cap adjustment."""
    if t < 0:
        raise ValueError("iteration index must be >= 0")
    if s.kind == "fixed":
        return s.delta0
    if s.kind == "geometric":
        return s.rate**t * s.delta0
    if t >= len(s.steps):
        raise ValueError(f"explicit schedule has {len(s.steps)} steps; asked for t={t}")
    return s.steps[t]


def effective_stepsize(s: StepsizeSchedule, t: int, r_t: float):
    """(Delta_t, bits_t, capped) after applying the bit cap for range r_t.

    bits_t = ceil(log2(r_t / Delta_t)) clamped at >= 0; when max_bits chi is
    set and the scheduled stepsize would need more than chi bits, the
    stepsize is raised to r_t / 2^chi.
    """
    if r_t <= 0:
        raise ValueError("quantization range must be positive")
    delta = stepsize_at(s, t)
    capped = False
    if s.max_bits is not None:
        floor_delta = r_t / 2.0**s.max_bits
        if delta < floor_delta:
            delta = floor_delta
            capped = True
    bits = max(0, math.ceil(round(math.log2(r_t / delta), 9)))
    return delta, bits, capped


def bits_at(s: StepsizeSchedule, t: int, r_t: float) -> int:
    """Bits spent at iteration t for quantization range r_t."""
    return effective_stepsize(s, t, r_t)[1]


def budgeted_initial_stepsize(B: float, t_max: int, x_norm: float, rate: float) -> float:
    """Initial stepsize spending exactly B bits over t_max+1 geometric iterations.

    Solves sum_t log2(2*||x||_2 / (rate^t * Delta_0)) = B for Delta_0 under
    the range bound r_t <= 2*||x||_2, giving
    Delta_0 = 2^(1 - B/(1+t_max)) * ||x||_2 * rate^(-t_max/2).
    """
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must lie in (0, 1)")
    if B <= 0:
        raise ValueError("bit budget must be positive")
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    if x_norm <= 0:
        raise ValueError("x_norm must be positive")
    return 2.0 ** (1.0 - B / (1 + t_max)) * x_norm * rate ** (-t_max / 2.0)


class QuantizationLedger:
    """Mutable per-run record of stepsizes, bits, and saturation events."""

    def __init__(self):
        self.rows = []

    def record(self, t: int, link_id: int, delta: float, bits: int, n_values: int, saturations: int):
        self.rows.append((t, link_id, delta, bits, n_values, saturations))

    @property
    def bits_per_iteration(self) -> list:
        """One bit count per iteration (links within an iteration share it)."""
        seen = {}
        for t, _, _, bits, _, _ in self.rows:
            seen.setdefault(t, bits)
        return [seen[t] for t in sorted(seen)]

    @property
    def total_bits(self) -> int:
        """Total bits transmitted: sum of bits x scalar values per record."""
        return sum(bits * n for _, _, _, bits, n, _ in self.rows)

    @property
    def saturation_events(self) -> int:
        return sum(sat for _, _, _, _, _, sat in self.rows)

    def to_csv(self, path) -> None:
        """Write per-iteration rows (iteration, delta, bits, saturations)."""
        agg = {}
        for t, _, delta, bits, _, sat in self.rows:
            if t in agg:
                agg[t] = (agg[t][0], agg[t][1], agg[t][2] + sat)
            else:
                agg[t] = (delta, bits, sat)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "delta", "bits", "saturations"])
            for t in sorted(agg):
                delta, bits, sat = agg[t]
                writer.writerow([t, repr(delta), bits, sat])


@dataclass(frozen=True)
class DitheredQuantizer:
    """Immutable quantizer configuration shared by all links of a run.

    range_policy: None resolves to a fixed range 2*||x||_2 of the run input
    at run start; a float is a fixed range; a sequence gives r_t per
    iteration. dither=False disables dithering (degenerate, for exactness
    checks only). Dither streams are reproducible from (seed, link_id, t).
    """

    schedule: StepsizeSchedule
    range_policy: object = None
    seed: int = 0
    dither: bool = True

    def range_at(self, t: int) -> float:
        if self.range_policy is None:
            raise ValueError("range policy unresolved; call with_range_from(x) first")
        if np.isscalar(self.range_policy):
            return float(self.range_policy)
        seq = self.range_policy
        if t >= len(seq):
            raise ValueError(f"range list has {len(seq)} entries; asked for t={t}")
        return float(seq[t])

    def with_range_from(self, x) -> "DitheredQuantizer":
        """Resolve a default range policy to fixed 2*||x||_2 of the run input."""
        if self.range_policy is not None:
            return self
        r = 2.0 * float(np.linalg.norm(np.asarray(x, dtype=float)))
        if r == 0.0:
            r = 1.0
        return replace(self, range_policy=r)

    def dither_values(self, t: int, link_id: int, size: int, delta: float) -> np.ndarray:
        """The shared transmitter/receiver dither draw for (link_id, t)."""
        rng = np.random.default_rng([self.seed, link_id, t])
        return rng.uniform(-delta / 2.0, delta / 2.0, size=size)


def quantize(x, t: int, q: DitheredQuantizer, link_id: int = 0, ledger: QuantizationLedger | None = None):
    """Quantize a transmitted signal at iteration t over the given link.

    Returns (x_recv, noise) where x_recv = round_Delta(x + d) - d for dither
    d ~ U[-Delta_t/2, Delta_t/2] drawn from the stream keyed by
    (seed, link_id, t), and noise = x_recv - x with |noise_i| <= Delta_t/2
    when unsaturated. Values with |x_i + d_i| beyond half the quantization
    range clamp to the range edge and count as saturations (recorded in the
    ledger, or warned about when no ledger is given).
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    flat = np.atleast_1d(x).astype(float)
    r_t = q.range_at(t)
    delta, bits, _ = effective_stepsize(q.schedule, t, r_t)
    if q.dither:
        d = q.dither_values(t, link_id, flat.size, delta)
    else:
        d = np.zeros(flat.size)
    v = flat + d
    transmitted = np.sign(v) * np.floor(np.abs(v) / delta + 0.5) * delta
    half = r_t / 2.0
    saturated = np.abs(v) > half
    n_sat = int(np.count_nonzero(saturated))
    if n_sat:
        transmitted = np.clip(transmitted, -half, half)
        if ledger is None:
            warnings.warn(f"{n_sat} saturated values at iteration {t}", stacklevel=2)
    if ledger is not None:
        ledger.record(t, link_id, delta, bits, flat.size, n_sat)
    x_recv = transmitted - d
    noise = x_recv - flat
    if scalar:
        return float(x_recv[0]), float(noise[0])
    return x_recv, noise
