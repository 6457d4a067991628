"""Synthetic event generation from log-intensity sequences.

Each pixel keeps a reference log-intensity anchored at its previously
emitted event (initialized from the first frame).  Between frames the
log-intensity is interpolated linearly in time, and an event fires every
time the signal moves a further threshold step away from the reference; the
event timestamp is the exact crossing time and the reference advances by
one step.  Linear-in-log interpolation keeps crossing counts analytically
checkable: a step from I to c*I produces floor(log(c) / tau) events.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveIntensity
from .events import EventWindow, SensorGeometry


@dataclass(frozen=True)
class SimParams:
    """Trigger threshold in log-intensity units."""

    tau: float

    def __post_init__(self) -> None:
        if not self.tau > 0.0:
            raise ValueError(f"trigger threshold must be positive, got {self.tau}")


@dataclass(frozen=True)
class ImageSequence:
    """Timestamped intensity frames feeding the simulator.

    ``times`` must be strictly increasing; every intensity must be positive
    (the trigger condition lives in log space).
    """

    times: np.ndarray
    frames: np.ndarray  # (T, H, W) positive intensities
    geom: SensorGeometry

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3:
            raise ValueError("frames must be (T, H, W)")
        if len(times) != frames.shape[0]:
            raise ValueError("one timestamp per frame required")
        if len(times) >= 2 and np.any(np.diff(times) <= 0):
            raise ValueError("frame timestamps must be strictly increasing")
        if frames.shape[1:] != (self.geom.height, self.geom.width):
            raise ValueError("frame shape does not match sensor geometry")
        if frames.size and frames.min() <= 0.0:
            raise NonPositiveIntensity("all intensities must be > 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return self.frames.shape[0]


def simulate_events(seq: ImageSequence, params: SimParams) -> EventWindow:
    """Run the per-pixel threshold-crossing model over a frame sequence.

    Returns a window sorted by timestamp with ties broken by (h, w, p).
    A constant sequence produces an empty window.
    """
    if len(seq) < 2:
        raise ValueError("need at least two frames to interpolate")
    tau = params.tau
    height, width = seq.geom.height, seq.geom.width
    n_pix = height * width

    log_frames = np.log(seq.frames.reshape(len(seq), n_pix))
    ref = log_frames[0].copy()

    out_h: list[np.ndarray] = []
    out_w: list[np.ndarray] = []
    out_t: list[np.ndarray] = []
    out_p: list[np.ndarray] = []

    pix = np.arange(n_pix)
    for k in range(len(seq) - 1):
        l0, l1 = log_frames[k], log_frames[k + 1]
        t0, t1 = seq.times[k], seq.times[k + 1]
        delta = l1 - ref
        # crossings this segment: k-th target is ref + k*sign*tau, k = 1..n
        n_cross = np.floor(np.abs(delta) / tau).astype(np.int64)
        n_cross[np.abs(delta) < tau] = 0
        active = n_cross > 0
        if not np.any(active):
            continue
        counts = n_cross[active]
        total = int(counts.sum())
        flat_pix = np.repeat(pix[active], counts)
        # per-event crossing ordinal 1..n within each pixel
        ordinal = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts) + 1
        sign = np.sign(delta)[active]
        flat_sign = np.repeat(sign, counts)
        targets = ref[flat_pix] + flat_sign * ordinal * tau
        slope = l1[flat_pix] - l0[flat_pix]
        frac = (targets - l0[flat_pix]) / slope
        out_t.append(t0 + frac * (t1 - t0))
        out_h.append(flat_pix // width)
        out_w.append(flat_pix % width)
        out_p.append(flat_sign.astype(np.int8))
        ref[active] = ref[active] + sign * counts * tau

    if not out_t:
        empty = np.empty(0)
        return EventWindow(empty, empty, empty, empty, seq.geom)

    h = np.concatenate(out_h)
    w = np.concatenate(out_w)
    t = np.concatenate(out_t)
    p = np.concatenate(out_p)
    order = np.lexsort((p, w, h, t))
    return EventWindow(h[order], w[order], t[order], p[order], seq.geom)
