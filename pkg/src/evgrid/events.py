"""Event records, stream windowing, subsampling and normalization.

Events are kept in struct-of-arrays form (``h``, ``w``, ``t``, ``p``) because
windows routinely hold tens of thousands of records.  Timestamps are float64
throughout; microsecond stamps over long recordings do not survive float32.

All containers are frozen and their arrays are marked read-only, so values
can be shared freely across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import EmptyWindow, InsufficientEvents, InvalidInterval


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


class RawEvent(NamedTuple):
    """A single sensor event: pixel row, pixel column, time in seconds, polarity."""

    h: int
    w: int
    t: float
    p: int


@dataclass(frozen=True)
class SensorGeometry:
    """Sensor size in pixels, rows x columns."""

    height: int
    width: int

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise ValueError(f"sensor dims must be >= 1, got {self.height}x{self.width}")


@dataclass(frozen=True)
class EventWindow:
    """An ordered batch of events from one sensor.

    Invariants checked at construction: timestamps non-decreasing, pixel
    coordinates inside the sensor, polarity in {-1, +1}, t >= 0.  Empty
    windows are legal (fixed-interval windowing can produce them).
    """

    h: np.ndarray
    w: np.ndarray
    t: np.ndarray
    p: np.ndarray
    geom: SensorGeometry

    def __post_init__(self) -> None:
        h = _readonly(np.asarray(self.h, dtype=np.int64))
        w = _readonly(np.asarray(self.w, dtype=np.int64))
        t = _readonly(np.asarray(self.t, dtype=np.float64))
        p = _readonly(np.asarray(self.p, dtype=np.int8))
        n = len(t)
        if not (len(h) == len(w) == len(p) == n):
            raise ValueError("event component arrays must have equal length")
        if n:
            if np.any(np.diff(t) < 0):
                raise ValueError("timestamps must be non-decreasing")
            if t[0] < 0:
                raise ValueError("timestamps must be non-negative")
            if h.min() < 0 or h.max() >= self.geom.height:
                raise ValueError("row index out of sensor bounds")
            if w.min() < 0 or w.max() >= self.geom.width:
                raise ValueError("column index out of sensor bounds")
            if not np.all(np.abs(p) == 1):
                raise ValueError("polarity must be -1 or +1")
        for name, arr in (("h", h), ("w", w), ("t", t), ("p", p)):
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> RawEvent:
        return RawEvent(int(self.h[i]), int(self.w[i]), float(self.t[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[RawEvent]:
        for i in range(len(self)):
            yield self[i]

    @property
    def t_min(self) -> float:
        if not len(self):
            raise EmptyWindow("empty window has no t_min")
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        if not len(self):
            raise EmptyWindow("empty window has no t_max")
        return float(self.t[-1])

    def take(self, indices: np.ndarray) -> "EventWindow":
        """New window holding rows ``indices`` (must keep t non-decreasing)."""
        idx = np.asarray(indices, dtype=np.int64)
        return EventWindow(self.h[idx], self.w[idx], self.t[idx], self.p[idx], self.geom)


@dataclass(frozen=True)
class STCloud:
    """Normalized spatio-temporal point cloud, the network input.

    ``coords`` columns are (h/H, w/W, (t - t_min) / (t_max - t_min)), all in
    [0, 1].  ``source_index`` maps each point back to its row in the window
    the cloud was built from.
    """

    coords: np.ndarray
    polarity: np.ndarray
    source_geom: SensorGeometry
    source_span: tuple[float, float]
    source_index: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        coords = _readonly(np.asarray(self.coords, dtype=np.float64))
        pol = _readonly(np.asarray(self.polarity, dtype=np.int8))
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ValueError("coords must be (N, 3)")
        n = coords.shape[0]
        if n == 0:
            raise EmptyWindow("a point cloud must hold at least one point")
        if len(pol) != n:
            raise ValueError("polarity length must match coords")
        if coords.min() < 0.0 or coords.max() > 1.0:
            raise ValueError("normalized coordinates must lie in [0, 1]")
        src = self.source_index
        if src is None:
            src = np.arange(n, dtype=np.int64)
        src = _readonly(np.asarray(src, dtype=np.int64))
        if len(src) != n:
            raise ValueError("source_index length must match coords")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "polarity", pol)
        object.__setattr__(self, "source_index", src)

    def __len__(self) -> int:
        return self.coords.shape[0]

    def take(self, indices: np.ndarray) -> "STCloud":
        idx = np.asarray(indices, dtype=np.int64)
        return STCloud(
            self.coords[idx],
            self.polarity[idx],
            self.source_geom,
            self.source_span,
            self.source_index[idx],
        )


class EventStream:
    """Cursor over an event sequence supporting both windowing policies.

    ``next_fen`` consumes a fixed number of events; ``next_fit`` consumes a
    fixed time interval.  The two cursors are independent views of the same
    underlying arrays, so a stream should be driven by one policy at a time.
    """

    def __init__(self, window: EventWindow, start_time: float = 0.0):
        self._w = window
        self._pos = 0
        self._time = float(start_time)

    @classmethod
    def from_arrays(cls, h, w, t, p, geom: SensorGeometry, start_time: float = 0.0):
        return cls(EventWindow(h, w, t, p, geom), start_time)

    @property
    def geom(self) -> SensorGeometry:
        return self._w.geom

    @property
    def remaining(self) -> int:
        return len(self._w) - self._pos

    def next_fen(self, n: int) -> EventWindow:
        if n < 1:
            raise InvalidInterval(f"window size must be >= 1, got {n}")
        if self.remaining < n:
            raise InsufficientEvents(
                f"requested {n} events but only {self.remaining} remain"
            )
        out = self._w.take(np.arange(self._pos, self._pos + n))
        self._pos += n
        return out

    def next_fit(self, dt: float) -> EventWindow:
        if not dt > 0.0:
            raise InvalidInterval(f"interval must be positive, got {dt}")
        t = self._w.t
        lo = int(np.searchsorted(t, self._time, side="left"))
        hi = int(np.searchsorted(t, self._time + dt, side="left"))
        lo = max(lo, self._pos)
        out = self._w.take(np.arange(lo, max(hi, lo)))
        self._pos = max(hi, self._pos)
        self._time += dt
        return out

    def windows_fen(self, n: int) -> Iterator[EventWindow]:
        """Yield consecutive n-event windows until fewer than n events remain."""
        while self.remaining >= n:
            yield self.next_fen(n)


def window_fen(stream: EventStream, n: int) -> EventWindow:
    """Take the next ``n`` consecutive events and advance the cursor."""
    return stream.next_fen(n)


def window_fit(stream: EventStream, dt: float) -> EventWindow:
    """Take all events in the next half-open interval of length ``dt``."""
    return stream.next_fit(dt)


def sample_events(window: EventWindow, n: int, seed: int) -> EventWindow:
    """Seeded subsample of a window down (or up) to exactly ``n`` events.

    With enough events, sampling is uniform without replacement and keeps
    temporal order.  Smaller windows are padded by sampling with replacement
    so downstream shapes stay fixed.  Bit-identical across runs for a seed.
    """
    if len(window) == 0:
        raise EmptyWindow("cannot sample from an empty window")
    idx = sample_indices(len(window), n, seed)
    return window.take(idx)


def sample_indices(count: int, n: int, seed: int) -> np.ndarray:
    """The index logic behind :func:`sample_events`, reusable on clouds."""
    if count == 0:
        raise EmptyWindow("cannot sample from zero items")
    rng = np.random.default_rng(seed)
    if count >= n:
        idx = rng.choice(count, size=n, replace=False)
    else:
        idx = rng.choice(count, size=n, replace=True)
    return np.sort(idx)


def normalize(window: EventWindow) -> STCloud:
    """Map a window into the unit spatio-temporal cube.

    (h, w, t) -> (h/H, w/W, (t - t_min) / (t_max - t_min)).  When every event
    shares one timestamp the temporal coordinate is defined as 0 so the
    mapping stays total.
    """
    if len(window) == 0:
        raise EmptyWindow("cannot normalize an empty window")
    t_min, t_max = window.t_min, window.t_max
    span = t_max - t_min
    coords = np.empty((len(window), 3), dtype=np.float64)
    coords[:, 0] = window.h / window.geom.height
    coords[:, 1] = window.w / window.geom.width
    if span > 0.0:
        coords[:, 2] = (window.t - t_min) / span
    else:
        coords[:, 2] = 0.0
    return STCloud(coords, window.p, window.geom, (t_min, t_max))


def subsample_cloud(cloud: STCloud, n: int, seed: int) -> STCloud:
    """Seeded subsample of a normalized cloud, same index rule as windows."""
    return cloud.take(sample_indices(len(cloud), n, seed))
