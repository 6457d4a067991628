"""Aggregation-center generation and separated spatio-temporal k-NN.

The neighbor metric treats space and time as different domains:

    d(e, c) = alpha * ((eh - ch)^2 + (ew - cw)^2) + beta * (et - ct)^2

i.e. squared Euclidean distance per domain, weighted by ``alpha`` (spatial)
and ``beta`` (temporal).  The same two constants double as the replacement
thresholds: a neighbor whose spatial squared distance reaches ``alpha`` or
whose temporal squared distance reaches ``beta`` is swapped for the point
closest to the center under the combined metric.

Ties are always broken by ascending point index, which makes every search
reproducible and lets the fast grid path be verified bit-for-bit against
the exhaustive scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyCloud, TooFewPoints, ZeroDim
from .events import STCloud, _readonly


@dataclass(frozen=True)
class DomainWeights:
    """Spatial/temporal metric weights, reused as replacement thresholds.

    Both must be non-negative and at least one positive.  (Zero is allowed
    so one domain can be switched off entirely, e.g. a purely spatial
    search with ``beta == 0``.)
    """

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.alpha < 0.0 or self.beta < 0.0 or self.alpha + self.beta <= 0.0:
            raise ValueError(
                f"weights must be >= 0 and not both zero, got ({self.alpha}, {self.beta})"
            )


@dataclass(frozen=True)
class CenterSet:
    """Aggregation centers in the unit cube; grid-generated sets record dims."""

    coords: np.ndarray  # (M, 3) float64
    grid_dims: tuple[int, int, int] | None = None

    def __post_init__(self) -> None:
        coords = _readonly(np.asarray(self.coords, dtype=np.float64))
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ValueError("centers must be (M, 3)")
        if coords.size and (coords.min() < 0.0 or coords.max() > 1.0):
            raise ValueError("centers must lie in the unit cube")
        if self.grid_dims is not None:
            gh, gw, gt = self.grid_dims
            if gh * gw * gt != coords.shape[0]:
                raise ValueError("grid dims inconsistent with center count")
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class NeighborTable:
    """Per-center neighbor indices into the source cloud, shape (M, K)."""

    indices: np.ndarray

    def __post_init__(self) -> None:
        idx = _readonly(np.asarray(self.indices, dtype=np.int64))
        if idx.ndim != 2:
            raise ValueError("neighbor indices must be (M, K)")
        if idx.size and idx.min() < 0:
            raise ValueError("neighbor indices must be non-negative")
        object.__setattr__(self, "indices", idx)

    @property
    def m(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]


def uniform_centers(grid_dims: tuple[int, int, int]) -> CenterSet:
    """Centers at the midpoints of a (G_h, G_w, G_t) grid over the unit cube.

    Output order is row-major over (i, j, k).
    """
    gh, gw, gt = (int(d) for d in grid_dims)
    if gh < 1 or gw < 1 or gt < 1:
        raise ZeroDim(f"all grid dims must be >= 1, got {grid_dims}")
    hs = (np.arange(gh) + 0.5) / gh
    ws = (np.arange(gw) + 0.5) / gw
    ts = (np.arange(gt) + 0.5) / gt
    mesh = np.stack(np.meshgrid(hs, ws, ts, indexing="ij"), axis=-1)
    return CenterSet(mesh.reshape(-1, 3), (gh, gw, gt))


def fps_centers(
    cloud: STCloud, m: int, seed: int, start_index: int | None = None
) -> CenterSet:
    """Farthest-point sampling baseline under plain Euclidean distance.

    The first point is drawn from ``seed`` unless ``start_index`` pins it.
    Kept only for comparison against grid sampling; O(N*M).
    """
    n = len(cloud)
    if not 1 <= m <= n:
        raise TooFewPoints(f"need 1 <= m <= {n}, got {m}")
    pts = cloud.coords
    if start_index is None:
        start_index = int(np.random.default_rng(seed).integers(n))
    chosen = np.empty(m, dtype=np.int64)
    chosen[0] = start_index
    best = np.sum((pts - pts[start_index]) ** 2, axis=1)
    for i in range(1, m):
        nxt = int(np.argmax(best))  # argmax takes the lowest index on ties
        chosen[i] = nxt
        d = np.sum((pts - pts[nxt]) ** 2, axis=1)
        np.minimum(best, d, out=best)
    return CenterSet(pts[chosen])


def _combined_distances(
    coords: np.ndarray, centers: np.ndarray, weights: DomainWeights
) -> np.ndarray:
    """(M, N) combined metric; the one expression both search paths share."""
    dh = centers[:, 0][:, None] - coords[:, 0][None, :]
    dw = centers[:, 1][:, None] - coords[:, 1][None, :]
    dt = centers[:, 2][:, None] - coords[:, 2][None, :]
    return weights.alpha * (dh * dh + dw * dw) + weights.beta * (dt * dt)


def _smallest_k(d_row: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest entries, ties broken by ascending index."""
    n = len(d_row)
    if n <= k:
        order = np.argsort(d_row, kind="stable")
        out = np.empty(k, dtype=np.int64)
        out[:n] = order
        out[n:] = order[0]  # pad short clouds with the nearest point
        return out
    part = np.argpartition(d_row, k - 1)[:k]
    thr = d_row[part].max()
    cand = np.flatnonzero(d_row <= thr)  # ascending index by construction
    order = np.argsort(d_row[cand], kind="stable")
    return cand[order[:k]].astype(np.int64)


def knn_separated(
    cloud: STCloud,
    centers: CenterSet,
    k: int,
    weights: DomainWeights,
    method: str = "scan",
    chunk: int = 256,
) -> NeighborTable:
    """K nearest points per center under the separated metric.

    ``method="scan"`` is the exhaustive reference; ``method="grid"`` buckets
    points into a uniform spatial hash and expands cell shells until the
    result provably matches the scan, returning bit-identical tables.
    Clouds smaller than ``k`` pad each row with that row's nearest point.
    """
    if len(cloud) == 0:
        raise EmptyCloud("neighbor search needs a non-empty cloud")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if method == "scan":
        return _knn_scan(cloud, centers, k, weights, chunk)
    if method == "grid":
        return _knn_grid(cloud, centers, k, weights)
    raise ValueError(f"unknown method {method!r}")


def _knn_scan(
    cloud: STCloud, centers: CenterSet, k: int, weights: DomainWeights, chunk: int
) -> NeighborTable:
    m = len(centers)
    out = np.empty((m, k), dtype=np.int64)
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        d = _combined_distances(cloud.coords, centers.coords[lo:hi], weights)
        for r in range(hi - lo):
            out[lo + r] = _smallest_k(d[r], k)
    return NeighborTable(out)


class _SpatialHash:
    """CSR-style bucketing of cloud points over a uniform cell grid."""

    def __init__(self, coords: np.ndarray, cells_per_dim: int):
        g = cells_per_dim
        self.g = g
        cell = np.minimum((coords * g).astype(np.int64), g - 1)
        self.cell_id = (cell[:, 0] * g + cell[:, 1]) * g + cell[:, 2]
        order = np.argsort(self.cell_id, kind="stable")
        self.order = order
        sorted_ids = self.cell_id[order]
        self.starts = np.searchsorted(sorted_ids, np.arange(g * g * g), side="left")
        self.ends = np.searchsorted(sorted_ids, np.arange(g * g * g), side="right")

    def points_in_shell(self, center_cell: np.ndarray, radius: int) -> np.ndarray:
        """Point indices in cells at exactly Chebyshev ``radius`` from the cell."""
        g = self.g
        lo = np.maximum(center_cell - radius, 0)
        hi = np.minimum(center_cell + radius, g - 1)
        chunks = []
        for ci in range(lo[0], hi[0] + 1):
            on_i = abs(ci - center_cell[0]) == radius
            for cj in range(lo[1], hi[1] + 1):
                base = (ci * g + cj) * g
                if on_i or abs(cj - center_cell[1]) == radius:
                    s, e = self.starts[base + lo[2]], self.ends[base + hi[2]]
                    if e > s:
                        chunks.append(self.order[s:e])
                else:
                    for ck in (center_cell[2] - radius, center_cell[2] + radius):
                        if 0 <= ck < g:
                            s, e = self.starts[base + ck], self.ends[base + ck]
                            if e > s:
                                chunks.append(self.order[s:e])
        if not chunks:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(chunks)


def _knn_grid(
    cloud: STCloud, centers: CenterSet, k: int, weights: DomainWeights
) -> NeighborTable:
    n = len(cloud)
    if weights.alpha == 0.0 or weights.beta == 0.0:
        # a zero weight makes whole coordinate planes equidistant; shell
        # bounds degenerate, so fall back to the reference scan
        return _knn_scan(cloud, centers, k, weights, 256)
    g = max(1, int(round((n / 16) ** (1.0 / 3.0))))
    hash_ = _SpatialHash(cloud.coords, g)
    # tightest scaled step a shell can guarantee: one cell width in the
    # cheapest direction (metric is alpha,alpha,beta per squared component)
    min_scale = min(weights.alpha, weights.beta)
    cell_w = 1.0 / g
    m = len(centers)
    out = np.empty((m, k), dtype=np.int64)
    coords = cloud.coords
    for j in range(m):
        c = centers.coords[j]
        c_cell = np.minimum((c * g).astype(np.int64), g - 1)
        cand: list[np.ndarray] = []
        count = 0
        radius = 0
        while True:
            shell = hash_.points_in_shell(c_cell, radius)
            if len(shell):
                cand.append(shell)
                count += len(shell)
            if count >= min(k, n):
                idx = np.sort(np.concatenate(cand))
                dh = coords[idx, 0] - c[0]
                dw = coords[idx, 1] - c[1]
                dt = coords[idx, 2] - c[2]
                d = weights.alpha * (dh * dh + dw * dw) + weights.beta * (dt * dt)
                kk = min(k, len(idx))
                sel = np.argsort(d, kind="stable")[:kk]
                dk = float(d[sel].max())
                # any unvisited cell is >= radius cell widths away in some axis
                bound = min_scale * (radius * cell_w) ** 2
                if bound > dk * (1.0 + 1e-9) or radius >= g:
                    row = idx[sel]
                    out[j, :kk] = row
                    out[j, kk:] = row[0]
                    break
            radius += 1  # cloud is non-empty, so count reaches n by radius == g
    return NeighborTable(out)


def nearest_points(
    cloud: STCloud, centers: CenterSet, weights: DomainWeights, chunk: int = 256
) -> np.ndarray:
    """Index of each center's closest point under the combined metric."""
    if len(cloud) == 0:
        raise EmptyCloud("nearest-point query needs a non-empty cloud")
    m = len(centers)
    out = np.empty(m, dtype=np.int64)
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        d = _combined_distances(cloud.coords, centers.coords[lo:hi], weights)
        out[lo:hi] = np.argmin(d, axis=1)  # argmin keeps the lowest index on ties
    return out


def apply_replacement(
    cloud: STCloud,
    centers: CenterSet,
    table: NeighborTable,
    weights: DomainWeights,
) -> NeighborTable:
    """Swap out-of-threshold neighbors for each center's closest point.

    A neighbor is replaced when its spatial squared distance reaches
    ``alpha`` or its temporal squared distance reaches ``beta``.  The
    substitute is the center's nearest point under the combined metric even
    if that point itself violates a threshold, which makes the operation
    idempotent.
    """
    if table.m != len(centers):
        raise ValueError("table row count must match center count")
    if table.indices.size and table.indices.max() >= len(cloud):
        raise ValueError("table indices out of cloud bounds")
    idx = table.indices
    pts = cloud.coords[idx]  # (M, K, 3)
    c = centers.coords[:, None, :]
    d_space = (pts[:, :, 0] - c[:, :, 0]) ** 2 + (pts[:, :, 1] - c[:, :, 1]) ** 2
    d_time = (pts[:, :, 2] - c[:, :, 2]) ** 2
    violates = (d_space >= weights.alpha) | (d_time >= weights.beta)
    if not np.any(violates):
        return NeighborTable(idx)
    nearest = nearest_points(cloud, centers, weights)
    replaced = np.where(violates, nearest[:, None], idx)
    return NeighborTable(replaced)
