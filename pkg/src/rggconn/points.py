"""Point sets on axis-aligned squares: sampling, deletion, CSV round-trip.

A PointSet is an ordered list of planar points tied to the square region
it was drawn on and the seed that produced it.  Order is generation
order; regenerating with the same (region, seed, intensity or count)
reproduces the array bit for bit.  Point i consumes uniforms (2i, 2i+1)
of the position substream, so for a fixed seed the fixed-count samplers
form a prefix family: the first m points of sample_fixed(region, m', seed)
equal sample_fixed(region, m, seed) whenever m' >= m.  That is what lets
deletion experiments remove "the last L points" and couple the result to
a smaller sample exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import Stream, derive_key, poisson_count

# substream roles under a point-set seed
_COUNT_STREAM = 0
_POSITION_STREAM = 1


@dataclass(frozen=True)
class Region:
    """Closed axis-aligned square [x0, x0+side] x [y0, y0+side]."""

    origin_x: float
    origin_y: float
    side: float

    def __post_init__(self):
        if not np.isfinite(self.side) or self.side < 0.0:
            raise ValueError(f"region side must be finite and >= 0, got {self.side}")
        if not (np.isfinite(self.origin_x) and np.isfinite(self.origin_y)):
            raise ValueError("region origin must be finite")

    @property
    def area(self) -> float:
        return self.side * self.side

    def contains(self, x, y) -> np.ndarray:
        return (
            (x >= self.origin_x)
            & (x <= self.origin_x + self.side)
            & (y >= self.origin_y)
            & (y <= self.origin_y + self.side)
        )

    def concentric(self, fraction: float) -> "Region":
        """Concentric subsquare whose side is `fraction` times this side."""
        if not 0.0 < fraction <= 1.0:
            raise ValueError("fraction must be in (0, 1]")
        s = self.side * fraction
        return Region(
            self.origin_x + (self.side - s) / 2.0,
            self.origin_y + (self.side - s) / 2.0,
            s,
        )


@dataclass(frozen=True)
class PointSet:
    """Ordered points on a region, with the seed that generated them."""

    region: Region
    xy: np.ndarray  # (m, 2) float64, generation order
    seed: int

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=np.float64)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ValueError("points must form an (m, 2) array")
        object.__setattr__(self, "xy", xy)
        if xy.size and not bool(np.all(self.region.contains(xy[:, 0], xy[:, 1]))):
            raise ValueError("every point must lie inside the region")

    def __len__(self) -> int:
        return self.xy.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.xy[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.xy[:, 1]


def _positions(region: Region, m: int, seed: int) -> np.ndarray:
    s = Stream(derive_key(seed, _POSITION_STREAM))
    u = s.uniforms(2 * m)
    xy = np.empty((m, 2), dtype=np.float64)
    xy[:, 0] = region.origin_x + region.side * u[0::2]
    xy[:, 1] = region.origin_y + region.side * u[1::2]
    return xy


def sample_poisson(region: Region, intensity: float, seed: int) -> PointSet:
    """Poisson point process on the region: Poisson count, uniform positions."""
    if not np.isfinite(intensity) or intensity < 0.0:
        raise ValueError(f"intensity must be finite and >= 0, got {intensity}")
    count_stream = Stream(derive_key(seed, _COUNT_STREAM))
    m = poisson_count(region.area * intensity, count_stream)
    return PointSet(region, _positions(region, m, seed), seed)


def sample_fixed(region: Region, m: int, seed: int) -> PointSet:
    """Exactly m uniform points; prefix-compatible across m for a fixed seed."""
    if m < 0:
        raise ValueError(f"point count must be >= 0, got {m}")
    return PointSet(region, _positions(region, m, seed), seed)


def delete_points(ps: PointSet, victims) -> PointSet:
    """Remove the given point indices, preserving the order of survivors."""
    victims = np.asarray(victims, dtype=np.int64).ravel()
    m = len(ps)
    if victims.size:
        if victims.min() < 0 or victims.max() >= m:
            raise ValueError("victim index out of range")
        if np.unique(victims).size != victims.size:
            raise ValueError("victim indices must be distinct")
    keep = np.ones(m, dtype=bool)
    keep[victims] = False
    return PointSet(ps.region, ps.xy[keep], ps.seed)


def write_csv(ps: PointSet, path) -> None:
    """Write points as CSV: header comments, then x,y rows at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# side={ps.region.side:.17g}\n")
        f.write(f"# seed={ps.seed}\n")
        f.write(f"# origin_x={ps.region.origin_x:.17g}\n")
        f.write(f"# origin_y={ps.region.origin_y:.17g}\n")
        f.write("x,y\n")
        for px, py in ps.xy:
            f.write(f"{px:.17g},{py:.17g}\n")


def read_csv(path) -> PointSet:
    """Read a point CSV written by write_csv; 17-digit output round-trips exactly."""
    meta = {}
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if line == "x,y":
                continue
            sx, _, sy = line.partition(",")
            rows.append((float(sx), float(sy)))
    if "side" not in meta or "seed" not in meta:
        raise ValueError("point CSV must carry side= and seed= comment lines")
    region = Region(
        float(meta.get("origin_x", 0.0)),
        float(meta.get("origin_y", 0.0)),
        float(meta["side"]),
    )
    xy = np.array(rows, dtype=np.float64).reshape(len(rows), 2)
    return PointSet(region, xy, int(meta["seed"]))
