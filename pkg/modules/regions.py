"""
Compact regions of C^n and the deterministic sampling grids used for every
sup-norm estimate: closed polydiscs, convex hulls of finite point sets, and
finite unions of those.

C^n is identified with R^(2n) as (Re z1, Im z1, ..., Re zn, Im zn) wherever a
real-linear functional is needed.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

DEFAULT_GRID_POINTS = 9
HULL_TOL = 1e-10
HULL_STEP = 1e-6


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Radial Chebyshev-Lobatto levels times uniform angles, per complex coordinate."""

    points_per_dim: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if self.points_per_dim < 2:
            raise RegionError("a grid needs at least 2 points per real dimension")

    def disc_offsets(self, radius: float) -> np.ndarray:
        """Offsets covering the closed disc of the given radius, boundary included."""
        n = self.points_per_dim
        k = np.arange(1, n)
        radii = radius * (1.0 - np.cos(np.pi * k / (n - 1))) / 2.0
        angles = 2.0 * np.pi * np.arange(n) / n
        ring = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
        return np.concatenate([[0.0 + 0.0j], ring])

    def to_json(self) -> dict:
        return {"kind": "chebyshev-lobatto-polar", "points_per_dim": self.points_per_dim}


def as_complex(value) -> complex:
    """Accepts a number, a [re, im] pair or a string such as '1+2j'."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise RegionError(f"complex pair must have two entries, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return complex(value)


def _pair_to_complex(u: np.ndarray) -> np.ndarray:
    return u[0::2] + 1j * u[1::2]


def _complex_to_pairs(points: np.ndarray) -> np.ndarray:
    """Rows of C^n as rows of R^(2n), real and imaginary parts interleaved."""
    points = np.asarray(points, dtype=complex)
    out = np.empty((points.shape[0], 2 * points.shape[1]))
    out[:, 0::2] = points.real
    out[:, 1::2] = points.imag
    return out


class Region(ABC):
    n: int

    @abstractmethod
    def grid(self, spec: GridSpec) -> np.ndarray:
        """Deterministic sample points, shape (M, n)."""

    @abstractmethod
    def boundary_samples(self, count: int) -> np.ndarray:
        """Points on the distinguished boundary, where sup-norms of holomorphic functions live."""

    @abstractmethod
    def coordinate_extent(self, k: int = 0) -> tuple[float, float]:
        """(min, max) of Re z_k over the region."""

    @abstractmethod
    def translate(self, shift: Sequence[complex]) -> "Region":
        ...

    @abstractmethod
    def points_inside(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        ...

    @abstractmethod
    def support(self, direction: np.ndarray) -> tuple[float, np.ndarray]:
        """max over the region of <direction, x> in R^(2n), and a maximiser as a complex vector."""

    @abstractmethod
    def enlarge(self, delta: float) -> "Region":
        ...

    @abstractmethod
    def to_json(self) -> dict:
        ...

    @property
    def is_convex(self) -> bool:
        return True

    def width(self, k: int = 0) -> float:
        lo, hi = self.coordinate_extent(k)
        return hi - lo

    def contains_region(self, other: "Region") -> bool:
        """True when ``other`` lies in the interior of this region."""
        return bool(np.all(self.points_inside(other.extreme_points(), strict=True)))

    def extreme_points(self) -> np.ndarray:
        return self.boundary_samples(64)


@dataclass(frozen=True)
class Polydisc(Region):
    centers: tuple
    radii: tuple

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(complex(c) for c in self.centers))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if len(self.centers) != len(self.radii) or not self.centers:
            raise RegionError("a polydisc needs one radius per centre coordinate")
        if any(r < 0 or not np.isfinite(r) for r in self.radii):
            raise RegionError(f"radii must be finite and non-negative: {self.radii}")

    @classmethod
    def unit(cls, n: int) -> "Polydisc":
        return cls((0j,) * n, (1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.centers)

    def grid(self, spec: GridSpec) -> np.ndarray:
        axes = [c + spec.disc_offsets(r) if r > 0 else np.array([c]) for c, r in zip(self.centers, self.radii)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def boundary_samples(self, count: int) -> np.ndarray:
        angles = 2.0 * np.pi * np.arange(count) / count
        axes = [c + r * np.exp(1j * angles) if r > 0 else np.array([c]) for c, r in zip(self.centers, self.radii)]
        if self.n == 1:
            return axes[0].reshape(-1, 1)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def extreme_points(self) -> np.ndarray:
        return self.boundary_samples(64 if self.n == 1 else 16)

    def coordinate_extent(self, k: int = 0) -> tuple[float, float]:
        return self.centers[k].real - self.radii[k], self.centers[k].real + self.radii[k]

    def translate(self, shift: Sequence[complex]) -> "Polydisc":
        return Polydisc(tuple(c + complex(s) for c, s in zip(self.centers, shift)), self.radii)

    def points_inside(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        points = np.asarray(points, dtype=complex).reshape(-1, self.n)
        dist = np.abs(points - np.array(self.centers)[None, :])
        radii = np.array(self.radii)[None, :]
        return np.all(dist < radii if strict else dist <= radii + 1e-12, axis=1)

    def contains_region(self, other: Region) -> bool:
        if isinstance(other, Polydisc):
            return all(abs(c2 - c1) + r2 < r1 for c1, r1, c2, r2 in zip(self.centers, self.radii, other.centers, other.radii))
        if isinstance(other, RegionUnion):
            return all(self.contains_region(part) for part in other.parts)
        return super().contains_region(other)

    def support(self, direction: np.ndarray) -> tuple[float, np.ndarray]:
        u = _pair_to_complex(np.asarray(direction, dtype=float))
        point = []
        value = 0.0
        for c, r, uk in zip(self.centers, self.radii, u):
            norm = abs(uk)
            x = c + (r * uk / norm if norm > 0 else 0)
            point.append(x)
            value += (np.conj(uk) * x).real
        return float(value), np.array(point, dtype=complex)

    def enlarge(self, delta: float) -> "Polydisc":
        return Polydisc(self.centers, tuple(r + delta for r in self.radii))

    def to_json(self) -> dict:
        return {
            "kind": "polydisc",
            "centers": [[c.real, c.imag] for c in self.centers],
            "radii": list(self.radii),
        }


@dataclass(frozen=True)
class PointHull(Region):
    """Convex hull of finitely many points of C^n."""

    points: tuple

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=complex)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.size == 0:
            raise RegionError("a hull needs at least one point")
        if not np.all(np.isfinite(arr)):
            raise RegionError("hull points must be finite")
        object.__setattr__(self, "points", tuple(tuple(complex(v) for v in row) for row in arr))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=complex)

    @property
    def n(self) -> int:
        return len(self.points[0])

    def grid(self, spec: GridSpec) -> np.ndarray:
        return self.array

    def boundary_samples(self, count: int) -> np.ndarray:
        return self.array

    def extreme_points(self) -> np.ndarray:
        return self.array

    def coordinate_extent(self, k: int = 0) -> tuple[float, float]:
        col = self.array[:, k].real
        return float(col.min()), float(col.max())

    def translate(self, shift: Sequence[complex]) -> "PointHull":
        return PointHull(self.array + np.array([complex(s) for s in shift])[None, :])

    def points_inside(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        """
        Hull membership as a convex combination found by non-negative least
        squares. ``strict`` asks for the interior: the point nudged along every
        real axis must stay in the hull.
        """
        points = np.asarray(points, dtype=complex).reshape(-1, self.n)
        vertices = _complex_to_pairs(self.array)
        scale = 1.0 + float(np.max(np.abs(vertices)))
        A = np.r_[vertices.T, np.ones((1, len(vertices)))]

        def in_hull(x: np.ndarray) -> bool:
            _, residual = nnls(A, np.r_[x, 1.0])
            return residual <= HULL_TOL * scale

        step = HULL_STEP * scale
        axes = np.eye(2 * self.n)
        out = []
        for x in _complex_to_pairs(points):
            inside = in_hull(x)
            if inside and strict:
                inside = all(in_hull(x + s * step * e) for e in axes for s in (1.0, -1.0))
            out.append(inside)
        return np.array(out, dtype=bool)

    def support(self, direction: np.ndarray) -> tuple[float, np.ndarray]:
        u = _pair_to_complex(np.asarray(direction, dtype=float))
        values = (np.conj(u)[None, :] * self.array).real.sum(axis=1)
        idx = int(np.argmax(values))
        return float(values[idx]), self.array[idx]

    def enlarge(self, delta: float) -> Polydisc:
        arr = self.array
        centers = []
        radii = []
        for k in range(self.n):
            col = arr[:, k]
            c = complex((col.real.min() + col.real.max()) / 2, (col.imag.min() + col.imag.max()) / 2)
            centers.append(c)
            radii.append(float(np.max(np.abs(col - c))) + delta)
        return Polydisc(tuple(centers), tuple(radii))

    def to_json(self) -> dict:
        return {"kind": "hull", "points": [[[v.real, v.imag] for v in row] for row in self.points]}


@dataclass(frozen=True)
class RegionUnion(Region):
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise RegionError("an empty union is not a compact to work on")
        if len({p.n for p in self.parts}) != 1:
            raise RegionError("union parts live in different dimensions")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def n(self) -> int:
        return self.parts[0].n

    @property
    def is_convex(self) -> bool:
        return len(self.parts) == 1 and self.parts[0].is_convex

    def grid(self, spec: GridSpec) -> np.ndarray:
        return np.concatenate([p.grid(spec) for p in self.parts], axis=0)

    def boundary_samples(self, count: int) -> np.ndarray:
        return np.concatenate([p.boundary_samples(count) for p in self.parts], axis=0)

    def extreme_points(self) -> np.ndarray:
        return np.concatenate([p.extreme_points() for p in self.parts], axis=0)

    def coordinate_extent(self, k: int = 0) -> tuple[float, float]:
        ext = [p.coordinate_extent(k) for p in self.parts]
        return min(e[0] for e in ext), max(e[1] for e in ext)

    def translate(self, shift: Sequence[complex]) -> "RegionUnion":
        return RegionUnion(tuple(p.translate(shift) for p in self.parts))

    def points_inside(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        masks = [p.points_inside(points, strict) for p in self.parts]
        return np.any(np.stack(masks, axis=0), axis=0)

    def support(self, direction: np.ndarray) -> tuple[float, np.ndarray]:
        return max((p.support(direction) for p in self.parts), key=lambda item: item[0])

    def enlarge(self, delta: float) -> "RegionUnion":
        return RegionUnion(tuple(p.enlarge(delta) for p in self.parts))

    def to_json(self) -> dict:
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


def region_from_json(data: dict) -> Region:
    try:
        kind = data["kind"]
        if kind == "polydisc":
            return Polydisc(tuple(as_complex(c) for c in data["centers"]), tuple(float(r) for r in data["radii"]))
        if kind == "hull":
            return PointHull(tuple(tuple(as_complex(v) for v in row) for row in data["points"]))
        if kind == "union":
            return RegionUnion(tuple(region_from_json(p) for p in data["parts"]))
    except (KeyError, TypeError, ValueError) as e:
        raise RegionError(f"malformed region: {e}") from e
    raise RegionError(f"unknown region kind {kind!r}")


def bounding_polydisc(region: Region) -> Polydisc:
    """Smallest axis-centred polydisc (per coordinate bounding box centre) containing the region's samples."""
    if isinstance(region, Polydisc):
        return region
    pts = region.extreme_points()
    centers, radii = [], []
    for k in range(region.n):
        col = pts[:, k]
        c = complex((col.real.min() + col.real.max()) / 2, (col.imag.min() + col.imag.max()) / 2)
        centers.append(c)
        radii.append(float(np.max(np.abs(col - c))))
    if isinstance(region, RegionUnion):
        for part in region.parts:
            if isinstance(part, Polydisc):
                for k in range(region.n):
                    radii[k] = max(radii[k], abs(part.centers[k] - centers[k]) + part.radii[k])
    return Polydisc(tuple(centers), tuple(radii))
