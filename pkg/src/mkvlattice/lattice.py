"""Truncated two-sided lattice states, difference operators and norms.

States live on sites -I..I.  Everything outside the truncation is treated
as zero (Dirichlet padding), which adds no energy and keeps the discrete
Laplacian dissipative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """Operands live on different truncations or time grids."""


@dataclass(frozen=True)
class LatticeVector:
    """A square-summable state truncated to sites -I..I."""

    half_width: int
    values: np.ndarray

    def __post_init__(self):
        if self.half_width < 1:
            raise ValueError(f"half_width must be >= 1, got {self.half_width}")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (2 * self.half_width + 1,):
            raise DimensionError(
                f"expected {2 * self.half_width + 1} entries, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite entry in lattice vector")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, half_width: int) -> "LatticeVector":
        return cls(half_width, np.zeros(2 * half_width + 1))

    @classmethod
    def basis(cls, site: int, half_width: int) -> "LatticeVector":
        """Indicator of a single site (the vector e_k)."""
        vals = np.zeros(2 * half_width + 1)
        vals[site + half_width] = 1.0
        return cls(half_width, vals)

    def site(self, i: int) -> float:
        """Value at lattice site i (indexing -I..I)."""
        if abs(i) > self.half_width:
            return 0.0
        return float(self.values[i + self.half_width])

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        _check_same_width(self, other)
        return LatticeVector(self.half_width, self.values + other.values)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        _check_same_width(self, other)
        return LatticeVector(self.half_width, self.values - other.values)

    def __mul__(self, c: float) -> "LatticeVector":
        return LatticeVector(self.half_width, self.values * float(c))

    __rmul__ = __mul__


def _check_same_width(u: LatticeVector, v: LatticeVector) -> None:
    if u.half_width != v.half_width:
        raise DimensionError(
            f"half_width mismatch: {u.half_width} vs {v.half_width}"
        )


def shift_left(values: np.ndarray) -> np.ndarray:
    """values at site i+1, zero-padded; acts on the trailing axis."""
    out = np.zeros_like(values)
    out[..., :-1] = values[..., 1:]
    return out


def shift_right(values: np.ndarray) -> np.ndarray:
    """values at site i-1, zero-padded; acts on the trailing axis."""
    out = np.zeros_like(values)
    out[..., 1:] = values[..., :-1]
    return out


def forward_difference(values: np.ndarray) -> np.ndarray:
    """u_{i+1} - u_i with zero padding (raw-array form of apply_B)."""
    return shift_left(values) - values


def backward_difference(values: np.ndarray) -> np.ndarray:
    """u_{i-1} - u_i with zero padding (raw-array form of apply_Bstar)."""
    return shift_right(values) - values


def neg_laplacian(values: np.ndarray) -> np.ndarray:
    """-u_{i-1} + 2 u_i - u_{i+1} with zero padding (raw-array apply_A)."""
    return 2.0 * values - shift_left(values) - shift_right(values)


def apply_B(u: LatticeVector) -> LatticeVector:
    return LatticeVector(u.half_width, forward_difference(u.values))


def apply_Bstar(u: LatticeVector) -> LatticeVector:
    return LatticeVector(u.half_width, backward_difference(u.values))


def apply_A(u: LatticeVector) -> LatticeVector:
    return LatticeVector(u.half_width, neg_laplacian(u.values))


def l2_norm(u: LatticeVector) -> float:
    return float(np.sqrt(np.sum(u.values**2)))


def lp_norm(u: LatticeVector, p: float) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(np.sum(np.abs(u.values) ** p) ** (1.0 / p))


def inner(u: LatticeVector, v: LatticeVector) -> float:
    _check_same_width(u, v)
    return float(np.dot(u.values, v.values))


def tail_mass(u: LatticeVector, n: int) -> float:
    """Squared mass on sites with |i| >= n."""
    if n < 0 or n > u.half_width + 1:
        raise ValueError(f"n must lie in [0, I+1], got {n}")
    if n == 0:
        return float(np.sum(u.values**2))
    I = u.half_width
    head = u.values[: I - n + 1]
    head_sq = np.sum(head**2)
    tail = u.values[I + n :]
    return float(head_sq + np.sum(tail**2))


def tail_mass_values(values: np.ndarray, n: int, half_width: int) -> np.ndarray:
    """tail_mass on the trailing site axis of a raw array."""
    if n == 0:
        return np.sum(values**2, axis=-1)
    head = np.sum(values[..., : half_width - n + 1] ** 2, axis=-1)
    tail = np.sum(values[..., half_width + n :] ** 2, axis=-1)
    return head + tail


@dataclass(frozen=True)
class SegmentBuffer:
    """A discrete delay segment: K+1 frames covering times t-r..t.

    The delay r must be an exact integer multiple of dt so the delayed
    lookup is a single frame read.
    """

    delay: float
    dt: float
    frames: tuple

    def __post_init__(self):
        if self.delay <= 0 or self.dt <= 0:
            raise ValueError("delay and dt must be positive")
        k = self.delay / self.dt
        k_int = round(k)
        if abs(k - k_int) > 1e-9 * max(1.0, k_int):
            raise ValueError(
                f"delay {self.delay} is not an integer multiple of dt {self.dt}"
            )
        frames = tuple(self.frames)
        if len(frames) != k_int + 1:
            raise DimensionError(
                f"expected {k_int + 1} frames for delay/dt={k_int}, got {len(frames)}"
            )
        widths = {f.half_width for f in frames}
        if len(widths) != 1:
            raise DimensionError("frames disagree on half_width")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def half_width(self) -> int:
        return self.frames[0].half_width

    def at_offset(self, s: float) -> LatticeVector:
        """Frame at time offset s in [-r, 0] (grid-aligned)."""
        if s < -self.delay - 1e-12 or s > 1e-12:
            raise ValueError(f"offset {s} outside [-{self.delay}, 0]")
        idx = round((s + self.delay) / self.dt)
        return self.frames[int(idx)]

    @classmethod
    def from_array(cls, arr: np.ndarray, delay: float, dt: float,
                   half_width: int) -> "SegmentBuffer":
        frames = tuple(LatticeVector(half_width, row) for row in arr)
        return cls(delay, dt, frames)


def segment_sup_norm(s: SegmentBuffer) -> float:
    """sup over the segment of the l2 norm of the frames."""
    return max(l2_norm(f) for f in s.frames)
