"""Empirical one-dimensional laws and Wasserstein-type distances.

For equal-size empirical laws on the real line the optimal quadratic
coupling is the sorted (monotone) pairing, so W2 is exact and O(N log N).
The per-site distances aggregate in l2 across the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import DimensionError


@dataclass(frozen=True)
class EmpiricalLaw1D:
    """Empirical probability law on R, stored as sorted samples."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float))
        if s.size == 0:
            raise ValueError("empirical law needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise ValueError("non-finite sample")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def size(self) -> int:
        return int(self.samples.size)

    @classmethod
    def point_mass(cls, value: float, n: int) -> "EmpiricalLaw1D":
        return cls(np.full(n, float(value)))


def w2_1d(a: EmpiricalLaw1D, b: EmpiricalLaw1D) -> float:
    """Exact quadratic Wasserstein distance between equal-size laws."""
    if a.size != b.size:
        raise DimensionError(
            f"sample counts differ ({a.size} vs {b.size}); resample first"
        )
    return float(np.sqrt(np.mean((a.samples - b.samples) ** 2)))


def w2_to_delta0(a: EmpiricalLaw1D) -> float:
    """Distance to the point mass at zero: the root second moment."""
    return float(np.sqrt(np.mean(a.samples**2)))


@dataclass(frozen=True)
class SiteLawFamily:
    """One empirical law per lattice site, all with the same sample count."""

    half_width: int
    laws: tuple

    def __post_init__(self):
        laws = tuple(self.laws)
        if len(laws) != 2 * self.half_width + 1:
            raise DimensionError(
                f"expected {2 * self.half_width + 1} site laws, got {len(laws)}"
            )
        counts = {law.size for law in laws}
        if len(counts) != 1:
            raise DimensionError("site laws disagree on sample count")
        object.__setattr__(self, "laws", laws)

    @property
    def sample_count(self) -> int:
        return self.laws[0].size

    def law_at(self, i: int) -> EmpiricalLaw1D:
        return self.laws[i + self.half_width]

    @classmethod
    def from_matrix(cls, samples_by_site: np.ndarray,
                    half_width: int) -> "SiteLawFamily":
        """Build from an (n_sites, n_samples) matrix."""
        laws = tuple(EmpiricalLaw1D(row) for row in samples_by_site)
        return cls(half_width, laws)


def rho(a: SiteLawFamily, b: SiteLawFamily) -> float:
    """l2 aggregate of the per-site W2 distances."""
    if a.half_width != b.half_width:
        raise DimensionError("families live on different truncations")
    if a.sample_count != b.sample_count:
        raise DimensionError("families have different sample counts")
    total = 0.0
    for la, lb in zip(a.laws, b.laws):
        total += np.mean((la.samples - lb.samples) ** 2)
    return float(np.sqrt(total))


def law_of_ensemble(ens, at: float = 0.0) -> SiteLawFamily:
    """Per-site empirical laws across the particles of an ensemble.

    `at` is a time offset in [-r, 0] into the stored segment.
    """
    frame = ens.frame_at_offset(at)  # (particles, sites)
    return SiteLawFamily.from_matrix(frame.T, ens.half_width)
