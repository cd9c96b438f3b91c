"""Frequency-domain shaping applied after reconstruction.

A post-filter is a diagonal gain on the reconstructed coefficients. The
objective balances signal distortion against the noise passed per bin,
and its minimizer is a per-bin Wiener gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interpolate import InterpolationKernel
from .psd import PsdEstimate
from .spectrum import BandIndexSet, FourierSpectrum

ENERGY_SHARE = 0.9


@dataclass(frozen=True)
class PostFilterDesign:
    """Nonnegative per-frequency gains on a contiguous band."""

    band: BandIndexSet
    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (self.band.size,):
            raise ValueError(f"expected {self.band.size} gains, got shape {beta.shape}")
        if not np.all(np.isfinite(beta)) or np.any(beta < 0):
            raise ValueError("gains must be finite and nonnegative")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def dirichlet(cls, band: BandIndexSet) -> "PostFilterDesign":
        """Unit gain across the band: an ideal low-pass truncation."""
        return cls(band, np.ones(band.size))

    def gain(self, k: int) -> float:
        if k not in self.band:
            return 0.0
        return float(self.beta[self.band.offset(k)])


def _noise_weights(kernel: InterpolationKernel, sigma: float, band: BandIndexSet) -> np.ndarray:
    """Per-bin noise power passed by a unit gain: (sigma^2/L) sum_m |r_m(k)|^2."""
    if band.n_lo < kernel.band.n_lo or band.n_hi > kernel.band.n_hi:
        raise ValueError("filter band must lie inside the reconstruction band")
    lo = kernel.band.offset(band.n_lo)
    cols = np.abs(kernel.r[:, lo:lo + band.size]) ** 2
    return sigma**2 / kernel.L * cols.sum(axis=0)


def phi1(design: PostFilterDesign, psd: dict, kernel: InterpolationKernel,
         sigma: float, L: int) -> float:
    """Expected mean-square error of a filtered reconstruction.

    Distortion counts every psd entry (gain is zero off the design band);
    passed noise counts only the design band.
    """
    if L != kernel.L:
        raise ValueError(f"node count {L} does not match the kernel ({kernel.L})")
    distortion = 0.0
    for k, power in psd.items():
        if power < 0:
            raise ValueError(f"negative density {power} at frequency {k}")
        distortion += power * (design.gain(int(k)) - 1.0) ** 2
    noise = float(np.sum(_noise_weights(kernel, sigma, design.band) * design.beta**2))
    return distortion + noise


def optimal_post_filter(psd: dict, kernel: InterpolationKernel, sigma: float,
                        L: int, band: BandIndexSet) -> PostFilterDesign:
    """Per-bin Wiener gains |a|^2 / (|a|^2 + noise weight) on the band."""
    if L != kernel.L:
        raise ValueError(f"node count {L} does not match the kernel ({kernel.L})")
    weights = _noise_weights(kernel, sigma, band)
    beta = np.zeros(band.size)
    for i, k in enumerate(band.indices()):
        power = float(psd.get(int(k), 0.0))
        if power < 0:
            raise ValueError(f"negative density {power} at frequency {k}")
        total = power + weights[i]
        beta[i] = power / total if total > 0 else 0.0
    return PostFilterDesign(band, beta)


def apply_post_filter(spec: FourierSpectrum, design: PostFilterDesign) -> FourierSpectrum:
    """Multiply coefficients by the design gains; zero outside its band."""
    if design.band.n_lo < spec.band.n_lo or design.band.n_hi > spec.band.n_hi:
        raise ValueError("design band must lie inside the spectrum band")
    out = np.zeros(spec.band.size, dtype=complex)
    lo = spec.band.offset(design.band.n_lo)
    out[lo:lo + design.band.size] = spec.coeffs[lo:lo + design.band.size] * design.beta
    return FourierSpectrum(spec.band, out)


def select_band(psd_estimate: PsdEstimate, Ns: int) -> BandIndexSet:
    """Pick a retained band from an estimated density.

    The smallest window around frequency zero holding at least 90% of the
    (clamped) energy wins, preferring higher capture and then symmetry on
    ties. The window is then widened, right side first, until it spans at
    least ceil(2 sqrt(Ns)) bins or runs out of band.
    """
    if Ns < 1:
        raise ValueError("sample count must be positive")
    band = psd_estimate.band
    if 0 not in band:
        raise ValueError("density band must contain frequency zero")
    values = np.maximum(psd_estimate.values, 0.0)
    total = float(values.sum())
    prefix = np.concatenate([[0.0], np.cumsum(values)])
    zero = band.offset(0)
    need = ENERGY_SHARE * total - 1e-12 * max(total, 1.0)

    lo = hi = zero
    for size in range(1, band.size + 1):
        best = None
        for i in range(max(0, zero - size + 1), min(zero, band.size - size) + 1):
            j = i + size - 1
            energy = prefix[j + 1] - prefix[i]
            if energy < need:
                continue
            skew = abs((band.n_lo + i) + (band.n_lo + j))
            key = (-energy, skew, i)
            if best is None or key < best[0]:
                best = (key, i, j)
        if best is not None:
            lo, hi = best[1], best[2]
            break

    target = math.ceil(2 * math.sqrt(Ns))
    grow_right = True
    while hi - lo + 1 < target and (lo > 0 or hi < band.size - 1):
        if grow_right:
            if hi < band.size - 1:
                hi += 1
            else:
                lo -= 1
        else:
            if lo > 0:
                lo -= 1
            else:
                hi += 1
        grow_right = not grow_right
    return BandIndexSet(band.n_lo + lo, band.n_lo + hi)
