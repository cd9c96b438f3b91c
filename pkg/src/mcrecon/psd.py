"""Spectral-density estimation from one noisy multichannel draw.

The channel samples are folded into the DFT domain, mapped to coefficient
space by a block-sparse matrix built from the interpolation table, and the
squared result is debiased by the known noise power per bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interpolate import InterpolationKernel
from .spectrum import TWO_PI, BandIndexSet, MultichannelSamples


@dataclass(frozen=True)
class DftDomainSamples:
    """Per-channel DFT blocks stacked into one length-Ns vector."""

    d: np.ndarray
    n_lo: int
    L: int

    def __post_init__(self):
        d = np.asarray(self.d, dtype=complex)
        if d.ndim != 1 or d.size == 0 or d.size % self.L:
            raise ValueError(f"need a nonempty vector of whole {self.L}-blocks, got shape {d.shape}")
        object.__setattr__(self, "d", d)

    @property
    def M(self) -> int:
        return self.d.size // self.L


@dataclass(frozen=True)
class PsdEstimate:
    """Estimated squared coefficient magnitudes over a frequency band.

    Individual entries may dip below zero on noisy draws; the estimator is
    unbiased, not sign-constrained. Consumers clamp when they need a power.
    """

    band: BandIndexSet
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.band.size,):
            raise ValueError(f"expected {self.band.size} values, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    def value(self, n: int) -> float:
        if n not in self.band:
            raise ValueError(f"frequency {n} outside band")
        return float(self.values[self.band.offset(n)])

    def restricted(self, band: BandIndexSet) -> "PsdEstimate":
        if band.n_lo < self.band.n_lo or band.n_hi > self.band.n_hi:
            raise ValueError("restriction band must lie inside the estimate band")
        lo = self.band.offset(band.n_lo)
        return PsdEstimate(band, self.values[lo:lo + band.size])

    def as_dict(self, clamp: bool = False) -> dict:
        vals = np.maximum(self.values, 0.0) if clamp else self.values
        return {int(n): float(v) for n, v in zip(self.band.indices(), vals)}


def assemble_d(samples: MultichannelSamples, n_lo: int) -> DftDomainSamples:
    """Fold each channel into its DFT block, demodulated to start at n_lo."""
    L = samples.grid.L
    p = np.arange(L)
    demod = np.exp(-1j * TWO_PI * n_lo * p / L)
    folded = np.fft.fft(samples.values * demod, axis=1) / L
    return DftDomainSamples(folded.reshape(-1), n_lo=n_lo, L=L)


def build_B(kernel: InterpolationKernel) -> np.ndarray:
    """Dense matrix taking stacked DFT blocks to band coefficients.

    Row jL+k holds the M interpolation values r_m(n_lo + jL + k) at columns
    mL+k, one per channel block, so B @ d reproduces the coefficient vector.
    """
    M, L = kernel.M, kernel.L
    Ns = M * L
    B = np.zeros((Ns, Ns), dtype=complex)
    rows = np.arange(Ns)
    for m in range(M):
        B[rows, m * L + rows % L] = kernel.r[m]
    return B


def estimate_psd(d_eps: DftDomainSamples, B: np.ndarray, sigma: float, L: int) -> PsdEstimate:
    """Debiased per-frequency power estimate from one noisy draw.

    Each squared coefficient |(B d)_n|^2 carries a known noise floor of
    (sigma^2/L) times the squared row norm; subtracting it leaves an
    unbiased estimate of |a(n)|^2.
    """
    Ns = d_eps.d.size
    if B.shape != (Ns, Ns):
        raise ValueError(f"matrix shape {B.shape} does not fit {Ns} samples")
    if L != d_eps.L:
        raise ValueError(f"block length {L} does not match the transform ({d_eps.L})")
    coeffs = B @ d_eps.d
    floor = sigma**2 / L * np.sum(np.abs(B) ** 2, axis=1)
    band = BandIndexSet(d_eps.n_lo, d_eps.n_lo + Ns - 1)
    return PsdEstimate(band, np.abs(coeffs) ** 2 - floor)


def psd_mse(estimate: PsdEstimate, truth: dict) -> float:
    """Mean squared deviation of the estimate from a known power table."""
    if set(truth) != set(estimate.band.indices()):
        raise ValueError("truth table does not cover the estimate band")
    target = np.array([truth[n] for n in estimate.band.indices()], dtype=float)
    return float(np.mean(np.abs(estimate.values - target) ** 2))
