"""Multichannel interpolation: kernel construction and reconstruction.

Reconstruction from M channels of L samples each recovers a trigonometric
polynomial on a band of size L*M. Per frequency class n in the first
sub-band, an M x M channel matrix H_n is inverted; its columns, distributed
over the sub-bands, form the interpolation coefficients r_m(n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schemes import ChannelBank, channel_samples
from .spectrum import (
    TWO_PI,
    BandIndexSet,
    FourierSpectrum,
    MultichannelSamples,
    synthesize,
    synthesize_on_grid,
)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class InterpolationKernel:
    """Interpolation coefficients r_m(n) over the reconstruction band.

    r has shape (M, band.size); conditions[k] is the condition number of the
    channel matrix for the k-th frequency class.
    """

    band: BandIndexSet
    r: np.ndarray
    conditions: np.ndarray

    def __post_init__(self):
        r = np.ascontiguousarray(self.r, dtype=complex)
        if r.ndim != 2 or r.size != 0 and self.band.size % r.shape[0]:
            raise ValueError(f"coefficient table shaped {r.shape} does not tile the band")
        if r.shape[1] != self.band.size:
            raise ValueError(f"coefficient table shaped {r.shape} does not cover the band")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "conditions", np.asarray(self.conditions, dtype=float))

    @property
    def M(self) -> int:
        return self.r.shape[0]

    @property
    def L(self) -> int:
        return self.band.size // self.M

    def channel_spectrum(self, m: int) -> FourierSpectrum:
        """The reconstructing function y_m as a spectrum (0-based m)."""
        return FourierSpectrum(self.band, self.r[m])


def build_channel_matrix(bank: ChannelBank, n: int, L: int) -> np.ndarray:
    """H_n for frequency class n: entry (j, m) = b_m(n + j*L), j = 0..M-1."""
    shifts = n + L * np.arange(bank.M)
    return bank.response_matrix(shifts).T


def interpolation_coefficients(bank: ChannelBank, band: BandIndexSet) -> InterpolationKernel:
    """Invert every channel matrix over the band and lay out r_m(n).

    Raises on a frequency class whose channel matrix is singular or has
    condition number above 1e12: such a scheme cannot separate the aliases.
    """
    M = bank.M
    if band.size % M:
        raise ValueError(f"band size {band.size} is not a multiple of M={M}")
    L = band.size // M
    resp = bank.response_matrix(band.indices())  # (M, L*M)
    # Stack H_n over the first sub-band: H[k] has entry (j, m) = b_m(n1+k+jL).
    H = resp.reshape(M, M, L).transpose(2, 1, 0)
    conds = np.linalg.cond(H)
    bad = ~np.isfinite(conds) | (conds > COND_LIMIT)
    if np.any(bad):
        offenders = band.n_lo + np.nonzero(bad)[0]
        raise ValueError(
            f"channel matrix singular or near-singular at n={offenders.tolist()} "
            f"(condition limit {COND_LIMIT:g})"
        )
    Q = np.linalg.inv(H)
    # r_m on sub-band j comes from column j of the inverse: r[m, jL+k] = Q[k, m, j].
    r = Q.transpose(1, 2, 0).reshape(M, M * L)
    return InterpolationKernel(band, r, conds)


def biorthogonality_residual(kernel: InterpolationKernel, bank: ChannelBank) -> float:
    """Max deviation of sum_m b_m(n+jL) r_m(n+kL) from delta(j-k)."""
    M, L = kernel.M, kernel.L
    resp = bank.response_matrix(kernel.band.indices()).reshape(M, M, L)
    R = kernel.r.reshape(M, M, L)
    prod = np.einsum("mjk,mlk->kjl", resp, R)  # (L, M, M)
    return float(np.max(np.abs(prod - np.eye(M)[None])))


def reconstruct_direct(samples: MultichannelSamples, kernel: InterpolationKernel, t):
    """Direct-formula reconstruction at time t; the quadratic-cost oracle.

    Computes (1/L) sum_{m,p} s_{m,p} y_m(t - t_p) term by term.
    """
    L = samples.grid.L
    if samples.M != kernel.M or kernel.band.size != L * kernel.M:
        raise ValueError("kernel was built for a different sampling layout")
    nodes = samples.grid.nodes
    out = np.zeros(np.shape(np.asarray(t, dtype=float)), dtype=complex)
    for m in range(kernel.M):
        y_m = kernel.channel_spectrum(m)
        for p in range(L):
            out = out + samples.values[m, p] * np.asarray(synthesize(y_m, np.asarray(t) - nodes[p]))
    out = out / L
    return complex(out[()]) if np.ndim(t) == 0 else out


def mci_coefficients(samples: MultichannelSamples, kernel: InterpolationKernel) -> FourierSpectrum:
    """Fourier coefficients of the interpolant, via per-channel FFTs.

    This is the O(Ns log Ns) path: demodulate each channel to the first
    sub-band, take length-L DFTs, then apply the inverse channel matrices
    frequency class by frequency class.
    """
    L, M = samples.grid.L, samples.M
    if kernel.M != M or kernel.band.size != L * M:
        raise ValueError("kernel was built for a different sampling layout")
    p = np.arange(L)
    demod = np.exp(-TWO_PI * 1j * kernel.band.n_lo * p / L)
    folded = np.fft.fft(samples.values * demod, axis=1)  # row m, entry k = L*d_m(n1+k)
    R = kernel.r.reshape(M, M, L)
    blocks = np.einsum("mk,mjk->jk", folded, R) / L  # a(n1 + jL + k)
    return FourierSpectrum(kernel.band, blocks.reshape(-1))


def reconstruct_fft(samples: MultichannelSamples, kernel: InterpolationKernel, n_out: int) -> np.ndarray:
    """Interpolant values on the uniform grid t_k = 2*pi*k/n_out."""
    if n_out < kernel.band.size:
        raise ValueError(f"output grid must have at least {kernel.band.size} points, got {n_out}")
    return synthesize_on_grid(mci_coefficients(samples, kernel), n_out)


def interpolation_consistency_check(samples: MultichannelSamples, kernel: InterpolationKernel,
                                    bank: ChannelBank) -> float:
    """Max residual between the channel-filtered interpolant and the samples.

    The interpolant reproduces the data it was built from, noisy or not, so
    this should sit at rounding level for any input.
    """
    spec = mci_coefficients(samples, kernel)
    refiltered = channel_samples(spec, bank, samples.grid)
    return float(np.max(np.abs(refiltered.values - samples.values)))


def aliasing_error(spec: FourierSpectrum, kernel: InterpolationKernel, bank: ChannelBank) -> float:
    """Squared-norm error of interpolating a wider-band signal from exact samples.

    Out-of-band energy passes through unreconstructed, and each out-of-band
    frequency leaks onto its in-band alias class. Exact when no two
    out-of-band frequencies share an alias class; overlap cross terms are
    not modeled.
    """
    M, L = kernel.M, kernel.L
    band = kernel.band
    total = 0.0
    for n in spec.band.indices():
        a = spec.coeff(int(n))
        if a == 0:
            continue
        j = (n - band.n_lo) // L  # alias block index; 0..M-1 means in band
        if 0 <= j < M:
            continue
        power = abs(a) ** 2
        total += power
        b = bank.response_matrix(np.array([n]))[:, 0]  # b_m(n)
        base = n - j * L  # representative in the first sub-band
        leak = 0.0
        for l in range(M):
            r_col = kernel.r[:, int(base + l * L - band.n_lo)]
            leak += abs(np.dot(r_col, b)) ** 2
        total += power * leak
    return total
