"""Sample-domain filtering applied before reconstruction.

Each channel gets a complex multiplier per DFT bin. The expected-error
objective couples the M channels within one bin but never across bins, so
the optimal design solves one small realified normal-equation block per
bin. With a single identity channel the design collapses to a Wiener
post-filter; with several channels it can exploit cross-channel structure
the post-filter cannot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interpolate import InterpolationKernel, reconstruct_fft
from .spectrum import TWO_PI, MultichannelSamples

COND_LIMIT = 1e12


@dataclass(frozen=True)
class PreFilterDesign:
    """Per-channel complex gains, one row of length L per channel."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=complex)
        if lam.ndim != 2 or lam.size == 0:
            raise ValueError(f"expected an (M, L) gain table, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValueError("gains must be finite")
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def identity(cls, M: int, L: int) -> "PreFilterDesign":
        return cls(np.ones((M, L), dtype=complex))

    @property
    def M(self) -> int:
        return self.lambdas.shape[0]

    @property
    def L(self) -> int:
        return self.lambdas.shape[1]


def realify_matrix(A: np.ndarray) -> np.ndarray:
    """Real 2p x 2q block form [[Re, -Im], [Im, Re]] of a complex matrix."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def realify_vector(b: np.ndarray) -> np.ndarray:
    """Stack real over imaginary parts of a complex vector."""
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    return np.concatenate([b.real, b.imag])


def apply_pre_filter(samples: MultichannelSamples, design: PreFilterDesign,
                     n_lo: int) -> MultichannelSamples:
    """Multiply each channel's demodulated DFT bins by its gain row.

    Bin k of channel m carries frequency n_lo + k; an all-ones design
    returns the samples unchanged.
    """
    L = samples.grid.L
    if design.lambdas.shape != samples.values.shape:
        raise ValueError(
            f"design shape {design.lambdas.shape} does not match samples {samples.values.shape}"
        )
    p = np.arange(L)
    demod = np.exp(-1j * TWO_PI * n_lo * p / L)
    bins = np.fft.fft(samples.values * demod, axis=1)
    filtered = np.fft.ifft(design.lambdas * bins, axis=1) * demod.conj()
    return MultichannelSamples(samples.grid, filtered)


def _responses(kernel: InterpolationKernel) -> np.ndarray:
    # (m, j, k): interpolation value of channel m at class j of bin k.
    M, L = kernel.M, kernel.L
    return kernel.r.reshape(M, M, L)


def phi2(design: PreFilterDesign, d: np.ndarray, kernel: InterpolationKernel,
         sigma: float, L: int) -> float:
    """Expected mean-square error of a pre-filtered reconstruction.

    d holds the per-channel DFT-domain values d_m(n) over the base bins
    (shape (M, L)), either exact or estimated from one noisy draw. The
    target coefficients are recovered from d itself through the
    interpolation table, so no separate truth input is needed.
    """
    d = np.asarray(d, dtype=complex)
    if L != kernel.L:
        raise ValueError(f"node count {L} does not match the kernel ({kernel.L})")
    if d.shape != (kernel.M, L) or design.lambdas.shape != (kernel.M, L):
        raise ValueError(f"expected shape {(kernel.M, L)} for gains and d tables")
    R = _responses(kernel)
    W = d[:, None, :] * R
    resid = np.einsum("mk,mjk->jk", design.lambdas - 1.0, W)
    rho = np.sum(np.abs(R) ** 2, axis=1)
    noise = sigma**2 / L * np.sum(np.abs(design.lambdas) ** 2 * rho)
    return float(np.sum(np.abs(resid) ** 2) + noise)


def optimal_pre_filter(d_hat: np.ndarray, kernel: InterpolationKernel,
                       sigma: float, L: int) -> PreFilterDesign:
    """Minimize the pre-filter objective bin by bin.

    Each bin contributes an M-unknown least-squares block; the blocks are
    realified and solved as 2M x 2M real systems. Raises when any block is
    singular or near-singular, which happens when a bin's d values vanish
    for some channel and sigma is zero.
    """
    d_hat = np.asarray(d_hat, dtype=complex)
    M = kernel.M
    if L != kernel.L:
        raise ValueError(f"node count {L} does not match the kernel ({kernel.L})")
    if d_hat.shape != (M, L):
        raise ValueError(f"expected d tables of shape {(M, L)}, got {d_hat.shape}")
    R = _responses(kernel)
    W = d_hat[:, None, :] * R
    A = W.transpose(2, 1, 0)                      # (k, j, m)
    gram = A.conj().transpose(0, 2, 1) @ A        # (k, m, m)
    rho = np.sum(np.abs(R) ** 2, axis=1)          # (m, k)
    diag = np.arange(M)
    gram[:, diag, diag] += sigma**2 / L * rho.T
    targets = A.sum(axis=2)                       # (k, j)
    rhs = np.einsum("kjm,kj->km", A.conj(), targets)

    with np.errstate(divide="ignore", invalid="ignore"):
        conds = np.linalg.cond(gram)
    bad = np.flatnonzero(~np.isfinite(conds) | (conds > COND_LIMIT))
    if bad.size:
        freqs = [int(kernel.band.n_lo + k) for k in bad]
        raise ValueError(
            f"pre-filter system singular or near-singular at n={freqs} "
            f"(cond {float(np.max(conds[bad])):.3e})"
        )

    blocks = np.stack([realify_matrix(g) for g in gram])
    real_rhs = np.stack([realify_vector(r) for r in rhs])
    solution = np.linalg.solve(blocks, real_rhs[:, :, None])[:, :, 0]
    lambdas = (solution[:, :M] + 1j * solution[:, M:]).T
    return PreFilterDesign(lambdas)


def mci_with_prefilter(samples: MultichannelSamples, design: PreFilterDesign,
                       kernel: InterpolationKernel, n_out: int) -> np.ndarray:
    """Filter the samples, then reconstruct on a uniform n_out grid."""
    filtered = apply_pre_filter(samples, design, kernel.band.n_lo)
    return reconstruct_fft(filtered, kernel, n_out)
