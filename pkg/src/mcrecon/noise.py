"""Closed-form noise-error predictions for multichannel interpolation.

The reconstruction is linear, so additive sample noise passes through the
interpolation functions unchanged; its expected mean-square contribution is
sigma^2 times a scheme factor depending only on the coefficient table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interpolate import InterpolationKernel
from .schemes import SchemeTag, closed_form_r


@dataclass(frozen=True)
class NoiseErrorReport:
    """Expected mean-square error and a variance bound for one scheme."""

    factor: float
    emse: float
    vmse_bound: float

    @classmethod
    def for_kernel(cls, kernel: InterpolationKernel, sigma: float) -> "NoiseErrorReport":
        factor = emse_factor(kernel)
        emse = sigma**2 * factor
        return cls(factor=factor, emse=emse, vmse_bound=2 * emse**2)


def emse_factor(kernel: InterpolationKernel) -> float:
    """The dimensionless noise amplification (1/L) sum_m sum_n |r_m(n)|^2."""
    return float(np.sum(np.abs(kernel.r) ** 2) / kernel.L)


def emse_closed_form(tag: SchemeTag, Ns: int) -> float:
    """Noise amplification factor of a named scheme with Ns total samples."""
    if Ns < 1:
        raise ValueError("sample count must be positive")
    if tag is SchemeTag.F1:
        return 1.0
    if tag in (SchemeTag.FH2, SchemeTag.FD2):
        if Ns % 2:
            raise ValueError("two-channel schemes need an even sample count")
        if tag is SchemeTag.FH2:
            return 1.0 + 4.0 / Ns
        return 2.0 / 3.0 + 28.0 / (3.0 * Ns**2)
    raise ValueError(f"no closed form for scheme {tag}")


def postfilter_dirichlet_emse(tag: SchemeTag, Ns: int, K2: int, sigma: float) -> float:
    """Noise EMSE after an ideal low-pass onto {1-K2, ..., K2}.

    Truncating the reconstruction keeps only the noise that landed inside
    the retained band, so the factor is the band-restricted coefficient sum.
    """
    if K2 < 1:
        raise ValueError("the retained band {1-K2..K2} needs K2 >= 1")
    if 2 * K2 > Ns:
        raise ValueError(f"retained band of size {2 * K2} exceeds the sample count {Ns}")
    L = Ns if tag is SchemeTag.F1 else Ns // 2
    M = 1 if tag is SchemeTag.F1 else 2
    total = 0.0
    for k in range(1 - K2, K2 + 1):
        total += sum(abs(closed_form_r(tag, m, k, L)) ** 2 for m in range(1, M + 1))
    return sigma**2 * total / L


def phi1_minimum_closed_form(tag: SchemeTag, psd: dict, L: int, sigma: float) -> float:
    """Smallest reachable post-filter objective for a known density.

    psd maps frequency -> |a(k)|^2. Each bin contributes its Wiener residue
    |a|^2 nu / (|a|^2 + nu) with nu the per-bin noise power.
    """
    M = 1 if tag is SchemeTag.F1 else 2
    total = 0.0
    for k, power in psd.items():
        if power < 0:
            raise ValueError(f"negative density {power} at frequency {k}")
        nu = sigma**2 / L * sum(
            abs(closed_form_r(tag, m, int(k), L)) ** 2 for m in range(1, M + 1)
        )
        if power > 0 and nu > 0:
            total += power * nu / (power + nu)
    return total


def tail_energy_bound(j: int, gamma: float, k: int) -> tuple[float, float]:
    """Bracket the tail energy of a signal with |a(n)| <= gamma/|n|^j.

    Returns (lower, upper) bounds on 2 gamma^2 sum_{n>k} n^{-2j}, the
    majorant of sum_{|n|>k} |a(n)|^2. Needs j >= 1 and k >= 1.
    """
    if j < 1 or k < 1:
        raise ValueError("smoothness j and cutoff k must both be at least 1")
    alpha = 2 * j
    scale = 2 * gamma**2 / (alpha - 1)
    return scale * (k + 1) ** (1 - alpha), scale * k ** (1 - alpha)
