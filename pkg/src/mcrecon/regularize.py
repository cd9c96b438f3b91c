"""Regularized spectral recovery from multichannel samples.

Builds the synthesis system that maps band coefficients to stacked channel
samples, then solves it with either a weighted ridge penalty (closed form)
or a weighted sum-of-norms penalty via ADMM. Both penalties carry a sigma^2
factor, so zero noise reduces them to plain least squares.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg

from .prefilter import realify_matrix, realify_vector
from .schemes import ChannelBank
from .spectrum import BandIndexSet, FourierSpectrum, MultichannelSamples, SampleGrid

# Relative stopping weight for the ADMM residuals; the config tolerances
# set the absolute part.
REL_TOL = 1e-6


@dataclass(frozen=True)
class AdmmOptions:
    """Iteration controls for the sum-of-norms solver."""

    rho: float = 1.0
    max_iter: int = 2000
    tol_primal: float = 1e-8
    tol_dual: float = 1e-8

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class RegularizerConfig:
    penalty: str = "l2"
    eta: float = 1.2
    alpha: float = 1.0
    admm: AdmmOptions = field(default_factory=AdmmOptions)

    def __post_init__(self):
        if self.penalty not in ("l1", "l2"):
            raise ValueError(f"penalty must be 'l1' or 'l2', got {self.penalty!r}")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


@dataclass(frozen=True)
class SynthesisSystem:
    """Linear map from band coefficients to stacked channel samples.

    Row block m holds channel m's samples; column n holds
    b_m(n) exp(i n t_p). `weights` is the diagonal of the penalty weight,
    1 + |n|^eta per coefficient. Factorizations are cached on the instance
    and survive `with_samples`, so Monte-Carlo trials factor once.
    """

    band: BandIndexSet
    matrix: np.ndarray
    weights: np.ndarray
    rhs: Optional[np.ndarray] = None
    _factors: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        weights = np.asarray(self.weights, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != self.band.size:
            raise ValueError("matrix must have one column per band index")
        if weights.shape != (self.band.size,) or np.any(weights <= 0):
            raise ValueError("weights must be positive, one per band index")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "weights", weights)
        if self.rhs is not None:
            rhs = np.asarray(self.rhs, dtype=complex).reshape(-1)
            if rhs.size != matrix.shape[0]:
                raise ValueError("sample vector does not match the matrix rows")
            object.__setattr__(self, "rhs", rhs)

    def with_samples(self, samples: MultichannelSamples) -> "SynthesisSystem":
        """Attach a draw's samples; the factor cache is shared."""
        return replace(self, rhs=np.asarray(samples.values).reshape(-1))


def build_system(bank: ChannelBank, band: BandIndexSet, grid: SampleGrid,
                 eta: float = 1.2) -> SynthesisSystem:
    """Assemble the synthesis matrix and penalty weights for a band."""
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    n = band.indices()
    phase = np.exp(1j * np.outer(grid.nodes, n))
    responses = bank.response_matrix(n)
    blocks = responses[:, None, :] * phase[None, :, :]
    matrix = blocks.reshape(bank.M * grid.L, band.size)
    weights = 1.0 + np.abs(n) ** float(eta)
    return SynthesisSystem(band, matrix, weights)


def pair_permutation(size: int) -> np.ndarray:
    """Index order interleaving the two halves of a length-`size` vector.

    Applied to a stacked (real parts, imaginary parts) vector it lists each
    coefficient's pair adjacently: (Re_0, Im_0, Re_1, Im_1, ...).
    """
    if size < 2 or size % 2:
        raise ValueError("size must be a positive even number")
    return np.arange(size).reshape(2, size // 2).T.reshape(-1)


def group_shrinkage(values, kappa: float) -> np.ndarray:
    """Scale toward zero: v * max(0, 1 - kappa/||v||), 0 once ||v|| <= kappa.

    The norm runs over the last axis, so a stack of rows shrinks rowwise.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    arr = np.asarray(values, dtype=float)
    norms = np.linalg.norm(arr, axis=-1, keepdims=True)
    scale = np.maximum(0.0, 1.0 - kappa / np.maximum(norms, np.finfo(float).tiny))
    return arr * scale


def _penalty_weight(alpha: float, sigma: float) -> float:
    # Both penalties are sigma^2-scaled; sigma <= 0 switches them off.
    return alpha * sigma * sigma if sigma > 0 else 0.0


def _ridge_solve(system: SynthesisSystem, weight: float) -> FourierSpectrum:
    if system.rhs is None:
        raise ValueError("no samples attached; call with_samples first")
    key = ("ridge", weight)
    factor = system._factors.get(key)
    if factor is None:
        gram = realify_matrix(system.matrix.conj().T @ system.matrix)
        if weight > 0:
            penalty = weight * np.tile(system.weights**2, 2)
            gram[np.diag_indices_from(gram)] += penalty
        try:
            factor = scipy.linalg.cho_factor(gram)
        except np.linalg.LinAlgError:
            raise ValueError(
                "singular synthesis system; needs alpha*sigma > 0 or full-rank matrix"
            ) from None
        system._factors[key] = factor
    rhs = realify_vector(system.matrix.conj().T @ system.rhs)
    solution = scipy.linalg.cho_solve(factor, rhs)
    mu = system.band.size
    return FourierSpectrum(system.band, solution[:mu] + 1j * solution[mu:])


def l2_solve(system: SynthesisSystem, config: RegularizerConfig,
             sigma: float) -> FourierSpectrum:
    """Weighted ridge solution via the realified normal equations."""
    if config.penalty != "l2":
        raise ValueError("config.penalty must be 'l2'")
    return _ridge_solve(system, _penalty_weight(config.alpha, sigma))


def l1_solve(system: SynthesisSystem, config: RegularizerConfig, sigma: float,
             history: Optional[list] = None) -> FourierSpectrum:
    """Weighted sum-of-norms solution via ADMM.

    Each coefficient's (real, imaginary) pair forms one shrinkage group in
    the weighted variable y = W x. Passing a list as `history` records the
    primal objective at every iteration. Hitting max_iter warns with the
    residuals and returns the last iterate.
    """
    if config.penalty != "l1":
        raise ValueError("config.penalty must be 'l1'")
    if system.rhs is None:
        raise ValueError("no samples attached; call with_samples first")
    kappa = _penalty_weight(config.alpha, sigma)
    if kappa == 0.0:
        return _ridge_solve(system, 0.0)

    opts = config.admm
    mu = system.band.size
    key = ("admm", opts.rho)
    cached = system._factors.get(key)
    if cached is None:
        scaled = system.matrix / system.weights[None, :]
        gram = 2.0 * (scaled.conj().T @ scaled)
        gram[np.diag_indices_from(gram)] += opts.rho
        cached = (scaled, scipy.linalg.cho_factor(gram))
        system._factors[key] = cached
    scaled, factor = cached

    # The iteration runs in complex arithmetic: the realified normal
    # equations are exactly the complex ones under the realify maps, and
    # shrinking each (Re, Im) pair is modulus shrinkage. Half the memory
    # traffic of the realified solve.
    lin = 2.0 * (scaled.conj().T @ system.rhs)
    size = 2 * mu  # realified dimension, so tolerances match that form
    tiny = np.finfo(float).tiny
    y = np.zeros(mu, dtype=complex)
    z = np.zeros(mu, dtype=complex)
    dual = np.zeros(mu, dtype=complex)
    threshold = kappa / opts.rho
    converged = False
    for _ in range(opts.max_iter):
        y = scipy.linalg.cho_solve(factor, lin + opts.rho * (z - dual))
        z_prev = z
        step = y + dual
        moduli = np.abs(step)
        z = step * np.maximum(0.0, 1.0 - threshold / np.maximum(moduli, tiny))
        dual = dual + y - z
        if history is not None:
            residual = scaled @ z - system.rhs
            history.append(float(np.vdot(residual, residual).real
                                 + kappa * np.abs(z).sum()))
        primal = np.linalg.norm(y - z)
        dual_residual = opts.rho * np.linalg.norm(z - z_prev)
        eps_primal = (np.sqrt(size) * opts.tol_primal
                      + REL_TOL * max(np.linalg.norm(y), np.linalg.norm(z)))
        eps_dual = (np.sqrt(size) * opts.tol_dual
                    + REL_TOL * opts.rho * np.linalg.norm(dual))
        if primal < eps_primal and dual_residual < eps_dual:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"sum-of-norms solver stopped at max_iter={opts.max_iter} "
            f"(primal residual {primal:.3e}, dual residual {dual_residual:.3e})",
            stacklevel=2,
        )
    return FourierSpectrum(system.band, z / system.weights)
