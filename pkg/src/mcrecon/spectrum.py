"""Frequency bands, spectra, sample grids and the noise model.

Everything downstream works on trigonometric polynomials f(t) = sum a(n) e^{int}
over a contiguous integer band, sampled on uniform grids t_p = 2*pi*p/L.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BandIndexSet:
    """Contiguous integer frequency band {n_lo, ..., n_hi}."""

    n_lo: int
    n_hi: int

    def __post_init__(self):
        if self.n_lo > self.n_hi:
            raise ValueError(f"empty band [{self.n_lo}, {self.n_hi}]")

    @classmethod
    def centered(cls, size: int) -> "BandIndexSet":
        """The band {-size/2 + 1, ..., size/2} (floor division for odd size)."""
        if size < 1:
            raise ValueError("band size must be positive")
        n_hi = size // 2
        return cls(n_hi - size + 1, n_hi)

    @property
    def size(self) -> int:
        return self.n_hi - self.n_lo + 1

    def indices(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1)

    def __contains__(self, n) -> bool:
        return self.n_lo <= n <= self.n_hi

    def offset(self, n: int) -> int:
        """Position of frequency n in the dense coefficient layout."""
        if n not in self:
            raise ValueError(f"frequency {n} outside band [{self.n_lo}, {self.n_hi}]")
        return n - self.n_lo

    def sub_bands(self, L: int) -> list["BandIndexSet"]:
        """Partition into blocks of length L, lowest block first."""
        if L < 1 or self.size % L:
            raise ValueError(f"band of size {self.size} does not split into blocks of {L}")
        return [
            BandIndexSet(self.n_lo + j * L, self.n_lo + (j + 1) * L - 1)
            for j in range(self.size // L)
        ]


@dataclass(frozen=True)
class FourierSpectrum:
    """Dense coefficient table a(n) over a contiguous band.

    coeffs[i] holds a(band.n_lo + i); zeros are stored explicitly.
    """

    band: BandIndexSet
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=complex)
        if c.shape != (self.band.size,):
            raise ValueError(f"expected {self.band.size} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def coeff(self, n: int) -> complex:
        """a(n); zero outside the band."""
        if n in self.band:
            return complex(self.coeffs[n - self.band.n_lo])
        return 0j

    def energy(self) -> float:
        """Mean-square norm (1/2pi) int |f|^2 dt of the synthesized signal."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def restricted(self, band: BandIndexSet) -> "FourierSpectrum":
        """Copy onto another band, dropping or zero-filling as needed."""
        coeffs = np.array([self.coeff(n) for n in band.indices()])
        return FourierSpectrum(band, coeffs)

    def to_json(self) -> str:
        rows = [[c.real, c.imag] for c in self.coeffs]
        return json.dumps({"n_lo": self.band.n_lo, "coeffs": rows})

    @classmethod
    def from_json(cls, text: str) -> "FourierSpectrum":
        obj = json.loads(text)
        coeffs = np.array([complex(re, im) for re, im in obj["coeffs"]])
        n_lo = int(obj["n_lo"])
        return cls(BandIndexSet(n_lo, n_lo + len(coeffs) - 1), coeffs)


@dataclass(frozen=True)
class SampleGrid:
    """Uniform grid t_p = 2*pi*p/L, p = 0..L-1."""

    L: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("grid needs at least one node")

    @property
    def nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.L) / self.L


@dataclass(frozen=True)
class MultichannelSamples:
    """M channels of L samples each; values[m, p] is channel m at t_p."""

    grid: SampleGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[1] != self.grid.L:
            raise ValueError(f"sample matrix must be M x {self.grid.L}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "values", v)

    @property
    def M(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class NoiseModel:
    """Additive real white Gaussian noise with a counter-based stream.

    Draws are reproducible per (seed, trial): each trial gets its own counter
    block, so concurrent trials never share generator state.
    """

    sigma: float
    seed: int

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def draw(self, shape, trial: int = 0) -> np.ndarray:
        """One N(0, sigma^2) array for the given trial index."""
        if trial < 0:
            raise ValueError("trial index must be nonnegative")
        if self.sigma == 0:
            return np.zeros(shape)
        bits = np.random.Philox(key=self.seed, counter=[0, trial, 0, 0])
        return self.sigma * np.random.Generator(bits).standard_normal(shape)


def synthesize(spec: FourierSpectrum, t):
    """Evaluate sum_n a(n) e^{int} at t (scalar or array of radians)."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    phase = np.exp(1j * t_arr[:, None] * spec.band.indices()[None, :])
    vals = phase @ spec.coeffs
    if np.ndim(t) == 0:
        return complex(vals[0])
    return vals


def synthesize_on_grid(spec: FourierSpectrum, n_points: int) -> np.ndarray:
    """Values at t_k = 2*pi*k/n_points via one zero-padded inverse FFT."""
    mu = spec.band.size
    if n_points < mu:
        raise ValueError(f"need at least {mu} grid points, got {n_points}")
    buf = np.zeros(n_points, dtype=complex)
    buf[:mu] = spec.coeffs
    k = np.arange(n_points)
    # ifft supplies the e^{2*pi*i*k*p/n} part; the extra factor restores the
    # n_lo offset of the band.
    return n_points * np.fft.ifft(buf) * np.exp(TWO_PI * 1j * spec.band.n_lo * k / n_points)


def samples_to_json(samples: MultichannelSamples, sigma: float) -> str:
    rows = [[[v.real, v.imag] for v in row] for row in samples.values]
    return json.dumps(
        {"L": samples.grid.L, "M": samples.M, "sigma": sigma, "rows": rows}
    )


def samples_from_json(text: str) -> tuple[MultichannelSamples, float]:
    obj = json.loads(text)
    rows = np.array([[complex(re, im) for re, im in row] for row in obj["rows"]])
    if rows.shape != (obj["M"], obj["L"]):
        raise ValueError(f"rows shaped {rows.shape}, header says {(obj['M'], obj['L'])}")
    return MultichannelSamples(SampleGrid(int(obj["L"])), rows), float(obj["sigma"])
