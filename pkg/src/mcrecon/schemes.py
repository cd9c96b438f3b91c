"""Sampling channels and the closed-form interpolation coefficients.

A channel is a frequency response b(n) applied to the signal before
sampling. The named two-channel schemes pair the plain samples with either
Hilbert-transform samples (FH2) or derivative samples (FD2); F1 is plain
sampling alone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectrum import (
    BandIndexSet,
    FourierSpectrum,
    MultichannelSamples,
    NoiseModel,
    SampleGrid,
)

CHANNEL_KINDS = ("identity", "hilbert", "derivative", "kernel")


class SchemeTag(enum.Enum):
    F1 = "F1"
    FH2 = "FH2"
    FD2 = "FD2"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class Channel:
    """One sampling channel, identified by kind and (for kernels) a spectrum."""

    kind: str
    kernel: Optional[FourierSpectrum] = None

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if (self.kind == "kernel") != (self.kernel is not None):
            raise ValueError("kernel channels need a spectrum, others must not have one")

    def response(self, n):
        """Frequency response b(n); accepts scalars or integer arrays."""
        return channel_response(self, n)


def channel_response(kind, n):
    """b(n) for a channel kind (or Channel instance)."""
    channel = kind if isinstance(kind, Channel) else Channel(kind)
    n_arr = np.asarray(n)
    if channel.kind == "identity":
        out = np.ones(n_arr.shape, dtype=complex)
    elif channel.kind == "hilbert":
        # sign(0) = 0: the zero frequency passes through as 0.
        out = -1j * np.sign(n_arr).astype(complex)
    elif channel.kind == "derivative":
        out = 1j * n_arr.astype(complex)
    else:
        spec = channel.kernel
        out = np.array([spec.coeff(int(v)) for v in np.atleast_1d(n_arr)]).reshape(
            n_arr.shape
        )
    return complex(out[()]) if np.ndim(n) == 0 else out


@dataclass(frozen=True)
class ChannelBank:
    channels: tuple[Channel, ...]

    def __post_init__(self):
        if len(self.channels) < 1:
            raise ValueError("need at least one channel")
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def M(self) -> int:
        return len(self.channels)

    def response_matrix(self, n) -> np.ndarray:
        """Stacked responses, row m = b_m evaluated on the index array n."""
        return np.array([ch.response(np.asarray(n)) for ch in self.channels])


def scheme_bank(tag: SchemeTag) -> ChannelBank:
    """The channel bank for a named scheme."""
    if tag is SchemeTag.F1:
        kinds = ("identity",)
    elif tag is SchemeTag.FH2:
        kinds = ("identity", "hilbert")
    elif tag is SchemeTag.FD2:
        kinds = ("identity", "derivative")
    else:
        raise ValueError("custom schemes carry their own channel list")
    return ChannelBank(tuple(Channel(k) for k in kinds))


def scheme_band(tag: SchemeTag, L: int) -> BandIndexSet:
    """Reconstruction band for a named scheme with L samples per channel.

    Two-channel schemes use {-L+1, ..., L} and need an even total count.
    """
    if tag is SchemeTag.F1:
        return BandIndexSet.centered(L)
    if tag in (SchemeTag.FH2, SchemeTag.FD2):
        return BandIndexSet(-L + 1, L)
    raise ValueError("custom schemes carry their own band")


def closed_form_r(tag: SchemeTag, m: int, n: int, L: int) -> complex:
    """Closed-form interpolation coefficient r_m(n) for a named scheme.

    m is the 1-based channel index. n must lie in the scheme band.
    """
    if tag is SchemeTag.F1:
        if m != 1:
            raise ValueError("F1 has a single channel")
        if n not in BandIndexSet.centered(L):
            raise ValueError(f"frequency {n} outside the F1 band for L={L}")
        return 1.0 + 0j
    if tag not in (SchemeTag.FH2, SchemeTag.FD2):
        raise ValueError(f"no closed form for scheme {tag}")
    if m not in (1, 2):
        raise ValueError("two-channel schemes index m in {1, 2}")
    if not -L + 1 <= n <= L:
        raise ValueError(f"frequency {n} outside the band for L={L}")

    if tag is SchemeTag.FH2:
        if m == 1:
            if n == 0:
                return 1.0 + 0j
            if n == L:
                return 0j
            return 0.5 + 0j
        if n == 0:
            return -1j
        if n == L:
            # The {0, L} class inverts [[1, 0], [1, -i]], landing i here.
            return 1j
        return -0.5j if n < 0 else 0.5j

    if m == 1:
        return 1.0 + n / L if n <= 0 else 1.0 - n / L
    return 1j / L if n <= 0 else -1j / L


def channel_samples(signal, bank: ChannelBank, grid: SampleGrid,
                    noise: Optional[NoiseModel] = None, trial: int = 0) -> MultichannelSamples:
    """Sample every channel of `signal` on the grid, plus one noise draw.

    `signal` is either a FourierSpectrum or an evaluator exposing
    channel_values(channel, t). Real Gaussian noise is added per entry.
    """
    t = grid.nodes
    rows = np.empty((bank.M, grid.L), dtype=complex)
    if isinstance(signal, FourierSpectrum):
        n = signal.band.indices()
        phase = np.exp(1j * np.outer(n, t))
        for m, ch in enumerate(bank.channels):
            rows[m] = (signal.coeffs * ch.response(n)) @ phase
    elif hasattr(signal, "channel_values"):
        for m, ch in enumerate(bank.channels):
            rows[m] = signal.channel_values(ch, t)
    else:
        raise ValueError(f"cannot sample object of type {type(signal).__name__}")
    if noise is not None and noise.sigma > 0:
        rows = rows + noise.draw(rows.shape, trial)
    return MultichannelSamples(grid, rows)


def bank_from_config(obj) -> tuple[SchemeTag, ChannelBank]:
    """Parse {"scheme": "FD2"} or {"scheme": {"channels": [...]}} entries.

    Kernel channels reference a spectrum file: {"kernel": "<path>"}.
    """
    value = obj["scheme"] if isinstance(obj, dict) and "scheme" in obj else obj
    if isinstance(value, str):
        try:
            tag = SchemeTag(value)
        except ValueError:
            raise ValueError(f"unknown scheme {value!r}") from None
        return tag, scheme_bank(tag)
    if isinstance(value, dict) and "channels" in value:
        channels = []
        for entry in value["channels"]:
            if isinstance(entry, str):
                channels.append(Channel(entry))
            elif isinstance(entry, dict) and "kernel" in entry:
                with open(entry["kernel"], encoding="utf-8") as fh:
                    channels.append(Channel("kernel", FourierSpectrum.from_json(fh.read())))
            else:
                raise ValueError(f"bad channel entry {entry!r}")
        return SchemeTag.CUSTOM, ChannelBank(tuple(channels))
    raise ValueError("scheme config must be a name or a channel list")
