"""Built-in test signals.

Three signals cover the test matrix: a short six-coefficient spectrum, a
rational signal with an infinite one-sided spectrum, and its truncation to
the band {-16, ..., 16}.
"""

from __future__ import annotations

import numpy as np

from .spectrum import BandIndexSet, FourierSpectrum

# f(z) = (0.08 z^2 + 0.06 z^10) / ((1.3 - z)(1.5 - z))
#      + (0.05 z^3 + 0.09 z^10) / ((1.2 + z)(1.3 + z)),  z = e^{it}.
# All four poles lie outside the unit circle, so on |z| = 1 the signal is a
# convergent power series in z alone: a(n) = 0 for every n < 2.
_NUM1 = np.array([0.06, 0, 0, 0, 0, 0, 0, 0, 0.08, 0, 0])
_DEN1 = np.array([1.0, -2.8, 1.95])
_NUM2 = np.array([0.09, 0, 0, 0, 0, 0, 0, 0.05, 0, 0, 0])
_DEN2 = np.array([1.0, 2.5, 1.56])


class RationalSignal:
    """Evaluator for the rational test signal and its channel filtrations."""

    def __call__(self, t):
        z = np.exp(1j * np.asarray(t, dtype=float))
        return np.polyval(_NUM1, z) / np.polyval(_DEN1, z) + np.polyval(
            _NUM2, z
        ) / np.polyval(_DEN2, z)

    def derivative(self, t):
        """d/dt of f(e^{it}), via the chain rule i z f'(z)."""
        z = np.exp(1j * np.asarray(t, dtype=float))
        out = np.zeros_like(z)
        for num, den in ((_NUM1, _DEN1), (_NUM2, _DEN2)):
            p, q = np.polyval(num, z), np.polyval(den, z)
            dp, dq = np.polyval(np.polyder(num), z), np.polyval(np.polyder(den), z)
            out = out + (dp * q - p * dq) / q**2
        return 1j * z * out

    def hilbert(self, t):
        # The spectrum lives on n >= 2, so the transform is a global -i phase.
        return -1j * self(t)

    def coeff(self, n: int) -> float:
        """Closed-form Fourier coefficient a(n)."""
        if n < 2:
            return 0.0
        return (
            0.08 * _geom_minus(n - 2)
            + 0.06 * _geom_minus(n - 10)
            + 0.05 * _geom_plus(n - 3)
            + 0.09 * _geom_plus(n - 10)
        )

    def truncated(self, band: BandIndexSet) -> FourierSpectrum:
        """Projection onto a finite band (ideal low-pass of the signal)."""
        return FourierSpectrum(band, np.array([self.coeff(n) for n in band.indices()]))

    def channel_values(self, channel, t):
        """Exact samples of the channel-filtered signal at times t."""
        kind = getattr(channel, "kind", channel)
        if kind == "identity":
            return self(t)
        if kind == "hilbert":
            return self.hilbert(t)
        if kind == "derivative":
            return self.derivative(t)
        if kind == "kernel":
            spec = channel.kernel
            n = spec.band.indices()
            amps = np.array([self.coeff(int(k)) for k in n]) * spec.coeffs
            return np.exp(1j * np.multiply.outer(np.asarray(t, float), n)) @ amps
        raise ValueError(f"cannot filter this signal through channel kind {kind!r}")


def _geom_minus(k: int) -> float:
    # Series coefficients of 1/((1.3 - z)(1.5 - z)).
    if k < 0:
        return 0.0
    return 5.0 * (1.3 ** (-k - 1) - 1.5 ** (-k - 1))


def _geom_plus(k: int) -> float:
    # Series coefficients of 1/((1.2 + z)(1.3 + z)).
    if k < 0:
        return 0.0
    return 10.0 * (-1.0) ** k * (1.2 ** (-k - 1) - 1.3 ** (-k - 1))


def test_signal(kind: str):
    """Return a named test signal.

    "testfunc1" and "phiB" return FourierSpectrum instances; "phi" returns a
    RationalSignal evaluator because it is not bandlimited.
    """
    if kind == "testfunc1":
        coeffs = np.array([1 + 1j, 2 - 1j, 1.0, 2 + 1j, 1 - 1j, 0.0])
        return FourierSpectrum(BandIndexSet(-2, 3), coeffs)
    if kind == "phi":
        return RationalSignal()
    if kind == "phiB":
        return RationalSignal().truncated(BandIndexSet(-16, 16))
    raise ValueError(f"unknown test signal {kind!r}")
