import json

import numpy as np
import pytest

from mcrecon import (
    BandIndexSet,
    FourierSpectrum,
    MultichannelSamples,
    NoiseModel,
    SampleGrid,
    synthesize,
    synthesize_on_grid,
)
from mcrecon.spectrum import samples_from_json, samples_to_json


def test_band_centered_even_and_odd():
    band = BandIndexSet.centered(8)
    assert (band.n_lo, band.n_hi) == (-3, 4)
    band = BandIndexSet.centered(7)
    assert (band.n_lo, band.n_hi) == (-3, 3)
    assert band.size == 7


def test_band_rejects_empty():
    with pytest.raises(ValueError):
        BandIndexSet(3, 2)


def test_band_offset_and_membership():
    band = BandIndexSet(-2, 3)
    assert 0 in band and -2 in band and 3 in band
    assert 4 not in band
    assert band.offset(-2) == 0
    assert band.offset(3) == 5
    with pytest.raises(ValueError):
        band.offset(4)


def test_sub_bands_partition():
    band = BandIndexSet(-3, 4)
    blocks = band.sub_bands(4)
    assert [(b.n_lo, b.n_hi) for b in blocks] == [(-3, 0), (1, 4)]
    covered = np.concatenate([b.indices() for b in blocks])
    assert np.array_equal(covered, band.indices())
    with pytest.raises(ValueError):
        band.sub_bands(3)


def test_spectrum_requires_dense_coefficients():
    with pytest.raises(ValueError):
        FourierSpectrum(BandIndexSet(0, 2), np.array([1.0, 2.0]))


def test_coeff_lookup_zero_outside():
    spec = FourierSpectrum(BandIndexSet(-1, 1), np.array([1j, 2.0, 3.0]))
    assert spec.coeff(-1) == 1j
    assert spec.coeff(2) == 0


def test_synthesize_constant():
    spec = FourierSpectrum(BandIndexSet(0, 0), np.array([1.0]))
    assert synthesize(spec, 1.7) == pytest.approx(1.0)


def test_synthesize_single_mode_at_pi():
    spec = FourierSpectrum(BandIndexSet(1, 1), np.array([1.0]))
    assert synthesize(spec, np.pi) == pytest.approx(-1.0, abs=1e-12)


def test_parseval_on_dense_grid():
    # Mean power over a fine uniform grid equals the coefficient energy.
    rng = np.random.default_rng(11)
    for n_lo, size in [(-4, 9), (0, 5), (-7, 8), (-1, 2)]:
        band = BandIndexSet(n_lo, n_lo + size - 1)
        spec = FourierSpectrum(band, rng.normal(size=size) + 1j * rng.normal(size=size))
        t = 2 * np.pi * np.arange(16 * size) / (16 * size)
        mean_power = np.mean(np.abs(synthesize(spec, t)) ** 2)
        assert mean_power == pytest.approx(spec.energy(), rel=1e-10)


def test_synthesize_on_grid_matches_pointwise(rng):
    band = BandIndexSet(-5, 6)
    spec = FourierSpectrum(band, rng.normal(size=12) + 1j * rng.normal(size=12))
    n = 40
    t = 2 * np.pi * np.arange(n) / n
    fast = synthesize_on_grid(spec, n)
    slow = synthesize(spec, t)
    assert np.max(np.abs(fast - slow)) < 1e-12


def test_synthesize_on_grid_needs_room():
    spec = FourierSpectrum(BandIndexSet(-2, 3), np.ones(6))
    with pytest.raises(ValueError):
        synthesize_on_grid(spec, 5)


def test_grid_nodes():
    grid = SampleGrid(4)
    assert np.allclose(grid.nodes, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    with pytest.raises(ValueError):
        SampleGrid(0)


def test_samples_validate_shape_and_finiteness():
    grid = SampleGrid(3)
    with pytest.raises(ValueError):
        MultichannelSamples(grid, np.ones((2, 4)))
    with pytest.raises(ValueError):
        MultichannelSamples(grid, np.array([[1.0, np.inf, 0.0]]))


def test_noise_zero_sigma_is_silent():
    noise = NoiseModel(0.0, seed=9)
    assert np.all(noise.draw((2, 5), trial=3) == 0)


def test_noise_is_reproducible_per_trial():
    noise = NoiseModel(0.7, seed=123)
    a = noise.draw((2, 6), trial=4)
    b = noise.draw((2, 6), trial=4)
    c = noise.draw((2, 6), trial=5)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)
    # real draws only
    assert a.dtype == np.float64


def test_noise_validates_inputs():
    with pytest.raises(ValueError):
        NoiseModel(-0.1, seed=0)
    with pytest.raises(ValueError):
        NoiseModel(0.1, seed=-1)
    with pytest.raises(ValueError):
        NoiseModel(0.1, seed=2**64)
    with pytest.raises(ValueError):
        NoiseModel(0.1, seed=0).draw((1,), trial=-2)


def test_noise_sample_moments():
    noise = NoiseModel(0.5, seed=77)
    draws = noise.draw(200_000, trial=0)
    assert abs(np.mean(draws)) < 5e-3
    assert np.std(draws) == pytest.approx(0.5, rel=2e-2)


def test_spectrum_json_roundtrip():
    spec = FourierSpectrum(BandIndexSet(-2, 0), np.array([1 + 2j, 0.0, -3j]))
    text = spec.to_json()
    obj = json.loads(text)
    assert obj["n_lo"] == -2
    back = FourierSpectrum.from_json(text)
    assert back.band == spec.band
    assert np.array_equal(back.coeffs, spec.coeffs)


def test_samples_json_roundtrip():
    samples = MultichannelSamples(SampleGrid(2), np.array([[1 + 1j, 2.0], [0.0, -1j]]))
    text = samples_to_json(samples, sigma=0.25)
    back, sigma = samples_from_json(text)
    assert sigma == 0.25
    assert back.grid.L == 2
    assert np.array_equal(back.values, samples.values)


def test_samples_json_header_mismatch():
    bad = json.dumps({"L": 2, "M": 2, "sigma": 0.1, "rows": [[[1, 0], [0, 0]]]})
    with pytest.raises(ValueError):
        samples_from_json(bad)
