import numpy as np
import pytest

from mcrecon import BandIndexSet, Channel, ChannelBank, FourierSpectrum


def random_kernel_bank(seed: int, M: int, L: int) -> tuple[ChannelBank, BandIndexSet]:
    """A well-conditioned random custom scheme over the centered band.

    Retries until every frequency-class channel matrix has condition below
    100, so tests exercising the generic path never trip the rejection.
    """
    band = BandIndexSet.centered(L * M)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        tables = rng.normal(size=(M, band.size)) + 1j * rng.normal(size=(M, band.size))
        channels = tuple(Channel("kernel", FourierSpectrum(band, row)) for row in tables)
        bank = ChannelBank(channels)
        resp = bank.response_matrix(band.indices()).reshape(M, M, L)
        conds = np.linalg.cond(resp.transpose(2, 1, 0))
        if np.all(conds < 100):
            return bank, band
    raise AssertionError("could not draw a well-conditioned bank")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
