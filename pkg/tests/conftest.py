import numpy as np
import pytest

from bellgate.analysis import ALICE_ANGLES, BOB_ANGLES, CountTable16
from bellgate.apparatus import ApparatusConfig, gate_geometry, validate_config
from bellgate.sources import joint_probabilities


@pytest.fixture
def bench():
    """Reference bench configuration (the dataclass defaults)."""
    return ApparatusConfig()


@pytest.fixture
def bench_geometry(bench):
    return gate_geometry(validate_config(bench))


def sampled_table(model, pairs_per_setting, seed, integration_time=60.0):
    """Count table drawn directly from a model's joint pass probabilities.

    Bypasses the event-level pipeline: each cell is a binomial draw of
    coincidences out of ``pairs_per_setting`` pairs.  Useful for fast
    statistical properties of the estimator itself.
    """
    rng = np.random.default_rng(seed)
    counts = np.zeros((4, 4))
    for i, alice in enumerate(ALICE_ANGLES):
        for j, bob in enumerate(BOB_ANGLES):
            p_pass_pass = joint_probabilities(model, alice, bob)[0]
            counts[i, j] = rng.binomial(pairs_per_setting, p_pass_pass)
    return CountTable16(
        counts=counts,
        accidentals=np.zeros((4, 4)),
        integration_time=integration_time,
    )
