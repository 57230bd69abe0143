import numpy as np
import pytest

from causalpipe import scm
from causalpipe.effects import CausalModelSpec


@pytest.fixture(scope="session")
def reference_table():
    """Confounded cohort sample shared by the estimator tests."""
    return scm.generate(scm.reference_scm(), 20_000, seed=11)


@pytest.fixture(scope="session")
def reference_model():
    return CausalModelSpec(treatment="SYSBP", outcome="CHD", adjustment=("AGE", "BMI"))


@pytest.fixture(scope="session")
def null_effect_table():
    return scm.generate(scm.reference_scm(treatment_effect=0.0), 10_000, seed=12)


def make_rng(seed):
    return np.random.default_rng(seed)
