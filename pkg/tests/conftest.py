import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from flawedqkd import DeviceModel, ProtocolProbabilities

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def probs():
    return ProtocolProbabilities()


def random_devices(seed, n, delta_max=0.3, theta_max=5e-3, mu_max=1e-4):
    """Seeded stream of small-flaw device models for invariant sweeps."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        out.append(
            DeviceModel(
                delta=float(rng.uniform(0.0, delta_max)),
                theta_hat=float(rng.uniform(0.0, theta_max)),
                theta_mode=str(rng.choice(["independent", "dependent"])),
                mu=float(rng.uniform(0.0, mu_max)),
            )
        )
    return out
