import numpy as np
import pytest

import lpadp as L

# preset runs are expensive (the LTI value iterations take ~5 s each), and
# several test modules look at the same runs, so they are built once per
# session and cached by (preset name, seed)
_RUN_CACHE = {}


@pytest.fixture(scope="session")
def preset_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("preset-runs")

    def get(name, seed=1):
        key = (name, seed)
        if key not in _RUN_CACHE:
            _RUN_CACHE[key] = L.run_experiment(L.preset(name, seed=seed),
                                               out_dir=str(root))
        return _RUN_CACHE[key]

    return get


@pytest.fixture(scope="session")
def lti_buffer(preset_run):
    """Benchmark-sized LTI buffer, shared with the lti4d-pi seed-1 run."""
    return preset_run("lti4d-pi", 1).buffer


@pytest.fixture(scope="session")
def small_lti_buffer():
    plant = L.lti4d()
    cost = L.make_cost("quadratic", 4, 1)
    ss = L.SamplerSpec("uniform", 4, low=-5.0, high=5.0)
    asp = L.SamplerSpec("gaussian", 1, mean=0.0, variance=9.0)
    return L.build_buffer(plant, cost, ss, asp, 800, seed=11)


@pytest.fixture(scope="session")
def lti_family():
    return L.BasisFamily("extended_quadratic", 4, 1)


@pytest.fixture(scope="session")
def lti_dare():
    plant = L.lti4d()
    return L.solve_discounted_dare(plant.A, plant.B, np.eye(4), 1.0, 0.9)
