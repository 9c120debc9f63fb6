import numpy as np
import pytest

import lpadp as L


def _tiny_setup():
    plant = L.lti4d()
    cost = L.make_cost("quadratic", 4, 1)
    ss = L.SamplerSpec("uniform", 4, low=-5.0, high=5.0)
    asp = L.SamplerSpec("gaussian", 1, mean=0.0, variance=9.0)
    return plant, cost, ss, asp


def test_build_is_bitwise_deterministic_by_seed():
    plant, cost, ss, asp = _tiny_setup()
    b1 = L.build_buffer(plant, cost, ss, asp, 200, seed=42)
    b2 = L.build_buffer(plant, cost, ss, asp, 200, seed=42)
    b3 = L.build_buffer(plant, cost, ss, asp, 200, seed=43)
    assert np.array_equal(b1.x, b2.x) and np.array_equal(b1.l, b2.l)
    assert not np.array_equal(b1.x, b3.x)


def test_successors_and_costs_are_exact():
    plant, cost, ss, asp = _tiny_setup()
    buf = L.build_buffer(plant, cost, ss, asp, 150, seed=0)
    assert np.array_equal(buf.y, plant.step(buf.x, buf.a))
    assert np.array_equal(buf.l, cost.eval(buf.x, buf.a))
    assert buf.resample_count == 0


def test_benchmark_buffer_distribution(lti_buffer):
    st = lti_buffer.stats()
    assert len(lti_buffer) == 7000
    assert np.all(np.abs(st["x_mean"]) < 0.2)
    assert np.all(np.abs(st["a_mean"]) < 0.2)
    # uniform(-5, 5) variance 25/3, gaussian variance 9
    assert np.all(np.abs(st["x_var"] / (25 / 3) - 1) < 0.1)
    assert np.all(np.abs(st["a_var"] / 9 - 1) < 0.1)
    assert st["l_min"] >= 0.0


def test_buffer_arrays_are_immutable():
    plant, cost, ss, asp = _tiny_setup()
    buf = L.build_buffer(plant, cost, ss, asp, 10, seed=1)
    with pytest.raises(ValueError):
        buf.x[0, 0] = 99.0
    with pytest.raises(ValueError):
        buf.l[0] = -1.0


def test_csv_round_trip_is_bitwise(tmp_path):
    plant, cost, ss, asp = _tiny_setup()
    buf = L.build_buffer(plant, cost, ss, asp, 120, seed=7)
    path = tmp_path / "buffer.csv"
    L.save_buffer(buf, path)
    back = L.load_buffer(path)
    for field in ("x", "a", "y", "l"):
        assert np.array_equal(getattr(back, field), getattr(buf, field))
    assert back.seed == 7
    assert back.resample_count == 0
    assert back.state_sampler == ss
    assert back.action_sampler == asp


def _write(tmp_path, text, name="bad.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_reports_bad_metadata_line(tmp_path):
    p = _write(tmp_path, "# {not json\nindex,x1,a1,y1,l\n0,1,2,3,4\n")
    with pytest.raises(ValueError, match="line 1: bad metadata JSON"):
        L.load_buffer(p)


def test_load_reports_bad_header(tmp_path):
    p = _write(tmp_path, "index,x1,u1,y1,l\n0,1,2,3,4\n")
    with pytest.raises(ValueError, match=r"bad header .* expected .index,x1\.\.xn"):
        L.load_buffer(p)


def test_load_reports_wrong_column_count(tmp_path):
    p = _write(tmp_path, "index,x1,a1,y1,l\n0,1,2,3,4\n1,1,2,3\n")
    with pytest.raises(ValueError, match="line 3: expected 5 columns, got 4"):
        L.load_buffer(p)


def test_load_reports_non_numeric_field(tmp_path):
    p = _write(tmp_path, "index,x1,a1,y1,l\n0,1,2,3,4\n1,1,oops,3,4\n")
    with pytest.raises(ValueError, match="line 3: non-numeric field"):
        L.load_buffer(p)


def test_load_rejects_empty_and_headerless(tmp_path):
    with pytest.raises(ValueError, match="empty buffer file"):
        L.load_buffer(_write(tmp_path, "", "empty.csv"))
    with pytest.raises(ValueError, match="missing header line"):
        L.load_buffer(_write(tmp_path, "# {}\n", "meta_only.csv"))
    with pytest.raises(ValueError, match="no data rows"):
        L.load_buffer(_write(tmp_path, "index,x1,a1,y1,l\n", "no_rows.csv"))


def test_nonfinite_transitions_are_redrawn():
    # blows up on half the state space; redraws must land in the finite half
    def step_fn(X, U):
        Y = X + U
        Y[X[:, 0] > 0, :] = np.nan
        return Y

    plant = L.Plant(1, 1, step_fn)
    cost = L.make_cost("quadratic", 1, 1)
    ss = L.SamplerSpec("uniform", 1, low=-1.0, high=1.0)
    asp = L.SamplerSpec("gaussian", 1, mean=0.0, variance=1.0)
    with pytest.warns(UserWarning, match="redrawn"):
        buf = L.build_buffer(plant, cost, ss, asp, 400, seed=5)
    assert buf.resample_count > 0
    assert np.isfinite(buf.y).all()
    assert np.all(buf.x[:, 0] <= 0)


def test_always_nonfinite_plant_aborts():
    plant = L.Plant(1, 1, lambda X, U: np.full_like(X, np.nan))
    cost = L.make_cost("quadratic", 1, 1)
    ss = L.SamplerSpec("uniform", 1, low=-1.0, high=1.0)
    asp = L.SamplerSpec("gaussian", 1, mean=0.0, variance=1.0)
    with pytest.raises(L.BufferSamplingError, match="redraws"):
        L.build_buffer(plant, cost, ss, asp, 50, seed=5)


def test_sampler_spec_validation():
    with pytest.raises(ValueError, match="low < high"):
        L.SamplerSpec("uniform", 2, low=1.0, high=-1.0)
    with pytest.raises(ValueError, match="positive variance"):
        L.SamplerSpec("gaussian", 2, mean=0.0, variance=0.0)
    with pytest.raises(ValueError, match="unknown sampler kind"):
        L.SamplerSpec("poisson", 2)
    with pytest.raises(ValueError, match="dim must be positive"):
        L.SamplerSpec("uniform", 0, low=0.0, high=1.0)
    spec = L.SamplerSpec("gaussian", 3, mean=1.0, variance=4.0)
    assert L.SamplerSpec.from_dict(spec.to_dict()) == spec


def test_sampler_plant_dimension_mismatch():
    plant, cost, _, asp = _tiny_setup()
    wrong = L.SamplerSpec("uniform", 3, low=-5.0, high=5.0)
    with pytest.raises(ValueError, match="sampler dimensions"):
        L.build_buffer(plant, cost, wrong, asp, 10, seed=0)


def test_buffer_shape_validation():
    with pytest.raises(ValueError, match="disagree on length"):
        L.ReplayBuffer(np.zeros((3, 2)), np.zeros((2, 1)), np.zeros((3, 2)), np.zeros(3))
    with pytest.raises(ValueError, match="successor dimension"):
        L.ReplayBuffer(np.zeros((3, 2)), np.zeros((3, 1)), np.zeros((3, 4)), np.zeros(3))
