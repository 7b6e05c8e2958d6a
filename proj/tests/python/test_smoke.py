import json

import numpy as np
import pytest

import pulsestab as ps


@pytest.fixture(scope="module")
def jinxin_profile():
    return ps.jinxin_quadrature(ps.ModelSpec.jin_xin(1.0, 0.5), 2.0, -0.5)


@pytest.fixture(scope="module")
def roll_profile():
    c = 0.7849388899
    return ps.solve_homoclinic(ps.ModelSpec.st_venant(9.0, 0.1, 2.0, 0.0), ps.WaveParams(c, 1.0 + c))


def test_equilibria_of_st_venant_wave():
    eqs = ps.find_equilibria(ps.ModelSpec.st_venant(9.0, 0.1, 2.0, 0.0), ps.WaveParams(0.7849388899, 1.7849388899))
    assert any(abs(e.tau0 - 1.0) < 1e-10 and e.classification == "SaddlePoint" for e in eqs)


def test_profile_arrays_and_round_trip(jinxin_profile, tmp_path):
    p = jinxin_profile
    assert p.x.shape == p.tau.shape
    assert abs(p.tau[0] - 1.0) < 1e-6
    path = tmp_path / "profile.json"
    p.save(path)
    q = ps.load_profile(path)
    np.testing.assert_array_equal(p.tau, q.tau)
    assert json.loads(path.read_text())["model"]["kind"] == "jin_xin"


def test_real_unstable_eigenvalue(jinxin_profile):
    scan = ps.real_axis_scan(jinxin_profile, 0.01, 1.0, 21)
    assert len(scan["roots"]) == 1
    assert 0.0 < scan["roots"][0] < 1.0


def test_evans_is_conjugate_symmetric(jinxin_profile):
    a = ps.evans(jinxin_profile, 0.3 + 0.7j)["D"]
    b = ps.evans(jinxin_profile, 0.3 - 0.7j)["D"]
    assert abs(a - b.conjugate()) <= 1e-8 * abs(a)


def test_index_parity(jinxin_profile):
    assert ps.stability_index(jinxin_profile, 50.0)["parity"] == "Odd"


def test_hf_bound_keys(roll_profile):
    hf = ps.hf_bound(roll_profile)
    assert hf["radius"] == pytest.approx(hf["R"] ** 4)
    assert 250 < hf["radius"] < 400


def test_essential_spectrum_unstable_for_roll_waves():
    m = ps.ModelSpec.st_venant(9.0, 0.1, 2.0, 0.0)
    out = ps.essential_spectrum(m, ps.WaveParams(0.7849388899, 1.7849388899), 1.0, np.linspace(-5, 5, 201))
    assert out["roots"].shape == (201, 2)
    assert not out["stable"]


def test_errors_are_typed():
    with pytest.raises(ps.DomainError):
        ps.ModelSpec.st_venant(-1.0, 0.1, 2.0, 0.0)
    assert issubclass(ps.NumericalError, ps.Error)
