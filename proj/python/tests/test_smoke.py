import json
import math
import pathlib

import numpy as np
import pytest

import lyapoqs

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def fermi(beta, mu, w):
    return 1.0 / (math.exp(beta * (w - mu)) + 1.0)


def two_site(eps=0.05, mu_r=-0.3):
    h = lyapoqs.chain_hamiltonian([0.0, 0.0], [1.0])
    wb = lyapoqs.SpectralFunction.wide_band(1.0)
    baths = [lyapoqs.Bath(0, wb, beta=1.0, mu=0.4), lyapoqs.Bath(1, wb, beta=2.0, mu=mu_r)]
    return lyapoqs.System(h, baths, eps)


def test_ness_is_a_valid_correlation_matrix():
    c = two_site().ness()
    assert c.shape == (2, 2)
    assert np.allclose(c, c.conj().T, atol=1e-12)
    eig = np.linalg.eigvalsh(c)
    assert eig.min() > -1e-12 and eig.max() < 1.0 + 1e-12


def test_level_one_current_matches_weak_coupling_formula():
    sys = two_site(eps=0.02)
    expect = sum(0.02**2 / 4.0 * (fermi(1.0, 0.4, w) - fermi(2.0, -0.3, w)) for w in (-1.0, 1.0))
    assert sys.pert_current(0) == pytest.approx(expect, rel=1e-12)
    bond = sys.bond_currents(sys.ness("l1"))[0]
    assert bond == pytest.approx(expect, rel=1e-3)


def test_equilibrium_has_no_current():
    sys = two_site(mu_r=0.4)
    # Same chemical potential but different temperatures still drives a current;
    # equal baths do not.
    h = lyapoqs.chain_hamiltonian([0.0, 0.0], [1.0])
    wb = lyapoqs.SpectralFunction.wide_band(1.0)
    eq = lyapoqs.System(h, [lyapoqs.Bath(0, wb, 1.0, 0.1), lyapoqs.Bath(1, wb, 1.0, 0.1)], 0.3)
    assert abs(eq.bond_currents(eq.ness())[0]) < 1e-12
    assert abs(sys.pert_current(0)) > 1e-6


def test_dynamics_reaches_the_steady_state():
    sys = two_site(eps=0.5)
    traj = sys.dynamics([0.0, 200.0])
    assert np.allclose(traj[0], 0.0)
    assert np.abs(traj[-1] - sys.ness()).max() < 1e-8


def test_resonant_level_closed_form():
    r = lyapoqs.resonant_level(eps0=0.0, gamma_l=1.0, gamma_r=1.0, beta_l=1.0, beta_r=1.0, taus=[0.0, 1.0])
    assert r["occupation"] == pytest.approx(0.5, abs=1e-10)
    assert r["current"] == pytest.approx(0.0, abs=1e-12)
    assert r["two_time_exact"][0].real == pytest.approx(0.5, abs=1e-8)


def test_two_time_at_zero_lag_is_equal_time():
    sys = two_site(eps=0.3)
    c = sys.ness()
    vals = sys.two_time([0.0, 1.0], t=50.0, c0=c)
    assert np.abs(vals[0] - c).max() < 1e-8


def test_errors_carry_their_kind():
    sys = two_site()
    with pytest.raises(lyapoqs.LyapoqsError) as info:
        sys.two_time([0.0], level="l2")
    assert info.value.kind == "UnsupportedLevel"
    with pytest.raises(lyapoqs.LyapoqsError):
        lyapoqs.System.from_json(json.dumps({"level": "l1"}))


def test_config_and_cli(tmp_path):
    sys = lyapoqs.System.from_config(str(CONFIGS / "chain4_lorentzian.json"))
    assert sys.n_sites == 4
    assert sys.conductance(0, 3) > 0.0
    assert lyapoqs.run_cli(["ness", "--config", str(CONFIGS / "resonant_level.json"), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "ness.csv").exists()
    assert lyapoqs.run_cli(["ness", "--config", str(tmp_path / "missing.json")]) == 2
