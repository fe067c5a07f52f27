import math

import pytest

import pinning


def test_two_point_contact_masses():
    law = pinning.two_point_law(16)
    assert law.u(1) == pytest.approx(0.5)
    assert law.u(2) == pytest.approx(0.75)
    assert law.u(3) == pytest.approx(0.625)


def test_dp_matches_enumeration():
    law = pinning.build_renewal(0.75, n_max=64)
    dis = pinning.DisorderLaw.gaussian()
    omega = pinning.sample_disorder(dis, 12, seed=3)
    lam = dis.lambda_(0.5)
    dp = math.exp(pinning.log_z_constrained(law, omega, 0.5, lam, 0.1, 0, 12))
    bf = pinning.brute_force_constrained(law, omega, 0.5, lam, 0.1, 0, 12)
    assert dp == pytest.approx(bf, rel=1e-12)
    dp = math.exp(pinning.log_z_free(law, omega, 0.5, lam, 0.1, 12))
    assert dp == pytest.approx(pinning.brute_force_free(law, omega, 0.5, lam, 0.1, 12), rel=1e-12)


def test_zero_coupling_free_energy_is_zero():
    law = pinning.build_renewal(0.75, n_max=256)
    est = pinning.free_energy(law, pinning.DisorderLaw.gaussian(), 0.0, 0.0, [256], 8, seed=1)
    assert est.F == 0.0


def test_homogeneous_free_energy_two_point():
    # F solves the renewal Laplace condition (e^-F + e^-2F) / 2 = e^-h.
    law = pinning.two_point_law(64)
    h = 0.3
    F = pinning.homogeneous_free_energy(law, h)
    assert 0.5 * (math.exp(-F) + math.exp(-2 * F)) == pytest.approx(math.exp(-h), rel=1e-10)


def test_psi_hat_at_zero_coupling():
    assert pinning.psi_hat(0.75, 0.0, 0.5) == pytest.approx(1.0)
    assert pinning.psi_hat_c(0.75, 0.0, 0.5) == pytest.approx(1.0)


def test_domain_error_maps_to_value_error():
    with pytest.raises(ValueError):
        pinning.build_renewal(-1.0, n_max=64)


def test_run_experiment_writes_outputs(tmp_path):
    code = pinning.run_experiment("psi", "seed = 1\npsi.delta_hat = 1\npsi.t_grid = 0.5, 1\n", tmp_path)
    assert code == 0
    assert (tmp_path / "psi.csv").exists()
    assert (tmp_path / "manifest.txt").exists()


def test_run_experiment_rejects_bad_config(tmp_path):
    with pytest.raises(ValueError, match="line 1"):
        pinning.run_experiment("psi", "seed = x\n", tmp_path)
