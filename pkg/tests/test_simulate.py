import numpy as np
import pytest

from kawahara_control.errors import InstabilityError
from kawahara_control.fields import SpectralField, gaussian_profile, l2_coeff_norm
from kawahara_control.moment import assemble_null_control_problem, solve_min_norm
from kawahara_control.simulate import (
    _duhamel_endpoint_identity,
    evolve_linear,
    evolve_nonlinear,
    fixed_point_control,
    free_endpoint,
    nonlinear_duhamel_endpoint,
)
from kawahara_control.spectrum import CANONICAL, eigenvalue_sequence

SEQ16 = eigenvalue_sequence(CANONICAL, 16)


def _state(N, amp):
    return SpectralField.from_dict(N, {1: amp, -1: amp, 2: amp / 2, -2: amp / 2})


def test_unforced_linear_flow_is_isometry():
    u0 = _state(16, 0.5)
    traj = evolve_linear(u0, None, None, SEQ16, 8.0)
    norms = traj.coefficient_norms()
    assert np.max(np.abs(norms / norms[0] - 1.0)) < 1e-13


def test_free_endpoint_matches_trajectory():
    u0 = _state(16, 0.5)
    traj = evolve_linear(u0, None, None, SEQ16, 8.0)
    end = free_endpoint(u0, SEQ16, 8.0)
    assert np.max(np.abs(end.coeffs - traj.coeffs[-1])) < 1e-15


def test_forced_linear_endpoint_matches_moment_targets():
    profile = gaussian_profile(8)
    u0 = _state(8, 0.5)
    seq = eigenvalue_sequence(CANONICAL, 8)
    prob = assemble_null_control_problem(u0, profile, seq, 8.0)
    ctrl = solve_min_norm(prob)
    traj = evolve_linear(u0, profile, ctrl, seq, 8.0)
    assert np.linalg.norm(traj.coeffs[-1]) / l2_coeff_norm(u0) < 1e-10


def test_nonlinear_conserves_mean_and_energy():
    u0 = _state(16, 0.5)
    traj = evolve_nonlinear(u0, None, None, 1.0, 1e-3, 64)
    mean_idx = 16
    assert np.max(np.abs(traj.coeffs[:, mean_idx])) == 0.0
    norms = traj.coefficient_norms()
    assert np.max(np.abs(norms / norms[0] - 1.0)) < 1e-8


def test_nonlinear_stepper_is_fourth_order():
    u0 = _state(16, 0.5)

    def endpoint(dt):
        return evolve_nonlinear(u0, None, None, 1.0, dt, 64, n_snapshots=2).coeffs[-1]

    ref = endpoint(1.0 / 16384)
    e1 = np.linalg.norm(endpoint(1.0 / 500) - ref)
    e2 = np.linalg.norm(endpoint(1.0 / 1000) - ref)
    assert 10.0 < e1 / e2 < 24.0


def test_small_amplitude_nonlinear_matches_linear():
    amp = 1e-6
    u0 = _state(16, amp)
    lin = evolve_linear(u0, None, None, SEQ16, 1.0, n_snapshots=2)
    non = evolve_nonlinear(u0, None, None, 1.0, 1e-3, 64, n_snapshots=2)
    rel = np.linalg.norm(lin.coeffs[-1] - non.coeffs[-1]) / l2_coeff_norm(u0)
    assert rel < 1e-8


def test_blowup_detection():
    u0 = SpectralField.from_dict(16, {1: 50.0, -1: 50.0})
    with pytest.raises(InstabilityError):
        evolve_nonlinear(u0, None, None, 10.0, 0.1, 64, n_snapshots=2)


def test_grid_must_support_dealiasing():
    u0 = _state(16, 0.5)
    with pytest.raises(ValueError, match="grid_size"):
        evolve_nonlinear(u0, None, None, 1.0, 1e-3, 40)


def test_duhamel_endpoint_quadrature_matches_identity_route():
    seq = eigenvalue_sequence(CANONICAL, 2)
    profile = gaussian_profile(2)
    u0 = SpectralField.from_dict(2, {1: 0.05, -1: 0.05, 2: 0.02, -2: 0.02})
    prob = assemble_null_control_problem(u0, profile, seq, 1.0)
    ctrl = solve_min_norm(prob)
    traj = evolve_nonlinear(u0, profile, ctrl, 1.0, 1e-4, 8, n_snapshots=1001)
    z_quad = nonlinear_duhamel_endpoint(traj, seq, 1.0)
    z_id = _duhamel_endpoint_identity(traj, u0, profile, ctrl, seq, 1.0)
    num = np.linalg.norm(z_quad.coeffs - z_id.coeffs)
    assert num / np.linalg.norm(z_id.coeffs) < 1e-8


def test_duhamel_quadrature_refines():
    seq = eigenvalue_sequence(CANONICAL, 2)
    profile = gaussian_profile(2)
    u0 = SpectralField.from_dict(2, {1: 0.05, -1: 0.05})
    prob = assemble_null_control_problem(u0, profile, seq, 1.0)
    ctrl = solve_min_norm(prob)

    def err(n_snapshots):
        traj = evolve_nonlinear(
            u0, profile, ctrl, 1.0, 1e-4, 8, n_snapshots=n_snapshots
        )
        z_quad = nonlinear_duhamel_endpoint(traj, seq, 1.0)
        z_id = _duhamel_endpoint_identity(traj, u0, profile, ctrl, seq, 1.0)
        return np.linalg.norm(z_quad.coeffs - z_id.coeffs)

    assert err(2001) < err(251)


def test_fixed_point_converges_and_is_deterministic():
    seq = eigenvalue_sequence(CANONICAL, 4)
    profile = gaussian_profile(4)
    u0 = SpectralField.from_dict(4, {1: 5e-3, -1: 5e-3})
    u1 = SpectralField.zero(4)
    out1 = fixed_point_control(u0, u1, profile, seq, 8.0, dt=2e-3)
    out2 = fixed_point_control(u0, u1, profile, seq, 8.0, dt=2e-3)
    ctrl1, traj1, rep1 = out1
    ctrl2, traj2, rep2 = out2
    assert rep1.converged
    assert rep1.iterations <= 10
    assert np.array_equal(ctrl1.coefficients, ctrl2.coefficients)
    assert np.array_equal(traj1.coeffs, traj2.coeffs)
    assert rep1.update_norms == rep2.update_norms
    assert np.linalg.norm(traj1.coeffs[-1]) / l2_coeff_norm(u0) < 1e-6
