"""Time evolution: exact per-mode linear flow, pseudo-spectral nonlinear
flow, and the fixed-point loop that upgrades linear controls to nonlinear
ones.

Sign bookkeeping is derived once from the PDE written as

    u_t = A u - u u_x + f(x) v(t),    A = d_x^5 - d_x^3 - d_x  (canonical),

so the nonlinear spectral tendency of mode k is -(ik/2) (u^2)_k and the
linear symbol matches :mod:`kawahara_control.spectrum`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import InstabilityError
from .fields import ShapeProfile, SpectralField
from .moment import (
    ControlSignal,
    ExponentialSumControl,
    _duhamel_factor,
    assemble_reachability_problem,
    solve_min_norm,
)
from .spectrum import DispersionParams, EigenvalueSequence

BLOWUP_FACTOR = 1e6


@dataclass
class Trajectory:
    """Coefficient snapshots on a uniform time grid over [0, T]."""

    times: np.ndarray
    coeffs: np.ndarray  # shape (n_times, 2N+1), index k + N
    max_index: int
    solver: str
    step: float
    dealiased: bool = False

    def snapshot(self, i: int) -> SpectralField:
        return SpectralField(self.max_index, self.coeffs[i])

    def endpoint(self) -> SpectralField:
        return self.snapshot(len(self.times) - 1)

    def coefficient_norms(self) -> np.ndarray:
        """l2 coefficient norm at every snapshot."""
        return np.linalg.norm(self.coeffs, axis=1)


def _mode_frequencies(seq: EigenvalueSequence, N: int) -> np.ndarray:
    ks = np.arange(-N, N + 1)
    return np.array([seq[int(k)] for k in ks])


def evolve_linear(
    u0: SpectralField,
    profile: ShapeProfile | None,
    control: ControlSignal | None,
    seq: EigenvalueSequence,
    T: float,
    n_snapshots: int = 201,
) -> Trajectory:
    """Exact per-mode Duhamel evolution of the truncated linear system.

    u_k(t) = e^{lambda_k t} (u0_k + f_k * integral_0^t e^{-lambda_k s} v(s) ds);
    the inner integral is closed-form for exponential-sum controls and
    cumulative Simpson on the control's own grid otherwise.  With zero
    control the flow is an isometry of the coefficient vector.
    """
    N = u0.max_index
    if N > seq.max_index:
        raise ValueError("state truncation exceeds eigenvalue table")
    if profile is not None and profile.max_index != N:
        raise ValueError("state and profile truncations differ")
    lam = _mode_frequencies(seq, N)

    if control is None or profile is None:
        times = np.linspace(0.0, T, n_snapshots)
        coeffs = np.exp(np.multiply.outer(times, lam)) * u0.coeffs[None, :]
        return Trajectory(times, coeffs, N, "linear-exact", times[1] - times[0])

    f = profile.field.coeffs
    if isinstance(control, ExponentialSumControl):
        times = np.linspace(0.0, T, n_snapshots)
        # I_k(t) = sum_m c_m * integral_0^t e^{(lambda_m - lambda_k)s} ds
        duh = np.empty((times.size, lam.size), dtype=complex)
        for i, t in enumerate(times):
            mus = control.frequencies[None, :] - lam[:, None]
            duh[i] = _duhamel_factor(mus, float(t)) @ control.coefficients
    else:
        times = control.t_grid
        if n_snapshots > times.size:
            raise ValueError("sampled control grid too coarse for requested snapshots")
        integrand = control.values[None, :] * np.exp(
            -np.multiply.outer(lam, control.t_grid)
        )
        # cumulative_simpson casts to the dtype of `initial`; integrate the
        # real and imaginary parts separately to keep the complex phase.
        duh = (
            cumulative_simpson(integrand.real, x=control.t_grid, initial=0.0)
            + 1j * cumulative_simpson(integrand.imag, x=control.t_grid, initial=0.0)
        ).T
        stride = max(1, (times.size - 1) // max(n_snapshots - 1, 1))
        times = times[::stride]
        duh = duh[::stride]

    coeffs = np.exp(np.multiply.outer(times, lam)) * (
        u0.coeffs[None, :] + f[None, :] * duh
    )
    return Trajectory(times, coeffs, N, "linear-exact", float(times[1] - times[0]))


def free_endpoint(u0: SpectralField, seq: EigenvalueSequence, T: float) -> SpectralField:
    """Unforced linear endpoint S(T)u0: per-mode phase rotation."""
    lam = _mode_frequencies(seq, u0.max_index)
    return SpectralField(u0.max_index, np.exp(lam * T) * u0.coeffs)


class _PseudoSpectralGrid:
    """FFT workspace: symbol, dealias mask and packing for a truncation N on
    a physical grid of size M."""

    def __init__(self, N: int, M: int, params: DispersionParams, dealias: bool):
        if M < 3 * N:
            raise ValueError(f"grid_size {M} < 3*max_index {3 * N}")
        self.N, self.M = N, M
        k = np.fft.fftfreq(M, d=1.0 / M)  # integer wavenumbers
        self.ik = 1j * k
        self.symbol = 1j * k * (params.beta * k**4 + params.alpha * k**2 - params.gamma)
        if dealias:
            cutoff = M // 3
            self.mask = np.abs(k) <= cutoff
        else:
            self.mask = np.ones(M, dtype=bool)
        self.forcing_slots = np.arange(-N, N + 1) % M

    def pack(self, field: SpectralField) -> np.ndarray:
        spec = np.zeros(self.M, dtype=complex)
        spec[self.forcing_slots] = field.coeffs
        return spec

    def unpack(self, spec: np.ndarray) -> np.ndarray:
        return spec[self.forcing_slots]

    def nonlinear(self, spec: np.ndarray) -> np.ndarray:
        """Spectral tendency of -u u_x = -(1/2)(u^2)_x, dealiased."""
        u = np.fft.ifft(spec * self.mask).real
        return -0.5 * self.ik * self.mask * np.fft.fft(u * u)


def evolve_nonlinear(
    u0: SpectralField,
    profile: ShapeProfile | None,
    control: ControlSignal | None,
    T: float,
    dt: float,
    grid_size: int,
    dealias: bool = True,
    params: DispersionParams = DispersionParams(),
    n_snapshots: int = 201,
) -> Trajectory:
    """Integrating-factor RK4 pseudo-spectral evolution of the full equation.

    The exact linear propagator absorbs the stiff fifth-order symbol; RK4
    handles the quadratic term and the forcing.  Aborts with
    InstabilityError when coefficients grow beyond BLOWUP_FACTOR times their
    initial scale.
    """
    N = u0.max_index
    if profile is not None and profile.max_index != N:
        raise ValueError("state and profile truncations differ")
    grid = _PseudoSpectralGrid(N, grid_size, params, dealias)

    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("horizon T must be a multiple of dt")
    if n_snapshots < 2 or (n_steps % (n_snapshots - 1)) != 0:
        raise ValueError("n_snapshots - 1 must divide the step count")
    snap_every = n_steps // (n_snapshots - 1)

    f_spec = grid.pack(profile.field) if profile is not None else None

    def rhs(spec: np.ndarray, t: float) -> np.ndarray:
        out = grid.nonlinear(spec)
        if f_spec is not None and control is not None:
            out = out + f_spec * float(control(t))
        return out

    lam = grid.symbol
    E_half = np.exp(lam * dt / 2.0)
    E_half_inv = np.exp(-lam * dt / 2.0)
    E_full = np.exp(lam * dt)
    E_full_inv = np.exp(-lam * dt)

    spec = grid.pack(u0)
    scale0 = float(np.max(np.abs(spec))) + 1e-300
    times = np.empty(n_snapshots)
    coeffs = np.empty((n_snapshots, 2 * N + 1), dtype=complex)
    times[0] = 0.0
    coeffs[0] = grid.unpack(spec)

    t = 0.0
    for step in range(1, n_steps + 1):
        k1 = rhs(spec, t)
        k2 = E_half_inv * rhs(E_half * (spec + dt / 2.0 * k1), t + dt / 2.0)
        k3 = E_half_inv * rhs(E_half * (spec + dt / 2.0 * k2), t + dt / 2.0)
        k4 = E_full_inv * rhs(E_full * (spec + dt * k3), t + dt)
        spec = E_full * (spec + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        t = step * dt
        if float(np.max(np.abs(spec))) > BLOWUP_FACTOR * scale0:
            raise InstabilityError(
                f"coefficient blow-up at t = {t:.4f}: "
                f"max |u_k| exceeded {BLOWUP_FACTOR:.0e} x initial scale"
            )
        if step % snap_every == 0:
            i = step // snap_every
            times[i] = t
            coeffs[i] = grid.unpack(spec)

    return Trajectory(times, coeffs, N, "ifrk4", dt, dealiased=dealias)


def nonlinear_duhamel_endpoint(
    traj: Trajectory,
    seq: EigenvalueSequence,
    T: float,
    grid_size: int | None = None,
    dealias: bool = True,
) -> SpectralField:
    """Quadrature evaluation of the nonlinear Duhamel endpoint
    integral_0^T S(T - tau) (-xi xi_x)(tau) dtau from trajectory snapshots.

    Per mode the integrand e^{lambda_k (T - tau)} N_k(tau) is reduced to the
    rotating frame and integrated by composite Simpson over the snapshots;
    the snapshot density must resolve the fastest retained phase rate.
    """
    N = traj.max_index
    if traj.times.size < 3 or traj.times.size % 2 == 0:
        raise ValueError("need an odd snapshot count >= 3 for Simpson")
    M = grid_size if grid_size is not None else 4 * N
    while M < 3 * N:
        M += 1
    grid = _PseudoSpectralGrid(N, M, seq.params, dealias)
    lam = _mode_frequencies(seq, N)

    tendencies = np.empty_like(traj.coeffs)
    for i in range(traj.times.size):
        spec = np.zeros(M, dtype=complex)
        spec[grid.forcing_slots] = traj.coeffs[i]
        tendencies[i] = grid.unpack(grid.nonlinear(spec))

    tau = traj.times
    dt = tau[1] - tau[0]
    w = np.ones(tau.size)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= dt / 3.0
    # rotating frame: e^{lambda (T - tau)} = e^{lambda T} e^{-lambda tau}
    phases = np.exp(-np.multiply.outer(tau, lam))
    integral = (w[:, None] * phases * tendencies).sum(axis=0)
    end = np.exp(lam * T) * integral
    # Conjugate-symmetric analytically (real tendencies); see
    # _duhamel_endpoint_identity for why roundoff must be folded out.
    end = 0.5 * (end + np.conj(end[::-1]))
    return SpectralField(N, end)


def _duhamel_endpoint_identity(
    traj: Trajectory,
    u0: SpectralField,
    profile: ShapeProfile,
    control: ExponentialSumControl,
    seq: EigenvalueSequence,
    T: float,
) -> SpectralField:
    """Nonlinear Duhamel endpoint extracted from the evolved trajectory:
    u(T) minus the exact linear response.  Discretely consistent with the
    stepper, so the fixed-point loop converges to the stepper's own endpoint."""
    N = traj.max_index
    lam = _mode_frequencies(seq, N)
    moments = _duhamel_factor(
        control.frequencies[None, :] - lam[:, None], T
    ) @ control.coefficients
    linear_end = np.exp(lam * T) * (u0.coeffs + profile.field.coeffs * moments)
    diff = traj.coeffs[-1] - linear_end
    # The difference is conjugate-symmetric analytically (real data, real
    # forcing); enforce it so roundoff asymmetry in the tiny quadratic
    # remainder cannot trip the field constructor.
    diff = 0.5 * (diff + np.conj(diff[::-1]))
    return SpectralField(N, diff)


@dataclass
class FixedPointReport:
    iterations: int
    update_norms: list[float] = field(default_factory=list)
    endpoint_error: float = math.nan
    control_norm: float = math.nan
    converged: bool = False

    def contraction_ratios(self) -> list[float]:
        return [
            b / a for a, b in zip(self.update_norms, self.update_norms[1:]) if a > 0
        ]


def fixed_point_control(
    u0: SpectralField,
    u1: SpectralField,
    profile: ShapeProfile,
    seq: EigenvalueSequence,
    T: float,
    dt: float = 1e-3,
    grid_size: int | None = None,
    include_zero_mode: bool = True,
    tol: float = 1e-10,
    max_iterations: int = 50,
    condition_ceiling: float = 1e12,
    n_snapshots: int = 201,
    use_quadrature_endpoint: bool = False,
) -> tuple[ExponentialSumControl, Trajectory, FixedPointReport]:
    """Fixed-point iteration for local controllability of the full equation.

    Each pass solves the linear reachability moment problem with the
    previous trajectory's nonlinear Duhamel endpoint folded into the target,
    then re-evolves the nonlinear system under the new control.  Stops when
    the sup-over-snapshots coefficient distance between successive
    trajectories drops below tol.  Non-convergence returns the report with
    converged = False; instability aborts.
    """
    N = u0.max_index
    M = grid_size if grid_size is not None else 4 * N
    zeta1: SpectralField | None = None
    prev: Trajectory | None = None
    control: ExponentialSumControl | None = None
    traj: Trajectory | None = None
    report = FixedPointReport(iterations=0)

    for it in range(1, max_iterations + 1):
        problem = assemble_reachability_problem(
            u0, u1, zeta1, profile, seq, T, include_zero_mode=include_zero_mode
        )
        control = solve_min_norm(problem, condition_ceiling=condition_ceiling)
        traj = evolve_nonlinear(
            u0, profile, control, T, dt, M, dealias=True,
            params=seq.params, n_snapshots=n_snapshots,
        )
        report.iterations = it
        if use_quadrature_endpoint:
            zeta1 = nonlinear_duhamel_endpoint(traj, seq, T, grid_size=M)
        else:
            zeta1 = _duhamel_endpoint_identity(traj, u0, profile, control, seq, T)
        if prev is not None:
            update = float(
                np.max(np.linalg.norm(traj.coeffs - prev.coeffs, axis=1))
            )
            report.update_norms.append(update)
            if update <= tol:
                report.converged = True
                prev = traj
                break
        prev = traj

    assert control is not None and traj is not None
    report.endpoint_error = float(
        np.linalg.norm(traj.coeffs[-1] - u1.coeffs)
    )
    report.control_norm = control.l2_norm()
    return control, traj, report
