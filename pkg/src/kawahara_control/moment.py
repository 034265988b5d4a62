"""Finite moment problems for the truncated linear control system.

Canonical moment form: a control v on [0, T] steers mode k as prescribed iff

    integral_0^T e^{-lambda_k s} v(s) ds = d_k.

This is the per-mode Duhamel identity divided by the unimodular factor
e^{T lambda_k}; normalizing that factor away keeps the Gram matrix
independent of the data.  Two solvers are provided: minimal-norm Gram
inversion over the nonharmonic exponentials (numerically robust reference)
and the biorthogonal-series control (certified only up to the family's
measured defect).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .biortho import BiorthogonalFamily
from .errors import ConditioningError
from .fields import ShapeProfile, SpectralField
from .spectrum import EigenvalueSequence

DEFAULT_CONDITION_CEILING = 1e12


@dataclass(frozen=True)
class MomentProblem:
    """Targets d_k for integral e^{-lambda_k s} v(s) ds = d_k, k in index_set."""

    horizon: float
    seq: EigenvalueSequence
    indices: tuple[int, ...]
    targets: dict[int, complex]

    def __post_init__(self) -> None:
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        idx = set(self.indices)
        if idx != {-k for k in idx}:
            raise ValueError("index set must be closed under negation")
        scale = max((abs(v) for v in self.targets.values()), default=0.0)
        for k in self.indices:
            d = self.targets[k]
            if abs(d - np.conj(self.targets[-k])) > 1e-12 * max(scale, 1.0):
                raise ValueError("targets violate conjugate symmetry")

    @property
    def frequencies(self) -> np.ndarray:
        """lambda_k in index order."""
        return np.array([self.seq[k] for k in self.indices])

    @property
    def target_vector(self) -> np.ndarray:
        return np.array([self.targets[k] for k in self.indices])


@dataclass(frozen=True)
class ExponentialSumControl:
    """v(s) = sum_k c_k e^{lambda_k s}; real-valued when the coefficients are
    conjugate-symmetric over a negation-closed index set."""

    horizon: float
    frequencies: np.ndarray  # lambda_k
    coefficients: np.ndarray

    def __call__(self, t: np.ndarray | float) -> np.ndarray | float:
        t = np.asarray(t, dtype=float)
        vals = np.real(np.exp(np.multiply.outer(t, self.frequencies)) @ self.coefficients)
        return vals if vals.ndim else float(vals)

    def l2_norm(self) -> float:
        """Exact L2(0, T) norm via the closed-form Gram pairing."""
        G = _gram(self.frequencies, self.horizon)
        c = self.coefficients
        return float(np.sqrt(np.real(np.conj(c) @ G @ c)))


@dataclass(frozen=True)
class SampledControl:
    """Real control samples on a uniform grid over [0, T], tagged with the
    quadrature rule used for its inner products (reproducibility contract)."""

    horizon: float
    t_grid: np.ndarray
    values: np.ndarray
    quadrature: str = "trapezoid"

    def __post_init__(self) -> None:
        if self.t_grid.shape != self.values.shape:
            raise ValueError("grid and values have mismatched shapes")
        if self.quadrature not in ("trapezoid", "simpson"):
            raise ValueError(f"unknown quadrature rule {self.quadrature!r}")

    def __call__(self, t: np.ndarray | float) -> np.ndarray | float:
        spline = CubicSpline(self.t_grid, self.values)
        out = spline(np.asarray(t, dtype=float))
        return out if np.ndim(out) else float(out)

    def weights(self) -> np.ndarray:
        dt = self.t_grid[1] - self.t_grid[0]
        n = self.t_grid.size
        if self.quadrature == "simpson":
            if n % 2 == 0:
                raise ValueError("simpson rule needs an odd sample count")
            w = np.ones(n)
            w[1:-1:2] = 4.0
            w[2:-1:2] = 2.0
            return w * dt / 3.0
        w = np.full(n, dt)
        w[0] = w[-1] = dt / 2.0
        return w

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights() * self.values**2)))


ControlSignal = ExponentialSumControl | SampledControl


def _duhamel_factor(mu: np.ndarray, T: float) -> np.ndarray:
    """integral_0^T e^{mu s} ds elementwise: T at mu = 0, else (e^{mu T}-1)/mu."""
    mu = np.asarray(mu, dtype=complex)
    out = np.full(mu.shape, complex(T))
    nz = mu != 0
    out[nz] = (np.exp(mu[nz] * T) - 1.0) / mu[nz]
    return out


def _gram(freqs: np.ndarray, T: float) -> np.ndarray:
    lam = np.asarray(freqs, dtype=complex)
    diff = lam[None, :] - lam[:, None]  # lambda_m - lambda_n
    return _duhamel_factor(diff, T)


def assemble_null_control_problem(
    u0: SpectralField,
    profile: ShapeProfile,
    seq: EigenvalueSequence,
    T: float,
    include_zero_mode: bool = True,
) -> MomentProblem:
    """Moment targets d_k = -u0_k / f_k for steering the truncated linear
    system to zero at time T."""
    if profile.max_index != u0.max_index:
        raise ValueError("state and profile truncations differ")
    if u0.max_index > seq.max_index:
        raise ValueError("state truncation exceeds eigenvalue table")
    indices = [k for k in range(-u0.max_index, u0.max_index + 1)
               if include_zero_mode or k != 0]
    targets = {k: -u0[k] / profile[k] for k in indices}
    return MomentProblem(horizon=float(T), seq=seq, indices=tuple(indices),
                         targets=targets)


def assemble_reachability_problem(
    u0: SpectralField,
    u1: SpectralField,
    extra_source_endstate: SpectralField | None,
    profile: ShapeProfile,
    seq: EigenvalueSequence,
    T: float,
    include_zero_mode: bool = True,
) -> MomentProblem:
    """Moment targets for hitting u1 at time T given free endpoint S(T)u0 and
    a supplied extra Duhamel endpoint (the nonlinear feedback term).

    Per mode the forced Duhamel response must equal
    u1_k - e^{lambda_k T} u0_k - z_k, so in canonical form
    d_k = (u1_k - e^{lambda_k T} u0_k - z_k) * e^{-lambda_k T} / f_k.
    Reduces to the null-control problem when u1 = 0 and z = 0.
    """
    N = u0.max_index
    if u1.max_index != N or profile.max_index != N:
        raise ValueError("state and profile truncations differ")
    if extra_source_endstate is not None and extra_source_endstate.max_index != N:
        raise ValueError("extra source endpoint truncation differs")
    indices = [k for k in range(-N, N + 1) if include_zero_mode or k != 0]
    targets: dict[int, complex] = {}
    for k in indices:
        lam = seq[k]
        z = extra_source_endstate[k] if extra_source_endstate is not None else 0.0
        targets[k] = (u1[k] - np.exp(lam * T) * u0[k] - z) * np.exp(-lam * T) / profile[k]
    return MomentProblem(horizon=float(T), seq=seq, indices=tuple(indices),
                         targets=targets)


def gram_matrix(problem: MomentProblem) -> np.ndarray:
    """Hermitian Gram matrix G[n, m] = integral_0^T e^{(lambda_m - lambda_n) s} ds."""
    lam = problem.frequencies
    for i in range(lam.size):
        for j in range(i + 1, lam.size):
            if lam[i] == lam[j]:
                raise ValueError(
                    "repeated frequencies; merge collision classes before assembling"
                )
    return _gram(lam, problem.horizon)


def solve_min_norm(
    problem: MomentProblem,
    condition_ceiling: float = DEFAULT_CONDITION_CEILING,
) -> ExponentialSumControl:
    """Minimal-L2-norm control v(s) = sum_k c_k e^{lambda_k s} with G c = d.

    Refuses (ConditioningError) rather than returning garbage when the Gram
    matrix condition number exceeds the ceiling.
    """
    G = gram_matrix(problem)
    cond = float(np.linalg.cond(G))
    if cond > condition_ceiling:
        raise ConditioningError(
            f"Gram condition number {cond:.3e} exceeds ceiling {condition_ceiling:.1e}"
        )
    c = np.linalg.solve(G, problem.target_vector)
    return ExponentialSumControl(
        horizon=problem.horizon, frequencies=problem.frequencies, coefficients=c
    )


def solve_biortho_series(
    problem: MomentProblem, family: BiorthogonalFamily
) -> SampledControl:
    """Series control built from the biorthogonal family.

    For the nonzero modes, v(t) = sum_m w_m zeta_m(t - T/2) with
    w_m = d_{-m} e^{-lambda_m T/2}, derived from the family's verified
    pairing integral zeta_m(t) e^{lambda_n t} dt = delta_{mn}; the weights
    carry the index reflection that converts that pairing into the canonical
    moment orientation.

    The family is indexed over the nonzero integers, so the zero mode
    (constant-in-time kernel) is handled directly here: a constant corrector
    c is added and the coupled linear system is solved in closed form.  The
    constant shifts the mode-n moment by q_n = (1 - e^{-lambda_n T})/lambda_n,
    so w_m = (d_{-m} - c q_{-m}) e^{-lambda_m T/2}, while each series term
    shifts the zero-mode moment by p_m = integral zeta_m (measured with the
    family's own trapezoid rule).  Substituting the corrected weights into
    the zero-mode equation sum_m w_m p_m + c T = d_0 leaves one scalar
    linear equation for c.

    Certified only up to the family's biorthogonality defect.
    """
    T = problem.horizon
    if abs(family.horizon - T) > 1e-12:
        raise ValueError(
            f"family horizon {family.horizon} does not match problem horizon {T}"
        )
    fam_set = set(family.indices)
    needed = sorted(k for k in problem.indices if k != 0)
    if not set(needed) <= fam_set:
        raise ValueError("family index set does not cover the problem indices")

    tau = family.zeta_grid  # [-T/2, T/2]
    dt = tau[1] - tau[0]
    trap = np.full(tau.size, dt)
    trap[0] = trap[-1] = dt / 2.0

    c = 0.0 + 0.0j
    if 0 in problem.indices:
        lam = np.array([problem.seq[m] for m in needed])
        d_refl = np.array([problem.targets[-m] for m in needed])
        q_refl = (1.0 - np.exp(lam * T)) / (-lam)  # q_{-m} since lambda_{-m} = -lambda_m
        decay = np.exp(-lam * T / 2.0)
        p = np.array([np.sum(trap * family.zeta[m]) for m in needed])
        denom = T - np.sum(q_refl * decay * p)
        c = (problem.targets[0] - np.sum(d_refl * decay * p)) / denom

    vals = np.full(tau.size, c, dtype=complex)
    for m in needed:
        lam_m = problem.seq[m]
        q_neg = (1.0 - np.exp(lam_m * T)) / (-lam_m) if 0 in problem.indices else 0.0
        w = (problem.targets[-m] - c * q_neg) * np.exp(-lam_m * T / 2.0)
        vals += w * family.zeta[m]
    t_grid = tau + T / 2.0
    return SampledControl(horizon=T, t_grid=t_grid, values=np.real(vals))


def moment_residual(
    problem: MomentProblem, control: ControlSignal
) -> dict[int, complex]:
    """Per-mode residual of integral e^{-lambda_k s} v(s) ds - d_k.

    Closed-form for exponential-sum controls; the signal's own quadrature
    rule for sampled controls.
    """
    res: dict[int, complex] = {}
    lam = problem.frequencies
    if isinstance(control, ExponentialSumControl):
        for k, lk in zip(problem.indices, lam):
            mus = control.frequencies - lk
            val = complex(_duhamel_factor(mus, problem.horizon) @ control.coefficients)
            res[k] = val - problem.targets[k]
    else:
        w = control.weights()
        for k, lk in zip(problem.indices, lam):
            val = complex(np.sum(w * control.values * np.exp(-lk * control.t_grid)))
            res[k] = val - problem.targets[k]
    return res


def moment_residual_richardson(
    problem: MomentProblem, control: SampledControl
) -> dict[int, float]:
    """Quadrature error estimate for sampled controls: difference between the
    full-grid and every-other-point evaluations of each moment."""
    coarse = SampledControl(
        horizon=control.horizon,
        t_grid=control.t_grid[::2],
        values=control.values[::2],
        quadrature=control.quadrature,
    )
    fine = moment_residual(problem, control)
    rough = moment_residual(problem, coarse)
    return {k: abs(fine[k] - rough[k]) for k in problem.indices}


def moment_residual_quadrature(
    problem: MomentProblem, control: ControlSignal, n_nodes: int = 10_001
) -> dict[int, complex]:
    """Independent oracle: evaluate each moment by composite Simpson on a
    fresh uniform grid, regardless of the control representation."""
    if n_nodes % 2 == 0:
        n_nodes += 1
    t = np.linspace(0.0, problem.horizon, n_nodes)
    dt = t[1] - t[0]
    w = np.ones(n_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= dt / 3.0
    v = np.asarray(control(t), dtype=float)
    return {
        k: complex(np.sum(w * v * np.exp(-problem.seq[k] * t))) - problem.targets[k]
        for k in problem.indices
    }
