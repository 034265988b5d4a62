"""Explicit biorthogonal family to the exponentials e^{lambda_n t}.

Construction chain, per nonzero index m:

  P_m   truncated Weierstrass product over the eigenvalue nodes; a real
        polynomial on the real axis with P_m(i*lambda_n) = delta_{mn} for
        every n retained by the truncation (algebraically exact).
  M_m   truncated product of sinc(z/n^2), n = m^3..N_M; bounded by 1 on the
        real axis inside |x| <= m^6 and decaying like exp(m^6 - |x|) beyond,
        which makes P_m * M_m^p integrable.
  Psi_m P_m(x) * (M_|m|(x)/M_|m|(i*lambda_m))^p * sinc(delta*(x - i*lambda_m));
        entire of finite exponential type, equal to delta_{mn} at the nodes.
  Theta_m = (1/2pi) * integral Psi_m(x) e^{itx} dx; compactly supported in
        time because Psi_m is square-integrable of finite exponential type.
  zeta_m  convolution of Theta_m with a modulated triangle kernel rho_m,
        normalized so the pairing integral against e^{lambda_m t} is 1;
        supported on [-T/2, T/2] with T/2 = Ttilde/2 + a.

Fourier convention throughout: g_hat(xi) = (1/2pi) * integral g(t) e^{-i xi t} dt,
so integral zeta_m(t) e^{lambda_n t} dt = 2pi * zeta_hat_m(i*lambda_n).

The family satisfies integral zeta_m(t) e^{lambda_n t} dt = delta_{mn} as
displayed in the construction it follows; note this pairs index m with the
exponential of index n directly (no sign reflection is applied here — the
moment solver accounts for the orientation when it assembles a control).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectrum import EigenvalueSequence, has_collisions

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BiorthoParams:
    """Construction and quadrature budget for the biorthogonal family.

    The exponent on the multiplier factor is analytically some fixed real
    constant; here it is an integer power ``multiplier_power`` (default 1),
    which already makes the truncated product integrable, and the tail check
    in :func:`theta` verifies that a posteriori.
    """

    product_truncation: int = 8        # node cutoff N_P of the Weierstrass product
    multiplier_truncation: int = 48    # factor cutoff N_M of the sinc product
    multiplier_power: int = 1
    delta_window: float = 1.0
    kernel_halfwidth: float = 1.0      # a
    support_halfwidth: float = 3.0     # Ttilde/2
    quad_cutoff: float | None = None   # X_max; None selects it adaptively
    quad_points_per_unit: float = 6.0
    tail_tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.product_truncation < 1:
            raise ValueError("product_truncation must be >= 1")
        if self.multiplier_power < 1:
            raise ValueError("multiplier_power must be >= 1")
        if self.delta_window <= 0 or self.kernel_halfwidth <= 0:
            raise ValueError("delta_window and kernel_halfwidth must be positive")
        if self.support_halfwidth <= 0:
            raise ValueError("support_halfwidth must be positive")
        if self.quad_points_per_unit <= 0:
            raise ValueError("quad_points_per_unit must be positive")
        if self.horizon <= _TWO_PI:
            raise ValueError(
                f"family horizon T = {self.horizon:.4f} must exceed 2*pi; "
                "increase support_halfwidth or kernel_halfwidth"
            )

    @property
    def horizon(self) -> float:
        """Final support length T = Ttilde + 2a of the smoothed family."""
        return 2.0 * (self.support_halfwidth + self.kernel_halfwidth)


def _node(seq: EigenvalueSequence, n: int) -> float:
    """Real evaluation point i*lambda_n of the entire functions."""
    return float((1j * seq[n]).real)


def weierstrass_P(
    m: int, z: np.ndarray | complex, seq: EigenvalueSequence, N_P: int
) -> np.ndarray | complex:
    """Truncated Weierstrass interpolation product.

    Product over n in [-N_P, N_P] \\ {0, m} of
    (1 + i*z/lambda_n) * (lambda_n / (lambda_n - lambda_m)).
    The truncated product still satisfies P_m(i*lambda_n) = delta_{mn}
    exactly at every retained node.
    """
    if m == 0:
        raise ValueError("index m must be nonzero")
    if not (abs(m) <= N_P <= seq.max_index):
        raise ValueError(f"need |m| <= N_P <= seq.max_index, got m={m}, N_P={N_P}")
    if has_collisions(seq.params, N_P):
        raise ValueError("eigenvalue collisions on the truncation; merge classes first")
    z = np.asarray(z)
    nu_m = seq.frequency(m)
    out = np.ones_like(z, dtype=complex)
    for n in range(-N_P, N_P + 1):
        if n == 0 or n == m:
            continue
        nu_n = seq.frequency(n)
        # (1 + z/nu_n) * (nu_n/(nu_n - nu_m)) collapsed into one quotient:
        # the numerator nu_n + z is then *exactly* zero at the retained
        # nodes, whereas the complex division z/nu_n rounds by half an ulp
        # and the product magnitude can amplify that to O(1).
        out = out * ((nu_n + z) / (nu_n - nu_m))
    return out if out.ndim else complex(out)


def weierstrass_last_factor_deviation(
    m: int, x: float, seq: EigenvalueSequence, N_P: int
) -> float:
    """|1 + x/nu_{N_P}| deviation from 1: proxy for the neglected product tail."""
    nu = seq.frequency(N_P)
    return abs(abs(1.0 + x / nu) - 1.0)


def _sinc(w: np.ndarray) -> np.ndarray:
    """sin(w)/w extended by 1 at w = 0, for real or complex w."""
    w = np.asarray(w, dtype=complex)
    out = np.ones_like(w)
    nz = w != 0
    out[nz] = np.sin(w[nz]) / w[nz]
    return out


def multiplier_M(
    m: int, z: np.ndarray | complex, N_M: int
) -> np.ndarray | complex:
    """Truncated decay multiplier: product of sinc(z/n^2) for n = m^3..N_M."""
    if m < 1:
        raise ValueError("index m must be >= 1")
    if N_M < m**3:
        raise ValueError(f"multiplier truncation N_M={N_M} below start index m^3={m**3}")
    z = np.asarray(z)
    out = np.ones_like(z, dtype=complex)
    for n in range(m**3, N_M + 1):
        out = out * _sinc(z / float(n) ** 2)
    return out if out.ndim else complex(out)


def multiplier_tail_log_bound(z_abs: float, N_M: int) -> float:
    """Bound on |log of the neglected tail|: |z|^2/6 * sum_{n>N_M} n^-4."""
    tail = sum(1.0 / n**4 for n in range(N_M + 1, N_M + 2001)) + 1.0 / (
        3.0 * (N_M + 2000) ** 3
    )
    return z_abs**2 / 6.0 * tail


def psi(
    m: int,
    x: np.ndarray | float,
    seq: EigenvalueSequence,
    params: BiorthoParams,
) -> np.ndarray | complex:
    """Windowed interpolation function Psi_m evaluated on the real axis.

    Psi_m(x) = P_m(x) * (M_|m|(x)/M_|m|(i*lambda_m))^p
             * sinc(delta*(x - i*lambda_m)).
    The extra factors equal 1 at x = i*lambda_m, so the node values
    Psi_m(i*lambda_n) = delta_{mn} are inherited from P_m.
    """
    if m == 0:
        raise ValueError("index m must be nonzero")
    x = np.asarray(x, dtype=float)
    node_m = _node(seq, m)
    p = params.multiplier_power
    P = weierstrass_P(m, x, seq, params.product_truncation)
    M = multiplier_M(abs(m), x, params.multiplier_truncation)
    M0 = multiplier_M(abs(m), node_m, params.multiplier_truncation)
    window = _sinc(params.delta_window * (x - node_m))
    out = P * (M / M0) ** p * window
    return out if out.ndim else complex(out)


def psi_exponential_type(m: int, params: BiorthoParams) -> float:
    """Exponential type of the truncated Psi_m (product truncation of P_m
    makes it a polynomial, so only the sinc factors contribute)."""
    sinc_type = sum(
        1.0 / n**2 for n in range(abs(m) ** 3, params.multiplier_truncation + 1)
    )
    return params.multiplier_power * sinc_type + params.delta_window


def _adaptive_cutoff(
    m: int, seq: EigenvalueSequence, params: BiorthoParams
) -> float:
    """Smallest |x| beyond which |Psi_m| stays under tail_tol on both sides
    of the axis (Psi_m is not even: its window is centered at i*lambda_m)."""
    x_probe = np.arange(0.25, 4000.0, 0.25)
    vals = np.maximum(
        np.abs(psi(m, x_probe, seq, params)),
        np.abs(psi(m, -x_probe, seq, params)),
    )
    above = np.nonzero(vals >= params.tail_tol)[0]
    if above.size and above[-1] == vals.size - 1:
        raise ValueError(
            "Psi does not decay below tail tolerance within the scan range; "
            "increase multiplier_truncation or multiplier_power"
        )
    x_max = float(x_probe[above[-1]] + 0.25) if above.size else 1.0
    return x_max


@dataclass
class IndexDiagnostics:
    """Per-index quadrature budget and error proxies."""

    x_max: float
    n_quad_nodes: int
    psi_at_cutoff: float
    multiplier_tail_log_bound: float
    product_tail_deviation: float
    theta_l2: float = math.nan
    zeta_l2: float = math.nan


def theta(
    m: int,
    t_grid: np.ndarray,
    seq: EigenvalueSequence,
    params: BiorthoParams,
) -> tuple[np.ndarray, IndexDiagnostics]:
    """Sampled Theta_m(t) = (1/2pi) * integral of Psi_m(x) e^{itx} dx.

    The integral is truncated at +-X_max (adaptive unless params pin it) and
    evaluated by composite Simpson; the node count scales with the largest
    phase rate |t|*X_max, per the quadrature budget in params.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    slack = params.kernel_halfwidth
    half = params.support_halfwidth
    if np.max(np.abs(t_grid)) > half + slack + 1e-12:
        raise ValueError("theta grid extends beyond the declared support window")

    if params.quad_cutoff is None:
        x_max = _adaptive_cutoff(m, seq, params)
    else:
        x_max = float(params.quad_cutoff)
        edge = max(
            abs(complex(psi(m, x_max, seq, params))),
            abs(complex(psi(m, -x_max, seq, params))),
        )
        if edge > params.tail_tol:
            raise ValueError(
                f"|Psi_m({x_max})| = {edge:.3e} exceeds tail tolerance "
                f"{params.tail_tol:.1e}; increase quad_cutoff"
            )

    t_max = float(np.max(np.abs(t_grid)))
    n_nodes = int(math.ceil(params.quad_points_per_unit * (1.0 + t_max * x_max / _TWO_PI)))
    if n_nodes % 2 == 0:
        n_nodes += 1
    n_nodes = max(n_nodes, 5)
    x = np.linspace(-x_max, x_max, n_nodes)
    h = x[1] - x[0]
    # Composite trapezoid, not Simpson: Theta has compact support, so the
    # trapezoid sum of Psi(x) e^{itx} is exact (Poisson summation) once
    # 2*pi/h clears the support width, whereas Simpson's embedded coarse
    # grid aliases at twice the step.  Endpoint terms are below tail_tol.
    w = np.full(n_nodes, h)
    w[0] = w[-1] = h / 2.0

    psi_w = np.asarray(psi(m, x, seq, params)) * w
    vals = np.empty(t_grid.size, dtype=complex)
    chunk = max(1, int(2e6 // n_nodes))
    for i in range(0, t_grid.size, chunk):
        ts = t_grid[i : i + chunk]
        vals[i : i + chunk] = (np.exp(1j * np.outer(ts, x)) @ psi_w) / _TWO_PI

    diag = IndexDiagnostics(
        x_max=x_max,
        n_quad_nodes=n_nodes,
        psi_at_cutoff=max(
            abs(complex(psi(m, x_max, seq, params))),
            abs(complex(psi(m, -x_max, seq, params))),
        ),
        multiplier_tail_log_bound=multiplier_tail_log_bound(
            x_max, params.multiplier_truncation
        ),
        product_tail_deviation=weierstrass_last_factor_deviation(
            m, x_max, seq, params.product_truncation
        ),
    )
    dt = float(t_grid[1] - t_grid[0]) if t_grid.size > 1 else 0.0
    diag.theta_l2 = float(np.sqrt(np.sum(np.abs(vals) ** 2) * dt))
    return vals, diag


def smoothing_kernel(a: float, x: np.ndarray | float) -> np.ndarray | float:
    """Triangle kernel kappa_a(x) = sqrt(2pi)/a^2 * (a - |x|)_+, the
    autoconvolution of the indicator of [-a/2, a/2] up to normalization."""
    if a <= 0:
        raise ValueError("kernel halfwidth a must be positive")
    x = np.asarray(x, dtype=float)
    out = math.sqrt(_TWO_PI) / a**2 * np.maximum(a - np.abs(x), 0.0)
    return out if out.ndim else float(out)


def kappa_hat(a: float, xi: np.ndarray | float) -> np.ndarray | float:
    """Unitary-convention transform of the triangle kernel:
    (4/a^2) * sin^2(a*xi/2) / xi^2, with kappa_hat(a, 0) = 1."""
    if a <= 0:
        raise ValueError("kernel halfwidth a must be positive")
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    nz = xi != 0
    out[nz] = 4.0 / a**2 * np.sin(a * xi[nz] / 2.0) ** 2 / xi[nz] ** 2
    out[~nz] = 1.0
    return out if out.ndim else float(out)


def zeta(
    m: int,
    seq: EigenvalueSequence,
    params: BiorthoParams,
    theta_grid: np.ndarray,
    theta_vals: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Smoothed biorthogonal function zeta_m on [-T/2, T/2].

    Convolves the sampled Theta_m with rho_m(x) = e^{-x*lambda_m} kappa_a(x)
    and normalizes by the kernel transform at the matched frequency, which
    equals kappa_hat(a, 0); the modulation sign is chosen so that this
    normalizer is the kernel's peak value (an order-one number) rather than
    a far sidelobe, keeping the construction well conditioned.  Returns
    (t_grid, values).
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    theta_vals = np.asarray(theta_vals, dtype=complex)
    if theta_grid.shape != theta_vals.shape:
        raise ValueError("theta grid and samples have mismatched shapes")
    dt = theta_grid[1] - theta_grid[0]
    a = params.kernel_halfwidth
    n_k = int(round(a / dt))
    if abs(n_k * dt - a) > 1e-9 * a:
        raise ValueError("kernel halfwidth must be a multiple of the grid step")
    x_k = np.arange(-n_k, n_k + 1) * dt
    lam = seq[m]
    rho = np.exp(-x_k * lam) * smoothing_kernel(a, x_k)
    # our-convention rho_hat at the matched frequency is kappa_hat(0)/sqrt(2pi)
    # = 1/sqrt(2pi); together with the 1/(2pi) convolution prefactor the
    # normalization collapses to 1/sqrt(2pi).
    vals = np.convolve(theta_vals, rho) * dt / math.sqrt(_TWO_PI)
    t0 = theta_grid[0] + x_k[0]
    t_grid = t0 + np.arange(vals.size) * dt
    return t_grid, vals


@dataclass
class BiorthogonalFamily:
    """Sampled biorthogonal functions zeta_m (and their Theta_m) on a shared
    uniform grid, with per-index diagnostics."""

    indices: list[int]
    horizon: float
    params: BiorthoParams
    theta_grid: np.ndarray
    zeta_grid: np.ndarray
    theta: dict[int, np.ndarray] = field(default_factory=dict)
    zeta: dict[int, np.ndarray] = field(default_factory=dict)
    diagnostics: dict[int, IndexDiagnostics] = field(default_factory=dict)


def build_family(
    seq: EigenvalueSequence,
    params: BiorthoParams,
    indices: list[int],
    time_step: float = 0.005,
) -> BiorthogonalFamily:
    """Construct zeta_m for every requested nonzero index.

    The zero index is excluded by construction (the zero mode has a
    constant-in-time kernel and is handled directly by the moment solver).
    """
    if any(m == 0 for m in indices):
        raise ValueError("index 0 is not part of the biorthogonal family")
    half = params.support_halfwidth
    n_half = int(round(half / time_step))
    if abs(n_half * time_step - half) > 1e-9:
        raise ValueError("support halfwidth must be a multiple of time_step")
    theta_grid = np.arange(-n_half, n_half + 1) * time_step

    fam = BiorthogonalFamily(
        indices=sorted(indices),
        horizon=params.horizon,
        params=params,
        theta_grid=theta_grid,
        zeta_grid=np.empty(0),
    )
    for m in fam.indices:
        th, diag = theta(m, theta_grid, seq, params)
        zg, zv = zeta(m, seq, params, theta_grid, th)
        diag.zeta_l2 = float(np.sqrt(np.sum(np.abs(zv) ** 2) * time_step))
        fam.theta[m] = th
        fam.zeta[m] = zv
        fam.diagnostics[m] = diag
        fam.zeta_grid = zg
    return fam


def biorthogonality_matrix(
    fam: BiorthogonalFamily,
    seq: EigenvalueSequence,
    index_set: list[int] | None = None,
) -> np.ndarray:
    """Pairing matrix B[i, j] = integral zeta_{m_i}(t) e^{lambda_{n_j} t} dt.

    The max off-diagonal modulus and max diagonal deviation from 1 form the
    family's certified biorthogonality defect.
    """
    ms = fam.indices if index_set is None else sorted(index_set)
    for m in ms:
        if m not in fam.zeta:
            raise ValueError(f"family was not built over index {m}")
    t = fam.zeta_grid
    dt = t[1] - t[0]
    w = np.full(t.size, dt)
    w[0] = w[-1] = dt / 2.0
    B = np.empty((len(ms), len(ms)), dtype=complex)
    for i, m in enumerate(ms):
        zw = fam.zeta[m] * w
        for j, n in enumerate(ms):
            B[i, j] = np.sum(zw * np.exp(seq[n] * t))
    return B


def biorthogonality_defect(B: np.ndarray) -> float:
    """Max deviation of the pairing matrix from the identity."""
    return float(np.max(np.abs(B - np.eye(B.shape[0]))))


def counting_sum(m: int, x: float) -> float:
    """Closed form of sum_{j=m^6}^{floor(x)} ln(j/x)."""
    j0 = m**6
    fx = math.floor(x)
    if x < j0:
        raise ValueError("need x >= m^6")
    return sum(math.log(j / x) for j in range(j0, fx + 1))


def counting_integral(m: int, x: float) -> float:
    """Closed form of -integral_{m^6}^{x} (floor(u) - m^6 + 1)/u du."""
    j0 = m**6
    fx = math.floor(x)
    if x < j0:
        raise ValueError("need x >= m^6")
    acc = sum(j * math.log((j + 1) / j) for j in range(j0, fx))
    acc += fx * math.log(x / fx)
    acc += (1 - j0) * math.log(x / j0)
    return -acc
