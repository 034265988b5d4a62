import numpy as np
import pytest

from kawahara_control.biortho import (
    BiorthoParams,
    biorthogonality_defect,
    biorthogonality_matrix,
    build_family,
    counting_integral,
    counting_sum,
    kappa_hat,
    multiplier_M,
    psi,
    psi_exponential_type,
    smoothing_kernel,
    weierstrass_P,
)
from kawahara_control.spectrum import CANONICAL, DispersionParams, eigenvalue_sequence

SEQ = eigenvalue_sequence(CANONICAL, 60)


def _node(n):
    return float((1j * SEQ[n]).real)


def test_weierstrass_interpolation_identity():
    for m in (-3, -1, 2):
        for n in range(-8, 9):
            if n == 0:
                continue
            val = weierstrass_P(m, np.array([complex(_node(n))]), SEQ, 8)[0]
            assert abs(val - (1.0 if n == m else 0.0)) < 1e-10


def test_weierstrass_real_on_real_axis():
    xs = np.linspace(-50.0, 50.0, 101).astype(complex)
    vals = weierstrass_P(1, xs, SEQ, 8)
    assert np.max(np.abs(vals.imag)) == 0.0


def test_weierstrass_rejects_m_zero_and_collisions():
    with pytest.raises(ValueError):
        weierstrass_P(0, np.array([0j]), SEQ, 8)
    deg = eigenvalue_sequence(DispersionParams(gamma=2.0), 5)
    with pytest.raises(ValueError):
        weierstrass_P(2, np.array([0j]), deg, 5)


def test_multiplier_positive_at_own_node():
    for m in (1, 2):
        val = multiplier_M(m, np.array([complex(_node(m))]), 48)[0]
        assert val.imag == 0.0
        assert val.real > 0.8


def test_multiplier_fitted_exponential_decay_envelope():
    # log|M_m(x)| <= K1 (m^6 - |x|) + log C with fitted K1 > 0 on [m^6, 10 m^6]
    for m in (1, 2):
        xs = np.linspace(m**6, 10.0 * m**6, 400)
        y = np.log(np.abs(multiplier_M(m, xs.astype(complex), 48)))
        u = m**6 - xs
        K1 = float(np.polyfit(u, y, 1)[0])
        logC = float(np.max(y - K1 * u))
        assert K1 > 0.0
        assert logC < 10.0
        assert np.all(y <= K1 * u + logC + 1e-12)


def test_psi_interpolates_at_retained_nodes():
    params = BiorthoParams()
    for m in (-2, 1):
        for n in range(-8, 9):
            if n == 0:
                continue
            val = psi(m, np.array([_node(n)]), SEQ, params)[0]
            assert abs(val - (1.0 if n == m else 0.0)) < 1e-12


def test_psi_exponential_type_fits_support():
    params = BiorthoParams()
    for m in (1, 2):
        assert psi_exponential_type(m, params) < params.support_halfwidth


def test_smoothing_kernel_properties():
    a = 1.0
    xs = np.linspace(-2.0, 2.0, 4001)
    vals = np.asarray(smoothing_kernel(a, xs))
    assert np.all(vals >= 0.0)
    assert np.all(vals[np.abs(xs) > a] == 0.0)
    # integral of kappa_a equals sqrt(2*pi) for every a
    total = np.trapezoid(vals, xs)
    assert total == pytest.approx(np.sqrt(2.0 * np.pi), rel=1e-6)
    assert kappa_hat(a, 0.0) == 1.0
    assert np.all(np.asarray(kappa_hat(a, np.linspace(-9, 9, 101))) >= 0.0)


def test_counting_identity_closed_forms():
    for m, x in [(1, 2.0), (1, 10.0), (1, 50.0), (2, 100.0)]:
        assert abs(counting_sum(m, x) - counting_integral(m, x)) < 1e-12


def test_params_reject_short_horizon():
    with pytest.raises(ValueError, match="2\\*pi"):
        BiorthoParams(support_halfwidth=1.5, kernel_halfwidth=1.0)


def test_family_rejects_index_zero():
    with pytest.raises(ValueError):
        build_family(SEQ, BiorthoParams(), [0, 1])


def test_family_pairing_and_conjugate_symmetry():
    params = BiorthoParams()
    fam = build_family(SEQ, params, [-2, -1, 1, 2])
    assert fam.horizon == pytest.approx(8.0)
    # zeta_{-m} = conj(zeta_m)
    for m in (1, 2):
        scale = np.max(np.abs(fam.zeta[m]))
        assert np.max(np.abs(fam.zeta[-m] - np.conj(fam.zeta[m]))) < 1e-12 * scale
    B = biorthogonality_matrix(fam, SEQ)
    assert biorthogonality_defect(B) < 1e-3


def test_coarser_quadrature_strictly_degrades_defect():
    fine = build_family(SEQ, BiorthoParams(), [-1, 1])
    coarse = build_family(SEQ, BiorthoParams(quad_points_per_unit=3.0), [-1, 1])
    d_fine = biorthogonality_defect(biorthogonality_matrix(fine, SEQ))
    d_coarse = biorthogonality_defect(biorthogonality_matrix(coarse, SEQ))
    assert d_coarse > d_fine
