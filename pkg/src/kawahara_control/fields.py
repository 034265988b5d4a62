"""Truncated Fourier representation of real periodic fields on (0, 2*pi).

Coefficient convention: u(x) = sum_k u_k e^{ikx} with
u_k = (1/2pi) * integral of u(x) e^{-ikx} dx, so the squared L2 norm of the
field is 2*pi * sum |u_k|^2.  All norms below are written against this
convention.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SpectralField:
    """Coefficients u_k for |k| <= max_index of a real periodic field.

    Construction rejects coefficient tables whose conjugate symmetry defect
    exceeds ``SYMMETRY_TOL`` (relative); inputs are never silently
    symmetrized.
    """

    max_index: int
    coeffs: np.ndarray  # complex, length 2*max_index + 1, index k + max_index

    def __post_init__(self) -> None:
        N = self.max_index
        if N < 1:
            raise ValueError("max_index must be >= 1")
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * N + 1,):
            raise ValueError(f"expected {2 * N + 1} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)
        scale = float(np.max(np.abs(c)))
        if scale > 0:
            defect = float(np.max(np.abs(c - np.conj(c[::-1]))))
            if defect > SYMMETRY_TOL * scale:
                raise ValueError(
                    f"coefficients violate conjugate symmetry (defect {defect:.3e})"
                )

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.max_index:
            raise ValueError(f"index {k} outside truncation {self.max_index}")
        return complex(self.coeffs[k + self.max_index])

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.max_index, self.max_index + 1)

    @classmethod
    def from_dict(cls, max_index: int, table: dict[int, complex]) -> "SpectralField":
        c = np.zeros(2 * max_index + 1, dtype=complex)
        for k, v in table.items():
            if abs(k) > max_index:
                raise ValueError(f"index {k} outside truncation {max_index}")
            c[k + max_index] = v
        return cls(max_index, c)

    @classmethod
    def zero(cls, max_index: int) -> "SpectralField":
        return cls(max_index, np.zeros(2 * max_index + 1, dtype=complex))


@dataclass(frozen=True)
class ShapeProfile:
    """Spatial actuator shape with nonvanishing coefficients on all retained
    modes."""

    field: SpectralField
    min_coeff_modulus: float

    def __post_init__(self) -> None:
        if self.min_coeff_modulus <= 0:
            raise ValueError("min_coeff_modulus must be positive")
        mods = np.abs(self.field.coeffs)
        if float(np.min(mods)) < self.min_coeff_modulus:
            raise ValueError(
                "profile has a coefficient below the declared minimum modulus"
            )

    @property
    def max_index(self) -> int:
        return self.field.max_index

    def __getitem__(self, k: int) -> complex:
        return self.field[k]


def gaussian_profile(max_index: int, width: float = 4.0) -> ShapeProfile:
    """Default actuator f_k = exp(-k^2 / width): strictly nonvanishing and
    rapidly decaying, so the ratios u_k/f_k stay well scaled at desk
    truncations."""
    ks = np.arange(-max_index, max_index + 1)
    c = np.exp(-(ks.astype(float) ** 2) / width).astype(complex)
    field = SpectralField(max_index, c)
    return ShapeProfile(field=field, min_coeff_modulus=float(np.min(np.abs(c))) * 0.5)


@dataclass(frozen=True)
class WeightedSpaceParams:
    """Weight exponent for the profile-relative norm with factor
    exp(beta_weight * k^6).

    beta_weight = 0 reduces the weighted norm to a profile-relative L2 norm
    (the natural choice when the underlying spectrum has negative real
    part)."""

    beta_weight: float = 0.0

    def __post_init__(self) -> None:
        if self.beta_weight < 0:
            raise ValueError("beta_weight must be >= 0")


def hs_norm(field: SpectralField, s: float) -> float:
    """Sobolev-scale norm sqrt(sum |u_k|^2 (1 + k^2)^s) over retained
    modes."""
    ks = field.indices.astype(float)
    return float(np.sqrt(np.sum(np.abs(field.coeffs) ** 2 * (1.0 + ks**2) ** s)))


def l2_coeff_norm(field: SpectralField) -> float:
    """Plain l2 norm of the coefficient vector (hs_norm with s = 0)."""
    return float(np.linalg.norm(field.coeffs))


def weighted_norm(
    field: SpectralField, profile: ShapeProfile, w: WeightedSpaceParams
) -> float:
    """Profile-relative weighted norm sqrt(sum |u_k/f_k|^2 e^{beta k^6}).

    On a finite truncation this is always finite, so membership in the
    weighted admissible class is automatic and the value is reported rather
    than asserted against.
    """
    if profile.max_index != field.max_index:
        raise ValueError("field and profile truncations differ")
    ks = field.indices.astype(float)
    ratios = np.abs(field.coeffs / profile.field.coeffs) ** 2
    return float(np.sqrt(np.sum(ratios * np.exp(w.beta_weight * ks**6))))


def synthesize(field: SpectralField, grid_size: int) -> np.ndarray:
    """Evaluate sum_k u_k e^{ikx_j} at x_j = 2*pi*j/grid_size, j = 0..grid_size-1."""
    N = field.max_index
    if grid_size < 2 * N + 1:
        raise ValueError(f"grid_size {grid_size} too small for max_index {N}")
    spec = np.zeros(grid_size, dtype=complex)
    ks = np.arange(-N, N + 1)
    spec[ks % grid_size] += field.coeffs
    samples = np.fft.ifft(spec) * grid_size
    return np.real(samples)


def analyze(samples: np.ndarray, max_index: int) -> SpectralField:
    """Recover coefficients u_k, |k| <= max_index, from uniform samples."""
    samples = np.asarray(samples, dtype=float)
    M = samples.size
    if M < 2 * max_index + 1:
        raise ValueError(f"{M} samples too few for max_index {max_index}")
    spec = np.fft.fft(samples) / M
    ks = np.arange(-max_index, max_index + 1)
    return SpectralField(max_index, spec[ks % M])


def write_field_csv(path: str, field: SpectralField) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "re", "im"])
        for k in field.indices:
            v = field[int(k)]
            writer.writerow([int(k), repr(v.real), repr(v.imag)])


def read_field_csv(path: str) -> SpectralField:
    rows: dict[int, complex] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows[int(row["k"])] = complex(float(row["re"]), float(row["im"]))
    if not rows:
        raise ValueError(f"no coefficient rows in {path}")
    N = max(abs(k) for k in rows)
    return SpectralField.from_dict(max(N, 1), rows)
