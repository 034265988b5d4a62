"""Eigenvalue sequence of the fifth-order dispersive operator on the circle.

The linear flow ``u_t = beta*u_5x - alpha*u_3x - gamma*u_x`` acts diagonally
on Fourier modes ``e^{ikx}`` with purely imaginary symbol

    lambda_k = i * k * (beta*k^4 + alpha*k^2 - gamma).

This is the symbol obtained by direct substitution of the mode into the
equation; it coincides with the conventional eigenvalue list under the index
relabeling k <-> -k, and the conjugate-symmetric *set* of eigenvalues (the
only thing the moment machinery depends on) is identical either way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Largest truncation for which k*(k^4 + k^2 - 1) is exactly representable
#: as a float for unit-scale parameters (stays below 2**53).
MAX_INDEX = 200


@dataclass(frozen=True)
class DispersionParams:
    """Coefficients (gamma, alpha, beta) of the linear dispersive operator.

    beta multiplies the fifth-order term and must be nonzero.
    """

    gamma: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.beta == 0:
            raise ValueError("beta must be nonzero")


CANONICAL = DispersionParams(1.0, 1.0, 1.0)


def symbol(params: DispersionParams, k: int) -> float:
    """Real frequency nu_k = k*(beta*k^4 + alpha*k^2 - gamma), so that
    lambda_k = i*nu_k."""
    k = float(k)
    return k * (self_poly(params, k))


def self_poly(params: DispersionParams, k: float) -> float:
    return params.beta * k**4 + params.alpha * k**2 - params.gamma


def eigenvalue(params: DispersionParams, k: int) -> complex:
    """Purely imaginary eigenvalue of the mode with index k."""
    return 1j * symbol(params, k)


@dataclass(frozen=True)
class EigenvalueSequence:
    """Tabulated eigenvalues lambda_k for |k| <= max_index.

    Values are stored for k >= 0 only; negative indices are produced by
    exact sign flip, so lambda_{-k} + lambda_k == 0 bitwise.
    """

    params: DispersionParams
    max_index: int
    _nu: np.ndarray  # nu[k] for k = 0..max_index

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.max_index, self.max_index + 1)

    def frequency(self, k: int) -> float:
        """Real frequency nu_k with lambda_k = i*nu_k."""
        if abs(k) > self.max_index:
            raise ValueError(f"index {k} outside truncation {self.max_index}")
        nu = self._nu[abs(k)]
        return nu if k >= 0 else -nu

    def __getitem__(self, k: int) -> complex:
        return 1j * self.frequency(k)

    def values(self) -> dict[int, complex]:
        return {int(k): self[int(k)] for k in self.indices}


def eigenvalue_sequence(params: DispersionParams, N: int) -> EigenvalueSequence:
    """Tabulate lambda_k for |k| <= N."""
    if N < 1:
        raise ValueError("truncation N must be >= 1")
    if N > MAX_INDEX:
        raise ValueError(f"truncation N={N} exceeds exact-representation limit {MAX_INDEX}")
    nu = np.array([symbol(params, k) for k in range(N + 1)])
    return EigenvalueSequence(params=params, max_index=N, _nu=nu)


def collision_classes(params: DispersionParams, N: int) -> list[list[int]]:
    """Partition [-N, N] into classes of indices sharing one eigenvalue.

    Brute-force comparison of the quintic symbol over the integer range;
    the class containing a given eigenvalue has at most 5 members.  For the
    canonical parameters every class is a singleton.
    """
    if N < 1:
        raise ValueError("truncation N must be >= 1")
    ks = list(range(-N, N + 1))
    nus = {k: symbol(params, k) for k in ks}
    scale = max(abs(v) for v in nus.values()) or 1.0
    classes: list[list[int]] = []
    reps: list[float] = []
    for k in ks:
        for cls, rep in zip(classes, reps):
            if abs(nus[k] - rep) <= 1e-12 * scale:
                cls.append(k)
                break
        else:
            classes.append([k])
            reps.append(nus[k])
    return classes


def has_collisions(params: DispersionParams, N: int) -> bool:
    return any(len(c) > 1 for c in collision_classes(params, N))


def min_gap(seq: EigenvalueSequence, exclude_zero: bool = True) -> float:
    """Smallest gap |lambda_a - lambda_b| between adjacent eigenvalues.

    Eigenvalues are sorted by imaginary part before taking adjacent
    differences.  Validates the Ingham-inequality spacing precondition.
    """
    nus = sorted(
        seq.frequency(int(k))
        for k in seq.indices
        if not (exclude_zero and seq.frequency(int(k)) == 0.0)
    )
    if len(nus) < 2:
        raise ValueError("need at least 2 retained eigenvalues")
    return float(min(b - a for a, b in zip(nus, nus[1:])))


def sorted_gaps(seq: EigenvalueSequence, exclude_zero: bool = True) -> np.ndarray:
    """Adjacent gaps of the eigenvalues sorted by imaginary part."""
    nus = sorted(
        seq.frequency(int(k))
        for k in seq.indices
        if not (exclude_zero and seq.frequency(int(k)) == 0.0)
    )
    return np.diff(np.array(nus))
