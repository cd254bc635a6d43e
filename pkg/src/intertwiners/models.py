"""Named model Hamiltonians with their symmetry data.

* ``H_D = J S_x + i gamma S_z`` for spin ``j = (D-1)/2`` with ``P_D = antidiag(1, ..., 1)``;
* the Hatano-Nelson chain ``J S_x + i gamma S_y``, unitarily equivalent to ``H_D``;
* the mutual-inductance LC dimer (4x4, energies in units of ``omega_0/2``);
* the two-level dimer ``(J sigma_x + i gamma sigma_z)/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import dagger, expm, frobenius
from .spectral import (
    Cluster,
    DegeneracyReport,
    Equivalence,
    SpectralData,
    SymmetryDescriptor,
    fix_phase,
)

__all__ = [
    "CircuitParams",
    "HatanoNelson",
    "MODELS",
    "ModelSpec",
    "PAULI",
    "SpinModelParams",
    "SpinOperators",
    "build_circuit",
    "circuit_matrix",
    "circuit_tensor_form",
    "build_dimer",
    "build_hatano_nelson",
    "build_model",
    "build_pt_spin",
    "h3_reference",
    "parity",
    "spin_matrices",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
ID2 = np.eye(2, dtype=np.complex128)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class SpinModelParams:
    D: int = 3
    J: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if int(self.D) != self.D or self.D < 2:
            raise ValueError(f"D must be an integer >= 2, got {self.D}")
        if not self.J > 0:
            raise ValueError("J must be positive")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")

    @property
    def ratio(self) -> float:
        return self.gamma / self.J

    @property
    def unbroken(self) -> bool:
        return self.ratio <= 1.0

    @property
    def theta(self) -> float:
        """``sin(theta) = gamma/J`` (unbroken side, ``gamma <= J``)."""
        if not self.unbroken:
            raise ValueError("theta is defined for gamma <= J")
        return float(np.arcsin(self.ratio))

    @property
    def beta(self) -> float:
        """``cosh(beta) = gamma/J`` (broken side, ``gamma >= J``)."""
        if self.ratio < 1.0:
            raise ValueError("beta is defined for gamma >= J")
        return float(np.arccosh(self.ratio))


@dataclass(frozen=True)
class SpinOperators:
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def D(self) -> int:
        return self.sx.shape[0]

    def rx(self, angle: float) -> np.ndarray:
        """``R_x(angle) = exp(-i S_x angle)``."""
        return expm(-1j * angle * self.sx)


def spin_matrices(D: int) -> SpinOperators:
    """Angular-momentum matrices for spin ``(D-1)/2``, ``S_z = diag(j, j-1, ..., -j)``."""
    if int(D) != D or D < 2:
        raise ValueError(f"D must be an integer >= 2, got {D}")
    j = (D - 1) / 2
    m = j - np.arange(D)
    # <m+1|S_+|m> on the superdiagonal
    sp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1).astype(np.complex128)
    sx = (sp + dagger(sp)) / 2
    sy = (sp - dagger(sp)) / 2j
    return SpinOperators(sx, sy, np.diag(m).astype(np.complex128))


def parity(D: int) -> np.ndarray:
    """``antidiag(1, ..., 1)``."""
    return np.fliplr(np.eye(D)).astype(np.complex128)


def build_pt_spin(p: SpinModelParams) -> tuple[np.ndarray, SymmetryDescriptor]:
    s = spin_matrices(p.D)
    h = p.J * s.sx + 1j * p.gamma * s.sz
    return h, SymmetryDescriptor("PT", 0.0, parity(p.D))


def _reference_data(values, right) -> SpectralData:
    right = np.stack([fix_phase(v / np.linalg.norm(v)) for v in right.T], axis=1)
    left = np.stack([fix_phase(v) for v in right.conj().T], axis=1)
    n = len(values)
    clusters = tuple(Cluster(complex(v), 1, 1, (k,), (1,)) for k, v in enumerate(values))
    h = (right * (values / np.einsum("ik,ik->k", left.conj(), right))) @ dagger(left)
    return SpectralData(
        eigenvalues=np.asarray(values, dtype=np.complex128),
        right=right,
        left=left,
        report=DegeneracyReport(clusters, n),
        raw_eigenvalues=np.asarray(values, dtype=np.complex128),
        matrix=h,
        cluster_index=np.arange(n),
    )


def h3_reference(theta: float | None = None, beta: float | None = None, J: float = 1.0) -> SpectralData:
    """Closed-form eigen-data of ``H_3`` in the order ``(+, -, 0)``.

    Pass ``theta`` (``sin(theta) = gamma/J``, ``0 <= theta < pi/2``) or
    ``beta`` (``cosh(beta) = gamma/J``, ``beta > 0``). Left eigenvectors
    are the transposes of the right ones, since ``H_3`` is symmetric.
    The exceptional point itself is rejected.
    """
    if (theta is None) == (beta is None):
        raise ValueError("give exactly one of theta, beta")
    if theta is not None:
        if not 0 <= theta < np.pi / 2:
            raise ValueError("theta must lie in [0, pi/2)")
        c, s = np.cos(theta), np.sin(theta)
        e = np.exp(1j * theta)
        rp = np.array([e, np.sqrt(2), e.conjugate()]) / 2
        rm = np.array([e.conjugate(), -np.sqrt(2), e]) / 2
        r0 = np.array([-1, np.sqrt(2) * 1j * s, 1]) / np.sqrt(2 * (1 + s * s))
        values = J * np.array([c, -c, 0.0], dtype=np.complex128)
    else:
        if not beta > 0:
            raise ValueError("beta must be positive")
        ch, sh = np.cosh(beta), np.sinh(beta)
        norm = np.sqrt(2 * (1 + np.cosh(2 * beta)))
        rp = np.array([-np.exp(beta), np.sqrt(2) * 1j, np.exp(-beta)]) / norm
        rm = np.array([-np.exp(-beta), np.sqrt(2) * 1j, np.exp(beta)]) / norm
        r0 = np.array([-1, np.sqrt(2) * 1j * ch, 1]) / np.sqrt(2 * (1 + ch * ch))
        values = J * np.array([1j * sh, -1j * sh, 0.0])
    return _reference_data(values, np.stack([rp, rm, r0], axis=1))


@dataclass(frozen=True)
class HatanoNelson:
    matrix: np.ndarray
    unitary: np.ndarray
    eta1: np.ndarray
    symmetry: SymmetryDescriptor

    def __iter__(self):
        return iter((self.matrix, self.unitary, self.eta1))


def build_hatano_nelson(p: SpinModelParams) -> HatanoNelson:
    """``H_HN = J S_x + i gamma S_y = R_x(-pi/2) H_D R_x(pi/2)`` and its seed.

    The equivalence is checked to ``1e-12`` relative to ``||H_D||``.
    """
    s = spin_matrices(p.D)
    h = p.J * s.sx + 1j * p.gamma * s.sy
    hd, _ = build_pt_spin(p)
    u = s.rx(-np.pi / 2)
    mapped = u @ hd @ dagger(u)
    if frobenius(mapped - h) > 1e-12 * max(1.0, frobenius(hd)):
        raise ArithmeticError("Hatano-Nelson equivalence failed")
    pd = parity(p.D)
    eta1 = u @ pd @ dagger(u)
    eta1 = (eta1 + dagger(eta1)) / 2
    # A_HN = U (P_D K) U^dagger = (U P_D U^T) K
    sym = SymmetryDescriptor("PT", 0.0, u @ pd @ u.T, Equivalence(u, pd))
    return HatanoNelson(h, u, eta1, sym)


@dataclass(frozen=True)
class CircuitParams:
    """Mutual-inductance LC dimer; ``mu = M/L`` in ``[0, 1)``, ``gamma = omega_0 L / R``."""

    gamma: float = 0.0
    mu: float = 0.5
    omega0: float = 1.0

    def __post_init__(self):
        if not 0 <= self.mu < 1:
            raise ValueError(f"mu must satisfy 0 <= mu < 1, got {self.mu}")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")

    @property
    def energy_unit(self) -> float:
        """Matrices are returned in units of ``omega_0/2``."""
        return self.omega0 / 2

    @property
    def gamma0(self) -> float:
        return 1 / np.sqrt(1 - self.mu) + 1 / np.sqrt(1 + self.mu)

    @property
    def gamma_pt(self) -> float:
        return 1 / np.sqrt(1 - self.mu) - 1 / np.sqrt(1 + self.mu)


def circuit_matrix(p: CircuitParams) -> np.ndarray:
    """Entry-by-entry circuit Hamiltonian in units of ``omega_0/2``."""
    g, g0, gp = p.gamma, p.gamma0, p.gamma_pt
    return 1j * np.array(
        [
            [-2 * g, 0, g0, -gp],
            [0, 2 * g, -gp, g0],
            [-g0, gp, 0, 0],
            [gp, -g0, 0, 0],
        ],
        dtype=np.complex128,
    )


def circuit_tensor_form(p: CircuitParams) -> np.ndarray:
    """``-sigma_y (x) (gamma_0 - gamma_PT sigma_x) - i gamma (1 + sigma_z) (x) sigma_z``."""
    return -np.kron(SIGMA_Y, p.gamma0 * ID2 - p.gamma_pt * SIGMA_X) - 1j * p.gamma * np.kron(ID2 + SIGMA_Z, SIGMA_Z)


def build_circuit(p: CircuitParams) -> tuple[np.ndarray, np.ndarray, SymmetryDescriptor]:
    """Circuit Hamiltonian, seed ``1 (x) sigma_x`` and its PT descriptor.

    ``H`` is not transpose-symmetric; ``V^dagger H V`` with
    ``V = exp(-i pi sigma_z/4) (x) 1`` is, and its symmetry has linear part
    ``1 (x) sigma_x``.
    """
    h = circuit_matrix(p)
    if frobenius(h - circuit_tensor_form(p)) > 1e-14 * max(1.0, frobenius(h)):
        raise ArithmeticError("circuit matrix disagrees with its tensor form")
    eta1 = np.kron(ID2, SIGMA_X)
    v = np.kron(expm(-0.25j * np.pi * SIGMA_Z), ID2)
    sym = SymmetryDescriptor("PT", 0.0, np.kron(SIGMA_Z, SIGMA_X), Equivalence(v, eta1))
    return h, eta1, sym


def build_dimer(J: float = 1.0, gamma: float = 0.0) -> tuple[np.ndarray, list[SymmetryDescriptor]]:
    """``H_2 = (J sigma_x + i gamma sigma_z)/2`` with its PT, anti-PT and chiral descriptors."""
    if not J > 0:
        raise ValueError("J must be positive")
    if not gamma >= 0:
        raise ValueError("gamma must be non-negative")
    h = (J * SIGMA_X + 1j * gamma * SIGMA_Z) / 2
    syms = [
        SymmetryDescriptor("PT", 0.0, SIGMA_X),
        SymmetryDescriptor("anti-PT", np.pi, SIGMA_Z),
        SymmetryDescriptor("chiral", None, SIGMA_Y),
    ]
    return h, syms


# --------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict[str, tuple[type, object]]
    build: Callable[..., tuple[np.ndarray, np.ndarray | None, list[SymmetryDescriptor]]]


def _pt_spin(D=3, J=1.0, gamma=0.0):
    h, sym = build_pt_spin(SpinModelParams(D, J, gamma))
    return h, np.array(sym.linear_part), [sym]


def _hn(D=3, J=1.0, gamma=0.0):
    hn = build_hatano_nelson(SpinModelParams(D, J, gamma))
    return hn.matrix, hn.eta1, [hn.symmetry]


def _circuit(gamma=0.0, mu=0.5):
    h, eta1, sym = build_circuit(CircuitParams(gamma, mu))
    return h, eta1, [sym]


def _dimer(J=1.0, gamma=0.0):
    h, syms = build_dimer(J, gamma)
    return h, np.array(syms[0].linear_part), syms


MODELS: dict[str, ModelSpec] = {
    "pt-spin": ModelSpec("pt-spin", {"D": (int, 3), "J": (float, 1.0), "gamma": (float, 0.0)}, _pt_spin),
    "hatano-nelson": ModelSpec("hatano-nelson", {"D": (int, 3), "J": (float, 1.0), "gamma": (float, 0.0)}, _hn),
    "circuit": ModelSpec("circuit", {"gamma": (float, 0.0), "mu": (float, 0.5)}, _circuit),
    "dimer": ModelSpec("dimer", {"J": (float, 1.0), "gamma": (float, 0.0)}, _dimer),
}


def build_model(name: str, **params):
    """Build a registered model; returns ``(H, seed eta_1, symmetry descriptors)``."""
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    spec = MODELS[name]
    unknown = set(params) - set(spec.params)
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    typed = {k: spec.params[k][0](v) for k, v in params.items()}
    return spec.build(**typed)
