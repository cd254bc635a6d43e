"""Non-unitary evolution, conservation drift, passive shifts and Floquet drives."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    NumericalFailure,
    OperatorBasis,
    as_cmatrix,
    dagger,
    default_tol,
    expm,
    frobenius,
    hermitian_parts,
    independent_count,
    nullspace_basis,
    hermitian_split,
)
from .intertwine import IntertwinerSet
from .spectral import classify_degeneracies

__all__ = [
    "DriftReport",
    "FloquetDrive",
    "StateVector",
    "drift_report",
    "evolve",
    "fixed_point_residual",
    "floquet_propagator",
    "micromotion",
    "passive",
    "slow_mode_rates",
    "stroboscopic_etas",
    "stroboscopic_report",
]

IMAG_FLAG = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Pure state; the norm is not fixed and carries the gain/loss history."""

    psi: np.ndarray

    def __post_init__(self):
        v = np.array(self.psi, dtype=np.complex128).reshape(-1)
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ValueError("state must be a finite, non-empty vector")
        if not np.vdot(v, v).real > 0:
            raise ValueError("state must have positive norm")
        v.setflags(write=False)
        object.__setattr__(self, "psi", v)

    @property
    def norm(self) -> float:
        """``<psi|psi>``."""
        return float(np.vdot(self.psi, self.psi).real)

    @property
    def dim(self) -> int:
        return self.psi.size

    def expectation(self, op) -> complex:
        return complex(np.vdot(self.psi, np.asarray(op) @ self.psi))


def _state(psi) -> np.ndarray:
    return psi.psi if isinstance(psi, StateVector) else StateVector(psi).psi


def evolve(h, psi0, t: float) -> StateVector:
    """``expm(-i H t) psi0``, unnormalized."""
    h = as_cmatrix(h, "H")
    psi = _state(psi0)
    if psi.size != h.shape[0]:
        raise ValueError("state and Hamiltonian dimensions differ")
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    out = expm(-1j * t * h) @ psi
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("state overflowed")
    return StateVector(out)


def passive(h, gamma: float) -> np.ndarray:
    """``H - i gamma 1``."""
    h = as_cmatrix(h, "H")
    return h - 1j * gamma * np.eye(h.shape[0])


def slow_mode_rates(h_passive, tol: float | None = None) -> np.ndarray:
    """Intensity decay rates ``-2 Im(eps_k)``, ascending.

    Eigenvalues are taken from the clustered spectrum, so an exceptional
    point yields one repeated rate instead of a rounding-split pair.
    """
    h = as_cmatrix(h_passive, "H")
    tol = default_tol() if tol is None else tol
    values = classify_degeneracies(h).values()
    scale = max(1.0, float(np.linalg.norm(h, 2)))
    if np.max(values.imag) > tol * scale:
        raise ValueError("Hamiltonian has an amplifying mode; it is not passive")
    return np.sort(-2 * values.imag)


# --------------------------------------------------------------------------
# drift


@dataclass(frozen=True)
class DriftReport:
    """Time series of ``exp(2 Gamma t) <psi(t)|eta|psi(t)>`` and of ``<psi(t)|psi(t)>``.

    ``eta_series`` has one row per operator. ``imaginary_residue`` is the
    largest ``|Im <eta>|`` relative to ``max(|<eta>|, ||eta||_2 <psi0|psi0>)``;
    ``flagged`` is set when it exceeds ``1e-12``, which signals that
    rounding has swamped the result.
    """

    times: np.ndarray
    norm_series: np.ndarray
    eta_series: np.ndarray
    max_relative_drift: np.ndarray
    gamma_shift: float = 0.0
    imaginary_residue: np.ndarray = field(default=None)  # type: ignore[assignment]
    dps: int | None = None

    def __post_init__(self):
        for name in ("times", "norm_series", "eta_series", "max_relative_drift", "imaginary_residue"):
            value = getattr(self, name)
            if value is None:
                value = np.zeros(len(self.eta_series))
            a = np.array(value, dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        m = len(self.times)
        if self.norm_series.shape != (m,) or self.eta_series.shape[1:] != (m,):
            raise ValueError("series lengths must match the time grid")

    @property
    def flagged(self) -> np.ndarray:
        return self.imaginary_residue > IMAG_FLAG

    @property
    def worst_drift(self) -> float:
        return float(self.max_relative_drift.max()) if self.max_relative_drift.size else 0.0

    def to_csv(self, path=None) -> str:
        """Write ``t,norm,eta_1,...,eta_m`` with 17 significant digits; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "norm"] + [f"eta_{k + 1}" for k in range(len(self.eta_series))])
        for i, t in enumerate(self.times):
            row = [t, self.norm_series[i]] + [s[i] for s in self.eta_series]
            w.writerow([f"{x:.17g}" for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _relative_drift(series: np.ndarray, floor: float) -> float:
    ref = abs(series[0])
    return float(np.max(np.abs(series - series[0])) / max(ref, floor))


def _etas_list(etas) -> list:
    if isinstance(etas, IntertwinerSet):
        return list(etas.etas.elements)
    if isinstance(etas, OperatorBasis):
        return list(etas.elements)
    return [np.asarray(e) for e in etas]


def _float_series(h, etas, psi, times, gamma_shift):
    n = len(times)
    norms = np.empty(n)
    vals = np.empty((len(etas), n), dtype=np.complex128)
    for i, t in enumerate(times):
        state = expm(-1j * t * h) @ psi
        if not np.all(np.isfinite(state)):
            raise NumericalFailure(f"state overflowed at t={t:g}")
        norms[i] = np.vdot(state, state).real
        weight = np.exp(2 * gamma_shift * t)
        for k, e in enumerate(etas):
            vals[k, i] = weight * np.vdot(state, e @ state)
    return norms, vals


def _mp_series(h, etas, psi, t_max, steps, gamma_shift, dps):
    import mpmath

    with mpmath.workdps(dps):
        def mpc(z):
            return z if isinstance(z, mpmath.mpc) else mpmath.mpc(complex(z))

        to_mp = np.vectorize(mpc, otypes=[object])
        hm = mpmath.matrix(to_mp(h).tolist())
        dt = mpmath.mpf(t_max) / (steps - 1)
        step = np.array(mpmath.expm(-1j * dt * hm).tolist(), dtype=object)
        em = [to_mp(e) for e in etas]
        state = to_mp(psi)
        norms, vals = [], [[] for _ in em]
        for i in range(steps):
            if i:
                state = step @ state
            conj = np.array([z.conjugate() for z in state], dtype=object)
            norms.append(float(mpmath.re(conj @ state)))
            weight = mpmath.exp(2 * mpmath.mpf(gamma_shift) * i * dt)
            for k, e in enumerate(em):
                vals[k].append(complex(weight * (conj @ (e @ state))))
    return np.array(norms), np.array(vals, dtype=np.complex128)


def drift_report(
    h,
    etas,
    psi0,
    t_max: float,
    steps: int = 2001,
    gamma_shift: float = 0.0,
    dps: int | None = None,
) -> DriftReport:
    """Track ``exp(2 Gamma t) <psi(t)|eta|psi(t)>`` under ``psi(t) = expm(-i H t) psi0``.

    ``H`` is the generator actually used, so for a passive system pass
    ``passive(H_PT, Gamma)`` together with ``gamma_shift=Gamma``. The grid
    is ``linspace(0, t_max, steps)``.

    With ``dps`` set the evolution runs in ``mpmath`` at that many digits,
    treating the double-precision inputs as exact. Operators may then be
    given as ``mpmath`` object arrays (see
    :func:`~intertwiners.intertwine.tower_products`). This is needed in the
    broken phase, where ``<psi|psi>`` grows by many orders of magnitude
    while the conserved values stay put.
    """
    h = as_cmatrix(h, "H")
    psi = _state(psi0)
    if psi.size != h.shape[0]:
        raise ValueError("state and Hamiltonian dimensions differ")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not (np.isfinite(t_max) and t_max > 0):
        raise ValueError("t_max must be positive and finite")
    ops = _etas_list(etas)
    for e in ops:
        if e.shape != h.shape:
            raise ValueError("operator and Hamiltonian dimensions differ")
    times = np.linspace(0.0, float(t_max), steps)
    if dps is None:
        norms, vals = _float_series(h, [np.asarray(e, dtype=np.complex128) for e in ops], psi, times, gamma_shift)
    else:
        norms, vals = _mp_series(h, ops, psi, t_max, steps, gamma_shift, dps)
    n0 = float(np.vdot(psi, psi).real)
    drifts, residues = [], []
    for e, series in zip(ops, vals):
        enorm = float(np.linalg.norm(np.asarray(e, dtype=np.complex128), 2))
        floor = max(1e-15 * enorm * n0, np.finfo(float).tiny)
        scale = np.maximum(np.abs(series), enorm * n0)
        residues.append(float(np.max(np.abs(series.imag) / scale)))
        drifts.append(_relative_drift(series.real, floor))
    return DriftReport(times, norms, vals.real, np.array(drifts), gamma_shift, np.array(residues), dps)


# --------------------------------------------------------------------------
# Floquet


@dataclass(frozen=True)
class FloquetDrive:
    """Piecewise-constant drive: ``segments[i] = (H_i, tau_i)`` in time order."""

    segments: tuple[tuple[np.ndarray, float], ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a drive needs at least one segment")
        segs = []
        n = None
        for h, tau in self.segments:
            h = as_cmatrix(h, "segment Hamiltonian")
            if n is not None and h.shape[0] != n:
                raise ValueError("segments have different dimensions")
            n = h.shape[0]
            tau = float(tau)
            if not (np.isfinite(tau) and tau > 0):
                raise ValueError("segment durations must be positive")
            h = h.copy()
            h.setflags(write=False)
            segs.append((h, tau))
        object.__setattr__(self, "segments", tuple(segs))

    @property
    def period(self) -> float:
        return float(sum(tau for _, tau in self.segments))

    @property
    def dim(self) -> int:
        return self.segments[0][0].shape[0]


def micromotion(drive: FloquetDrive, t: float) -> np.ndarray:
    """Propagator ``K(t)`` from ``0`` to ``t`` within one period (later segments act on the left)."""
    if not -1e-12 * drive.period <= t <= drive.period * (1 + 1e-12):
        raise ValueError("t must lie in [0, T]")
    k = np.eye(drive.dim, dtype=np.complex128)
    elapsed = 0.0
    for h, tau in drive.segments:
        dt = min(tau, t - elapsed)
        if dt <= 0:
            break
        k = expm(-1j * dt * h) @ k
        elapsed += tau
    return k


def floquet_propagator(drive: FloquetDrive) -> np.ndarray:
    """``G_F = expm(-i H_m tau_m) ... expm(-i H_1 tau_1)``."""
    g = np.eye(drive.dim, dtype=np.complex128)
    for h, tau in drive.segments:
        g = expm(-1j * tau * h) @ g
    return g


def fixed_point_residual(eta, g) -> float:
    """``||G^dagger eta G - eta||_F / ||eta||_F``."""
    eta = np.asarray(eta)
    nrm = frobenius(eta)
    res = frobenius(dagger(g) @ eta @ g - eta)
    return res / nrm if nrm > 0 else res


def _stroboscopic_set(g, elements, construction="stroboscopic", **notes) -> IntertwinerSet:
    basis = elements if isinstance(elements, OperatorBasis) else OperatorBasis(tuple(elements))
    res = [fixed_point_residual(e, g) for e in basis]
    return IntertwinerSet(None, basis, np.array(res), construction, notes=dict(notes))


def stroboscopic_etas(g, tol: float | None = None, seed=None) -> IntertwinerSet:
    """Hermitian solutions of ``G^dagger eta G = eta``.

    Without ``seed`` this is the nullspace of ``G^T (x) G^dagger - 1`` split
    into Hermitian parts (the solution space is closed under the adjoint).
    With a ``seed`` satisfying the fixed-point equation, the tower
    ``eta_{k+1} = eta_k G`` is grown instead, keeping the Hermitian parts
    of each product that add a new direction.
    """
    g = as_cmatrix(g, "G")
    tol = default_tol() if tol is None else tol
    n = g.shape[0]
    if np.linalg.svd(g, compute_uv=False)[-1] <= tol * np.linalg.norm(g, 2):
        raise NumericalFailure("propagator is singular at tol")
    if seed is None:
        op = np.kron(g.T, dagger(g)) - np.eye(n * n)
        kernel = nullspace_basis(op, tol)
        mats = [v.reshape(n, n, order="F") for v in kernel.T]
        return _stroboscopic_set(g, hermitian_split(mats, tol))
    seed = as_cmatrix(seed, "seed")
    if fixed_point_residual(seed, g) > max(tol, 1e-12) * 100:
        raise ValueError("seed does not satisfy the fixed-point equation")
    kept: list[np.ndarray] = []
    raw = (seed + dagger(seed)) / 2
    for _ in range(n * n):
        grew = False
        for p in hermitian_parts(raw):
            if frobenius(p) > tol * frobenius(raw) and independent_count(kept + [p], tol) > len(kept):
                kept.append(p)
                grew = True
        if not grew and kept:
            break
        raw = raw @ g
    return _stroboscopic_set(g, kept, construction="stroboscopic", tower=True)


def stroboscopic_report(drive_or_g, etas, psi0, periods: int) -> DriftReport:
    """``<psi(pT)|eta|psi(pT)>`` for ``p = 0 .. periods``."""
    if isinstance(drive_or_g, FloquetDrive):
        g, period = floquet_propagator(drive_or_g), drive_or_g.period
    else:
        g, period = as_cmatrix(drive_or_g, "G"), 1.0
    if periods < 1:
        raise ValueError("periods must be positive")
    psi = _state(psi0)
    ops = [np.asarray(e, dtype=np.complex128) for e in _etas_list(etas)]
    norms = np.empty(periods + 1)
    vals = np.empty((len(ops), periods + 1), dtype=np.complex128)
    state = psi.copy()
    for p in range(periods + 1):
        if p:
            state = g @ state
        if not np.all(np.isfinite(state)):
            raise NumericalFailure(f"state overflowed after {p} periods")
        norms[p] = np.vdot(state, state).real
        for k, e in enumerate(ops):
            vals[k, p] = np.vdot(state, e @ state)
    n0 = norms[0]
    drifts, residues = [], []
    for e, series in zip(ops, vals):
        enorm = float(np.linalg.norm(e, 2))
        residues.append(float(np.max(np.abs(series.imag) / np.maximum(np.abs(series), enorm * n0))))
        drifts.append(_relative_drift(series.real, max(1e-15 * enorm * n0, np.finfo(float).tiny)))
    times = period * np.arange(periods + 1)
    return DriftReport(times, norms, vals.real, np.array(drifts), 0.0, np.array(residues))
