"""Dense complex-matrix primitives shared by the rest of the package.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``.
Rank decisions are always made from singular values, and the Frobenius
norm is the norm used for residuals.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "DEFAULT_TOL",
    "NumericalFailure",
    "OperatorBasis",
    "as_cmatrix",
    "commutator",
    "dagger",
    "default_tol",
    "expm",
    "frobenius",
    "hermitian_parts",
    "hermitian_split",
    "independent_count",
    "is_hermitian",
    "nullspace_basis",
    "span_residual",
    "vectorize_hermitian",
]

DEFAULT_TOL = 1e-10
TOL_ENV_VAR = "INTERTWINER_TOL"


class NumericalFailure(ArithmeticError):
    """Raised when a computation overflows or an eigensolver fails."""


def default_tol() -> float:
    """Global default tolerance, overridable through ``INTERTWINER_TOL``."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_TOL
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{TOL_ENV_VAR} must be positive, got {raw!r}")
    return value


def _tol(tol: float | None) -> float:
    return default_tol() if tol is None else float(tol)


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite, square ``complex128`` array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_hermitian(m: np.ndarray, tol: float | None = None) -> bool:
    norm = frobenius(m)
    return frobenius(m - dagger(m)) <= _tol(tol) * norm


def expm(m) -> np.ndarray:
    """Matrix exponential ``e^M``.

    Uses scipy's scaling-and-squaring Pade approximant. Raises
    :class:`NumericalFailure` if the result is not finite.
    """
    a = as_cmatrix(m)
    with np.errstate(over="ignore", invalid="ignore"):
        out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise NumericalFailure("matrix exponential overflowed")
    return out


def nullspace_basis(m, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical nullspace of ``m``.

    A right singular vector is kept when its singular value is at most
    ``tol * ||m||_2``. The basis vectors are returned as the columns of an
    ``(n, k)`` array; ``k == 0`` when ``m`` has full rank at ``tol``.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    tol = _tol(tol)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > tol * smax)) if smax > 0 else 0
    return np.ascontiguousarray(dagger(vh[rank:]))


def vectorize_hermitian(ops: Iterable[np.ndarray]) -> np.ndarray:
    """Stack matrices as real vectors ``[Re vec(M), Im vec(M)]`` (one per column).

    Real-linear combinations of the matrices correspond to real
    combinations of these columns, and the Euclidean inner product of two
    columns equals ``Re Tr(A^dagger B)``.
    """
    cols = [np.concatenate([np.real(o).ravel(), np.imag(o).ravel()]) for o in ops]
    if not cols:
        return np.zeros((0, 0))
    return np.stack(cols, axis=1)


def _unvectorize(v: np.ndarray, n: int) -> np.ndarray:
    return (v[: n * n] + 1j * v[n * n:]).reshape(n, n)


def _real_rank_basis(ops: Sequence[np.ndarray], tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Left singular vectors and singular values of the normalized data matrix."""
    norms = [frobenius(o) for o in ops]
    kept = [o / nrm for o, nrm in zip(ops, norms) if nrm > 0]
    if not kept:
        return np.zeros((0, 0)), np.zeros(0)
    x = vectorize_hermitian(kept)
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    rank = int(np.count_nonzero(s > tol * s[0]))
    return u[:, :rank], s


def independent_count(ops: Sequence[np.ndarray], tol: float | None = None) -> int:
    """Number of real-linearly independent matrices in ``ops``.

    Each matrix is scaled to unit Frobenius norm (zero matrices are
    dropped) and the rank of the stacked real data matrix is read off its
    singular values, counting those above ``tol`` times the largest. This
    is the rank of the Frobenius Gram matrix without squaring its
    condition number.
    """
    ops = [np.asarray(o) for o in ops]
    if not ops:
        return 0
    shapes = {o.shape for o in ops}
    if len(shapes) != 1:
        raise ValueError(f"matrices have different shapes: {sorted(shapes)}")
    basis, _ = _real_rank_basis(ops, _tol(tol))
    return basis.shape[1] if basis.size else 0


@dataclass(frozen=True)
class OperatorBasis:
    """Ordered set of Hermitian, real-linearly independent matrices."""

    elements: tuple[np.ndarray, ...]
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        elems = []
        for e in self.elements:
            a = np.array(e, dtype=np.complex128)
            a.setflags(write=False)
            elems.append(a)
        object.__setattr__(self, "elements", tuple(elems))
        if self.tol < 0:
            raise ValueError("tol must be non-negative")
        check = max(self.tol, 1e-12)
        for k, e in enumerate(self.elements):
            if not is_hermitian(e, check):
                raise ValueError(f"element {k} is not Hermitian at tol={check:g}")
        if independent_count(self.elements, check) != len(self.elements):
            raise ValueError("elements are not linearly independent")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, k):
        return self.elements[k]

    @property
    def dim(self) -> int | None:
        return self.elements[0].shape[0] if self.elements else None

    def gram(self) -> np.ndarray:
        """Real Frobenius Gram matrix ``Re Tr(A_i^dagger A_j)``."""
        x = vectorize_hermitian(self.elements)
        return x.T @ x if x.size else np.zeros((0, 0))

    def orthonormalized(self) -> "OperatorBasis":
        """Frobenius-orthonormal basis of the same real span."""
        return hermitian_split(self.elements, self.tol)

    def combine(self, coefficients: Sequence[float]) -> np.ndarray:
        """Real linear combination ``sum_k c_k e_k``."""
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (len(self),):
            raise ValueError(f"expected {len(self)} real coefficients")
        n = self.dim or 0
        out = np.zeros((n, n), dtype=np.complex128)
        for c, e in zip(coefficients, self.elements):
            out += c * e
        return out


def hermitian_parts(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(M + M^dagger)/2`` and ``(M - M^dagger)/(2i)``; ``M = A + iB``."""
    md = dagger(m)
    return (m + md) / 2, (m - md) / 2j


def hermitian_split(ops: Sequence[np.ndarray], tol: float | None = None) -> OperatorBasis:
    """Hermitian basis for the real span of the Hermitian parts of ``ops``.

    Each input ``M`` is split into ``(M + M^dagger)/2`` and
    ``(M - M^dagger)/(2i)``; parts with ``||part||_F <= tol * ||M||_F`` are
    dropped. The survivors are reduced to a Frobenius-orthonormal basis of
    their real span.
    """
    tol = _tol(tol)
    parts = []
    for m in ops:
        m = np.asarray(m, dtype=np.complex128)
        scale = frobenius(m)
        if scale == 0:
            continue
        for p in hermitian_parts(m):
            if frobenius(p) > tol * scale:
                parts.append(p)
    if not parts:
        return OperatorBasis((), tol)
    n = parts[0].shape[0]
    basis, _ = _real_rank_basis(parts, tol)
    elems = []
    for col in basis.T:
        e = _unvectorize(col, n)
        elems.append((e + dagger(e)) / 2)
    return OperatorBasis(tuple(elems), tol)


def span_residual(a: Sequence[np.ndarray], b: Sequence[np.ndarray], tol: float | None = None) -> float:
    """Mutual projection residual between the real spans of ``a`` and ``b``.

    Every unit-normalized element of one set is projected onto the span of
    the other; the largest leftover Frobenius norm, over both directions,
    is returned. Zero means the spans coincide.
    """
    tol = _tol(tol)
    a = [np.asarray(x) for x in a]
    b = [np.asarray(x) for x in b]
    if not a and not b:
        return 0.0
    if not a or not b:
        return 1.0
    qa, _ = _real_rank_basis(a, tol)
    qb, _ = _real_rank_basis(b, tol)
    worst = 0.0
    for q, others in ((qa, b), (qb, a)):
        for o in others:
            nrm = frobenius(o)
            if nrm == 0:
                continue
            v = vectorize_hermitian([o / nrm])[:, 0]
            worst = max(worst, float(np.linalg.norm(v - q @ (q.T @ v))))
    return worst
