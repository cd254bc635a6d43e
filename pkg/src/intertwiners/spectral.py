"""Biorthogonal eigendecomposition, degeneracy classification and Jordan chains.

Eigenvalues of a defective matrix computed in floating point split by
roughly ``eps**(1/N)`` around an order-``N`` exceptional point, so
clusters cannot be formed from eigenvalue distances alone.  Candidate
groups are formed by single-linkage at shrinking radii and a group is
accepted when either its spread is below ``cluster_tol * max(1, ||H||)``
or it passes a rank test: ``(H - c)^m`` must have nullity ``m`` (``c`` the
group centroid, ``m`` its size) while ``H - c`` itself is singular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .linalg import NumericalFailure, as_cmatrix, dagger, default_tol, nullspace_basis

__all__ = [
    "CLUSTER_TOL",
    "ChainError",
    "Cluster",
    "DegeneracyReport",
    "Equivalence",
    "JordanChain",
    "SpectralData",
    "SymmetryDescriptor",
    "classify_degeneracies",
    "eig_biorthogonal",
    "fix_phase",
    "jordan_basis",
    "jordan_chain",
    "spectrum_symmetry",
]

CLUSTER_TOL = 1e-8
# Start radius of the candidate search, relative to max(1, ||H||_2).
_SEARCH_RADIUS = 0.1


class ChainError(ValueError):
    """No Jordan chain of the requested kind exists at the given eigenvalue."""


def _phase_factor(v: np.ndarray) -> complex:
    mags = np.abs(v)
    top = mags.max()
    if top == 0:
        return 1.0
    k = int(np.argmax(mags >= top * (1 - 1e-9)))
    return abs(v[k]) / v[k]


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its first component of largest modulus is real positive."""
    v = np.asarray(v, dtype=np.complex128)
    return v * _phase_factor(v)


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# degeneracy structure


@dataclass(frozen=True)
class Cluster:
    """One group of coalescing eigenvalues.

    ``jordan_sizes`` lists the Jordan block sizes, largest first; for a
    diabolic cluster they are all 1.
    """

    value: complex
    algebraic: int
    geometric: int
    members: tuple[int, ...] = ()
    jordan_sizes: tuple[int, ...] = ()

    @property
    def kind(self) -> str:
        if self.geometric < self.algebraic:
            return "exceptional"
        return "diabolic" if self.algebraic > 1 else "nondegenerate"

    @property
    def k_d(self) -> int | None:
        return self.algebraic if self.kind == "diabolic" else None

    @property
    def order(self) -> int | None:
        """EP order (size of the largest Jordan block) for exceptional clusters."""
        if self.kind != "exceptional":
            return None
        return max(self.jordan_sizes)


@dataclass(frozen=True)
class DegeneracyReport:
    clusters: tuple[Cluster, ...]
    n: int

    def __post_init__(self):
        total = sum(c.algebraic for c in self.clusters)
        if total != self.n:
            raise ValueError(f"algebraic multiplicities sum to {total}, expected {self.n}")

    def __iter__(self):
        return iter(self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def exceptional(self) -> list[Cluster]:
        return [c for c in self.clusters if c.kind == "exceptional"]

    @property
    def diabolic(self) -> list[Cluster]:
        return [c for c in self.clusters if c.kind == "diabolic"]

    @property
    def is_diagonalizable(self) -> bool:
        return not self.exceptional

    def values(self) -> np.ndarray:
        """Cluster values repeated by algebraic multiplicity."""
        return np.array([c.value for c in self.clusters for _ in range(c.algebraic)])


def _components(points: np.ndarray, radius: float) -> list[list[int]]:
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(points[:, None] - points[None, :])
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _nullity(a: np.ndarray, threshold: float) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(s <= threshold))


def _weyr_sizes(h: np.ndarray, value: complex, algebraic: int, rank_tol: float) -> tuple[int, ...]:
    """Jordan block sizes at ``value`` from the nullities of ``(H - value)^k``."""
    n = h.shape[0]
    a = h - value * np.eye(n)
    scale = max(np.linalg.norm(a, 2), 1e-300)
    nullities = [0]
    p = np.eye(n, dtype=np.complex128)
    for k in range(1, algebraic + 1):
        p = p @ a
        nullities.append(min(_nullity(p, rank_tol * scale**k), algebraic))
        if nullities[-1] >= algebraic:
            break
    # at_least[k] = number of blocks of size >= k
    at_least = [nullities[k] - nullities[k - 1] for k in range(1, len(nullities))]
    if nullities[-1] < algebraic:
        # rank test could not resolve the full generalized eigenspace;
        # attribute the rest to the largest block
        at_least.append(0)
    sizes = []
    for k in range(1, len(at_least) + 1):
        nxt = at_least[k] if k < len(at_least) else 0
        sizes += [k] * max(at_least[k - 1] - nxt, 0)
    sizes.sort(reverse=True)
    missing = algebraic - sum(sizes)
    if missing > 0:
        if sizes:
            sizes[0] += missing
        else:
            sizes = [algebraic]
    return tuple(sizes)


def _cluster(h: np.ndarray, w: np.ndarray, cluster_tol: float, rank_tol: float) -> list[Cluster]:
    n = h.shape[0]
    scale = max(1.0, float(np.linalg.norm(h, 2)))
    plain = cluster_tol * scale
    accepted: list[Cluster] = []

    def make(members, centroid, geometric, sizes):
        accepted.append(Cluster(complex(centroid), len(members), geometric, tuple(sorted(members)), sizes))

    def visit(idx: list[int], radius: float):
        for comp in _components(w[idx], radius):
            members = [idx[i] for i in comp]
            m = len(members)
            centroid = complex(np.mean(w[members]))
            if m == 1:
                make(members, w[members[0]], 1, (1,))
                continue
            spread = float(np.max(np.abs(w[members] - centroid)))
            a = h - centroid * np.eye(n)
            anorm = max(float(np.linalg.norm(a, 2)), 1e-300)
            strict = rank_tol * scale
            if spread <= plain or radius <= plain:
                geometric = min(max(_nullity(a, max(strict, 2 * spread)), 1), m)
                sizes = (1,) * m if geometric == m else _weyr_sizes(h, centroid, m, rank_tol)
                make(members, centroid, geometric, sizes)
                continue
            geometric = _nullity(a, strict)
            power = np.linalg.matrix_power(a, m)
            if geometric >= 1 and _nullity(power, rank_tol * anorm**m) >= m:
                geometric = min(geometric, m)
                sizes = (1,) * m if geometric == m else _weyr_sizes(h, centroid, m, rank_tol)
                make(members, centroid, geometric, sizes)
                continue
            visit(members, radius / 10)

    visit(list(range(n)), _SEARCH_RADIUS * scale)
    accepted.sort(key=lambda c: c.members[0])
    return accepted


# --------------------------------------------------------------------------
# eigendecomposition


@dataclass(frozen=True)
class SpectralData:
    """Eigen-data with Dirac-normalized right and left eigenvectors.

    Column ``k`` of ``right`` is ``|R_k>`` and column ``k`` of ``left`` is
    ``|L_k>`` (so the left eigenvector row is ``left[:, k].conj()``).  For an
    exceptional cluster only its geometric eigenspace is present, so the
    number of columns can be smaller than ``n``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    report: DegeneracyReport
    raw_eigenvalues: np.ndarray
    matrix: np.ndarray | None = None
    cluster_index: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        for name in ("eigenvalues", "right", "left", "raw_eigenvalues", "matrix", "cluster_index"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen(value))

    @property
    def n(self) -> int:
        return self.right.shape[0]

    @property
    def overlaps(self) -> np.ndarray:
        """``<L_k|R_k>`` for every stored pair."""
        return np.einsum("ik,ik->k", self.left.conj(), self.right)

    @property
    def complete(self) -> bool:
        return self.right.shape[1] == self.n

    def resolution_of_identity(self) -> np.ndarray:
        """``sum_k |R_k><L_k| / <L_k|R_k>``; equals the identity when diagonalizable."""
        return (self.right / self.overlaps) @ dagger(self.left)

    def reconstruct(self) -> np.ndarray:
        """``sum_k eps_k |R_k><L_k| / <L_k|R_k>``."""
        return (self.right * (self.eigenvalues / self.overlaps)) @ dagger(self.left)


def _cluster_vectors(h: np.ndarray, c: Cluster) -> tuple[np.ndarray, np.ndarray]:
    n = h.shape[0]
    g = c.geometric
    a = h - c.value * np.eye(n)
    _, _, vh = np.linalg.svd(a)
    right = dagger(vh[n - g:])
    _, _, vh = np.linalg.svd(dagger(a))
    left = dagger(vh[n - g:])
    if c.kind != "exceptional":
        # dual basis: <L_a|R_b> proportional to delta_ab
        m = dagger(left) @ right
        left = left @ np.linalg.inv(dagger(m))
    right = np.stack([fix_phase(v / np.linalg.norm(v)) for v in right.T], axis=1)
    left = np.stack([fix_phase(v / np.linalg.norm(v)) for v in left.T], axis=1)
    return right, left


def eig_biorthogonal(
    h,
    tol: float | None = None,
    cluster_tol: float = CLUSTER_TOL,
) -> SpectralData:
    """Eigenvalues with paired right/left eigenvectors of ``h``.

    Right and left vectors are each scaled to unit Euclidean norm and
    phase-fixed with :func:`fix_phase`. Within a diabolic cluster the right
    vectors are orthonormal and the left vectors are the dual basis.
    Left vectors are eigenvectors of ``h^dagger`` at the conjugate cluster
    value. Exceptional clusters contribute only their geometric eigenspace.
    """
    h = as_cmatrix(h, "H")
    tol = default_tol() if tol is None else tol
    try:
        w = np.linalg.eigvals(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    report = DegeneracyReport(tuple(_cluster(h, w, cluster_tol, tol)), h.shape[0])
    values, rights, lefts, index = [], [], [], []
    for ci, c in enumerate(report.clusters):
        r, l = _cluster_vectors(h, c)
        rights.append(r)
        lefts.append(l)
        values += [c.value] * c.geometric
        index += [ci] * c.geometric
    return SpectralData(
        eigenvalues=np.array(values, dtype=np.complex128),
        right=np.concatenate(rights, axis=1),
        left=np.concatenate(lefts, axis=1),
        report=report,
        raw_eigenvalues=w,
        matrix=h,
        cluster_index=np.array(index, dtype=int),
    )


def classify_degeneracies(
    h,
    spec: SpectralData | None = None,
    cluster_tol: float = CLUSTER_TOL,
    tol: float | None = None,
) -> DegeneracyReport:
    """Group eigenvalues into nondegenerate, diabolic and exceptional clusters."""
    h = as_cmatrix(h, "H")
    tol = default_tol() if tol is None else tol
    w = spec.raw_eigenvalues if spec is not None else np.linalg.eigvals(h)
    return DegeneracyReport(tuple(_cluster(h, np.asarray(w), cluster_tol, tol)), h.shape[0])


# --------------------------------------------------------------------------
# Jordan chains


@dataclass(frozen=True)
class JordanChain:
    """Generalized eigenvectors ``v_1 .. v_N`` as columns of ``vectors``.

    ``(H - eigenvalue) v_1 = 0`` and ``(H - eigenvalue) v_{m+1} = v_m``.
    """

    eigenvalue: complex
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vectors", _frozen(np.asarray(self.vectors, dtype=np.complex128)))

    def __len__(self) -> int:
        return self.vectors.shape[1]

    def residuals(self, h) -> np.ndarray:
        """``||(H - lambda) v_{m+1} - v_m||`` with ``v_0 = 0``."""
        h = np.asarray(h)
        a = h - self.eigenvalue * np.eye(h.shape[0])
        prev = np.zeros(h.shape[0], dtype=np.complex128)
        out = []
        for v in self.vectors.T:
            out.append(float(np.linalg.norm(a @ v - prev)))
            prev = v
        return np.array(out)


def jordan_chain(h, eigenvalue: complex, tol: float = 1e-8, order: int | None = None) -> JordanChain:
    """Jordan chain grown upward from the eigenvector at ``eigenvalue``.

    Each successor is the minimum-norm least-squares solution of
    ``(H - lambda) v_{m+1} = v_m``, which makes it orthogonal to the
    eigenvector. Growth stops when the relative residual exceeds ``tol``.

    Parameters
    ----------
    h : array_like
        Square matrix.
    eigenvalue : complex
        Eigenvalue with a one-dimensional eigenspace.
    tol : float
        Relative residual accepted for each chain step, and the relative
        singular-value cutoff used for the nullspace and pseudo-inverse.
    order : int, optional
        Expected chain length. A shorter chain raises :class:`ChainError`;
        growth stops once the length is reached.
    """
    h = as_cmatrix(h, "H")
    n = h.shape[0]
    a = h - eigenvalue * np.eye(n)
    null_tol = min(tol, default_tol())
    kernel = nullspace_basis(a, null_tol)
    if kernel.shape[1] == 0:
        raise ChainError(f"{eigenvalue} is not an eigenvalue at tol={null_tol:g}")
    if kernel.shape[1] > 1:
        raise ChainError(
            f"eigenspace at {eigenvalue} has dimension {kernel.shape[1]}; use jordan_basis"
        )
    chain = [fix_phase(kernel[:, 0])]
    u, s, vh = np.linalg.svd(a)
    keep = s > null_tol * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    pinv = dagger(vh[keep]) @ np.diag(1 / s[keep]) @ dagger(u[:, keep])
    limit = n if order is None else order
    while len(chain) < limit:
        prev = chain[-1]
        nxt = pinv @ prev
        if np.linalg.norm(a @ nxt - prev) > tol * np.linalg.norm(prev):
            break
        chain.append(nxt)
    if order is not None and len(chain) < order:
        raise ChainError(f"chain at {eigenvalue} has length {len(chain)}, expected {order}")
    return JordanChain(complex(eigenvalue), np.stack(chain, axis=1))


def _orth(x: np.ndarray, tol: float) -> np.ndarray:
    if x.size == 0:
        return x.reshape(x.shape[0], 0)
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    return u[:, s > tol * s[0]]


def jordan_basis(h, cluster: Cluster, tol: float | None = None) -> list[JordanChain]:
    """All Jordan chains of one cluster, built top-down from kernel powers.

    Generators at level ``j`` are chosen orthogonal to ``ker (H-c)^{j-1}``
    plus the vectors already supplied by longer chains; each generator
    ``x`` yields the chain ``[(H-c)^{j-1} x, ..., (H-c) x, x]``.
    """
    h = as_cmatrix(h, "H")
    tol = default_tol() if tol is None else tol
    n = h.shape[0]
    lam = cluster.value
    sizes = cluster.jordan_sizes or (1,) * cluster.algebraic
    if all(s == 1 for s in sizes):
        kernel = nullspace_basis(h - lam * np.eye(n), tol)[:, : cluster.geometric]
        return [JordanChain(lam, fix_phase(v)[:, None]) for v in kernel.T]
    a = h - lam * np.eye(n)
    anorm = max(float(np.linalg.norm(a, 2)), 1e-300)
    depth = max(sizes)
    kernels = [np.zeros((n, 0), dtype=np.complex128)]
    p = np.eye(n, dtype=np.complex128)
    for j in range(1, depth + 1):
        p = p @ a
        s = np.linalg.svd(p, compute_uv=False)
        count = min(int(np.count_nonzero(s <= tol * anorm**j)), cluster.algebraic)
        _, _, vh = np.linalg.svd(p)
        kernels.append(dagger(vh[n - count:]))
    chains: list[list[np.ndarray]] = []
    for level in range(depth, 0, -1):
        wanted = sum(1 for s in sizes if s == level)
        if wanted == 0:
            continue
        # vectors already present at this level from longer chains
        present = [c[level - 1] for c in chains if len(c) >= level]
        blocked = np.concatenate([kernels[level - 1]] + [v[:, None] for v in present], axis=1)
        q = _orth(blocked, tol) if blocked.shape[1] else blocked
        cand = kernels[level] - q @ (dagger(q) @ kernels[level]) if q.shape[1] else kernels[level]
        gens = _orth(cand, tol)[:, :wanted]
        for x in gens.T:
            vecs = [x]
            for _ in range(level - 1):
                vecs.append(a @ vecs[-1])
            vecs.reverse()
            factor = _phase_factor(vecs[0]) / np.linalg.norm(vecs[0])
            chains.append([v * factor for v in vecs])
    return [JordanChain(lam, np.stack(c, axis=1)) for c in chains]


# --------------------------------------------------------------------------
# symmetry classification


@dataclass(frozen=True)
class Equivalence:
    """Registered unitary equivalence ``H = U H_sym U^dagger``.

    ``H_sym`` is transpose-symmetric and ``linear_part`` is the linear part
    of its antilinear symmetry, which then intertwines ``H_sym``.
    """

    unitary: np.ndarray
    linear_part: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "unitary", _frozen(np.asarray(self.unitary, dtype=np.complex128)))
        object.__setattr__(self, "linear_part", _frozen(np.asarray(self.linear_part, dtype=np.complex128)))


@dataclass(frozen=True)
class SymmetryDescriptor:
    """Antilinear (or chiral) symmetry class of a Hamiltonian.

    ``kind`` is one of ``"PT"``, ``"anti-PT"``, ``"anyonic"`` or ``"chiral"``.
    For the antilinear classes ``phi`` is the angle for which the spectrum
    is closed under ``eps -> exp(-i phi) eps*`` (0 for PT, pi for anti-PT);
    it is ``None`` for the chiral class. ``linear_part`` is ``L`` in
    ``A = L K`` (``K`` complex conjugation) or the chiral operator itself.
    """

    kind: str
    phi: float | None = 0.0
    linear_part: np.ndarray | None = None
    equivalence: Equivalence | None = None

    KINDS = ("PT", "anti-PT", "anyonic", "chiral")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        if self.kind == "chiral":
            object.__setattr__(self, "phi", None)
        else:
            phi = float(self.phi) % (2 * np.pi)
            if self.kind == "PT" and not np.isclose(phi, 0.0):
                raise ValueError("PT symmetry has phi = 0")
            if self.kind == "anti-PT" and not np.isclose(phi, np.pi):
                raise ValueError("anti-PT symmetry has phi = pi")
            object.__setattr__(self, "phi", phi)
        if self.linear_part is not None:
            object.__setattr__(self, "linear_part", _frozen(np.asarray(self.linear_part, dtype=np.complex128)))

    @property
    def relation_phi(self) -> float | None:
        """Phase for the intertwining relation ``eta H = exp(i phi) H^dagger eta``.

        Conserved observables require the pairing ``eps_b = exp(i phi) eps_a*``,
        the reflection opposite to the one used to label the class.
        """
        if self.phi is None:
            return None
        return (-self.phi) % (2 * np.pi)


def _closed_under(eigs: np.ndarray, image: np.ndarray, tol: float) -> bool:
    cost = np.abs(eigs[:, None] - image[None, :])
    rows, cols = linear_sum_assignment(cost)
    return bool(np.max(cost[rows, cols]) <= tol)


def spectrum_symmetry(eigs: Sequence[complex], tol: float = 1e-8) -> list[SymmetryDescriptor]:
    """Symmetry classes whose eigenvalue reflection maps the multiset to itself.

    PT: ``eps -> eps*``; anti-PT: ``eps -> -eps*``; anyonic(phi):
    ``eps -> exp(-i phi) eps*`` for some other phi; chiral: ``eps -> -eps``.
    The matching tolerance is ``tol * max(1, max|eps|)``. Several classes may
    hold at once; an empty list means none was found.
    """
    w = np.asarray(eigs, dtype=np.complex128).ravel()
    if w.size == 0:
        raise ValueError("need at least one eigenvalue")
    atol = tol * max(1.0, float(np.max(np.abs(w))))
    found: list[SymmetryDescriptor] = []

    def closed_phi(phi):
        return _closed_under(w, np.exp(-1j * phi) * w.conj(), atol)

    if closed_phi(0.0):
        found.append(SymmetryDescriptor("PT", 0.0))
    if closed_phi(np.pi):
        found.append(SymmetryDescriptor("anti-PT", np.pi))

    nonzero = w[np.abs(w) > atol]
    if nonzero.size:
        anchor = nonzero[np.argmax(np.abs(nonzero))]
        seen: list[float] = []
        for partner in nonzero:
            # exp(-i phi) anchor* = partner
            phi = float(np.angle(partner / anchor.conj())) * -1 % (2 * np.pi)
            if not closed_phi(phi):
                continue
            phi = _refine_phi(w, phi, atol)
            if any(_angle_close(phi, p) for p in seen) or _angle_close(phi, 0.0) or _angle_close(phi, np.pi):
                continue
            seen.append(phi)
            found.append(SymmetryDescriptor("anyonic", phi))
    if _closed_under(w, -w, atol):
        found.append(SymmetryDescriptor("chiral", None))
    return found


def _angle_close(a: float, b: float, tol: float = 1e-9) -> bool:
    d = (a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d) <= tol


def _refine_phi(w: np.ndarray, phi: float, atol: float) -> float:
    """Least-squares phase from all matched pairs: exp(-i phi) is proportional to sum eps_a eps_b."""
    image = np.exp(-1j * phi) * w.conj()
    cost = np.abs(w[:, None] - image[None, :])
    rows, cols = linear_sum_assignment(cost)
    # pair a -> partner b with eps_b ~ exp(-i phi) eps_a*
    acc = np.sum(w[cols] * w[rows])
    if abs(acc) <= atol**2:
        return phi
    refined = float(-np.angle(acc)) % (2 * np.pi)
    return refined if _closed_under(w, np.exp(-1j * refined) * w.conj(), atol) else phi
