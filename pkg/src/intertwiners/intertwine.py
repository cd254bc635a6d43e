"""Conserved observables: Hermitian solutions of ``eta H = exp(i phi) H^dagger eta``.

Three independent constructions are provided:

* :func:`solve_relation` vectorizes the relation and takes the nullspace
  of the resulting ``n^2 x n^2`` operator (brute force, used as the oracle);
* :func:`eta_from_spectrum` builds projector-like dyads from left
  eigenvectors (generalized left vectors at exceptional points);
* :func:`recursive_tower` multiplies a seed by powers of ``H``.

The relation ``eta H = -H eta`` (chiral case) is handled by
:func:`solve_relation` only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    OperatorBasis,
    as_cmatrix,
    dagger,
    default_tol,
    frobenius,
    hermitian_parts,
    hermitian_split,
    independent_count,
    is_hermitian,
    nullspace_basis,
    span_residual,
)
from .spectral import (
    CLUSTER_TOL,
    Cluster,
    DegeneracyReport,
    JordanChain,
    SpectralData,
    SymmetryDescriptor,
    eig_biorthogonal,
    jordan_basis,
    jordan_chain,
)

__all__ = [
    "IntertwinerSet",
    "NoSeedError",
    "Relation",
    "SeedError",
    "SpectrumNotSymmetric",
    "eta_from_spectrum",
    "expected_count",
    "recursive_tower",
    "seed_eta",
    "solve_relation",
    "tower_products",
    "verify_relation",
]

TWO_PI = 2 * np.pi


class SpectrumNotSymmetric(ValueError):
    """The spectrum is not closed under the reflection the relation requires."""


class SeedError(ValueError):
    """The seed handed to the recursive tower violates the relation."""


class NoSeedError(LookupError):
    """No route produced a seed operator."""


@dataclass(frozen=True)
class Relation:
    """``intertwine``: ``eta H = exp(i phi) H^dagger eta``; ``anticommute``: ``eta H = -H eta``."""

    kind: str = "intertwine"
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("intertwine", "anticommute"):
            raise ValueError(f"unknown relation kind {self.kind!r}")
        phi = 0.0 if self.kind == "anticommute" else float(self.phi) % TWO_PI
        if np.isclose(phi, TWO_PI):
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @classmethod
    def pt(cls) -> "Relation":
        return cls("intertwine", 0.0)

    @classmethod
    def anti_pt(cls) -> "Relation":
        return cls("intertwine", np.pi)

    @classmethod
    def anyonic(cls, phi: float) -> "Relation":
        return cls("intertwine", phi)

    @classmethod
    def chiral(cls) -> "Relation":
        return cls("anticommute")

    @classmethod
    def for_symmetry(cls, sym: SymmetryDescriptor) -> "Relation":
        if sym.kind == "chiral":
            return cls.chiral()
        return cls("intertwine", sym.relation_phi)

    @property
    def phase(self) -> complex:
        return complex(np.exp(1j * self.phi))

    def residual_matrix(self, eta: np.ndarray, h: np.ndarray) -> np.ndarray:
        if self.kind == "anticommute":
            return eta @ h + h @ eta
        return eta @ h - self.phase * dagger(h) @ eta

    def operator(self, h: np.ndarray) -> np.ndarray:
        """Matrix of ``eta -> residual_matrix(eta, h)`` acting on column-major ``vec(eta)``."""
        n = h.shape[0]
        eye = np.eye(n)
        if self.kind == "anticommute":
            return np.kron(h.T, eye) + np.kron(eye, h)
        return np.kron(h.T, eye) - self.phase * np.kron(eye, dagger(h))

    def to_json(self) -> dict:
        return {"kind": self.kind, "phi": self.phi}

    @classmethod
    def from_json(cls, obj: dict) -> "Relation":
        return cls(obj.get("kind", "intertwine"), obj.get("phi", 0.0))


def verify_relation(eta, h, rel: Relation = Relation()) -> float:
    """``||eta H - exp(i phi) H^dagger eta||_F / (||eta||_F ||H||_F)`` (or the anticommutator)."""
    eta = np.asarray(eta, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    num = frobenius(rel.residual_matrix(eta, h))
    den = frobenius(eta) * frobenius(h)
    return num / den if den > 0 else num


@dataclass(frozen=True)
class IntertwinerSet:
    """Hermitian solution basis of a relation, with per-operator residuals.

    ``relation`` is ``None`` for stroboscopic sets, whose residuals measure
    the fixed-point equation ``G^dagger eta G = eta`` instead.
    """

    relation: Relation | None
    etas: OperatorBasis
    residuals: np.ndarray
    construction: str
    coefficients: np.ndarray | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.construction not in ("spectral", "recursive", "nullspace", "stroboscopic"):
            raise ValueError(f"unknown construction {self.construction!r}")
        res = np.array(self.residuals, dtype=float)
        res.setflags(write=False)
        object.__setattr__(self, "residuals", res)
        if len(res) != len(self.etas):
            raise ValueError("one residual per operator is required")

    @classmethod
    def build(cls, h, etas: OperatorBasis, rel: Relation, construction: str, **kw) -> "IntertwinerSet":
        res = [verify_relation(e, h, rel) for e in etas]
        return cls(rel, etas, np.array(res), construction, **kw)

    def __len__(self) -> int:
        return len(self.etas)

    def __iter__(self):
        return iter(self.etas)

    def __getitem__(self, k):
        return self.etas[k]

    @property
    def count(self) -> int:
        return len(self.etas)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if len(self.residuals) else 0.0

    def combine(self, coefficients: Sequence[float]) -> np.ndarray:
        """General conserved observable ``sum_k A_k eta_k`` with real weights."""
        return self.etas.combine(coefficients)

    def with_coefficients(self, coefficients: Sequence[float]) -> "IntertwinerSet":
        return IntertwinerSet(
            self.relation, self.etas, self.residuals, self.construction,
            np.asarray(coefficients, dtype=float), dict(self.notes),
        )

    def span_residual(self, other: "IntertwinerSet | Sequence[np.ndarray]", tol: float | None = None) -> float:
        others = other.etas.elements if isinstance(other, IntertwinerSet) else list(other)
        return span_residual(self.etas.elements, others, tol)


# --------------------------------------------------------------------------
# brute force


def _hermitian_solutions(op: np.ndarray, n: int, tol: float) -> OperatorBasis:
    kernel = nullspace_basis(op, tol)
    mats = [v.reshape(n, n, order="F") for v in kernel.T]
    return hermitian_split(mats, tol)


def solve_relation(h, rel: Relation = Relation(), tol: float | None = None) -> IntertwinerSet:
    """All Hermitian solutions of the relation, from the nullspace of its vectorized operator.

    For ``intertwine`` the solution space is closed under the adjoint, so
    splitting each nullspace vector into Hermitian and anti-Hermitian
    parts gives a real basis of the Hermitian solutions. For
    ``anticommute`` it is not; the Hermitian solutions are those of
    ``eta H + H eta = 0`` and ``H^dagger eta + eta H^dagger = 0`` together,
    whose joint nullspace is closed under the adjoint.
    """
    h = as_cmatrix(h, "H")
    tol = default_tol() if tol is None else tol
    n = h.shape[0]
    op = rel.operator(h)
    if rel.kind == "anticommute":
        op = np.vstack([op, rel.operator(dagger(h))])
    basis = _hermitian_solutions(op, n, tol)
    return IntertwinerSet.build(h, basis, rel, "nullspace")


# --------------------------------------------------------------------------
# spectral construction


@dataclass
class _Block:
    cluster: int
    value: complex
    left: np.ndarray  # generalized left vectors |s_i> as columns, i = 1..size

    @property
    def size(self) -> int:
        return self.left.shape[1]


def _blocks(spec: SpectralData, report: DegeneracyReport, chains: Sequence[JordanChain] | None, tol: float) -> list[_Block]:
    h = spec.matrix
    chain_map: dict[int, list[JordanChain]] = {}
    exceptional = [i for i, c in enumerate(report.clusters) if c.kind == "exceptional"]
    if exceptional and h is None:
        raise ValueError("exceptional clusters need the matrix stored in SpectralData")
    for ci in exceptional:
        c = report.clusters[ci]
        given = [ch for ch in (chains or []) if abs(ch.eigenvalue - c.value) <= CLUSTER_TOL * max(1.0, abs(c.value)) + 1e-12]
        if given:
            chain_map[ci] = given
        elif c.geometric == 1:
            chain_map[ci] = [jordan_chain(h, c.value, order=c.algebraic)]
        else:
            chain_map[ci] = jordan_basis(h, c, tol)
    if not chain_map:
        blocks = []
        for k in range(len(spec.eigenvalues)):
            ci = int(spec.cluster_index[k])
            blocks.append(_Block(ci, report.clusters[ci].value, spec.left[:, k:k + 1]))
        return blocks
    # right generalized eigenbasis; the rows of its inverse are generalized left vectors
    cols, layout = [], []
    for ci, c in enumerate(report.clusters):
        if ci in chain_map:
            for ch in chain_map[ci]:
                layout.append((ci, len(cols), len(ch)))
                cols += list(ch.vectors.T)
        else:
            for k in np.flatnonzero(spec.cluster_index == ci):
                layout.append((ci, len(cols), 1))
                cols.append(spec.right[:, k])
    s = np.stack(cols, axis=1)
    if s.shape[1] != s.shape[0]:
        raise ValueError("generalized eigenvectors do not span the space")
    dual = dagger(np.linalg.inv(s))
    blocks = []
    for ci, start, size in layout:
        blocks.append(_Block(ci, report.clusters[ci].value, dual[:, start:start + size]))
    return blocks


def expected_count(report: DegeneracyReport, rel: Relation = Relation(), tol: float = CLUSTER_TOL) -> int:
    """Dimension of the Hermitian solution space predicted by the Jordan structure.

    Blocks ``a`` and ``b`` pair when ``lambda_b = exp(i phi) lambda_a*`` and
    contribute ``min(N_a, N_b)``; this gives ``n`` for nondegenerate or
    purely exceptional spectra and ``sum k_D^2`` with diabolic clusters.
    """
    if rel.kind != "intertwine":
        raise ValueError("counting formula applies to intertwining relations")
    sizes = [(c.value, s) for c in report.clusters for s in (c.jordan_sizes or (1,) * c.algebraic)]
    scale = max([1.0] + [abs(v) for v, _ in sizes])
    total = 0
    for (va, na), (vb, nb) in itertools.product(sizes, repeat=2):
        if abs(vb - rel.phase * np.conj(va)) <= tol * scale:
            total += min(na, nb)
    return total


def eta_from_spectrum(
    spec: SpectralData,
    report: DegeneracyReport | None = None,
    chains: Sequence[JordanChain] | None = None,
    rel: Relation = Relation(),
    tol: float | None = None,
) -> IntertwinerSet:
    """Conserved observables assembled from (generalized) left eigenvectors.

    * real simple eigenvalue ``k``: ``|L_k><L_k|``;
    * simple pair ``(alpha, alpha*)``: ``(|L_a><L_a*| + h.c.)/2`` and
      ``i(|L_a><L_a*| - h.c.)/2``;
    * anything else (diabolic clusters, Jordan blocks): with generalized
      left vectors ``s_{a,i}`` of block ``a`` and ``s_{b,j}`` of a paired
      block ``b``, the operators ``sum_{i+j=m} exp(-i phi j) |s_{a,i}><s_{b,j}|``
      for ``m = max(N_a, N_b)+1 .. N_a+N_b``, reduced by
      :func:`hermitian_split`.

    For ``phi != 0`` "real" and "pair" refer to the reflection
    ``eps -> exp(i phi) eps*``.
    """
    if rel.kind != "intertwine":
        raise ValueError("spectral construction is defined for intertwining relations")
    tol = default_tol() if tol is None else tol
    report = spec.report if report is None else report
    blocks = _blocks(spec, report, chains, tol)
    values = np.array([b.value for b in blocks])
    scale = max(1.0, float(np.max(np.abs(values))))
    c = rel.phase

    partners: list[list[int]] = []
    for b in blocks:
        image = c * np.conj(b.value)
        match = [j for j, o in enumerate(blocks) if abs(o.value - image) <= CLUSTER_TOL * scale]
        if not match:
            raise SpectrumNotSymmetric(
                f"eigenvalue {b.value:.6g} has no partner at {image:.6g}"
            )
        partners.append(match)

    simple_ops: list[np.ndarray] = []
    other_ops: list[np.ndarray] = []
    for a, blk in enumerate(blocks):
        for bidx in partners[a]:
            if bidx < a:
                continue
            other = blocks[bidx]
            na, nb = blk.size, other.size
            simple = na == nb == 1 and len(partners[a]) == 1
            if simple and bidx == a:
                v = blk.left[:, 0]
                simple_ops.append(np.outer(v, v.conj()))
                continue
            if simple:
                m = np.outer(blk.left[:, 0], other.left[:, 0].conj())
                simple_ops.append((m + dagger(m)) / 2)
                simple_ops.append(1j * (m - dagger(m)) / 2)
                continue
            for lo, hi in ((a, bidx), (bidx, a)) if bidx != a else ((a, a),):
                ba, bb = blocks[lo], blocks[hi]
                for m in range(max(ba.size, bb.size) + 1, ba.size + bb.size + 1):
                    op = np.zeros((spec.n, spec.n), dtype=np.complex128)
                    for i in range(1, ba.size + 1):
                        j = m - i
                        if 1 <= j <= bb.size:
                            op += np.exp(-1j * rel.phi * j) * np.outer(ba.left[:, i - 1], bb.left[:, j - 1].conj())
                    other_ops.append(op)

    elements = []
    for op in simple_ops:
        if not is_hermitian(op, 1e-8):
            herm, anti = hermitian_parts(op)
            op = herm if frobenius(herm) >= frobenius(anti) else anti
        elements.append((op + dagger(op)) / 2)
    if other_ops:
        elements += list(hermitian_split(other_ops, tol).elements)
    basis = OperatorBasis(tuple(elements), tol)
    h = spec.matrix if spec.matrix is not None else spec.reconstruct()
    return IntertwinerSet.build(h, basis, rel, "spectral", notes={"expected": expected_count(report, rel)})


# --------------------------------------------------------------------------
# recursive construction


def _object_matmul(a, b):
    return np.asarray(a, dtype=object) @ np.asarray(b, dtype=object)


def tower_products(seed, h, count: int, rel: Relation = Relation(), dps: int | None = None) -> list[np.ndarray]:
    """Raw recursion products ``eta_1, c eta_1 H, c^2 eta_1 H^2, ...``.

    ``c = exp(i phi/2)`` for an intertwining relation and ``1`` for an
    anticommuting one. With ``dps`` set, the products are computed in
    ``mpmath`` at that many decimal digits from the exact binary values of
    the inputs and returned as object arrays.
    """
    if dps is None:
        seed = np.asarray(seed, dtype=np.complex128)
        h = np.asarray(h, dtype=np.complex128)
        c = np.exp(0.5j * rel.phi) if rel.kind == "intertwine" else 1.0
        out = [seed]
        for _ in range(count - 1):
            out.append(c * out[-1] @ h)
        return out
    import mpmath

    with mpmath.workdps(dps):
        to_mp = np.vectorize(lambda z: mpmath.mpc(complex(z)), otypes=[object])
        s = seed if np.asarray(seed).dtype == object else to_mp(np.asarray(seed, dtype=np.complex128))
        hm = h if np.asarray(h).dtype == object else to_mp(np.asarray(h, dtype=np.complex128))
        c = mpmath.expjpi(mpmath.mpf(rel.phi) / (2 * mpmath.pi)) if rel.kind == "intertwine" and rel.phi else mpmath.mpc(1)
        out = [s]
        for _ in range(count - 1):
            out.append(c * _object_matmul(out[-1], hm))
    return out


def recursive_tower(eta1, h, rel: Relation = Relation(), tol: float | None = None) -> IntertwinerSet:
    """Grow conserved observables from a seed by repeated multiplication with ``H``.

    Products that are Hermitian at ``tol`` (relative to ``||eta_1|| ||H||^k``)
    are kept as they are (so the
    tower from ``P`` is literally ``P, P H, P H^2, ...``); otherwise their
    Hermitian and anti-Hermitian parts are kept when they add a new
    direction. Growth stops as soon as a step adds nothing, which happens
    after at most ``n`` steps by the Cayley-Hamilton theorem.
    """
    h = as_cmatrix(h, "H")
    eta1 = as_cmatrix(eta1, "eta1")
    tol = default_tol() if tol is None else tol
    seed_res = verify_relation(eta1, h, rel)
    if seed_res > max(tol, 1e-12) * 100:
        raise SeedError(f"seed violates the relation (residual {seed_res:.3g})")
    n = h.shape[0]
    c = np.exp(0.5j * rel.phi) if rel.kind == "intertwine" else 1.0

    kept: list[np.ndarray] = []
    hnorm = frobenius(h)

    def offer(raw: np.ndarray, scale: float) -> bool:
        # scale = ||eta_1|| ||H||^k bounds the product; below tol*scale it is rounding noise
        if frobenius(raw) <= tol * scale:
            return False
        if frobenius(raw - dagger(raw)) <= tol * scale:
            cands = [(raw + dagger(raw)) / 2]
        else:
            cands = [p for p in hermitian_parts(raw) if frobenius(p) > tol * scale]
            if rel.kind == "anticommute":
                cands = [p for p in cands if verify_relation(p, h, rel) <= max(tol, 1e-12) * 100]
        grew = False
        for p in cands:
            if independent_count(kept + [p], tol) > len(kept):
                kept.append(p)
                grew = True
        return grew

    raw, scale = eta1, frobenius(eta1)
    offer(raw, scale)
    for _ in range(n * n):
        raw = c * raw @ h
        scale *= hnorm
        if not offer(raw, scale):
            break
    basis = OperatorBasis(tuple(kept), tol)
    return IntertwinerSet.build(h, basis, rel, "recursive")


# --------------------------------------------------------------------------
# seeds


def seed_eta(h, sym: SymmetryDescriptor | None = None, tol: float | None = None) -> np.ndarray:
    """First conserved observable for the recursive tower.

    Tried in order: the linear part ``L`` of the symmetry when ``H`` is
    transpose-symmetric; ``U L_sym U^dagger`` for a registered equivalence
    ``H = U H_sym U^dagger``; the first element of :func:`solve_relation`.
    """
    h = as_cmatrix(h, "H")
    tol = default_tol() if tol is None else tol
    rel = Relation.for_symmetry(sym) if sym is not None else Relation.pt()
    accept = max(tol, 1e-12) * 100
    scale = frobenius(h)
    if sym is not None and sym.linear_part is not None and frobenius(h - h.T) <= tol * scale:
        cand = np.asarray(sym.linear_part)
        if is_hermitian(cand, tol) and verify_relation(cand, h, rel) <= accept:
            return cand.copy()
    if sym is not None and sym.equivalence is not None:
        u = np.asarray(sym.equivalence.unitary)
        hsym = dagger(u) @ h @ u
        if frobenius(hsym - hsym.T) <= max(tol, 1e-12) * 100 * scale:
            cand = u @ np.asarray(sym.equivalence.linear_part) @ dagger(u)
            if verify_relation(cand, h, rel) <= accept:
                return (cand + dagger(cand)) / 2
    sol = solve_relation(h, rel, tol)
    if len(sol):
        return np.array(sol.etas[0])
    raise NoSeedError("no conserved observable found for this Hamiltonian")
