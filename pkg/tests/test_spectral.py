from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intertwiners.linalg import dagger
from intertwiners.models import SpinModelParams, build_dimer, build_pt_spin, h3_reference
from intertwiners.spectral import (
    ChainError,
    SymmetryDescriptor,
    classify_degeneracies,
    eig_biorthogonal,
    jordan_basis,
    jordan_chain,
    spectrum_symmetry,
)

TOL = 1e-10
RECON_TOL = 1e-8
THETAS = [0.0, 0.2, 0.5, 0.8, 1.1, 1.4]


def h3(gamma, J=1.0):
    return build_pt_spin(SpinModelParams(3, J, gamma))[0]


def same_ray(u, v):
    return abs(abs(np.vdot(u, v)) - np.linalg.norm(u) * np.linalg.norm(v))


# -- eigendecomposition ----------------------------------------------------


@pytest.mark.parametrize("theta", [0.3, 0.9, 1.3])
def test_h3_unbroken_matches_closed_form(theta):
    spec = eig_biorthogonal(h3(np.sin(theta)))
    ref = h3_reference(theta=theta)
    for k in range(3):
        j = int(np.argmin(np.abs(spec.eigenvalues - ref.eigenvalues[k])))
        assert abs(spec.eigenvalues[j] - ref.eigenvalues[k]) < TOL
        assert same_ray(spec.right[:, j], ref.right[:, k]) < TOL


@pytest.mark.parametrize("beta", [0.2, 0.8, 1.5])
def test_h3_broken_spectrum(beta):
    spec = eig_biorthogonal(h3(np.cosh(beta)))
    expected = np.array([1j * np.sinh(beta), -1j * np.sinh(beta), 0])
    got = spec.eigenvalues[np.argsort(spec.eigenvalues.imag)]
    np.testing.assert_allclose(got, expected[np.argsort(expected.imag)], atol=1e-9)


def test_hermitian_diag():
    spec = eig_biorthogonal(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(spec.eigenvalues, [1, 2], atol=TOL)
    np.testing.assert_allclose(np.abs(spec.right), np.eye(2), atol=TOL)
    np.testing.assert_allclose(np.abs(spec.left), np.eye(2), atol=TOL)
    np.testing.assert_allclose(spec.overlaps, [1, 1], atol=TOL)


def test_dirac_normalization_and_residuals():
    h = h3(0.7)
    spec = eig_biorthogonal(h)
    np.testing.assert_allclose(np.linalg.norm(spec.right, axis=0), 1, atol=TOL)
    np.testing.assert_allclose(np.linalg.norm(spec.left, axis=0), 1, atol=TOL)
    for k, e in enumerate(spec.eigenvalues):
        assert np.linalg.norm(h @ spec.right[:, k] - e * spec.right[:, k]) <= TOL * np.linalg.norm(h)
        assert np.linalg.norm(dagger(h) @ spec.left[:, k] - np.conj(e) * spec.left[:, k]) <= TOL * np.linalg.norm(h)


@pytest.mark.parametrize("theta", THETAS)
def test_biorthogonality_and_identity_on_theta_grid(theta):
    spec = eig_biorthogonal(h3(np.sin(theta)))
    cross = dagger(spec.left) @ spec.right
    off = cross - np.diag(np.diag(cross))
    assert np.max(np.abs(off)) <= 1e-9
    np.testing.assert_allclose(spec.resolution_of_identity(), np.eye(3), atol=1e-9)


def test_reconstruction_random():
    rng = np.random.default_rng(3)
    h = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    spec = eig_biorthogonal(h)
    assert np.linalg.norm(h - spec.reconstruct()) <= RECON_TOL * np.linalg.norm(h)


def test_diabolic_right_vectors_orthonormal():
    h = np.diag([2.0, 2.0, 3.0]).astype(complex)
    h[0, 2] = 0.5
    spec = eig_biorthogonal(h)
    block = spec.right[:, spec.cluster_index == spec.cluster_index[0]]
    np.testing.assert_allclose(dagger(block) @ block, np.eye(block.shape[1]), atol=TOL)
    np.testing.assert_allclose(spec.resolution_of_identity(), np.eye(3), atol=1e-9)


def test_spectral_data_is_frozen():
    spec = eig_biorthogonal(h3(0.2))
    with pytest.raises(ValueError):
        spec.right[0, 0] = 0


# -- degeneracy classification ---------------------------------------------


def test_classify_nondegenerate():
    rep = classify_degeneracies(h3(0.5))
    assert [c.kind for c in rep.clusters] == ["nondegenerate"] * 3


def test_classify_h3_ep():
    rep = classify_degeneracies(h3(1.0))
    assert len(rep.clusters) == 1
    c = rep.clusters[0]
    assert (c.algebraic, c.geometric, c.kind, c.order) == (3, 1, "exceptional", 3)
    assert abs(c.value) < 1e-10


def test_classify_diabolic_plus_simple():
    rep = classify_degeneracies(np.diag([1.5, 1.5, -0.3]))
    kinds = sorted((c.kind, c.algebraic) for c in rep.clusters)
    assert kinds == [("diabolic", 2), ("nondegenerate", 1)]
    assert rep.diabolic[0].k_d == 2


@pytest.mark.parametrize("n", [1, 2, 4])
def test_classify_identity(n):
    rep = classify_degeneracies(np.eye(n))
    if n == 1:
        assert rep.clusters[0].kind == "nondegenerate"
    else:
        assert rep.clusters[0].kind == "diabolic" and rep.clusters[0].k_d == n


@pytest.mark.parametrize("D", [2, 3, 4, 5, 6])
def test_pt_spin_single_ep(D):
    h, _ = build_pt_spin(SpinModelParams(D, 1.0, 1.0))
    rep = classify_degeneracies(h)
    assert len(rep.clusters) == 1
    c = rep.clusters[0]
    assert c.algebraic == D and c.geometric == 1 and c.order == D


def test_near_degenerate_pairs_stay_separate():
    rep = classify_degeneracies(np.diag([0.0, 1e-6]))
    assert len(rep.clusters) == 2


def test_near_ep_inside_tolerance_is_an_ep():
    rep = classify_degeneracies(np.array([[0, 1], [1e-12, 0]]))
    assert rep.clusters[0].kind == "exceptional"


def test_report_multiplicities_sum():
    rng = np.random.default_rng(0)
    h = rng.normal(size=(6, 6))
    rep = classify_degeneracies(h)
    assert sum(c.algebraic for c in rep.clusters) == 6
    assert all(c.geometric <= c.algebraic for c in rep.clusters)


# -- Jordan chains ---------------------------------------------------------


def test_h3_chain_matches_printed_vectors():
    h = h3(1.0)
    ch = jordan_chain(h, 0.0)
    assert len(ch) == 3
    v1 = np.array([-1, np.sqrt(2) * 1j, 1]) / 2
    v2 = 1j * np.array([1, 0, 1]) / 2
    assert same_ray(ch.vectors[:, 0], v1) < TOL
    # same global phase on both members; the minimum-norm gauge reproduces the printed v2
    phase = np.vdot(v1, ch.vectors[:, 0])
    np.testing.assert_allclose(ch.vectors[:, 1], phase * v2, atol=TOL)
    assert np.max(ch.residuals(h)) < 1e-12


def test_nilpotent_two_by_two():
    ch = jordan_chain(np.array([[0, 1], [0, 0]]), 0.0)
    np.testing.assert_allclose(np.abs(ch.vectors), np.eye(2), atol=TOL)


def test_chain_of_simple_eigenvalue():
    h = np.diag([1.0, 2.0])
    ch = jordan_chain(h, 2.0)
    assert len(ch) == 1
    assert same_ray(ch.vectors[:, 0], [0, 1]) < TOL


def test_chain_claimed_order_too_long():
    with pytest.raises(ChainError):
        jordan_chain(np.diag([1.0, 2.0]), 1.0, order=2)


@pytest.mark.parametrize("D", [2, 3, 4, 5])
def test_chain_properties(D):
    h, _ = build_pt_spin(SpinModelParams(D, 1.0, 1.0))
    ch = jordan_chain(h, 0.0, order=D)
    a = h
    assert np.linalg.matrix_rank(ch.vectors, tol=1e-8) == D
    assert np.max(ch.residuals(h)) < 1e-8
    for m in range(1, D + 1):
        v = ch.vectors[:, m - 1]
        assert np.linalg.norm(np.linalg.matrix_power(a, m) @ v) < 1e-8
        assert np.linalg.norm(np.linalg.matrix_power(a, m - 1) @ v) > 1e-6


def test_jordan_basis_two_blocks():
    h = np.zeros((4, 4), dtype=complex)
    h[0, 1] = 1.0
    h[2, 3] = 1.0
    rep = classify_degeneracies(h)
    c = rep.clusters[0]
    assert c.geometric == 2 and c.jordan_sizes == (2, 2)
    chains = jordan_basis(h, c)
    assert sorted(len(ch) for ch in chains) == [2, 2]
    assert np.linalg.matrix_rank(np.hstack([ch.vectors for ch in chains])) == 4


# -- symmetry classifier ---------------------------------------------------


def kinds(eigs):
    return sorted(s.kind for s in spectrum_symmetry(eigs))


def test_symmetry_real_triplet():
    assert "PT" in kinds([1, -1, 0])
    assert "chiral" in kinds([1, -1, 0])


def test_symmetry_anyonic_line():
    eigs = [np.exp(-1j * np.pi / 4), 2 * np.exp(-1j * np.pi / 4)]
    syms = spectrum_symmetry(eigs)
    anyonic = [s for s in syms if s.kind == "anyonic"]
    assert len(anyonic) == 1
    assert abs(anyonic[0].phi - np.pi / 2) < 1e-9


def test_symmetry_dimer():
    h, _ = build_dimer(1.0, 0.4)
    assert kinds(np.linalg.eigvals(h)) == ["PT", "anti-PT", "chiral"]


def test_symmetry_random_is_empty():
    rng = np.random.default_rng(7)
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert spectrum_symmetry(np.linalg.eigvals(h)) == []


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=1, max_size=6),
       st.randoms())
def test_symmetry_permutation_invariant(values, rnd):
    eigs = values + [np.conj(v) for v in values]
    shuffled = list(eigs)
    rnd.shuffle(shuffled)
    a = [(s.kind, None if s.phi is None else round(s.phi, 6)) for s in spectrum_symmetry(eigs)]
    b = [(s.kind, None if s.phi is None else round(s.phi, 6)) for s in spectrum_symmetry(shuffled)]
    assert sorted(a, key=str) == sorted(b, key=str)
    assert ("PT", 0.0) in a


def test_descriptor_validation():
    with pytest.raises(ValueError):
        SymmetryDescriptor("PT", np.pi)
    with pytest.raises(ValueError):
        SymmetryDescriptor("anti-PT", 0.0)
    assert SymmetryDescriptor("anyonic", np.pi / 2).relation_phi == pytest.approx(3 * np.pi / 2)
