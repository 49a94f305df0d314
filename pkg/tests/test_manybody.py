"""Exact few-boson diagonalization against independent first-quantized oracles."""

import numpy as np
import pytest

from kaclab import (
    BasisSizeError,
    DisorderRealization,
    GridMismatchError,
    assemble_laplacian,
    build_interaction,
    build_manybody_hamiltonian,
    condensate_occupation,
    ground_state,
    lowest_eigenpairs,
    minimize_hartree,
    one_body_density_matrix,
)
from kaclab.manybody import basis_dimension

from conftest import dense_laplacian, tiny_box_config


def potential_for(real, kappa, N, width=0.5):
    return build_interaction(
        "gaussian", kappa, N, real.config.d, real.h, {"width": width}
    )


def first_quantized_two_boson(real, v):
    """Dense two-particle Hamiltonian on the full tensor grid, the oracle."""
    A, nodes = dense_laplacian(real.mask, real.h)
    M = len(nodes)
    eye = np.eye(M)
    H2 = np.kron(A, eye) + np.kron(eye, A)
    pair = np.zeros((M, M))
    for i, xi in enumerate(nodes):
        for j, xj in enumerate(nodes):
            off = tuple(a - b for a, b in zip(xi, xj))
            pair[i, j] = v.value_at_offset(off)
    H2 += np.diag(pair.ravel())
    vals, vecs = np.linalg.eigh(H2)
    psi = vecs[:, 0].reshape(M, M)
    psi *= np.sign(psi.sum()) or 1.0
    rho1 = psi @ psi.T  # trace one because psi is normalized
    return float(vals[0]), psi, rho1


class TestHamiltonian:
    def test_N1_reproduces_one_body_spectrum(self, corner_blocked_6):
        real = corner_blocked_6
        v = potential_for(real, kappa=1.3, N=2)
        H = build_manybody_hamiltonian(real, v, N=1)
        assert H.basis_dim == real.n_vacant
        one_body = assemble_laplacian(real).to_dense()
        np.testing.assert_allclose(
            np.linalg.eigvalsh(H.matrix.toarray()),
            np.linalg.eigvalsh(one_body),
            atol=1e-10,
        )

    def test_two_sites_two_bosons_noninteracting(self):
        config = tiny_box_config()
        mask = np.zeros((3, 3), dtype=bool)
        mask[1, 0] = mask[1, 1] = True
        real = DisorderRealization.from_mask(config, mask)
        v = potential_for(real, kappa=0.0, N=2)
        H = build_manybody_hamiltonian(real, v, N=2)
        assert H.basis_dim == 3
        gs = ground_state(H)
        h2 = real.h**2
        one_body_ground = (4.0 - 1.0) / h2  # 2x2 stencil block, lower eigenvalue
        assert gs.E_qm == pytest.approx(2.0 * one_body_ground, rel=1e-13)

    def test_one_site_two_bosons_closed_form(self):
        # single configuration: energy = 2 * diagonal + v(0)
        config = tiny_box_config()
        mask = np.zeros((3, 3), dtype=bool)
        mask[1, 1] = True
        real = DisorderRealization.from_mask(config, mask)
        v = potential_for(real, kappa=2.0, N=2)
        gs = ground_state(build_manybody_hamiltonian(real, v, N=2))
        expected = 2.0 * (4.0 / real.h**2) + v.v_at_zero
        assert gs.E_qm == pytest.approx(expected, rel=1e-14)

    def test_matrix_symmetric(self, two_strip_5):
        v = potential_for(two_strip_5, kappa=1.0, N=3)
        H = build_manybody_hamiltonian(two_strip_5, v, N=3).matrix
        asym = abs(H - H.T)
        assert asym.max() < 1e-12

    def test_basis_cap_refused_with_dimension(self, free_3x3):
        v = potential_for(free_3x3, kappa=0.0, N=3)
        dim = basis_dimension(9, 3)
        with pytest.raises(BasisSizeError, match=str(dim)):
            build_manybody_hamiltonian(free_3x3, v, N=3, cap=dim - 1)


class TestGroundState:
    @pytest.mark.parametrize("N", [2, 3])
    def test_noninteracting_condensation(self, free_3x3, N):
        real = free_3x3
        v = potential_for(real, kappa=0.0, N=N)
        lam1 = lowest_eigenpairs(assemble_laplacian(real)).lambda1
        gs = ground_state(build_manybody_hamiltonian(real, v, N=N))
        assert gs.E_qm == pytest.approx(N * lam1, rel=1e-12)
        rho1 = one_body_density_matrix(gs)
        hs = minimize_hartree(real, 1, v, N)
        n_cond = condensate_occupation(rho1, hs.u, real, N)
        assert 1.0 - n_cond / N < 1e-10

    def test_product_state_upper_bound(self, corner_blocked_6):
        # E_qm <= N e1 with the Hartree product trial state, every instance
        real = corner_blocked_6
        for N in (2, 3, 4):
            for kappa in (0.5, 2.0):
                v = potential_for(real, kappa, N)
                hs = minimize_hartree(real, 1, v, N)
                gs = ground_state(build_manybody_hamiltonian(real, v, N))
                assert gs.E_qm <= N * hs.e1 + 1e-10


class TestDensityMatrix:
    def test_product_state_rank_one(self, free_3x3):
        real = free_3x3
        v = potential_for(real, kappa=0.0, N=3)
        gs = ground_state(build_manybody_hamiltonian(real, v, N=3))
        rho1 = one_body_density_matrix(gs)
        phi = lowest_eigenpairs(assemble_laplacian(real)).phi1
        u_sites = phi.ravel()[np.flatnonzero(real.mask.ravel())]
        u_sites = u_sites * real.h  # h^(d/2) per axis: plain l2-normalized
        np.testing.assert_allclose(rho1, np.outer(u_sites, u_sites), atol=1e-12)

    @pytest.mark.parametrize("kappa", [0.0, 0.8, 3.0])
    def test_matches_first_quantized_oracle(self, kappa, two_strip_5):
        real = two_strip_5
        assert real.n_vacant <= 6
        v = potential_for(real, kappa, N=2)
        H = build_manybody_hamiltonian(real, v, N=2)
        gs = ground_state(H)
        rho1 = one_body_density_matrix(gs)
        E_fq, _, rho1_fq = first_quantized_two_boson(real, v)
        assert gs.E_qm == pytest.approx(E_fq, abs=1e-12 * max(1.0, abs(E_fq)))
        np.testing.assert_allclose(rho1, rho1_fq, atol=1e-12)

    def test_psd_and_trace(self, corner_blocked_6):
        v = potential_for(corner_blocked_6, kappa=1.5, N=3)
        gs = ground_state(build_manybody_hamiltonian(corner_blocked_6, v, N=3))
        rho1 = one_body_density_matrix(gs)
        assert np.trace(rho1) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho1).min() >= -1e-12
        np.testing.assert_allclose(rho1, rho1.T, atol=1e-14)


class TestOccupation:
    def test_occupation_identities(self, free_3x3):
        real = free_3x3
        v = potential_for(real, kappa=0.0, N=2)
        gs = ground_state(build_manybody_hamiltonian(real, v, N=2))
        rho1 = one_body_density_matrix(gs)
        pair = lowest_eigenpairs(assemble_laplacian(real))
        # rho1 = |phi1><phi1|: occupation of phi1 is N, of phi2 is 0
        assert condensate_occupation(rho1, pair.phi1, real, 2) == pytest.approx(
            2.0, abs=1e-10
        )
        assert condensate_occupation(rho1, pair.phi2, real, 2) == pytest.approx(
            0.0, abs=1e-10
        )

    def test_depletion_inside_certificate_window(self, corner_blocked_6):
        real = corner_blocked_6
        N = 3
        v = potential_for(real, kappa=0.4, N=N)
        hs = minimize_hartree(real, 1, v, N)
        gs = ground_state(build_manybody_hamiltonian(real, v, N))
        rho1 = one_body_density_matrix(gs)
        n_cond = condensate_occupation(rho1, hs.u, real, N)
        gap = hs.e2 - hs.e1
        assert gap > 0
        depletion = 1.0 - n_cond / N
        assert -1e-12 <= depletion <= v.v_at_zero / (2.0 * gap) + 1e-10

    def test_grid_mismatch_rejected(self, free_3x3, corner_blocked_6):
        v = potential_for(free_3x3, kappa=0.0, N=2)
        gs = ground_state(build_manybody_hamiltonian(free_3x3, v, N=2))
        rho1 = one_body_density_matrix(gs)
        with pytest.raises(GridMismatchError):
            condensate_occupation(rho1, np.ones((4, 4)), free_3x3, 2)
        with pytest.raises(GridMismatchError):
            condensate_occupation(rho1[:5, :5], np.ones((3, 3)), free_3x3, 2)
