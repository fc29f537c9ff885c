"""Fisher-information machinery: pure and SLD-based matrices, bounds,
rotations, block inequality, classical information of measurements."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_hermitian, two_qubit_z_network
from qsnet import (
    QFIM,
    SensorNetwork,
    SensorSpec,
    block_inverse_residuals,
    cfim,
    encode,
    global_generators,
    inverse_block,
    orthogonal_completion,
    qcrb,
    qfim_mixed,
    qfim_pure,
    rotate_qfim,
)
from qsnet.hilbert import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityOperator, PureState, identity
from qsnet.sampling import haar_state, random_density, random_spd, trial_rng


def _plus_state() -> PureState:
    return PureState(np.array([1.0, 1.0]) / np.sqrt(2), (2,))


def _single_qubit_net() -> SensorNetwork:
    return SensorNetwork((SensorSpec(2, (SIGMA_Z / 2,), np.diag([0.0, 1.0])),))


def _sqrtm_psd(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def _root_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    # Eigenvalues of sqrt(rho) sigma sqrt(rho) that are exact zeros come out
    # as +-1e-16 noise; sqrt would amplify that to ~1e-8 and swamp the
    # finite-difference signal, so floor them first. A unitary family
    # preserves rank, making the floored values exact zeros analytically.
    root = _sqrtm_psd(rho)
    w = np.linalg.eigvalsh(root @ sigma @ root)
    w[w < 1e-12 * max(1.0, float(w[-1]))] = 0.0
    return float(np.sum(np.sqrt(w)))


class TestQfimPure:
    def test_plus_state_unit_information(self):
        net = _single_qubit_net()
        fim = qfim_pure(_plus_state(), global_generators(net), net.partition)
        assert fim.matrix[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_matches_sld_route_both_regimes(self):
        # Oracle equivalence: covariance formula vs SLD solve, on commuting
        # and non-commuting generator sets.
        rng = np.random.default_rng(51)
        z_net = two_qubit_z_network()
        nc = SensorSpec(2, (SIGMA_X / 2, SIGMA_Z / 2), identity(2))
        nc_net = SensorNetwork((nc, SensorSpec(2, (SIGMA_Z / 2,), identity(2))))
        for net in (z_net, nc_net):
            for _ in range(5):
                psi = haar_state(net.total_dim, net.dims, rng)
                fim_p = qfim_pure(psi, global_generators(net), net.partition)
                fim_m, _ = qfim_mixed(psi.density(), global_generators(net), net.partition)
                assert np.max(np.abs(fim_p.matrix - fim_m.matrix)) <= 1e-9

    def test_generator_shape_checked(self):
        net = _single_qubit_net()
        with pytest.raises(Exception):
            qfim_pure(_plus_state(), [identity(3)], net.partition)

    def test_matches_encoded_overlap_oracle(self):
        # Independent oracle through the encoding itself: for a direction u,
        # u^T F u = 8 (1 - |<psi_0 | psi_{delta u}>|) / delta^2 + O(delta^2).
        rng = np.random.default_rng(52)
        z_net = two_qubit_z_network()
        nc = SensorSpec(3, (random_hermitian(3, rng), random_hermitian(3, rng)), identity(3))
        nc_net = SensorNetwork((nc, SensorSpec(2, (SIGMA_Z / 2,), identity(2))))
        delta = 1e-4
        for net in (z_net, nc_net):
            psi = haar_state(net.total_dim, net.dims, rng)
            fim = qfim_pure(psi, global_generators(net), net.partition)
            for _ in range(3):
                direction = rng.standard_normal(net.n_params)
                direction /= np.linalg.norm(direction)
                shifted = encode(net, psi, delta * direction)
                overlap = abs(np.vdot(psi.amplitudes, shifted.amplitudes))
                oracle = 8.0 * (1.0 - overlap) / delta**2
                quadratic = float(direction @ fim.matrix @ direction)
                assert quadratic == pytest.approx(oracle, abs=1e-5)


class TestQfimMixed:
    def test_maximally_mixed_is_blind(self):
        net = _single_qubit_net()
        rho = DensityOperator(identity(2) / 2, (2,))
        fim, _ = qfim_mixed(rho, global_generators(net), net.partition)
        assert_allclose(fim.matrix, [[0.0]], atol=1e-12)

    def test_depolarized_plus_against_fidelity_oracle(self):
        # Independent oracle: finite differences of the Bures root-fidelity,
        # QFI ~ 8 (1 - sqrt F(rho_phi, rho_phi+delta)) / delta^2.
        net = _single_qubit_net()
        delta = 1e-4
        for p in (0.25, 0.6, 0.9):
            mixed = p * np.outer([1, 1], [1, 1]) / 2 + (1 - p) * identity(2) / 2
            rho = DensityOperator(mixed, (2,))
            fim, _ = qfim_mixed(rho, global_generators(net), net.partition)
            shifted = encode(net, rho, [delta])
            oracle = 8.0 * (1.0 - _root_fidelity(rho.matrix, shifted.matrix)) / delta**2
            assert fim.matrix[0, 0] == pytest.approx(oracle, abs=1e-5)
            # Analytic value for this family: the transverse Bloch length
            # squared.
            assert fim.matrix[0, 0] == pytest.approx(p * p, abs=1e-10)

    def test_sld_defining_equation(self):
        net = two_qubit_z_network()
        rng = np.random.default_rng(53)
        rho = random_density(4, (2, 2), rng)
        gens = global_generators(net)
        _, slds = qfim_mixed(rho, gens, net.partition)
        for g, sld in zip(gens, slds):
            drho = -1j * (g @ rho.matrix - rho.matrix @ g)
            residual = drho - (rho.matrix @ sld + sld @ rho.matrix) / 2
            assert np.max(np.abs(residual)) <= 1e-8

    def test_rank_deficient_probe_against_fidelity_oracle(self):
        # Rank-2 probe on two qubits: the support-restricted SLD solve must
        # agree with the Bures finite-difference oracle along a direction.
        net = two_qubit_z_network()
        bell_a = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
        bell_b = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2)
        mixed = 0.7 * np.outer(bell_a, bell_a) + 0.3 * np.outer(bell_b, bell_b)
        rho = DensityOperator(mixed, (2, 2))
        gens = global_generators(net)
        fim, slds = qfim_mixed(rho, gens, net.partition)
        # The defining equation still holds: a unitary family never moves
        # weight into the kernel, so the residual vanishes everywhere.
        for g, sld in zip(gens, slds):
            drho = -1j * (g @ rho.matrix - rho.matrix @ g)
            residual = drho - (rho.matrix @ sld + sld @ rho.matrix) / 2
            assert np.max(np.abs(residual)) <= 1e-8
        direction = np.array([1.0, -0.5])
        direction /= np.linalg.norm(direction)
        delta = 1e-4
        forward = encode(net, rho, delta * direction)
        oracle = 8.0 * (1.0 - _root_fidelity(rho.matrix, forward.matrix)) / delta**2
        quadratic = float(direction @ fim.matrix @ direction)
        assert quadratic == pytest.approx(oracle, abs=1e-5)

    def test_near_cutoff_eigenvalues_are_reported(self):
        # Denominators just above the rank cutoff are flagged, not silently
        # inverted.
        net = _single_qubit_net()
        eps = 2e-9
        rho = DensityOperator(np.diag([1.0 - eps, eps]), (2,))
        with pytest.warns(RuntimeWarning, match="rank cutoff"):
            qfim_mixed(rho, [np.asarray(SIGMA_X) / 2], net.partition)


class TestQcrb:
    def test_identity_frozen(self):
        rep = qcrb(QFIM(np.eye(3)), np.ones(3), 1)
        assert rep.bound == pytest.approx(3.0, abs=1e-12)
        assert not rep.singular

    def test_weighted_frozen(self):
        rep = qcrb(QFIM(np.diag([4.0, 1.0]), ((0,), (1,))), [1.0, 0.0], 10)
        assert rep.bound == pytest.approx(0.025, abs=1e-15)

    def test_singular_support_restriction(self):
        v = np.array([1.0, 1.0]) / np.sqrt(2)
        fim = QFIM(3.0 * np.outer(v, v))
        rep = qcrb(fim, [1.0, 1.0], 1)
        assert rep.singular
        assert rep.support_dim == 1
        # Neither bare parameter lies inside the rank-one support.
        assert rep.undetermined == (0, 1)

    def test_zero_matrix_fully_undetermined(self):
        rep = qcrb(QFIM(np.zeros((2, 2))), [1.0, 1.0], 1)
        assert rep.singular and rep.support_dim == 0
        assert rep.bound == np.inf

    def test_weight_validation(self):
        fim = QFIM(np.eye(2))
        with pytest.raises(ValueError):
            qcrb(fim, [0.0, 0.0], 1)
        with pytest.raises(ValueError):
            qcrb(fim, np.array([[1.0, 0.2], [0.2, 1.0]]), 1)
        # A diagonal matrix form is accepted.
        assert qcrb(fim, np.diag([1.0, 1.0]), 1).bound == pytest.approx(2.0)

    def test_monotone_under_psd_perturbation(self):
        rng = np.random.default_rng(55)
        for _ in range(10):
            base = random_spd(4, rng)
            bump = random_spd(4, rng, shift=0.0)
            w = rng.uniform(0.0, 1.0, 4)
            w[0] += 0.1
            before = qcrb(QFIM(base), w, 1).bound
            after = qcrb(QFIM(base + bump), w, 1).bound
            assert after <= before + 1e-12


class TestRotation:
    def test_identity_rotation(self):
        fim = QFIM(np.diag([2.0, 3.0]))
        assert_allclose(rotate_qfim(fim, np.eye(2)).matrix, fim.matrix, atol=0)

    def test_spectrum_invariant(self):
        rng = np.random.default_rng(57)
        fim = QFIM(random_spd(5, rng))
        v = rng.standard_normal(5)
        m = orthogonal_completion(v / np.linalg.norm(v))
        rotated = rotate_qfim(fim, m)
        assert_allclose(
            np.sort(np.linalg.eigvalsh(rotated.matrix)),
            np.sort(np.linalg.eigvalsh(fim.matrix)),
            atol=1e-9,
        )

    def test_non_orthogonal_rejected(self):
        with pytest.raises(ValueError):
            rotate_qfim(QFIM(np.eye(2)), np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestOrthogonalCompletion:
    def test_standard_basis_vector(self):
        m = orthogonal_completion(np.array([1.0, 0.0, 0.0]))
        assert_allclose(np.abs(m), np.eye(3), atol=1e-12)
        assert_allclose(m[0], [1.0, 0.0, 0.0], atol=0)

    def test_two_dim_diagonal_direction(self):
        m = orthogonal_completion(np.array([1.0, 1.0]) / np.sqrt(2))
        assert_allclose(np.abs(m[1]), np.array([1.0, 1.0]) / np.sqrt(2), atol=1e-12)

    def test_random_vectors_orthogonal(self):
        rng = np.random.default_rng(59)
        for d in (2, 4, 7):
            v = rng.standard_normal(d)
            m = orthogonal_completion(v / np.linalg.norm(v))
            assert np.max(np.abs(m @ m.T - np.eye(d))) <= 1e-10

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            orthogonal_completion(np.zeros(3))


class TestBlockInverse:
    def test_hand_case(self):
        fim = QFIM(np.array([[2.0, 1.0], [1.0, 2.0]]), ((0,), (1,)))
        assert_allclose(inverse_block(fim, 0), [[2.0 / 3.0]], atol=1e-12)
        residuals = block_inverse_residuals(fim)
        assert_allclose(residuals, [1.0 / 6.0, 1.0 / 6.0], atol=1e-12)

    def test_block_diagonal_equality(self):
        mat = np.zeros((4, 4))
        mat[:2, :2] = [[2.0, 0.5], [0.5, 1.0]]
        mat[2:, 2:] = [[3.0, 0.0], [0.0, 0.7]]
        fim = QFIM(mat, ((0, 1), (2, 3)))
        residuals = block_inverse_residuals(fim)
        assert np.max(np.abs(residuals)) <= 1e-12
        assert_allclose(inverse_block(fim, 0), np.linalg.inv(fim.block(0)), atol=1e-12)

    def test_random_spd_nonnegative(self):
        for t in range(50):
            rng = trial_rng(61, t)
            d = int(rng.integers(2, 9))
            cut = int(rng.integers(1, d))
            fim = QFIM(random_spd(d, rng), (tuple(range(cut)), tuple(range(cut, d))))
            assert block_inverse_residuals(fim).min() >= -1e-9

    def test_singular_rejected(self):
        v = np.array([1.0, 1.0]) / np.sqrt(2)
        with pytest.raises(np.linalg.LinAlgError):
            block_inverse_residuals(QFIM(np.outer(v, v), ((0,), (1,))))

    def test_singular_inverse_block_warns_and_restricts(self):
        v = np.array([1.0, 1.0]) / np.sqrt(2)
        fim = QFIM(2.0 * np.outer(v, v), ((0,), (1,)))
        with pytest.warns(RuntimeWarning, match="support"):
            block = inverse_block(fim, 0)
        assert block[0, 0] == pytest.approx(0.25, abs=1e-12)


class TestQfimType:
    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            QFIM(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            QFIM(np.diag([1.0, -0.5]))

    def test_partition_must_tile(self):
        with pytest.raises(ValueError):
            QFIM(np.eye(3), ((0, 1),))


def _sigma_y_effects() -> list[np.ndarray]:
    w, v = np.linalg.eigh(np.asarray(SIGMA_Y))
    return [np.outer(v[:, i], v[:, i].conj()) for i in range(2)]


class TestCfim:
    def test_transverse_measurement_saturates(self):
        # Analytic outcome law: p(+/-|phi) = (1 +/- sin phi)/2, whose
        # classical information is 1 at every phase.
        net = _single_qubit_net()
        effects = _sigma_y_effects()
        phi = 0.3
        evolved = encode(net, _plus_state(), [phi])
        probs = sorted(
            float(np.real(np.vdot(evolved.amplitudes, e @ evolved.amplitudes))) for e in effects
        )
        analytic = sorted([(1 - np.sin(phi)) / 2, (1 + np.sin(phi)) / 2])
        assert_allclose(probs, analytic, atol=1e-12)
        out = cfim(effects, net, _plus_state())
        assert out[0, 0] == pytest.approx(1.0, abs=1e-5)

    def test_generator_eigenbasis_measurement_is_blind(self):
        net = _single_qubit_net()
        effects = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
        out = cfim(effects, net, _plus_state())
        assert abs(out[0, 0]) <= 1e-10

    def test_transverse_measurement_saturates_at_any_phase(self):
        # p(+/-|phi) = (1 +/- sin phi)/2 gives unit information everywhere,
        # so the base point must not matter for this measurement.
        net = _single_qubit_net()
        effects = _sigma_y_effects()
        for phi0 in (-0.9, 0.4, 1.2):
            out = cfim(effects, net, _plus_state(), phi0=[phi0])
            assert out[0, 0] == pytest.approx(1.0, abs=1e-5)

    def test_local_measurements_on_product_probe_match_quantum_diagonal(self):
        net = two_qubit_z_network()
        plus2 = PureState(np.ones(4) / 2.0, (2, 2))
        local = _sigma_y_effects()
        effects = [np.kron(a, b) for a in local for b in local]
        out = cfim(effects, net, plus2)
        fim = qfim_pure(plus2, global_generators(net), net.partition)
        assert_allclose(np.diag(out), np.diag(fim.matrix), atol=1e-5)

    def test_never_exceeds_quantum_information(self):
        rng = np.random.default_rng(63)
        net = two_qubit_z_network()
        for _ in range(10):
            psi = haar_state(4, (2, 2), rng)
            effects = _random_povm(4, 5, rng)
            classical = cfim(effects, net, psi)
            quantum = qfim_pure(psi, global_generators(net), net.partition)
            gap = np.linalg.eigvalsh(quantum.matrix - classical)[0]
            assert gap >= -1e-6

    def test_invalid_povm_rejected(self):
        net = _single_qubit_net()
        with pytest.raises(ValueError):
            cfim([np.diag([1.0, 0.0])], net, _plus_state())


def _random_povm(dim: int, n_effects: int, rng: np.random.Generator) -> list[np.ndarray]:
    raw = []
    for _ in range(n_effects):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw.append(g @ g.conj().T)
    total = sum(raw)
    w, v = np.linalg.eigh(total)
    inv_root = (v / np.sqrt(w)) @ v.conj().T
    return [inv_root @ a @ inv_root for a in raw]
