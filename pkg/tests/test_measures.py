import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entlyap.errors import ContractViolationError, ParameterError
from entlyap.linalg import (
    DensityMatrix,
    bell_ket,
    computational_ket,
    ghz_ket,
    maximally_mixed,
    tensor_product,
    w_ket,
)
from entlyap.measures import (
    GENERALIZED_CONCURRENCE,
    GME_CONCURRENCE,
    MIXED_CONCURRENCE,
    GFMeasure,
    MeasureKind,
    concurrence_measure,
    concurrence_mixed,
    concurrence_pure,
    eg_pure,
    entropy_measure,
    entropy_of_entanglement,
    gc_register_max,
    generalized_concurrence,
    gf_kind,
    gme_concurrence,
    lef_value,
    measure_max,
    mixed_concurrence_bound,
    renyi,
    renyi_measure,
    sign_of_g_prime,
    spin_flip,
    takagi_decompose,
    tilde_decompose,
    validate_gf_measure,
    wootters_concurrence,
)
from entlyap.harness import kernel_mems, random_density_with_spectrum

FIG6_SPECTRUM = (0.4932, 0.3485, 0.1301, 0.0282)


def norm_spectrum(lam):
    """Rescale a four-decimal printed spectrum to an exact unit sum."""
    total = sum(lam)
    return tuple(v / total for v in lam)


def lam_state(lam):
    """sqrt(lam)|00> + sqrt(1-lam)|11>, reduced eigenvalues (lam, 1-lam)."""
    psi = math.sqrt(lam) * computational_ket("00") + math.sqrt(1 - lam) * computational_ket("11")
    return DensityMatrix.from_ket(psi)


def random_pure_2q(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    return DensityMatrix.from_ket(psi)


def random_mixed_2q(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = a @ a.conj().T
    return DensityMatrix.from_matrix(m / np.trace(m).real)


class TestPureMeasures:
    def test_concurrence_of_bell_is_one(self):
        rho = DensityMatrix.from_ket(bell_ket("00"))
        assert abs(eg_pure(rho, concurrence_measure()) - 1.0) < 1e-12

    def test_separable_measures_vanish(self):
        rho = DensityMatrix.from_ket(computational_ket("00"))
        for m in (concurrence_measure(), entropy_measure(), renyi_measure(1.5)):
            assert abs(eg_pure(rho, m)) < 1e-12

    def test_quarter_state_concurrence(self):
        # E_C = 2 sqrt(lam (1 - lam)) evaluated directly at lam = 0.25
        expected = 2.0 * math.sqrt(0.25 * 0.75)
        assert abs(eg_pure(lam_state(0.25), concurrence_measure()) - expected) < 1e-12
        assert abs(concurrence_pure(lam_state(0.25)) - expected) < 1e-12

    def test_concurrence_pure_examples(self):
        assert abs(concurrence_pure(DensityMatrix.from_ket(bell_ket("11"))) - 1.0) < 1e-12
        assert abs(concurrence_pure(DensityMatrix.from_ket(computational_ket("01")))) < 1e-12

    def test_concurrence_against_reduced_matrix_oracle(self):
        # state with amplitudes (sqrt(.4), sqrt(.1), sqrt(.1), sqrt(.4)): the
        # reduced matrix is [[.5, .4], [.4, .5]] entry by entry, so
        # E_C = sqrt(2 (1 - Tr rho_M^2)) = 0.6 exactly
        amps = np.sqrt([0.4, 0.1, 0.1, 0.4])
        rho = DensityMatrix.from_ket(amps.astype(complex))
        rho_m = np.array([[0.5, 0.4], [0.4, 0.5]])
        oracle = math.sqrt(2.0 * (1.0 - np.trace(rho_m @ rho_m)))
        assert abs(concurrence_pure(rho) - oracle) < 1e-12
        assert abs(oracle - 0.6) < 1e-12

    def test_renyi_bell_max(self):
        rho = DensityMatrix.from_ket(bell_ket("00"))
        assert abs(renyi(rho, 1.5) - math.log(2.0)) < 1e-12

    def test_renyi_separable_zero(self):
        rho = DensityMatrix.from_ket(computational_ket("10"))
        assert abs(renyi(rho, 0.7)) < 1e-12

    def test_renyi_alpha_limit_matches_entropy(self, rng):
        rho = random_pure_2q(rng)
        near_one = renyi(rho, 1.0 + 1e-6)
        assert abs(near_one - entropy_of_entanglement(rho) * math.log(2.0)) < 1e-4

    def test_renyi_parameter_errors(self):
        rho = DensityMatrix.from_ket(bell_ket("00"))
        with pytest.raises(ParameterError):
            renyi(rho, 1.0)
        with pytest.raises(ParameterError):
            renyi(rho, -0.5)

    def test_entropy_examples(self):
        assert abs(entropy_of_entanglement(DensityMatrix.from_ket(bell_ket("01"))) - 1.0) < 1e-12
        assert abs(entropy_of_entanglement(DensityMatrix.from_ket(computational_ket("00")))) < 1e-12
        expected = -(0.25 * math.log(0.25) + 0.75 * math.log(0.75)) / math.log(2.0)
        assert abs(entropy_of_entanglement(lam_state(0.25)) - expected) < 1e-12

    def test_mixed_input_rejected(self):
        with pytest.raises(ContractViolationError):
            eg_pure(maximally_mixed(2), concurrence_measure())


class TestValidator:
    def test_concurrence_passes_with_concavity_minus_four(self):
        report = validate_gf_measure(concurrence_measure())
        assert report.all_passed()
        assert abs(report.second_derivative_at_half + 4.0) < 1e-4
        assert abs(report.max_value - 1.0) < 1e-12
        assert report.g_prime_sign == -1

    def test_renyi_passes_and_reports_concavity(self):
        report = validate_gf_measure(renyi_measure(1.5))
        assert report.all_passed()
        assert abs(report.max_value - math.log(2.0)) < 1e-12
        assert report.second_derivative_at_half < 0.0
        # the expected analytic value is -4 alpha; recorded, not assumed
        assert abs(report.second_derivative_at_half + 6.0) < 1e-3

    def test_entropy_passes(self):
        report = validate_gf_measure(entropy_measure())
        assert report.all_passed()
        assert abs(report.max_value - 1.0) < 1e-12
        assert report.g_prime_sign == 1

    def test_degenerate_pair_fails_separability(self):
        bad = GFMeasure(
            name="identity",
            g=lambda x: x,
            g_prime=lambda x: 1.0,
            f=lambda l: l,
            f_prime=lambda l: 1.0,
            f_second=lambda l: 0.0,
        )
        report = validate_gf_measure(bad)
        assert not report.separable_zero
        assert not report.all_passed()
        with pytest.raises(ParameterError):
            gf_kind(bad)

    def test_sample_floor(self):
        with pytest.raises(ParameterError):
            validate_gf_measure(concurrence_measure(), samples=50)


class TestMeasureMax:
    def test_values(self):
        assert measure_max(gf_kind(concurrence_measure()), 2) == pytest.approx(1.0)
        assert measure_max(gf_kind(renyi_measure(1.5)), 2) == pytest.approx(math.log(2.0))
        assert measure_max(gf_kind(entropy_measure()), 2) == pytest.approx(1.0)
        assert measure_max(GENERALIZED_CONCURRENCE, 3) == 1.0
        assert measure_max(GME_CONCURRENCE, 3) == 1.0

    def test_unsupported_combination(self):
        with pytest.raises(ParameterError):
            measure_max(gf_kind(concurrence_measure()), 3)


class TestSpinFlip:
    def test_singlet_invariant(self):
        rho = DensityMatrix.from_ket(bell_ket("11"))
        assert np.max(np.abs(spin_flip(rho) - rho.mat)) < 1e-12

    def test_zero_state_maps_to_one_state(self):
        rho = DensityMatrix.from_ket(computational_ket("00"))
        target = np.outer(computational_ket("11"), computational_ket("11").conj())
        assert np.max(np.abs(spin_flip(rho) - target)) < 1e-12

    def test_maximally_mixed_invariant(self):
        rho = maximally_mixed(2)
        assert np.max(np.abs(spin_flip(rho) - rho.mat)) < 1e-12


class TestWoottersConcurrence:
    def test_kernel_mems_table_value(self):
        rho = kernel_mems(norm_spectrum((0.4497, 0.2978, 0.2498, 0.0026)))
        assert abs(wootters_concurrence(rho) - 0.1442) < 1e-4

    def test_bell_is_one(self):
        assert abs(wootters_concurrence(DensityMatrix.from_ket(bell_ket("00"))) - 1.0) < 1e-12

    def test_maximally_mixed_is_zero(self):
        assert wootters_concurrence(maximally_mixed(2)) == 0.0


class TestTakagi:
    def test_reconstruction_random_symmetric(self, rng):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        sym = a + a.T
        values, u = takagi_decompose(sym)
        assert np.max(np.abs(u @ np.diag(values) @ u.T - sym)) < 1e-10
        assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-10
        assert np.all(values >= 0) and np.all(np.diff(values) <= 1e-12)

    def test_rank_deficient(self):
        sym = np.zeros((4, 4), dtype=complex)
        sym[0, 0] = 2.0
        values, u = takagi_decompose(sym)
        assert np.allclose(values, [2.0, 0.0, 0.0, 0.0])
        assert np.max(np.abs(u @ np.diag(values) @ u.T - sym)) < 1e-12


class TestTildeDecomposition:
    def test_pure_bell(self):
        td = tilde_decompose(DensityMatrix.from_ket(bell_ket("00")))
        assert np.allclose(td.weights, [1.0, 0, 0, 0], atol=1e-12)
        assert abs(td.preconcurrences[0] - 1.0) < 1e-10

    def test_kernel_mems_regularities(self):
        # at the analytic maximizer the component weights and concurrences
        # take the closed form (l1, l3, (l2+l4)/2 twice) and
        # (1, 1, 2 sqrt(l2 l4)/(l2+l4) twice)
        lam = np.array(norm_spectrum((0.6607, 0.1901, 0.1083, 0.0409)))
        td = tilde_decompose(kernel_mems(lam))
        p_expected = [lam[0], lam[2], (lam[1] + lam[3]) / 2, (lam[1] + lam[3]) / 2]
        c34 = 2.0 * math.sqrt(lam[1] * lam[3]) / (lam[1] + lam[3])
        assert np.max(np.abs(td.weights - p_expected)) < 1e-8
        assert np.max(np.abs(td.preconcurrences - [1.0, 1.0, c34, c34])) < 1e-8

    def test_reconstruction_and_signed_sum(self, rng):
        for _ in range(25):
            rho = random_mixed_2q(rng)
            td = tilde_decompose(rho)
            assert np.max(np.abs(td.reconstruct() - rho.mat)) < 1e-8
            oracle = wootters_concurrence(rho)
            if oracle > 0:
                assert abs(td.signed_sum() - oracle) < 1e-8
            else:
                assert td.signed_sum() <= 1e-10
            assert abs(np.sum(td.weights) - 1.0) < 1e-10
            assert np.all(td.preconcurrences >= 0) and np.all(td.preconcurrences <= 1.0)

    def test_rank_deficient_padding(self, rng):
        lam = (0.7, 0.3, 0.0, 0.0)
        rho = random_density_with_spectrum(lam, seed=4)
        td = tilde_decompose(rho)
        assert np.max(np.abs(td.reconstruct() - rho.mat)) < 1e-8
        # padded components carry zero weight and normalized states
        norms = np.linalg.norm(td.states, axis=0)
        assert np.max(np.abs(norms - 1.0)) < 1e-10


class TestMixedConcurrence:
    def test_fig6_kernel_value(self):
        rho = kernel_mems(FIG6_SPECTRUM)
        assert abs(concurrence_mixed(rho) - 0.1648) < 1e-4

    def test_separable_mixture_zero(self):
        zero = np.outer(computational_ket("00"), computational_ket("00").conj())
        one = np.outer(computational_ket("01"), computational_ket("01").conj())
        rho = DensityMatrix.from_matrix(0.6 * zero + 0.4 * one)
        assert concurrence_mixed(rho) == 0.0

    def test_bell_diagonal_mems_form(self):
        # the Bell-diagonal maximizer form is trace-one exactly when
        # l2 = l4; its concurrence is then l1 - l3 - 2 sqrt(l2 l4)
        lam = (0.7, 0.1, 0.1, 0.1)
        labels = ("00", "10", "01", "11")
        mat = sum(l * np.outer(bell_ket(s), bell_ket(s).conj()) for l, s in zip(lam, labels))
        rho = DensityMatrix.from_matrix(mat)
        expected = lam[0] - lam[2] - 2.0 * math.sqrt(lam[1] * lam[3])
        assert abs(concurrence_mixed(rho) - expected) < 1e-10

    def test_bound_matches_printed_table_value(self):
        assert abs(mixed_concurrence_bound(norm_spectrum((0.5326, 0.2953, 0.1624, 0.0096))) - 0.2637) < 1e-4

    def test_oracle_equivalence(self, rng):
        for _ in range(50):
            rho = random_mixed_2q(rng)
            assert abs(concurrence_mixed(rho) - wootters_concurrence(rho)) < 1e-8


class TestMultipartite:
    def test_ghz_attains_register_max(self):
        rho = DensityMatrix.from_ket(ghz_ket(3))
        value = generalized_concurrence(rho)
        assert abs(value - gc_register_max(3)) < 1e-12
        assert abs(lef_value(rho, GENERALIZED_CONCURRENCE).e - 1.0) < 1e-12

    def test_product_state_zero(self):
        assert abs(generalized_concurrence(DensityMatrix.from_ket(computational_ket("000")))) < 1e-12

    def test_w_state_value(self):
        rho = DensityMatrix.from_ket(w_ket(3))
        for j in range(3):
            red = rho.reduced([j])
            assert abs(np.trace(red @ red).real - 5.0 / 9.0) < 1e-12
        assert abs(generalized_concurrence(rho) - math.sqrt(4.0 / 9.0)) < 1e-12

    def test_reduces_to_concurrence_at_two_qubits(self, rng):
        rho = random_pure_2q(rng)
        assert abs(generalized_concurrence(rho) - concurrence_pure(rho)) < 1e-10

    def test_gme_ghz(self):
        value, part = gme_concurrence(DensityMatrix.from_ket(ghz_ket(3)))
        assert abs(value - 1.0) < 1e-12
        assert part == (0,)

    def test_gme_biseparable(self):
        psi = np.kron(computational_ket("0"), bell_ket("00"))
        value, part = gme_concurrence(DensityMatrix.from_ket(psi))
        assert value < 1e-10
        assert part == (0,)

    def test_gme_w_state(self):
        value, _ = gme_concurrence(DensityMatrix.from_ket(w_ket(3)))
        assert abs(value - math.sqrt(8.0 / 9.0)) < 1e-12

    def test_gme_zero_iff_pure_cut(self, rng):
        psi = np.kron(rng.normal(size=2) + 1j * rng.normal(size=2), bell_ket("10"))
        value, _ = gme_concurrence(DensityMatrix.from_ket(psi))
        assert value < 1e-9
        entangled, _ = gme_concurrence(DensityMatrix.from_ket(ghz_ket(3)))
        assert entangled > 0.5

    def test_mixed_input_rejected(self):
        with pytest.raises(ContractViolationError):
            generalized_concurrence(maximally_mixed(3))
        with pytest.raises(ContractViolationError):
            gme_concurrence(maximally_mixed(3))


class TestLyapunovValue:
    def test_bell_concurrence_zero(self):
        rho = DensityMatrix.from_ket(bell_ket("00"))
        val = lef_value(rho, gf_kind(concurrence_measure()))
        assert abs(val.v) < 1e-9 and abs(val.e - 1.0) < 1e-9

    def test_separable_concurrence_full_height(self):
        rho = DensityMatrix.from_ket(computational_ket("00"))
        val = lef_value(rho, gf_kind(concurrence_measure()))
        assert abs(val.v - 1.0) < 1e-9

    def test_ghz_gme_zero(self):
        val = lef_value(DensityMatrix.from_ket(ghz_ket(3)), GME_CONCURRENCE)
        assert abs(val.v) < 1e-9

    def test_mixed_ceiling_is_spectrum_bound(self):
        rho = kernel_mems(FIG6_SPECTRUM)
        val = lef_value(rho, MIXED_CONCURRENCE)
        assert abs(val.nmax - mixed_concurrence_bound(FIG6_SPECTRUM)) < 1e-12
        assert abs(val.v) < 1e-9


class TestMeasureProperties:
    def test_local_unitary_invariance(self, rng):
        m = concurrence_measure()
        for _ in range(20):
            rho = random_pure_2q(rng)
            ua, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            ub, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            u = tensor_product(ua, ub)
            rotated = DensityMatrix.from_matrix(u @ rho.mat @ u.conj().T)
            assert abs(eg_pure(rotated, m) - eg_pure(rho, m)) < 1e-9

    def test_monotone_equivalence_through_concurrence(self, rng):
        # recover the reduced eigenvalue from E_C and re-evaluate any measure
        for m in (entropy_measure(), renyi_measure(1.5)):
            for _ in range(20):
                rho = random_pure_2q(rng)
                ec = concurrence_pure(rho)
                lam = (1.0 + math.sqrt(max(0.0, 1.0 - ec * ec))) / 2.0
                via_lambda = m.e_of_lambda(lam)
                assert abs(via_lambda - eg_pure(rho, m)) < 1e-8

    def test_values_within_range(self, rng):
        kinds = [gf_kind(concurrence_measure()), gf_kind(entropy_measure()),
                 gf_kind(renyi_measure(1.5))]
        for _ in range(20):
            rho = random_pure_2q(rng)
            for kind in kinds:
                val = eg_pure(rho, kind.gf)
                assert -1e-9 <= val <= kind.gf.max_value() + 1e-9

    def test_sign_conventions(self):
        assert sign_of_g_prime(concurrence_measure()) == -1
        assert sign_of_g_prime(entropy_measure()) == 1
        assert sign_of_g_prime(renyi_measure(1.5)) == -1
        assert sign_of_g_prime(renyi_measure(0.5)) == 1


@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_mixed_concurrence_equals_closed_form(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = a @ a.conj().T
    rho = DensityMatrix.from_matrix(m / np.trace(m).real)
    assert abs(concurrence_mixed(rho) - wootters_concurrence(rho)) < 1e-8


@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_gc_reduces_to_pure_concurrence(seed):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix.from_ket(rng.normal(size=4) + 1j * rng.normal(size=4))
    assert abs(generalized_concurrence(rho) - concurrence_pure(rho)) < 1e-10
