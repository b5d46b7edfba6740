import math

import numpy as np
import pytest

from entlyap.control import (
    ControlGains,
    control_mixed,
    control_pure,
    controller_spec,
    feedback_gc,
    feedback_gme,
    feedback_gme_with_cut,
    feedback_mixed,
    feedback_pure,
    feedback_shape,
    linear_shape,
    mixed_descent_direction,
    perturb_initial,
)
from entlyap.dynamics import interaction_stack, step
from entlyap.errors import ParameterError
from entlyap.harness import (
    MIXED_BIPARTITE,
    PURE_BIPARTITE,
    kernel_mems,
    preset_hamiltonians,
    random_density_with_spectrum,
    separable_diagonal,
)
from entlyap.linalg import DensityMatrix, bell_ket, computational_ket, ghz_ket, partial_trace
from entlyap.measures import (
    concurrence_measure,
    concurrence_mixed,
    eg_pure,
    entropy_measure,
    gf_kind,
    gme_concurrence,
    renyi_measure,
    tilde_decompose,
    wootters_concurrence,
)

FIG6 = (0.4932, 0.3485, 0.1301, 0.0282)


def random_pure(rng, dim=4):
    return DensityMatrix.from_ket(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_mixed(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = a @ a.conj().T
    return DensityMatrix.from_matrix(m / np.trace(m).real)


class TestShapesAndGains:
    def test_linear_shape_valid(self):
        shape = linear_shape()
        xs = np.array([-1.0, 0.0, 2.0])
        assert np.allclose(shape.h(xs), xs)

    def test_shape_factory_rejects_wrong_sign(self):
        with pytest.raises(ParameterError):
            feedback_shape("neg", lambda x: -x)

    def test_shape_factory_rejects_offset(self):
        with pytest.raises(ParameterError):
            feedback_shape("offset", lambda x: x + 0.1)

    def test_cubic_shape_accepted(self):
        shape = feedback_shape("cubic", lambda x: x ** 3)
        assert shape.h(np.array([2.0]))[0] == 8.0

    def test_gains_validation(self):
        with pytest.raises(ParameterError):
            ControlGains(r=-1.0)
        with pytest.raises(ParameterError):
            ControlGains(r=(5.0, 0.0))
        assert np.allclose(ControlGains(r=5.0).resolve(3), [5.0, 5.0, 5.0])
        assert np.allclose(ControlGains(r=(1.0, 2.0)).resolve(2), [1.0, 2.0])


class TestControlLaws:
    def test_zero_signal_zero_field(self):
        spec = controller_spec(gf_kind(concurrence_measure()))
        assert np.allclose(control_pure(np.zeros(3), spec), 0.0)
        assert np.allclose(control_mixed(np.zeros(6), spec), 0.0)

    def test_concurrence_sign_flip(self):
        # G is decreasing for the concurrence pair, so the field flips sign
        spec = controller_spec(gf_kind(concurrence_measure()), gains=ControlGains(r=5.0))
        u = control_pure(np.array([0.2]), spec)
        assert u[0] == pytest.approx(1.0)

    def test_entropy_sign(self):
        spec = controller_spec(gf_kind(entropy_measure()), gains=ControlGains(r=5.0))
        u = control_pure(np.array([0.2]), spec)
        assert u[0] == pytest.approx(-1.0)

    def test_mixed_law_has_no_sign_factor(self):
        spec = controller_spec(gf_kind(concurrence_measure()), gains=ControlGains(r=5.0))
        u = control_mixed(np.array([0.1, -0.1]), spec)
        assert np.allclose(u, [0.5, -0.5])


class TestFeedbackPure:
    def test_bell_state_is_equilibrium(self):
        hs = preset_hamiltonians(PURE_BIPARTITE)
        x = feedback_pure(DensityMatrix.from_ket(bell_ket("00")), concurrence_measure(), hs, 0.3)
        assert np.max(np.abs(x)) < 1e-12

    def test_separable_state_is_equilibrium(self):
        hs = preset_hamiltonians(PURE_BIPARTITE)
        for m in (concurrence_measure(), entropy_measure(), renyi_measure(1.5)):
            x = feedback_pure(DensityMatrix.from_ket(computational_ket("00")), m, hs, 0.0)
            assert np.max(np.abs(x)) < 1e-9

    def test_descent_identity(self, rng):
        # -|G'(X)| sum r h(x) x equals the derivative of V along the flow
        hs = preset_hamiltonians(PURE_BIPARTITE)
        m = concurrence_measure()
        spec = controller_spec(gf_kind(m), gains=ControlGains(r=5.0))
        for _ in range(5):
            rho = random_pure(rng)
            t = float(rng.uniform(0, 3))
            x = feedback_pure(rho, m, hs, t)
            u = control_pure(x, spec)
            lams = np.clip(np.linalg.eigvalsh(rho.reduced([0])), 0, 1)
            gprime = m.g_prime(float(np.sum(lams ** 2)))
            predicted = -abs(gprime) * float(np.sum(5.0 * x * x))
            dt = 1e-6
            fwd = step(rho, hs, u, t, dt)
            bwd = step(rho, hs, u, t, -dt)
            numeric = (eg_pure(fwd, m) - eg_pure(bwd, m)) / (2 * dt)
            # dV/dt = -dE/dt
            assert abs(-numeric - predicted) < 1e-4

    def test_realness_residue(self, rng):
        hs = preset_hamiltonians(PURE_BIPARTITE)
        a = interaction_stack(hs, 0.9)
        for _ in range(50):
            rho = random_pure(rng)
            mat = rho.mat
            comm = a @ mat - mat @ a
            rm = partial_trace(mat, [2, 2], [0])
            fw = 2.0 * rm  # f'(rho_M) for f = lambda^2
            cm = np.stack([partial_trace(c, [2, 2], [0]) for c in comm])
            traces = np.einsum("ij,kji->k", fw, cm)
            assert np.max(np.abs(traces.real)) < 1e-9


class TestFeedbackMixed:
    def test_kernel_mems_is_equilibrium(self):
        hs = preset_hamiltonians(MIXED_BIPARTITE)
        x = feedback_mixed(kernel_mems(FIG6), hs, 0.7)
        assert np.max(np.abs(x)) < 1e-10

    def test_diagonal_mixture_is_symmetric_equilibrium(self):
        hs = preset_hamiltonians(MIXED_BIPARTITE)
        x = feedback_mixed(separable_diagonal(FIG6), hs, 0.2)
        assert np.all(np.isfinite(x))

    def test_descent_identity(self, rng):
        # -2 sum r h(x) x tracks the finite-difference derivative of
        # V_c = N - E_c along one controlled step
        hs = preset_hamiltonians(MIXED_BIPARTITE)
        spec = controller_spec(gf_kind(concurrence_measure()), gains=ControlGains(r=5.0))
        checked = 0
        for _ in range(12):
            rho = random_mixed(rng)
            if wootters_concurrence(rho) < 0.05:
                continue
            t = float(rng.uniform(0, 3))
            x = feedback_mixed(rho, hs, t)
            u = control_mixed(x, spec)
            predicted = -2.0 * float(np.sum(5.0 * x * x))
            dt = 1e-6
            fwd = step(rho, hs, u, t, dt)
            bwd = step(rho, hs, u, t, -dt)
            numeric = (concurrence_mixed(fwd) - concurrence_mixed(bwd)) / (2 * dt)
            assert abs(-numeric - predicted) < 1e-3
            checked += 1
        assert checked >= 5

    def test_descent_direction_structure(self, rng):
        d = mixed_descent_direction(random_mixed(rng))
        assert np.max(np.abs(d + d.conj().T)) < 1e-12  # anti-Hermitian
        assert abs(np.trace(d)) < 1e-12

    def test_matches_literal_component_sum(self, rng):
        # the division-free evaluation equals the literal per-component sum
        # i sum_j [E_c(Z_j)]^-1 Tr((Z_j)_M (A_k Z_j - Z_j A_k)_M) with the
        # signed preconcurrence denominators, wherever those are not tiny
        hs = preset_hamiltonians(MIXED_BIPARTITE)
        signs = np.array([1.0, -1.0, -1.0, -1.0])
        checked = 0
        for trial in range(10):
            rho = random_mixed(rng)
            td = tilde_decompose(rho)
            mu = td.weights * td.preconcurrences
            if np.min(mu) < 1e-3:
                continue
            t = float(rng.uniform(0, 3))
            from entlyap.dynamics import interaction_stack
            from entlyap.linalg import partial_trace
            a = interaction_stack(hs, t)
            literal = np.zeros(len(a))
            for j in range(4):
                xj = np.sqrt(td.weights[j]) * td.states[:, j]
                z = np.outer(xj, xj.conj())
                zm = partial_trace(z, [2, 2], [0])
                denom = max(mu[j], 1e-8) * signs[j]
                for k in range(len(a)):
                    cm = partial_trace(a[k] @ z - z @ a[k], [2, 2], [0])
                    literal[k] += (1j * np.trace(zm @ cm)).real / denom
            fast = feedback_mixed(rho, hs, t)
            assert np.max(np.abs(fast - literal)) < 1e-9
            checked += 1
        assert checked >= 3

    def test_closed_loop_concurrence_non_decreasing(self, rng):
        hs = preset_hamiltonians(MIXED_BIPARTITE)
        spec = controller_spec(gf_kind(concurrence_measure()), gains=ControlGains(r=5.0))
        rho = random_density_with_spectrum((0.5, 0.3, 0.15, 0.05), seed=8)
        mat = rho.mat
        values = [concurrence_mixed(rho)]
        for i in range(400):
            x = feedback_mixed(mat, hs, i * 0.002)
            u = control_mixed(x, spec)
            mat = step(DensityMatrix(nqubits=2, mat=mat), hs, u, i * 0.002, 0.002).mat
            if (i + 1) % 40 == 0:
                values.append(concurrence_mixed(DensityMatrix(nqubits=2, mat=mat)))
        assert np.all(np.diff(values) > -1e-9)


class TestFeedbackMultipartite:
    def test_ghz_is_gc_equilibrium(self):
        hs = preset_hamiltonians("tripartite")
        x = feedback_gc(DensityMatrix.from_ket(ghz_ket(3)), hs, 0.5)
        assert np.max(np.abs(x)) < 1e-12

    def test_gc_matches_pure_feedback_at_two_qubits(self, rng):
        # with f = lambda^2 the bipartite signal coincides with the
        # generalized-concurrence one (the 2^(N-1)-1 factor is 1 at N = 2)
        hs = preset_hamiltonians(PURE_BIPARTITE)
        m = concurrence_measure()
        for _ in range(5):
            rho = random_pure(rng)
            t = float(rng.uniform(0, 2))
            assert np.max(np.abs(feedback_gc(rho, hs, t) - feedback_pure(rho, m, hs, t))) < 1e-10

    def test_gc_descent_sign(self, rng):
        hs = preset_hamiltonians("tripartite")
        from entlyap.measures import generalized_concurrence
        rho = random_pure(rng, dim=8)
        t = 0.4
        x = feedback_gc(rho, hs, t)
        u = 5.0 * x
        dt = 1e-6
        fwd = step(rho, hs, u, t, dt)
        bwd = step(rho, hs, u, t, -dt)
        numeric = (generalized_concurrence(fwd) - generalized_concurrence(bwd)) / (2 * dt)
        assert numeric > 0.0  # dV/dt <= 0 along the law

    def test_ghz_is_gme_equilibrium(self):
        hs = preset_hamiltonians("tripartite")
        x = feedback_gme(DensityMatrix.from_ket(ghz_ket(3)), hs, 1.1)
        assert np.max(np.abs(x)) < 1e-12

    def test_biseparable_pure_cut_gives_zero(self):
        hs = preset_hamiltonians("tripartite")
        psi = np.kron(computational_ket("0"), bell_ket("00"))
        rho = DensityMatrix.from_ket(psi)
        x, part = feedback_gme_with_cut(rho, hs, 0.9)
        assert part == (0,)
        assert np.max(np.abs(x)) < 1e-9

    def test_gme_descent_sign(self, rng):
        hs = preset_hamiltonians("tripartite")
        rho = random_pure(rng, dim=8)
        t = 0.4
        x = feedback_gme(rho, hs, t)
        u = 5.0 * x
        dt = 1e-6
        fwd = step(rho, hs, u, t, dt)
        bwd = step(rho, hs, u, t, -dt)
        numeric = (gme_concurrence(fwd)[0] - gme_concurrence(bwd)[0]) / (2 * dt)
        assert numeric > 0.0


class TestPerturbInitial:
    def test_table_row_one_form(self):
        psi = perturb_initial(bell_ket("00"), bell_ket("01"), 1e-3)
        target = computational_ket("00")
        assert np.linalg.norm(psi - target) < 1e-3

    def test_zero_perturbation_exact(self):
        psi = perturb_initial(bell_ket("00"), bell_ket("01"), 0.0)
        assert np.max(np.abs(psi - computational_ket("00"))) < 1e-12

    def test_row_eight_form(self):
        psi = perturb_initial(-bell_ket("11"), bell_ket("10"), 1e-3)
        overlap = abs(np.vdot(psi, computational_ket("10")))
        assert abs(overlap - 1.0) < 1e-3

    def test_vanishing_combination_rejected(self):
        with pytest.raises(ParameterError):
            perturb_initial(bell_ket("00"), -bell_ket("00"), 0.0)
