"""Lyapunov feedback laws built from entanglement measures.

Each feedback signal is the real number obtained by multiplying a trace of
the form Tr(F . (A_k rho - rho A_k)_reduced) by i; the trace itself is purely
imaginary for Hermitian F and states, so the real part of the computed trace
is a numerical residue that is monitored and must stay tiny.  The control
fields are the gained, shaped, sign-adjusted versions of those signals; by
construction they make the Lyapunov entanglement function non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .dynamics import HamiltonianSet, interaction_stack
from .errors import NumericalIntegrityError, ParameterError
from .linalg import DensityMatrix, normalize_ket, partial_trace
from .measures import (
    GFMeasure,
    MeasureKind,
    SIGMA_YY,
    gme_concurrence,
    sign_of_g_prime,
    tilde_decompose,
)

RESIDUE_LIMIT = 1e-6

StateLike = Union[DensityMatrix, np.ndarray]


def _as_matrix(rho: StateLike) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)


def _nqubits_of(mat: np.ndarray) -> int:
    return mat.shape[0].bit_length() - 1


def _reduce_stack(stack: np.ndarray, nqubits: int, keep: Sequence[int]) -> np.ndarray:
    """Batched partial trace keeping the listed qubits, batch on axis 0."""
    keep = sorted(keep)
    m = stack.shape[0]
    dims = (2,) * nqubits
    a = stack.reshape((m,) + dims + dims)
    row = list(range(1, nqubits + 1))
    col = [i + nqubits if (i - 1) in keep else i for i in row]
    out = [0] + [i for i in row if (i - 1) in keep] + [i + nqubits for i in row if (i - 1) in keep]
    d_kept = 2 ** len(keep)
    return np.einsum(a, [0] + row + col, out).reshape(m, d_kept, d_kept)


def _reduce_first_2q(stack: np.ndarray) -> np.ndarray:
    """Keep-qubit-0 reduction of a (m, 4, 4) stack; string form caches well."""
    return np.einsum("kabcb->kac", stack.reshape(-1, 2, 2, 2, 2))


def _reduced_first_2q(mat: np.ndarray) -> np.ndarray:
    return np.einsum("abcb->ac", mat.reshape(2, 2, 2, 2))


def _extract_real(traces: np.ndarray, what: str) -> np.ndarray:
    """Turn i * (purely imaginary traces) into real signals, guarding the residue."""
    residue = float(np.max(np.abs(traces.real))) if traces.size else 0.0
    if residue > RESIDUE_LIMIT:
        raise NumericalIntegrityError(
            f"{what}: feedback trace has real residue {residue:.3e} > {RESIDUE_LIMIT:.0e}"
        )
    return -traces.imag.copy()


# ---------------------------------------------------------------------------
# Shapes, gains, controller spec


@dataclass(frozen=True)
class FeedbackShape:
    """Odd-sector shaping function: h(x) x >= 0 with h(x) = 0 iff x = 0."""

    name: str
    h: Callable[[np.ndarray], np.ndarray]


def feedback_shape(name: str, h: Callable[[np.ndarray], np.ndarray],
                   grid_half_width: float = 2.0) -> FeedbackShape:
    """Build a shape after checking the sign conditions on a symmetric grid."""
    xs = np.linspace(-grid_half_width, grid_half_width, 401)
    ys = np.asarray(h(xs), dtype=float)
    if abs(float(np.asarray(h(np.array([0.0])))[0])) > 0.0:
        raise ParameterError(f"feedback_shape {name!r}: h(0) != 0")
    if np.any(ys * xs < 0.0):
        raise ParameterError(f"feedback_shape {name!r}: h(x) x < 0 somewhere on grid")
    nonzero = xs[np.abs(xs) > 1e-6]
    if np.any(np.asarray(h(nonzero), dtype=float) == 0.0):
        raise ParameterError(f"feedback_shape {name!r}: h vanishes off the origin")
    return FeedbackShape(name=name, h=h)


def linear_shape() -> FeedbackShape:
    """The simplest admissible shape, h(x) = x."""
    return FeedbackShape(name="linear", h=lambda x: x)


@dataclass(frozen=True)
class ControlGains:
    """Positive per-channel gains (scalar broadcasts) and the perturbation size

    used to kick exactly-separable initial states."""

    r: Union[float, Tuple[float, ...]] = 5.0
    epsilon: float = 1e-3

    def __post_init__(self):
        rs = (self.r,) if isinstance(self.r, (int, float)) else tuple(self.r)
        if any(v <= 0.0 for v in rs):
            raise ParameterError(f"ControlGains: gains must be positive, got {self.r}")
        if self.epsilon < 0.0:
            raise ParameterError("ControlGains: epsilon must be >= 0")

    def resolve(self, m: int) -> np.ndarray:
        if isinstance(self.r, (int, float)):
            return np.full(m, float(self.r))
        rs = np.asarray(self.r, dtype=float)
        if rs.size != m:
            raise ParameterError(f"ControlGains: {rs.size} gains for {m} channels")
        return rs


@dataclass(frozen=True)
class ControllerSpec:
    """Everything the field law needs: measure kind, shape, gains, G' sign."""

    kind: MeasureKind
    shape: FeedbackShape
    gains: ControlGains
    sign_convention: int

    def __post_init__(self):
        if self.sign_convention not in (-1, 1):
            raise ParameterError("ControllerSpec: sign_convention must be +-1")


def controller_spec(kind: MeasureKind, shape: Optional[FeedbackShape] = None,
                    gains: Optional[ControlGains] = None) -> ControllerSpec:
    """Assemble a spec; the sign convention is read off the GF measure's G'."""
    sign = sign_of_g_prime(kind.gf) if kind.name == "gf" else 1
    return ControllerSpec(
        kind=kind,
        shape=shape or linear_shape(),
        gains=gains or ControlGains(),
        sign_convention=sign,
    )


# ---------------------------------------------------------------------------
# Feedback signals


def pure_feedback_traces(rho: StateLike, m: GFMeasure, hs: HamiltonianSet, t: float) -> np.ndarray:
    """Raw traces Tr(f'(rho_M) (A_k rho - rho A_k)_M); purely imaginary in

    exact arithmetic, so their real parts measure the numerical residue."""
    mat = _as_matrix(rho)
    a = interaction_stack(hs, t)
    comm = a @ mat - mat @ a
    cm = _reduce_first_2q(comm)
    rm = _reduced_first_2q(mat)
    if m.f_prime_matrix is not None:
        fmat = m.f_prime_matrix(rm)
    else:
        w, v = np.linalg.eigh(rm)
        fw = np.array([m.f_prime(float(np.clip(l, 0.0, 1.0))) for l in w])
        fmat = (v * fw) @ v.conj().T
    return np.einsum("ij,kji->k", fmat, cm)


def feedback_pure(rho: StateLike, m: GFMeasure, hs: HamiltonianSet, t: float) -> np.ndarray:
    """Signals x_k = i Tr(f'(rho_M) (A_k rho - rho A_k)_M) for a pure 2-qubit state."""
    return _extract_real(pure_feedback_traces(rho, m, hs, t), "feedback_pure")


def control_pure(x: np.ndarray, spec: ControllerSpec) -> np.ndarray:
    """Fields u_k = -sgn(G') r_k h(x_k)."""
    x = np.asarray(x, dtype=float)
    r = spec.gains.resolve(x.size)
    return -spec.sign_convention * r * np.asarray(spec.shape.h(x), dtype=float)


_COMPONENT_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


def mixed_descent_direction(rho: StateLike) -> np.ndarray:
    """Anti-Hermitian matrix D with dE_c/du_k = 2 i Tr(A_k D) along the flow.

    Built from the subnormalized tilde components x_j and their spin-flipped
    partners: D = (1/2) sum_j s_j (x~_j x_j^+  -  x_j x~_j^+), with the
    signature s = (+,-,-,-) of the signed concurrence combination.  The
    decomposition is recomputed from scratch at every call.
    """
    mat = _as_matrix(rho)
    td = tilde_decompose(DensityMatrix(nqubits=2, mat=mat))
    xs = td.states * np.sqrt(td.weights)[None, :]
    xt = SIGMA_YY @ xs.conj()
    w = np.einsum("j,aj,bj->ab", 0.5 * _COMPONENT_SIGNS, xt, xs.conj())
    return w - w.conj().T


def mixed_feedback_traces(rho: StateLike, hs: HamiltonianSet, t: float) -> np.ndarray:
    """Raw traces Tr(A_k D) of the mixed law; purely imaginary in exact

    arithmetic."""
    d = mixed_descent_direction(rho)
    a = interaction_stack(hs, t)
    return np.einsum("kij,ji->k", a, d)


def feedback_mixed(rho: StateLike, hs: HamiltonianSet, t: float) -> np.ndarray:
    """Mixed-state signals x_k = i sum_j [E_c(Z_j)]^-1 Tr((Z_j)_M (A_k Z_j - Z_j A_k)_M).

    E_c(Z_j) is the signed concurrence of the rescaled tilde component
    (positive for the leading component, negative for the rest), which makes
    the sum the exact half-gradient of the mixed concurrence:
    dV_c/dt = -2 sum_k r_k h(x_k) x_k along the controlled flow.  The
    per-component denominators cancel analytically against the numerators,
    so the evaluation is division-free and stays bounded even when a
    component's concurrence vanishes (the documented 1e-8 clamp never binds).
    """
    return _extract_real(mixed_feedback_traces(rho, hs, t), "feedback_mixed")


def control_mixed(x: np.ndarray, spec: ControllerSpec) -> np.ndarray:
    """Fields u_k = r_k h(x_k); no sign factor for the concurrence convention."""
    x = np.asarray(x, dtype=float)
    r = spec.gains.resolve(x.size)
    return r * np.asarray(spec.shape.h(x), dtype=float)


def gc_feedback_traces(rho: StateLike, hs: HamiltonianSet, t: float) -> np.ndarray:
    """Raw traces sum_j Tr(rho_j (A_k rho - rho A_k)_j)."""
    mat = _as_matrix(rho)
    n = _nqubits_of(mat)
    a = interaction_stack(hs, t)
    comm = a @ mat - mat @ a
    traces = np.zeros(a.shape[0], dtype=np.complex128)
    for j in range(n):
        rj = partial_trace(mat, [2] * n, [j])
        cj = _reduce_stack(comm, n, [j])
        traces += np.einsum("ab,kba->k", rj, cj)
    return traces


def feedback_gc(rho: StateLike, hs: HamiltonianSet, t: float) -> np.ndarray:
    """Generalized-concurrence signals x_k = i sum_j Tr(rho_j (A_k rho - rho A_k)_j)."""
    return _extract_real(gc_feedback_traces(rho, hs, t), "feedback_gc")


def feedback_gme(rho: StateLike, hs: HamiltonianSet, t: float) -> np.ndarray:
    """GME signals on the currently minimizing bipartition."""
    x, _ = feedback_gme_with_cut(rho, hs, t)
    return x


def gme_feedback_traces(rho: StateLike, hs: HamiltonianSet, t: float):
    """Raw traces Tr(rho_gm (A_k rho - rho A_k)_gm) on the minimizing cut."""
    mat = _as_matrix(rho)
    n = _nqubits_of(mat)
    _, part = gme_concurrence(DensityMatrix(nqubits=n, mat=mat))
    a = interaction_stack(hs, t)
    comm = a @ mat - mat @ a
    rg = partial_trace(mat, [2] * n, part)
    cg = _reduce_stack(comm, n, part)
    return np.einsum("ab,kba->k", rg, cg), part


def feedback_gme_with_cut(rho: StateLike, hs: HamiltonianSet, t: float):
    """As :func:`feedback_gme`, also returning the minimizing cut used."""
    traces, part = gme_feedback_traces(rho, hs, t)
    return _extract_real(traces, "feedback_gme"), part


def perturb_initial(psi: np.ndarray, direction: np.ndarray, epsilon: float) -> np.ndarray:
    """Normalized (1 + epsilon) psi + direction, the deliberate nudge used to

    excite the control loop from a separable starting point."""
    psi = np.asarray(psi, dtype=np.complex128)
    direction = np.asarray(direction, dtype=np.complex128)
    if psi.shape != direction.shape:
        raise ParameterError("perturb_initial: shape mismatch")
    combined = (1.0 + epsilon) * psi + direction
    if np.linalg.norm(combined) < 1e-12:
        raise ParameterError("perturb_initial: combination vanishes")
    return normalize_ket(combined)
