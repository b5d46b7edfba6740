"""Entanglement measures and the Lyapunov entanglement function.

Three layers live here:

* the general ``(G, f)`` measure family for bipartite pure states, with the
  axiomatic validator that checks an instance is a qualified measure
  (zero on separable states, positive elsewhere, unique stationary maximum
  at a balanced reduced matrix, concave there);
* two-qubit mixed-state concurrence, both as the closed-form square-root
  spectrum expression (the independent oracle) and through the optimal
  "tilde" pure-state decomposition obtained from a Takagi factorization,
  which is what the mixed-state control law differentiates;
* multipartite measures for pure n-qubit states: the generalized
  concurrence built from single-qubit reductions and the
  genuine-multipartite-entanglement (GME) concurrence minimized over
  bipartitions.

All functions are pure; density matrices come in as
:class:`~entlyap.linalg.DensityMatrix`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .errors import (
    ContractViolationError,
    DimensionError,
    NumericalIntegrityError,
    ParameterError,
)
from .linalg import DensityMatrix, PAULI_Y, tensor_product

_LN2 = math.log(2.0)
_TINY = 1e-300

SIGMA_YY = tensor_product(PAULI_Y, PAULI_Y)
SIGMA_YY.flags.writeable = False


# ---------------------------------------------------------------------------
# The (G, f) measure family


@dataclass(frozen=True)
class GFMeasure:
    """A scalar-function pair defining one member of the measure family.

    The measure value on a bipartite pure state is ``G(Tr f(rho_M))`` with
    ``rho_M`` the single-side reduced matrix.  ``g_prime``, ``f_prime`` and
    ``f_second`` are the analytic derivatives used by the control law and
    the validator.  ``f_prime_matrix``, when set, evaluates f'(rho_M)
    directly from the matrix (bypassing the spectral route in hot loops).
    """

    name: str
    g: Callable[[float], float]
    g_prime: Callable[[float], float]
    f: Callable[[float], float]
    f_prime: Callable[[float], float]
    f_second: Callable[[float], float]
    f_prime_matrix: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def e_of_lambda(self, lam: float) -> float:
        """Measure value as a function of the larger reduced eigenvalue."""
        return float(self.g(self.f(lam) + self.f(1.0 - lam)))

    def max_value(self) -> float:
        return float(self.g(2.0 * self.f(0.5)))


def concurrence_measure() -> GFMeasure:
    """G(X) = sqrt(2(1-X)), f(l) = l^2; maximum 1."""
    return GFMeasure(
        name="concurrence",
        g=lambda x: math.sqrt(max(2.0 * (1.0 - x), 0.0)),
        g_prime=lambda x: -1.0 / math.sqrt(max(2.0 * (1.0 - x), _TINY)),
        f=lambda l: l * l,
        f_prime=lambda l: 2.0 * l,
        f_second=lambda l: 2.0,
        f_prime_matrix=lambda rm: 2.0 * rm,
    )


def entropy_measure() -> GFMeasure:
    """Entropy of entanglement in bits: G(X) = X, f(l) = -l*log2(l).

    The 0*ln(0) = 0 convention applies at the endpoints; the derivatives
    are floored away from the logarithmic singularity so that products with
    exactly vanishing traces stay finite.
    """
    return GFMeasure(
        name="entropy",
        g=lambda x: x,
        g_prime=lambda x: 1.0,
        f=lambda l: 0.0 if l <= 0.0 else -l * math.log(l) / _LN2,
        f_prime=lambda l: -(math.log(max(l, _TINY)) + 1.0) / _LN2,
        f_second=lambda l: -1.0 / (max(l, _TINY) * _LN2),
    )


def renyi_measure(alpha: float) -> GFMeasure:
    """Renyi entropy of the reduced state: G(X) = ln(X)/(1-alpha), f = l^alpha."""
    if alpha <= 0.0:
        raise ParameterError(f"renyi_measure: alpha must be positive, got {alpha}")
    if alpha == 1.0:
        raise ParameterError(
            "renyi_measure: alpha = 1 is the entropy of entanglement; "
            "use entropy_measure() instead"
        )
    return GFMeasure(
        name=f"renyi({alpha:g})",
        g=lambda x: math.log(max(x, _TINY)) / (1.0 - alpha),
        g_prime=lambda x: 1.0 / ((1.0 - alpha) * max(x, _TINY)),
        f=lambda l: max(l, 0.0) ** alpha,
        f_prime=lambda l: alpha * max(l, _TINY) ** (alpha - 1.0),
        f_second=lambda l: alpha * (alpha - 1.0) * max(l, _TINY) ** (alpha - 2.0),
    )


def sign_of_g_prime(m: GFMeasure) -> int:
    """Constant sign of G' on the measure's domain, evaluated mid-range.

    A qualified measure has strictly monotone G, so the sign is a
    per-measure constant.
    """
    x_sep = m.f(0.0) + m.f(1.0)
    x_max = 2.0 * m.f(0.5)
    val = m.g_prime(0.5 * (x_sep + x_max))
    if val == 0.0:
        raise ParameterError(f"{m.name}: G' vanishes mid-range, not a monotone G")
    return 1 if val > 0.0 else -1


@dataclass
class GFValidationReport:
    """Pass/fail record of the five qualification conditions."""

    measure: str
    separable_zero: bool
    positive_interior: bool
    stationary_at_half: bool
    unique_extremum: bool
    concave_at_half: bool
    max_value: float
    derivative_at_half: float
    second_derivative_at_half: float
    g_prime_sign: int

    def all_passed(self) -> bool:
        return (
            self.separable_zero
            and self.positive_interior
            and self.stationary_at_half
            and self.unique_extremum
            and self.concave_at_half
        )

    def as_dict(self) -> dict:
        return {
            "measure": self.measure,
            "separable_zero": self.separable_zero,
            "positive_interior": self.positive_interior,
            "stationary_at_half": self.stationary_at_half,
            "unique_extremum": self.unique_extremum,
            "concave_at_half": self.concave_at_half,
            "max_value": self.max_value,
            "derivative_at_half": self.derivative_at_half,
            "second_derivative_at_half": self.second_derivative_at_half,
            "g_prime_sign": self.g_prime_sign,
            "all_passed": self.all_passed(),
        }


def validate_gf_measure(m: GFMeasure, samples: int = 1001) -> GFValidationReport:
    """Check the five qualification conditions on a uniform lambda grid.

    Conditions: (1) zero exactly at the separable endpoints, (2) positive on
    the open interval, (3) stationary at 1/2, (4) no other stationary point
    on the grid, (5) concave at 1/2.  Derivatives are central differences
    with step 1e-5, so no symbolic machinery is required of the caller.
    """
    if samples < 100:
        raise ParameterError(f"validate_gf_measure: samples must be >= 100, got {samples}")
    h = 1e-5
    e = m.e_of_lambda

    cond1 = abs(e(0.0)) < 1e-9 and abs(e(1.0)) < 1e-9

    grid = np.linspace(0.0, 1.0, samples)[1:-1]
    values = np.array([e(l) for l in grid])
    cond2 = bool(np.all(values > 0.0))

    d_half = (e(0.5 + h) - e(0.5 - h)) / (2.0 * h)
    cond3 = abs(d_half) < 1e-8

    off_half = grid[np.abs(grid - 0.5) > 10.0 * h]
    derivs = np.array([(e(l + h) - e(l - h)) / (2.0 * h) for l in off_half])
    cond4 = bool(np.all(np.abs(derivs) > 1e-9))

    dd_half = (e(0.5 + h) - 2.0 * e(0.5) + e(0.5 - h)) / (h * h)
    cond5 = dd_half < 0.0

    return GFValidationReport(
        measure=m.name,
        separable_zero=cond1,
        positive_interior=cond2,
        stationary_at_half=cond3,
        unique_extremum=cond4,
        concave_at_half=cond5,
        max_value=e(0.5),
        derivative_at_half=d_half,
        second_derivative_at_half=dd_half,
        g_prime_sign=sign_of_g_prime(m),
    )


# ---------------------------------------------------------------------------
# Pure bipartite measure values


def _require_two_qubit(rho: DensityMatrix, op: str) -> None:
    if rho.nqubits != 2:
        raise DimensionError(f"{op}: expected a 2-qubit state, got {rho.nqubits} qubits")


def _require_pure(rho: DensityMatrix, op: str) -> None:
    if not rho.is_pure():
        raise ContractViolationError(f"{op}: state is not pure (Tr rho^2 = {rho.purity():.6f})")


def _reduced_eigs(rho: DensityMatrix) -> np.ndarray:
    rm = rho.reduced([0])
    return np.clip(np.linalg.eigvalsh(rm), 0.0, 1.0)


def eg_pure(rho: DensityMatrix, m: GFMeasure) -> float:
    """General measure value G(f(lambda) + f(1-lambda)) on a pure 2-qubit state."""
    _require_two_qubit(rho, "eg_pure")
    _require_pure(rho, "eg_pure")
    lams = _reduced_eigs(rho)
    return float(m.g(m.f(lams[1]) + m.f(lams[0])))


def concurrence_pure(rho: DensityMatrix) -> float:
    """sqrt(2(1 - Tr rho_M^2)) for a pure 2-qubit state."""
    _require_two_qubit(rho, "concurrence_pure")
    _require_pure(rho, "concurrence_pure")
    rm = rho.reduced([0])
    x = float(np.trace(rm @ rm).real)
    return math.sqrt(max(2.0 * (1.0 - x), 0.0))


def renyi(rho: DensityMatrix, alpha: float) -> float:
    """Renyi entanglement entropy of order alpha on a pure 2-qubit state."""
    if alpha <= 0.0:
        raise ParameterError(f"renyi: alpha must be positive, got {alpha}")
    if alpha == 1.0:
        raise ParameterError("renyi: alpha = 1 is entropy_of_entanglement")
    _require_two_qubit(rho, "renyi")
    _require_pure(rho, "renyi")
    lams = _reduced_eigs(rho)
    return float(math.log(float(np.sum(lams ** alpha))) / (1.0 - alpha))


def entropy_of_entanglement(rho: DensityMatrix) -> float:
    """Von Neumann entropy of the reduced state, in bits; 0*ln(0) = 0."""
    _require_two_qubit(rho, "entropy_of_entanglement")
    _require_pure(rho, "entropy_of_entanglement")
    lams = _reduced_eigs(rho)
    pos = lams[lams > 0.0]
    return float(-np.sum(pos * np.log(pos)) / _LN2)


# ---------------------------------------------------------------------------
# Mixed-state concurrence: closed form and tilde decomposition


def spin_flip(rho: DensityMatrix) -> np.ndarray:
    """The two-qubit spin-flipped matrix (sy (x) sy) conj(rho) (sy (x) sy)."""
    if rho.nqubits != 2:
        raise DimensionError("spin_flip: expected a 2-qubit state")
    return SIGMA_YY @ rho.mat.conj() @ SIGMA_YY


def wootters_concurrence(rho: DensityMatrix) -> float:
    """Closed-form two-qubit mixed concurrence max{0, mu1 - mu2 - mu3 - mu4}.

    The mu_i are the decreasing square roots of the eigenvalues of
    ``rho @ spin_flip(rho)``, computed through the Hermitian product
    ``sqrt(rho) rho~ sqrt(rho)`` for numerical stability.  This routine is
    deliberately independent of the tilde decomposition below so the two can
    cross-check each other.
    """
    if rho.nqubits != 2:
        raise DimensionError("wootters_concurrence: expected a 2-qubit state")
    tilde = spin_flip(rho)
    w, v = np.linalg.eigh(rho.mat)
    sq = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    prod = sq @ tilde @ sq
    prod = 0.5 * (prod + prod.conj().T)
    mu = np.sqrt(np.clip(np.linalg.eigvalsh(prod), 0.0, None))[::-1]
    return float(max(0.0, mu[0] - mu[1] - mu[2] - mu[3]))


def takagi_decompose(sym: np.ndarray, tol: float = 1e-10):
    """Takagi factorization sym = U diag(s) U^T of a complex symmetric matrix.

    Works through the real symmetric embedding [[X, Y], [Y, -X]] whose
    eigenpairs come in +/- s pairs; the positive branch yields orthonormal
    con-eigenvectors directly, and the (near-)zero branch is rebuilt as an
    orthonormal completion, which is valid because any vector orthogonal to
    the nonzero Takagi vectors lies in the kernel of sym after conjugation.
    """
    sym = np.asarray(sym, dtype=np.complex128)
    n = sym.shape[0]
    sym = 0.5 * (sym + sym.T)
    x, y = sym.real, sym.imag
    big = np.block([[x, y], [y, -x]])
    w, q = np.linalg.eigh(big)
    order = np.argsort(w)[::-1][:n]
    values: list[float] = []
    vectors: list[np.ndarray] = []
    for idx in order:
        if w[idx] <= tol:
            break
        vectors.append(q[:n, idx] + 1j * q[n:, idx])
        values.append(float(w[idx]))
    k = len(values)
    if k < n:
        have = np.array(vectors).T if k else np.zeros((n, 0), dtype=np.complex128)
        proj = np.eye(n, dtype=np.complex128) - have @ have.conj().T
        uu, ss, _ = np.linalg.svd(proj)
        for j in range(n - k):
            vectors.append(uu[:, j])
            values.append(0.0)
    return np.array(values), np.array(vectors).T


@dataclass(frozen=True)
class TildeDecomposition:
    """Optimal pure-state decomposition of a two-qubit mixed state.

    ``weights[k]`` and ``states[:, k]`` give the k-th normalized component;
    ``preconcurrences[k]`` is the magnitude of its tilde overlap, i.e. the
    concurrence of that component.  The signed combination
    ``p1 c1 - p2 c2 - p3 c3 - p4 c4`` reproduces the closed-form concurrence
    whenever that is positive.
    """

    weights: np.ndarray
    states: np.ndarray
    preconcurrences: np.ndarray

    def signed_sum(self) -> float:
        p, c = self.weights, self.preconcurrences
        return float(p[0] * c[0] - np.sum(p[1:] * c[1:]))

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((4, 4), dtype=np.complex128)
        for k in range(4):
            y = self.states[:, k]
            out += self.weights[k] * np.outer(y, y.conj())
        return out


def tilde_decompose(rho: DensityMatrix) -> TildeDecomposition:
    """Wootters' optimal decomposition of a two-qubit density matrix.

    Steps: eigendecompose rho into subnormalized vectors, form the complex
    symmetric tilde-overlap matrix, Takagi-factor it, and rotate the
    subnormalized vectors by the Takagi unitary.  Components are ordered by
    decreasing tilde singular value, so the first carries the positive
    preconcurrence.  Rank-deficient states are padded with orthonormal
    null-space vectors at zero weight.
    """
    if rho.nqubits != 2:
        raise DimensionError("tilde_decompose: expected a 2-qubit state")
    w, v = np.linalg.eigh(rho.mat)
    w = np.clip(w[::-1], 0.0, None)
    v = v[:, ::-1]
    sub = v * np.sqrt(w)
    tau = sub.conj().T @ SIGMA_YY @ sub.conj()
    _, u = takagi_decompose(tau)
    xs = sub @ u
    p = np.einsum("ak,ak->k", xs.conj(), xs).real

    if np.min(p) > 1e-14:
        states = xs / np.sqrt(p)[None, :]
    else:
        states = np.zeros((4, 4), dtype=np.complex128)
        live = []
        for k in range(4):
            if p[k] > 1e-14:
                states[:, k] = xs[:, k] / math.sqrt(p[k])
                live.append(k)
            else:
                p[k] = 0.0
        dead = [k for k in range(4) if k not in live]
        have = states[:, live]
        proj = np.eye(4, dtype=np.complex128) - have @ have.conj().T
        uu, _, _ = np.linalg.svd(proj)
        for j, k in enumerate(dead):
            states[:, k] = uu[:, j]

    pre = np.minimum(
        1.0, np.abs(np.einsum("ak,ab,bk->k", states.conj(), SIGMA_YY, states.conj()))
    )
    return TildeDecomposition(weights=p, states=states, preconcurrences=pre)


def concurrence_mixed(rho: DensityMatrix) -> float:
    """Two-qubit mixed concurrence evaluated through the tilde decomposition."""
    td = tilde_decompose(rho)
    return max(0.0, td.signed_sum())


def mixed_concurrence_bound(spectrum) -> float:
    """Largest concurrence attainable at fixed spectrum (decreasing order):

    max{0, l1 - l3 - 2 sqrt(l2 l4)}.
    """
    lam = np.sort(np.asarray(spectrum, dtype=float))[::-1]
    if lam.size != 4:
        raise ParameterError("mixed_concurrence_bound: expected 4 eigenvalues")
    return float(max(0.0, lam[0] - lam[2] - 2.0 * math.sqrt(max(lam[1] * lam[3], 0.0))))


# ---------------------------------------------------------------------------
# Multipartite measures


def single_qubit_reductions(rho: DensityMatrix) -> np.ndarray:
    """Stack of the n single-qubit reduced matrices, shape (n, 2, 2)."""
    n = rho.nqubits
    out = np.empty((n, 2, 2), dtype=np.complex128)
    for j in range(n):
        out[j] = rho.reduced([j])
    return out


def gc_register_max(nqubits: int) -> float:
    """Largest generalized-concurrence value an n-qubit pure state attains.

    Every single-qubit reduction can at best be maximally mixed, which caps
    the purity sum at n/2.
    """
    if nqubits < 2:
        raise ParameterError("gc_register_max: need at least 2 qubits")
    return math.sqrt((nqubits / 2.0) / (2 ** (nqubits - 1) - 1))


def generalized_concurrence(rho: DensityMatrix) -> float:
    """sqrt((N - sum_j Tr rho_j^2) / (2^(N-1) - 1)) on a pure n-qubit state.

    Reduces to the pure-state concurrence at N = 2.
    """
    if rho.nqubits < 2:
        raise ParameterError("generalized_concurrence: need at least 2 qubits")
    _require_pure(rho, "generalized_concurrence")
    n = rho.nqubits
    purities = sum(float(np.trace(r @ r).real) for r in single_qubit_reductions(rho))
    return math.sqrt(max(0.0, (n - purities) / (2 ** (n - 1) - 1)))


def bipartitions(nqubits: int):
    """All nontrivial unordered bipartitions as the subset containing qubit 0,

    in lexicographic order: (0,), (0,1), (0,1,2), ... for each size."""
    parts = []
    rest = list(range(1, nqubits))
    for size in range(0, nqubits - 1):
        for combo in combinations(rest, size):
            parts.append((0,) + combo)
    return sorted(parts)


def gme_concurrence(rho: DensityMatrix):
    """Minimum bipartite concurrence over all cuts of a pure n-qubit state.

    Returns ``(value, partition)`` where ``partition`` is the kept index
    subset of the minimizing cut, lexicographically smallest on ties.
    """
    if rho.nqubits < 2:
        raise ParameterError("gme_concurrence: need at least 2 qubits")
    _require_pure(rho, "gme_concurrence")
    n = rho.nqubits
    best_val = None
    best_part = None
    for part in bipartitions(n):
        red = rho.reduced(part)
        purity = float(np.trace(red @ red).real)
        val = math.sqrt(max(0.0, 2.0 * (1.0 - purity)))
        if best_val is None or val < best_val - 1e-12:
            best_val = val
            best_part = part
    return best_val, best_part


# ---------------------------------------------------------------------------
# Measure kinds and the Lyapunov entanglement function


@dataclass(frozen=True)
class MeasureKind:
    """Selector over the supported measure families.

    ``name`` is one of ``gf``, ``mixedConcurrence``, ``generalizedConcurrence``
    or ``gmeConcurrence``; GF kinds carry a validated :class:`GFMeasure`.
    """

    name: str
    gf: Optional[GFMeasure] = None

    def label(self) -> str:
        return self.gf.name if self.name == "gf" else self.name


def gf_kind(m: GFMeasure, samples: int = 201) -> MeasureKind:
    """Wrap a GF pair after running the axiomatic validator on it."""
    report = validate_gf_measure(m, samples)
    if not report.all_passed():
        raise ParameterError(
            f"gf_kind: {m.name} fails the measure conditions: {report.as_dict()}"
        )
    return MeasureKind(name="gf", gf=m)


MIXED_CONCURRENCE = MeasureKind(name="mixedConcurrence")
GENERALIZED_CONCURRENCE = MeasureKind(name="generalizedConcurrence")
GME_CONCURRENCE = MeasureKind(name="gmeConcurrence")


def measure_max(kind: MeasureKind, nqubits: int) -> float:
    """Largest value the (reported) measure attains on the register.

    Multipartite kinds report relative to the register maximum, so their
    ceiling is 1 on any qubit register.
    """
    if kind.name == "gf":
        if nqubits != 2:
            raise ParameterError("measure_max: GF measures are bipartite (2 qubits)")
        return kind.gf.max_value()
    if kind.name == "mixedConcurrence":
        if nqubits != 2:
            raise ParameterError("measure_max: mixed concurrence needs 2 qubits")
        return 1.0
    if kind.name in ("generalizedConcurrence", "gmeConcurrence"):
        if nqubits < 2:
            raise ParameterError("measure_max: need at least 2 qubits")
        return 1.0
    raise ParameterError(f"measure_max: unknown kind {kind.name!r}")


@dataclass(frozen=True)
class LyapunovValue:
    """V = Nmax - E, the descent function paired with its measure value."""

    v: float
    e: float
    nmax: float

    def __post_init__(self):
        if self.v < -1e-9:
            raise NumericalIntegrityError(
                f"LyapunovValue: V = {self.v} noticeably negative"
            )


def lef_value(rho: DensityMatrix, kind: MeasureKind) -> LyapunovValue:
    """Evaluate the Lyapunov entanglement function for the given kind.

    GF kinds use the register maximum G(2 f(1/2)); the mixed kind uses the
    spectrum-dependent ceiling, so V reaches zero exactly at the maximally
    entangled mixed state of that spectrum; the generalized-concurrence kind
    reports the measure relative to its register maximum (ceiling 1).
    """
    if kind.name == "gf":
        e = eg_pure(rho, kind.gf)
        nmax = kind.gf.max_value()
    elif kind.name == "mixedConcurrence":
        _require_two_qubit(rho, "lef_value")
        e = concurrence_mixed(rho)
        nmax = mixed_concurrence_bound(rho.eigenvalues())
    elif kind.name == "generalizedConcurrence":
        e = generalized_concurrence(rho) / gc_register_max(rho.nqubits)
        nmax = 1.0
    elif kind.name == "gmeConcurrence":
        e, _ = gme_concurrence(rho)
        nmax = 1.0
    else:
        raise ParameterError(f"lef_value: unknown kind {kind.name!r}")
    return LyapunovValue(v=nmax - e, e=e, nmax=nmax)
