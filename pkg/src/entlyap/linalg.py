"""Complex linear algebra and qubit-register primitives.

Everything here is a pure function of its inputs: tensor products, partial
traces, spectral functions, exact unitary matrix exponentials, Schmidt
decomposition and majorization checks, plus the handful of constant
operators and states (Paulis, Bell states, GHZ, W) the rest of the package
is built from.

Matrices and kets are plain ``numpy`` arrays of ``complex128``.  Qubit 0 is
the leftmost tensor factor, so a two-qubit basis is ordered
|00>, |01>, |10>, |11>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DimensionError, ParameterError

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10
PURITY_TOL = 1e-8

_C = np.complex128


def _const(mat) -> np.ndarray:
    out = np.array(mat, dtype=_C)
    out.flags.writeable = False
    return out


IDENTITY_2 = _const([[1, 0], [0, 1]])
PAULI_X = _const([[0, 1], [1, 0]])
PAULI_Y = _const([[0, -1j], [1j, 0]])
PAULI_Z = _const([[1, 0], [0, -1]])


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def tensor_product(a: np.ndarray, b: np.ndarray, *rest: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor outermost.

    Accepts two or more square matrices (or vectors) and associates left to
    right, so ``tensor_product(a, b, c)`` is ``(a (x) b) (x) c``.
    """
    out = np.kron(np.asarray(a, dtype=_C), np.asarray(b, dtype=_C))
    for m in rest:
        out = np.kron(out, np.asarray(m, dtype=_C))
    if not np.all(np.isfinite(out)):
        raise ContractViolationError("tensor_product: non-finite entries")
    return out


def partial_trace(mat: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Args:
        mat: square matrix over the composite space.
        dims: dimension of each subsystem, leftmost factor first.
        keep: indices (into ``dims``) of the subsystems to retain.

    Returns:
        The reduced matrix over the kept subsystems, in their original order.
    """
    mat = np.asarray(mat, dtype=_C)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise DimensionError(
            f"partial_trace: matrix shape {mat.shape} does not match dims {dims}"
        )
    keep = sorted(int(k) for k in keep)
    if not keep or any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"partial_trace: keep={keep} invalid for {n} subsystems")
    reshaped = mat.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out_axes = keep + [k + n for k in keep]
    reduced = np.einsum(reshaped, row + col, out_axes)
    d_kept = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(d_kept, d_kept)


def is_hermitian(mat: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T)) < tol)


def spectral_decompose(h: np.ndarray, tol: float = HERMITICITY_TOL):
    """Eigen-decompose a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with the real eigenvalues sorted in
    descending order and the matching orthonormal eigenvectors as columns.
    Degenerate eigenvalues keep the solver's orthonormal basis.
    """
    h = np.asarray(h, dtype=_C)
    if not is_hermitian(h, tol):
        raise ContractViolationError("spectral_decompose: input is not Hermitian")
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def matrix_function(f, h: np.ndarray) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum."""
    w, v = spectral_decompose(h)
    fw = np.array([f(x) for x in w], dtype=_C)
    if not np.all(np.isfinite(fw)):
        bad = w[~np.isfinite(fw)]
        raise ParameterError(f"matrix_function: f undefined at eigenvalue(s) {bad}")
    return (v * fw) @ v.conj().T


def matrix_exponential(a: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Exponential of a skew-Hermitian matrix, exactly unitary.

    Computed through the spectral decomposition of the Hermitian generator
    ``i*a``, so the result is unitary to solver precision rather than to the
    truncation order of a series.
    """
    a = np.asarray(a, dtype=_C)
    if np.max(np.abs(a + a.conj().T)) >= tol:
        raise ContractViolationError("matrix_exponential: input is not skew-Hermitian")
    w, v = np.linalg.eigh(1j * a)
    return (v * np.exp(-1j * w)) @ v.conj().T


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Biorthogonal expansion of a bipartite pure state.

    ``coefficients`` are the squared Schmidt coefficients: strictly positive,
    non-increasing, summing to one.  ``left_basis``/``right_basis`` hold the
    matching orthonormal kets as columns.
    """

    rank: int
    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        amps = np.sqrt(self.coefficients)
        psi = np.zeros(self.left_basis.shape[0] * self.right_basis.shape[0], dtype=_C)
        for k in range(self.rank):
            psi += amps[k] * np.kron(self.left_basis[:, k], self.right_basis[:, k])
        return psi


def schmidt_decompose(psi: np.ndarray, dim_a: int, dim_b: int,
                      cutoff: float = 1e-12) -> SchmidtDecomposition:
    """Schmidt-decompose a bipartite pure state of shape ``dim_a * dim_b``."""
    psi = np.asarray(psi, dtype=_C).ravel()
    if psi.size != dim_a * dim_b:
        raise DimensionError(
            f"schmidt_decompose: state of dim {psi.size} != {dim_a}*{dim_b}"
        )
    m = psi.reshape(dim_a, dim_b)
    u, s, vh = np.linalg.svd(m)
    alphas = s ** 2
    rank = int(np.sum(alphas > cutoff))
    if rank == 0:
        raise ContractViolationError("schmidt_decompose: zero state")
    return SchmidtDecomposition(
        rank=rank,
        coefficients=alphas[:rank],
        left_basis=u[:, :rank],
        right_basis=vh[:rank, :].T,
    )


def majorizes(alpha, alpha_prime, tol: float = 1e-10) -> bool:
    """Prefix-sum dominance check on two descending probability vectors.

    Returns True iff ``alpha`` is majorized by ``alpha_prime``, the Nielsen
    condition for converting the first state into the second by LOCC.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(alpha_prime, dtype=float)
    for name, v in (("alpha", a), ("alphaPrime", b)):
        if abs(v.sum() - 1.0) > tol:
            raise ContractViolationError(f"majorizes: {name} does not sum to 1")
        if np.any(np.diff(v) > tol):
            raise ContractViolationError(f"majorizes: {name} is not sorted descending")
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    ca, cb = np.cumsum(a), np.cumsum(b)
    return bool(np.all(ca[:-1] <= cb[:-1] + 1e-12))


# ---------------------------------------------------------------------------
# States


def computational_ket(bits: str) -> np.ndarray:
    """Basis ket |bits> for a register of ``len(bits)`` qubits."""
    if not bits or any(c not in "01" for c in bits):
        raise ParameterError(f"computational_ket: invalid bit string {bits!r}")
    psi = np.zeros(2 ** len(bits), dtype=_C)
    psi[int(bits, 2)] = 1.0
    return psi


def bell_ket(label: str) -> np.ndarray:
    """One of the four Bell states: labels '00', '01', '10', '11'.

    b00 = (|00>+|11>)/sqrt2, b01 = (|00>-|11>)/sqrt2,
    b10 = (|01>+|10>)/sqrt2, b11 = (|01>-|10>)/sqrt2.
    """
    s = 1.0 / np.sqrt(2.0)
    table = {
        "00": [s, 0, 0, s],
        "01": [s, 0, 0, -s],
        "10": [0, s, s, 0],
        "11": [0, s, -s, 0],
    }
    if label not in table:
        raise ParameterError(f"bell_ket: unknown label {label!r}")
    return np.array(table[label], dtype=_C)


BELL_LABELS = ("00", "01", "10", "11")


def ghz_ket(nqubits: int = 3) -> np.ndarray:
    psi = np.zeros(2 ** nqubits, dtype=_C)
    psi[0] = psi[-1] = 1.0 / np.sqrt(2.0)
    return psi


def w_ket(nqubits: int = 3) -> np.ndarray:
    psi = np.zeros(2 ** nqubits, dtype=_C)
    for j in range(nqubits):
        psi[1 << j] = 1.0
    return psi / np.sqrt(nqubits)


def normalize_ket(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=_C)
    n = np.linalg.norm(psi)
    if n < 1e-12:
        raise ParameterError("normalize_ket: zero vector")
    return psi / n


# ---------------------------------------------------------------------------
# Density matrices


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix over an n-qubit register."""

    nqubits: int
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return 2 ** self.nqubits

    @classmethod
    def from_matrix(cls, mat: np.ndarray, check: bool = True) -> "DensityMatrix":
        mat = np.array(mat, dtype=_C)
        d = mat.shape[0]
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError("DensityMatrix: matrix must be square")
        n = d.bit_length() - 1
        if 2 ** n != d or n < 1:
            raise DimensionError(f"DensityMatrix: dim {d} is not a power of two")
        if check:
            if not np.all(np.isfinite(mat)):
                raise ContractViolationError("DensityMatrix: non-finite entries")
            if np.max(np.abs(mat - mat.conj().T)) >= HERMITICITY_TOL:
                raise ContractViolationError("DensityMatrix: not Hermitian")
            if abs(np.trace(mat).real - 1.0) >= TRACE_TOL:
                raise ContractViolationError("DensityMatrix: trace != 1")
            if np.min(np.linalg.eigvalsh(mat)) < EIGENVALUE_FLOOR:
                raise ContractViolationError("DensityMatrix: negative eigenvalue")
        mat.flags.writeable = False
        return cls(nqubits=n, mat=mat)

    @classmethod
    def from_ket(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = normalize_ket(psi)
        return cls.from_matrix(np.outer(psi, psi.conj()), check=False)

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)

    def is_pure(self, tol: float = PURITY_TOL) -> bool:
        return abs(self.purity() - 1.0) < tol

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in descending order."""
        return np.linalg.eigvalsh(self.mat)[::-1].copy()

    def reduced(self, keep) -> np.ndarray:
        """Partial trace keeping the listed qubits."""
        return partial_trace(self.mat, [2] * self.nqubits, keep)

    def populations(self) -> np.ndarray:
        return self.mat.diagonal().real.copy()


def maximally_mixed(nqubits: int) -> DensityMatrix:
    d = 2 ** nqubits
    return DensityMatrix.from_matrix(np.eye(d, dtype=_C) / d, check=False)
