"""Hamiltonians and closed-system propagation under piecewise-constant control.

The von Neumann equation is integrated in the interaction picture: each time
step conjugates the state by the exact exponential of the control generator
evaluated at the interval midpoint.  Because every step is an exact unitary
(to eigensolver precision), the spectrum of the density matrix is preserved
over arbitrarily long horizons, which the mixed-state experiments rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import ContractViolationError, DimensionError, ParameterError
from .linalg import DensityMatrix

_C = np.complex128

HAMILTONIAN_TOL = 1e-12


@dataclass(frozen=True)
class HamiltonianSet:
    """Drift Hamiltonian plus control Hamiltonians, all Hermitian, same dim.

    ``coupling`` records the spin-spin constant J when the drift uses one;
    it is informational only.  The drift's spectral data is precomputed once
    so interaction-picture operators are cheap per step; a diagonal drift
    (every preset here) reduces to elementwise phase twiddling.
    """

    h0: np.ndarray
    controls: tuple
    coupling: Optional[float] = None
    _diag: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _evecs: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        h0 = np.array(self.h0, dtype=_C)
        controls = tuple(np.array(h, dtype=_C) for h in self.controls)
        d = h0.shape[0]
        for name, h in [("h0", h0)] + [(f"controls[{k}]", h) for k, h in enumerate(controls)]:
            if h.ndim != 2 or h.shape != (d, d):
                raise DimensionError(f"HamiltonianSet: {name} shape {h.shape} != ({d},{d})")
            if np.max(np.abs(h - h.conj().T)) >= HAMILTONIAN_TOL:
                raise ContractViolationError(f"HamiltonianSet: {name} is not Hermitian")
        n = d.bit_length() - 1
        if 2 ** n != d:
            raise DimensionError(f"HamiltonianSet: dim {d} is not a power of two")
        for h in (h0,) + controls:
            h.flags.writeable = False
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "controls", controls)
        off = h0 - np.diag(np.diag(h0))
        if np.max(np.abs(off)) < HAMILTONIAN_TOL:
            object.__setattr__(self, "_diag", np.diag(h0).real.copy())
            object.__setattr__(self, "_evecs", None)
        else:
            w, v = np.linalg.eigh(h0)
            object.__setattr__(self, "_diag", w)
            object.__setattr__(self, "_evecs", v)

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def ncontrols(self) -> int:
        return len(self.controls)

    def control_stack(self) -> np.ndarray:
        return np.stack(self.controls)


@dataclass(frozen=True)
class PropagationConfig:
    """Time step, horizon and sampling stride for the control loop."""

    dt: float = 0.001
    t_max: float = 20.0
    record_every: int = 10

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ParameterError(f"PropagationConfig: dt = {self.dt} must be positive")
        if self.dt > self.t_max:
            raise ParameterError("PropagationConfig: dt exceeds t_max")
        if self.record_every < 1:
            raise ParameterError("PropagationConfig: record_every must be >= 1")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_max / self.dt))


def _rotation_phases(hs: HamiltonianSet, t: float) -> np.ndarray:
    """Phase matrix P with A(t) = P * H elementwise, for diagonal drift."""
    ph = np.exp(1j * hs._diag * t)
    return ph[:, None] * ph.conj()[None, :]


def interaction_operator(hs: HamiltonianSet, k: int, t: float) -> np.ndarray:
    """A_k(t) = exp(i H0 t) H_k exp(-i H0 t)."""
    if not 0 <= k < hs.ncontrols:
        raise ParameterError(f"interaction_operator: control index {k} out of range")
    return interaction_stack(hs, t)[k]


def interaction_stack(hs: HamiltonianSet, t: float) -> np.ndarray:
    """All interaction-picture control operators at time t, shape (m, d, d)."""
    stack = hs.control_stack()
    if hs._evecs is None:
        return _rotation_phases(hs, t)[None, :, :] * stack
    v = hs._evecs
    u0 = (v * np.exp(1j * hs._diag * t)) @ v.conj().T
    return u0 @ stack @ u0.conj().T


def _step_matrix(rho: np.ndarray, hs: HamiltonianSet, u: np.ndarray,
                 t: float, dt: float) -> np.ndarray:
    """One exact-unitary step of the interaction-picture von Neumann equation.

    The control generator is evaluated at the interval midpoint and held
    constant across the step.
    """
    a = interaction_stack(hs, t + 0.5 * dt)
    hc = np.einsum("k,kij->ij", np.asarray(u, dtype=_C), a)
    w, v = np.linalg.eigh(hc)
    prop = (v * np.exp(-1j * w * dt)) @ v.conj().T
    out = prop @ rho @ prop.conj().T
    return 0.5 * (out + out.conj().T)


def step(rho: DensityMatrix, hs: HamiltonianSet, u, t: float, dt: float) -> DensityMatrix:
    """Advance a density matrix by one controlled step."""
    u = np.asarray(u, dtype=float)
    if u.shape != (hs.ncontrols,):
        raise ContractViolationError(
            f"step: control vector has {u.size} entries, expected {hs.ncontrols}"
        )
    if rho.dim != hs.dim:
        raise DimensionError("step: state and Hamiltonian dimensions differ")
    return DensityMatrix.from_matrix(_step_matrix(rho.mat, hs, u, t, dt), check=False)


@dataclass
class TrajectoryRecord:
    """Sampled history of one closed-loop run.

    ``states[i]`` is the density matrix at ``times[i]``; ``controls[i]`` the
    field vector applied there.  ``scalars`` holds caller-supplied per-sample
    series (Lyapunov value, measure value, feedback magnitude, ...).
    """

    times: np.ndarray
    states: List[np.ndarray]
    controls: np.ndarray
    scalars: Dict[str, np.ndarray]
    halted_early: bool = False

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def evolve(
    rho0: DensityMatrix,
    hs: HamiltonianSet,
    controller: Callable[[np.ndarray, float], np.ndarray],
    cfg: PropagationConfig,
    probe: Optional[Callable[[np.ndarray, float], Dict[str, float]]] = None,
    halt: Optional[Callable[[float, np.ndarray], bool]] = None,
) -> TrajectoryRecord:
    """Run the control loop and sample it every ``record_every`` steps.

    ``controller(rho, t)`` returns the field vector applied over the next
    step; ``probe(rho, t)``, if given, supplies per-sample scalars; ``halt``
    is consulted at sample instants and ends the run early when it returns
    True (the sample at the halt instant is kept).  The final state is always
    the last sample.
    """
    if rho0.dim != hs.dim:
        raise DimensionError("evolve: state and Hamiltonian dimensions differ")
    m = hs.ncontrols
    rho = rho0.mat.copy()
    times: List[float] = []
    states: List[np.ndarray] = []
    controls: List[np.ndarray] = []
    scalar_rows: List[Dict[str, float]] = []
    halted = False

    def take_sample(t: float, u: np.ndarray) -> None:
        times.append(t)
        states.append(rho.copy())
        controls.append(np.asarray(u, dtype=float).copy())
        if probe is not None:
            scalar_rows.append(probe(rho, t))

    nsteps = cfg.nsteps
    i = 0
    while i < nsteps:
        t = i * cfg.dt
        u = np.asarray(controller(rho, t), dtype=float)
        if u.shape != (m,):
            raise ContractViolationError(
                f"evolve: controller returned {u.size} fields, expected {m}"
            )
        if i % cfg.record_every == 0:
            take_sample(t, u)
            if halt is not None and halt(t, rho):
                halted = True
                break
        rho = _step_matrix(rho, hs, u, t, cfg.dt)
        i += 1
    if not halted:
        t = nsteps * cfg.dt
        u = np.asarray(controller(rho, t), dtype=float)
        take_sample(t, u)

    scalars: Dict[str, np.ndarray] = {}
    if probe is not None and scalar_rows:
        for key in scalar_rows[0]:
            scalars[key] = np.array([row[key] for row in scalar_rows])
    return TrajectoryRecord(
        times=np.array(times),
        states=states,
        controls=np.array(controls),
        scalars=scalars,
        halted_early=halted,
    )
