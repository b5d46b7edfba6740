"""Experiment orchestration: single closed-loop runs, Bell-basin scans over

the Bell-state tetrahedron, fixed-spectrum MEMS searches, and tripartite
runs, plus terminal-state classification and convergence detection.

Every experiment is deterministic given its seed; per-point randomness is
derived by counter-based splitting of one root seed, so scans parallelize
without changing their output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .control import (
    ControlGains,
    ControllerSpec,
    control_mixed,
    control_pure,
    controller_spec,
    feedback_gc,
    feedback_gme_with_cut,
    feedback_mixed,
    feedback_pure,
    linear_shape,
    perturb_initial,
)
from .dynamics import HamiltonianSet, PropagationConfig, TrajectoryRecord, evolve
from .errors import NumericalIntegrityError, ParameterError
from .linalg import (
    DensityMatrix,
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BELL_LABELS,
    bell_ket,
    computational_ket,
    ghz_ket,
    normalize_ket,
    tensor_product,
)
from .measures import (
    GFMeasure,
    MeasureKind,
    MIXED_CONCURRENCE,
    GENERALIZED_CONCURRENCE,
    GME_CONCURRENCE,
    TildeDecomposition,
    bipartitions,
    concurrence_measure,
    concurrence_mixed,
    eg_pure,
    entropy_measure,
    gc_register_max,
    generalized_concurrence,
    gme_concurrence,
    mixed_concurrence_bound,
    renyi_measure,
    tilde_decompose,
)

PURE_BIPARTITE = "pureBipartite"
MIXED_BIPARTITE = "mixedBipartite"
TRIPARTITE_GC = "tripartiteGC"
TRIPARTITE_GME = "tripartiteGME"
SCENARIOS = (PURE_BIPARTITE, MIXED_BIPARTITE, TRIPARTITE_GC, TRIPARTITE_GME)

DEFAULT_COUPLING = 0.5
DEFAULT_CONV_TOL = 1e-6
DEFAULT_CONV_WINDOW = 100
BELL_FIDELITY_TOL = 0.999
MEMS_CLASS_TOL = 1e-2


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    """Deterministic per-task generator split off one root seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def gf_measure_by_name(name: str, alpha: Optional[float] = None) -> GFMeasure:
    if name == "concurrence":
        return concurrence_measure()
    if name == "entropy":
        return entropy_measure()
    if name == "renyi":
        if alpha is None:
            raise ParameterError("renyi measure needs alpha")
        return renyi_measure(alpha)
    raise ParameterError(f"unknown GF measure {name!r}")


# ---------------------------------------------------------------------------
# Hamiltonian presets


def pair_exchange_generators(dim: int) -> List[np.ndarray]:
    """The i(|m><n| - |n><m|) exchange generators for every basis pair m < n."""
    gens = []
    for mm in range(dim):
        for nn in range(mm + 1, dim):
            g = np.zeros((dim, dim), dtype=np.complex128)
            g[mm, nn] = 1j
            g[nn, mm] = -1j
            gens.append(g)
    return gens


def pair_transfer_quadratures(dim: int) -> List[np.ndarray]:
    """Both quadratures of every basis-pair intertransfer, m < n:

    |m><n| + |n><m| followed by i(|m><n| - |n><m|)."""
    gens = []
    for mm in range(dim):
        for nn in range(mm + 1, dim):
            g1 = np.zeros((dim, dim), dtype=np.complex128)
            g1[mm, nn] = 1.0
            g1[nn, mm] = 1.0
            g2 = np.zeros((dim, dim), dtype=np.complex128)
            g2[mm, nn] = 1j
            g2[nn, mm] = -1j
            gens += [g1, g2]
    return gens


def _pure_bipartite_controls() -> List[np.ndarray]:
    return [
        tensor_product(PAULI_X, PAULI_Y) + tensor_product(PAULI_Z, PAULI_Z),
        tensor_product(PAULI_X, PAULI_Z) + tensor_product(PAULI_Z, PAULI_X),
        tensor_product(PAULI_Y, PAULI_Z) + tensor_product(PAULI_Z, PAULI_Y),
    ]


def preset_hamiltonians(name: str) -> HamiltonianSet:
    """Documented Hamiltonian sets for each scenario.

    ``pureBipartite``: drift 2J sz(x)sz with J = 0.5 and the three two-body
    controls sx sy + sz sz, sx sz + sz sx, sy sz + sz sy.
    ``mixedBipartite``: drift sz(x)sz and the twelve controls realizing both
    quadratures of every basis-pair intertransfer (the quoted six
    Pauli-product controls are real combinations of these; see
    ``mixedBipartitePauli6`` for that reduced set).
    ``tripartite``: the bipartite setting carried to three qubits, drift
    2J(sz sz 1 + 1 sz sz) with the two-body control triple on both adjacent
    pairs.  ``tripartiteFull`` adds the basis-pair exchange generators on the
    full register for a fully controllable variant.
    """
    if name == PURE_BIPARTITE:
        h0 = 2.0 * DEFAULT_COUPLING * tensor_product(PAULI_Z, PAULI_Z)
        return HamiltonianSet(h0=h0, controls=tuple(_pure_bipartite_controls()),
                              coupling=DEFAULT_COUPLING)
    if name == MIXED_BIPARTITE:
        h0 = tensor_product(PAULI_Z, PAULI_Z)
        return HamiltonianSet(h0=h0, controls=tuple(pair_transfer_quadratures(4)),
                              coupling=None)
    if name == "mixedBipartitePauli6":
        # the six Pauli-product controls quoted for this setting; their span
        # misses the XX, XY and ZZ directions, so descent can stall strictly
        # below the spectrum ceiling -- kept for reference and experiments
        h0 = tensor_product(PAULI_Z, PAULI_Z)
        controls = (
            tensor_product(PAULI_Z, PAULI_X),
            tensor_product(PAULI_Z, PAULI_Y),
            tensor_product(PAULI_Y, PAULI_Z),
            tensor_product(PAULI_X, PAULI_Z),
            tensor_product(PAULI_Y, PAULI_Y),
            tensor_product(PAULI_Y, PAULI_X),
        )
        return HamiltonianSet(h0=h0, controls=controls, coupling=None)
    if name in ("tripartite", "tripartiteFull"):
        zz1 = tensor_product(PAULI_Z, PAULI_Z, IDENTITY_2)
        one_zz = tensor_product(IDENTITY_2, PAULI_Z, PAULI_Z)
        h0 = 2.0 * DEFAULT_COUPLING * (zz1 + one_zz)
        controls = [tensor_product(c, IDENTITY_2) for c in _pure_bipartite_controls()]
        controls += [tensor_product(IDENTITY_2, c) for c in _pure_bipartite_controls()]
        if name == "tripartiteFull":
            controls += pair_exchange_generators(8)
        return HamiltonianSet(h0=h0, controls=tuple(controls), coupling=DEFAULT_COUPLING)
    raise ParameterError(f"preset_hamiltonians: unknown scenario {name!r}")


_SCENARIO_PRESET = {
    PURE_BIPARTITE: PURE_BIPARTITE,
    MIXED_BIPARTITE: MIXED_BIPARTITE,
    TRIPARTITE_GC: "tripartite",
    TRIPARTITE_GME: "tripartite",
}


# ---------------------------------------------------------------------------
# Initial states

# Initial deviations of the eight catalogued near-basis starting points and
# the Bell state each converges to.  Each row is (base ket, direction ket,
# sign on the direction); the (1 + epsilon) weight sits on the first ket.
_TABLE1 = (
    ("00", "01", +1, "00"),
    ("01", "00", +1, "01"),
    ("00", "01", -1, "00"),
    ("01", "00", -1, "01"),
    ("10", "11", +1, "10"),
    ("11", "10", +1, "11"),
    ("11", "10", -1, "11"),
    ("11", "10", -2, "11"),
)


def table1_initial(row: int, epsilon: float = 1e-3) -> np.ndarray:
    """Initial ket of the catalogued row (1-based), a perturbed basis state."""
    if not 1 <= row <= 8:
        raise ParameterError(f"table1_initial: row {row} out of range 1..8")
    main, other, sign, _ = _TABLE1[row - 1]
    if sign == -2:
        # row 8: other - (1 + eps) main, the weight on the negated main ket
        return perturb_initial(-bell_ket(main), bell_ket(other), epsilon)
    return perturb_initial(bell_ket(main), float(sign) * bell_ket(other), epsilon)


def table1_expected_final(row: int) -> str:
    return _TABLE1[row - 1][3]


def bell_mixture_ket(weights: Sequence[float], phases: Optional[Sequence[float]] = None) -> np.ndarray:
    """Sum of the four Bell states with amplitudes sqrt(w_i) e^(i phi_i)."""
    w = np.asarray(weights, dtype=float)
    if w.size != 4 or np.any(w < -1e-12):
        raise ParameterError("bell_mixture_ket: need 4 nonnegative weights")
    amps = np.sqrt(np.clip(w, 0.0, None))
    if phases is not None:
        amps = amps * np.exp(1j * np.asarray(phases, dtype=float))
    psi = sum(amps[i] * bell_ket(lbl) for i, lbl in enumerate(BELL_LABELS))
    return normalize_ket(psi)


def _sorted_spectrum(spectrum, tol: float = 1e-9) -> np.ndarray:
    lam = np.sort(np.asarray(spectrum, dtype=float))[::-1]
    if lam.size != 4:
        raise ParameterError("spectrum must have 4 entries")
    if np.any(lam < -1e-12):
        raise ParameterError("spectrum must be nonnegative")
    if abs(lam.sum() - 1.0) > tol:
        raise ParameterError(f"spectrum sums to {lam.sum():.6f}, expected 1")
    return lam


def kernel_mems(spectrum) -> DensityMatrix:
    """The spectrum-parameterized maximally entangled mixed state

    l1 |b11><b11| + l2 |00><00| + l3 |b10><b10| + l4 |11><11|."""
    lam = _sorted_spectrum(spectrum)
    kets = (bell_ket("11"), computational_ket("00"), bell_ket("10"), computational_ket("11"))
    mat = sum(l * np.outer(k, k.conj()) for l, k in zip(lam, kets))
    return DensityMatrix.from_matrix(mat)


def separable_diagonal(spectrum) -> DensityMatrix:
    """Computational-basis mixture with the given spectrum; zero concurrence."""
    lam = _sorted_spectrum(spectrum)
    return DensityMatrix.from_matrix(np.diag(lam.astype(np.complex128)))


def separable_like(spectrum, seed: int = 0) -> DensityMatrix:
    """Product-basis mixture of the given spectrum, conjugated by a seeded

    random local (product) unitary.  Still separable with zero concurrence,
    but off the symmetry manifold where the mixed feedback vanishes."""
    lam = _sorted_spectrum(spectrum)
    rng = rng_for(seed)
    locals_ = []
    for _ in range(2):
        z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, r = np.linalg.qr(z)
        locals_.append(q * (np.diag(r) / np.abs(np.diag(r))))
    u = np.kron(locals_[0], locals_[1])
    mat = u @ np.diag(lam.astype(np.complex128)) @ u.conj().T
    return DensityMatrix.from_matrix(0.5 * (mat + mat.conj().T))


def random_density_with_spectrum(spectrum, seed: int) -> DensityMatrix:
    """Haar-random conjugation of the given spectrum: exact eigenvalues."""
    lam = _sorted_spectrum(spectrum)
    rng = rng_for(seed)
    d = lam.size
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    mat = (q * lam) @ q.conj().T
    return DensityMatrix.from_matrix(0.5 * (mat + mat.conj().T))


def haar_random_ket(dim: int, seed: int) -> np.ndarray:
    rng = rng_for(seed)
    return normalize_ket(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def perturbed_product_ket(nqubits: int, epsilon: float, seed: int) -> np.ndarray:
    """|0...0> nudged by epsilon along a seeded random direction."""
    psi = computational_ket("0" * nqubits)
    return normalize_ket(psi + epsilon * haar_random_ket(2 ** nqubits, seed))


# ---------------------------------------------------------------------------
# Experiment specification and results


class TerminalClass(Enum):
    BELL_B00 = "Bell_b00"
    BELL_B01 = "Bell_b01"
    BELL_B10 = "Bell_b10"
    BELL_B11 = "Bell_b11"
    BELL_EQUIVALENT = "BellEquivalent"
    MEMS = "MEMS"
    OTHER = "Other"


_BELL_CLASS = {
    "00": TerminalClass.BELL_B00,
    "01": TerminalClass.BELL_B01,
    "10": TerminalClass.BELL_B10,
    "11": TerminalClass.BELL_B11,
}


@dataclass
class ExperimentSpec:
    """Fully resolved description of one closed-loop run."""

    scenario: str
    measure: MeasureKind
    initial: DensityMatrix
    hamiltonians: HamiltonianSet
    controller: ControllerSpec
    propagation: PropagationConfig
    conv_tol: float = DEFAULT_CONV_TOL
    conv_window: int = DEFAULT_CONV_WINDOW

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ParameterError(f"unknown scenario {self.scenario!r}")
        expected = {
            PURE_BIPARTITE: "gf",
            MIXED_BIPARTITE: "mixedConcurrence",
            TRIPARTITE_GC: "generalizedConcurrence",
            TRIPARTITE_GME: "gmeConcurrence",
        }[self.scenario]
        if self.measure.name != expected:
            raise ParameterError(
                f"scenario {self.scenario} needs measure kind {expected}, "
                f"got {self.measure.name}"
            )
        need_qubits = 2 if self.scenario in (PURE_BIPARTITE, MIXED_BIPARTITE) else 3
        if self.initial.nqubits != need_qubits:
            raise ParameterError(
                f"scenario {self.scenario} is a {need_qubits}-qubit experiment, "
                f"initial state has {self.initial.nqubits}"
            )
        if self.initial.dim != self.hamiltonians.dim:
            raise ParameterError("initial state and Hamiltonians disagree in dimension")


@dataclass
class RunResult:
    """Outcome of one closed-loop run."""

    trajectory: TrajectoryRecord
    final_state: DensityMatrix
    final_e: float
    converged: bool
    terminal_class: TerminalClass
    nmax: float
    steady_concurrence: Optional[float] = None
    tilde_report: Optional[TildeDecomposition] = None
    e_star: Optional[float] = None


def make_experiment(
    scenario: str,
    initial: DensityMatrix,
    measure: Optional[MeasureKind] = None,
    gf: Optional[GFMeasure] = None,
    hamiltonians: Optional[HamiltonianSet] = None,
    gains: Optional[ControlGains] = None,
    propagation: Optional[PropagationConfig] = None,
    conv_tol: float = DEFAULT_CONV_TOL,
    conv_window: int = DEFAULT_CONV_WINDOW,
    preset: Optional[str] = None,
) -> ExperimentSpec:
    """Fill the documented defaults around an initial state."""
    if measure is None:
        if scenario == PURE_BIPARTITE:
            measure = MeasureKind(name="gf", gf=gf or concurrence_measure())
        elif scenario == MIXED_BIPARTITE:
            measure = MIXED_CONCURRENCE
        elif scenario == TRIPARTITE_GC:
            measure = GENERALIZED_CONCURRENCE
        elif scenario == TRIPARTITE_GME:
            measure = GME_CONCURRENCE
        else:
            raise ParameterError(f"unknown scenario {scenario!r}")
    hs = hamiltonians or preset_hamiltonians(preset or _SCENARIO_PRESET[scenario])
    return ExperimentSpec(
        scenario=scenario,
        measure=measure,
        initial=initial,
        hamiltonians=hs,
        controller=controller_spec(measure, linear_shape(), gains or ControlGains()),
        propagation=propagation or PropagationConfig(),
        conv_tol=conv_tol,
        conv_window=conv_window,
    )


def _wire_scenario(spec: ExperimentSpec):
    """Feedback, field law, measure probe and ceiling for the scenario."""
    hs = spec.hamiltonians
    cspec = spec.controller
    n = spec.initial.nqubits
    if spec.scenario == PURE_BIPARTITE:
        gf = spec.measure.gf
        nmax = gf.max_value()

        def feedback(mat, t):
            return feedback_pure(mat, gf, hs, t)

        def fields(x):
            return control_pure(x, cspec)

        def energy(mat):
            return eg_pure(DensityMatrix(nqubits=2, mat=mat), gf)

    elif spec.scenario == MIXED_BIPARTITE:
        nmax = mixed_concurrence_bound(spec.initial.eigenvalues())

        def feedback(mat, t):
            return feedback_mixed(mat, hs, t)

        def fields(x):
            return control_mixed(x, cspec)

        def energy(mat):
            return concurrence_mixed(DensityMatrix(nqubits=2, mat=mat))

    elif spec.scenario == TRIPARTITE_GC:
        nmax = 1.0
        scale = gc_register_max(n)

        def feedback(mat, t):
            return feedback_gc(mat, hs, t)

        def fields(x):
            return control_mixed(x, cspec)

        def energy(mat):
            return generalized_concurrence(DensityMatrix(nqubits=n, mat=mat)) / scale

    else:  # TRIPARTITE_GME
        nmax = 1.0
        # count minimizing-cut changes at step resolution; V is non-smooth
        # exactly at these events, so monotonicity checks exclude them
        switch_state = {"last": None, "count": 0}

        def feedback(mat, t):
            x, part = feedback_gme_with_cut(mat, hs, t)
            if switch_state["last"] is not None and part != switch_state["last"]:
                switch_state["count"] += 1
            switch_state["last"] = part
            return x

        def fields(x):
            return control_mixed(x, cspec)

        def energy(mat):
            return gme_concurrence(DensityMatrix(nqubits=n, mat=mat))[0]

        feedback.switch_state = switch_state

    return feedback, fields, energy, nmax


def run_trajectory(spec: ExperimentSpec) -> RunResult:
    """Closed-loop run with per-sample V, E and feedback magnitude records."""
    feedback, fields, energy, nmax = _wire_scenario(spec)
    track_cut = spec.scenario == TRIPARTITE_GME
    n = spec.initial.nqubits
    cuts = bipartitions(n) if track_cut else None
    last_xmax = [np.inf]

    def controller(mat, t):
        return fields(feedback(mat, t))

    def probe(mat, t):
        x = feedback(mat, t)
        e = energy(mat)
        if e > nmax + 1e-6:
            raise NumericalIntegrityError(
                f"measure value {e} exceeds its ceiling {nmax} at t = {t}"
            )
        last_xmax[0] = float(np.max(np.abs(x))) if x.size else 0.0
        row = {"V": nmax - e, "E": e, "x_max": last_xmax[0]}
        if track_cut:
            _, part = gme_concurrence(DensityMatrix(nqubits=n, mat=mat))
            row["cut"] = float(cuts.index(part))
            row["cut_switches"] = float(feedback.switch_state["count"])
        return row

    streak = [0]

    def halt(t, mat):
        if last_xmax[0] < spec.conv_tol:
            streak[0] += 1
        else:
            streak[0] = 0
        return streak[0] >= spec.conv_window

    traj = evolve(spec.initial, spec.hamiltonians, controller, spec.propagation,
                  probe=probe, halt=halt)
    final = DensityMatrix.from_matrix(traj.final_state)
    converged = detect_convergence(traj, spec.conv_tol, spec.conv_window)
    final_e = float(traj.scalars["E"][-1])

    steady = None
    tilde = None
    e_star = None
    if spec.scenario == MIXED_BIPARTITE:
        e_star = mixed_concurrence_bound(spec.initial.eigenvalues())
        steady = final_e
        tilde = tilde_decompose(final)
        klass = TerminalClass.MEMS if abs(final_e - e_star) <= MEMS_CLASS_TOL else TerminalClass.OTHER
    elif spec.scenario == PURE_BIPARTITE:
        klass = classify_terminal(final)
    else:
        klass = TerminalClass.OTHER
    return RunResult(
        trajectory=traj,
        final_state=final,
        final_e=final_e,
        converged=converged,
        terminal_class=klass,
        nmax=nmax,
        steady_concurrence=steady,
        tilde_report=tilde,
        e_star=e_star,
    )


def detect_convergence(trajectory: TrajectoryRecord, tol: float, window: int) -> bool:
    """True iff the last ``window`` samples all have max_k |x_k| < tol."""
    if window < 1:
        raise ParameterError("detect_convergence: window must be >= 1")
    xm = trajectory.scalars.get("x_max")
    if xm is None:
        raise ParameterError("detect_convergence: trajectory lacks feedback records")
    if len(xm) < window:
        return False
    return bool(np.all(xm[-window:] < tol))


def classify_terminal(rho: DensityMatrix, tol_fid: float = BELL_FIDELITY_TOL) -> TerminalClass:
    """Bell state by fidelity, else Bell-equivalent by the reduced-matrix test,

    else Other.  A maximally entangled two-qubit state has reduced matrix
    exactly I/2, which is what the second test checks to 1e-3."""
    best_label = None
    best_fid = -1.0
    for lbl in BELL_LABELS:
        b = bell_ket(lbl)
        fid = float((b.conj() @ rho.mat @ b).real)
        if fid > best_fid:
            best_fid, best_label = fid, lbl
    if best_fid > tol_fid:
        return _BELL_CLASS[best_label]
    rm = rho.reduced([0])
    if np.max(np.abs(rm - 0.5 * np.eye(2))) < 1e-3:
        return TerminalClass.BELL_EQUIVALENT
    return TerminalClass.OTHER


# ---------------------------------------------------------------------------
# Basin-of-attraction scan


@dataclass(frozen=True)
class BasinConfig:
    """Picklable knobs for a basin scan (one worker process per point batch)."""

    measure: str = "concurrence"
    alpha: Optional[float] = None
    gain: float = 5.0
    epsilon: float = 1e-3
    dt: float = 0.001
    t_max: float = 20.0
    record_every: int = 10
    conv_tol: float = DEFAULT_CONV_TOL
    conv_window: int = DEFAULT_CONV_WINDOW
    random_points: int = 0


@dataclass(frozen=True)
class BasinPoint:
    """One tetrahedron sample: squared Bell weights plus its terminal class."""

    coefficients: Tuple[float, float, float, float]
    terminal: TerminalClass
    converged: bool


def _simplex_grid(resolution: int):
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            for k in range(resolution + 1 - i - j):
                l = resolution - i - j - k
                yield (i / resolution, j / resolution, k / resolution, l / resolution)


def _basin_worker(job) -> BasinPoint:
    index, weights, cfg, seed = job
    rng = rng_for(seed, index)
    if weights is None:
        w = rng.dirichlet(np.ones(4))
        phases = rng.uniform(0.0, 2.0 * math.pi, size=4)
        psi = bell_mixture_ket(w, phases)
        weights = tuple(float(v) for v in w)
    else:
        psi = bell_mixture_ket(weights)
    gf = gf_measure_by_name(cfg.measure, cfg.alpha)
    kind = MeasureKind(name="gf", gf=gf)
    rho = DensityMatrix.from_ket(psi)
    if eg_pure(rho, gf) < 1e-9:
        # exactly separable start: the control law is identically zero there,
        # so nudge along a seeded random direction before running
        direction = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi = normalize_ket(psi + cfg.epsilon * direction / np.linalg.norm(direction))
        rho = DensityMatrix.from_ket(psi)
    spec = make_experiment(
        PURE_BIPARTITE,
        rho,
        measure=kind,
        gains=ControlGains(r=cfg.gain, epsilon=cfg.epsilon),
        propagation=PropagationConfig(dt=cfg.dt, t_max=cfg.t_max, record_every=cfg.record_every),
        conv_tol=cfg.conv_tol,
        conv_window=cfg.conv_window,
    )
    result = run_trajectory(spec)
    return BasinPoint(coefficients=tuple(float(v) for v in weights),
                      terminal=result.terminal_class, converged=result.converged)


def basin_scan(resolution: int, base: BasinConfig = BasinConfig(), seed: int = 0,
               workers: int = 1) -> List[BasinPoint]:
    """Classify the simplex grid (plus any random interior points) by terminal

    state.  Deterministic given (resolution, base, seed); worker count only
    affects wall time."""
    if resolution < 2:
        raise ParameterError("basin_scan: resolution must be >= 2")
    jobs = [(i, w, base, seed) for i, w in enumerate(_simplex_grid(resolution))]
    start = len(jobs)
    jobs += [(start + i, None, base, seed) for i in range(base.random_points)]
    if workers <= 1:
        return [_basin_worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_basin_worker, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


# ---------------------------------------------------------------------------
# MEMS and tripartite experiments


def mems_experiment(
    spectrum,
    initial_mode: str = "random",
    seed: int = 0,
    gains: Optional[ControlGains] = None,
    propagation: Optional[PropagationConfig] = None,
    conv_tol: float = DEFAULT_CONV_TOL,
    conv_window: int = DEFAULT_CONV_WINDOW,
) -> RunResult:
    """Drive a fixed-spectrum mixed state toward its concurrence ceiling.

    ``initial_mode``: ``kernel`` starts at the analytic maximizer (the control
    stays quiet there), ``separable`` at a zero-concurrence product-basis
    mixture nudged by a seeded local rotation (the exactly diagonal mixture
    sits on a symmetry manifold of the feedback), ``random`` at a
    Haar-conjugated state of the same spectrum.  The default horizon is
    doubled relative to the pure-state runs; fixed-spectrum searches settle
    more slowly.
    """
    lam = _sorted_spectrum(spectrum)
    if initial_mode == "kernel":
        rho0 = kernel_mems(lam)
    elif initial_mode == "separable":
        rho0 = separable_like(lam, seed)
    elif initial_mode == "random":
        rho0 = random_density_with_spectrum(lam, seed)
    else:
        raise ParameterError(f"mems_experiment: unknown initial mode {initial_mode!r}")
    spec = make_experiment(
        MIXED_BIPARTITE, rho0, gains=gains,
        propagation=propagation or PropagationConfig(t_max=40.0),
        conv_tol=conv_tol, conv_window=conv_window,
    )
    return run_trajectory(spec)


def tripartite_experiment(
    measure: str = "gc",
    initial: str = "perturbed",
    seed: int = 0,
    epsilon: float = 1e-3,
    gains: Optional[ControlGains] = None,
    propagation: Optional[PropagationConfig] = None,
    preset: str = "tripartite",
    conv_tol: float = DEFAULT_CONV_TOL,
    conv_window: int = DEFAULT_CONV_WINDOW,
) -> RunResult:
    """Three-qubit runs under the generalized-concurrence or GME feedback."""
    if measure == "gc":
        scenario = TRIPARTITE_GC
    elif measure == "gme":
        scenario = TRIPARTITE_GME
    else:
        raise ParameterError(f"tripartite_experiment: measure must be gc|gme, got {measure!r}")
    if initial == "perturbed":
        psi = perturbed_product_ket(3, epsilon, seed)
    elif initial == "random":
        psi = haar_random_ket(8, seed)
    elif initial == "ghz":
        psi = ghz_ket(3)
    else:
        raise ParameterError(f"tripartite_experiment: unknown initial {initial!r}")
    spec = make_experiment(
        scenario, DensityMatrix.from_ket(psi), gains=gains, propagation=propagation,
        conv_tol=conv_tol, conv_window=conv_window, preset=preset,
    )
    return run_trajectory(spec)
