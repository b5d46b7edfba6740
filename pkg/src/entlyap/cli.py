"""Command-line interface: configuration parsing and artifact persistence.

Subcommands: ``run`` (pure bipartite trajectory), ``basin`` (Bell-tetrahedron
scan), ``mems`` (fixed-spectrum mixed-state search), ``multi`` (tripartite
runs), ``validate`` (measure-condition report).  Every command writes its
data (CSV or JSON) plus a ``summary.json`` that embeds all effective
parameters, so a run can be reproduced from its artifacts alone.  Outputs
are written atomically and are byte-identical across re-runs with the same
configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

from .control import ControlGains
from .dynamics import PropagationConfig
from .errors import ConfigError, NumericalIntegrityError, ParameterError
from .harness import (
    BasinConfig,
    MIXED_BIPARTITE,
    PURE_BIPARTITE,
    RunResult,
    TRIPARTITE_GC,
    TRIPARTITE_GME,
    basin_scan,
    bell_mixture_ket,
    gf_measure_by_name,
    make_experiment,
    mems_experiment,
    run_trajectory,
    table1_initial,
    tripartite_experiment,
)
from .linalg import DensityMatrix, bell_ket, computational_ket
from .measures import (
    MeasureKind,
    mixed_concurrence_bound,
    validate_gf_measure,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_SCENARIO_MEASURES = {
    PURE_BIPARTITE: ("concurrence", "entropy", "renyi"),
    MIXED_BIPARTITE: ("mixedConcurrence",),
    TRIPARTITE_GC: ("generalizedConcurrence",),
    TRIPARTITE_GME: ("gmeConcurrence",),
}

_DEFAULT_MEASURE = {
    PURE_BIPARTITE: "concurrence",
    MIXED_BIPARTITE: "mixedConcurrence",
    TRIPARTITE_GC: "generalizedConcurrence",
    TRIPARTITE_GME: "gmeConcurrence",
}


@dataclass
class RunConfig:
    """Serializable mirror of an experiment description plus output knobs."""

    scenario: str = PURE_BIPARTITE
    measure: str = ""
    alpha: float = 1.5
    initial: str = ""
    spectrum: Optional[List[float]] = None
    dt: float = 0.001
    t_max: float = 20.0
    record_every: int = 10
    gain: float = 5.0
    epsilon: float = 1e-3
    conv_tol: float = 1e-6
    conv_window: int = 100
    resolution: int = 20
    random_points: int = 0
    seed: int = 0
    threads: int = 1
    out: str = "."
    format: str = "csv"

    def effective(self) -> Dict:
        """Every result-affecting parameter; excludes output location and

        worker count, which cannot change any computed value."""
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        d["coupling_j"] = 0.5
        return d


_KEY_PARSERS = {
    "scenario": str,
    "measure": str,
    "alpha": float,
    "initial": str,
    "spectrum": lambda s: [float(v) for v in s.split(",")],
    "dt": float,
    "t_max": float,
    "record_every": int,
    "gain": float,
    "epsilon": float,
    "conv_tol": float,
    "conv_window": int,
    "resolution": int,
    "random_points": int,
    "seed": int,
    "threads": int,
    "out": str,
    "format": str,
}


def parse_config(path: Optional[str] = None, overrides: Optional[Dict] = None) -> RunConfig:
    """Read a flat key = value config file, apply flag overrides, validate.

    Unknown keys are rejected rather than ignored, so typos fail loudly.
    """
    cfg = RunConfig()
    entries: Dict[str, str] = {}
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.rstrip()!r}")
                key, val = (part.strip() for part in line.split("=", 1))
                entries[key] = val
    for key, val in entries.items():
        if key not in _KEY_PARSERS:
            raise ConfigError(f"unknown config field {key!r}")
        try:
            setattr(cfg, key, _KEY_PARSERS[key](val))
        except ValueError as exc:
            raise ConfigError(f"config field {key!r}: {exc}") from exc
    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.scenario not in _SCENARIO_MEASURES:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    if not cfg.measure:
        cfg.measure = _DEFAULT_MEASURE[cfg.scenario]
    allowed = _SCENARIO_MEASURES[cfg.scenario]
    if cfg.measure not in allowed:
        raise ConfigError(
            f"measure {cfg.measure!r} is inconsistent with scenario {cfg.scenario!r}; "
            f"allowed: {', '.join(allowed)}"
        )
    if cfg.measure == "renyi":
        if cfg.alpha == 1.0:
            raise ConfigError("renyi with alpha = 1 is the entropy of entanglement; "
                              "use measure = entropy")
        if cfg.alpha <= 0.0:
            raise ConfigError(f"renyi alpha must be positive, got {cfg.alpha}")
    if cfg.spectrum is not None:
        total = float(sum(cfg.spectrum))
        if len(cfg.spectrum) != 4:
            raise ConfigError(f"spectrum needs 4 entries, got {len(cfg.spectrum)}")
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"spectrum entries sum to {total!r}, expected 1")
        if any(v < 0 for v in cfg.spectrum):
            raise ConfigError("spectrum entries must be nonnegative")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.dt <= 0 or cfg.dt > cfg.t_max:
        raise ConfigError(f"dt = {cfg.dt} must be positive and at most t_max = {cfg.t_max}")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")


# ---------------------------------------------------------------------------
# Atomic writers


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _population_labels(nqubits: int) -> List[str]:
    return [f"pop_{i:0{nqubits}b}" for i in range(2 ** nqubits)]


def write_trajectory_csv(result: RunResult, path: str) -> None:
    """One row per recorded sample: t, V, E, control fields, populations."""
    traj = result.trajectory
    n = result.final_state.nqubits
    m = traj.controls.shape[1]
    header = ["t", "V", "E"] + [f"u_{k + 1}" for k in range(m)] + _population_labels(n)
    lines = [",".join(header)]
    for i in range(len(traj)):
        pops = traj.states[i].diagonal().real
        row = [traj.times[i], traj.scalars["V"][i], traj.scalars["E"][i]]
        row += list(traj.controls[i])
        row += list(pops)
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_trajectory_json(result: RunResult, path: str) -> None:
    traj = result.trajectory
    n = result.final_state.nqubits
    m = traj.controls.shape[1]
    payload = {
        "t": [float(v) for v in traj.times],
        "V": [float(v) for v in traj.scalars["V"]],
        "E": [float(v) for v in traj.scalars["E"]],
    }
    for k in range(m):
        payload[f"u_{k + 1}"] = [float(v) for v in traj.controls[:, k]]
    for idx, label in enumerate(_population_labels(n)):
        payload[label] = [float(traj.states[i].diagonal().real[idx]) for i in range(len(traj))]
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_basin_csv(points, path: str) -> None:
    """Tetrahedron samples with their terminal-class labels."""
    if not points:
        raise ParameterError("write_basin_csv: no points")
    lines = ["b_alpha,b_beta,b_gamma,b_delta,class"]
    for p in points:
        coeffs = ",".join(_fmt(v) for v in p.coefficients)
        lines.append(f"{coeffs},{p.terminal.value}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_basin_csv(path: str):
    """Round-trip helper for the basin artifact."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "b_alpha,b_beta,b_gamma,b_delta,class":
            raise ConfigError(f"unexpected basin header {header!r}")
        for line in fh:
            parts = line.strip().split(",")
            rows.append((tuple(float(v) for v in parts[:4]), parts[4]))
    return rows


def _write_summary(path: str, command: str, cfg: RunConfig, outcome: Dict) -> None:
    payload = {
        "command": command,
        "config": cfg.effective(),
        "result": outcome,
    }
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _run_outcome(result: RunResult) -> Dict:
    out = {
        "terminal_class": result.terminal_class.value,
        "converged": bool(result.converged),
        "final_E": float(result.final_e),
        "nmax": float(result.nmax),
        "final_populations": [float(v) for v in result.final_state.populations()],
        "samples": len(result.trajectory),
        "t_final": float(result.trajectory.times[-1]),
    }
    if result.e_star is not None:
        out["e_star"] = float(result.e_star)
    if result.steady_concurrence is not None:
        out["steady_concurrence"] = float(result.steady_concurrence)
    if result.tilde_report is not None:
        out["tilde_weights"] = [float(v) for v in result.tilde_report.weights]
        out["tilde_preconcurrences"] = [float(v) for v in result.tilde_report.preconcurrences]
    return out


# ---------------------------------------------------------------------------
# Commands


def _measure_kind(cfg: RunConfig) -> MeasureKind:
    gf = gf_measure_by_name(cfg.measure, cfg.alpha)
    return MeasureKind(name="gf", gf=gf)


def _initial_state(cfg: RunConfig) -> DensityMatrix:
    spec = cfg.initial or "table1:1"
    kind, _, arg = spec.partition(":")
    if kind == "table1":
        row = int(arg)
        return DensityMatrix.from_ket(table1_initial(row, cfg.epsilon))
    if kind == "bell":
        return DensityMatrix.from_ket(bell_ket(arg))
    if kind == "basis":
        return DensityMatrix.from_ket(computational_ket(arg))
    if kind == "bellmix":
        weights = [float(v) for v in arg.split(",")]
        return DensityMatrix.from_ket(bell_mixture_ket(weights))
    raise ConfigError(f"unknown initial state spec {spec!r}")


def _data_path(cfg: RunConfig, stem: str) -> str:
    ext = "csv" if cfg.format == "csv" else "json"
    return os.path.join(cfg.out, f"{stem}.{ext}")


def _write_trajectory(result: RunResult, cfg: RunConfig, stem: str) -> str:
    path = _data_path(cfg, stem)
    if cfg.format == "csv":
        write_trajectory_csv(result, path)
    else:
        write_trajectory_json(result, path)
    return path


def cmd_run(cfg: RunConfig) -> int:
    spec = make_experiment(
        PURE_BIPARTITE,
        _initial_state(cfg),
        measure=_measure_kind(cfg),
        gains=ControlGains(r=cfg.gain, epsilon=cfg.epsilon),
        propagation=PropagationConfig(dt=cfg.dt, t_max=cfg.t_max, record_every=cfg.record_every),
        conv_tol=cfg.conv_tol,
        conv_window=cfg.conv_window,
    )
    result = run_trajectory(spec)
    data = _write_trajectory(result, cfg, "trajectory")
    outcome = _run_outcome(result)
    outcome["data_file"] = os.path.basename(data)
    _write_summary(os.path.join(cfg.out, "summary.json"), "run", cfg, outcome)
    return EXIT_OK


def cmd_mems(cfg: RunConfig) -> int:
    if cfg.spectrum is None:
        raise ConfigError("mems requires a spectrum")
    mode = cfg.initial or "random"
    if mode not in ("kernel", "separable", "random"):
        raise ConfigError(f"mems initial mode must be kernel|separable|random, got {mode!r}")
    result = mems_experiment(
        cfg.spectrum,
        mode,
        seed=cfg.seed,
        gains=ControlGains(r=cfg.gain, epsilon=cfg.epsilon),
        propagation=PropagationConfig(dt=cfg.dt, t_max=cfg.t_max, record_every=cfg.record_every),
        conv_tol=cfg.conv_tol,
        conv_window=cfg.conv_window,
    )
    data = _write_trajectory(result, cfg, "trajectory")
    outcome = _run_outcome(result)
    outcome["data_file"] = os.path.basename(data)
    outcome["e_star"] = float(mixed_concurrence_bound(cfg.spectrum))
    _write_summary(os.path.join(cfg.out, "summary.json"), "mems", cfg, outcome)
    return EXIT_OK


def cmd_multi(cfg: RunConfig) -> int:
    if cfg.scenario not in (TRIPARTITE_GC, TRIPARTITE_GME):
        raise ConfigError("multi requires scenario tripartiteGC or tripartiteGME")
    measure = "gc" if cfg.scenario == TRIPARTITE_GC else "gme"
    initial = cfg.initial or "perturbed"
    if initial not in ("perturbed", "random", "ghz"):
        raise ConfigError(f"multi initial must be perturbed|random|ghz, got {initial!r}")
    result = tripartite_experiment(
        measure,
        initial,
        seed=cfg.seed,
        epsilon=cfg.epsilon,
        gains=ControlGains(r=cfg.gain, epsilon=cfg.epsilon),
        propagation=PropagationConfig(dt=cfg.dt, t_max=cfg.t_max, record_every=cfg.record_every),
        conv_tol=cfg.conv_tol,
        conv_window=cfg.conv_window,
    )
    data = _write_trajectory(result, cfg, "trajectory")
    outcome = _run_outcome(result)
    outcome["data_file"] = os.path.basename(data)
    _write_summary(os.path.join(cfg.out, "summary.json"), "multi", cfg, outcome)
    return EXIT_OK


def cmd_basin(cfg: RunConfig) -> int:
    if cfg.measure not in ("concurrence", "entropy", "renyi"):
        raise ConfigError("basin runs the pure-bipartite scenario; measure must be a GF measure")
    base = BasinConfig(
        measure=cfg.measure,
        alpha=cfg.alpha if cfg.measure == "renyi" else None,
        gain=cfg.gain,
        epsilon=cfg.epsilon,
        dt=cfg.dt,
        t_max=cfg.t_max,
        record_every=cfg.record_every,
        conv_tol=cfg.conv_tol,
        conv_window=cfg.conv_window,
        random_points=cfg.random_points,
    )
    points = basin_scan(cfg.resolution, base, seed=cfg.seed, workers=cfg.threads)
    path = os.path.join(cfg.out, "basin.csv")
    write_basin_csv(points, path)
    counts: Dict[str, int] = {}
    for p in points:
        counts[p.terminal.value] = counts.get(p.terminal.value, 0) + 1
    outcome = {"points": len(points), "class_counts": counts, "data_file": "basin.csv"}
    _write_summary(os.path.join(cfg.out, "summary.json"), "basin", cfg, outcome)
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    if cfg.measure not in ("concurrence", "entropy", "renyi"):
        raise ConfigError("validate checks a GF measure: concurrence, entropy or renyi")
    gf = gf_measure_by_name(cfg.measure, cfg.alpha)
    report = validate_gf_measure(gf)
    payload = {"config": cfg.effective(), "report": report.as_dict()}
    _atomic_write(os.path.join(cfg.out, "validation.json"),
                  json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


_COMMANDS = {
    "run": cmd_run,
    "basin": cmd_basin,
    "mems": cmd_mems,
    "multi": cmd_multi,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entlyap",
        description="Maximally entangled state synthesis by entanglement-measure "
                    "Lyapunov feedback control",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a key = value configuration file")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--seed", type=int, help="root seed for all randomness")
        p.add_argument("--threads", type=int,
                       help="worker processes (fallback: ENTLYAP_THREADS, then 1)")
        p.add_argument("--format", choices=("csv", "json"), help="data file format")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = args.threads
        if threads is None and os.environ.get("ENTLYAP_THREADS"):
            try:
                threads = int(os.environ["ENTLYAP_THREADS"])
            except ValueError as exc:
                raise ConfigError(f"ENTLYAP_THREADS: {exc}") from exc
        overrides = {
            "out": args.out,
            "seed": args.seed,
            "threads": threads,
            "format": args.format,
        }
        cfg = parse_config(args.config, overrides)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"entlyap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalIntegrityError as exc:
        print(f"entlyap: numerical integrity violation: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ParameterError,) as exc:
        print(f"entlyap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"entlyap: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
