"""Batch scenario runner.

Usage::

    dqlab <command> --config scenario.json [--seed N] [--out path] [--format csv|json] [--workers N]

The config file is a JSON object with an optional ``params`` map and optional
``seed``, ``format``, ``output_path`` and ``command`` fields. Physical inputs
are dimensionless: the Rabi frequency sets the time unit.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from dqlab import decoherence as deco
from dqlab import fidelity as fid
from dqlab import singleatom as sa
from dqlab import twoatom as ta
from dqlab.angular import P_HALF, S_HALF, DipoleScenario, dipole_coupling_matrix
from dqlab.errors import NumericalError, ValidationError
from dqlab.matcore import phase_distance
from dqlab.report import FORMATS, emit_report

log = logging.getLogger("dqlab")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_SEED = fid.DEFAULT_SEED
TOP_LEVEL_KEYS = {"command", "params", "seed", "format", "output_path"}


# parameter schemas: name -> (kind, default)
SCHEMAS: dict[str, dict[str, tuple[str, Any]]] = {
    "rabi": {
        "omega_ratio": ("float", 96.0),
        "t_max": ("float", 4 * math.pi),
        "n_points": ("int", 201),
        "alpha0": ("complex", 1.0),
        "alpha1": ("complex", 0.0),
        "delta": ("float", 0.0),
        "coupling": ("str", "uniform"),
    },
    "hadamard": {
        "omega_ratio": ("float", 96.0),
        "r": ("float", 0.0),
        "theta": ("float", 0.0),
        "g_s": ("float", 2.0),
    },
    "expand": {
        "omega_ratio": ("float", 96.0),
        "theta": ("float", 0.0),
        "r_values": ("floats", [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 3e-2]),
    },
    "fidelity-sweep": {
        "omega_ratio": ("float", 96.0),
        "r_values": ("floats", [0.0, 1e-3, 3e-3, 1e-2]),
        "thetas": ("floats", [0.0]),
        "mc_samples": ("int", 0),
        "workers": ("int", 1),
    },
    "cz": {
        "omega_prime": ("float", 1.0),
        "h_phase": ("float", 0.0),
        "hbar": ("float", 1.0),
        "t_values": ("floats", []),
    },
    "dephase": {
        "mu": ("float", 1.0),
        "B0": ("float", 1.0),
        "t_max": ("float", 0.5),
        "n_points": ("int", 11),
        "n_traj": ("int", 100_000),
        "n_steps": ("int", 100),
        "state": ("str", "bell_plus"),
        "a1": ("complex", 1 / math.sqrt(2)),
        "a2": ("complex", 1 / math.sqrt(2)),
        "b1": ("complex", 1 / math.sqrt(2)),
        "b2": ("complex", 1 / math.sqrt(2)),
        "workers": ("int", 1),
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    command: str
    params: dict[str, Any]
    output_path: Path
    seed: int = DEFAULT_SEED
    format: str = "csv"


def _finite(x: float, key: str) -> float:
    if not math.isfinite(x):
        raise ValidationError(f"parameter {key!r} must be finite")
    return x


def _coerce(kind: str, key: str, value: Any) -> Any:
    try:
        if kind == "float":
            if isinstance(value, bool):
                raise TypeError
            return _finite(float(value), key)
        if kind == "int":
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind == "floats":
            return [_coerce("float", key, v) for v in value]
        if kind == "complex":
            if isinstance(value, dict):
                if set(value) != {"re", "im"}:
                    raise TypeError
                z = complex(float(value["re"]), float(value["im"]))
            elif isinstance(value, (list, tuple)):
                re, im = value
                z = complex(float(re), float(im))
            else:
                if isinstance(value, bool):
                    raise TypeError
                z = complex(float(value))
            _finite(z.real, key)
            _finite(z.imag, key)
            return z
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"parameter {key!r} has invalid value {value!r} (expected {kind})") from exc
    raise AssertionError(kind)


def parse_params(command: str, raw: dict[str, Any]) -> dict[str, Any]:
    if command not in SCHEMAS:
        raise ValidationError(f"unknown command {command!r}")
    if not isinstance(raw, dict):
        raise ValidationError("'params' must be a JSON object")
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ValidationError(f"unknown parameter(s) for {command!r}: {', '.join(unknown)}")
    return {key: _coerce(kind, key, raw[key]) if key in raw else default for key, (kind, default) in schema.items()}


def load_config(
    command: str,
    path: str | Path | None,
    seed: int | None = None,
    out: str | None = None,
    fmt: str | None = None,
    workers: int | None = None,
) -> ScenarioConfig:
    """Parse and validate a scenario file; command-line values override file values."""
    doc: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON in {path}: {exc.msg} at line {exc.lineno}, column {exc.colno}") from exc
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object")
    unknown = sorted(set(doc) - TOP_LEVEL_KEYS)
    if unknown:
        raise ValidationError(f"unknown config key(s): {', '.join(unknown)}")
    if "command" in doc and doc["command"] != command:
        raise ValidationError(f"config is for {doc['command']!r}, not {command!r}")
    params = parse_params(command, doc.get("params", {}))
    if workers is not None:
        if "workers" not in params:
            raise ValidationError(f"{command!r} does not use --workers")
        params["workers"] = workers
    if params.get("workers", 1) < 1:
        raise ValidationError("workers must be at least 1")
    fmt = fmt or doc.get("format", "csv")
    if fmt not in FORMATS:
        raise ValidationError(f"unsupported format {fmt!r}")
    seed_value = seed if seed is not None else doc.get("seed", DEFAULT_SEED)
    if isinstance(seed_value, bool) or not isinstance(seed_value, int) or seed_value < 0:
        raise ValidationError("seed must be a non-negative integer")
    output = out or doc.get("output_path") or f"{command}.{fmt}"
    return ScenarioConfig(command=command, params=params, output_path=Path(output), seed=seed_value, format=fmt)


def _phys(params: dict[str, Any], **over: Any) -> sa.PhysParams:
    return sa.PhysParams(Omega=1.0, omega=params["omega_ratio"], **over)


def run_rabi(params: dict[str, Any], seed: int) -> dict[str, Any]:
    p = _phys(params)
    if params["n_points"] < 2:
        raise ValidationError("n_points must be at least 2")
    init_vec = np.array([params["alpha0"], params["alpha1"], 0, 0], dtype=complex)
    if abs(np.linalg.norm(init_vec) - 1) > 1e-10:
        raise ValidationError("|alpha0|^2 + |alpha1|^2 must equal 1")
    init = sa.RabiAmplitudes.from_vector(init_vec)
    if params["coupling"] == "uniform":
        coupling = p.hbar * p.Omega * np.eye(2)
    elif params["coupling"] == "dipole":
        # field scaled so the Rabi frequency of every pair equals Omega
        s = DipoleScenario(S_HALF, P_HALF, line_strength_S=math.sqrt(6) * p.hbar * p.Omega, E_magnitude=1.0)
        coupling = dipole_coupling_matrix(s)
    else:
        raise ValidationError("coupling must be 'uniform' or 'dipole'")
    rows = []
    state = init.as_vector()
    t_grid = np.linspace(0.0, params["t_max"], params["n_points"])
    prev = 0.0
    for t in t_grid:
        amps = sa.rabi_amplitudes(float(t), init, p)
        if t > prev:
            state = sa.integrate_odes(float(t - prev), state, p, params["delta"], coupling, t0=prev)
        prev = float(t)
        v = amps.as_vector()
        row: dict[str, Any] = {"t": float(t)}
        for name, z in zip(("alpha0", "alpha1", "beta0", "beta1"), v):
            row[f"{name}_re"], row[f"{name}_im"] = z.real, z.imag
        for name, z in zip(("alpha0", "alpha1", "beta0", "beta1"), v):
            row[f"pop_{name}"] = abs(z) ** 2
        row["pop_beta0_ode"] = abs(state[2]) ** 2
        row["pop_beta1_ode"] = abs(state[3]) ** 2
        rows.append(row)
    return {"table": rows, "meta": {"omega_ratio": params["omega_ratio"], "delta": params["delta"]}}


def _matrix_rows(u: np.ndarray) -> list[dict[str, Any]]:
    return [
        {"row": i, "col": j, "re": float(u[i, j].real), "im": float(u[i, j].imag)}
        for i in range(u.shape[0])
        for j in range(u.shape[1])
    ]


def run_hadamard(params: dict[str, Any], seed: int) -> dict[str, Any]:
    p = _phys(params, r=params["r"], theta=params["theta"], g_s=params["g_s"])
    u = sa.hadamard_gate(p)
    naive = sa.naive_hadamard_gate(p)
    meta = {
        "phase_distance_to_ideal": phase_distance(u, sa.DEGENERATE_HADAMARD),
        "max_abs_deviation": float(np.max(np.abs(u - sa.DEGENERATE_HADAMARD))),
        "average_fidelity": fid.avg_fidelity_closed(sa.DEGENERATE_HADAMARD, u),
        "durations": list(sa.hadamard_durations(p)),
        "naive_phase_distance_to_ideal": phase_distance(naive, sa.DEGENERATE_HADAMARD),
        "naive_deviation_phase": sa.naive_deviation_phase(p),
        "naive_max_abs_deviation_from_minus_i_H": float(np.max(np.abs(naive + 1j * sa.DEGENERATE_HADAMARD))),
    }
    return {"table": _matrix_rows(u), "meta": meta}


def _loglog_slope(x: list[float], y: list[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def run_expand(params: dict[str, Any], seed: int) -> dict[str, Any]:
    p = _phys(params, theta=params["theta"])
    coeffs = sa.taylor_expand_gate(p, order=2)
    rows = []
    for r in params["r_values"]:
        res = sa.expansion_residual(p, r, coeffs)
        rows.append({"r": r, "residual_order0": res[0], "residual_order1": res[1], "residual_order2": res[2]})
    report = sa.compare_to_closed_form(p)
    meta: dict[str, Any] = {
        "coefficients": [c for c in coeffs],
        "closed_form": sa.closed_form_expansion(p),
        "comparison": {
            f"order{k}": {
                "max_rel_error": max(e.rel_error for e in report if e.order == k),
                "max_abs_error": max(e.abs_error for e in report if e.order == k),
                "mismatches": [[e.row, e.col] for e in report if e.order == k and not e.agrees],
            }
            for k in range(3)
        },
    }
    positive = [row for row in rows if row["r"] > 0 and row["residual_order2"] > 0]
    if len(positive) >= 2:
        meta["residual_order2_slope"] = _loglog_slope([r["r"] for r in positive], [r["residual_order2"] for r in positive])
    return {"table": rows, "meta": meta}


def run_fidelity_sweep(params: dict[str, Any], seed: int) -> dict[str, Any]:
    c2 = fid.fidelity_series_coefficient(params["omega_ratio"], 1.0)
    rows = []
    fits = []
    for theta in params["thetas"]:
        for r in params["r_values"]:
            p = _phys(params, r=r, theta=theta)
            u = sa.hadamard_gate(p)
            row: dict[str, Any] = {
                "r": r,
                "theta": theta,
                "fidelity": fid.avg_fidelity_closed(sa.DEGENERATE_HADAMARD, u),
                "series_prediction": 1.0 - c2 * r * r,
            }
            if params["mc_samples"]:
                est, err = fid.avg_fidelity_mc(sa.DEGENERATE_HADAMARD, u, params["mc_samples"], seed, params["workers"])
                row["mc_estimate"], row["mc_stderr"] = est, err
            rows.append(row)
        usable = [r for r in params["r_values"] if 0 < r <= fid.MAX_FIT_R]
        if len(set(usable)) >= 3:
            c_hat, resid = fid.fit_quadratic_loss(_phys(params), usable, theta)
            fits.append({"theta": theta, "c2_fit": c_hat, "max_rel_residual": resid, "rel_diff": c_hat / c2 - 1})
    meta: dict[str, Any] = {"c2_series": c2, "fits": fits}
    if len(fits) > 1:
        vals = [f["c2_fit"] for f in fits]
        meta["c2_fit_theta_spread"] = (max(vals) - min(vals)) / c2
    return {"table": rows, "meta": meta}


def run_cz(params: dict[str, Any], seed: int) -> dict[str, Any]:
    hbar = params["hbar"]
    if params["omega_prime"] <= 0:
        raise ValidationError("omega_prime must be positive")
    h = params["omega_prime"] * hbar * complex(math.cos(params["h_phase"]), math.sin(params["h_phase"]))
    model = ta.TwoAtomModel(h=h, hbar=hbar)
    timing = ta.solve_cz_time(model)
    rows = []
    diag_star = None
    for t in [timing.t_equal, *params["t_values"]]:
        u5, d = ta.cz_sequence(ta.u_ab_closed(t, model))
        if diag_star is None:
            diag_star = d
        rows.append(
            {
                "t": t,
                "theta": d.theta,
                "phase_re": d.phase.real,
                "phase_im": d.phase.imag,
                "offdiag_max": d.offdiag_max,
                "pattern_error": float(np.max(np.abs(u5 - ta.expected_u5(d.theta)))),
            }
        )
    meta = {
        "t_star": timing.t_equal,
        "t_literal": timing.t_literal,
        "timing_discrepancy": timing.discrepancy,
        "phase": diag_star.phase,
        "theta": diag_star.theta,
        "offdiag_max": diag_star.offdiag_max,
        "c": diag_star.c,
        "d": diag_star.d,
    }
    return {"table": rows, "meta": meta}


def run_dephase(params: dict[str, Any], seed: int) -> dict[str, Any]:
    if params["n_points"] < 2 or params["t_max"] <= 0:
        raise ValidationError("need n_points >= 2 and t_max > 0")
    grid = tuple(np.linspace(0.0, params["t_max"], params["n_points"]))
    p = deco.DephasingParams(params["mu"], params["B0"], grid, params["n_traj"], params["n_steps"], seed)
    kind = params["state"]
    if kind in ("bell_plus", "bell_minus"):
        state: Any = kind
        psi = deco.bell_vector(1 if kind == "bell_plus" else -1)
        weights = deco.product_weights(deco.QUBIT_WEIGHTS)
    elif kind in ("psi0", "psi1"):
        state = deco.DegenerateBellState(
            deco.BellKind.PLUS_00_11 if kind == "psi0" else deco.BellKind.PLUS_01_10,
            params["a1"], params["a2"], params["b1"], params["b2"],
        )
        psi = state.vector()
        weights = deco.product_weights(deco.sublevel_weights())
    else:
        raise ValidationError("state must be bell_plus, bell_minus, psi0 or psi1")
    result = deco.mc_dephase(state, p, workers=params["workers"])
    # one representative coherence per distinct weight difference
    pairs: dict[float, tuple[int, int]] = {}
    for i in range(psi.size):
        for j in range(i + 1, psi.size):
            if abs(psi[i] * psi[j]) > 1e-12:
                pairs.setdefault(round(float(weights[i] - weights[j]), 9), (i, j))
    rows = []
    for dw, (i, j) in sorted(pairs.items()):
        mc, err = result.coherence(i, j)
        for k, t in enumerate(grid):
            rows.append(
                {
                    "t": t,
                    "i": i,
                    "j": j,
                    "weight_diff": dw,
                    "analytic": math.exp(-0.5 * dw * dw * p.rate * t),
                    "mc_re": mc[k].real,
                    "mc_im": mc[k].imag,
                    "mc_stderr": err[k],
                }
            )
    final = result.rho[-1]
    meta: dict[str, Any] = {
        "rate_mu2_B02": p.rate,
        "n_traj": p.n_traj,
        "seed": seed,
        "level_stats_final_mc": deco.level_measurement_stats(final / np.trace(final)),
        "level_stats_initial": deco.level_measurement_stats(np.outer(psi, psi.conj())),
    }
    if isinstance(state, deco.DegenerateBellState):
        meta["level_stats_long_time_mixture"] = deco.level_measurement_stats(deco.degenerate_dephased_state(state))
    return {"table": rows, "meta": meta}


RUNNERS: dict[str, Callable[[dict[str, Any], int], dict[str, Any]]] = {
    "rabi": run_rabi,
    "hadamard": run_hadamard,
    "expand": run_expand,
    "fidelity-sweep": run_fidelity_sweep,
    "cz": run_cz,
    "dephase": run_dephase,
}


def run_scenario(cfg: ScenarioConfig) -> list[Path]:
    """Run one scenario and write its report; returns the files written."""
    results = RUNNERS[cfg.command](cfg.params, cfg.seed)
    # worker count never changes results, so it is left out of the report
    echoed = {k: v for k, v in cfg.params.items() if k != "workers"}
    results = {"command": cfg.command, "params": echoed, "seed": cfg.seed, **results}
    return emit_report(results, cfg.format, cfg.output_path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dqlab", description="Degenerate-level qubit scenarios.")
    parser.add_argument("command", choices=sorted(RUNNERS))
    parser.add_argument("--config", help="JSON scenario file")
    parser.add_argument("--seed", type=int, help="root seed for Monte Carlo sampling")
    parser.add_argument("--out", help="output file path")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--workers", type=int, help="worker threads for Monte Carlo sampling")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.command, args.config, args.seed, args.out, args.format, args.workers)
        written = run_scenario(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
