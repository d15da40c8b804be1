"""Command-line front end: solve, verify-decomp, metrics and sweep.

Configuration is a single JSON file validated against the schema below;
unknown keys are rejected.  Named presets reproduce the built-in example
studies.  All randomness flows from one seed, so a repeated exact-mode run
writes byte-identical results.

Config schema (all sections optional, defaults shown by `--preset` dumps):

  problem:        x1, x2, forcing (polynomial coefficients, low->high),
                  bc {left, right: {kind, value, penalty}}
  discretization: n, order ('linear'|'quadratic'), lengths ('uniform' or a
                  list), coeffs (scalar or per-element list)
  vqls:           ansatz, layers, tolerance, max_iter, restarts, seed,
                  init ('random'|'warm'), warm_fits (overlap fits for the
                  warm start), shots (null for exact), group_unique
                  (concatenate unique-element terms)
  metrics:        families, layers, pairs, samples, bins
  sweep:          mode ('success'|'condition'|'landscape') plus per-mode keys

Exit codes: 0 converged / check passed, 1 usage error, 2 not converged,
3 validation failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import vqls
from .ansatz import FAMILIES, AnsatzSpec
from .decomp import auto_unique_groups, concat_unique, decompose
from .fem import (
    BoundaryCondition,
    BoundarySpec,
    Forcing,
    Mesh1D,
    assemble_direct,
    classical_solve,
    condition_number,
    element_count,
    uniform_mesh,
)
from .metrics import ent_capability, expressibility, fidelity_samples
from .qsim import circuit_unitary

DEFAULT_CONFIG = {
    "problem": {
        "x1": 0.0,
        "x2": 1.0,
        "forcing": [0.0, 1.0],
        "bc": {
            "left": {"kind": "dirichlet0", "value": 0.0, "penalty": 100.0},
            "right": {"kind": "dirichlet0", "value": 0.0, "penalty": 100.0},
        },
    },
    "discretization": {"n": 4, "order": "linear", "lengths": "uniform", "coeffs": 1.0},
    "vqls": {
        "ansatz": "A3",
        "layers": 3,
        "tolerance": 1e-6,
        "max_iter": 500,
        "restarts": 25,
        "seed": 0,
        "init": "random",
        "warm_fits": 8,
        "shots": None,
        "group_unique": True,
    },
    "metrics": {"families": list(FAMILIES), "layers": [2, 3, 4], "pairs": 4000,
                "samples": 10000, "bins": 75},
    "sweep": {"mode": "success", "families": ["A1", "A3"], "layers": [2, 3],
              "runs": 20, "seed": 0},
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and key != "sweep":
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where!r} must be a mapping")
            out[key] = _merge(base[key], val, where)
        else:
            out[key] = copy.deepcopy(val)
    return out


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# presets


def _preset_51(n: int) -> dict:
    return {"discretization": {"n": n},
            "vqls": {"ansatz": "A3", "layers": 3}}


def _preset_penalty(n: int) -> dict:
    return {
        "problem": {
            "forcing": [0.0, 0.0, 1.0],
            "bc": {"left": {"kind": "dirichlet", "value": 1.0, "penalty": 100.0}},
        },
        "discretization": {"n": n},
        "vqls": {"ansatz": "A1", "layers": 2 if n == 3 else 4},
    }


def _preset_neumann(n: int) -> dict:
    return {
        "problem": {"bc": {"right": {"kind": "neumann", "value": 0.0}}},
        "discretization": {"n": n},
        "vqls": {"ansatz": "A4", "layers": 4},
    }


_QUAD_MESHES = {
    3: ([0.21, 0.2, 0.235, 0.355], [1.5, 1.5, 2.0, 2.0]),
    4: ([0.105, 0.105, 0.1, 0.1, 0.125, 0.125, 0.17, 0.17],
        [1.5, 1.5, 1.5, 1.5, 2.0, 2.0, 2.0, 2.0]),
}


def _preset_quad(n: int) -> dict:
    lengths, coeffs = _QUAD_MESHES[n]
    return {
        "discretization": {"n": n, "order": "quadratic",
                           "lengths": lengths, "coeffs": coeffs},
        "vqls": {"ansatz": "A1", "layers": 2 if n == 3 else 4},
    }


def _preset_scaling(n: int) -> dict:
    depth = {3: 2, 4: 4, 5: 6, 6: 13, 7: 22}[n]
    return {"discretization": {"n": n},
            "vqls": {"ansatz": "A1", "layers": depth, "init": "warm",
                     "warm_fits": 2, "restarts": 5}}


def _preset_condition() -> dict:
    return {"sweep": {"mode": "condition", "n_min": 2, "n_max": 7}}


def _preset_table1() -> dict:
    return {"sweep": {"mode": "success", "families": ["A1", "A3"],
                      "layers": [2, 3], "runs": 20, "seed": 0}}


PRESETS = {
    "ansatz-test-n3": lambda: _preset_51(3),
    "ansatz-test-n4": lambda: _preset_51(4),
    "penalty-n3": lambda: _preset_penalty(3),
    "penalty-n4": lambda: _preset_penalty(4),
    "neumann-n3": lambda: _preset_neumann(3),
    "neumann-n4": lambda: _preset_neumann(4),
    "quad-hetero-n3": lambda: _preset_quad(3),
    "quad-hetero-n4": lambda: _preset_quad(4),
    "scaling-n5": lambda: _preset_scaling(5),
    "scaling-n6": lambda: _preset_scaling(6),
    "scaling-n7": lambda: _preset_scaling(7),
    "condition-study": _preset_condition,
    "success-sweep": _preset_table1,
}


def load_config(args) -> dict:
    override: dict = {}
    if args.preset is not None:
        if args.preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {args.preset!r}; available: {', '.join(sorted(PRESETS))}"
            )
        override = PRESETS[args.preset]()
    if args.config is not None:
        with open(args.config) as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        override = _merge_shallow(override, user)
    cfg = _merge(DEFAULT_CONFIG, override)
    if args.seed is not None:
        cfg["vqls"]["seed"] = args.seed
        cfg["sweep"]["seed"] = args.seed
    _validate(cfg)
    return cfg


def _merge_shallow(preset: dict, user: dict) -> dict:
    out = copy.deepcopy(preset)
    for key, val in user.items():
        if key in out and isinstance(out[key], dict) and isinstance(val, dict):
            out[key] = {**out[key], **val}
        else:
            out[key] = val
    return out


def _validate(cfg: dict) -> None:
    disc = cfg["discretization"]
    if not isinstance(disc["n"], int) or not 1 <= disc["n"] <= 12:
        raise ConfigError("discretization.n must be an integer in [1, 12]")
    if disc["order"] not in ("linear", "quadratic"):
        raise ConfigError("discretization.order must be 'linear' or 'quadratic'")
    v = cfg["vqls"]
    if v["ansatz"] not in FAMILIES:
        raise ConfigError(f"vqls.ansatz must be one of {FAMILIES}")
    if not isinstance(v["layers"], int) or v["layers"] < 1:
        raise ConfigError("vqls.layers must be a positive integer")
    if not v["tolerance"] > 0:
        raise ConfigError("vqls.tolerance must be positive")
    if v["init"] not in ("random", "warm"):
        raise ConfigError("vqls.init must be 'random' or 'warm'")
    if not isinstance(v["warm_fits"], int) or v["warm_fits"] < 1:
        raise ConfigError("vqls.warm_fits must be a positive integer")
    if v["shots"] is not None and (not isinstance(v["shots"], int) or v["shots"] < 1):
        raise ConfigError("vqls.shots must be null or a positive integer")
    for side in ("left", "right"):
        kind = cfg["problem"]["bc"][side]["kind"]
        if kind not in ("dirichlet0", "dirichlet", "neumann"):
            raise ConfigError(f"problem.bc.{side}.kind is invalid")


# ---------------------------------------------------------------------------
# problem construction


def build_problem(cfg: dict):
    prob = cfg["problem"]
    disc = cfg["discretization"]
    bc = BoundarySpec(
        BoundaryCondition(**prob["bc"]["left"]),
        BoundaryCondition(**prob["bc"]["right"]),
    )
    forcing = Forcing(tuple(float(a) for a in prob["forcing"]))
    n, order = disc["n"], disc["order"]
    if disc["lengths"] == "uniform":
        coeffs = disc["coeffs"]
        if not np.isscalar(coeffs):
            raise ConfigError("uniform discretization takes a scalar coeffs")
        mesh = uniform_mesh(n, order, bc, prob["x1"], prob["x2"], float(coeffs))
    else:
        lengths = tuple(float(h) for h in disc["lengths"])
        coeffs = disc["coeffs"]
        if np.isscalar(coeffs):
            coeffs = (float(coeffs),) * len(lengths)
        else:
            coeffs = tuple(float(c) for c in coeffs)
        mesh = Mesh1D(prob["x1"], prob["x2"], order, lengths, coeffs, n)
    mesh.validate_against(bc)
    return mesh, bc, forcing


def _decomposition(mesh, bc, group_unique: bool):
    dec = decompose(mesh, bc)
    if group_unique:
        groups = auto_unique_groups(dec)
        if any(len(g) > 1 for g in groups):
            dec = concat_unique(dec, groups)
    return dec


# ---------------------------------------------------------------------------
# output writers


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _decomp_payload(dec, k_ref=None) -> dict:
    terms = []
    recon = np.zeros((1 << dec.n, 1 << dec.n), dtype=complex)
    for term in dec.terms:
        u = circuit_unitary(term.circuit)
        recon += term.coefficient * u
        unitary_err = float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))
        terms.append({
            "label": str(term.label),
            "coefficient": term.coefficient,
            "gates": len(term.circuit.gates),
            "unitarity_error": unitary_err,
        })
    payload = {"n": dec.n, "term_count": len(dec.terms), "terms": terms}
    if k_ref is not None:
        payload["max_reconstruction_error"] = float(np.max(np.abs(recon - k_ref)))
    return payload


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(cfg: dict, out: Path) -> int:
    mesh, bc, forcing = build_problem(cfg)
    system = assemble_direct(mesh, bc, forcing)
    dec = _decomposition(mesh, bc, cfg["vqls"]["group_unique"])
    u_c, residual = classical_solve(system)

    v = cfg["vqls"]
    spec = AnsatzSpec(v["ansatz"], mesh.n, v["layers"])
    problem = vqls.VqlsProblem(dec, system.f, spec)
    x0 = None
    if v["init"] == "warm":
        x0 = vqls.warm_start_theta(problem, u_c, seed=v["seed"],
                                   fits=v["warm_fits"])
    result = vqls.optimize(
        problem,
        seed=v["seed"],
        restarts=v["restarts"],
        max_iter=v["max_iter"],
        tol=v["tolerance"],
        x0=x0,
    )
    u_q = vqls.extract_solution(problem, result.theta)
    fidelity = vqls.solution_fidelity(u_q, u_c)

    record = {
        "config": cfg,
        "result": {
            "converged": result.converged,
            "cost": result.cost,
            "iterations": result.iterations,
            "restarts_used": result.restarts_used,
            "theta": [float(t) for t in result.theta],
            "fidelity": fidelity,
            "classical_residual": residual,
            "solution_norm_quantum": float(np.linalg.norm(u_q)),
            "solution_norm_classical": float(np.linalg.norm(u_c)),
            "condition_number": condition_number(system),
            "lcu_terms": len(dec.terms),
        },
    }
    _write_json(out / "results.json", record)
    _write_csv(out / "cost_trace.csv", ["restart", "iteration", "cost"],
               [(t["restart"], t["iteration"], t["cost"]) for t in result.trace])
    uq_hat = u_q / np.linalg.norm(u_q)
    uc_hat = u_c / np.linalg.norm(u_c)
    _write_csv(
        out / "solution.csv",
        ["x", "u_quantum_normalized", "u_classical_normalized"],
        [
            ("" if np.isnan(x) else x, q, c)
            for x, q, c in zip(system.row_coords, uq_hat, uc_hat)
        ],
    )
    _write_json(out / "decomp.json",
                _decomp_payload(dec, system.K if mesh.n <= 8 else None))
    print(
        f"solve: converged={result.converged} cost={result.cost:.3e} "
        f"fidelity={fidelity:.6f} restarts={result.restarts_used}"
    )
    return 0 if result.converged else 2


def cmd_verify_decomp(cfg: dict, out: Path) -> int:
    mesh, bc, forcing = build_problem(cfg)
    if mesh.n > 6:
        raise ConfigError("verify-decomp supports n <= 6")
    system = assemble_direct(mesh, bc, forcing)
    dec = _decomposition(mesh, bc, cfg["vqls"]["group_unique"])
    payload = _decomp_payload(dec, system.K)
    _write_json(out / "decomp.json", payload)
    err = payload["max_reconstruction_error"]
    ok = err <= 1e-10 and all(t["unitarity_error"] <= 1e-10 for t in payload["terms"])
    print(f"verify-decomp: terms={payload['term_count']} max_error={err:.3e} "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else 3


def cmd_metrics(cfg: dict, out: Path) -> int:
    m = cfg["metrics"]
    n = cfg["discretization"]["n"]
    seed = cfg["vqls"]["seed"]
    report = {"n": n, "pairs": m["pairs"], "samples": m["samples"],
              "bins": m["bins"], "seed": seed, "families": {}}
    hist_rows = []
    edges = np.linspace(0.0, 1.0, m["bins"] + 1)
    for fam in m["families"]:
        report["families"][fam] = {}
        for layers in m["layers"]:
            spec = AnsatzSpec(fam, n, layers)
            expr = expressibility(spec, pairs=m["pairs"], bins=m["bins"], seed=seed)
            ent = ent_capability(spec, samples=m["samples"], seed=seed)
            report["families"][fam][str(layers)] = {
                "expressibility": expr,
                "ent_capability": ent,
                "parameters": spec.parameter_count,
            }
            fids = fidelity_samples(spec, pairs=m["pairs"], seed=seed)
            counts, _ = np.histogram(fids, bins=edges)
            hist_rows += [
                (fam, layers, float(edges[b]), float(edges[b + 1]), int(counts[b]))
                for b in range(m["bins"])
            ]
    _write_json(out / "metrics.json", report)
    _write_csv(out / "fidelity_hist.csv",
               ["family", "layers", "bin_lo", "bin_hi", "count"], hist_rows)
    print(f"metrics: wrote {out / 'metrics.json'}")
    return 0


def _sweep_success_run(payload):
    cfg, fam, layers, run = payload
    cfg = copy.deepcopy(cfg)
    cfg["vqls"].update(
        ansatz=fam, layers=layers, restarts=1,
        seed=cfg["sweep"]["seed"] + run,
    )
    mesh, bc, forcing = build_problem(cfg)
    system = assemble_direct(mesh, bc, forcing)
    dec = _decomposition(mesh, bc, cfg["vqls"]["group_unique"])
    u_c, _ = classical_solve(system)
    spec = AnsatzSpec(fam, mesh.n, layers)
    problem = vqls.VqlsProblem(dec, system.f, spec)
    result = vqls.optimize(
        problem, seed=cfg["vqls"]["seed"], restarts=1,
        max_iter=cfg["vqls"]["max_iter"], tol=cfg["vqls"]["tolerance"],
    )
    fidelity = vqls.solution_fidelity(
        vqls.extract_solution(problem, result.theta), u_c
    )
    success = result.converged and fidelity >= 0.999
    return fam, layers, run, result.cost, fidelity, int(success)


def cmd_sweep(cfg: dict, out: Path, jobs: int) -> int:
    sweep = cfg["sweep"]
    mode = sweep.get("mode")
    if mode == "success":
        tasks = [
            (cfg, fam, layers, run)
            for fam in sweep["families"]
            for layers in sweep["layers"]
            for run in range(sweep["runs"])
        ]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_sweep_success_run, tasks))
        else:
            rows = [_sweep_success_run(t) for t in tasks]
        _write_csv(out / "sweep.csv",
                   ["family", "layers", "run", "cost", "fidelity", "success"], rows)
        for fam in sweep["families"]:
            for layers in sweep["layers"]:
                hits = [r[5] for r in rows if r[0] == fam and r[1] == layers]
                print(f"sweep: {fam} L={layers} success {sum(hits)}/{len(hits)}")
        return 0
    if mode == "condition":
        rows = []
        for n in range(sweep["n_min"], sweep["n_max"] + 1):
            mesh = uniform_mesh(n)
            system = assemble_direct(
                mesh, BoundarySpec(BoundaryCondition("dirichlet0"),
                                   BoundaryCondition("dirichlet0")),
                Forcing(tuple(cfg["problem"]["forcing"])),
            )
            big_n = 1 << n
            rows.append((n, big_n, condition_number(system),
                         48.0 * (big_n + 1) ** 2))
        _write_csv(out / "sweep.csv", ["n", "N", "cond", "bound_48(N+1)^2"], rows)
        # regression against the element count N + 1, the variable the
        # theoretical bound 48 (N+1)^2 is stated in
        logn = np.log([r[1] + 1 for r in rows])
        logc = np.log([r[2] for r in rows])
        slope = float(np.polyfit(logn, logc, 1)[0])
        print(f"sweep: condition slope {slope:.3f}")
        return 0
    if mode == "landscape":
        mesh, bc, forcing = build_problem(cfg)
        system = assemble_direct(mesh, bc, forcing)
        dec = _decomposition(mesh, bc, cfg["vqls"]["group_unique"])
        u_c, _ = classical_solve(system)
        v = cfg["vqls"]
        spec = AnsatzSpec(v["ansatz"], mesh.n, v["layers"])
        problem = vqls.VqlsProblem(dec, system.f, spec)
        theta0 = vqls.warm_start_theta(problem, u_c, seed=v["seed"])
        i, j = sweep.get("i", 0), sweep.get("j", 1)
        grid = sweep.get("grid", 41)
        axis = np.linspace(0.0, 2.0 * np.pi, grid)
        rows = []
        theta = theta0.copy()
        for a in axis:
            for b in axis:
                theta[i], theta[j] = a, b
                rows.append((float(a), float(b),
                             vqls.cost_breakdown(problem, theta).value))
        _write_csv(out / "sweep.csv", [f"theta_{i}", f"theta_{j}", "cost"], rows)
        print(f"sweep: landscape grid {grid}x{grid} written")
        return 0
    raise ConfigError(f"unknown sweep mode {mode!r}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqheat",
        description="Hybrid variational solver for 1-D steady-state heat problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("solve", "run one variational solve and compare with the dense oracle"),
        ("verify-decomp", "rebuild the stiffness matrix from the term circuits"),
        ("metrics", "expressibility and entanglement capability report"),
        ("sweep", "success-rate, condition-number or landscape sweeps"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", help=f"one of: {', '.join(sorted(PRESETS))}")
        p.add_argument("--jobs", type=int, default=1, help="sweep worker count")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--out", default="out", help="output directory")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses status 2 for usage problems; remap to 1
        return 1 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "verify-decomp":
            return cmd_verify_decomp(cfg, out)
        if args.command == "metrics":
            return cmd_metrics(cfg, out)
        return cmd_sweep(cfg, out, max(1, args.jobs))
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
