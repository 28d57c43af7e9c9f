"""Command-line front door: config ingestion, experiment orchestration and
deterministic CSV/JSON emission.

Config document (JSON)::

    {
      "command":  "spectrum" | "evolve" | "liouville" | "barrier" | "validate",
      "model":    {"family": str, "params": [..], "omega": float, "epsilon": float,
                   "contour": {"depth": f, "cutoff": f, "n_nodes": i, "shape": s},
                   "kernel": "separable_sqrt_exp"},            # model commands
      "barrier":  {"a": f, "b": f, "v0": f, "v1": f, "mu": f, "hbar": f},
      "output_dir": str,          # overridden by --out
      "seed": int,                # overridden by --seed
      "tolerances": {"pole": f},  # overridden by --tolerance
      "grid": {"oracle_n": i, "t_points": i, "horizon": f,
               "liouville_n": i, "sweep_points": i}
    }

Unknown keys anywhere are rejected.  Outputs are byte-deterministic: floats
use 17 significant digits, no timestamps, and every file embeds the sha256 of
the effective config.  Exit codes: 0 success, 1 numerical failure, 2 config
error, 3 validation failure.  The environment variable RESPECTRA_THREADS caps
the worker count for parallel sweeps.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import barrier as barrier_mod
from .contour import (ContourSpec, build_contour, integrate_contour,
                      plemelj_integral, real_axis_grid)
from .dynamics import (decay_rate, default_time_grid, exponential_approx,
                       oracle_survival_curve, survival_curve)
from .errors import ConfigError, RespectraError
from .friedrichs import find_pole
from .liouville import (LiouvilleGrids, LiouvilleSystem, branch_1u, branch_u1,
                        branch_uu, check_physicality, eigenvalue_symmetry_defect,
                        evolve_state, unstable_state_functional, zero_sector_spectrum)
from .model import ModelSpec, eval_V, eval_Vbar, make_model, model_from_dict
from .oracle import discretize, propagate
from .perturbation import (BiorthogonalSystem, VectorCoeffs, pair_coeffs,
                           perturb_discrete)
from .states import random_analytic, real_axis_inner, real_axis_inner_H

SPEC_VERSION = "1"

_TOP_KEYS = {"command", "model", "barrier", "output_dir", "seed", "tolerances", "grid"}
_GRID_KEYS = {"oracle_n", "t_points", "horizon", "liouville_n", "sweep_points"}
_TOL_KEYS = {"pole"}
_COMMANDS = ("spectrum", "evolve", "liouville", "barrier", "validate")


def _fmt(x: float) -> str:
    return f"{float(x):.17e}"


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_json(path: Path, payload: dict, cfg_hash: str):
    payload = dict(payload)
    payload["spec_version"] = SPEC_VERSION
    payload["config_sha256"] = cfg_hash
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return _fmt(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows, cfg_hash: str):
    lines = [f"# config_sha256={cfg_hash} spec_version={SPEC_VERSION}",
             ",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def load_config(path: str, overrides: dict) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if doc.get("command") not in _COMMANDS:
        raise ConfigError(f"command must be one of {_COMMANDS}")
    grid = doc.get("grid", {})
    if set(grid) - _GRID_KEYS:
        raise ConfigError(f"unknown grid keys {sorted(set(grid) - _GRID_KEYS)}")
    tols = doc.get("tolerances", {})
    if set(tols) - _TOL_KEYS:
        raise ConfigError(f"unknown tolerance keys {sorted(set(tols) - _TOL_KEYS)}")
    cfg = dict(doc)
    cfg.setdefault("output_dir", "out")
    cfg.setdefault("seed", 1234)
    cfg.setdefault("tolerances", {})
    cfg.setdefault("grid", {})
    if overrides.get("out") is not None:
        cfg["output_dir"] = overrides["out"]
    if overrides.get("seed") is not None:
        cfg["seed"] = int(overrides["seed"])
    if overrides.get("tolerance") is not None:
        cfg["tolerances"] = dict(cfg["tolerances"], pole=float(overrides["tolerance"]))
    if overrides.get("nodes") is not None:
        mdl = dict(cfg.get("model", {}))
        contour = dict(mdl.get("contour", {}))
        contour["n_nodes"] = int(overrides["nodes"])
        mdl["contour"] = contour
        cfg["model"] = mdl
    return cfg


def _model_from_cfg(cfg: dict) -> ModelSpec:
    if "model" not in cfg:
        raise ConfigError(f"command {cfg['command']!r} needs a 'model' section")
    return model_from_dict(cfg["model"])


def _barrier_from_cfg(cfg: dict) -> barrier_mod.BarrierSpec:
    if "barrier" not in cfg:
        raise ConfigError("command 'barrier' needs a 'barrier' section")
    doc = cfg["barrier"]
    allowed = {"a", "b", "v0", "v1", "mu", "hbar"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown barrier keys {sorted(unknown)}")
    for key in ("a", "b", "v0", "v1"):
        if key not in doc:
            raise ConfigError(f"barrier section missing {key!r}")
    return barrier_mod.BarrierSpec(a=float(doc["a"]), b=float(doc["b"]),
                                   v0=float(doc["v0"]), v1=float(doc["v1"]),
                                   mu=float(doc.get("mu", 1.0)),
                                   hbar=float(doc.get("hbar", 1.0)))


def _n_threads() -> int:
    raw = os.environ.get("RESPECTRA_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, os.cpu_count() or 1)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_spectrum(cfg: dict, outdir: Path, cfg_hash: str) -> int:
    model = _model_from_cfg(cfg)
    tol = float(cfg["tolerances"].get("pole", 1e-13))
    ser = perturb_discrete(model, 2)
    lam2 = ser.eigenvalue
    payload = {
        "omega": model.omega_level,
        "epsilon": model.coupling,
        "lambda_pert2": [lam2.real, lam2.imag],
        "order1_shift": [ser.lambda_at(1).real, ser.lambda_at(1).imag] if len(ser.orders) > 1 else [0.0, 0.0],
    }
    if not model.has_kernel():
        pole = find_pole(model, tol=tol)
        payload.update({
            "lambda_exact": [pole.lambda_pole.real, pole.lambda_pole.imag],
            "gap": abs(pole.lambda_pole - lam2),
            "residual": pole.residual,
            "iterations": pole.iterations,
            "method": pole.method,
        })
        system = BiorthogonalSystem.from_exact(model)
    else:
        payload.update({"lambda_exact": None,
                        "note": "kernel present: closed-form pole unavailable"})
        system = BiorthogonalSystem.from_perturbation(model, 2)
    _write_json(outdir / "spectrum.json", payload, cfg_hash)
    _write_json(outdir / "system.json", system.to_dict(), cfg_hash)
    return 0


def cmd_evolve(cfg: dict, outdir: Path, cfg_hash: str) -> int:
    model = _model_from_cfg(cfg)
    grid_cfg = cfg["grid"]
    ts = default_time_grid(model, int(grid_cfg.get("t_points", 200)),
                           float(grid_cfg.get("horizon", 5.0)))
    if model.has_kernel():
        system = BiorthogonalSystem.from_perturbation(model, 2)
    else:
        system = BiorthogonalSystem.from_exact(model)
    spec_curve = survival_curve(system, ts)
    oracle_curve = oracle_survival_curve(model, ts, int(grid_cfg.get("oracle_n", 2000)))
    expo = exponential_approx(model, ts)
    rows = zip(ts, spec_curve.survival, oracle_curve.survival, np.atleast_1d(expo))
    _write_csv(outdir / "evolve.csv",
               ["t", "survival_spectral", "survival_oracle", "survival_exponential"],
               rows, cfg_hash)
    return 0


def cmd_liouville(cfg: dict, outdir: Path, cfg_hash: str) -> int:
    model = _model_from_cfg(cfg)
    grid_cfg = cfg["grid"]
    n_li = int(grid_cfg.get("liouville_n", 100))
    grids = LiouvilleGrids.for_model(model, n_nodes=n_li)
    lsys = LiouvilleSystem(model, grids)
    rows = [("decay", lsys.lam_d.real, lsys.lam_d.imag), ("invariant", 0.0, 0.0)]
    for u in grids.gamma_bar.nodes:
        lam = lsys.lam_u1(u)
        rows.append(("u1", float(lam.real), float(lam.imag)))
    for up in grids.gamma.nodes:
        lam = lsys.lam_1u(up)
        rows.append(("1u", float(lam.real), float(lam.imag)))
    for u, up in zip(grids.gamma_bar.nodes, grids.gamma.nodes):
        lam = u - up
        rows.append(("uu", float(lam.real), float(lam.imag)))
    _write_csv(outdir / "liouville_eigenvalues.csv", ["branch", "re", "im"],
               rows, cfg_hash)

    ts = default_time_grid(model, int(grid_cfg.get("t_points", 200)),
                           float(grid_cfg.get("horizon", 5.0)))
    rho0 = unstable_state_functional()
    traj = []
    for t in ts:
        st = evolve_state(model, rho0, float(t), lsys)
        traj.append((float(t), st.c1.real,
                     st.atom_weight(model.omega_level, grids).real,
                     st.normalization(grids).real))
    _write_csv(outdir / "liouville_trajectory.csv",
               ["t", "rho_level", "atom_weight_at_level", "rho_identity"],
               traj, cfg_hash)
    return 0


def cmd_barrier(cfg: dict, outdir: Path, cfg_hash: str) -> int:
    spec = _barrier_from_cfg(cfg)
    res = barrier_mod.resonance_width(spec)
    payload = {
        "a": spec.a, "b": spec.b, "v0": spec.v0, "v1": spec.v1,
        "mu": spec.mu, "hbar": spec.hbar,
        "e1": res.e1, "v11": res.v11, "k_tilde": res.k_tilde,
        "width": res.width, "survival_rate": res.survival_rate,
    }
    _write_json(outdir / "barrier.json", payload, cfg_hash)
    n_sweep = int(cfg["grid"].get("sweep_points", 9))
    b_values = spec.b * np.linspace(1.0, 1.6, n_sweep)
    threads = _n_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(
                lambda b: barrier_mod.width_sweep(spec, [b])[0], b_values))
    else:
        rows = barrier_mod.width_sweep(spec, b_values)
    _write_csv(outdir / "barrier_sweep.csv",
               ["b", "barrier_length", "width", "k_tilde"],
               [(r["b"], r["barrier_length"], r["width"], r["k_tilde"]) for r in rows],
               cfg_hash)
    return 0


# --------------------------------------------------------------------------
# validation suite
# --------------------------------------------------------------------------

def _validation_checks(model: ModelSpec, seed: int):
    """Named fast checks over the whole stack; each returns (value, tol)."""
    rng = np.random.default_rng(seed)
    grid = build_contour(model.contour)
    # identity checks need adequate resolution even for coarse user configs
    from dataclasses import replace
    qspec = replace(model.contour, n_nodes=max(200, model.contour.n_nodes))
    qgrid = build_contour(qspec)
    rgrid = real_axis_grid(model.contour.cutoff, 400)
    om, X = model.omega_level, model.contour.cutoff

    def schwarz_reflection():
        z = (rng.uniform(0.2, X * 0.8, 100)
             + 1j * rng.uniform(-model.contour.depth, model.contour.depth, 100))
        lhs = np.conj(np.asarray(eval_V(model, np.conj(z))))
        rhs = np.asarray(eval_Vbar(model, z))
        return float(np.max(np.abs(lhs - rhs))), 1e-14

    def coupling_linearity():
        m2 = make_model(model.form_factor.family_id, model.form_factor.params,
                        om, 2 * model.coupling, model.contour)
        z = 0.7 + 0.2j
        return float(abs(eval_V(m2, z) - 2 * eval_V(model, z))), 1e-15

    def path_measure():
        return float(abs(np.sum(grid.weights) - X)), 1e-10

    def path_first_moment():
        return float(abs(np.sum(grid.weights * grid.nodes) - X**2 / 2)), 1e-9

    def deformation_identity():
        worst = 0.0
        for _ in range(3):
            c = rng.standard_normal(3)
            f = (lambda z, c=c: eval_V(model if model.coupling > 0 else
                                       make_model("sqrt_exp", [1.0], om, 1.0, model.contour), z)
                 * (c[0] + c[1] * z + c[2] * z**2) * np.exp(-0.4 * z))
            lhs = integrate_contour(qgrid, f)
            rhs = np.sum(rgrid.weights.real * f(rgrid.nodes.real))
            worst = max(worst, abs(lhs - rhs))
        return float(worst), 1e-8

    def plemelj_consistency():
        f = lambda z: np.exp(-0.7 * z) * (1 + z)
        x0 = 0.9 * om + 0.3
        lhs = integrate_contour(qgrid, lambda z: f(z) / (x0 - z))
        rhs = plemelj_integral(f, x0, "+i0", grid=rgrid)
        return float(abs(lhs - rhs)), 1e-8

    def plemelj_conjugation():
        f = lambda w: np.exp(-w)
        a = plemelj_integral(f, 1.1, "+i0", grid=rgrid)
        b = plemelj_integral(f, 1.1, "-i0", grid=rgrid)
        return float(abs(np.conj(a) - b)), 1e-12

    def quadrature_order():
        f = lambda z: np.exp(-z) * np.cos(z.real * 0 + 1.0)
        exact = integrate_contour(build_contour(
            ContourSpec(model.contour.depth, X, model.contour.shape, 800)), f)
        e1 = abs(integrate_contour(build_contour(
            ContourSpec(model.contour.depth, X, model.contour.shape, 32)), f) - exact)
        e2 = abs(integrate_contour(build_contour(
            ContourSpec(model.contour.depth, X, model.contour.shape, 64)), f) - exact)
        ratio = e1 / max(e2, 1e-300)
        return float(4.0 - min(ratio, 4.0)), 0.5  # passes when ratio >= 3.5

    def pole_residual():
        pr = find_pole(model)
        return float(pr.residual), 1e-12

    def pole_half_plane():
        pr = find_pole(model, check_unique=False)
        return float(max(0.0, pr.lambda_pole.imag if model.coupling > 0 else 0.0)), 0.0

    def order1_shift_zero():
        ser = perturb_discrete(model, 1, grid)
        return float(abs(ser.lambda_at(1))), 0.0

    def gauge_condition():
        ser = perturb_discrete(model, 2, grid)
        worst = 0.0
        for _, r, l in ser.orders[1:]:
            worst = max(worst, abs(r.d), abs(l.d))
        return float(worst), 0.0

    sys_exact = [None]

    def _exact():
        if sys_exact[0] is None:
            sys_exact[0] = BiorthogonalSystem.from_exact(model, grid)
        return sys_exact[0]

    def exact_normalization():
        s = _exact()
        return float(abs(pair_coeffs(s.disc_left, s.disc_right, grid) - 1)), 1e-8

    def exact_cross_orthogonality():
        s = _exact()
        worst = 0.0
        for i in range(0, grid.n, max(1, grid.n // 10)):
            worst = max(worst, abs(pair_coeffs(s.disc_left, s.cont_right[i], grid)))
            worst = max(worst, abs(pair_coeffs(s.cont_left[i], s.disc_right, grid)))
        return float(worst), 1e-8

    def exact_completeness():
        s = _exact()
        worst = 0.0
        for _ in range(3):
            psi, phi = random_analytic(rng), random_analytic(rng)
            worst = max(worst, abs(s.reconstruct_inner(psi, phi)
                                   - real_axis_inner(psi, phi, rgrid)))
        return float(worst), 1e-6

    def generator_reconstruction():
        s = _exact()
        psi, phi = random_analytic(rng), random_analytic(rng)
        return float(abs(s.reconstruct_H(psi, phi)
                         - real_axis_inner_H(model, psi, phi, rgrid))), 1e-6

    def projector_algebra():
        vec = VectorCoeffs(d=complex(rng.standard_normal(), rng.standard_normal()),
                           atoms=((grid.nodes[3], 1.2 + 0j),),
                           smooth=())
        back = vec.project_d().plus(vec.project_continuum())
        same = (back.d == vec.d and back.atoms == vec.atoms)
        double = vec.project_d().project_continuum()
        zero = (double.d == 0 and not double.atoms and not double.smooth)
        return float(0.0 if (same and zero) else 1.0), 0.0

    def non_self_adjoint():
        if model.coupling == 0:
            return 0.0, 0.0
        s = BiorthogonalSystem.from_perturbation(model, 2, grid)
        smooth_r = sum(t.values(grid) for t in s.disc_right.smooth)
        smooth_l = sum(t.values(grid) for t in s.disc_left.smooth)
        gap = float(np.max(np.abs(smooth_l - np.conj(smooth_r))))
        return float(0.0 if gap > 1e-10 else 1.0), 0.0

    def oracle_unitarity():
        d = discretize(model, 300)
        v = np.zeros(d.dimension, dtype=complex)
        v[0] = 1.0
        out = propagate(d, v, 3.0 / max(decay_rate(model), 0.05))
        return float(abs(np.linalg.norm(out) - 1.0)), 1e-12

    def liouville_decay_mode():
        zs = zero_sector_spectrum(model)
        v = complex(eval_V(model, om))
        return float(abs(zs.lam_d - 2j * np.pi * (v * np.conj(v)).real)), 1e-10

    def liouville_physicality():
        grids = LiouvilleGrids.for_model(model, n_nodes=64)
        zs = zero_sector_spectrum(model, grids)
        u = grids.gamma_bar.nodes[20]
        worst = 0.0
        for eig in (zs.decay_left,
                    branch_u1(model, u, grids).left,
                    branch_1u(model, np.conj(u), grids).left,
                    branch_uu(model, u, np.conj(u), grids).left):
            ok, val = check_physicality(model, eig)
            if not ok:
                return float(val), 1e-8
            worst = max(worst, val)
        return float(worst), 1e-8

    def liouville_symmetry():
        grids = LiouvilleGrids.for_model(model, n_nodes=64)
        return float(eigenvalue_symmetry_defect(model, grids)), 1e-10

    def probability_conservation():
        lsys = LiouvilleSystem(model, LiouvilleGrids.for_model(model, n_nodes=64))
        rho0 = unstable_state_functional()
        worst = 0.0
        for t in (0.0, 1.0 / max(decay_rate(model), 0.05)):
            st = evolve_state(model, rho0, t, lsys)
            worst = max(worst, abs(st.normalization(lsys.grids) - 1))
        return float(worst), 1e-8

    def barrier_bound_state():
        spec = barrier_mod.BarrierSpec(a=1.0, b=6.0, v0=0.3, v1=0.12)
        bs = barrier_mod.solve_bound_state(spec)
        return float(barrier_mod.bound_state_residual(spec, bs)), 1e-10

    checks = [
        ("schwarz_reflection", schwarz_reflection),
        ("coupling_linearity", coupling_linearity),
        ("path_measure", path_measure),
        ("path_first_moment", path_first_moment),
        ("deformation_identity", deformation_identity),
        ("plemelj_consistency", plemelj_consistency),
        ("plemelj_conjugation", plemelj_conjugation),
        ("quadrature_order", quadrature_order),
        ("pole_residual", pole_residual),
        ("pole_half_plane", pole_half_plane),
        ("order1_shift_zero", order1_shift_zero),
        ("gauge_condition", gauge_condition),
        ("exact_normalization", exact_normalization),
        ("exact_cross_orthogonality", exact_cross_orthogonality),
        ("exact_completeness", exact_completeness),
        ("generator_reconstruction", generator_reconstruction),
        ("projector_algebra", projector_algebra),
        ("non_self_adjoint", non_self_adjoint),
        ("oracle_unitarity", oracle_unitarity),
        ("liouville_decay_mode", liouville_decay_mode),
        ("liouville_physicality", liouville_physicality),
        ("liouville_symmetry", liouville_symmetry),
        ("probability_conservation", probability_conservation),
        ("barrier_bound_state", barrier_bound_state),
    ]
    return checks


def cmd_validate(cfg: dict, outdir: Path, cfg_hash: str) -> int:
    model = _model_from_cfg(cfg) if "model" in cfg else make_model(
        "sqrt_exp", [1.0], 1.0, 0.1)
    checks = _validation_checks(model, int(cfg["seed"]))
    threads = _n_threads()

    def run(item):
        name, fn = item
        try:
            value, tol = fn()
            return (name, value <= tol, value, tol, "")
        except RespectraError as e:
            return (name, False, np.inf, 0.0, str(e))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, checks))
    else:
        results = [run(c) for c in checks]

    width = max(len(r[0]) for r in results)
    lines = []
    for name, ok, value, tol, msg in results:
        status = "PASS" if ok else "FAIL"
        detail = msg if msg else f"value={value:.3e} tol={tol:.1e}"
        lines.append(f"{name:<{width}}  {status}  {detail}")
    table = "\n".join(lines)
    print(table)
    _write_csv(outdir / "validate.csv", ["check", "passed", "value", "tolerance"],
               [(n, int(ok), v, t) for n, ok, v, t, _ in results], cfg_hash)
    return 0 if all(r[1] for r in results) else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="respectra",
        description="Resonance spectral decompositions on deformed contours.")
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--nodes", type=int, default=None,
                        help="override contour node count")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="override the pole solve tolerance")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized invariant sampling")
    parser.add_argument("--dump-grid", action="store_true",
                        help="also write the contour nodes/weights to grid.csv")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, vars(args))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    cfg_hash = _config_hash(cfg)
    if args.dump_grid and "model" in cfg:
        try:
            grid = build_contour(_model_from_cfg(cfg).contour)
        except ConfigError as e:
            print(f"config error: {e}", file=sys.stderr)
            return 2
        _write_csv(outdir / "grid.csv", ["node_re", "node_im", "weight_re", "weight_im"],
                   zip(grid.nodes.real, grid.nodes.imag,
                       grid.weights.real, grid.weights.imag), cfg_hash)
    handlers = {
        "spectrum": cmd_spectrum,
        "evolve": cmd_evolve,
        "liouville": cmd_liouville,
        "barrier": cmd_barrier,
        "validate": cmd_validate,
    }
    try:
        return handlers[cfg["command"]](cfg, outdir, cfg_hash)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except RespectraError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
