"""Command line entry point: ``equiflow catalog | check-hom | solve | analyze``.

Run configurations are flat ``key = value`` files with dotted sections,
for example ``domain.h = 0.1``.  Exit codes: 0 when every enabled check
passes, 1 when a check fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .analysis import (
    TooFewSamples,
    copy_correspondence_check,
    decay_profile_and_fit,
    default_d_min,
    periodicity_check,
    write_summary,
)
from .groups import UnknownCatalogName, catalog_group, catalog_group_names
from .homomorphisms import (
    BadParams,
    NotAHomomorphism,
    catalog_homomorphism,
    catalog_homomorphism_names,
    is_positive,
    lattice_acts_trivially,
)
from .potentials import orbit_product_potential
from .regions import NotPositive
from .solver import (
    BadSpacing,
    Blowup,
    Field,
    FileFormat,
    FlowConfig,
    NonMonotone,
    discretize,
    energy,
    equivariance_residual,
    init_field,
    make_problem,
    pde_residual,
    positivity_violation,
    read_field_csv,
    run_flow,
    write_field_csv,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

# eight well separated colours for the phase image
PALETTE = np.array(
    [
        [230, 25, 75],
        [60, 180, 75],
        [0, 130, 200],
        [255, 225, 25],
        [145, 30, 180],
        [245, 130, 48],
        [70, 240, 240],
        [128, 128, 128],
    ],
    dtype=np.uint8,
)


class ConfigError(ValueError):
    pass


# -- configuration ---------------------------------------------------------

_SECTIONS = ("group", "homomorphism", "potential", "domain", "flow", "analysis", "checks", "output")
_FIXED_KEYS = {
    "potential": {"kind", "a", "scale", "M", "group"},
    "domain": {"kind", "R", "h", "dim"},
    "flow": {"tol_rate", "max_steps", "k_sym", "k_log", "seed", "init", "init_path", "scale_c", "dt_safety", "sweeps"},
    "analysis": {"d_min", "length_scale", "envelope_rtol", "bin_width"},
    "checks": {
        "positivity_tol", "equivariance_tol", "periodicity_tol", "correspondence", "correspondence_tol",
        "decay", "converged",
    },
    "output": {"directory", "formats", "prefix"},
}
_FORMATS = {"csv", "pgm", "ppm", "summary"}


def parse_value(text: str):
    """``on/off/true/false``, integers, floats, comma separated vectors, or text."""
    t = text.strip()
    low = t.lower()
    if low in ("true", "on", "yes"):
        return True
    if low in ("false", "off", "no"):
        return False
    if "," in t:
        parts = [p.strip() for p in t.split(",") if p.strip()]
        try:
            return [float(p) for p in parts]
        except ValueError:
            return parts
    for conv in (int, float):
        try:
            return conv(t)
        except ValueError:
            pass
    return t


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Dotted ``key = value`` lines into a flat dict; ``#`` starts a comment."""
    out, where = {}, {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key or "." not in key:
            raise ConfigError(f"{source}:{no}: key {key!r} needs a section, e.g. domain.h")
        section, name = key.split(".", 1)
        if section not in _SECTIONS:
            raise ConfigError(f"{source}:{no}: unknown section {section!r}")
        if section in _FIXED_KEYS and name not in _FIXED_KEYS[section]:
            raise ConfigError(f"{source}:{no}: unknown key {key!r}")
        if val == "":
            raise ConfigError(f"{source}:{no}: empty value for {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{no}: duplicate key {key!r} (first on line {where[key]})")
        out[key] = parse_value(val)
        where[key] = no
    return out


def load_config(path: str, overrides=()) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    cfg = parse_config_text(text, str(path))
    if overrides:
        extra = parse_config_text("\n".join(overrides), "--set")
        cfg.update(extra)
    return cfg


def bundled_config(name: str) -> str:
    """Path of a bundled configuration such as ``triple_junction``."""
    stem = name[:-4] if name.endswith(".cfg") else name
    ref = resources.files("equiflow") / "configs" / f"{stem}.cfg"
    if not ref.is_file():
        raise ConfigError(f"no bundled config {name!r}")
    return str(ref)


def _section(cfg: dict, section: str) -> dict:
    pre = section + "."
    return {k[len(pre):]: v for k, v in cfg.items() if k.startswith(pre)}


def _positive(cfg, key, default=None):
    v = cfg.get(key, default)
    if v is None:
        raise ConfigError(f"missing required key {key!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigError(f"{key} must be a positive number, got {v!r}")
    return float(v)


@dataclass
class Run:
    """A configuration resolved into solver objects."""

    cfg: dict
    f: object
    potential: object
    grid: object
    problem: object
    R: float
    flow: FlowConfig
    init: str
    seed: int
    checks: dict = field(default_factory=dict)


def build_run(cfg: dict) -> Run:
    """Resolve catalog names and build grid, potential and problem."""
    hom = _section(cfg, "homomorphism")
    name = hom.pop("name", None)
    if name is None:
        raise ConfigError("missing required key 'homomorphism.name'")
    grp = _section(cfg, "group")
    try:
        if grp:
            gname = grp.pop("name", None)
            if gname is None:
                raise ConfigError("group section needs group.name")
            hom["group"] = catalog_group(gname, **grp)
        f = catalog_homomorphism(name, **hom)
    except (UnknownCatalogName, BadParams, NotAHomomorphism, TypeError) as e:
        raise ConfigError(f"homomorphism {name!r}: {e}") from e

    pot = _section(cfg, "potential")
    kind = pot.get("kind", "orbit_product")
    if kind not in ("orbit_product", "orbit_product_degenerate"):
        raise ConfigError(f"potential.kind must be orbit_product or orbit_product_degenerate, got {kind!r}")
    if "a" not in pot:
        raise ConfigError("missing required key 'potential.a'")
    a = np.atleast_1d(np.asarray(pot["a"], dtype=float))
    if a.shape != (f.target.dim,):
        raise ConfigError(f"potential.a must have {f.target.dim} entries")
    if "group" in pot and pot["group"] != f.target.name:
        raise ConfigError(f"potential.group {pot['group']!r} is not the target {f.target.name!r} of {name}")
    scale = pot.get("scale", 1.0)
    if not (scale == "auto" or (isinstance(scale, (int, float)) and not isinstance(scale, bool) and scale > 0)):
        raise ConfigError(f"potential.scale must be 'auto' or a positive number, got {scale!r}")
    try:
        W = orbit_product_potential(
            f.target, a, scale=scale, degenerate=kind == "orbit_product_degenerate", M=pot.get("M")
        )
    except ValueError as e:
        raise ConfigError(f"potential: {e}") from e

    dom = _section(cfg, "domain")
    dkind = dom.get("kind", "ball")
    h = _positive(cfg, "domain.h")
    G = f.source
    if dkind == "ball":
        R = _positive(cfg, "domain.R")
        spec = {"kind": "ball", "R": R, "dim": int(dom.get("dim", G.dim))}
        scale_c = 1.0
    elif dkind == "cell":
        R = _positive(cfg, "domain.R", 1.0)
        spec = {"kind": "cell", "group": G}
        scale_c = R * R
    else:
        raise ConfigError(f"domain.kind must be ball or cell, got {dkind!r}")
    fl = _section(cfg, "flow")
    if "scale_c" in fl:
        scale_c = _positive(cfg, "flow.scale_c")
    try:
        grid = discretize(spec, h, group=G)
        problem = make_problem(grid, f, W, scale_c=scale_c)
    except BadSpacing as e:
        raise ConfigError(f"domain: {e}") from e
    except NotPositive as e:
        raise ConfigError(f"{name}: {e}") from e
    except ValueError as e:
        raise ConfigError(f"{name}: {e}") from e

    flow = FlowConfig(
        tol_rate=float(fl.get("tol_rate", 1e-6)),
        max_steps=int(fl.get("max_steps", 200000)),
        k_sym=int(fl.get("k_sym", 1)),
        k_log=int(fl.get("k_log", 100)),
        dt_safety=float(fl.get("dt_safety", 1.0)),
    )
    init = fl.get("init", "minima_interpolation")
    if init not in ("minima_interpolation", "seeded_random", "from_file"):
        raise ConfigError(f"flow.init must be minima_interpolation, seeded_random or from_file, got {init!r}")
    if init == "from_file" and "init_path" not in fl:
        raise ConfigError("flow.init = from_file needs flow.init_path")
    checks = {
        "positivity_tol": float(cfg.get("checks.positivity_tol", 1e-6)),
        "equivariance_tol": float(cfg.get("checks.equivariance_tol", 1e-8)),
        "periodicity_tol": float(cfg.get("checks.periodicity_tol", 0.0)),
        "correspondence": bool(cfg.get("checks.correspondence", True)),
        "correspondence_tol": float(cfg.get("checks.correspondence_tol", 1e-6)),
        "decay": bool(cfg.get("checks.decay", True)),
        "converged": bool(cfg.get("checks.converged", False)),
    }
    return Run(cfg, f, W, grid, problem, R, flow, init, int(fl.get("seed", 0)), checks)


# -- images ------------------------------------------------------------------

def raster(grid, values: np.ndarray, height: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel node index on a regular pixel grid of spacing ``h``; -1 off the grid.

    1D fields become a strip of ``height`` rows; 3D fields are cut at the
    node plane nearest ``x3 = 0``.
    """
    X = grid.coords
    h = grid.h
    if grid.dim == 1:
        order = np.argsort(X[:, 0], kind="stable")
        idx = np.tile(order, (height, 1))
        return idx, values
    keep = np.arange(len(X))
    if grid.dim == 3:
        z = X[:, 2]
        z0 = z[np.argmin(np.abs(z))]
        keep = np.flatnonzero(np.abs(z - z0) < 1e-9)
    P = X[keep][:, :2]
    lo, hi = P.min(axis=0), P.max(axis=0)
    nx, ny = (np.round((hi - lo) / h).astype(int) + 1)
    gx = lo[0] + h * np.arange(nx)
    gy = hi[1] - h * np.arange(ny)  # first row at the top
    px = np.stack(np.meshgrid(gx, gy, indexing="xy"), -1).reshape(-1, 2)
    dist, j = cKDTree(P).query(px)
    idx = np.where(dist <= 0.75 * h, keep[j], -1).reshape(ny, nx)
    return idx, values


def write_pgm(path: str, grid, values: np.ndarray, a) -> None:
    """``clamp(255 |u - a| / max |u - a|)`` as binary PGM (P5)."""
    q = np.linalg.norm(values - np.asarray(a, dtype=float), axis=1)
    top = q.max() if q.size and q.max() > 0 else 1.0
    gray = np.clip(np.rint(255.0 * q / top), 0, 255).astype(np.uint8)
    idx, _ = raster(grid, values)
    img = np.where(idx >= 0, gray[np.maximum(idx, 0)], 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


def phase_indices(values: np.ndarray, orbit: np.ndarray) -> np.ndarray:
    """Index of the nearest minimum of ``W`` for every node."""
    d = np.linalg.norm(values[:, None, :] - orbit[None, :, :], axis=2)
    return np.argmin(d, axis=1)


def write_ppm(path: str, grid, values: np.ndarray, orbit: np.ndarray) -> None:
    """Phase map as binary PPM (P6) coloured by nearest minimum."""
    ph = phase_indices(values, orbit) % len(PALETTE)
    idx, _ = raster(grid, values)
    img = np.zeros(idx.shape + (3,), dtype=np.uint8)
    on = idx >= 0
    img[on] = PALETTE[ph[idx[on]]]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


def read_netpbm(path: str) -> np.ndarray:
    """Reader for the P5/P6 files written above."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode())
    pos += 1
    magic, w, hgt, mx = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic not in ("P5", "P6") or mx != 255:
        raise FileFormat(f"unsupported image {magic} max {mx}")
    ch = 1 if magic == "P5" else 3
    arr = np.frombuffer(data[pos:pos + w * hgt * ch], dtype=np.uint8)
    if arr.size != w * hgt * ch:
        raise FileFormat("truncated image")
    return arr.reshape(hgt, w) if ch == 1 else arr.reshape(hgt, w, 3)


# -- analysis ---------------------------------------------------------------

def analyze_field(run: Run, fld: Field, flow_result=None) -> tuple[dict, bool]:
    """Summary items and the overall pass flag for a field."""
    P, W, chk = run.problem, run.potential, run.checks
    a = W.a
    na = float(np.linalg.norm(a))
    out = {
        "homomorphism": run.f.name,
        "source": run.f.source.name,
        "target": run.f.target.name,
        "domain": run.grid.kind,
        "h": float(run.grid.h),
        "R": float(run.R),
        "nodes": int(run.grid.size),
        "minima": int(len(W.orbit)),
        "node_compatible": P.node_compatible,
    }
    if flow_result is not None:
        r = flow_result
        out.update(
            {
                "iterations": r.iterations,
                "converged": r.converged,
                "dt": float(r.dt),
                "L_W": float(r.L_W),
                "energy_initial": float(r.energy_trace[0][1]),
                "max_energy_rise": float(r.max_energy_rise),
                "final_step_norm": float(r.final_step_norm),
                "positivity_max_trace": float(max(p for _, p in r.positivity_trace)) if r.positivity_trace else 0.0,
            }
        )
    out["energy"] = float(energy(fld, W, P.scale_c))
    out["pde_residual"] = float(pde_residual(fld, W, P.scale_c))
    passed = {}

    pos = positivity_violation(fld, P)
    if flow_result is not None and flow_result.positivity_trace:
        pos = max(pos, out["positivity_max_trace"])
    out["positivity_violation"] = float(pos)
    passed["positivity"] = pos <= chk["positivity_tol"] * na

    eq = equivariance_residual(fld, P)
    out["equivariance_residual"] = float(eq)
    if P.node_compatible:
        passed["equivariance"] = eq <= chk["equivariance_tol"] * na

    if run.grid.kind == "cell":
        per = periodicity_check(fld)
        out["periodicity"] = float(per)
        passed["periodicity"] = per <= chk["periodicity_tol"]
        out["finite_R_surrogate"] = True

    if chk["correspondence"]:
        rep = copy_correspondence_check(fld, P, tol=chk["correspondence_tol"] * na)
        out["correspondence_max"] = float(rep.max_violation)
        out["copy_colors"] = rep.colors.tolist()
        out["expected_colors"] = rep.expected.tolist()
        passed["correspondence"] = rep.ok

    if chk["decay"]:
        an = _section(run.cfg, "analysis")
        ls = an.get("length_scale", "auto")
        ls = run.R if ls == "auto" and run.grid.kind == "cell" else (1.0 if ls == "auto" else float(ls))
        curv = W.curvature_at_minimum()
        d_min = an.get("d_min", "auto")
        d_min = default_d_min(run.grid.h * ls, curv) if d_min == "auto" else float(d_min)
        try:
            fit = decay_profile_and_fit(
                fld, a, P.regions.D, d_min=d_min, length_scale=ls, degenerate=W.degenerate, curvature=curv,
                bin_width=an.get("bin_width"), envelope_rtol=float(an.get("envelope_rtol", 1e-2)),
                require_fit=False,
            )
            out["decay_d_min"] = float(fit.d_min)
            out["decay_samples"] = int(fit.sample_count)
            out["decay_fit"] = "skipped" if fit.skipped else "done"
            if not fit.skipped:
                out["decay_k"] = float(fit.k)
                out["decay_K"] = float(fit.K)
                out["decay_r2"] = float(fit.r2)
            out["decay_envelope_ok"] = fit.envelope_ok
            passed["decay_envelope"] = fit.envelope_ok
        except TooFewSamples as e:
            out["decay_fit"] = f"skipped ({e})"

    if chk["converged"] and flow_result is not None:
        passed["converged"] = bool(flow_result.converged)
    for k, v in passed.items():
        out[f"check_{k}"] = "pass" if v else "fail"
    ok = all(passed.values())
    out["status"] = "pass" if ok else "fail"
    return out, ok


def _emit(run: Run, fld: Field, summary: dict, outdir: Path, prefix: str) -> list[str]:
    fmts = run.cfg.get("output.formats", ["csv", "pgm", "ppm", "summary"])
    fmts = [fmts] if isinstance(fmts, str) else list(fmts)
    bad = set(fmts) - _FORMATS
    if bad:
        raise ConfigError(f"output.formats: unknown {sorted(bad)}")
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in fmts:
        p = outdir / f"{prefix}.csv"
        write_field_csv(fld, str(p))
        written.append(str(p))
    if "pgm" in fmts:
        p = outdir / f"{prefix}_dist.pgm"
        write_pgm(str(p), run.grid, fld.values, run.potential.a)
        written.append(str(p))
    if "ppm" in fmts:
        p = outdir / f"{prefix}_phase.ppm"
        write_ppm(str(p), run.grid, fld.values, run.potential.orbit)
        written.append(str(p))
    if "summary" in fmts:
        p = outdir / f"{prefix}_summary.txt"
        write_summary(str(p), summary)
        written.append(str(p))
    return written


def _paths(args, cfg: dict, cfg_path: str) -> tuple[Path, str]:
    outdir = Path(args.out or cfg.get("output.directory", "out"))
    prefix = str(cfg.get("output.prefix", Path(cfg_path).stem))
    return outdir, prefix


# -- commands ----------------------------------------------------------------

_CATALOG_DEFAULTS = {
    "identity": [{"group": "Dn", "n": 3}, {"group": "tetra"}],
    "f_m": [{"n": 3, "k": 2, "m": 1}, {"n": 3, "k": 2, "m": -1}],
    "g_2k": [{"k": 2}],
    "h_2k": [{"k": 2}],
    "epsilon": [{"group": "H"}],
}


def _params_text(p: dict) -> str:
    return ",".join(f"{k}={v}" for k, v in p.items())


def cmd_catalog(args) -> int:
    print("groups:")
    for name in catalog_group_names():
        G = catalog_group(name)
        kind = "discrete" if G.is_discrete else "finite"
        label = name if G.name in ("", name) else f"{name} (default {G.name})"
        print(f"  {label}: dim={G.dim} point_group_order={G.order} {kind}")
    print("homomorphisms:")
    for name in catalog_homomorphism_names():
        for params in _CATALOG_DEFAULTS.get(name, [{}]):
            f = catalog_homomorphism(name, **params)
            label = f"{name}({_params_text(params)})" if params else name
            verdict = "positive" if is_positive(f) else "negative"
            extra = ""
            if f.source.is_discrete and not lattice_acts_trivially(f):
                extra = " lattice_nontrivial"
            print(f"  {label}:{verdict}{extra}  [{f.source.name} -> {f.target.name}]")
    return EXIT_OK


def _kv_params(items) -> dict:
    out = {}
    for it in items:
        if "=" not in it:
            raise ConfigError(f"parameter {it!r} is not key=value")
        k, v = it.split("=", 1)
        out[k.strip()] = parse_value(v)
    return out


def cmd_check_hom(args) -> int:
    params = _kv_params(args.params)
    f = catalog_homomorphism(args.name, **params)
    cert = is_positive(f)
    print(f"{f.name}: {f.source.name} -> {f.target.name}")
    code = EXIT_OK
    if cert:
        print(f"positive (target chamber {cert.chamber_index})")
        for i, (J, E) in enumerate(zip(cert.wall_assignment, cert.fixed_subspaces)):
            walls = "{" + ",".join(str(j) for j in J) + "}" if J else "{} (f(s) = I)"
            print(f"  s{i}: ker(f(s) - I) dim {E.dim} = intersection of walls {walls}")
    else:
        print("negative: no target chamber realizes every fixed subspace")
        for i, E in sorted(cert.failures.items()):
            print(f"  s{i}: ker(f(s) - I) of dim {E.dim} is not an intersection of walls")
        code = EXIT_CHECK
    if f.source.is_discrete:
        if lattice_acts_trivially(f):
            print("lattice: f(t) = I for every translation")
        else:
            print("lattice: f(t) != I for some translation; periodic cell solutions do not apply")
            code = EXIT_CHECK
    return code


def cmd_solve(args) -> int:
    cfg_path = args.config
    if not Path(cfg_path).exists() and not os.sep in cfg_path:
        cfg_path = bundled_config(cfg_path)
    cfg = load_config(cfg_path, args.set or ())
    run = build_run(cfg)
    t0 = time.time()
    P = run.problem
    fl = _section(cfg, "flow")
    try:
        u0 = init_field(P, run.init, seed=run.seed, path=fl.get("init_path"), sweeps=int(fl.get("sweeps", 5)))
    except FileFormat as e:
        raise ConfigError(f"flow.init_path: {e}") from e
    res = run_flow(P, u0, run.flow)
    summary, ok = analyze_field(run, res.field, res)
    outdir, prefix = _paths(args, cfg, cfg_path)
    written = _emit(run, res.field, summary, outdir, prefix)
    for p in written:
        print(p)
    print(f"{summary['status']}: {res.iterations} steps, energy {summary['energy']:.10g}, {time.time() - t0:.1f} s")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_analyze(args) -> int:
    cfg_path = args.config
    if not Path(cfg_path).exists() and not os.sep in cfg_path:
        cfg_path = bundled_config(cfg_path)
    cfg = load_config(cfg_path, args.set or ())
    run = build_run(cfg)
    try:
        U = read_field_csv(args.field, run.grid)
    except FileFormat as e:
        raise ConfigError(f"{args.field}: {e}") from e
    fld = Field(run.grid, U)
    summary, ok = analyze_field(run, fld)
    outdir, prefix = _paths(args, cfg, cfg_path)
    outdir.mkdir(parents=True, exist_ok=True)
    p = outdir / f"{prefix}_analysis.txt"
    write_summary(str(p), summary)
    print(p)
    for k, v in summary.items():
        if k.startswith("check_"):
            print(f"{k[6:]}: {v}")
    print(summary["status"])
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="equiflow", description="Equivariant Allen-Cahn minimizers by gradient flow.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", help="list groups and homomorphisms with positivity verdicts")
    p = sub.add_parser("check-hom", help="positivity certificate of a catalog homomorphism")
    p.add_argument("name")
    p.add_argument("params", nargs="*", help="key=value parameters, e.g. n=2 k=2 m=1")
    for cmd, helptext in (("solve", "run a configuration"), ("analyze", "re-run the checks on a dumped field")):
        p = sub.add_parser(cmd, help=helptext)
        p.add_argument("config", help="config file or bundled config name")
        if cmd == "analyze":
            p.add_argument("field", help="field CSV written by solve")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
    return ap


_HANDLERS = {"catalog": cmd_catalog, "check-hom": cmd_check_hom, "solve": cmd_solve, "analyze": cmd_analyze}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    env = os.environ.get("EQUIFLOW_THREADS")
    if env is not None and not (env.isdigit() and int(env) > 0):
        print(f"error: EQUIFLOW_THREADS must be a positive integer, got {env!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, UnknownCatalogName, BadParams) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (Blowup, NonMonotone) as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
