"""Checks on converged fields: symmetry, positivity, periodicity and decay."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import ReflectionGroup
from .regions import RegionSpec, distance_to_Phi_closure
from .solver import Field, Problem, equivariance_residual, positivity_violation

__all__ = [
    "DecayFit",
    "TooFewSamples",
    "equivariance_residual",
    "positivity_violation",
    "decay_profile_and_fit",
    "fit_exponential",
    "envelope",
    "periodicity_check",
    "copy_correspondence_check",
    "default_d_min",
    "write_summary",
    "read_summary",
    "CorrespondenceReport",
]

EPS_FLOOR = 1e3 * np.finfo(float).eps


class TooFewSamples(ValueError):
    pass


@dataclass
class DecayFit:
    k: float | None
    K: float | None
    r2: float | None
    d_min: float
    sample_count: int
    envelope_ok: bool
    envelope_bins: np.ndarray = field(repr=False, default=None)
    envelope_values: np.ndarray = field(repr=False, default=None)
    skipped: bool = False


def fit_exponential(d, q, min_samples: int = 20):
    """Least squares for ``log q = log K - k d``; returns ``(k, K, r2)``."""
    d = np.asarray(d, dtype=float)
    q = np.asarray(q, dtype=float)
    if len(d) < min_samples:
        raise TooFewSamples(f"{len(d)} samples, need {min_samples}")
    y = np.log(q)
    A = np.stack([np.ones_like(d), -d], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    return float(coef[1]), float(np.exp(coef[0])), r2


def envelope(d, q, bin_width: float, rtol: float = 1e-2, atol: float = 1e-8):
    """Per-bin maxima of ``q`` over ``d`` and whether they are non-increasing.

    A later bin may exceed an earlier one by at most ``rtol`` relative plus
    ``atol`` absolute before the envelope counts as increasing.
    """
    d = np.asarray(d, dtype=float)
    q = np.asarray(q, dtype=float)
    if len(d) == 0:
        return np.zeros(0), np.zeros(0), True
    b = np.floor((d - d.min()) / bin_width).astype(int)
    nb = b.max() + 1
    vals = np.full(nb, -np.inf)
    np.maximum.at(vals, b, q)
    keep = np.isfinite(vals)
    centers = d.min() + (np.arange(nb) + 0.5) * bin_width
    vals, centers = vals[keep], centers[keep]
    ok = bool(np.all(vals[1:] <= vals[:-1] * (1 + rtol) + atol))
    return centers, vals, ok


def default_d_min(h: float, curvature) -> float:
    """``4 h`` plus the interface width ``1 / sqrt(lambda_min(D^2 W(a)))``."""
    lam = float(np.min(curvature))
    width = 1.0 / np.sqrt(lam) if lam > 0 else 0.0
    return 4.0 * h + width


def decay_profile_and_fit(
    field_: Field,
    a,
    region: RegionSpec,
    d_min: float | None = None,
    length_scale: float = 1.0,
    degenerate: bool = False,
    curvature=None,
    bin_width: float | None = None,
    envelope_rtol: float = 1e-2,
    mask=None,
    require_fit: bool = True,
) -> DecayFit:
    """Samples ``(d_i, |u(x_i) - a|)`` over nodes of ``region`` and fits an exponential.

    Distances are multiplied by ``length_scale`` (``R`` for a rescaled cell
    solution).  With ``degenerate`` only the envelope is checked.  With
    ``require_fit=False`` too few samples skip the fit instead of raising.
    """
    grid = field_.grid
    a = np.asarray(a, dtype=float)
    X = grid.coords
    inside = region.membership(X)
    if mask is not None:
        inside &= mask
    Xi = X[inside]
    q = np.linalg.norm(field_.values[inside] - a, axis=1)
    d = region.distance_to_boundary(Xi, check=False) * length_scale if len(Xi) else np.zeros(0)
    if d_min is None:
        d_min = default_d_min(grid.h * length_scale, curvature if curvature is not None else [1.0])
    sel = d >= d_min
    ds, qs = d[sel], q[sel]
    bw = bin_width if bin_width is not None else 2.0 * grid.h * length_scale
    centers, vals, env_ok = envelope(ds, qs, bw, rtol=envelope_rtol)
    if degenerate:
        return DecayFit(None, None, None, d_min, int(sel.sum()), env_ok, centers, vals, skipped=True)
    good = qs > EPS_FLOOR
    try:
        k, K, r2 = fit_exponential(ds[good], qs[good])
    except TooFewSamples:
        if require_fit:
            raise
        return DecayFit(None, None, None, d_min, int(good.sum()), env_ok, centers, vals, skipped=True)
    return DecayFit(k, K, r2, d_min, int(good.sum()), env_ok, centers, vals)


def periodicity_check(field_: Field, lattice=None) -> float:
    """``max |u(x + t) - u(x)|`` over lattice generators ``t``; ``inf`` if ``x + t`` misses the grid."""
    grid = field_.grid
    L = grid.lattice if lattice is None else np.atleast_2d(np.asarray(lattice, dtype=float))
    if L is None:
        raise ValueError("field is not on a periodic cell")
    worst = 0.0
    for t in L:
        j = grid.locate(grid.coords + t)
        if np.any(j < 0):
            return float("inf")
        worst = max(worst, float(np.abs(field_.values[j] - field_.values).max()))
    return worst


@dataclass
class CorrespondenceReport:
    max_violation: float
    per_element: np.ndarray
    colors: np.ndarray  # nearest-minimum index per point-group copy
    expected: np.ndarray  # index of f(g) a in the orbit
    ok: bool

    @property
    def colors_ok(self) -> bool:
        return bool(np.all(self.colors == self.expected))


def _nearest_minimum(orbit: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.argmin(np.linalg.norm(u[..., None, :] - orbit, axis=-1), axis=-1)


def copy_correspondence_check(field_: Field, problem: Problem, tol: float = 1e-6, depth_quantile: float = 0.5) -> CorrespondenceReport:
    """``dist(f(g)^{-1} u(g x), Phi)`` over F-nodes for every ``g``, and the colour of each copy ``g F``."""
    grid, f, pot = problem.grid, problem.f, problem.potential
    G = f.source
    vals = field_.values
    Fm = problem.F_mask
    per = np.zeros(G.order)
    for k in range(G.order):
        A, Fg = G.matrices[k], problem.images[k]
        if problem.perms is not None:
            moved = vals[problem.perms[k]][Fm]
        else:
            moved = grid.sample(vals, grid.coords[Fm] @ A.T)
        per[k] = float(distance_to_Phi_closure(problem.Phi, moved @ Fg).max()) if moved.size else 0.0
    # deep interior of F: nodes farthest from the walls of F
    XF = grid.coords[Fm]
    inner = Fm.copy()
    if len(XF):
        depth = -G.wall_values(XF).max(axis=1)
        if grid.kind == "ball":
            depth = np.minimum(depth, grid.R - np.linalg.norm(XF, axis=1))
        cut = np.quantile(depth, depth_quantile)
        inner_idx = np.flatnonzero(Fm)[depth >= cut]
    else:
        inner_idx = np.zeros(0, dtype=int)
    colors = np.zeros(G.order, dtype=int)
    for k in range(G.order):
        A = G.matrices[k]
        if problem.perms is not None:
            copy_vals = vals[problem.perms[k][inner_idx]]
        else:
            copy_vals = grid.sample(vals, grid.coords[inner_idx] @ A.T)
        colors[k] = int(_nearest_minimum(pot.orbit, copy_vals.mean(axis=0)))
    expected = _nearest_minimum(pot.orbit, problem.images @ pot.a)
    mx = float(per.max()) if len(per) else 0.0
    return CorrespondenceReport(mx, per, colors, expected, bool(mx <= tol and np.all(colors == expected)))


def write_summary(path: str, items: dict) -> None:
    """``key: value`` lines in insertion order."""
    with open(path, "w") as fh:
        for k, v in items.items():
            if isinstance(v, float):
                v = repr(v)
            elif isinstance(v, (list, tuple, np.ndarray)):
                v = " ".join(repr(float(x)) if isinstance(x, (float, np.floating)) else str(x) for x in np.ravel(v))
            fh.write(f"{k}: {v}\n")


def read_summary(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if ":" in line:
                k, v = line.split(":", 1)
                out[k.strip()] = v.strip()
    return out
