"""Discrete gradient flow for equivariant Allen-Cahn minimizers.

The energy on a grid graph is

    J(u) = 1/2 sum_edges w |u_i - u_j|^2 + c * V * sum_i W(u_i)

and the explicit scheme ``u += dt * (L u - c W_u(u))`` with
``L_ij = w / V`` is its exact gradient flow in the ``V``-weighted inner
product, so ``J`` decreases for small ``dt``.  Grids are cubic, or
hexagonal in the plane when the point group contains rotations of order 3
or 6; in both cases every point-group element permutes the nodes whenever
possible, which makes symmetrization exact.
"""

from __future__ import annotations

import copy
import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.ndimage import distance_transform_edt, map_coordinates

from .groups import ReflectionGroup
from .homomorphisms import HomomorphismSpec, lattice_acts_trivially
from .potentials import Potential
from .regions import Regions, build_regions, distance_to_Phi_closure, project_onto_Phi_closure


class BadSpacing(ValueError):
    pass


class Blowup(RuntimeError):
    pass


class NonMonotone(RuntimeError):
    pass


class FileFormat(ValueError):
    pass


HEX_BASIS = np.array([[1.0, 0.5], [0.0, np.sqrt(3.0) / 2.0]])
HEX_STEPS = np.array([[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]])


def _integer_matrix(A, tol=1e-7):
    R = np.rint(A)
    return R.astype(np.int64) if np.abs(A - R).max() < tol else None


def lattice_kind_for(group: ReflectionGroup | None, dim: int) -> str:
    """``"hex"`` for planar groups whose point group preserves the triangular lattice, else ``"cubic"``."""
    if group is None:
        return "cubic"
    if all(_integer_matrix(A) is not None for A in group.matrices):
        return "cubic"
    if dim == 2:
        Bi = np.linalg.inv(HEX_BASIS)
        if all(_integer_matrix(Bi @ A @ HEX_BASIS) is not None for A in group.matrices):
            return "hex"
    return "cubic"


def _stencil(kind: str, n: int, h: float):
    """Offsets, edge weight and node volume."""
    if kind == "hex":
        return HEX_STEPS, 1.0 / np.sqrt(3.0), np.sqrt(3.0) / 2.0 * h * h
    eye = np.eye(n, dtype=np.int64)
    return np.concatenate([eye, -eye]), h ** (n - 2), h ** n


@dataclass(eq=False)
class Grid:
    """Nodes ``x = basis @ k`` for integer ``k`` on a ball or a periodic cell."""

    dim: int
    h: float
    kind: str  # "ball" or "cell"
    lattice_kind: str
    basis: np.ndarray
    index: np.ndarray  # integer coordinates, lexicographic order
    coords: np.ndarray
    steps: np.ndarray
    weight: float
    volume: float
    R: float = 0.0
    lattice: Optional[np.ndarray] = None
    M: Optional[np.ndarray] = None  # superlattice in index coordinates (columns)
    _box_lo: np.ndarray = None
    _box: np.ndarray = None
    neighbors: np.ndarray = None
    laplacian: sparse.csr_matrix = None

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def shape(self) -> tuple:
        return self._box.shape

    @property
    def mask(self) -> np.ndarray:
        """Active nodes within the bounding box of integer coordinates."""
        return self._box >= 0

    def _canonical(self, K):
        """Coset representative modulo the superlattice (cell grids)."""
        adj, det = self._adj, self._det
        q = np.floor_divide(K @ adj.T, det)
        return K - q @ self.M.T

    def lookup(self, K) -> np.ndarray:
        """Node index of integer coordinates ``K``; -1 when inactive."""
        K = np.asarray(K, dtype=np.int64).reshape(-1, self.dim)
        if self.kind == "cell":
            K = self._canonical(K)
        rel = K - self._box_lo
        ok = np.all((rel >= 0) & (rel < np.array(self._box.shape)), axis=1)
        out = np.full(len(K), -1, dtype=np.int64)
        if np.any(ok):
            out[ok] = self._box[tuple(rel[ok].T)]
        return out

    def locate(self, x, tol=1e-6) -> np.ndarray:
        """Node index at points ``x``; -1 when ``x`` is off the grid or inactive."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        k = x @ np.linalg.inv(self.basis).T
        kr = np.rint(k)
        on = np.all(np.abs(k - kr) < tol, axis=1)
        out = np.full(len(x), -1, dtype=np.int64)
        if np.any(on):
            out[on] = self.lookup(kr[on].astype(np.int64))
        return out

    def wrap_ok(self) -> bool:
        """``wrap(k + t) = wrap(k)`` for every node and superlattice generator."""
        if self.kind != "cell":
            return True
        base = self.lookup(self.index)
        if not np.array_equal(base, np.arange(self.size)):
            return False
        return all(np.array_equal(self.lookup(self.index + self.M[:, j]), base) for j in range(self.M.shape[1]))

    def interior_mask(self, shells: int = 2) -> np.ndarray:
        if self.kind == "cell":
            return np.ones(self.size, dtype=bool)
        r = np.linalg.norm(self.coords, axis=1)
        return r <= self.R - shells * self.h - 1e-12

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Discrete Laplacian of nodal values."""
        return self.laplacian @ values

    def energy(self, values: np.ndarray, potential: Potential, scale_c: float = 1.0) -> float:
        # 1/2 sum_edges w |u_i - u_j|^2 = -1/2 V <u, L u>
        grad_part = -0.5 * self.volume * float(np.sum(values * (self.laplacian @ values)))
        return grad_part + scale_c * self.volume * float(np.sum(potential.value(values)))

    def sample(self, values: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at points ``x`` (ball grids); outside values are the nearest node's."""
        K = x @ np.linalg.inv(self.basis).T - self._box_lo
        filled = self._filled_index
        out = []
        for c in range(values.shape[1]):
            arr = values[filled, c]
            out.append(map_coordinates(arr, K.T, order=1, mode="nearest"))
        return np.stack(out, axis=1)

    @property
    def _filled_index(self) -> np.ndarray:
        if getattr(self, "_filled", None) is None:
            inactive = self._box < 0
            if np.any(inactive):
                _, inds = distance_transform_edt(inactive, return_indices=True)
                self._filled = self._box[tuple(inds)]
            else:
                self._filled = self._box.copy()
        return self._filled


def _finish_grid(g: Grid) -> Grid:
    P, q = g.size, len(g.steps)
    nb = np.empty((P, q), dtype=np.int64)
    for s, step in enumerate(g.steps):
        nb[:, s] = g.lookup(g.index + step)
    g.neighbors = nb
    rows = np.repeat(np.arange(P), q)
    cols = nb.ravel()
    ok = cols >= 0
    rows, cols = rows[ok], cols[ok]
    c = g.weight / g.volume
    A = sparse.csr_matrix((np.full(len(rows), c), (rows, cols)), shape=(P, P))
    deg = np.asarray(A.sum(axis=1)).ravel()
    g.laplacian = (A - sparse.diags(deg)).tocsr()
    g.laplacian.sum_duplicates()
    g._edges = (rows, cols)
    return g


def discretize(domain: dict, h: float, group: ReflectionGroup | None = None, lattice_kind: str | None = None) -> Grid:
    """Build a ball or periodic-cell grid.

    ``domain`` is ``{"kind": "ball", "R": R, "dim": n}`` or
    ``{"kind": "cell", "group": G}``; the lattice is hexagonal when the
    point group needs it.
    """
    if not h > 0:
        raise BadSpacing("h must be positive")
    kind = domain["kind"]
    if kind == "cell":
        group = domain.get("group", group)
        if group is None or not group.is_discrete:
            raise BadSpacing("a cell grid needs a discrete group")
        n = group.dim
    else:
        n = int(domain.get("dim", group.dim if group is not None else 1))
    lk = lattice_kind or lattice_kind_for(group, n)
    basis = h * (HEX_BASIS if lk == "hex" else np.eye(n))
    steps, weight, volume = _stencil(lk, n, h)
    Binv = np.linalg.inv(basis)

    if kind == "ball":
        R = float(domain["R"])
        if R < 2 * h:
            raise BadSpacing("need R >= 2h")
        # integer box covering the ball
        span = np.ceil(R * np.abs(Binv).sum(axis=1)).astype(int) + 1
        axes = [np.arange(-s, s + 1) for s in span]
        K = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
        X = K @ basis.T
        keep = np.linalg.norm(X, axis=1) <= R + 1e-12
        g = Grid(n, h, "ball", lk, basis, K[keep], X[keep], steps, weight, volume, R=R)
        lo = -span
        box = np.full(tuple(2 * span + 1), -1, dtype=np.int64)
        box[tuple((K[keep] - lo).T)] = np.arange(int(keep.sum()))
        g._box_lo, g._box = lo, box
        return _finish_grid(g)

    if kind != "cell":
        raise ValueError(f"unknown domain kind {kind!r}")
    L = np.asarray(group.lattice, dtype=float)
    Mf = Binv @ L.T
    M = _integer_matrix(Mf, tol=1e-6)
    if M is None:
        raise BadSpacing("lattice vectors are not integer combinations of the grid steps")
    det = int(round(np.linalg.det(M)))
    if det == 0:
        raise BadSpacing("degenerate superlattice")
    adj = np.rint(np.linalg.inv(M) * det).astype(np.int64)
    if det < 0:
        det, adj = -det, -adj
    g = Grid(n, h, "cell", lk, basis, None, None, steps, weight, volume, lattice=L, M=M)
    g._adj, g._det = adj, det
    # canonical representatives live in the parallelepiped spanned by M
    corners = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T @ M.T
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    axes = [np.arange(l, u + 1) for l, u in zip(lo, hi)]
    K = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    Kc = g._canonical(K)
    reps = np.unique(Kc, axis=0)
    if len(reps) != det:
        raise BadSpacing("failed to enumerate the cell nodes")
    # choose for each node the translate nearest the origin; ties broken lexicographically
    shifts = np.stack(np.meshgrid(*[[-1, 0, 1]] * n, indexing="ij"), -1).reshape(-1, n) @ M.T
    cand = reps[:, None, :] + shifts[None, :, :]
    d2 = np.sum((cand @ basis.T) ** 2, axis=2)
    best = []
    for i in range(len(reps)):
        dmin = d2[i].min()
        tied = cand[i][d2[i] <= dmin + 1e-9 * max(1.0, dmin)]
        best.append(tied[np.lexsort(tied.T[::-1])[0]])
    Kn = np.array(best)
    Kn = Kn[np.lexsort(Kn.T[::-1])]
    g.index = Kn
    g.coords = Kn @ basis.T
    box = np.full(tuple(hi - lo + 1), -1, dtype=np.int64)
    box[tuple((g._canonical(Kn) - lo).T)] = np.arange(det)
    g._box_lo, g._box = lo, box
    return _finish_grid(g)


@dataclass(eq=False)
class Field:
    grid: Grid
    values: np.ndarray

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


# -- problem setup -----------------------------------------------------------

def _threads() -> int:
    env = os.environ.get("EQUIFLOW_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = max(1, min(n, int(env)))
        except ValueError:
            pass
    return n


@dataclass(eq=False)
class Problem:
    """Grid, homomorphism, potential and the derived group action on nodes."""

    grid: Grid
    f: HomomorphismSpec
    potential: Potential
    scale_c: float
    regions: Regions
    perms: Optional[np.ndarray]  # (|G0|, P) node permutations, or None when interpolating
    images: np.ndarray  # (|G0|, m, m) matrices f(g)
    F_mask: np.ndarray

    @property
    def Phi(self):
        return self.regions.Phi

    @property
    def node_compatible(self) -> bool:
        return self.perms is not None

    @property
    def a(self):
        return self.potential.a


def _F_closure_mask(grid: Grid, G: ReflectionGroup, tol: float = 1e-9) -> np.ndarray:
    X = grid.coords
    mask = G.in_closure(X, tol)
    if grid.kind == "cell":
        for t in G.translation_vectors(float(np.linalg.norm(grid.lattice, axis=1).max()) + 1e-9):
            mask |= G.in_closure(X + t, tol)
    return mask


def make_problem(grid: Grid, f: HomomorphismSpec, potential: Potential, scale_c: float = 1.0, Phi=None) -> Problem:
    G = f.source
    if grid.kind == "cell":
        if not G.is_discrete:
            raise ValueError("a cell grid needs a discrete source group")
        if not lattice_acts_trivially(f):
            raise ValueError("periodic solutions need f(t) = I on the lattice")
    elif G.is_discrete:
        raise ValueError("ball grids need a finite source group")
    if potential.group.order != f.target.order:
        raise ValueError("the potential's symmetry group must be the target of f")
    regions = build_regions(f, potential.a, Phi)
    images = f.target.matrices[f.point_images]
    perms = []
    for A in G.matrices:
        p = grid.locate(grid.coords @ A.T)
        if np.any(p < 0):
            perms = None
            break
        perms.append(p)
    if perms is not None:
        perms = np.stack(perms)
    return Problem(grid, f, potential, float(scale_c), regions, perms, images, _F_closure_mask(grid, G))


def _group_terms(problem: Problem, values: np.ndarray):
    """``f(g)^T u(g x)`` for every point-group element."""
    G = problem.f.source
    grid = problem.grid

    def term(k):
        A, F = G.matrices[k], problem.images[k]
        if problem.perms is not None:
            moved = values[problem.perms[k]]
        else:
            moved = grid.sample(values, grid.coords @ A.T)
        return moved @ F

    workers = min(_threads(), G.order)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(term, range(G.order)))
    return [term(k) for k in range(G.order)]


def symmetrize(field: Field, problem: Problem) -> Field:
    """Average ``f(g)^{-1} u(g x)`` over the point group."""
    terms = _group_terms(problem, field.values)
    acc = np.zeros_like(field.values)
    for t in terms:  # fixed summation order keeps results bit-reproducible
        acc += t
    return Field(field.grid, acc / len(terms))


def equivariance_residual(field: Field, problem: Problem) -> float:
    """``max |u(g x) - f(g) u(x)|`` over the point group and all nodes."""
    terms = _group_terms(problem, field.values)
    return float(max(np.abs(t - field.values).max() for t in terms))


def positivity_violation(field: Field, problem: Problem) -> float:
    """``max_{x in F-closure} d(u(x), Phi-closure)``."""
    u = field.values[problem.F_mask]
    if len(u) == 0:
        return 0.0
    return float(distance_to_Phi_closure(problem.Phi, u).max())


def _extend_from_F(values: np.ndarray, problem: Problem) -> np.ndarray:
    """``u(x) = f(g) P_Phi(u(x_F))`` with ``x = g x_F``."""
    grid, G = problem.grid, problem.f.source
    y, idx, shift = G.fold_points(grid.coords)
    node = grid.locate(y)
    if np.all(node >= 0):
        base = values[node]
    else:
        base = grid.sample(values, y)
    base = project_onto_Phi_closure(problem.Phi, base)
    F = problem.f.target.matrices[problem.f.image_indices(idx, shift if G.is_discrete else None)]
    return np.einsum("pij,pj->pi", F, base)


def init_field(problem: Problem, mode: str = "minima_interpolation", seed: int = 0, path: str | None = None, sweeps: int = 5) -> Field:
    """Initial data in the discrete admissible class.

    Modes: ``minima_interpolation`` (``u(x) = f(g) a`` on ``g F``, then a
    few diffusion sweeps), ``seeded_random`` and ``from_file``.
    """
    grid, f, a = problem.grid, problem.f, problem.potential.a
    G = f.source
    if mode == "minima_interpolation":
        _, idx, shift = G.fold_points(grid.coords)
        F = f.target.matrices[f.image_indices(idx, shift if G.is_discrete else None)]
        u = F @ a
        tau = 0.5 / np.abs(grid.laplacian.diagonal()).max()
        for _ in range(sweeps):
            u = u + tau * grid.apply(u)
    elif mode == "seeded_random":
        rng = np.random.default_rng(seed)
        u = rng.normal(size=(grid.size, len(a))) * (0.5 * np.linalg.norm(a))
    elif mode == "from_file":
        return Field(grid, read_field_csv(path, grid))
    else:
        raise ValueError(f"unknown init mode {mode!r}")
    fld = symmetrize(Field(grid, u), problem)
    vals = _extend_from_F(fld.values, problem)
    if problem.node_compatible:
        vals = symmetrize(Field(grid, vals), problem).values
    return Field(grid, vals)


# -- time stepping -------------------------------------------------------------

def stable_dt(grid: Grid, potential: Potential, scale_c: float, radius: float, safety: float = 1.0) -> tuple[float, float]:
    """``dt = 0.2 h^2 / (n + safety * c * L_W * h^2)`` with ``L_W`` sampled on ``|u| <= radius``."""
    LW = potential.lipschitz_bound(radius)
    h2 = grid.h ** 2
    return 0.2 * h2 / (grid.dim + safety * scale_c * LW * h2), LW


def rate(field: Field, potential: Potential, scale_c: float) -> np.ndarray:
    """``u_t = L u - c W_u(u)``."""
    return field.grid.apply(field.values) - scale_c * potential.gradient(field.values)


def step(field: Field, dt: float, scale_c: float, potential: Potential) -> Field:
    """One explicit Euler step."""
    v = field.values + dt * rate(field, potential, scale_c)
    if not np.all(np.isfinite(v)) or np.abs(v).max() > 10.0 * potential.M:
        raise Blowup("|u| exceeded 10 M; the time step is too large")
    return Field(field.grid, v)


def energy(field: Field, potential: Potential, scale_c: float = 1.0) -> float:
    return field.grid.energy(field.values, potential, scale_c)


def pde_residual(field: Field, potential: Potential, scale_c: float = 1.0, shells: int = 2) -> float:
    """Interior sup-norm of ``Delta_h u - c W_u(u)``."""
    r = rate(field, potential, scale_c)
    mask = field.grid.interior_mask(shells)
    return float(np.abs(r[mask]).max()) if np.any(mask) else 0.0


@dataclass
class FlowConfig:
    tol_rate: float = 1e-6
    max_steps: int = 200000
    k_sym: int = 1
    k_log: int = 100
    dt_safety: float = 1.0
    monotone_rtol: float | None = None  # default: 1e-12 on node-compatible grids, 1e-6 otherwise
    track_positivity: bool = True
    track_equivariance: bool = False


@dataclass
class FlowResult:
    field: Field
    energy_trace: list
    final_step_norm: float
    pde_residual: float
    iterations: int
    converged: bool
    dt: float
    L_W: float
    positivity_trace: list = field(default_factory=list)
    equivariance_trace: list = field(default_factory=list)
    interpolated: bool = False
    max_energy_rise: float = 0.0


def run_flow(problem: Problem, init: Field | None = None, config: FlowConfig | None = None) -> FlowResult:
    """Gradient flow until ``sup |u_t| < tol_rate`` or ``max_steps``."""
    cfg = config or FlowConfig()
    pot, c = problem.potential, problem.scale_c
    fld = init if init is not None else init_field(problem)
    u = fld.values.copy()
    grid = problem.grid
    rtol = cfg.monotone_rtol
    if rtol is None:
        rtol = 1e-12 if problem.node_compatible else 1e-6

    def radius_of(v):
        return 1.05 * max(float(np.abs(v).max(initial=0.0)) if v.size else 0.0, float(np.linalg.norm(pot.orbit, axis=1).max()))

    radius = radius_of(np.linalg.norm(u, axis=1))
    dt, LW = stable_dt(grid, pot, c, radius, cfg.dt_safety)
    limit = 10.0 * pot.M
    J = grid.energy(u, pot, c)
    trace = [(0, J)]
    pos_trace, eq_trace = [], []
    if cfg.track_positivity:
        pos_trace.append((0, positivity_violation(Field(grid, u), problem)))
    if cfg.track_equivariance:
        eq_trace.append((0, equivariance_residual(Field(grid, u), problem)))
    max_rise = 0.0
    it = 0
    sup = np.inf
    converged = False
    L = grid.laplacian
    while it < cfg.max_steps:
        g = L @ u - c * pot.gradient(u)
        sup = float(np.abs(g).max()) if g.size else 0.0
        if sup < cfg.tol_rate:
            converged = True
            break
        u = u + dt * g
        it += 1
        if cfg.k_sym and it % cfg.k_sym == 0:
            u = symmetrize(Field(grid, u), problem).values
        if it % cfg.k_log == 0:
            amax = float(np.abs(u).max())
            if not np.isfinite(amax) or amax > limit:
                raise Blowup(f"|u| exceeded 10 M at step {it}")
            Jn = grid.energy(u, pot, c)
            rise = Jn - J
            max_rise = max(max_rise, rise / (1.0 + abs(J)))
            if rise > rtol * (1.0 + abs(J)) * cfg.k_log:
                raise NonMonotone(f"energy rose by {rise:.3e} at step {it}; refine h")
            J = Jn
            trace.append((it, J))
            if cfg.track_positivity:
                pos_trace.append((it, positivity_violation(Field(grid, u), problem)))
            if cfg.track_equivariance:
                eq_trace.append((it, equivariance_residual(Field(grid, u), problem)))
            umax = float(np.linalg.norm(u, axis=1).max())
            if umax > radius:
                radius = radius_of(np.array([umax]))
                dt, LW = stable_dt(grid, pot, c, radius, cfg.dt_safety)
    out = Field(grid, u)
    J = grid.energy(u, pot, c)
    if trace[-1][0] != it:
        trace.append((it, J))
        if cfg.track_positivity:
            pos_trace.append((it, positivity_violation(out, problem)))
    return FlowResult(
        field=out,
        energy_trace=trace,
        final_step_norm=sup,
        pde_residual=pde_residual(out, pot, c),
        iterations=it,
        converged=converged,
        dt=dt,
        L_W=LW,
        positivity_trace=pos_trace,
        equivariance_trace=eq_trace,
        interpolated=not problem.node_compatible,
        max_energy_rise=max_rise,
    )


def rescale(field: Field, R: float) -> Field:
    """``v_R(y) = u_R(y / R)``: the same values on a grid with spacing ``h R``."""
    g = field.grid
    ng = copy.copy(g)
    ng.h = g.h * R
    ng.basis = g.basis * R
    ng.coords = g.coords * R
    ng.R = g.R * R
    if g.lattice is not None:
        ng.lattice = g.lattice * R
    _, ng.weight, ng.volume = _stencil(g.lattice_kind, g.dim, ng.h)
    A = g.laplacian * (1.0 / (R * R))
    ng.laplacian = A.tocsr()
    return Field(ng, field.values.copy())


# -- field files -----------------------------------------------------------------

def write_field_csv(field: Field, path: str) -> None:
    """Header ``x1..xn,u1..um``; one node per row in lexicographic order."""
    n, m = field.grid.dim, field.m
    header = [f"x{i + 1}" for i in range(n)] + [f"u{j + 1}" for j in range(m)]
    data = np.hstack([field.grid.coords, field.values])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_field_csv(path: str, grid: Grid | None = None):
    """Values from a CSV dump; checks node coordinates against ``grid`` when given."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise FileFormat(f"cannot read {path}: {e}") from e
    if not rows:
        raise FileFormat("empty field file")
    header = rows[0]
    xs = [h for h in header if h.startswith("x")]
    us = [h for h in header if h.startswith("u")]
    if not xs or not us or header != xs + us:
        raise FileFormat(f"bad header {header!r}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as e:
        raise FileFormat(f"non-numeric entry: {e}") from e
    if data.ndim != 2 or data.shape[1] != len(header):
        raise FileFormat("ragged rows")
    X, U = data[:, : len(xs)], data[:, len(xs):]
    if grid is None:
        return X, U
    if X.shape != grid.coords.shape or np.abs(X - grid.coords).max() > 1e-9:
        raise FileFormat("node coordinates do not match the grid")
    return U
