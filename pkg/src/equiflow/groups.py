"""Finite and discrete reflection groups acting on R^d.

A group is stored through its point group (the linear parts, fully
enumerated), the walls of a chosen fundamental domain ``F`` and, for the
discrete (crystallographic) kind, a translation lattice.  Every element of
a discrete group is ``t o g`` with ``t`` a lattice translation and ``g`` a
point-group element.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, nnls

ATOL = 1e-9
ORTHO_TOL = 1e-10


class ClosureOverflow(RuntimeError):
    """The generated group exceeded ``max_order`` elements."""


class FoldDivergence(RuntimeError):
    """Folding a point into the fundamental domain did not terminate."""


class UnknownCatalogName(ValueError):
    pass


def _as_matrix(a, d=None) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    return a


@dataclass(frozen=True, eq=False)
class IsometryElement:
    """The affine isometry ``x -> linear @ x + shift``."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        lin = _as_matrix(self.linear)
        d = lin.shape[0]
        if lin.shape != (d, d):
            raise ValueError(f"linear part must be square, got {lin.shape}")
        if not np.allclose(lin.T @ lin, np.eye(d), atol=ORTHO_TOL):
            raise ValueError("linear part is not orthogonal")
        sh = np.zeros(d) if self.shift is None else np.array(self.shift, dtype=float).reshape(d)
        lin.setflags(write=False)
        sh.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "shift", sh)

    @classmethod
    def identity(cls, d: int) -> "IsometryElement":
        return cls(np.eye(d), np.zeros(d))

    @classmethod
    def translation(cls, v) -> "IsometryElement":
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return cls(np.eye(v.size), v)

    @classmethod
    def reflection(cls, wall: "Wall") -> "IsometryElement":
        n = wall.normal
        return cls(np.eye(n.size) - 2.0 * np.outer(n, n), 2.0 * wall.offset * n)

    @property
    def dim(self) -> int:
        return self.linear.shape[0]

    @property
    def is_linear(self) -> bool:
        return bool(np.all(np.abs(self.shift) < ATOL))

    @property
    def is_reflection(self) -> bool:
        """True for an affine reflection (involution fixing a hyperplane)."""
        d = self.dim
        if not np.allclose(self.linear @ self.linear, np.eye(d), atol=ATOL):
            return False
        if fixed_subspace(self).dim != d - 1:
            return False
        # a glide part along the mirror would leave no fixed points
        return bool(np.allclose(self.linear @ self.shift, -self.shift, atol=ATOL))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.linear.T + self.shift

    def __matmul__(self, other: "IsometryElement") -> "IsometryElement":
        return IsometryElement(self.linear @ other.linear, self.linear @ other.shift + self.shift)

    def inverse(self) -> "IsometryElement":
        lt = self.linear.T
        return IsometryElement(lt, -lt @ self.shift)

    def isclose(self, other: "IsometryElement", atol: float = ATOL) -> bool:
        return bool(
            np.abs(self.linear - other.linear).max() < atol
            and np.abs(self.shift - other.shift).max() < atol
        )

    def key(self) -> tuple:
        """Hashable key from entries rounded to 12 decimals."""
        vals = np.concatenate([self.linear.ravel(), self.shift]) + 0.0
        return tuple(np.round(vals, 12) + 0.0)

    def mirror(self) -> "Wall":
        """The fixed hyperplane of a reflection."""
        if not self.is_reflection:
            raise ValueError("element is not a reflection")
        w, v = np.linalg.eigh(0.5 * (self.linear + self.linear.T))
        n = _canonical_sign(v[:, np.argmin(w)])
        return Wall(n, 0.5 * float(n @ self.shift))

    def __repr__(self):
        return f"IsometryElement(linear={self.linear.round(6).tolist()}, shift={self.shift.round(6).tolist()})"


def _canonical_sign(n: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(n) > 1e-9)
    if idx.size and n[idx[0]] < 0:
        n = -n
    return n


@dataclass(frozen=True, eq=False)
class Wall:
    """The hyperplane ``{x : <x, normal> = offset}``; ``normal`` points out of the domain."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        n = np.atleast_1d(np.array(self.normal, dtype=float))
        norm = np.linalg.norm(n)
        if norm == 0:
            raise ValueError("wall normal must be nonzero")
        if abs(norm - 1.0) > 1e-12:
            n = n / norm
            object.__setattr__(self, "offset", float(self.offset) / norm)
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def value(self, x) -> np.ndarray:
        """Signed distance; negative on the domain side."""
        return np.asarray(x, dtype=float) @ self.normal - self.offset

    def transformed(self, g: IsometryElement) -> "Wall":
        n = g.linear @ self.normal
        return Wall(n, self.offset + float(n @ g.shift))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace given by an orthonormal basis (rows)."""

    basis: np.ndarray
    ambient: int

    def __post_init__(self):
        b = np.array(self.basis, dtype=float).reshape(-1, self.ambient)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def project(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.projector()

    def equals(self, other: "Subspace", tol: float = ATOL) -> bool:
        if self.dim != other.dim or self.ambient != other.ambient:
            return False
        if self.dim == 0:
            return True
        r1 = np.abs(other.basis - other.basis @ self.projector()).max()
        r2 = np.abs(self.basis - self.basis @ other.projector()).max()
        return bool(max(r1, r2) < tol)

    @classmethod
    def span(cls, vectors, ambient: int) -> "Subspace":
        v = np.array(vectors, dtype=float).reshape(-1, ambient)
        if v.shape[0] == 0:
            return cls(np.zeros((0, ambient)), ambient)
        u, s, vt = np.linalg.svd(v, full_matrices=False)
        rank = int(np.sum(s > 1e-10))
        return cls(vt[:rank], ambient)

    @classmethod
    def intersection_of_walls(cls, normals, ambient: int) -> "Subspace":
        """Common zero set of linear forms; the empty family gives the whole space."""
        normals = np.array(normals, dtype=float).reshape(-1, ambient)
        if normals.shape[0] == 0:
            return cls(np.eye(ambient), ambient)
        return cls(null_space(normals, rcond=1e-10).T, ambient)


def fixed_subspace(t: IsometryElement) -> Subspace:
    """Orthonormal basis of ``ker(linear - I)``."""
    d = t.dim
    basis = null_space(t.linear - np.eye(d), rcond=1e-9).T
    return Subspace(basis, d)


def _lookup(mats: np.ndarray, table: np.ndarray, atol: float = ATOL) -> np.ndarray:
    """Index in ``table`` of every matrix in ``mats``; -1 when absent."""
    mats = np.asarray(mats, dtype=float)
    single = mats.ndim == 2
    if single:
        mats = mats[None]
    out = np.full(mats.shape[0], -1, dtype=int)
    chunk = max(1, 200000 // max(1, table.shape[0] * table[0].size))
    for start in range(0, mats.shape[0], chunk):
        block = mats[start:start + chunk]
        diff = np.abs(block[:, None] - table[None]).max(axis=(2, 3))
        hit = diff < atol
        found = hit.any(axis=1)
        out[start:start + chunk] = np.where(found, hit.argmax(axis=1), -1)
    return out[0] if single else out


@dataclass(frozen=True, eq=False)
class ReflectionGroup:
    """A finite or discrete reflection group.

    ``elements`` holds the point group (the whole group for the finite
    kind), identity first.  ``generators[i]`` is the reflection across
    ``walls[i]``, and ``F = {x : <x, n_i> < c_i}``.
    """

    dim: int
    kind: str
    walls: tuple
    generators: tuple
    elements: tuple
    lattice: np.ndarray | None = None
    name: str = ""

    @property
    def walls_F(self) -> tuple:
        return self.walls

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    @property
    def order(self) -> int:
        """Order of the point group (of the group itself when finite)."""
        return len(self.elements)

    @cached_property
    def matrices(self) -> np.ndarray:
        m = np.stack([g.linear for g in self.elements])
        m.setflags(write=False)
        return m

    @cached_property
    def wall_normals(self) -> np.ndarray:
        return np.stack([w.normal for w in self.walls])

    @cached_property
    def wall_offsets(self) -> np.ndarray:
        return np.array([w.offset for w in self.walls])

    @cached_property
    def mult(self) -> np.ndarray:
        """``mult[i, j]`` is the index of ``elements[i] @ elements[j]``."""
        m = self.matrices
        prods = np.einsum("aij,bjk->abik", m, m).reshape(-1, self.dim, self.dim)
        idx = _lookup(prods, m).reshape(len(m), len(m))
        if np.any(idx < 0):
            raise ClosureOverflow("element list is not closed under composition")
        return idx

    @cached_property
    def inv(self) -> np.ndarray:
        return _lookup(np.transpose(self.matrices, (0, 2, 1)), self.matrices)

    @cached_property
    def generator_point_index(self) -> np.ndarray:
        return _lookup(np.stack([g.linear for g in self.generators]), self.matrices)

    @cached_property
    def reflection_indices(self) -> np.ndarray:
        """Point-group reflections (linear parts), in element order."""
        return np.array([i for i, g in enumerate(self.elements) if g.is_reflection], dtype=int)

    def index_of(self, linear) -> int | np.ndarray:
        return _lookup(np.asarray(linear, dtype=float), self.matrices)

    def element(self, index: int, shift=None) -> IsometryElement:
        return IsometryElement(self.matrices[index], None if shift is None else shift)

    def with_walls(self, walls: Sequence[Wall]) -> "ReflectionGroup":
        """Same group with another fundamental domain."""
        walls = tuple(walls)
        return replace(self, walls=walls, generators=tuple(IsometryElement.reflection(w) for w in walls))

    def chamber(self, index: int) -> tuple:
        """Walls of ``elements[index] F`` (finite groups)."""
        g = self.elements[index]
        return tuple(w.transformed(g) for w in self.walls)

    # -- geometry -------------------------------------------------------

    def wall_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.wall_normals.T - self.wall_offsets

    def in_closure(self, x, tol: float = ATOL) -> np.ndarray:
        return np.all(self.wall_values(x) <= tol, axis=-1)

    def in_open(self, x, tol: float = ATOL) -> np.ndarray:
        return np.all(self.wall_values(x) < -tol, axis=-1)

    def lattice_reduce(self, x):
        """Subtract the nearest lattice vector; returns ``(x - t, t)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.lattice is None:
            return x.copy(), np.zeros_like(x)
        coef = np.rint(x @ np.linalg.pinv(self.lattice))
        t = coef @ self.lattice
        return x - t, t

    def fold_points(self, x, max_iter: int = 10000):
        """Fold many points into ``F``-closure.

        Returns ``(x_F, index, shift)`` with ``g = (elements[index], shift)``
        satisfying ``g(x_F) = x``.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y, shift = self.lattice_reduce(x)
        idx = np.zeros(len(y), dtype=int)
        normals, offsets = self.wall_normals, self.wall_offsets
        gen_idx = self.generator_point_index
        gen_shift = np.stack([g.shift for g in self.generators])
        mats = self.matrices
        for _ in range(max_iter):
            viol = y @ normals.T - offsets
            j = np.argmax(viol, axis=1)
            vmax = viol[np.arange(len(y)), j]
            act = np.flatnonzero(vmax > ATOL)
            if act.size == 0:
                return y, idx, shift
            ja = j[act]
            y[act] -= 2.0 * vmax[act, None] * normals[ja]
            shift[act] += np.einsum("pij,pj->pi", mats[idx[act]], gen_shift[ja])
            idx[act] = self.mult[idx[act], gen_idx[ja]]
        raise FoldDivergence(f"fold did not terminate after {max_iter} reflections")

    def fold(self, x):
        """Fold one point: returns ``(x_F, g)`` with ``g(x_F) = x``."""
        y, idx, shift = self.fold_points(np.asarray(x, dtype=float)[None])
        return y[0], self.element(int(idx[0]), shift[0])

    def translation_vectors(self, radius: float) -> np.ndarray:
        """Lattice vectors of norm at most ``radius``."""
        if self.lattice is None:
            return np.zeros((1, self.dim))
        L = self.lattice
        smin = np.linalg.svd(L, compute_uv=False).min()
        kmax = int(np.ceil(radius / smin)) + 1
        rng = np.arange(-kmax, kmax + 1)
        coefs = np.stack(np.meshgrid(*[rng] * L.shape[0], indexing="ij"), -1).reshape(-1, L.shape[0])
        vecs = coefs @ L
        keep = np.linalg.norm(vecs, axis=1) <= radius + 1e-9
        vecs = vecs[keep]
        order = np.lexsort(vecs.T[::-1])
        vecs = vecs[order]
        return vecs[np.argsort(np.linalg.norm(vecs, axis=1), kind="stable")]

    def lattice_coordinates(self, t) -> np.ndarray:
        """Integer coordinates of lattice vectors ``t`` in the stored basis."""
        c = np.asarray(t, dtype=float) @ np.linalg.pinv(self.lattice)
        ci = np.rint(c)
        if np.abs(ci @ self.lattice - t).max(initial=0.0) > 1e-7:
            raise ValueError("vector is not in the lattice")
        return ci.astype(int)

    def reflections(self, radius: float = 0.0) -> list[IsometryElement]:
        """All reflections of the group; hyperplanes within ``radius`` of 0 when discrete."""
        out = []
        for i in self.reflection_indices:
            g = self.elements[i]
            n = g.mirror().normal
            if self.lattice is None:
                out.append(g)
                continue
            for t in self.translation_vectors(2.0 * radius):
                if np.linalg.norm(t - (t @ n) * n) < 1e-9:
                    out.append(IsometryElement(g.linear, t))
        return out

    def cell_diameter(self) -> float:
        if self.lattice is None:
            return 0.0
        return float(np.linalg.norm(self.lattice, axis=1).sum())

    def __repr__(self):
        tail = "" if self.lattice is None else f", lattice={self.lattice.round(6).tolist()}"
        return f"ReflectionGroup({self.name or self.kind}, dim={self.dim}, |G0|={self.order}{tail})"


def _closure(mats: list[np.ndarray], d: int, max_order: int) -> list[np.ndarray]:
    """Breadth-first closure of linear parts, identity first."""
    elems = [np.eye(d)]
    keys = {tuple(np.round(np.eye(d).ravel(), 9) + 0.0): 0}
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for m in mats:
                p = elems[i] @ m
                k = tuple(np.round(p.ravel(), 9) + 0.0)
                if k in keys:
                    continue
                if _lookup(p, np.stack(elems)) >= 0:
                    continue
                if len(elems) >= max_order:
                    raise ClosureOverflow(f"closure exceeds max_order={max_order}")
                keys[k] = len(elems)
                elems.append(p)
                nxt.append(len(elems) - 1)
        frontier = nxt
    return elems


DEFAULT_SEED = np.array([1.0, 0.6180339887, 0.4142135624])


def _chamber_walls(mats: list[np.ndarray], seed: np.ndarray) -> list[Wall]:
    """Walls of the chamber containing ``seed`` (simple roots of the seed ordering)."""
    d = seed.size
    roots = []
    for m in mats:
        e = IsometryElement(m, np.zeros(d))
        if not e.is_reflection:
            continue
        n = e.mirror().normal
        s = float(n @ seed)
        if abs(s) < 1e-9:
            raise ValueError("seed direction lies on a reflection hyperplane")
        roots.append(-n if s < 0 else n)
    positive = np.array(roots).reshape(-1, d)
    walls = []
    for i, r in enumerate(positive):
        others = np.delete(positive, i, axis=0)
        if len(others):
            _, res = nnls(others.T, r)
            if res < 1e-9:
                continue
        walls.append(Wall(-r, 0.0))
    return walls


def _interior_point(walls: Sequence[Wall], d: int):
    """A point of the open domain and its clearance, or None if the domain is empty."""
    A = np.array([np.append(w.normal, 1.0) for w in walls])
    b = np.array([w.offset for w in walls])
    res = linprog(
        np.append(np.zeros(d), -1.0),
        A_ub=A,
        b_ub=b,
        bounds=[(-1e3, 1e3)] * d + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    return res.x[:d]


def _check_chamber(group: "ReflectionGroup") -> None:
    """No reflection hyperplane may cut the open domain.

    By Farkas' lemma the domain lies in ``{<m, x> <= c}`` iff ``m`` is a
    nonnegative combination of wall normals with offsets summing to at most
    ``c``; ``m, c`` are oriented by an interior point.
    """
    d = group.dim
    x0 = _interior_point(group.walls, d)
    N, c = group.wall_normals, group.wall_offsets
    if group.is_discrete:
        lo, hi = [], []
        for k in range(d):
            for sgn, out in ((1.0, hi), (-1.0, lo)):
                e = np.zeros(d)
                e[k] = -sgn
                r = linprog(e, A_ub=N, b_ub=c, bounds=[(None, None)] * d, method="highs")
                if r.status != 0:
                    raise ValueError("fundamental domain of a discrete group must be bounded")
                out.append(-r.fun * sgn)
        radius = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))) + 1e-6
        refl = group.reflections(radius)
    else:
        refl = [group.elements[i] for i in group.reflection_indices]
    for r in refl:
        w = r.mirror()
        delta = w.value(x0)
        if abs(delta) < 1e-9:
            raise ValueError("a reflection hyperplane crosses the fundamental domain")
        m, cm = (w.normal, w.offset) if delta < 0 else (-w.normal, -w.offset)
        if not group.is_discrete:
            _, res = nnls(N.T, m)
            ok = res < 1e-9
        else:
            lp = linprog(c, A_eq=N.T, b_eq=m, bounds=[(0, None)] * len(c), method="highs")
            ok = lp.status == 0 and lp.fun <= cm + 1e-9
        if not ok:
            raise ValueError("a reflection hyperplane crosses the fundamental domain")


def generate_closure(
    generators: Iterable[IsometryElement],
    max_order: int = 2000,
    lattice=None,
    walls: Sequence[Wall] | None = None,
    seed=None,
    name: str = "",
) -> ReflectionGroup:
    """Build a reflection group from generating reflections.

    Without ``walls`` the fundamental domain is the chamber containing
    ``seed`` (finite groups only); its walls then replace ``generators``.
    """
    gens = list(generators)
    if not gens:
        raise ValueError("need at least one generator")
    d = gens[0].dim
    for g in gens:
        if not (g @ g).isclose(IsometryElement.identity(d)):
            raise ValueError("generators must be involutions")
    lin = [g.linear for g in gens]
    elems = _closure(lin, d, max_order)
    kind = "finite"
    lat = None
    if lattice is not None:
        kind = "discrete"
        lat = np.array(lattice, dtype=float).reshape(-1, d)
        lat.setflags(write=False)
    elif any(not g.is_linear for g in gens):
        raise ValueError("affine generators require a lattice")
    if walls is None:
        if kind == "discrete":
            walls = [g.mirror() for g in gens]
            sd = 1e-3 * (DEFAULT_SEED[:d] if seed is None else np.asarray(seed, dtype=float))
            walls = [w if w.value(sd) < 0 else Wall(-w.normal, -w.offset) for w in walls]
        else:
            sd = DEFAULT_SEED[:d] if seed is None else np.asarray(seed, dtype=float)
            walls = _chamber_walls(elems, sd)
    walls = tuple(walls)
    if _interior_point(walls, d) is None:
        raise ValueError("fundamental domain is empty")
    wall_gens = tuple(IsometryElement.reflection(w) for w in walls)
    group = ReflectionGroup(
        dim=d,
        kind=kind,
        walls=walls,
        generators=wall_gens,
        elements=tuple(IsometryElement(m, np.zeros(d)) for m in elems),
        lattice=lat,
        name=name,
    )
    if kind == "discrete":
        for g in group.generators:
            group.lattice_coordinates(g.shift)
    # forces the composition table; raises if the point group is not closed
    group.mult
    _check_chamber(group)
    return group


def stabilizer_indices(group: ReflectionGroup, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    moved = np.linalg.norm(group.matrices @ a - a, axis=1)
    return np.flatnonzero(moved < ATOL)


def stabilizer(group: ReflectionGroup, a) -> list[IsometryElement]:
    """Elements fixing ``a``."""
    return [group.elements[i] for i in stabilizer_indices(group, a)]


def orbit(group: ReflectionGroup, a) -> np.ndarray:
    """Distinct images of ``a`` in order of first appearance."""
    pts = group.matrices @ np.asarray(a, dtype=float)
    out = []
    for p in pts:
        if not any(np.linalg.norm(p - q) < 1e-9 for q in out):
            out.append(p)
    return np.array(out)


# -- catalog ------------------------------------------------------------

def rotation2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def dihedral_element(n: int, p: int, reflect: bool) -> np.ndarray:
    """``r_n^p`` or ``r_n^p s`` with ``s`` the reflection in the x1 axis."""
    r = rotation2(2 * np.pi * p / n)
    return r @ np.diag([1.0, -1.0]) if reflect else r


def _from_walls(walls, lattice=None, name="", max_order=2000):
    walls = [Wall(n, c) for n, c in walls]
    return generate_closure(
        [IsometryElement.reflection(w) for w in walls],
        max_order=max_order,
        lattice=lattice,
        walls=walls,
        name=name,
    )


def dihedral(n: int, dim: int = 2) -> ReflectionGroup:
    """``D_n`` with ``F = {r e^{it} : 0 < t < pi/n}``; ``dim=1`` only for ``n=1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if dim == 1:
        if n != 1:
            raise ValueError("only D_1 acts on the line")
        return _from_walls([((-1.0,), 0.0)], name="D1")
    if dim != 2:
        raise ValueError("dihedral groups act on R^1 or R^2")
    walls = [((0.0, -1.0), 0.0)]
    if n > 1:
        t = np.pi / n
        walls.append(((-np.sin(t), np.cos(t)), 0.0))
    return _from_walls(walls, name=f"D{n}")


S2 = 1 / np.sqrt(2)
S3 = np.sqrt(3)


def tetrahedral() -> ReflectionGroup:
    # chamber {x2 > x1 > |x3|}: walls OA1A2, OA1A4, OA2A3
    return _from_walls(
        [((S2, -S2, 0.0), 0.0), ((-S2, 0.0, S2), 0.0), ((-S2, 0.0, -S2), 0.0)],
        name="tetra",
    )


def cubic() -> ReflectionGroup:
    # chamber {x3 > x1 > x2 > 0}
    return _from_walls(
        [((S2, 0.0, -S2), 0.0), ((-S2, S2, 0.0), 0.0), ((0.0, -1.0, 0.0), 0.0)],
        name="cube",
    )


def gprime() -> ReflectionGroup:
    """Triangle group with walls x2=0, x2=x1/sqrt3, x2=-sqrt3(x1-1)."""
    return _from_walls(
        [((0.0, -1.0), 0.0), ((-0.5, S3 / 2), 0.0), ((S3 / 2, 0.5), S3 / 2)],
        lattice=[[1.5, S3 / 2], [1.5, -S3 / 2]],
        name="Gprime",
    )


def kprime() -> ReflectionGroup:
    """Pyramid O, A1, (1,0,1), (0,0,2); the cell is a rhombic dodecahedron."""
    return _from_walls(
        [
            ((S2, 0.0, -S2), 0.0),
            ((-S2, S2, 0.0), 0.0),
            ((0.0, -1.0, 0.0), 0.0),
            ((S2, 0.0, S2), 2 * S2),
        ],
        lattice=[[2.0, 0.0, 2.0], [0.0, 2.0, 2.0], [0.0, -2.0, 2.0]],
        name="Kprime",
    )


def square_lattice_group() -> ReflectionGroup:
    """The group H: walls x2=0, x2=x1, x1=1; point group D4."""
    return _from_walls(
        [((0.0, -1.0), 0.0), ((-S2, S2), 0.0), ((1.0, 0.0), 1.0)],
        lattice=[[2.0, 0.0], [0.0, 2.0]],
        name="H",
    )


def interval_lattice(d: int = 1) -> ReflectionGroup:
    """Reflections in {x1 = j}; F = {0 < x1 < 1} (a slab when d > 1)."""
    e1 = np.zeros(d)
    e1[0] = 1.0
    return _from_walls([(-e1, 0.0), (e1, 1.0)], lattice=[2 * e1], name=f"interval{d}")


_CATALOG = {
    "Dn": lambda n=3, dim=2: dihedral(int(n), int(dim)),
    "tetra": tetrahedral,
    "cube": cubic,
    "Gprime": gprime,
    "Kprime": kprime,
    "H": square_lattice_group,
    "interval_lattice": lambda d=1: interval_lattice(int(d)),
}


def catalog_group(name: str, **params) -> ReflectionGroup:
    """Groups used throughout: ``Dn(n, dim)``, ``tetra``, ``cube``,
    ``Gprime``, ``Kprime``, ``H``, ``interval_lattice(d)``."""
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise UnknownCatalogName(f"unknown group {name!r}; known: {sorted(_CATALOG)}") from None
    return factory(**params)


def catalog_group_names() -> list[str]:
    return list(_CATALOG)


# -- root systems and the cone partition --------------------------------

class NotInCone(ValueError):
    """The direction is not a nonnegative combination of the base roots."""


@dataclass(frozen=True, eq=False)
class ConeDecomposition:
    """``rho = sum_i coefficients[i] * directions[i]``."""

    directions: np.ndarray
    coefficients: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.coefficients @ self.directions


def root_system(subgroup) -> np.ndarray:
    """Unit normals ``+-n`` of every reflection in ``subgroup``.

    ``subgroup`` is a ReflectionGroup or a sequence of elements (or
    matrices).  Rows come in pairs ``n, -n`` in element order.
    """
    if isinstance(subgroup, ReflectionGroup):
        elems = [subgroup.elements[i] for i in subgroup.reflection_indices]
    else:
        elems = [g if isinstance(g, IsometryElement) else IsometryElement(g, None) for g in subgroup]
    roots = []
    for g in elems:
        g = IsometryElement(g.linear, None)
        if not g.is_reflection:
            continue
        n = g.mirror().normal
        if any(np.linalg.norm(n - r) < 1e-9 for r in roots):
            continue
        roots.extend([n, -n])
    if not roots:
        d = elems[0].dim if elems else 0
        return np.zeros((0, d))
    return np.array(roots)


def cone_coefficients(v, generators, tol: float = 1e-9):
    """Coefficients of ``v`` in the linearly independent ``generators``, or None if outside the span."""
    V = np.atleast_2d(np.asarray(generators, dtype=float))
    coef, *_ = np.linalg.lstsq(V.T, np.asarray(v, dtype=float), rcond=None)
    if np.linalg.norm(coef @ V - v) > tol:
        return None
    return coef


def _in_cone(v, generators, tol=1e-9):
    c = cone_coefficients(v, generators, tol)
    if c is None or np.any(c < -tol):
        return None
    return c


def cone_partition(rho, base_normals, N, max_splits: int = 10000) -> ConeDecomposition:
    """Rewrite ``rho`` over roots spanning a cone that contains no other root.

    While ``C(V)`` contains a root ``nu`` outside ``V``, with
    ``nu = sum beta_i V_i``, the cone splits into the subcones obtained by
    replacing one ``V_i`` (``beta_i > 0``) by ``nu``; we continue in the
    lowest-index subcone holding ``rho``.
    """
    rho = np.asarray(rho, dtype=float)
    V = np.array(base_normals, dtype=float).reshape(-1, rho.size)
    N = np.asarray(N, dtype=float).reshape(-1, rho.size)
    if np.linalg.matrix_rank(V, tol=1e-9) < len(V):
        raise ValueError("base normals must be linearly independent")
    alpha = _in_cone(rho, V)
    if alpha is None:
        raise NotInCone("rho is not a nonnegative combination of the base normals")
    for _ in range(max_splits):
        split = None
        for nu in N:
            if np.min(np.linalg.norm(V - nu, axis=1)) < 1e-9:
                continue
            beta = _in_cone(nu, V)
            if beta is not None:
                split = (nu, beta)
                break
        if split is None:
            break
        nu, beta = split
        for i in np.flatnonzero(beta > 1e-12):
            W = V.copy()
            W[i] = nu
            c = _in_cone(rho, W)
            if c is not None:
                V, alpha = W, c
                break
        else:  # pragma: no cover - the subcones cover C(V)
            raise RuntimeError("rho escaped every subcone")
    else:
        raise RuntimeError("cone partition did not terminate")
    keep = alpha > 1e-12
    return ConeDecomposition(V[keep].copy(), alpha[keep].copy())
