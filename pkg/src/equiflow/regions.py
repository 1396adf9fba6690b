"""The sets D-cal, D, D0 and the cell C defined by a positive homomorphism.

Each set is an interior of a union of closed chambers.  Membership folds
the point into the fundamental domain and checks the recorded element
together with the reflections of the walls the folded point lies on.
Distances to the boundary are distances to the "bad" reflection
hyperplanes, those whose reflection leaves the defining subgroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from .groups import ATOL, IsometryElement, ReflectionGroup, Wall, stabilizer_indices
from .homomorphisms import HomomorphismSpec, PositivityCertificate, chamber_index, is_positive


class NotPositive(ValueError):
    pass


class OutsideD(ValueError):
    pass


def project_onto_Phi_closure(walls, u) -> np.ndarray:
    """Euclidean projection onto ``{x : <x, n_j> <= c_j}`` by active-set enumeration."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    U = np.atleast_2d(u)
    N = np.stack([w.normal for w in walls])
    c = np.array([w.offset for w in walls])
    best = U.copy()
    inside = np.all(U @ N.T - c <= 1e-12, axis=1)
    best_d = np.where(inside, 0.0, np.inf)
    k = len(walls)
    for r in range(1, k + 1):
        for S in combinations(range(k), r):
            NS = N[list(S)]
            P = np.linalg.pinv(NS @ NS.T)
            cand = U - ((U @ NS.T - c[list(S)]) @ P) @ NS
            ok = np.all(cand @ N.T - c <= 1e-10, axis=1)
            d = np.where(ok, np.linalg.norm(cand - U, axis=1), np.inf)
            better = d < best_d
            best[better] = cand[better]
            best_d[better] = d[better]
    return best[0] if single else best


def distance_to_Phi_closure(walls, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.linalg.norm(project_onto_Phi_closure(walls, u) - u, axis=-1)


@dataclass(frozen=True, eq=False)
class RegionSpec:
    """One of the sets; ``group`` is the group whose chambers tile it."""

    kind: str
    group: ReflectionGroup
    element_ok: Callable  # (point_index, shifts) -> bool array; True for chambers in the set
    reflection_ok: Callable  # (point_index, shifts) of reflections -> bool array
    walls: tuple

    def membership(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] != self.group.dim:
            X = X.reshape(-1, self.group.dim)
        y, idx, shift = self.group.fold_points(X)
        ok = self.element_ok(idx, shift)
        vals = self.group.wall_values(y)
        gens = self.group.generators
        gidx = self.group.generator_point_index
        for i, g in enumerate(gens):
            on = np.abs(vals[:, i]) <= ATOL
            if not np.any(on):
                continue
            good = self.reflection_ok(np.array([gidx[i]]), g.shift[None])[0]
            if not good:
                ok = ok & ~on
        return ok[0] if single else ok

    def __contains__(self, x) -> bool:
        return bool(self.membership(np.asarray(x, dtype=float)))

    def bad_hyperplanes(self, radius: float):
        """Normals and offsets of reflection hyperplanes within ``radius`` that bound the set."""
        G = self.group
        normals, offsets = [], []
        for r in G.reflections(radius):
            i = G.index_of(r.linear)
            if self.reflection_ok(np.array([i]), r.shift[None])[0]:
                continue
            w = r.mirror()
            normals.append(w.normal)
            offsets.append(w.offset)
        d = G.dim
        return np.array(normals).reshape(-1, d), np.array(offsets)

    def distance_to_boundary(self, x, check: bool = True) -> np.ndarray:
        """Exact distance to the boundary for points of the set."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if check and not np.all(self.membership(X)):
            raise OutsideD(f"point outside {self.kind}")
        radius = float(np.max(np.linalg.norm(X, axis=1))) + 3.0 * self.group.cell_diameter() + 1.0
        N, c = self.bad_hyperplanes(radius)
        if len(N) == 0:
            out = np.full(len(X), np.inf)
        else:
            out = np.min(np.abs(X @ N.T - c), axis=1)
        return out[0] if single else out


def distance_to_boundary_D(region: RegionSpec, x):
    return region.distance_to_boundary(x)


@dataclass(frozen=True, eq=False)
class Regions:
    Dcal: RegionSpec
    D: RegionSpec
    D0: RegionSpec
    C: RegionSpec | None
    certificate: PositivityCertificate
    Phi: tuple
    stabilizer: np.ndarray
    Ga_generators: tuple


def _subgroup_closure(gens: list[IsometryElement], d: int, cap: int = 5000) -> dict:
    ident = IsometryElement.identity(d)
    seen = {ident.key(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = g @ s
                k = h.key()
                if k not in seen:
                    if len(seen) >= cap:
                        raise NotImplementedError("the subgroup G^a is too large to enumerate")
                    seen[k] = h
                    nxt.append(h)
        frontier = nxt
    return seen


def build_regions(f: HomomorphismSpec, a, Phi=None) -> Regions:
    """The sets attached to ``f`` and the minimum ``a``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    G, Gamma = f.source, f.target
    if Phi is None:
        cert = is_positive(f, contains=a)
    else:
        c = chamber_index(Gamma, Phi)
        cert = is_positive(f, contains=a, chambers=[c]) if c >= 0 else None
    if not cert:
        raise NotPositive("f has no positivity certificate with a in the closure of Phi")
    Phi = cert.Phi_walls
    stab = stabilizer_indices(Gamma, a)
    in_stab = np.zeros(Gamma.order, dtype=bool)
    in_stab[stab] = True

    def f_in_stab(idx, shift):
        return in_stab[f.image_indices(idx, shift)]

    D = RegionSpec("D", G, f_in_stab, f_in_stab, G.walls)

    ga_gens = tuple(g for g in G.generators if in_stab[G_image(f, g)])
    members = _subgroup_closure(list(ga_gens), G.dim)
    keys = set(members)

    def in_Ga(idx, shift):
        shift = np.zeros((len(idx), G.dim)) if shift is None else np.atleast_2d(shift)
        return np.array([IsometryElement(G.matrices[i], s).key() in keys for i, s in zip(idx, shift)])

    D0 = RegionSpec("D0", G, in_Ga, in_Ga, G.walls)

    Gphi = Gamma.with_walls(Phi)

    def gamma_in_stab(idx, shift):
        return in_stab[np.asarray(idx)]

    Dcal = RegionSpec("Dcal", Gphi, gamma_in_stab, gamma_in_stab, Phi)

    C = None
    if G.is_discrete:
        def linear(idx, shift):
            return np.all(np.abs(np.atleast_2d(shift)) < ATOL, axis=1)

        C = RegionSpec("cell", G, linear, linear, G.walls)
    return Regions(Dcal, D, D0, C, cert, Phi, stab, ga_gens)


def G_image(f: HomomorphismSpec, g: IsometryElement) -> int:
    return int(f.image_indices([f.source.index_of(g.linear)], g.shift[None])[0])
