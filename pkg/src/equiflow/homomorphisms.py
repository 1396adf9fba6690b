"""Homomorphisms between reflection groups and the positivity test.

A homomorphism ``f : G -> Gamma`` with ``Gamma`` finite is stored as an
index table on the point group of ``G`` together with the images of the
lattice generators.  For ``G`` discrete, ``f(t g) = f(t) f(g)`` with ``t``
a translation and ``g`` in the point group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import (
    ATOL,
    IsometryElement,
    ReflectionGroup,
    Subspace,
    UnknownCatalogName,
    Wall,
    catalog_group,
    dihedral,
    fixed_subspace,
)


class NotAHomomorphism(ValueError):
    """Generator images are not multiplicative; ``witness`` is a pair ``(g1, g2)``."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BadParams(ValueError):
    pass


class NotDiscrete(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HomomorphismSpec:
    source: ReflectionGroup
    target: ReflectionGroup
    point_images: np.ndarray
    lattice_images: np.ndarray
    name: str = ""

    @property
    def image_table(self) -> dict:
        """Source point-group index -> target element (plus lattice generators under ``"t<j>"``)."""
        table = {i: self.target.elements[j] for i, j in enumerate(self.point_images)}
        for j, k in enumerate(self.lattice_images):
            table[f"t{j}"] = self.target.elements[k]
        return table

    def _lattice_image_index(self, shifts: np.ndarray) -> np.ndarray:
        shifts = np.atleast_2d(shifts)
        out = np.zeros(len(shifts), dtype=int)
        if self.source.lattice is None or len(self.lattice_images) == 0:
            return out
        coords = self.source.lattice_coordinates(shifts)
        mult = self.target.mult
        for j, base in enumerate(self.lattice_images):
            powers = [0]
            while True:
                nxt = mult[powers[-1], base]
                if nxt == 0:
                    break
                powers.append(nxt)
            powers = np.array(powers)
            out = mult[out, powers[np.mod(coords[:, j], len(powers))]]
        return out

    def image_indices(self, point_index, shifts=None) -> np.ndarray:
        """Target indices of the elements ``(elements[point_index], shift)``."""
        idx = np.atleast_1d(np.asarray(point_index, dtype=int))
        fp = self.point_images[idx]
        if shifts is None or self.source.lattice is None:
            return fp
        ft = self._lattice_image_index(np.asarray(shifts, dtype=float).reshape(len(idx), -1))
        return self.target.mult[ft, fp]

    def __call__(self, g: IsometryElement) -> IsometryElement:
        """Image of a source element."""
        i = self.source.index_of(g.linear)
        if i < 0:
            raise ValueError("element is not in the source group")
        k = self.image_indices([i], g.shift[None])[0]
        return self.target.elements[k]

    def generator_images(self) -> list[IsometryElement]:
        return [self(g) for g in self.source.generators]

    def kernel_indices(self) -> np.ndarray:
        return np.flatnonzero(self.point_images == 0)


def _target_index(target: ReflectionGroup, image) -> int:
    if isinstance(image, (int, np.integer)):
        return int(image)
    mat = image.linear if isinstance(image, IsometryElement) else np.atleast_2d(np.asarray(image, dtype=float))
    k = target.index_of(mat)
    if k < 0:
        raise NotAHomomorphism("generator image is not an element of the target group")
    return int(k)


def build_homomorphism(G: ReflectionGroup, Gamma: ReflectionGroup, generator_images, lattice_images=None, name="") -> HomomorphismSpec:
    """Extend generator images to a homomorphism and verify it.

    ``generator_images[i]`` is the image of ``G.generators[i]`` (the
    reflection across wall ``i``); for discrete ``G`` also pass the images
    of the lattice basis vectors.  Images may be target elements,
    matrices or target indices.
    """
    if Gamma.is_discrete:
        raise ValueError("target group must be finite")
    gen = [_target_index(Gamma, im) for im in generator_images]
    if len(gen) != len(G.generators):
        raise ValueError(f"expected {len(G.generators)} generator images, got {len(gen)}")
    mult_t, inv_t = Gamma.mult, Gamma.inv
    if G.is_discrete:
        k = G.lattice.shape[0]
        lat = [0] * k if lattice_images is None else [_target_index(Gamma, im) for im in lattice_images]
        if len(lat) != k:
            raise ValueError(f"expected {k} lattice images")
    else:
        lat = []
    lat = np.array(lat, dtype=int)
    proto = HomomorphismSpec(G, Gamma, np.zeros(G.order, dtype=int), lat, name)

    # f(s_i) = f(t_i) f(A_i) fixes the image of the linear part A_i
    lin_img = []
    for g, im in zip(G.generators, gen):
        ft = proto._lattice_image_index(g.shift[None])[0] if G.is_discrete else 0
        lin_img.append(mult_t[inv_t[ft], im])

    # breadth-first extension along the generators of the point group
    f0 = np.full(G.order, -1, dtype=int)
    f0[0] = 0
    frontier = [0]
    gidx = G.generator_point_index
    while frontier:
        nxt = []
        for i in frontier:
            for j, a in enumerate(gidx):
                p = G.mult[i, a]
                if f0[p] < 0:
                    f0[p] = mult_t[f0[i], lin_img[j]]
                    nxt.append(p)
        frontier = nxt
    if np.any(f0 < 0):
        raise ValueError("generators do not generate the point group")

    prod = mult_t[f0[:, None], f0[None, :]]
    bad = np.argwhere(f0[G.mult] != prod)
    if bad.size:
        i, j = bad[0]
        raise NotAHomomorphism(
            f"f(g1 g2) != f(g1) f(g2) for point-group elements {i}, {j}",
            witness=(G.elements[i], G.elements[j]),
        )
    f = HomomorphismSpec(G, Gamma, f0, lat, name)

    if G.is_discrete:
        L = G.lattice
        for a in range(len(lat)):
            for b in range(a + 1, len(lat)):
                if mult_t[lat[a], lat[b]] != mult_t[lat[b], lat[a]]:
                    raise NotAHomomorphism(
                        "lattice generator images do not commute",
                        witness=(IsometryElement.translation(L[b]), IsometryElement.translation(L[a])),
                    )
        for i in range(G.order):
            moved = L @ G.matrices[i].T
            img = f._lattice_image_index(moved)
            for j in range(len(lat)):
                conj = mult_t[mult_t[f0[i], lat[j]], inv_t[f0[i]]]
                if img[j] != conj:
                    raise NotAHomomorphism(
                        "translation images are not compatible with the point group",
                        witness=(G.elements[i], IsometryElement.translation(L[j])),
                    )
        # the defining generator images must be reproduced
        for g, im in zip(G.generators, gen):
            if f.image_indices([G.index_of(g.linear)], g.shift[None])[0] != im:
                raise NotAHomomorphism("generator image inconsistent with lattice images", witness=(g, g))
    return f


# -- positivity ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PositivityCertificate:
    Phi_walls: tuple
    wall_assignment: tuple
    chamber_index: int
    fixed_subspaces: tuple

    positive = True

    def __bool__(self):
        return True


@dataclass(frozen=True, eq=False)
class NegativeVerdict:
    """No chamber works; ``failures`` maps generator index to its fixed subspace."""

    failures: dict
    fixed_subspaces: tuple

    positive = False

    def __bool__(self):
        return False


def _walls_for(E: Subspace, normals: np.ndarray):
    """Walls containing ``E`` when their intersection equals ``E``, else None."""
    if E.dim == 0:
        J = [j for j in range(len(normals))]
    else:
        J = [j for j, n in enumerate(normals) if np.abs(E.basis @ n).max() < ATOL]
    inter = Subspace.intersection_of_walls(normals[J], normals.shape[1])
    return tuple(J) if inter.equals(E) else None


def is_positive(f: HomomorphismSpec, contains=None, chambers=None):
    """Search the chambers ``gamma Phi`` of the target for one realizing every
    ``ker(f(s_i) - I)`` as an intersection of its walls.

    A generator with ``f(s_i) = I`` is matched by the empty family of walls.
    With ``contains`` only chambers whose closure holds that point qualify;
    ``chambers`` restricts the search to the given target indices.
    """
    Gamma = f.target
    fixed = tuple(fixed_subspace(g) for g in f.generator_images())
    first_fail = None
    for c in range(Gamma.order) if chambers is None else chambers:
        walls = Gamma.chamber(c)
        normals = np.stack([w.normal for w in walls])
        if contains is not None and np.any(normals @ np.asarray(contains, dtype=float) > ATOL):
            continue
        assignment = [_walls_for(E, normals) for E in fixed]
        if all(a is not None for a in assignment):
            return PositivityCertificate(walls, tuple(assignment), c, fixed)
        if first_fail is None:
            first_fail = {i: fixed[i] for i, a in enumerate(assignment) if a is None}
    return NegativeVerdict(first_fail or {}, fixed)


def chamber_index(Gamma: ReflectionGroup, walls) -> int:
    """Index ``c`` with ``Gamma.chamber(c)`` bounded by ``walls`` (any order); -1 if none."""
    want = sorted(tuple(np.round(w.normal, 8) + 0.0) + (round(w.offset, 8) + 0.0,) for w in walls)
    for c in range(Gamma.order):
        have = sorted(tuple(np.round(w.normal, 8) + 0.0) + (round(w.offset, 8) + 0.0,) for w in Gamma.chamber(c))
        if have == want:
            return c
    return -1


def lattice_acts_trivially(f: HomomorphismSpec) -> bool:
    if not f.source.is_discrete:
        raise NotDiscrete("source group has no translations")
    return bool(np.all(f.lattice_images == 0))


# -- catalog ---------------------------------------------------------------

def dihedral_parts(A: np.ndarray, n: int) -> tuple[int, bool]:
    """``(p, reflect)`` with ``A = r_n^p`` or ``A = r_n^p s``."""
    reflect = np.linalg.det(A) < 0
    R = A @ np.diag([1.0, -1.0]) if reflect else A
    p = int(np.rint(np.arctan2(R[1, 0], R[0, 0]) * n / (2 * np.pi))) % n
    return p, bool(reflect)


def _from_rule(G, Gamma, rule, lattice_images=None, name=""):
    """Homomorphism from a rule on linear parts: ``f(t A) = rule(A)``."""
    imgs = []
    for g in G.generators:
        imgs.append(rule(g.linear))
    if G.is_discrete and lattice_images is None:
        lattice_images = [0] * G.lattice.shape[0]
    return build_homomorphism(G, Gamma, imgs, lattice_images, name=name)


def _rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


S0 = np.diag([1.0, -1.0])


def _fm_rule(N: int, n: int, m: int):
    def rule(A):
        p, refl = dihedral_parts(A, N)
        R = _rot(2 * np.pi * m * p / n)
        return R @ S0 if refl else R
    return rule


def _g_rule(N: int):
    s, sigma = S0, -np.eye(2)

    def rule(A):
        p, refl = dihedral_parts(A, N)
        base = np.linalg.matrix_power(s, p % 2)
        return base @ sigma if refl else base
    return rule


def _h_rule(N: int):
    def rule(A):
        p, _ = dihedral_parts(A, N)
        return np.array([[(-1.0) ** p]])
    return rule


def _det_rule(A):
    return np.array([[np.sign(np.linalg.det(A))]])


def _psi_rule(T: ReflectionGroup):
    def rule(A):
        return A if T.index_of(A) >= 0 else -A
    return rule


def _group_arg(group, **params):
    if isinstance(group, ReflectionGroup):
        return group
    return catalog_group(group, **params)


def _f_m(n=3, k=2, m=1):
    n, k, m = int(n), int(k), int(m)
    if m not in (1, -1):
        raise BadParams("f_m is defined for m = +1 or -1 only")
    if n < 1 or k < 1:
        raise BadParams("need n >= 1 and k >= 1")
    return _from_rule(dihedral(n * k), dihedral(n), _fm_rule(n * k, n, m), name=f"f_m({n},{k},{m})")


def _g_2k(k=1):
    k = int(k)
    if k < 1:
        raise BadParams("need k >= 1")
    return _from_rule(dihedral(2 * k), dihedral(2), _g_rule(2 * k), name=f"g_2k({k})")


def _h_2k(k=1):
    k = int(k)
    if k < 1:
        raise BadParams("need k >= 1")
    return _from_rule(dihedral(2 * k), dihedral(1, dim=1), _h_rule(2 * k), name=f"h_2k({k})")


def _identity(group="Dn", **params):
    G = _group_arg(group, **params)
    if G.is_discrete:
        raise BadParams("identity needs a finite group")
    return _from_rule(G, G, lambda A: A, name=f"identity({G.name})")


def _epsilon(group="H", **params):
    G = _group_arg(group, **params)
    return _from_rule(G, dihedral(1, dim=1), _det_rule, name=f"epsilon({G.name})")


def _phi():
    T = catalog_group("tetra")
    D3 = dihedral(3)
    sigma0 = S0
    sigma1 = _rot(2 * np.pi / 3) @ S0
    # walls of F: OA1A2, OA1A4, OA2A3
    return build_homomorphism(T, D3, [sigma0, sigma1, sigma1], name="phi")


def _psi():
    K = catalog_group("cube")
    T = catalog_group("tetra")
    return _from_rule(K, T, _psi_rule(T), name="psi")


def _psiprime():
    T = catalog_group("tetra")
    return _from_rule(catalog_group("Kprime"), T, _psi_rule(T), name="psiprime")


def _fprime():
    return _from_rule(catalog_group("Gprime"), dihedral(3), _fm_rule(6, 3, -1), name="fprime")


def _fdoubleprime():
    return _from_rule(catalog_group("Gprime"), dihedral(2), _g_rule(6), name="fdoubleprime")


def _p_canonical():
    return _from_rule(catalog_group("Gprime"), dihedral(6), lambda A: A, name="p_canonical")


def _footnote_negative():
    G = catalog_group("interval_lattice", d=1)
    D1 = dihedral(1, dim=1)
    gamma = -np.eye(1)
    # walls x1 = 0 (s_0) and x1 = 1 (s_1); t_0 = translation by 2
    return build_homomorphism(G, D1, [gamma, np.eye(1)], [gamma], name="footnote_negative")


def _f_D6_D3():
    return _from_rule(dihedral(6), dihedral(3), _fm_rule(6, 3, -1), name="f_D6_D3")


_CATALOG = {
    "identity": _identity,
    "f_D6_D3": _f_D6_D3,
    "fprime": _fprime,
    "phi": _phi,
    "psi": _psi,
    "psiprime": _psiprime,
    "f_m": _f_m,
    "g_2k": _g_2k,
    "epsilon": _epsilon,
    "h_2k": _h_2k,
    "fdoubleprime": _fdoubleprime,
    "p_canonical": _p_canonical,
    "footnote_negative": _footnote_negative,
}

# known failures of positivity or of the trivial-lattice condition
REGRESSION_FIXTURES = {"p_canonical": "not positive", "footnote_negative": "lattice acts nontrivially"}


def catalog_homomorphism(name: str, **params) -> HomomorphismSpec:
    """Named homomorphisms; see ``catalog_homomorphism_names``."""
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise UnknownCatalogName(f"unknown homomorphism {name!r}; known: {sorted(_CATALOG)}") from None
    return factory(**params)


def catalog_homomorphism_names() -> list[str]:
    return list(_CATALOG)
