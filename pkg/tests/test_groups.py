import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equiflow.groups import (
    ClosureOverflow,
    FoldDivergence,
    IsometryElement,
    NotInCone,
    Subspace,
    UnknownCatalogName,
    Wall,
    catalog_group,
    cone_partition,
    dihedral,
    fixed_subspace,
    generate_closure,
    orbit,
    root_system,
    stabilizer_indices,
)


def _is_group(mats, atol=1e-9):
    keys = {tuple(np.round(m, 8).ravel() + 0.0) for m in mats}
    for A in mats:
        for B in mats:
            if tuple(np.round(A @ B, 8).ravel() + 0.0) not in keys:
                return False
    return True


def test_dihedral_orders():
    for n in range(1, 13):
        G = dihedral(n)
        assert G.order == 2 * n
        assert _is_group(G.matrices)
        for A in G.matrices:
            assert np.allclose(A.T @ A, np.eye(2), atol=1e-10)


def test_polyhedral_orders_and_speed():
    t = time.perf_counter()
    T = catalog_group("tetra")
    K = catalog_group("cube")
    for n in range(1, 13):
        dihedral(n)
    assert time.perf_counter() - t < 1.0
    assert T.order == 24
    assert K.order == 48
    assert _is_group(T.matrices)
    # the tetrahedral group has 6 reflections, the cube group 9
    assert len(T.reflection_indices) == 6
    assert len(K.reflection_indices) == 9


def test_identity_first_and_inverse_table():
    for G in (dihedral(5), catalog_group("tetra"), catalog_group("Gprime")):
        assert np.allclose(G.matrices[0], np.eye(G.dim))
        for i in range(G.order):
            assert G.mult[i, G.inv[i]] == 0


def test_closure_overflow_and_bad_generators():
    # rotation by an irrational multiple of pi as a product of two reflections
    w1 = Wall([0.0, 1.0], 0.0)
    t = 1.0
    w2 = Wall([-np.sin(t), np.cos(t)], 0.0)
    with pytest.raises(ClosureOverflow):
        generate_closure([IsometryElement.reflection(w1), IsometryElement.reflection(w2)], max_order=200)
    rot = IsometryElement(np.array([[0.0, -1.0], [1.0, 0.0]]), None)
    with pytest.raises(ValueError):
        generate_closure([rot])


def test_unknown_catalog_name():
    with pytest.raises(UnknownCatalogName):
        catalog_group("D7")


def test_catalog_walls():
    G = catalog_group("Dn", n=3)
    # F = {0 < arg x < pi/3}
    x = np.array([np.cos(0.5), np.sin(0.5)])
    assert G.in_open(x[None])[0]
    assert not G.in_open(np.array([[np.cos(1.2), np.sin(1.2)]]))[0]
    T = catalog_group("tetra")
    assert T.in_open(np.array([[0.5, 1.0, 0.1]]))[0]
    assert not T.in_open(np.array([[1.0, 0.5, 0.1]]))[0]
    K = catalog_group("cube")
    assert K.in_open(np.array([[0.5, 0.2, 0.9]]))[0]
    H = catalog_group("H")
    assert H.order == 8
    assert np.allclose(H.lattice, 2 * np.eye(2))
    Kp = catalog_group("Kprime")
    assert np.allclose(Kp.lattice[0], [2, 0, 2])
    assert np.allclose(Kp.lattice[1], [0, 2, 2])


def _fold_oracle(G, x):
    """Exhaustive search over point-group elements and nearby translations."""
    best = None
    shifts = [np.zeros(G.dim)]
    if G.is_discrete:
        shifts = list(G.translation_vectors(np.linalg.norm(x) + 3 * G.cell_diameter() + 1))
    for k, A in enumerate(G.matrices):
        for t in shifts:
            # x = A y + t  =>  y = A^T (x - t)
            y = A.T @ (x - t)
            if G.in_closure(y[None], 1e-9)[0]:
                return y
    return best


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["D3", "D4", "D6", "tetra", "cube", "Gprime", "H"]), st.integers(0, 10 ** 6))
def test_fold_matches_exhaustive_search(name, seed):
    G = catalog_group("Dn", n=int(name[1:])) if name.startswith("D") else catalog_group(name)
    rng = np.random.default_rng(seed)
    x = rng.normal(size=G.dim) * 2.0
    y, g = G.fold(x)
    assert G.in_closure(y[None], 1e-9)[0]
    assert np.allclose(g(y), x, atol=1e-9)
    y_ref = _fold_oracle(G, x)
    assert y_ref is not None
    assert np.allclose(y, y_ref, atol=1e-8)


def test_fold_divergence():
    G = dihedral(3)
    with pytest.raises(FoldDivergence):
        G.fold_points(np.array([[-1.0, 0.3]]), max_iter=0)


def test_fold_batch_consistent():
    G = catalog_group("Gprime")
    X = np.random.default_rng(1).uniform(-3, 3, size=(500, 2))
    Y, idx, shift = G.fold_points(X)
    for x, y, i, s in zip(X, Y, idx, shift):
        assert np.allclose(G.matrices[i] @ y + s, x, atol=1e-9)


def test_subspaces():
    r = IsometryElement.reflection(Wall([0.0, 1.0], 0.0))
    E = fixed_subspace(r)
    assert E.dim == 1
    assert E.equals(Subspace.span([[1.0, 0.0]], 2))
    E0 = fixed_subspace(IsometryElement(np.array([[0.0, -1.0], [1.0, 0.0]]), None))
    assert E0.dim == 0
    whole = Subspace.intersection_of_walls(np.zeros((0, 3)), 3)
    assert whole.dim == 3


def test_stabilizer_and_orbit():
    D3 = dihedral(3)
    assert len(stabilizer_indices(D3, [1.0, 0.0])) == 2
    assert len(orbit(D3, [1.0, 0.0])) == 3
    T = catalog_group("tetra")
    A1 = np.ones(3) / np.sqrt(3)
    assert len(stabilizer_indices(T, A1)) == 6
    assert len(orbit(T, A1)) == 4


def test_root_system_pairs():
    for G, count in ((dihedral(3), 6), (dihedral(4), 8), (dihedral(6), 12), (catalog_group("tetra"), 12)):
        N = root_system(G)
        assert len(N) == count
        assert np.allclose(np.linalg.norm(N, axis=1), 1.0)
        assert np.allclose(N[0::2], -N[1::2])


# -- cone partition against the brute-force subset oracle ---------------------

def _coeffs(v, S):
    c, *_ = np.linalg.lstsq(S.T, v, rcond=None)
    return c if np.linalg.norm(c @ S - v) < 1e-9 else None


def _minimal_cones(N):
    """Linearly independent root subsets with pairwise nonnegative products whose cone holds no other root."""
    d = N.shape[1]
    out = []
    for p in range(1, d + 1):
        for S in itertools.combinations(range(len(N)), p):
            V = N[list(S)]
            if np.linalg.matrix_rank(V, tol=1e-9) < p:
                continue
            G = V @ V.T
            if np.any(G[~np.eye(p, dtype=bool)] < -1e-12):
                continue
            clean = True
            for j in range(len(N)):
                if j in S:
                    continue
                c = _coeffs(N[j], V)
                if c is not None and np.all(c >= -1e-12):
                    clean = False
                    break
            if clean:
                out.append(frozenset(S))
    return out


def _match_index(N, vecs):
    return frozenset(int(np.argmin(np.linalg.norm(N - v, axis=1))) for v in vecs)


@pytest.mark.parametrize("name", ["D3", "D4", "D6", "tetra"])
def test_cone_partition_matches_oracle(name):
    G = dihedral(int(name[1:])) if name.startswith("D") else catalog_group("tetra")
    N = root_system(G)
    cones = _minimal_cones(N)
    rng = np.random.default_rng(7)
    d = G.dim
    checked = 0
    while checked < 500:
        base = rng.choice(len(N), size=d, replace=False)
        V = N[base]
        if np.linalg.matrix_rank(V, tol=1e-6) < d:
            continue
        w = rng.random(d)
        w[rng.random(d) < 0.2] = 0.0
        if not w.any():
            continue
        rho = w @ V
        rho /= np.linalg.norm(rho)
        dec = cone_partition(rho, V, N)
        assert np.linalg.norm(dec.reconstruct() - rho) < 1e-9
        assert np.all(dec.coefficients > 0)
        gram = dec.directions @ dec.directions.T
        assert gram.min() >= -1e-12
        got = _match_index(N, dec.directions)
        # the output spans a face of an oracle cone that holds rho
        hosts = [S for S in cones if got <= S]
        assert hosts, (name, rho)
        assert any(
            (c := _coeffs(rho, N[sorted(S)])) is not None and np.all(c >= -1e-9) for S in hosts
        )
        # an oracle cone with rho always exists
        assert any(
            (c := _coeffs(rho, N[sorted(S)])) is not None and np.all(c >= -1e-9) for S in cones
        )
        checked += 1


def test_cone_partition_examples():
    N = root_system(dihedral(3))
    r = N[0]
    dec = cone_partition(r, [r], N)
    assert np.allclose(dec.directions, [r])
    assert np.allclose(dec.coefficients, [1.0])
    # two roots at 120 degrees: the bisector is the middle root
    u = np.array([1.0, 0.0])
    v = np.array([np.cos(2 * np.pi / 3), np.sin(2 * np.pi / 3)])
    Nd = np.array([[np.cos(k * np.pi / 3), np.sin(k * np.pi / 3)] for k in range(6)])
    rho = (u + v) / np.linalg.norm(u + v)
    dec = cone_partition(rho, [u, v], Nd)
    assert len(dec.directions) == 1
    assert np.allclose(dec.directions[0], rho)
    with pytest.raises(NotInCone):
        cone_partition(-rho, [u, v], Nd)
