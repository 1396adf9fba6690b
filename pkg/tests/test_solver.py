import os

import numpy as np
import pytest

from equiflow.groups import catalog_group, dihedral
from equiflow.homomorphisms import catalog_homomorphism
from equiflow.potentials import orbit_product_potential
from equiflow.solver import (
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
    rescale,
    run_flow,
    step,
    symmetrize,
    write_field_csv,
)

HEAT = 2 * np.sqrt(2) / 3  # action of the heteroclinic of 1/4 (1 - u^2)^2


def _scalar_problem(R=10.0, h=0.05):
    f = catalog_homomorphism("identity", group="Dn", n=1, dim=1)
    W = orbit_product_potential(f.target, [1.0], scale="auto")
    g = discretize({"kind": "ball", "R": R, "dim": 1}, h)
    return make_problem(g, f, W), W


def _triple_problem(R=3.0, h=0.1):
    f = catalog_homomorphism("identity", group="Dn", n=3)
    W = orbit_product_potential(f.target, [1.0, 0.0])
    g = discretize({"kind": "ball", "R": R, "dim": 2}, h, group=f.source)
    return make_problem(g, f, W), W


def test_ball_counts():
    g = discretize({"kind": "ball", "R": 1.0, "dim": 1}, 0.5)
    assert g.size == 5
    assert np.allclose(g.coords[:, 0], [-1, -0.5, 0, 0.5, 1])
    g3 = discretize({"kind": "ball", "R": 8.0, "dim": 3}, 0.25)
    est = 4 / 3 * np.pi * 8.0 ** 3 / 0.25 ** 3
    assert abs(g3.size / est - 1) < 0.05
    assert np.all(np.linalg.norm(g3.coords, axis=1) <= 8.0 + 1e-12)


def test_bad_spacing():
    with pytest.raises(BadSpacing):
        discretize({"kind": "ball", "R": 1.0, "dim": 1}, 0.0)
    with pytest.raises(BadSpacing):
        discretize({"kind": "ball", "R": 0.1, "dim": 1}, 0.1)
    with pytest.raises(BadSpacing):
        discretize({"kind": "cell", "group": catalog_group("H")}, 0.3)
    with pytest.raises(BadSpacing):
        discretize({"kind": "cell", "group": dihedral(3)}, 0.1)


@pytest.mark.parametrize("name,h", [("Gprime", 1 / 24), ("H", 1 / 20), ("Kprime", 0.25)])
def test_cell_wrap(name, h):
    G = catalog_group(name)
    g = discretize({"kind": "cell", "group": G}, h)
    assert g.wrap_ok()
    for t in G.lattice:
        j = g.locate(g.coords + t)
        assert np.array_equal(j, np.arange(g.size))
    # the cell grid holds |det L| / (cell volume of one node) nodes
    vol = abs(np.linalg.det(G.lattice))
    assert np.isclose(g.size * g.volume, vol)


def test_laplacian_rows_sum_to_zero():
    P, _ = _triple_problem()
    assert np.allclose(np.asarray(P.grid.laplacian.sum(axis=1)).ravel(), 0.0)
    L = P.grid.laplacian
    assert abs(L - L.T).max() < 1e-12


def test_laplacian_second_order():
    # quadratic fields have exact discrete Laplacians on the interior
    for G, h in ((dihedral(3), 0.1), (dihedral(4), 0.1)):
        g = discretize({"kind": "ball", "R": 2.0, "dim": 2}, h, group=G)
        x = g.coords
        u = (x[:, 0] ** 2 + 3 * x[:, 1] ** 2 + x[:, 0] * x[:, 1])[:, None]
        lap = g.apply(u)[:, 0]
        inner = g.interior_mask(2)
        assert np.allclose(lap[inner], 8.0, atol=1e-9)


def test_init_minima_interpolation_sign_pattern():
    P, W = _scalar_problem(R=2.0, h=0.25)
    u = init_field(P, sweeps=0).values[:, 0]
    x = P.grid.coords[:, 0]
    assert np.allclose(u[x > 0], 1.0)
    assert np.allclose(u[x < 0], -1.0)


def test_init_seeded_random_deterministic():
    P, _ = _triple_problem()
    a = init_field(P, "seeded_random", seed=7)
    b = init_field(P, "seeded_random", seed=7)
    assert np.array_equal(a.values, b.values)
    assert positivity_violation(a, P) <= 1e-12
    assert equivariance_residual(a, P) <= 1e-12


def test_field_csv_round_trip(tmp_path):
    P, _ = _triple_problem()
    u = init_field(P, "seeded_random", seed=3)
    path = tmp_path / "u.csv"
    write_field_csv(u, str(path))
    head = path.read_text().splitlines()[0]
    assert head == "x1,x2,u1,u2"
    v = init_field(P, "from_file", path=str(path))
    assert np.abs(v.values - u.values).max() <= 1e-12
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(FileFormat):
        read_field_csv(str(bad), P.grid)
    with pytest.raises(FileFormat):
        init_field(P, "from_file", path=str(tmp_path / "missing.csv"))


def test_csv_rows_lexicographic(tmp_path):
    P, _ = _triple_problem(R=1.0, h=0.25)
    write_field_csv(Field(P.grid, np.zeros((P.grid.size, 2))), str(tmp_path / "z.csv"))
    X, _ = read_field_csv(str(tmp_path / "z.csv"))
    assert np.array_equal(X, P.grid.coords)
    K = P.grid.index
    order = np.lexsort(K.T[::-1])
    assert np.array_equal(order, np.arange(len(K)))


def test_symmetrize_properties():
    P, W = _triple_problem()
    assert P.node_compatible
    rng = np.random.default_rng(0)
    u = Field(P.grid, rng.normal(size=(P.grid.size, 2)))
    s1 = symmetrize(u, P)
    s2 = symmetrize(s1, P)
    assert np.abs(s2.values - s1.values).max() <= 1e-10
    assert equivariance_residual(s1, P) <= 1e-12
    c = np.array([0.3, -0.7])
    avg = np.mean([F.T @ c for F in P.images], axis=0)
    const = symmetrize(Field(P.grid, np.tile(c, (P.grid.size, 1))), P)
    assert np.allclose(const.values, avg, atol=1e-14)


def test_symmetrize_thread_independent(monkeypatch):
    P, _ = _triple_problem()
    u = Field(P.grid, np.random.default_rng(1).normal(size=(P.grid.size, 2)))
    monkeypatch.setenv("EQUIFLOW_THREADS", "1")
    a = symmetrize(u, P).values
    monkeypatch.setenv("EQUIFLOW_THREADS", "4")
    b = symmetrize(u, P).values
    assert np.array_equal(a, b)


def test_step_equilibria():
    P, W = _scalar_problem(R=3.0, h=0.1)
    ones = Field(P.grid, np.ones((P.grid.size, 1)))
    assert np.array_equal(step(ones, 1e-3, 1.0, W).values, ones.values)
    flat = orbit_product_potential(dihedral(1, dim=1), [1.0], scale=0.0)
    lin = Field(P.grid, P.grid.coords.copy())
    out = step(lin, 1e-3, 1.0, flat)
    inner = P.grid.interior_mask(1)
    assert np.allclose(out.values[inner], lin.values[inner], atol=1e-14)


def test_step_blowup():
    P, W = _scalar_problem(R=3.0, h=0.1)
    u = Field(P.grid, 3.0 * np.ones((P.grid.size, 1)))
    with pytest.raises(Blowup):
        step(u, 10.0, 1.0, W)


def test_energy_decreases_along_steps():
    P, W = _scalar_problem()
    x = P.grid.coords
    u = Field(P.grid, 0.9 * np.tanh(x / np.sqrt(2)))
    from equiflow.solver import stable_dt

    dt, _ = stable_dt(P.grid, W, 1.0, 1.05)
    J = energy(u, W)
    for _ in range(100):
        u = step(u, dt, 1.0, W)
        Jn = energy(u, W)
        assert Jn < J
        J = Jn


def test_energy_quadrature_oracle():
    _, W = _scalar_problem()
    Js = []
    for h in (0.04, 0.02, 0.01):
        g = discretize({"kind": "ball", "R": 10.0, "dim": 1}, h)
        u = Field(g, np.tanh(g.coords / np.sqrt(2)))
        Js.append(energy(u, W))
        if h == 0.01:
            assert abs(Js[-1] - HEAT) < 1e-3
    # second order in h: successive differences shrink by about 4
    r = (Js[0] - Js[1]) / (Js[1] - Js[2])
    assert 3.5 < r < 4.5
    # u = a has zero energy
    g = discretize({"kind": "ball", "R": 2.0, "dim": 1}, 0.1)
    assert energy(Field(g, np.ones((g.size, 1))), W) == 0.0


def test_run_flow_1d_oracle():
    P, W = _scalar_problem()
    r = run_flow(P, init_field(P), FlowConfig(tol_rate=1e-8))
    assert r.converged
    x = P.grid.coords[:, 0]
    assert np.abs(r.field.values[:, 0] - np.tanh(x / np.sqrt(2))).max() < 1e-2
    assert abs(r.energy_trace[-1][1] - HEAT) < 1e-3
    assert np.abs(r.field.values).max() <= W.M + 1e-6
    # energy trace is non-increasing
    J = np.array([j for _, j in r.energy_trace])
    assert np.all(np.diff(J) <= 1e-12 * (1 + np.abs(J[:-1])))


def test_run_flow_at_minimum():
    P, W = _scalar_problem(R=2.0, h=0.1)
    u = Field(P.grid, np.ones((P.grid.size, 1)))
    r = run_flow(P, u, FlowConfig())
    assert r.converged and r.iterations == 0
    assert r.energy_trace[-1][1] == 0.0


def test_second_order_convergence_to_tanh():
    errs, res_exact = [], []
    for h in (0.2, 0.1):
        P, W = _scalar_problem(h=h)
        r = run_flow(P, init_field(P), FlowConfig(tol_rate=1e-10, max_steps=400000))
        x = P.grid.coords
        exact = np.tanh(x / np.sqrt(2))
        errs.append(np.abs(r.field.values - exact).max())
        # truncation error of the exact profile
        res_exact.append(pde_residual(Field(P.grid, exact), W))
        assert r.pde_residual <= 1e-10
    assert 3.0 < errs[0] / errs[1] < 5.0
    assert 3.0 < res_exact[0] / res_exact[1] < 5.0


def test_equivariance_preserved_without_symmetrization():
    P, W = _triple_problem()
    u0 = init_field(P, "seeded_random", seed=2)
    r = run_flow(P, u0, FlowConfig(max_steps=1000, k_sym=0, k_log=100, track_equivariance=True, tol_rate=0.0))
    assert r.iterations == 1000
    na = np.linalg.norm(W.a)
    assert max(e for _, e in r.equivariance_trace) <= 1e-10 * na


def test_positivity_and_dissipation_small_disk():
    P, W = _triple_problem(R=3.0, h=0.1)
    r = run_flow(P, init_field(P), FlowConfig(max_steps=1000, k_log=1, tol_rate=1e-6))
    assert max(p for _, p in r.positivity_trace) <= 1e-6 * np.linalg.norm(W.a)
    J = np.array([j for _, j in r.energy_trace])
    assert np.all(np.diff(J) <= 1e-12 * (1 + np.abs(J[:-1])))
    assert np.abs(r.field.values).max() <= W.M + 1e-6


def test_non_monotone_guard():
    P, W = _scalar_problem(R=3.0, h=0.1)
    with pytest.raises(NonMonotone):
        run_flow(P, init_field(P), FlowConfig(max_steps=100, k_log=10, monotone_rtol=-1.0))


def test_rescale():
    f = catalog_homomorphism("epsilon", group="H")
    W = orbit_product_potential(f.target, [1.0], scale="auto")
    g = discretize({"kind": "cell", "group": f.source}, 1 / 20)
    R = 10.0
    P = make_problem(g, f, W, scale_c=R * R)
    r = run_flow(P, init_field(P), FlowConfig(tol_rate=1e-6, k_sym=10))
    v = rescale(r.field, R)
    ru = pde_residual(r.field, W, R * R)
    rv = pde_residual(v, W, 1.0)
    assert abs(R * R * rv / ru - 1) < 0.1
    same = rescale(r.field, 1.0)
    assert np.array_equal(same.values, r.field.values)
    assert np.allclose(same.grid.coords, g.coords)
    const = rescale(Field(g, np.full((g.size, 1), 0.5)), 3.0)
    assert np.all(const.values == 0.5)
    assert np.isclose(v.grid.h, g.h * R)


def test_threads_env_bad_value(monkeypatch):
    from equiflow.solver import _threads

    monkeypatch.setenv("EQUIFLOW_THREADS", "2")
    assert _threads() <= 2
    monkeypatch.setenv("EQUIFLOW_THREADS", "x")
    assert _threads() >= 1
    monkeypatch.delenv("EQUIFLOW_THREADS")
    assert _threads() == (os.cpu_count() or 1)
