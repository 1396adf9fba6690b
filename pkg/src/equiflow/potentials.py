"""Symmetric multi-well potentials built as products over a group orbit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import ReflectionGroup, orbit, stabilizer_indices


def _excl_products(d2: np.ndarray) -> np.ndarray:
    """``out[..., b] = prod_{c != b} d2[..., c]`` without division."""
    n = d2.shape[-1]
    ones = np.ones(d2.shape[:-1] + (1,))
    pre = np.cumprod(np.concatenate([ones, d2[..., :-1]], axis=-1), axis=-1)
    suf = np.cumprod(np.concatenate([ones, d2[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return pre * suf if n else ones


@dataclass(frozen=True, eq=False)
class Potential:
    """``W(u) = scale * prod_b |u - b|^(2 p)`` over the orbit of ``a``; ``p = 2`` when degenerate."""

    group: ReflectionGroup
    a: np.ndarray
    orbit: np.ndarray
    scale: float = 1.0
    degenerate: bool = False
    M: float = 0.0

    @property
    def dim(self) -> int:
        return self.orbit.shape[1]

    @property
    def symmetry_group(self) -> ReflectionGroup:
        return self.group

    @property
    def minimum(self) -> np.ndarray:
        return self.a

    @property
    def radial_bound(self) -> float:
        return self.M

    def _base(self, u):
        u = np.asarray(u, dtype=float)
        diff = u[..., None, :] - self.orbit
        d2 = np.einsum("...bi,...bi->...b", diff, diff)
        return diff, d2

    def _w0_grad(self, u):
        diff, d2 = self._base(u)
        excl = _excl_products(d2)
        w0 = np.prod(d2, axis=-1)
        g0 = 2.0 * np.einsum("...b,...bi->...i", excl, diff)
        return w0, g0, diff, d2

    def value(self, u) -> np.ndarray:
        _, d2 = self._base(u)
        w0 = np.prod(d2, axis=-1)
        return self.scale * (w0 * w0 if self.degenerate else w0)

    def gradient(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim != 2:
            w0, g0, _, _ = self._w0_grad(u)
            if self.degenerate:
                return self.scale * 2.0 * w0[..., None] * g0
            return self.scale * g0
        # loop over the (small) orbit with prefix and suffix products on flat arrays
        diffs = [u - b for b in self.orbit]
        d2 = [np.einsum("pi,pi->p", d, d) for d in diffs]
        nb = len(d2)
        suffix = [None] * (nb + 1)
        suffix[nb] = np.ones(len(u))
        for k in range(nb - 1, -1, -1):
            suffix[k] = suffix[k + 1] * d2[k]
        prefix = np.ones(len(u))
        g0 = np.zeros_like(u)
        for k in range(nb):
            g0 += (prefix * suffix[k + 1])[:, None] * diffs[k]
            prefix = prefix * d2[k]
        g0 *= 2.0
        if self.degenerate:
            return (2.0 * self.scale) * prefix[:, None] * g0
        return self.scale * g0

    def hessian(self, u) -> np.ndarray:
        w0, g0, diff, d2 = self._w0_grad(u)
        m = self.dim
        nb = d2.shape[-1]
        excl = _excl_products(d2)
        h0 = 2.0 * excl[..., None, None] * np.eye(m)
        h0 = h0.sum(axis=-3)
        for b in range(nb):
            d2b = d2.copy()
            d2b[..., b] = 1.0
            excl2 = _excl_products(d2b)
            excl2[..., b] = 0.0
            # sum over c != b of 4 diff_b diff_c^T prod_{e != b, c} d2_e
            inner = np.einsum("...c,...cj->...j", excl2, diff)
            h0 = h0 + 4.0 * diff[..., b, :, None] * inner[..., None, :]
        if self.degenerate:
            return self.scale * 2.0 * (g0[..., :, None] * g0[..., None, :] + w0[..., None, None] * h0)
        return self.scale * h0

    def __call__(self, u):
        return self.value(u)

    def lipschitz_bound(self, radius: float, samples: int = 4000, seed: int = 0) -> float:
        """Sampled sup of the spectral norm of the Hessian on ``|u| <= radius``."""
        rng = np.random.default_rng(seed)
        m = self.dim
        x = rng.normal(size=(samples, m))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        r = radius * rng.random(samples) ** (1.0 / m)
        pts = np.concatenate([x * r[:, None], x * radius, self.orbit])
        H = self.hessian(pts)
        return float(np.max(np.abs(np.linalg.eigvalsh(H))))

    def curvature_at_minimum(self) -> np.ndarray:
        """Eigenvalues of ``D^2 W(a)``."""
        return np.linalg.eigvalsh(self.hessian(self.a))


def unit_curvature_scale(group: ReflectionGroup, a, degenerate: bool = False) -> float:
    """Scale making ``D^2 W(a) = 2 I`` (the nondegenerate case), i.e. ``1 / prod_{b != a} |a - b|^2``."""
    a = np.asarray(a, dtype=float)
    orb = orbit(group, a)
    d2 = np.sum((orb - a) ** 2, axis=1)
    q = float(np.prod(d2[d2 > 1e-18]))
    return 1.0 / (q * q) if degenerate else 1.0 / q


def orbit_product_potential(group: ReflectionGroup, a, scale=1.0, degenerate: bool = False, M=None) -> Potential:
    """``W(u) = scale * prod_{b in orbit(a)} |u - b|^2`` (squared again when ``degenerate``).

    ``scale="auto"`` selects :func:`unit_curvature_scale`.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if np.linalg.norm(a) == 0:
        raise ValueError("a must be nonzero")
    if group.is_discrete:
        raise ValueError("target group must be finite")
    orb = orbit(group, a)
    if isinstance(scale, str):
        if scale != "auto":
            raise ValueError(f"scale must be a number or 'auto', got {scale!r}")
        scale = unit_curvature_scale(group, a, degenerate)
    if M is None:
        M = 2.0 * float(np.max(np.linalg.norm(orb, axis=1)))
    orb.setflags(write=False)
    a.setflags(write=False)
    return Potential(group, a, orb, float(scale), bool(degenerate), float(M))


def count_minima(group: ReflectionGroup, a) -> int:
    """``|Gamma| / |Gamma_a|``."""
    return group.order // len(stabilizer_indices(group, a))


@dataclass
class HypothesisReport:
    invariance_ok: bool
    invariance_residual: float
    growth_ok: bool
    M: float
    h3_ok: bool
    q_star: float
    uniqueness_ok: bool
    nondegenerate: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.invariance_ok and self.growth_ok and self.h3_ok and self.uniqueness_ok


def _sphere(rng, n, m):
    v = rng.normal(size=(n, m))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def check_hypotheses(W: Potential, Phi=None, samples: int = 2000, a=None, q_max: float = 2.0, q_steps: int = 400, seed: int = 0) -> HypothesisReport:
    """Sample the symmetry, growth and nondegeneracy hypotheses for ``W``.

    ``Phi`` is a sequence of walls of the target chamber (default: the
    first chamber of the group whose closure holds ``a``).  ``q_star`` is
    the largest sampled ``q`` with ``<nu, W_uu(a + s nu) nu> > 0`` for all
    sampled ``nu`` and all ``0 < s <= q``.
    """
    rng = np.random.default_rng(seed)
    G = W.group
    m = W.dim
    a = W.a if a is None else np.atleast_1d(np.asarray(a, dtype=float))
    failures = []

    u = rng.normal(size=(samples, m)) * W.M / 2
    w = W.value(u)
    res = 0.0
    for A in G.matrices:
        res = max(res, float(np.max(np.abs(W.value(u @ A.T) - w) / (1.0 + np.abs(w)))))
    inv_ok = res <= 1e-9
    if not inv_ok:
        failures.append(("invariance", res))

    nu = _sphere(rng, samples, m)
    base = W.value(W.M * nu)
    growth_ok = True
    for s in (1.0, 1.5, 2.0, 4.0):
        ws = W.value(s * W.M * nu)
        bad = np.flatnonzero(ws < base * (1 - 1e-12))
        if bad.size:
            growth_ok = False
            failures.append(("growth", s, W.M * nu[bad[0]]))
            break

    if Phi is None:
        Phi = None
        for c in range(G.order):
            walls = G.chamber(c)
            if all(wl.value(a) <= 1e-9 for wl in walls):
                Phi = walls
                break
        if Phi is None:
            Phi = G.walls

    nu = _sphere(rng, samples, m)
    if m == 1:
        nu = np.array([[1.0], [-1.0]])
    qs = np.linspace(q_max / q_steps, q_max, q_steps)
    curv_a = np.einsum("pi,ij,pj->p", nu, W.hessian(a), nu)
    nondeg = bool(np.min(curv_a) > 0)
    q_star = 0.0
    if nondeg:
        for q in qs:
            H = W.hessian(a + q * nu)
            c = np.einsum("pi,pij,pj->p", nu, H, nu)
            if np.min(c) <= 0:
                break
            q_star = float(q)
    h3_ok = nondeg and q_star > 0
    if not h3_ok:
        failures.append(("h3_nondegenerate", q_star))

    # dense sample of the closed chamber intersected with the ball of radius M
    walled = G.with_walls(Phi)
    pts = rng.normal(size=(20 * samples, m))
    pts *= (W.M * rng.random(len(pts)) ** (1.0 / m) / np.linalg.norm(pts, axis=1))[:, None]
    pts, _, _ = walled.fold_points(pts)
    wa = float(W.value(a))
    far = np.linalg.norm(pts - a, axis=1) > 0.05 * max(np.linalg.norm(a), 1e-12)
    wfar = W.value(pts[far])
    uniq_ok = wa <= 1e-12 and bool(np.all(wfar > 1e-12))
    if not uniq_ok:
        failures.append(("uniqueness", wa, float(wfar.min()) if wfar.size else None))
    return HypothesisReport(inv_ok, res, growth_ok, W.M, h3_ok, q_star, uniq_ok, nondeg, failures)
