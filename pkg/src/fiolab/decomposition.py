"""Dyadic frequency partition, angular nets on the sphere, and sector symbols.

The radial partition is psi_j(xi) = psi0(2^-j xi) - psi0(2^-j+1 xi) built from
a closed-form C-infinity bump psi0 (1 on the unit ball, supported in radius 2,
mollifier bridge in between), so partial sums telescope to psi0(2^-J xi)
exactly.  Angular nets at level j are unit-vector families with pairwise
separation and covering radius delta = 2^(-j rho/2); each net vector carries a
deterministic rotation taking it to the first coordinate axis, which fixes the
frame for the anisotropic kernel weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .symbols import Amplitude, Phase, unit_sphere_probes

__all__ = [
    "LPPartition",
    "AngularNet",
    "lp_psi",
    "psi_window",
    "build_angular_net",
    "verify_net",
    "eta",
    "eta_partition_deviation",
    "lp_partition_audit",
    "b_symbol",
    "g_weight",
    "NET_COUNT_CONSTANT",
]

# Count bound constants C_n in  #net <= C_n * 2^((n-1) j rho / 2).
NET_COUNT_CONSTANT = {1: 2.0, 2: 7.0, 3: 20.0}


def _bridge(s):
    """Smooth transition: 1 for s <= 0, 0 for s >= 1, exp(-1/t) bridge between.

    The mollifier is only evaluated on the transition region, so large bump
    matrices (mostly plateau or zero) stay cheap.
    """
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    out[s <= 0.0] = 1.0
    mid = (s > 0.0) & (s < 1.0)
    if np.any(mid):
        sm = s[mid]
        a = np.exp(-1.0 / (1.0 - sm))
        b = np.exp(-1.0 / sm)
        out[mid] = a / (a + b)
    return out


def psi0_profile(r):
    """Radial profile of psi0: 1 on [0,1], mollifier bridge on [1,2], 0 beyond."""
    return _bridge(np.asarray(r, dtype=float) - 1.0)


def psi1_profile(r):
    """Radial profile of psi = psi_1, supported on 1 <= r <= 4 with plateau [2,2]."""
    r = np.asarray(r, dtype=float)
    return psi0_profile(r / 2.0) - psi0_profile(r)


def bump_profile(r):
    """Sector bump: 1 for r <= 1, 0 for r >= 3/2, smooth bridge in between."""
    return _bridge(2.0 * (np.asarray(r, dtype=float) - 1.0))


@dataclass(frozen=True)
class LPPartition:
    """Dyadic radial partition of unity with closed-form bump profile."""

    j_max: int = 16

    def psi_radial(self, j: int, r):
        """psi_j as a function of |xi|."""
        if j < 0:
            raise ValueError("j must be >= 0")
        r = np.asarray(r, dtype=float)
        if j == 0:
            return psi0_profile(r)
        return psi0_profile(2.0**-j * r) - psi0_profile(2.0 ** (-j + 1) * r)

    def psi(self, j: int, xi):
        xi = np.asarray(xi, dtype=float)
        return self.psi_radial(j, np.linalg.norm(xi, axis=-1))

    def sum_radial(self, r, J: int):
        """Telescoped partial sum sum_{j<=J} psi_j = psi0(2^-J xi)."""
        r = np.asarray(r, dtype=float)
        out = self.psi_radial(0, r)
        for j in range(1, J + 1):
            out = out + self.psi_radial(j, r)
        return out


def lp_psi(part: LPPartition, j: int, xi):
    """Value of the dyadic annular cutoff psi_j at xi."""
    return part.psi(j, xi)


def psi_window(j: int, rho: float, xi):
    """The rescaled window psi(2^(j(rho-1)+1) xi) entering the sector symbols."""
    xi = np.asarray(xi, dtype=float)
    scale = 2.0 ** (j * (rho - 1.0) + 1.0)
    return psi1_profile(scale * np.linalg.norm(xi, axis=-1))


@dataclass(frozen=True)
class AngularNet:
    """Level-j family of unit vectors with separation/covering radius delta.

    vectors: (K, dim) unit vectors; rotations: (K, dim, dim) orthogonal maps
    taking each vector to e_1 (Givens rotation in 2-d, Householder reflection
    in 3-d, sign-fixed so builds are deterministic).
    """

    dim: int
    level: int
    rho: float
    vectors: np.ndarray
    rotations: np.ndarray

    @property
    def delta(self) -> float:
        return 2.0 ** (-self.level * self.rho / 2.0)

    @property
    def count(self) -> int:
        return len(self.vectors)

    def rotation(self, nu: int) -> np.ndarray:
        return self.rotations[nu]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(["nu"] + [f"x{k}" for k in range(self.dim)]) + "\n")
            for nu, v in enumerate(self.vectors):
                fh.write(f"{nu}," + ",".join(repr(float(c)) for c in v) + "\n")


def _rotation_to_e1(v: np.ndarray) -> np.ndarray:
    n = len(v)
    if n == 1:
        return np.array([[1.0 if v[0] > 0 else -1.0]])
    if n == 2:
        c, s = v
        return np.array([[c, s], [-s, c]])
    e1 = np.zeros(n)
    e1[0] = 1.0
    w = v - e1
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(w, w) / nw**2


def _greedy_thin(points: np.ndarray, delta: float, keep_against=None) -> np.ndarray:
    """Keep points in order, dropping any within delta of an earlier kept point.

    keep_against: optional existing family the new points must also avoid.
    """
    if len(points) == 0:
        return points
    tree = cKDTree(points)
    alive = np.ones(len(points), dtype=bool)
    if keep_against is not None and len(keep_against):
        base = cKDTree(keep_against)
        close = base.query_ball_tree(tree, delta * (1 - 1e-12))
        for idxs in close:
            alive[idxs] = False
    kept = []
    for i in range(len(points)):
        if not alive[i]:
            continue
        kept.append(i)
        alive[tree.query_ball_point(points[i], delta * (1 - 1e-12))] = False
    return points[kept]


_NET_CACHE = {}


def build_angular_net(n: int, j: int, rho: float, fresh: bool = False) -> AngularNet:
    """Deterministic angular net at level j with delta = 2^(-j rho/2).

    1-d: the two signs.  2-d: uniform angles with the largest count whose
    chord spacing still meets the separation bound.  3-d: a dense Fibonacci
    candidate set greedily thinned to enforce separation, then covering is
    checked on a dense deterministic sample and repaired by inserting any
    uncovered directions (insertion preserves separation since uncovered
    means farther than delta from every kept vector).
    """
    if n not in (1, 2, 3):
        raise ValueError("net dimension must be 1, 2 or 3")
    if j < 1:
        raise ValueError("net level j must be >= 1")
    if not (0.0 <= rho <= 1.0):
        raise ValueError("rho must lie in [0, 1]")
    key = (n, j, float(rho))
    if not fresh and key in _NET_CACHE:
        return _NET_CACHE[key]

    delta = 2.0 ** (-j * rho / 2.0)
    if n == 1:
        vectors = np.array([[1.0], [-1.0]])
    elif n == 2:
        count = int(math.floor(math.pi / math.asin(delta / 2.0)))
        ang = 2 * math.pi * np.arange(count) / count
        vectors = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    else:
        n_cand = max(2000, int(math.ceil(120.0 / delta**2)))
        candidates = unit_sphere_probes(3, n_cand)
        vectors = _greedy_thin(candidates, delta)
        # Covering repair against a dense deterministic sample.
        n_samp = min(max(200_000, int(1600.0 / delta**2)), 2_000_000)
        rng = np.random.default_rng(20240601)
        extra = rng.normal(size=(n_samp // 4, 3))
        extra /= np.linalg.norm(extra, axis=-1, keepdims=True)
        samples = np.concatenate([unit_sphere_probes(3, n_samp), extra])
        for _ in range(8):
            tree = cKDTree(vectors)
            dist, _ = tree.query(samples)
            uncovered = samples[dist > delta]
            if len(uncovered) == 0:
                break
            inserted = _greedy_thin(uncovered, delta, keep_against=vectors)
            if len(inserted) == 0:
                break
            vectors = np.concatenate([vectors, inserted])

    rotations = np.stack([_rotation_to_e1(v) for v in vectors])
    vectors = vectors.copy()
    vectors.setflags(write=False)
    rotations.setflags(write=False)
    net = AngularNet(dim=n, level=j, rho=float(rho), vectors=vectors, rotations=rotations)
    _NET_CACHE[key] = net
    return net


def verify_net(net: AngularNet, cover_samples: int = 10_000, seed: int = 0) -> dict:
    """Brute-force certificates for the net conditions.

    Separation is checked exhaustively over all pairs; covering over a dense
    deterministic sample plus seeded random directions.  Returns the measured
    minima/maxima together with pass flags and the count bound.
    """
    V = net.vectors
    delta = net.delta
    sep_min = math.inf
    chunk = 2048
    for start in range(0, len(V), chunk):
        block = V[start:start + chunk]
        d = np.linalg.norm(block[:, None, :] - V[None, :, :], axis=-1)
        ii = np.arange(start, start + len(block))
        d[np.arange(len(block)), ii] = math.inf
        sep_min = min(sep_min, float(d.min()))
    if net.dim == 1:
        cover_max = 0.0
    else:
        if net.dim == 2:
            ang = 2 * math.pi * np.arange(cover_samples) / cover_samples
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        else:
            dirs = unit_sphere_probes(3, cover_samples)
        rng = np.random.default_rng(seed)
        extra = rng.normal(size=(cover_samples, net.dim))
        extra /= np.linalg.norm(extra, axis=-1, keepdims=True)
        dirs = np.concatenate([dirs, extra])
        dist, _ = cKDTree(V).query(dirs)
        cover_max = float(dist.max())
    bound = NET_COUNT_CONSTANT[net.dim] * 2.0 ** ((net.dim - 1) * net.level * net.rho / 2.0)
    return {
        "count": net.count,
        "delta": delta,
        "separation_min": sep_min,
        "separation_ok": bool(sep_min >= delta * (1 - 1e-12)),
        "cover_max_dist": cover_max,
        "cover_ok": bool(cover_max <= delta * (1 + 1e-9)),
        "count_bound": bound,
        "count_ok": bool(net.count <= bound),
    }


def _bump_values(net: AngularNet, units: np.ndarray) -> np.ndarray:
    """Bump matrix phi(2^(j rho/2)(unit - xi_nu)) of shape (Q, K), chunked."""
    scale = 1.0 / net.delta
    out = np.empty((len(units), net.count))
    step = max(1, (1 << 22) // max(net.count, 1))
    for start in range(0, len(units), step):
        blk = units[start:start + step]
        d = np.linalg.norm(blk[:, None, :] - net.vectors[None, :, :], axis=-1)
        out[start:start + len(blk)] = bump_profile(scale * d)
    return out


def eta(net: AngularNet, nu: int, xi) -> np.ndarray:
    """Sector cutoff eta_j^nu(xi): degree-zero homogeneous partition member."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    norms = np.linalg.norm(xi, axis=-1)
    if np.any(norms == 0):
        raise ValueError("eta is undefined at xi = 0")
    units = xi / norms[:, None]
    bumps = _bump_values(net, units)
    den = bumps.sum(axis=1)
    if np.any(den <= 0):
        raise ValueError("sector bumps do not cover some direction")
    return bumps[:, nu] / den


def eta_partition_deviation(net: AngularNet, xi) -> float:
    """Max |sum_nu eta - 1| computed the expensive way (summing each sector)."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    norms = np.linalg.norm(xi, axis=-1)
    units = xi / norms[:, None]
    bumps = _bump_values(net, units)
    den = bumps.sum(axis=1)
    if np.any(den <= 0):
        raise ValueError("sector bumps do not cover some direction")
    total = (bumps / den[:, None]).sum(axis=1)
    return float(np.max(np.abs(total - 1.0)))


def lp_partition_audit(part: LPPartition, j_max: int, xi, tolerance: float = 1e-12) -> list:
    """Per-level partition audit records {j, max_deviation_from_one}.

    At level j the partial sum over i <= j is compared with 1 on the region
    |xi| <= 2^(j-1) where it must have saturated.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    norms = np.linalg.norm(xi, axis=-1)
    out = []
    running = part.psi_radial(0, norms)
    for j in range(1, j_max + 1):
        running = running + part.psi_radial(j, norms)
        inside = norms <= 2.0 ** (j - 1)
        dev = float(np.max(np.abs(running[inside] - 1.0))) if np.any(inside) else 0.0
        out.append({"j": j, "max_deviation_from_one": dev, "pass": bool(dev <= tolerance)})
    return out


def b_symbol(a: Amplitude, phase: Phase, net: AngularNet, j: int, nu: int):
    """Localized symbol of the rescaled sector kernel at level j, sector nu.

    b(x, xi) = exp(i 2^(j rho) (grad theta(x, xi) - grad theta(x, xi_nu)) . xi)
               * psi(2^(j(rho-1)+1) xi) * eta_j^nu(xi) * a(x, 2^(j rho) xi),
    supported in the annulus |xi| ~ 2^(j(1-rho)) intersected with the sector
    cone of xi_nu.
    """
    if j < 1:
        raise ValueError("sector symbols need j >= 1")
    rho = net.rho
    scale = 2.0 ** (j * rho)
    xi_nu = net.vectors[nu]

    def b(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        out = np.zeros(len(xi), dtype=complex)
        window = psi_window(j, rho, xi)
        live = window > 0
        if not np.any(live):
            return out
        xi_live = xi[live]
        grad = phase.theta_grad(x, xi_live)
        grad_nu = phase.theta_grad(x, xi_nu)
        osc = np.exp(1j * scale * np.sum((grad - grad_nu) * xi_live, axis=-1))
        sector = eta(net, nu, xi_live)
        amp = a.eval(x, scale * xi_live)
        out[live] = osc * window[live] * sector * amp
        return out

    return b


def g_weight(net: AngularNet, j: int, nu: int, rho: float, z) -> np.ndarray:
    """Anisotropic weight 1 + 2^(2 j rho) w_1^2 + 2^(j rho) |w'|^2 with w the
    coordinates of z in the frame where xi_nu = e_1."""
    z = np.asarray(z, dtype=float)
    w = z @ net.rotation(nu).T
    w1 = w[..., 0]
    rest = w[..., 1:]
    return 1.0 + 2.0 ** (2 * j * rho) * w1**2 + 2.0 ** (j * rho) * np.sum(rest**2, axis=-1)
