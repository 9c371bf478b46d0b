"""Amplitude and phase symbol objects plus numerical audits of their hypotheses.

Amplitudes carry an order m and type rho with the weighted derivative bounds
    sup_xi (1+|xi|^2)^((-m+rho|alpha|)/2) |d^alpha_xi a(x,xi)| <= C_alpha,
phases are positively 1-homogeneous in xi with |xi|^(|alpha|-1)-weighted
derivative control on theta(x,xi) = phi(x,xi) - x.xi.  All estimates here are
probe suprema (lower bounds on the true sup), with derivatives taken by
central finite differences unless analytic callbacks are attached.

Evaluation callbacks are vectorised: x and xi are arrays of shape (..., dim)
that broadcast against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional

import numpy as np

__all__ = [
    "Amplitude",
    "Phase",
    "ProbeSet",
    "default_probes",
    "theta_of",
    "euler_residual",
    "homogeneity_residual",
    "estimate_amplitude_seminorm",
    "estimate_phase_seminorm",
    "det_minor",
    "nondegeneracy_min",
    "measure_condition_constant",
    "weight_amplitude",
    "phase_archetype",
    "phase_linear",
    "phase_shift",
    "amplitude_power",
    "piecewise_constant_field",
    "piecewise_sign_field",
    "make_phase",
    "make_amplitude",
    "PHASE_NAMES",
    "AMPLITUDE_NAMES",
    "unit_sphere_probes",
    "ball_volume",
]

# Relative finite-difference steps by derivative order (central differences).
# First order 1e-5 and second order 1e-4 balance truncation against roundoff
# for degree-one homogeneous phases at double precision; higher orders need
# larger steps to keep the 1/h^k roundoff amplification in check.
FD_STEP_REL = {1: 1e-5, 2: 1e-4, 3: 1e-3, 4: 4e-3}


@dataclass(frozen=True)
class Amplitude:
    """Callable symbol a(x, xi) with order/type metadata."""

    eval: Callable
    order: float
    rho: float
    claimed_constants: Optional[Mapping] = None
    label: str = ""
    weight_base: Optional["Amplitude"] = None
    weight_exp: complex = 0.0

    def __call__(self, x, xi):
        return self.eval(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))


@dataclass(frozen=True)
class Phase:
    """Callable phase phi(x, xi), positively homogeneous of degree one in xi.

    grad_xi / hess_xi are optional analytic callbacks for the xi-derivatives;
    finite differences are used when absent.  nondegeneracy_floor and
    measure_constant are *claimed* values that the audits certify.
    """

    eval: Callable
    grad_xi: Optional[Callable] = None
    hess_xi: Optional[Callable] = None
    nondegeneracy_floor: Optional[float] = None
    measure_constant: Optional[float] = None
    label: str = ""

    def __call__(self, x, xi):
        return self.eval(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))

    def theta(self, x, xi):
        """theta(x, xi) = phi(x, xi) - x.xi."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return self.eval(x, xi) - np.sum(x * xi, axis=-1)

    def theta_grad(self, x, xi):
        """Gradient of theta in xi, analytic when available."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if self.grad_xi is not None:
            return np.asarray(self.grad_xi(x, xi)) - x
        return _fd_gradient(self.theta, x, xi)

    def theta_hess(self, x, xi):
        """Hessian of theta (= Hessian of phi) in xi."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if self.hess_xi is not None:
            return np.asarray(self.hess_xi(x, xi))
        return _fd_hessian(self.theta, x, xi)


def theta_of(phase: Phase) -> Callable:
    """Return the callable theta(x, xi) = phi(x, xi) - x.xi."""
    return phase.theta


# -- finite differences --------------------------------------------------------


def _fd_gradient(func, x, xi, step_rel=FD_STEP_REL[1]):
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    h = step_rel * max(float(np.linalg.norm(xi, axis=-1).max()), 1e-30)
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        cols.append((func(x, xi + e) - func(x, xi - e)) / (2 * h))
    return np.stack(cols, axis=-1)


def _fd_hessian(func, x, xi, step_rel=FD_STEP_REL[2]):
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    h = step_rel * max(float(np.linalg.norm(xi)), 1e-30)
    H = np.empty((n, n))
    f0 = func(x, xi)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (func(x, xi + ei) - 2 * f0 + func(x, xi - ei)) / h**2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (
                func(x, xi + ei + ej)
                - func(x, xi + ei - ej)
                - func(x, xi - ei + ej)
                + func(x, xi - ei - ej)
            ) / (4 * h**2)
    return H


def _fd_partial(func, x, xi, alpha, h):
    """Iterated central difference d^alpha in xi (vectorised over xi)."""
    alpha = list(alpha)
    for k, a in enumerate(alpha):
        if a > 0:
            e = np.zeros(len(alpha))
            e[k] = h
            alpha[k] -= 1
            return (
                _fd_partial(func, x, xi + e, alpha, h) - _fd_partial(func, x, xi - e, alpha, h)
            ) / (2 * h)
    return func(x, xi)


# -- probe sets ----------------------------------------------------------------


@dataclass(frozen=True)
class ProbeSet:
    """x-probes (P, dim) and xi-probes (Q, dim) for the seminorm estimates."""

    x: np.ndarray
    xi: np.ndarray


def unit_sphere_probes(dim: int, count: int = 32) -> np.ndarray:
    """Deterministic unit directions: +-1, uniform angles, or a Fibonacci set."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2 * math.pi * np.arange(count) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    i = np.arange(count)
    golden = (1 + math.sqrt(5)) / 2
    z = 1 - (2 * i + 1) / count
    phi = 2 * math.pi * i / golden
    rxy = np.sqrt(np.maximum(1 - z**2, 0.0))
    return np.stack([rxy * np.cos(phi), rxy * np.sin(phi), z], axis=-1)


def default_probes(dim: int, period: float = 2 * math.pi, shells: int = 5,
                   angular: int = 32, x_per_axis: int = 4) -> ProbeSet:
    """Dyadic shells |xi| in {2, ..., 2^shells} with angular samples, and a
    uniform x-lattice over the period cell."""
    dirs = unit_sphere_probes(dim, angular)
    radii = 2.0 ** np.arange(1, shells + 1)
    xi = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    ax = (np.arange(x_per_axis) + 0.5) * period / x_per_axis
    mesh = np.meshgrid(*([ax] * dim), indexing="ij")
    x = np.stack([m.ravel() for m in mesh], axis=-1)
    return ProbeSet(x=x, xi=xi)


# -- audits --------------------------------------------------------------------


def homogeneity_residual(phase: Phase, x_probes, xi_probes, lambdas=(0.5, 2.0, 3.0)) -> float:
    """Max residual of phi(x, lam*xi) - lam*phi(x, xi) over probes."""
    worst = 0.0
    x = np.asarray(x_probes, dtype=float)[:, None, :]
    xi = np.asarray(xi_probes, dtype=float)[None, :, :]
    base = phase.eval(x, xi)
    for lam in lambdas:
        res = np.abs(phase.eval(x, lam * xi) - lam * base)
        worst = max(worst, float(res.max()))
    return worst


def euler_residual(phase: Phase, x, xi):
    """Residuals of the degree-one Euler identities for theta = phi - x.xi.

    Returns (|theta - grad_xi(theta).xi|, max_k |(grad_xi d_k theta).xi|).
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.linalg.norm(xi) == 0:
        raise ValueError("euler_residual requires xi != 0")
    theta = phase.theta(x, xi)
    grad = phase.theta_grad(x, xi)
    first = abs(float(theta - np.dot(grad, xi)))
    hess = phase.theta_hess(x, xi)
    second = float(np.max(np.abs(hess @ xi)))
    return first, second


def estimate_amplitude_seminorm(a: Amplitude, alpha, probes: ProbeSet) -> float:
    """Probe supremum of (1+|xi|^2)^((-m+rho|alpha|)/2) |d^alpha_xi a(x, xi)|."""
    alpha = tuple(int(v) for v in alpha)
    order = sum(alpha)
    if order > 4:
        raise ValueError("seminorm estimates support |alpha| <= 4")
    xi = np.asarray(probes.xi, dtype=float)
    weight = (1.0 + np.sum(xi**2, axis=-1)) ** ((-a.order + a.rho * order) / 2.0)
    worst = 0.0
    for x in np.asarray(probes.x, dtype=float):
        if order == 0:
            deriv = a.eval(x, xi)
        else:
            h = FD_STEP_REL[order] * float(np.linalg.norm(xi, axis=-1).min())
            deriv = _fd_partial(a.eval, x, xi, alpha, h)
        vals = weight * np.abs(deriv)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise ValueError(f"non-finite derivative at x={x}, xi={xi[bad]}")
        worst = max(worst, float(vals.max()))
    return worst


def estimate_phase_seminorm(phase: Phase, alpha, probes: ProbeSet, part: str = "theta") -> float:
    """Probe supremum of |xi|^(|alpha|-1) |d^alpha_xi theta(x, xi)|.

    part='phi' estimates on the full phase instead of theta; for |alpha| >= 2
    the two agree since the x.xi term drops out.
    """
    alpha = tuple(int(v) for v in alpha)
    order = sum(alpha)
    if order < 1:
        raise ValueError("phase seminorms require |alpha| >= 1")
    if order > 4:
        raise ValueError("seminorm estimates support |alpha| <= 4")
    func = phase.theta if part == "theta" else phase.eval
    xi = np.asarray(probes.xi, dtype=float)
    weight = np.linalg.norm(xi, axis=-1) ** (order - 1)
    worst = 0.0
    for x in np.asarray(probes.x, dtype=float):
        h = FD_STEP_REL[order] * float(np.linalg.norm(xi, axis=-1).min())
        deriv = _fd_partial(func, x, xi, alpha, h)
        vals = weight * np.abs(deriv)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise ValueError(f"non-finite derivative at x={x}, xi={xi[bad]}")
        worst = max(worst, float(vals.max()))
    return worst


def det_minor(M: np.ndarray) -> float:
    """Determinant of a rank-(n-1) matrix restricted to the orthocomplement of
    its kernel.

    Requires numerical rank exactly n-1: smallest singular value at most
    1e-8 times the largest, second smallest above 1e-6 times the largest.
    The split separates the exact kernel forced by homogeneity from genuinely
    small curvature.  For n = 1 the restriction is the empty matrix and the
    determinant is 1 by convention.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    _, s, Vt = np.linalg.svd(M)
    smax = s[0]
    if n == 1:
        if s[0] > 1e-8 * max(smax, 1.0):
            raise ValueError(f"expected rank 0, singular value {s[0]:.3e}")
        return 1.0
    if s[-1] > 1e-8 * smax or not (s[-2] > 1e-6 * smax):
        raise ValueError(
            f"matrix rank is not n-1: two smallest singular values "
            f"{s[-1]:.3e}, {s[-2]:.3e} (largest {smax:.3e})"
        )
    B = Vt[:-1].T
    return float(np.linalg.det(B.T @ M @ B))


def nondegeneracy_min(phase: Phase, x_probes, sphere_probes) -> float:
    """Certified lower bound: min over probes of |det_minor(hess_xi phi)|.

    Finite-difference Hessians are symmetrised and the Euler-forced kernel
    direction xi is projected out first, removing the O(eps/h^2) noise that
    would otherwise trip the rank test.
    """
    analytic = phase.hess_xi is not None
    worst = math.inf
    for x in np.asarray(x_probes, dtype=float):
        for xi in np.asarray(sphere_probes, dtype=float):
            H = phase.theta_hess(x, xi)
            if not analytic:
                H = 0.5 * (H + H.T)
                u = xi / np.linalg.norm(xi)
                P = np.eye(len(u)) - np.outer(u, u)
                H = P @ H @ P
            try:
                val = abs(det_minor(H))
            except ValueError as exc:
                raise ValueError(f"degenerate Hessian at x={x}, xi={xi}: {exc}") from exc
            worst = min(worst, val)
    return worst


def measure_condition_constant(phase: Phase, grid, radii, y_probes, xi_probes) -> float:
    """Largest c with |{x : |grad_xi phi(x, xi) - y| <= r}| <= r^n / c across probes.

    The measure is lattice counting times the cell volume; empty sublevel sets
    impose no constraint.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    lo, hi = grid.spacing, grid.period / 4
    if np.any(radii < lo - 1e-12) or np.any(radii > hi + 1e-12):
        raise ValueError(f"radii must lie within [L/N, L/4] = [{lo:.3g}, {hi:.3g}]")
    X = grid.spatial_points()
    cell = grid.spacing**grid.dim
    best = math.inf
    for xi in np.asarray(xi_probes, dtype=float):
        if phase.grad_xi is not None:
            G = np.asarray(phase.grad_xi(X, xi[None, :] * np.ones((len(X), 1))))
        else:
            G = _fd_gradient(phase.eval, X, np.broadcast_to(xi, X.shape).copy())
        for y in np.asarray(y_probes, dtype=float):
            dist = np.linalg.norm(G - y, axis=-1)
            for r in radii:
                measure = float(np.count_nonzero(dist <= r)) * cell
                if measure > 0:
                    best = min(best, r**grid.dim / measure)
    return best


def weight_amplitude(a: Amplitude, w: complex) -> Amplitude:
    """Amplitude a(x,xi) * (1+|xi|^2)^w; order shifts by 2*Re(w), rho unchanged.

    Repeated weighting accumulates the exponent, so weighting by u then v
    evaluates (1+|xi|^2)^(u+v) in one shot and is pointwise identical to
    weighting by u+v.
    """
    base = a.weight_base if a.weight_base is not None else a
    total = complex(a.weight_exp) + complex(w)

    def evaluate(x, xi, _base=base, _w=total):
        s = 1.0 + np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1)
        return _base.eval(x, xi) * s**_w

    return Amplitude(
        eval=evaluate,
        order=base.order + 2 * total.real,
        rho=base.rho,
        claimed_constants=None,
        label=f"{base.label}*weight({total})",
        weight_base=base,
        weight_exp=total,
    )


# -- archetypes ----------------------------------------------------------------


def ball_volume(dim: int) -> float:
    return {1: 2.0, 2: math.pi, 3: 4 * math.pi / 3}[dim]


def piecewise_constant_field(dim: int, period: float, pieces: int, low: float,
                             high: float, seed: int) -> Callable:
    """Seeded piecewise-constant function on a pieces^dim partition of the cell.

    The canonical rough-but-reproducible model of a bounded measurable
    coefficient; values are uniform in [low, high].
    """
    rng = np.random.default_rng(seed)
    table = low + (high - low) * rng.random((pieces,) * dim)

    def field(x):
        x = np.asarray(x, dtype=float)
        idx = np.floor(x * pieces / period).astype(int) % pieces
        return table[tuple(idx[..., k] for k in range(dim))]

    field.table = table
    return field


def piecewise_sign_field(dim: int, period: float, pieces: int, seed: int) -> Callable:
    """Seeded piecewise-constant random-sign (+-1) function."""
    rng = np.random.default_rng(seed)
    table = rng.integers(0, 2, size=(pieces,) * dim) * 2.0 - 1.0

    def field(x):
        x = np.asarray(x, dtype=float)
        idx = np.floor(x * pieces / period).astype(int) % pieces
        return table[tuple(idx[..., k] for k in range(dim))]

    field.table = table
    return field


def phase_archetype(t: Callable, dim: int, period: float = 2 * math.pi) -> Phase:
    """Half-wave style phase phi(x, xi) = x.xi + t(x)|xi| with bounded t.

    Analytic gradient x + t(x) xi/|xi| and Hessian t(x)(I - u u^T)/|xi| are
    attached; the claimed non-degeneracy floor is min |t|^(dim-1) over a dense
    sample and the claimed measure constant is 1/vol(unit ball).
    """
    if np.isscalar(t):
        tval = float(t)
        t = lambda x: np.full(np.asarray(x).shape[:-1], tval)

    # Bounded-ness audit on a dense sample of the period cell.
    probe_ax = (np.arange(64) + 0.5) * period / 64
    mesh = np.meshgrid(*([probe_ax] * dim), indexing="ij")
    sample_x = np.stack([m.ravel() for m in mesh], axis=-1)
    tvals = np.asarray(t(sample_x), dtype=float)
    if not np.all(np.isfinite(tvals)):
        raise ValueError("t(x) takes non-finite values on the grid")

    def evaluate(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return np.sum(x * xi, axis=-1) + t(x) * np.linalg.norm(xi, axis=-1)

    def grad(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        norm = np.linalg.norm(xi, axis=-1, keepdims=True)
        unit = np.divide(xi, norm, out=np.zeros_like(xi), where=norm > 0)
        return x + np.asarray(t(x))[..., None] * unit

    def hess(x, xi):
        xi = np.asarray(xi, dtype=float)
        norm = float(np.linalg.norm(xi))
        unit = xi / norm
        return float(t(np.asarray(x, dtype=float))) * (np.eye(dim) - np.outer(unit, unit)) / norm

    floor = float(np.min(np.abs(tvals)) ** (dim - 1))
    return Phase(
        eval=evaluate,
        grad_xi=grad,
        hess_xi=hess,
        nondegeneracy_floor=floor,
        measure_constant=1.0 / ball_volume(dim),
        label="halfwave",
    )


def phase_linear(dim: int) -> Phase:
    """phi(x, xi) = x.xi (theta = 0; fully degenerate Hessian)."""
    return Phase(
        eval=lambda x, xi: np.sum(np.asarray(x, dtype=float) * np.asarray(xi, dtype=float), axis=-1),
        grad_xi=lambda x, xi: np.broadcast_to(np.asarray(x, dtype=float), np.asarray(xi).shape).copy(),
        hess_xi=lambda x, xi: np.zeros((dim, dim)),
        label="linear",
    )


def phase_shift(e) -> Phase:
    """phi(x, xi) = x.xi + e.xi, the translation-by-e multiplier phase."""
    e = np.asarray(e, dtype=float)
    dim = len(e)

    def evaluate(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return np.sum(x * xi, axis=-1) + np.sum(e * xi, axis=-1)

    return Phase(
        eval=evaluate,
        grad_xi=lambda x, xi: np.broadcast_to(np.asarray(x, dtype=float) + e, np.asarray(xi).shape).copy(),
        hess_xi=lambda x, xi: np.zeros((dim, dim)),
        label="shift",
    )


def amplitude_power(m: float, rho: float, rough) -> Amplitude:
    """a(x, xi) = rough(x) * (1+|xi|^2)^(m/2) with bounded rough."""
    if np.isscalar(rough):
        rval = complex(rough)
        rough = lambda x: np.full(np.asarray(x).shape[:-1], rval)

    def evaluate(x, xi):
        xi = np.asarray(xi, dtype=float)
        s = 1.0 + np.sum(xi**2, axis=-1)
        return np.asarray(rough(np.asarray(x, dtype=float))) * s ** (m / 2.0)

    return Amplitude(eval=evaluate, order=m, rho=rho, label="power")


PHASE_NAMES = ("linear", "halfwave", "halfwave-rough")
AMPLITUDE_NAMES = ("one", "zero", "power", "power-rough")


def make_phase(name: str, dim: int, period: float, seed: int = 0, pieces: int = 16,
               t_low: float = 1.0, t_high: float = 2.0) -> Phase:
    """Built-in phase registry, addressable by name + seed."""
    if name == "linear":
        return phase_linear(dim)
    if name == "halfwave":
        return phase_archetype(1.0, dim, period)
    if name == "halfwave-rough":
        t = piecewise_constant_field(dim, period, pieces, t_low, t_high, seed)
        return phase_archetype(t, dim, period)
    raise ValueError(f"unknown phase {name!r}; choose from {PHASE_NAMES}")


def make_amplitude(name: str, dim: int, m: float = 0.0, rho: float = 1.0,
                   period: float = 2 * math.pi, seed: int = 0, pieces: int = 16) -> Amplitude:
    """Built-in amplitude registry, addressable by name + seed."""
    if name == "one":
        return amplitude_power(0.0, rho, 1.0)
    if name == "zero":
        return Amplitude(eval=lambda x, xi: np.zeros(np.broadcast(
            np.asarray(x)[..., 0], np.asarray(xi)[..., 0]).shape, dtype=complex),
            order=m, rho=rho, label="zero")
    if name == "power":
        return amplitude_power(m, rho, 1.0)
    if name == "power-rough":
        rough = piecewise_sign_field(dim, period, pieces, seed)
        return amplitude_power(m, rho, rough)
    raise ValueError(f"unknown amplitude {name!r}; choose from {AMPLITUDE_NAMES}")
