"""Numerical evaluation of the oscillatory-integral operator and its pieces.

The operator value at a probe x is the frequency-lattice sum
    (2 pi)^-n sum_xi a(x, xi) e^{i phi(x, xi)} fhat(xi) (2 pi / L)^n,
a direct summation: the x-dependent multiplier rules out a single fast
transform, so evaluation cost is (probes) x (lattice).  Kernels K(x, .) for a
fixed probe are one inverse FFT of the multiplier, which makes the spatial
A/B split (|z| above/below the split radius) and cube-localised applications
cheap per probe.  All identities used as oracles (sum of dyadic pieces, A+B
additivity, sector additivity) hold exactly on the lattice, up to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomposition import AngularNet, LPPartition, b_symbol
from .grid import DyadicCube, Grid, SampledFunction, fourier_coefficients
from .symbols import Amplitude, Phase, unit_sphere_probes

__all__ = [
    "FioOperator",
    "KernelSlice",
    "make_fio",
    "grid_j_max",
    "apply_fio",
    "apply_Tj",
    "split_T_AB",
    "kernel_K0",
    "kernel_K0_ell",
    "kernel_Kj_at",
    "kernel_Kj_nu",
    "sector_concentration",
    "apply_TjB_localized",
]

MAX_SLICE_BYTES = 2 << 30  # refuse kernel slices above 2 GiB


@dataclass(frozen=True)
class FioOperator:
    """Amplitude/phase pair bound to a grid, with the spatial split radius.

    split_radius = 1 + 2 * sup |grad_xi theta| (the sup estimated on |xi| = 1
    over x-probes and inflated by 5% so it dominates the true value).
    """

    amplitude: Amplitude
    phase: Phase
    grid: Grid
    split_radius: float


def _theta_grad_sup(phase: Phase, grid: Grid, x_probe_count: int = 1000) -> float:
    per_axis = max(2, int(round(x_probe_count ** (1.0 / grid.dim))))
    ax = (np.arange(per_axis) + 0.5) * grid.period / per_axis
    mesh = np.meshgrid(*([ax] * grid.dim), indexing="ij")
    xs = np.stack([m.ravel() for m in mesh], axis=-1)
    dirs = unit_sphere_probes(grid.dim, 32)
    worst = 0.0
    for u in dirs:
        g = phase.theta_grad(xs, np.broadcast_to(u, xs.shape).copy())
        worst = max(worst, float(np.linalg.norm(g, axis=-1).max()))
    return worst


def make_fio(amplitude: Amplitude, phase: Phase, grid: Grid,
             x_probe_count: int = 1000) -> FioOperator:
    sup = 1.05 * _theta_grad_sup(phase, grid, x_probe_count)
    return FioOperator(amplitude=amplitude, phase=phase, grid=grid,
                       split_radius=1.0 + 2.0 * sup)


def grid_j_max(grid: Grid) -> int:
    """Largest admissible dyadic level: the partial sums of psi_j reach 1 on
    the whole frequency lattice once 2^J covers the lattice diameter."""
    top = grid.nyquist * math.sqrt(grid.dim)
    return int(math.floor(math.log2(top))) + 1


def _check_finite(name, vals, x, xi):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        k = int(np.argmax(bad.ravel()))
        raise ValueError(f"non-finite {name} at x={x}, xi={np.atleast_2d(xi)[k]}")


def _symbol_on_lattice(op: FioOperator, x: np.ndarray, cutoff_flat: Optional[np.ndarray]):
    """Multiplier a(x, xi) e^{i theta(x, xi)} [* cutoff] on the frequency lattice."""
    g = op.grid
    xi = g.freq_points()
    if cutoff_flat is None:
        amp = op.amplitude.eval(x, xi)
        _check_finite("amplitude", amp, x, xi)
        th = op.phase.theta(x, xi)
        _check_finite("phase", th, x, xi)
        return (amp * np.exp(1j * th)).reshape(g.shape)
    m = np.zeros(g.size, dtype=complex)
    live = np.flatnonzero(cutoff_flat > 0)
    xi_live = xi[live]
    amp = op.amplitude.eval(x, xi_live)
    _check_finite("amplitude", amp, x, xi_live)
    th = op.phase.theta(x, xi_live)
    _check_finite("phase", th, x, xi_live)
    m[live] = amp * np.exp(1j * th) * cutoff_flat[live]
    return m.reshape(g.shape)


def _probe_array(grid: Grid, x_probes) -> np.ndarray:
    if x_probes is None:
        per_axis = {1: 64, 2: 16, 3: 6}[grid.dim]
        return grid.probe_indices(per_axis)
    return np.atleast_2d(np.asarray(x_probes, dtype=int))


def apply_fio(op: FioOperator, f: SampledFunction, x_probes=None,
              cutoff_flat: Optional[np.ndarray] = None) -> np.ndarray:
    """Direct-summation operator values at the probe lattice points.

    cutoff_flat optionally inserts a radial frequency multiplier (flattened
    over the lattice), used by the dyadic pieces.
    """
    g = op.grid
    probes = _probe_array(g, x_probes)
    fhat = fourier_coefficients(f).ravel()
    xi = g.freq_points()
    if cutoff_flat is not None:
        live = np.flatnonzero(cutoff_flat > 0)
        xi = xi[live]
        fhat = fhat[live] * cutoff_flat[live]
    out = np.empty(len(probes), dtype=complex)
    for p, idx in enumerate(probes):
        x = g.index_to_point(idx)
        amp = op.amplitude.eval(x, xi)
        _check_finite("amplitude", amp, x, xi)
        ph = op.phase.eval(x, xi)
        _check_finite("phase", ph, x, xi)
        out[p] = np.sum(amp * np.exp(1j * ph) * fhat) / g.period**g.dim
    return out


def apply_Tj(op: FioOperator, part: LPPartition, j: int, f: SampledFunction,
             x_probes=None) -> np.ndarray:
    """Dyadic piece: apply_fio with the annular cutoff psi_j inserted."""
    g = op.grid
    if j > grid_j_max(g):
        raise ValueError(f"j={j} beyond the grid Nyquist range (j_max={grid_j_max(g)})")
    norms = np.linalg.norm(g.freq_points(), axis=-1)
    cutoff = part.psi_radial(j, norms)
    return apply_fio(op, f, x_probes, cutoff_flat=cutoff)


@dataclass(frozen=True)
class KernelSlice:
    """Sampled kernel values K(x, z) on probe points x and a z set.

    values has shape (len(x_indices), len(z) or the full lattice shape);
    z_lattice marks full-lattice slices (z in FFT order).
    """

    j: Optional[int]
    tag: str
    x_indices: np.ndarray
    values: np.ndarray
    z_lattice: bool

    def __post_init__(self):
        if self.values.size * 16 > MAX_SLICE_BYTES:
            raise MemoryError("kernel slice would exceed the 2 GiB budget")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("kernel slice contains non-finite values")

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x_probe,z_flat_index,re,im\n")
            flat = self.values.reshape(len(self.x_indices), -1)
            for p in range(flat.shape[0]):
                for q in range(flat.shape[1]):
                    v = flat[p, q]
                    fh.write(f"{p},{q},{float(v.real)!r},{float(v.imag)!r}\n")


def _kernel_full_lattice(op: FioOperator, x: np.ndarray, cutoff_flat) -> np.ndarray:
    """K(x, z) on the full z-lattice (FFT order) by one inverse transform."""
    g = op.grid
    m = _symbol_on_lattice(op, x, cutoff_flat)
    return (g.samples_per_axis / g.period) ** g.dim * np.fft.ifftn(m)


def kernel_K0(op: FioOperator, x_probes=None) -> KernelSlice:
    """Low-frequency kernel K_0(x, z) on the full z-lattice."""
    g = op.grid
    probes = _probe_array(g, x_probes)
    norms = np.linalg.norm(g.freq_points(), axis=-1)
    part = LPPartition()
    cutoff = part.psi_radial(0, norms)
    vals = np.stack([_kernel_full_lattice(op, g.index_to_point(i), cutoff) for i in probes])
    return KernelSlice(j=0, tag="K0", x_indices=probes, values=vals, z_lattice=True)


def kernel_K0_ell(op: FioOperator, ell: int, x_probes=None) -> KernelSlice:
    """Dyadic spatial piece K_0^ell(x, z) = K_0(x, z) psi_ell(z)."""
    g = op.grid
    if ell < 0:
        raise ValueError("ell must be >= 0")
    if 2.0 ** (ell + 2) > g.period / 2:
        raise ValueError(f"ell={ell} too large for the period cell (need 2^(ell+2) <= L/2)")
    base = kernel_K0(op, x_probes)
    part = LPPartition()
    zpsi = part.psi_radial(ell, g.signed_offset_norms())
    return KernelSlice(j=0, tag=f"K0_ell{ell}", x_indices=base.x_indices,
                       values=base.values * zpsi[None], z_lattice=True)


def kernel_Kj_at(op: FioOperator, part: LPPartition, j: int, x_probes, z_points) -> KernelSlice:
    """K_j(x, z) at arbitrary z by direct summation over the annulus lattice."""
    g = op.grid
    probes = _probe_array(g, x_probes)
    z = np.atleast_2d(np.asarray(z_points, dtype=float))
    xi = g.freq_points()
    norms = np.linalg.norm(xi, axis=-1)
    cut = part.psi_radial(j, norms)
    live = np.flatnonzero(cut > 0)
    xi_live = xi[live]
    vals = np.empty((len(probes), len(z)), dtype=complex)
    for p, idx in enumerate(probes):
        x = g.index_to_point(idx)
        amp = op.amplitude.eval(x, xi_live)
        th = op.phase.theta(x, xi_live)
        base = amp * np.exp(1j * th) * cut[live]
        vals[p] = (np.exp(1j * (z @ xi_live.T)) * base[None, :]).sum(axis=1) / g.period**g.dim
    return KernelSlice(j=j, tag="Kj", x_indices=probes, values=vals, z_lattice=False)


def kernel_Kj_nu(op: FioOperator, net: AngularNet, j: int, nu: int,
                 x_probes, z_points=None, part: Optional[LPPartition] = None) -> KernelSlice:
    """Sector kernel: quadrature of the rescaled localised symbol.

    Change of variables puts the quadrature points at xi = u / 2^(j rho) for u
    on the grid frequency lattice, so summing over nu reproduces K_j exactly
    (the sector cutoffs sum to one at every quadrature node).
    """
    g = op.grid
    part = part or LPPartition()
    probes = _probe_array(g, x_probes)
    scale = 2.0 ** (j * net.rho)
    u = g.freq_points()
    norms = np.linalg.norm(u, axis=-1)
    live = np.flatnonzero(part.psi_radial(j, norms) > 0)
    u_live = u[live]
    xi_res = u_live / scale
    b = b_symbol(op.amplitude, op.phase, net, j, nu)
    xi_nu = net.vectors[nu]
    if z_points is None:
        vals = np.empty((len(probes),) + g.shape, dtype=complex)
    else:
        z = np.atleast_2d(np.asarray(z_points, dtype=float))
        vals = np.empty((len(probes), len(z)), dtype=complex)
    for p, idx in enumerate(probes):
        x = g.index_to_point(idx)
        bvals = b(x, xi_res)
        grad_nu = np.asarray(op.phase.theta_grad(x, xi_nu))
        carrier = bvals * np.exp(1j * (u_live @ grad_nu))
        if z_points is None:
            m = np.zeros(g.size, dtype=complex)
            m[live] = carrier
            vals[p] = (g.samples_per_axis / g.period) ** g.dim * np.fft.ifftn(m.reshape(g.shape))
        else:
            vals[p] = (np.exp(1j * (z @ u_live.T)) * carrier[None, :]).sum(axis=1) / g.period**g.dim
    return KernelSlice(j=j, tag=f"Kj_nu{nu}", x_indices=probes, values=vals,
                       z_lattice=z_points is None)


def sector_concentration(op: FioOperator, net: AngularNet, j: int, nu: int,
                         x_probes=None, weight_power: Optional[int] = None) -> dict:
    """Weighted sup of the sector kernel: sup_z |g^N(grad theta(x, xi_nu) + z) K(x, z)|.

    The sup runs over the |z| <= split_radius region of the lattice.  Two
    weight variants are recorded: 'full' uses the complete shifted gradient
    in the rotated frame, 'prime' drops the first (axis) coordinate and keeps
    only the transverse weight 1 + 2^(j rho) |w'|^2.
    """
    g = op.grid
    if weight_power is None:
        weight_power = g.dim + 1
    probes = _probe_array(g, x_probes)
    rho = net.rho
    slice_ = kernel_Kj_nu(op, net, j, nu, probes, z_points=None)
    ax = g.axis_signed_coords()
    mesh = np.meshgrid(*([ax] * g.dim), indexing="ij")
    z = np.stack([m.ravel() for m in mesh], axis=-1)
    zone = (np.sqrt(np.sum(z**2, axis=-1)) <= op.split_radius)
    xi_nu = net.vectors[nu]
    R = net.rotation(nu)
    sup_full = 0.0
    sup_prime = 0.0
    for p, idx in enumerate(probes):
        x = g.index_to_point(idx)
        shift = np.asarray(op.phase.theta_grad(x, xi_nu)) + z[zone]
        w = shift @ R.T
        g_full = 1.0 + 2.0 ** (2 * j * rho) * w[:, 0] ** 2 + 2.0 ** (j * rho) * np.sum(w[:, 1:] ** 2, axis=-1)
        g_prime = 1.0 + 2.0 ** (j * rho) * np.sum(w[:, 1:] ** 2, axis=-1)
        kv = np.abs(slice_.values[p].ravel()[zone])
        sup_full = max(sup_full, float(np.max(g_full**weight_power * kv)))
        sup_prime = max(sup_prime, float(np.max(g_prime**weight_power * kv)))
    return {"full": sup_full, "prime": sup_prime, "weight_power": weight_power}


def _shifted_values(f: SampledFunction, idx: np.ndarray) -> np.ndarray:
    """f(x - z) over the z-lattice (FFT order) for the probe at integer index idx."""
    g = f.grid
    N = g.samples_per_axis
    rows = [(int(i) - np.arange(N)) % N for i in idx]
    return f.values[np.ix_(*rows)]


def split_T_AB(op: FioOperator, part: LPPartition, j: int, f: SampledFunction,
               x_probes=None):
    """Spatial split of the dyadic piece at the probe points.

    Returns (T_j^A f, T_j^B f): kernel quadratures of K_j(x, z) f(x-z) over
    |z| > split_radius and |z| <= split_radius (minimum-image norm on the
    torus); their sum equals apply_Tj up to roundoff.
    """
    g = op.grid
    if j > grid_j_max(g):
        raise ValueError(f"j={j} beyond the grid Nyquist range")
    probes = _probe_array(g, x_probes)
    R = op.split_radius
    maskB = g.signed_offset_norms() <= R
    norms = np.linalg.norm(g.freq_points(), axis=-1)
    cutoff = part.psi_radial(j, norms)
    cell = g.spacing**g.dim
    outA = np.empty(len(probes), dtype=complex)
    outB = np.empty(len(probes), dtype=complex)
    for p, idx in enumerate(probes):
        K = _kernel_full_lattice(op, g.index_to_point(idx), cutoff)
        prod = K * _shifted_values(f, idx)
        outB[p] = prod[maskB].sum() * cell
        outA[p] = prod[~maskB].sum() * cell
    return outA, outB


def apply_TjB_localized(op: FioOperator, part: LPPartition, j: int, f: SampledFunction,
                        Q: DyadicCube, x_probes=None) -> np.ndarray:
    """T_j^B applied to f restricted to the concentric third of Q.

    Requires side(Q) >= 3 * split_radius so the output is supported in Q
    (kernel reach R from a source inside the central third stays inside).
    """
    g = op.grid
    if Q.side < 3 * op.split_radius - 1e-12:
        raise ValueError(
            f"cube side {Q.side:.3g} below 3*split_radius = {3 * op.split_radius:.3g}")
    masked = SampledFunction(g, f.values * Q.third_mask())
    _, outB = split_T_AB(op, part, j, masked, x_probes)
    return outB
