"""Periodic sampling grids, discrete transforms, dyadic cubes and averages.

Everything lives on the torus [0, L)^dim sampled at N points per axis.  The
frequency lattice has spacing 2*pi/L and covers [-pi*N/L, pi*N/L) per axis,
stored in FFT order.  Frequency integrals are lattice sums times (2*pi/L)^dim
and spatial integrals are lattice sums times (L/N)^dim; both are exact for
band-limited integrands, which is why the torus discretisation is used as
ground truth throughout the package.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "SampledFunction",
    "DyadicCube",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "fourier_coefficients",
    "from_fourier_coefficients",
    "cube_average",
    "save_binary",
    "load_binary",
    "to_csv",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Periodic grid on [0, L)^dim with N samples per axis (N a power of two)."""

    dim: int
    samples_per_axis: int
    period: float

    @property
    def spacing(self) -> float:
        """Spatial lattice spacing h = L/N."""
        return self.period / self.samples_per_axis

    @property
    def freq_spacing(self) -> float:
        """Frequency lattice spacing 2*pi/L."""
        return 2.0 * math.pi / self.period

    @property
    def nyquist(self) -> float:
        """Largest per-axis frequency magnitude pi*N/L."""
        return math.pi * self.samples_per_axis / self.period

    @property
    def shape(self) -> tuple:
        return (self.samples_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.samples_per_axis**self.dim

    def axis_coords(self) -> np.ndarray:
        """Spatial sample coordinates along one axis: 0, h, ..., L-h."""
        return np.arange(self.samples_per_axis) * self.spacing

    def axis_freqs(self) -> np.ndarray:
        """Frequency coordinates along one axis in FFT order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.samples_per_axis, d=self.spacing)

    def axis_signed_coords(self) -> np.ndarray:
        """Signed (minimum-image) spatial offsets in FFT order, in [-L/2, L/2)."""
        return self.period * np.fft.fftfreq(self.samples_per_axis)

    def freq_points(self) -> np.ndarray:
        """All lattice frequencies as an (N^dim, dim) array, FFT order flattened."""
        axes = [self.axis_freqs()] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def spatial_points(self) -> np.ndarray:
        """All lattice points as an (N^dim, dim) array."""
        axes = [self.axis_coords()] * self.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def signed_offset_norms(self) -> np.ndarray:
        """|z| on the full lattice of minimum-image offsets, shape (N,)*dim."""
        ax = self.axis_signed_coords()
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.sqrt(sum(m**2 for m in mesh))

    def index_to_point(self, idx) -> np.ndarray:
        """Coordinates of the lattice point with integer index vector idx."""
        return np.asarray(idx, dtype=float) * self.spacing

    def probe_indices(self, per_axis: int) -> np.ndarray:
        """Uniform sub-lattice of probe indices, shape (per_axis^dim, dim)."""
        stride = max(1, self.samples_per_axis // per_axis)
        ax = np.arange(0, self.samples_per_axis, stride)[:per_axis]
        mesh = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1).astype(int)


def make_grid(dim: int, N: int, L: float) -> Grid:
    """Build a grid, rejecting invalid dimensions and sample counts."""
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if not isinstance(N, (int, np.integer)) or not _is_power_of_two(int(N)):
        raise ValueError(f"N must be a power of two, got {N}")
    if not (8 <= N <= 4096):
        raise ValueError(f"N must lie in [8, 4096], got {N}")
    if not (L > 0):
        raise ValueError(f"period L must be positive, got {L}")
    return Grid(dim=dim, samples_per_axis=int(N), period=float(L))


@dataclass(frozen=True)
class SampledFunction:
    """Complex values sampled on a grid; carries either spatial or frequency data."""

    grid: Grid
    values: np.ndarray
    side: str = "space"  # "space" or "freq"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            vals = vals.reshape(self.grid.shape)
        object.__setattr__(self, "values", vals)
        if self.side not in ("space", "freq"):
            raise ValueError(f"side must be 'space' or 'freq', got {self.side!r}")

    def norm2(self) -> float:
        """Plain l2 norm of the sample vector (preserved by the unitary transforms)."""
        return float(np.linalg.norm(self.values))

    def scaled(self, c: complex) -> "SampledFunction":
        return SampledFunction(self.grid, c * self.values, self.side)


def _check_finite(f: SampledFunction):
    if not np.all(np.isfinite(f.values)):
        bad = np.argwhere(~np.isfinite(f.values))[0]
        raise ValueError(f"non-finite sample at index {tuple(int(b) for b in bad)}")


def forward_transform(f: SampledFunction) -> SampledFunction:
    """Unitary DFT to the frequency side; inverse_transform undoes it exactly."""
    _check_finite(f)
    return SampledFunction(f.grid, np.fft.fftn(f.values, norm="ortho"), side="freq")


def inverse_transform(f: SampledFunction) -> SampledFunction:
    """Unitary inverse DFT back to the spatial side."""
    _check_finite(f)
    return SampledFunction(f.grid, np.fft.ifftn(f.values, norm="ortho"), side="space")


def fourier_coefficients(f: SampledFunction) -> np.ndarray:
    """Continuum-normalised coefficients fhat(xi) = (L/N)^dim * sum_x f(x) e^{-i x.xi}.

    This is the trapezoid quadrature of the Fourier integral over one period
    cell, exact for band-limited f; the values index the FFT-ordered frequency
    lattice.
    """
    _check_finite(f)
    g = f.grid
    return np.fft.fftn(f.values) * g.spacing**g.dim


def from_fourier_coefficients(grid: Grid, fhat: np.ndarray) -> SampledFunction:
    """Inverse of fourier_coefficients."""
    vals = np.fft.ifftn(np.asarray(fhat, dtype=complex)) / grid.spacing**grid.dim
    return SampledFunction(grid, vals, side="space")


@dataclass(frozen=True)
class DyadicCube:
    """Dyadic cube of generation `level` inside the period cell.

    Side length is L * 2^-level; corner_index ranges over [0, 2^level)^dim.
    The 2^dim children partition the parent exactly, both as sets and as
    lattice-point collections.
    """

    grid: Grid
    level: int
    corner_index: tuple = field(default=())

    def __post_init__(self):
        corner = tuple(int(c) for c in np.atleast_1d(np.asarray(self.corner_index, dtype=int)))
        if len(corner) == 0:
            corner = (0,) * self.grid.dim
        object.__setattr__(self, "corner_index", corner)
        if self.level < 0:
            raise ValueError("cube level must be >= 0")
        if len(corner) != self.grid.dim:
            raise ValueError("corner_index dimension mismatch")
        if 2**self.level > self.grid.samples_per_axis:
            raise ValueError("cube level finer than the lattice resolution")
        if any(not (0 <= c < 2**self.level) for c in corner):
            raise ValueError("cube lies outside the fundamental period cell")

    @property
    def side(self) -> float:
        return self.grid.period * 2.0**-self.level

    @property
    def points_per_axis(self) -> int:
        return self.grid.samples_per_axis // 2**self.level

    @property
    def measure(self) -> float:
        return self.side**self.grid.dim

    def corner_point(self) -> np.ndarray:
        return np.array(self.corner_index, dtype=float) * self.side

    def center(self) -> np.ndarray:
        return self.corner_point() + 0.5 * self.side

    def slices(self) -> tuple:
        w = self.points_per_axis
        return tuple(slice(c * w, (c + 1) * w) for c in self.corner_index)

    def lattice_count(self) -> int:
        return self.points_per_axis**self.grid.dim

    def mask(self) -> np.ndarray:
        out = np.zeros(self.grid.shape, dtype=bool)
        out[self.slices()] = True
        return out

    def third_mask(self) -> np.ndarray:
        """Indicator of the concentric one-third dilation, on the lattice."""
        ctr = self.center()
        half = self.side / 6.0
        ax = self.grid.axis_coords()
        masks = [np.abs(ax - c) <= half + 1e-12 for c in ctr]
        mesh = np.meshgrid(*masks, indexing="ij")
        out = mesh[0]
        for m in mesh[1:]:
            out = out & m
        return out

    def contains_index(self, idx) -> bool:
        idx = np.asarray(idx, dtype=int)
        w = self.points_per_axis
        lo = np.array(self.corner_index) * w
        return bool(np.all((idx >= lo) & (idx < lo + w)))

    def children(self) -> list:
        if 2 ** (self.level + 1) > self.grid.samples_per_axis:
            return []
        out = []
        for offs in np.ndindex(*(2,) * self.grid.dim):
            corner = tuple(2 * c + o for c, o in zip(self.corner_index, offs))
            out.append(DyadicCube(self.grid, self.level + 1, corner))
        return out


def cube_average(f: SampledFunction, r: float, Q: DyadicCube) -> float:
    """Discrete L^r average of |f| over the lattice points of Q (sup for r = inf)."""
    if Q.lattice_count() < 1:
        raise ValueError("cube contains no lattice point")
    vals = np.abs(f.values[Q.slices()])
    if math.isinf(r):
        return float(vals.max())
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    return float(np.mean(vals**r) ** (1.0 / r))


# -- serialization ------------------------------------------------------------
#
# Binary layout: 16-byte header = (dim uint32, N uint32, L float64), all
# little-endian, followed by N^dim (re, im) float64 pairs in C order.

_HEADER = struct.Struct("<IId")


def save_binary(f: SampledFunction, path) -> None:
    with open(path, "wb") as fh:
        g = f.grid
        fh.write(_HEADER.pack(g.dim, g.samples_per_axis, g.period))
        inter = np.empty(g.size * 2, dtype="<f8")
        flat = f.values.ravel()
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def load_binary(path) -> SampledFunction:
    with open(path, "rb") as fh:
        dim, N, L = _HEADER.unpack(fh.read(_HEADER.size))
        grid = make_grid(dim, N, L)
        inter = np.frombuffer(fh.read(), dtype="<f8")
        if inter.size != 2 * grid.size:
            raise ValueError("binary payload size does not match header")
        vals = inter[0::2] + 1j * inter[1::2]
        return SampledFunction(grid, vals.reshape(grid.shape))


def to_csv(f: SampledFunction, path) -> None:
    """CSV export: one row per lattice point (index coordinates, re, im)."""
    g = f.grid
    idx = np.stack([m.ravel() for m in np.indices(g.shape)], axis=-1)
    flat = f.values.ravel()
    with open(path, "w") as fh:
        cols = [f"i{k}" for k in range(g.dim)]
        fh.write(",".join(cols + ["re", "im"]) + "\n")
        for row, v in zip(idx, flat):
            fh.write(",".join(str(int(c)) for c in row) + f",{float(v.real)!r},{float(v.imag)!r}\n")
