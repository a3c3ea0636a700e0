"""Discrete calculus on a uniform periodic lattice.

The lattice is a flat torus of side ``L`` with ``M`` points per axis, used as
a computational proxy for R^N.  Fields that live on it are expected to decay
near the cell boundary; the periodization error this leaves behind is
measured by the refinement tests, not assumed away.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

SNAPSHOT_MAGIC = b"MUSK"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic lattice: ``dim`` axes, side ``extent``, ``points`` per axis."""

    dim: int
    extent: float
    points: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.points < 8:
            raise ValueError(f"points per axis must be >= 8, got {self.points}")
        if not (self.extent > 0 and np.isfinite(self.extent)):
            raise ValueError(f"extent must be positive and finite, got {self.extent}")

    @property
    def spacing(self) -> float:
        return self.extent / self.points

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points**self.dim

    def axis_coords(self) -> np.ndarray:
        return self.spacing * np.arange(self.points)

    def meshgrid(self):
        x = self.axis_coords()
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def mode_numbers(self) -> np.ndarray:
        """Integer mode numbers along one axis, fft ordering."""
        return np.fft.fftfreq(self.points, d=1.0 / self.points)

    def frequencies(self, axis: int) -> np.ndarray:
        """Physical frequencies 2*pi*k/L along ``axis``, broadcast to grid shape."""
        k = self.mode_numbers() * (2.0 * np.pi / self.extent)
        shape = [1] * self.dim
        shape[axis] = self.points
        return k.reshape(shape)

    def frequency_grid(self) -> list:
        return [np.broadcast_to(self.frequencies(j), self.shape) for j in range(self.dim)]


@dataclass(frozen=True)
class FrequencyIndex:
    """Integer frequency vector; physical frequency is 2*pi*k/L per axis."""

    k: tuple
    grid: GridSpec

    def __post_init__(self):
        kk = tuple(int(v) for v in self.k)
        object.__setattr__(self, "k", kk)
        if len(kk) != self.grid.dim:
            raise ValueError("frequency index length must match grid dimension")
        if any(abs(v) > self.grid.points // 2 for v in kk):
            raise ValueError(f"|k_j| <= M/2 required, got {kk}")

    def physical(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.k, dtype=float) / self.grid.extent


@dataclass(frozen=True)
class SobolevOrder:
    """Order s >= 0 of the discrete H^s norm proxy.

    ``subcritical(N)`` records whether s exceeds the critical exponent
    1 + N/2; nothing downstream enforces it.
    """

    s: float

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("Sobolev order must be nonnegative")

    def subcritical(self, dim: int) -> bool:
        return self.s > 1.0 + 0.5 * dim


class ScalarField:
    """Real samples of a function on the lattice, immutable after construction."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    def same_grid(self, other: "ScalarField") -> bool:
        return self.grid == other.grid


def _require_same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("fields live on different grids")
    return g


def spectral_derivative(u: ScalarField, axis: int) -> ScalarField:
    """d/dx_axis by FFT with symbol i*2*pi*k/L.

    The Nyquist mode (even M) is zeroed: its one-sided representative has no
    consistent odd symbol on a real field.
    """
    g = u.grid
    if not 0 <= axis < g.dim:
        raise ValueError(f"axis {axis} out of range for dim {g.dim}")
    uh = np.fft.fftn(u.values)
    k = g.mode_numbers()
    if g.points % 2 == 0:
        k = k.copy()
        k[g.points // 2] = 0.0
    shape = [1] * g.dim
    shape[axis] = g.points
    sym = 1j * (2.0 * np.pi / g.extent) * k.reshape(shape)
    return ScalarField(g, np.fft.ifftn(uh * sym).real)


def gradient(u: ScalarField) -> list:
    return [spectral_derivative(u, j) for j in range(u.grid.dim)]


def sobolev_norm(u: ScalarField, order) -> float:
    """Discrete H^s proxy: (sum_k (1+|2 pi k/L|^2)^s |u_k|^2 L^N / M^{2N})^(1/2)."""
    s = order.s if isinstance(order, SobolevOrder) else float(order)
    if s < 0:
        raise ValueError("Sobolev order must be nonnegative")
    g = u.grid
    uh = np.fft.fftn(u.values)
    k2 = np.zeros(g.shape)
    for j in range(g.dim):
        k2 = k2 + g.frequencies(j) ** 2
    weight = (1.0 + k2) ** s
    total = np.sum(weight * np.abs(uh) ** 2) * g.extent**g.dim / g.size**2
    return float(np.sqrt(total))


def l2_norm(u: ScalarField) -> float:
    """Discrete L2 norm (h^N sum u^2)^(1/2)."""
    g = u.grid
    return float(np.sqrt(g.spacing**g.dim * np.sum(u.values**2)))


def inner(u: ScalarField, v: ScalarField) -> float:
    g = _require_same_grid(u, v)
    return float(g.spacing**g.dim * np.sum(u.values * v.values))


def integrate(u: ScalarField) -> float:
    """h^N sum of values (trapezoid is exact on the torus)."""
    g = u.grid
    return float(g.spacing**g.dim * np.sum(u.values))


def make_zero(grid: GridSpec) -> ScalarField:
    return ScalarField(grid, np.zeros(grid.shape))


def make_mode(grid: GridSpec, amplitude: float, k) -> ScalarField:
    """amplitude * cos(2*pi*k.x/L) for an integer mode vector k."""
    ki = FrequencyIndex(tuple(k), grid)
    phase = np.zeros(grid.shape)
    coords = grid.meshgrid()
    for j, kj in enumerate(ki.k):
        phase = phase + (2.0 * np.pi / grid.extent) * kj * coords[j]
    return ScalarField(grid, amplitude * np.cos(phase))


def make_gaussian_bump(grid: GridSpec, amplitude: float, center, width: float,
                       strict: bool = True) -> ScalarField:
    """amplitude * exp(-|x-center|^2 / (2 width^2)), minimal-image displacement.

    In strict mode a bump whose relative boundary value exceeds 1e-8 is
    rejected; such a bump is not decayed enough for the torus proxy.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    center = np.asarray(center, dtype=float)
    if center.shape != (grid.dim,):
        raise ValueError("center length must match grid dimension")
    L = grid.extent
    coords = grid.meshgrid()
    r2 = np.zeros(grid.shape)
    for j in range(grid.dim):
        d = coords[j] - center[j]
        d = (d + 0.5 * L) % L - 0.5 * L
        r2 = r2 + d * d
    values = amplitude * np.exp(-r2 / (2.0 * width * width))
    if strict and amplitude != 0.0:
        edge = np.exp(-((0.5 * L) ** 2) / (2.0 * width * width))
        if edge > 1e-8:
            raise ValueError(
                f"bump does not decay at the torus boundary (relative edge value {edge:.3e} > 1e-8); "
                "reduce width or pass strict=False")
    return ScalarField(grid, values)


def make_field(grid: GridSpec, kind: str, **params) -> ScalarField:
    """Named field constructor: kind in {'zero', 'mode', 'gaussian_bump'}."""
    if kind == "zero":
        return make_zero(grid)
    if kind == "mode":
        return make_mode(grid, params["amplitude"], params["k"])
    if kind == "gaussian_bump":
        return make_gaussian_bump(grid, params["amplitude"], params["center"],
                                  params["width"], params.get("strict", True))
    raise ValueError(f"unknown field kind {kind!r}")


def band_limited_random(grid: GridSpec, kmax: int, rng, amplitude: float = 1.0) -> ScalarField:
    """Random real field with integer modes |k_j| <= kmax, unit-scale values."""
    shape = grid.shape
    coeff = np.zeros(shape, dtype=complex)
    modes = grid.mode_numbers()
    sel = [np.abs(modes) <= kmax] * grid.dim
    mask = sel[0].reshape([-1] + [1] * (grid.dim - 1))
    for j in range(1, grid.dim):
        shp = [1] * grid.dim
        shp[j] = grid.points
        mask = mask & sel[j].reshape(shp)
    coeff[mask] = rng.standard_normal(int(mask.sum())) + 1j * rng.standard_normal(int(mask.sum()))
    vals = np.fft.ifftn(coeff).real
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals = vals * (amplitude / peak)
    return ScalarField(grid, vals)


# -- serialization ------------------------------------------------------------

_HEADER = struct.Struct("<4sIddd")  # magic, version u32, N, M, L as f64


def save_field(path, u: ScalarField) -> None:
    """Write the flat little-endian snapshot: 32-byte header + M^N f64 row-major."""
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
                              float(g.dim), float(g.points), g.extent))
        fh.write(u.values.astype("<f8").tobytes(order="C"))


def load_field(path) -> ScalarField:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, dim, points, extent = _HEADER.unpack(head)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        grid = GridSpec(int(dim), extent, int(points))
        data = np.frombuffer(fh.read(8 * grid.size), dtype="<f8")
        if data.size != grid.size:
            raise ValueError(f"{path}: truncated data")
        return ScalarField(grid, data.reshape(grid.shape))


def export_csv(path, u: ScalarField) -> None:
    """CSV export: integer index coordinates per axis followed by the value."""
    g = u.grid
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"i{j}" for j in range(g.dim)] + ["value"])
        for idx in np.ndindex(g.shape):
            writer.writerow(list(idx) + [repr(float(u.values[idx]))])
