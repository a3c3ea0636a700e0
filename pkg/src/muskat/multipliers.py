"""Fourier multipliers of the frozen-coefficient singular operators.

The constant-coefficient instances of the generalized Riesz transforms act
diagonally in frequency with purely imaginary symbol i*m(z),

    m(z) = -(pi/2) int_{S^{N-1}} sgn(w.z) K(w) dS(w),
    K(w) = (1/|S^N|) phi((A.w)^2) (A.w)^n w^nu,

computed here by sphere quadrature whose panels are aligned with the
sgn/abs kink circle {w.z = 0}.  For N=1 the sphere is the two points +-1 and
everything is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grid import GridSpec, ScalarField
from .offsets import sphere_area


def _gl_panels(bounds, order):
    """Composite Gauss-Legendre nodes/weights over consecutive [a,b] panels."""
    x, w = leggauss(order)
    nodes, weights = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _orthonormal_frame(direction):
    """Orthonormal basis (e1, e2, zhat) of R^3 with given last axis."""
    zhat = direction / np.linalg.norm(direction)
    probe = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(probe, zhat)) > 0.9:
        probe = np.array([0.0, 1.0, 0.0])
    e1 = probe - np.dot(probe, zhat) * zhat
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(zhat, e1)
    return e1, e2, zhat


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes/weights on S^{N-1}; weights positive, sum |S^{N-1}|."""

    dim: int                 # ambient space dimension N
    nodes: np.ndarray        # (n, N)
    weights: np.ndarray      # (n,)

    @classmethod
    def for_direction(cls, dim: int, direction=None, n_angle: int = 256,
                      n_polar: int = 64, n_azimuth: int = 128) -> "SphereRule":
        """Rule with panel boundaries on the great circle {w.direction = 0}.

        With ``direction=None`` the boundaries sit at multiples of pi/4
        (N=2) or align with the last axis (N=3), which also matches the kinks
        of cube-geometry factors used elsewhere.
        """
        if dim == 1:
            return cls(1, np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
        if dim == 2:
            if direction is None:
                bounds = np.arange(9) * (np.pi / 4.0)
            else:
                # split the circle at the kink points alpha +- pi/2 of sgn(w.z)
                alpha = np.arctan2(direction[1], direction[0])
                upper = np.linspace(alpha - np.pi / 2.0, alpha + np.pi / 2.0, 5)
                lower = np.linspace(alpha + np.pi / 2.0, alpha + 3.0 * np.pi / 2.0, 5)
                bounds = np.concatenate([upper, lower[1:]])
            per_panel = max(2, n_angle // (len(bounds) - 1))
            theta, w = _gl_panels(bounds, per_panel)
            nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            return cls(2, nodes, w)
        if dim == 3:
            d = np.asarray(direction, dtype=float) if direction is not None else np.array([0.0, 0.0, 1.0])
            e1, e2, zhat = _orthonormal_frame(d)
            half = max(2, n_polar // 2)
            u, wu = _gl_panels(np.array([-1.0, 0.0, 1.0]), half)
            psi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
            wpsi = 2.0 * np.pi / n_azimuth
            s = np.sqrt(np.clip(1.0 - u**2, 0.0, None))
            nodes = (s[:, None, None] * (np.cos(psi)[None, :, None] * e1 + np.sin(psi)[None, :, None] * e2)
                     + u[:, None, None] * zhat)
            weights = np.repeat(wu * wpsi, n_azimuth)
            return cls(3, nodes.reshape(-1, 3), weights)
        raise ValueError(f"unsupported dimension {dim}")

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))

    def self_test(self, tol: float = 1e-10) -> None:
        """Weights sum to |S^{N-1}| and integrate w_1^2 to |S^{N-1}|/N."""
        area = 2.0 if self.dim == 1 else sphere_area(self.dim - 1)
        total = float(np.sum(self.weights))
        if abs(total - area) > tol * area:
            raise AssertionError(f"weight sum {total} != |S^{self.dim-1}| = {area}")
        second = self.integrate(self.nodes[:, 0] ** 2)
        if abs(second - area / self.dim) > tol * area:
            raise AssertionError(f"second moment {second} != {area / self.dim}")


@dataclass(frozen=True)
class MultiplierSpec:
    """Frozen-gradient instance: arity-1 profile, n linear slots, index nu, A."""

    profile: object
    n: int
    nu: tuple
    A: tuple

    def __post_init__(self):
        object.__setattr__(self, "nu", tuple(int(v) for v in self.nu))
        object.__setattr__(self, "A", tuple(float(v) for v in self.A))
        if getattr(self.profile, "arity", 1) != 1:
            raise ValueError("multiplier symbols take an arity-1 profile")
        if self.n < 0 or any(v < 0 for v in self.nu):
            raise ValueError("n and nu must be nonnegative")
        if (self.n + sum(self.nu)) % 2 == 0:
            raise ValueError(f"n + |nu| must be odd, got n={self.n}, nu={self.nu}")
        if len(self.A) != len(self.nu):
            raise ValueError("A and nu must have the space dimension length")

    @property
    def dim(self) -> int:
        return len(self.nu)


def _kernel_on_sphere(mspec: MultiplierSpec, nodes: np.ndarray) -> np.ndarray:
    A = np.asarray(mspec.A)
    aw = nodes @ A
    vals = mspec.profile((aw**2,)) * aw**mspec.n
    for j, p in enumerate(mspec.nu):
        if p:
            vals = vals * nodes[:, j] ** p
    return vals / sphere_area(mspec.dim)


def symbol_D(mspec: MultiplierSpec, z) -> complex:
    """Symbol i*m(z) of the frozen-coefficient operator at frequency z; 0 at z=0."""
    z = np.asarray(z, dtype=float)
    if z.shape != (mspec.dim,):
        raise ValueError(f"frequency must be a length-{mspec.dim} vector")
    if not np.any(z):
        return 0.0 + 0.0j
    rule = SphereRule.for_direction(mspec.dim, z)
    kern = _kernel_on_sphere(mspec, rule.nodes)
    sgn = np.sign(rule.nodes @ z)
    m = -(np.pi / 2.0) * rule.integrate(sgn * kern)
    return 1j * m


def symbol_T(A, z, profile=None) -> float:
    """m_T(z) >= 0 for T = sum_k D^{phibar,A}_{0,e_k} d_k.

    m_T(z) = (pi / (2 |S^N|)) int_{S^{N-1}} |w.z| phibar((A.w)^2) dS(w);
    equals |z|/2 exactly at A = 0.
    """
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    dim = A.shape[0]
    if z.shape != (dim,):
        raise ValueError("A and z must have equal length")
    if not np.any(z):
        return 0.0
    if profile is None:
        from .profiles import phibar
        profile = phibar(dim)
    rule = SphereRule.for_direction(dim, z)
    vals = np.abs(rule.nodes @ z) * profile(((rule.nodes @ A) ** 2,))
    return float(np.pi / (2.0 * sphere_area(dim)) * rule.integrate(vals))


def riesz_core_symbol_grid(grid: GridSpec, nu, phi0: float = 1.0) -> np.ndarray:
    """Exact symbol array of the constant kernel phi0 * xi^nu / |xi|^{|nu|+N}.

    Closed form -(phi0/2) z_d/|z| for |nu| = 1; sphere quadrature otherwise.
    Returned in fft layout on the grid's integer modes, zero at z = 0.
    """
    nu = tuple(int(v) for v in nu)
    if len(nu) != grid.dim or sum(nu) % 2 == 0:
        raise ValueError(f"nu must have odd degree and length {grid.dim}")
    zs = grid.frequency_grid()
    if sum(nu) == 1:
        d = nu.index(1)
        norm = np.sqrt(sum(z**2 for z in zs))
        norm[(0,) * grid.dim] = 1.0
        sym = -0.5j * phi0 * zs[d] / norm
        sym[(0,) * grid.dim] = 0.0
        return sym
    from .profiles import ConstProfile
    mspec = MultiplierSpec(ConstProfile(1.0), 0, nu, (0.0,) * grid.dim)
    sym = np.zeros(grid.shape, dtype=complex)
    for idx in np.ndindex(grid.shape):
        z = np.array([float(zs[j][idx]) for j in range(grid.dim)])
        if np.any(z):
            sym[idx] = phi0 * symbol_D(mspec, z)
    return sym


def apply_multiplier(symbol, u: ScalarField) -> ScalarField:
    """Apply a Fourier multiplier to a real field.

    ``symbol`` is either an fft-layout complex array on the grid or a callable
    z_vector -> complex.  The multiplier must map real to real (m odd);
    a residual imaginary part above 1e-10 of the field scale is an error.
    """
    g = u.grid
    if callable(symbol):
        zs = g.frequency_grid()
        arr = np.zeros(g.shape, dtype=complex)
        for idx in np.ndindex(g.shape):
            arr[idx] = symbol(np.array([float(zs[j][idx]) for j in range(g.dim)]))
        symbol = arr
    symbol = np.asarray(symbol)
    if symbol.shape != g.shape:
        raise ValueError("symbol array shape must match the grid")
    if np.all(symbol == 1.0):
        return ScalarField(g, u.values)
    out = np.fft.ifftn(np.fft.fftn(u.values) * symbol)
    scale = max(1.0, float(np.max(np.abs(out.real))))
    if float(np.max(np.abs(out.imag))) > 1e-10 * scale:
        raise ValueError("multiplier output has a nonreal part; symbol is not odd-real")
    return ScalarField(g, out.real)


def reduction_identity_residual(mspec: MultiplierSpec, z_samples) -> float:
    """max_z |sym(n,nu)(z) - sum_k A_k sym(n-1, nu+e_k)(z)|, n >= 1."""
    if mspec.n < 1:
        raise ValueError("reduction identity needs n >= 1")
    worst = 0.0
    for z in z_samples:
        z = np.asarray(z, dtype=float)
        lhs = symbol_D(mspec, z)
        rhs = 0.0 + 0.0j
        for k in range(mspec.dim):
            if mspec.A[k] == 0.0:
                continue
            nu2 = list(mspec.nu)
            nu2[k] += 1
            sub = MultiplierSpec(mspec.profile, mspec.n - 1, tuple(nu2), mspec.A)
            rhs += mspec.A[k] * symbol_D(sub, z)
        worst = max(worst, abs(lhs - rhs))
    return worst
