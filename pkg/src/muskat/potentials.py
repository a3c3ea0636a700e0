"""Muskat interface operators assembled over the generalized Riesz kernels.

For each operator both the direct principal-value kernel and its composition
out of the B-transforms are implemented; the direct form is canonical, the
composed form is the validator.  The two are algebraically identical term by
term on the lattice, so the cross-checks hold near rounding.

The velocity operator carries the non-decaying constant Riesz core
(-xi . b(x-xi) in its kernel); as in :mod:`muskat.kernels`, that core is
evaluated spectrally by default and on the bare lattice when
``riesz_core='lattice'``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import chunked_sum
from .grid import (GridSpec, ScalarField, gradient, inner, integrate, l2_norm,
                   spectral_derivative)
from .kernels import OperatorSpec, apply_B, apply_B_frozen, core_fix_apply
from .offsets import pv_offsets, sphere_area
from .profiles import phibar


@dataclass(frozen=True)
class InterfaceGeometry:
    """Interface function f with cached gradient, omega = 1 + |grad f|^2, normal."""

    f: ScalarField
    grad_f: tuple = field(init=False)
    omega: ScalarField = field(init=False)
    normal: tuple = field(init=False)

    def __post_init__(self):
        gf = tuple(gradient(self.f))
        om = 1.0 + sum(g.values**2 for g in gf)
        sq = np.sqrt(om)
        nu = tuple(ScalarField(self.f.grid, -g.values / sq) for g in gf) + (
            ScalarField(self.f.grid, 1.0 / sq),)
        object.__setattr__(self, "grad_f", gf)
        object.__setattr__(self, "omega", ScalarField(self.f.grid, om))
        object.__setattr__(self, "normal", nu)
        norm2 = sum(c.values**2 for c in nu)
        if np.max(np.abs(norm2 - 1.0)) > 1e-12:
            raise AssertionError("normal is not unit length")

    @property
    def grid(self) -> GridSpec:
        return self.f.grid


def _check_grid(geom: InterfaceGeometry, *fields):
    for u in fields:
        if u.grid != geom.grid:
            raise ValueError("field grid does not match the interface grid")


def _pv_sum(grid: GridSpec, make_term):
    """Deterministic chunked sum over the PV offsets of ``make_term(t)``."""
    off = pv_offsets(grid)

    def worker(idx):
        acc = np.zeros(grid.shape)
        for t in idx:
            acc += make_term(t)
        return acc

    out = chunked_sum(worker, off.chunks)
    return out if out is not None else np.zeros(grid.shape)


def apply_D(geom: InterfaceGeometry, beta: ScalarField) -> ScalarField:
    """Double layer potential: PV sum of (df - xi.grad f(x-xi)) / (|xi|^2 + df^2)^((N+1)/2)."""
    _check_grid(geom, beta)
    g = geom.grid
    off = pv_offsets(g)
    axes = tuple(range(g.dim))
    fvals = geom.f.values
    gfv = [c.values for c in geom.grad_f]
    scale = g.spacing**g.dim / sphere_area(g.dim)

    def term(t):
        shift = tuple(int(v) for v in off.ints[t])
        df = fvals - np.roll(fvals, shift, axis=axes)
        num = df.copy()
        for j in range(g.dim):
            num -= off.xi[t, j] * np.roll(gfv[j], shift, axis=axes)
        den = (off.r[t] ** 2 + df * df) ** ((g.dim + 1) / 2.0)
        return num * np.roll(beta.values, shift, axis=axes) / den

    return ScalarField(g, scale * _pv_sum(g, term))


def apply_D_composed(geom: InterfaceGeometry, beta: ScalarField,
                     riesz_core: str = "lattice") -> ScalarField:
    """B-transform representation of the double layer, for cross-checking."""
    _check_grid(geom, beta)
    g = geom.grid
    pb = phibar(g.dim)
    out = apply_B_frozen(OperatorSpec(pb, 1, (0,) * g.dim), geom.f, beta, riesz_core).values
    for i in range(g.dim):
        nu = tuple(1 if j == i else 0 for j in range(g.dim))
        weighted = ScalarField(g, beta.values * geom.grad_f[i].values)
        out = out - apply_B_frozen(OperatorSpec(pb, 0, nu), geom.f, weighted, riesz_core).values
    return ScalarField(g, out)


def apply_D_star(geom: InterfaceGeometry, beta: ScalarField) -> ScalarField:
    """L2-adjoint of the double layer: kernel (-df + xi.grad f(x)) / (...)^((N+1)/2)."""
    _check_grid(geom, beta)
    g = geom.grid
    off = pv_offsets(g)
    axes = tuple(range(g.dim))
    fvals = geom.f.values
    gfv = [c.values for c in geom.grad_f]
    scale = g.spacing**g.dim / sphere_area(g.dim)

    def term(t):
        shift = tuple(int(v) for v in off.ints[t])
        df = fvals - np.roll(fvals, shift, axis=axes)
        num = -df
        for j in range(g.dim):
            num = num + off.xi[t, j] * gfv[j]
        den = (off.r[t] ** 2 + df * df) ** ((g.dim + 1) / 2.0)
        return num * np.roll(beta.values, shift, axis=axes) / den

    return ScalarField(g, scale * _pv_sum(g, term))


def apply_D_star_composed(geom: InterfaceGeometry, beta: ScalarField,
                          riesz_core: str = "lattice") -> ScalarField:
    _check_grid(geom, beta)
    g = geom.grid
    pb = phibar(g.dim)
    out = -apply_B_frozen(OperatorSpec(pb, 1, (0,) * g.dim), geom.f, beta, riesz_core).values
    for i in range(g.dim):
        nu = tuple(1 if j == i else 0 for j in range(g.dim))
        out = out + geom.grad_f[i].values * apply_B_frozen(
            OperatorSpec(pb, 0, nu), geom.f, beta, riesz_core).values
    return ScalarField(g, out)


def apply_A(geom: InterfaceGeometry, b) -> list:
    """Tangential matrix operator: N components coupling grad f and b."""
    b = list(b)
    if len(b) != geom.grid.dim:
        raise ValueError("b must have one component per axis")
    _check_grid(geom, *b)
    g = geom.grid
    off = pv_offsets(g)
    axes = tuple(range(g.dim))
    fvals = geom.f.values
    gfv = [c.values for c in geom.grad_f]
    bv = [c.values for c in b]
    scale = g.spacing**g.dim / sphere_area(g.dim)
    out = []
    for k in range(g.dim):
        def term(t, k=k):
            shift = tuple(int(v) for v in off.ints[t])
            df = fvals - np.roll(fvals, shift, axis=axes)
            dl = df.copy()
            xib = np.zeros(g.shape)
            for j in range(g.dim):
                dl -= off.xi[t, j] * np.roll(gfv[j], shift, axis=axes)
                xib += off.xi[t, j] * np.roll(bv[j], shift, axis=axes)
            num = dl * np.roll(bv[k], shift, axis=axes) \
                - xib * (gfv[k] - np.roll(gfv[k], shift, axis=axes))
            den = (off.r[t] ** 2 + df * df) ** ((g.dim + 1) / 2.0)
            return num / den

        out.append(ScalarField(g, scale * _pv_sum(g, term)))
    return out


def apply_A_composed(geom: InterfaceGeometry, b, riesz_core: str = "lattice") -> list:
    b = list(b)
    _check_grid(geom, *b)
    g = geom.grid
    pb = phibar(g.dim)
    out = []
    for k in range(g.dim):
        acc = apply_B_frozen(OperatorSpec(pb, 1, (0,) * g.dim), geom.f, b[k], riesz_core).values
        for i in range(g.dim):
            nu = tuple(1 if j == i else 0 for j in range(g.dim))
            spec = OperatorSpec(pb, 0, nu)
            mixed = ScalarField(g, geom.grad_f[k].values * b[i].values
                                - geom.grad_f[i].values * b[k].values)
            acc = acc + apply_B_frozen(spec, geom.f, mixed, riesz_core).values
            acc = acc - geom.grad_f[k].values * apply_B_frozen(
                spec, geom.f, b[i], riesz_core).values
        out.append(ScalarField(g, acc))
    return out


def torus_byparts_flux(geom: InterfaceGeometry, beta: ScalarField) -> list:
    """Cell-boundary flux of the gradient identity on the torus, per component.

    The identity grad(D(f)[beta]) = A(f)[grad beta] is proved by moving a
    xi-divergence onto beta; on R^N the boundary term vanishes, on the torus
    cell it survives as the flux of

        V_k(xi) = xi (d_k f(x) - d_k f(x-xi)) / (|xi|^2 + df^2)^((N+1)/2)

    through the cell faces |xi_j| = L/2.  The faces are sampled on the
    outermost offset ring (the Nyquist ring for even M), which is O(h)
    accurate; the approximation error refines along with the identity defect.
    """
    _check_grid(geom, beta)
    g = geom.grid
    M, N, h, L = g.points, g.dim, g.spacing, g.extent
    axes = tuple(range(N))
    fvals = geom.f.values
    gfv = [c.values for c in geom.grad_f]
    scale = h ** (N - 1) / sphere_area(N)
    even = M % 2 == 0
    K = M // 2 if even else (M - 1) // 2
    span = np.arange(-(M // 2 - 1) if even else -K, (M // 2 - 1 if even else K) + 1)
    fluxes = []
    for k in range(N):
        acc = np.zeros(g.shape)
        for j in range(N):
            # outward normal +-e_j times V_j both reduce to +|xi_j| * rest;
            # for even M the two faces share one lattice ring, counted twice
            faces = ((K, 2.0),) if even else ((K, 1.0), (-K, 1.0))
            for mj, factor in faces:
                for rest in np.ndindex(*([len(span)] * (N - 1))):
                    m = np.zeros(N, dtype=int)
                    m[j] = mj
                    others = [ax for ax in range(N) if ax != j]
                    for pos, ax in enumerate(others):
                        m[ax] = span[rest[pos]]
                    shift = tuple(int(v) for v in m)
                    xi = m * h
                    df = fvals - np.roll(fvals, shift, axis=axes)
                    den = (float(np.dot(xi, xi)) + df * df) ** ((N + 1) / 2.0)
                    dgfk = gfv[k] - np.roll(gfv[k], shift, axis=axes)
                    acc += factor * abs(xi[j]) * dgfk \
                        * np.roll(beta.values, shift, axis=axes) / den
        fluxes.append(ScalarField(g, -scale * acc))
    return fluxes


def gradient_identity_residual(geom: InterfaceGeometry, beta: ScalarField,
                               include_torus_flux: bool = True) -> float:
    """Discrete defect of grad(D(f)[beta]) = A(f)[grad beta], spectral gradients.

    With ``include_torus_flux`` the exact single-cell boundary flux of the
    underlying integration by parts is subtracted (see
    :func:`torus_byparts_flux`); without it the defect saturates at an
    O(1/L) floor for data with overlapping supports.
    """
    _check_grid(geom, beta)
    d = apply_D(geom, beta)
    lhs = gradient(d)
    rhs = apply_A(geom, gradient(beta))
    if include_torus_flux:
        flux = torus_byparts_flux(geom, beta)
        rhs = [ScalarField(geom.grid, r.values + fl.values)
               for r, fl in zip(rhs, flux)]
    total = sum(l2_norm(ScalarField(geom.grid, a.values - b.values)) ** 2
                for a, b in zip(lhs, rhs))
    return float(np.sqrt(total))


def apply_AA(geom: InterfaceGeometry, b, riesz_core: str = "spectral") -> ScalarField:
    """Velocity operator: the two-integral kernel of the evolution's right side.

    The second integral contains the constant core -xi.b(x-xi)/|xi|^{N+1},
    which is evaluated spectrally unless ``riesz_core='lattice'``.
    """
    b = list(b)
    if len(b) != geom.grid.dim:
        raise ValueError("b must have one component per axis")
    _check_grid(geom, *b)
    g = geom.grid
    off = pv_offsets(g)
    axes = tuple(range(g.dim))
    fvals = geom.f.values
    gfv = [c.values for c in geom.grad_f]
    bv = [c.values for c in b]
    scale = g.spacing**g.dim / sphere_area(g.dim)

    def term(t):
        shift = tuple(int(v) for v in off.ints[t])
        df = fvals - np.roll(fvals, shift, axis=axes)
        xigf = np.zeros(g.shape)
        xib = np.zeros(g.shape)
        gfgf = np.zeros(g.shape)
        gfb = np.zeros(g.shape)
        for j in range(g.dim):
            rgf = np.roll(gfv[j], shift, axis=axes)
            xigf += off.xi[t, j] * rgf
            xib += off.xi[t, j] * np.roll(bv[j], shift, axis=axes)
            gfgf += gfv[j] * rgf
            gfb += gfv[j] * np.roll(bv[j], shift, axis=axes)
        num = (xigf - df) * gfb - xib * (1.0 + gfgf)
        den = (off.r[t] ** 2 + df * df) ** ((g.dim + 1) / 2.0)
        return num / den

    out = scale * _pv_sum(g, term)
    if riesz_core == "spectral":
        for d in range(g.dim):
            nu = tuple(1 if j == d else 0 for j in range(g.dim))
            out = out - core_fix_apply(g, nu, bv[d])
    return ScalarField(g, out)


def apply_AA_composed(geom: InterfaceGeometry, b, riesz_core: str = "spectral") -> ScalarField:
    """B-transform representation of the velocity operator (validation path)."""
    b = list(b)
    _check_grid(geom, *b)
    g = geom.grid
    pb = phibar(g.dim)
    out = np.zeros(g.shape)
    for i in range(g.dim):
        nu = tuple(1 if j == i else 0 for j in range(g.dim))
        spec = OperatorSpec(pb, 0, nu)
        for k in range(g.dim):
            mixed = ScalarField(g, b[k].values * geom.grad_f[i].values
                                - b[i].values * geom.grad_f[k].values)
            out = out + geom.grad_f[k].values * apply_B_frozen(
                spec, geom.f, mixed, "lattice").values
        out = out - apply_B_frozen(spec, geom.f, b[i], riesz_core).values
        out = out - geom.grad_f[i].values * apply_B_frozen(
            OperatorSpec(pb, 1, (0,) * g.dim), geom.f, b[i], "lattice").values
    return ScalarField(g, out)


def boundary_trace(geom: InterfaceGeometry, beta: ScalarField) -> list:
    """PV trace of the layer gradient on the interface, N+1 components.

    The horizontal components are the constant-core transforms applied to the
    raw density and use the spectral core; the vertical component has a
    decaying kernel and stays on the lattice.
    """
    _check_grid(geom, beta)
    g = geom.grid
    pb = phibar(g.dim)
    comps = []
    for i in range(g.dim):
        nu = tuple(1 if j == i else 0 for j in range(g.dim))
        comps.append(apply_B_frozen(OperatorSpec(pb, 0, nu), geom.f, beta, "spectral"))
    comps.append(apply_B_frozen(OperatorSpec(pb, 1, (0,) * g.dim), geom.f, beta, "lattice"))
    return comps


def rellich_residual(geom: InterfaceGeometry, beta: ScalarField) -> float:
    """Defect of the '+' Rellich identity evaluated from the boundary traces.

    On the torus the Stokes flux through y -> -inf does not vanish: a density
    with nonzero mean leaves the exact flux (mean beta)^2 L^N / 4 on the right
    side, which is included here so that the identity is exact for decaying
    fields of any mean.
    """
    _check_grid(geom, beta)
    g = geom.grid
    om = geom.omega.values
    sq = np.sqrt(om)
    nu = [c.values for c in geom.normal]
    G = [c.values for c in boundary_trace(geom, beta)]
    g_dot_nu = sum(Gc * nc for Gc, nc in zip(G, nu))
    F = [sq * (Gc - g_dot_nu * nc) for Gc, nc in zip(G, nu)]
    f_sq = sum(Fc * Fc for Fc in F)
    plus = beta.values - 2.0 * apply_D_star(geom, beta).values
    integrand = plus**2 / (4.0 * om) + plus * F[-1] / sq - f_sq / om
    lhs = g.spacing**g.dim * float(np.sum(integrand))
    flux = integrate(beta) ** 2 / (4.0 * g.extent**g.dim)
    return abs(lhs - flux)


def adjointness_defect(geom: InterfaceGeometry, beta: ScalarField,
                       gamma: ScalarField) -> float:
    """Relative defect of <D beta, gamma> = <beta, D* gamma>."""
    left = inner(apply_D(geom, beta), gamma)
    right = inner(beta, apply_D_star(geom, gamma))
    scale = max(abs(left), abs(right), 1e-300)
    return abs(left - right) / scale
