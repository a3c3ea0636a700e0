"""Smooth kernel profiles and their calculus.

A profile is a smooth function phi: [0, inf)^p -> R entering the generalized
Riesz kernels through phi((D a)^2).  The family used by the interface
operators is phibar(x) = (1+x)^(-(N+1)/2); it is closed under
differentiation, which the chain-rule and difference constructions rely on.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = leggauss(_GL_ORDER)
# map from [-1,1] to [0,1]
_GL_S = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


class SmoothProfile:
    """Evaluation rule for phi and each first partial d_i phi, arity p >= 1."""

    arity = 1
    tag = "base"

    def __call__(self, args):
        raise NotImplementedError

    def partial(self, i, args):
        return self.partial_profile(i)(args)

    def partial_profile(self, i) -> "SmoothProfile":
        raise NotImplementedError

    def _check_args(self, args):
        if len(args) != self.arity:
            raise ValueError(f"profile arity {self.arity}, got {len(args)} arguments")

    def check_partials(self, points, step=1e-5, tol=1e-6):
        """Verify stored partials against central differences at probe points.

        ``points`` is a sequence of arity-length tuples.  Raises AssertionError
        on disagreement beyond ``tol`` (absolute + relative mix).
        """
        for pt in points:
            pt = [float(v) for v in pt]
            for i in range(self.arity):
                up = list(pt)
                dn = list(pt)
                up[i] += step
                dn[i] = max(dn[i] - step, 0.0)
                fd = (self(tuple(np.asarray(v) for v in up))
                      - self(tuple(np.asarray(v) for v in dn))) / (up[i] - dn[i])
                an = self.partial(i, tuple(np.asarray(v) for v in pt))
                err = abs(float(fd) - float(an))
                scale = max(1.0, abs(float(an)))
                assert err <= tol * scale, (
                    f"partial {i} of {self.tag} off by {err:.3e} at {pt}")


class ConstProfile(SmoothProfile):
    """Constant profile, any arity; all partials vanish."""

    def __init__(self, value=1.0, arity=1):
        self.value = float(value)
        self.arity = arity
        self.tag = f"const({value})"

    def __call__(self, args):
        self._check_args(args)
        shape = np.broadcast(*[np.asarray(a) for a in args]).shape
        return np.full(shape, self.value) if shape else self.value

    def partial_profile(self, i):
        return ConstProfile(0.0, self.arity)


class PowerProfile(SmoothProfile):
    """phi(x) = c * (1 + x)^e on [0, inf); closed under differentiation."""

    arity = 1

    def __init__(self, coeff, exponent, tag=None):
        self.coeff = float(coeff)
        self.exponent = float(exponent)
        self.tag = tag or f"power({coeff:g},{exponent:g})"

    def __call__(self, args):
        self._check_args(args)
        return self.coeff * (1.0 + args[0]) ** self.exponent

    def partial_profile(self, i):
        if i != 0:
            raise IndexError("arity-1 profile")
        return PowerProfile(self.coeff * self.exponent, self.exponent - 1.0)


def phibar(dim: int) -> PowerProfile:
    """The reference profile (1+x)^(-(N+1)/2) for space dimension ``dim``."""
    return PowerProfile(1.0, -(dim + 1) / 2.0, tag=f"phibar(N={dim})")


def phibar_prime(dim: int) -> PowerProfile:
    return phibar(dim).partial_profile(0)


class DifferenceProfile(SmoothProfile):
    """phi^i(x, y) = int_0^1 d_i phi(s x + (1-s) y) ds, arity doubled.

    Evaluated with fixed 16-point Gauss-Legendre on [0,1]; the integrand is
    smooth so the rule is far below the quadrature noise of the lattice sums.
    """

    def __init__(self, base: SmoothProfile, i: int):
        if not 0 <= i < base.arity:
            raise IndexError(f"slot {i} out of range for arity {base.arity}")
        self.base = base
        self.slot = i
        self.arity = 2 * base.arity
        self.tag = f"diff({base.tag},{i})"

    def _blend(self, args, s):
        p = self.base.arity
        return tuple(s * np.asarray(args[j]) + (1.0 - s) * np.asarray(args[p + j])
                     for j in range(p))

    def __call__(self, args):
        self._check_args(args)
        dphi = self.base.partial_profile(self.slot)
        acc = 0.0
        for s, w in zip(_GL_S, _GL_W):
            acc = acc + w * dphi(self._blend(args, s))
        return acc

    def partial_profile(self, i):
        return _DifferencePartial(self, i)


class _DifferencePartial(SmoothProfile):
    """d/d(arg_i) of a DifferenceProfile: int s-or-(1-s) * d_j d_slot phi ds."""

    def __init__(self, parent: DifferenceProfile, i: int):
        if not 0 <= i < parent.arity:
            raise IndexError
        self.parent = parent
        self.index = i
        self.arity = parent.arity
        self.tag = f"d{i}[{parent.tag}]"

    def __call__(self, args):
        self._check_args(args)
        p = self.parent.base.arity
        j = self.index % p
        first_half = self.index < p
        d2 = self.parent.base.partial_profile(self.parent.slot).partial_profile(j)
        acc = 0.0
        for s, w in zip(_GL_S, _GL_W):
            factor = s if first_half else (1.0 - s)
            acc = acc + w * factor * d2(self.parent._blend(args, s))
        return acc

    def partial_profile(self, i):
        raise NotImplementedError("second derivatives of difference profiles are not needed")


def make_difference_profile(phi: SmoothProfile, i: int) -> DifferenceProfile:
    """The profile phi^i pairing with the operator-difference identity."""
    return DifferenceProfile(phi, i)
