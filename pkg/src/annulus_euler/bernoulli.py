"""Boundary stream functions and the Bernoulli profile B(tau) = b0(Z(tau))."""

from __future__ import annotations

import numpy as np

from .boundary import Diffeo, check_throughflow
from .elliptic import check_flux
from .fields import TWO_PI, BoundaryFunction

DEFAULT_GATE_SAMPLES = 512


class BoundaryStream:
    """phi(theta) = offset + int_0^theta q(s) ds for a periodic through-flow q."""

    def __init__(self, q, offset=0.0):
        self.q = q
        self.offset = float(offset)
        self._anti = q.antiderivative()
        self._anti0 = float(self._anti(0.0))

    @property
    def J(self):
        """Increment over one period."""
        return self.q.integral()

    @property
    def slope(self):
        return self.q.mean

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.offset + self.q.mean * theta + self._anti(theta) - self._anti0

    def periodic_part(self, theta):
        """phi(theta) - (J / 2pi) theta."""
        return self.offset + self._anti(theta) - self._anti0

    def derivative(self, theta):
        return self.q(theta)


class ComposedStream:
    """phi1 = phi0 o T."""

    def __init__(self, phi0, T):
        self.phi0 = phi0
        self.T = T

    @property
    def J(self):
        return self.phi0.J

    @property
    def slope(self):
        return self.phi0.slope

    def __call__(self, theta):
        return self.phi0(self.T(theta))

    def periodic_part(self, theta):
        return self(theta) - self.slope * np.asarray(theta, dtype=float)

    def derivative(self, theta):
        return self.phi0.derivative(self.T(theta)) * self.T.derivative(theta)


def build_phi0(f0, normalized=False, samples=DEFAULT_GATE_SAMPLES):
    """Inner boundary stream phi0 = int_0^theta f0 (or theta + int f0 when normalized)."""
    q = f0 + 1.0 if normalized else f0
    check_throughflow(q, samples)
    return BoundaryStream(q)


def build_phi1(f0, *, f1=None, j0=0.0, T=None, normalized=False, samples=DEFAULT_GATE_SAMPLES):
    """Outer boundary stream: -j0 + int_0^theta f1 (BC1) or phi0 o T (BC2)."""
    phi0 = build_phi0(f0, normalized, samples)
    if T is not None:
        if not isinstance(T, Diffeo):
            T = Diffeo(T)
        T.check(samples)
        return ComposedStream(phi0, T)
    if f1 is None:
        raise ValueError("either f1 or T must be given")
    q1 = f1 + 1.0 if normalized else f1
    check_flux(phi0.q, q1)
    return BoundaryStream(q1, offset=-j0)


class InverseStream:
    """Z = phi0^{-1}, with Z(tau + J) = Z(tau) + 2 pi.

    Evaluated by a vectorized Newton iteration safeguarded by bisection on a
    bracket of one period.
    """

    def __init__(self, phi0, tol=1e-13, max_iter=100):
        self.phi0 = phi0
        self.J = phi0.J
        self.tol = tol
        self.max_iter = max_iter

    def _split(self, tau):
        tau = np.asarray(tau, dtype=float)
        shift = np.floor((tau - self.phi0.offset) / self.J)
        return tau - shift * self.J, shift

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        t, shift = self._split(tau)
        z = self._solve(t)
        out = z + TWO_PI * shift
        return out if tau.ndim else float(out)

    def derivative(self, tau):
        """Z'(tau) = 1 / q(Z(tau))."""
        return 1.0 / self.phi0.q(self(tau))

    def _solve(self, t):
        phi0 = self.phi0
        lo = np.zeros_like(t)
        hi = np.full_like(t, TWO_PI)
        x = TWO_PI * (t - phi0.offset) / self.J
        for _ in range(self.max_iter):
            res = phi0(x) - t
            done = np.abs(res) <= self.tol * (1.0 + np.abs(t))
            if np.all(done):
                break
            lo = np.where(res < 0.0, x, lo)
            hi = np.where(res > 0.0, x, hi)
            step = res / phi0.q(x)
            xn = x - step
            outside = (xn <= lo) | (xn >= hi)
            xn = np.where(outside, 0.5 * (lo + hi), xn)
            x = np.where(done, x, xn)
        return x


def invert_phi0(phi0):
    return InverseStream(phi0)


class BernoulliProfile:
    """B(tau) = b0(Z(tau)) and B'(tau) = b0'(Z(tau)) / q(Z(tau)); J-periodic."""

    def __init__(self, phi0, b0):
        self.phi0 = phi0
        self.b0 = b0
        self.Z = InverseStream(phi0)
        self._db0 = b0.derivative()

    @property
    def J(self):
        return self.Z.J

    def B(self, tau):
        return self.b0(self._reduced_Z(tau))

    def Bprime(self, tau):
        z = self._reduced_Z(tau)
        return self._db0(z) / self.phi0.q(z)

    def evaluate(self, tau):
        """(B, B') with a single inversion."""
        z = self._reduced_Z(tau)
        return self.b0(z), self._db0(z) / self.phi0.q(z)

    def _reduced_Z(self, tau):
        # Z on the reduced argument: B is J-periodic by construction
        t, _ = self.Z._split(tau)
        return self.Z._solve(np.atleast_1d(t)).reshape(np.shape(t))

    @property
    def is_constant(self):
        return not (np.any(self.b0.cos_coeffs) or np.any(self.b0.sin_coeffs))


def build_profile(f0, b0, normalized=False, samples=DEFAULT_GATE_SAMPLES):
    return BernoulliProfile(build_phi0(f0, normalized, samples), b0)
