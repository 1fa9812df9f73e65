"""Grid, field containers and the polar difference operators.

Radial derivatives are second-order finite differences (centered inside,
one-sided at r0 and r1). Angular derivatives are exact for the trigonometric
interpolant of the nodal samples (FFT). Arrays are indexed ``[i_r, j_theta]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonPeriodicData

TWO_PI = 2.0 * np.pi


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AnnulusGrid:
    """Tensor grid on r0 <= r <= r1, 0 <= theta < 2*pi."""

    r0: float
    r1: float
    nr: int
    ntheta: int

    def __post_init__(self):
        if not (0.0 < self.r0 < self.r1):
            raise ValueError(f"need 0 < r0 < r1, got r0={self.r0}, r1={self.r1}")
        if self.nr < 8:
            raise ValueError(f"nr must be >= 8, got {self.nr}")
        if self.ntheta < 8 or self.ntheta % 2:
            raise ValueError(f"ntheta must be even and >= 8, got {self.ntheta}")

    @cached_property
    def dr(self):
        return (self.r1 - self.r0) / (self.nr - 1)

    @cached_property
    def dtheta(self):
        return TWO_PI / self.ntheta

    @cached_property
    def r(self):
        r = self.r0 + self.dr * np.arange(self.nr)
        r[-1] = self.r1
        return _frozen(r)

    @cached_property
    def theta(self):
        return _frozen(self.dtheta * np.arange(self.ntheta))

    @cached_property
    def rr(self):
        return np.broadcast_to(self.r[:, None], self.shape)

    @cached_property
    def tt(self):
        return np.broadcast_to(self.theta[None, :], self.shape)

    @property
    def shape(self):
        return (self.nr, self.ntheta)

    @cached_property
    def wavenumbers(self):
        """Non-negative wavenumbers of the real FFT along theta."""
        return np.arange(self.ntheta // 2 + 1)

    def refined(self, factor=2):
        """Grid with the radial and angular spacings divided by ``factor``."""
        return AnnulusGrid(
            self.r0, self.r1, (self.nr - 1) * factor + 1, self.ntheta * factor
        )

    def scalar(self, values):
        return ScalarField(self, values)

    def sample(self, func):
        """Evaluate ``func(r, theta)`` on every node."""
        return ScalarField(self, np.broadcast_to(func(self.rr, self.tt), self.shape))


class ScalarField:
    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"ScalarField({self.grid.nr}x{self.grid.ntheta}, max|.|={self.max_abs():.3e})"

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def _coerce(self, other):
        return other.values if isinstance(other, ScalarField) else other

    def __add__(self, other):
        return ScalarField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return ScalarField(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)


class PolarVectorField:
    """Physical components along e_r and the counterclockwise tangent e_theta."""

    __slots__ = ("grid", "vr", "vtheta")

    def __init__(self, grid, vr, vtheta):
        vr = np.array(np.broadcast_to(vr, grid.shape), dtype=float)
        vtheta = np.array(np.broadcast_to(vtheta, grid.shape), dtype=float)
        vr.setflags(write=False)
        vtheta.setflags(write=False)
        self.grid = grid
        self.vr = vr
        self.vtheta = vtheta

    def __repr__(self):
        return f"PolarVectorField({self.grid.nr}x{self.grid.ntheta}, max|.|={self.max_abs():.3e})"

    @classmethod
    def from_function(cls, grid, func):
        vr, vt = func(grid.rr, grid.tt)
        return cls(grid, vr, vt)

    def max_abs(self):
        return float(max(np.max(np.abs(self.vr)), np.max(np.abs(self.vtheta))))

    def __add__(self, other):
        return PolarVectorField(self.grid, self.vr + other.vr, self.vtheta + other.vtheta)

    def __sub__(self, other):
        return PolarVectorField(self.grid, self.vr - other.vr, self.vtheta - other.vtheta)

    def __mul__(self, a):
        return PolarVectorField(self.grid, a * self.vr, a * self.vtheta)

    __rmul__ = __mul__

    def __neg__(self):
        return PolarVectorField(self.grid, -self.vr, -self.vtheta)

    def speed_squared(self):
        return self.vr**2 + self.vtheta**2


# ---------------------------------------------------------------------------
# periodic boundary functions


class BoundaryFunction:
    """Truncated real Fourier series ``mean + sum a_k cos k t + b_k sin k t``.

    Derivatives and antiderivatives act on the coefficients, so they are exact.
    """

    __slots__ = ("mean", "cos_coeffs", "sin_coeffs")

    def __init__(self, mean=0.0, cos_coeffs=(), sin_coeffs=()):
        a = np.atleast_1d(np.asarray(cos_coeffs, dtype=float))
        b = np.atleast_1d(np.asarray(sin_coeffs, dtype=float))
        m = max(a.size, b.size)
        self.mean = float(mean)
        self.cos_coeffs = _frozen(np.pad(a, (0, m - a.size)))
        self.sin_coeffs = _frozen(np.pad(b, (0, m - b.size)))

    @classmethod
    def constant(cls, value):
        return cls(value)

    @classmethod
    def from_samples(cls, samples, modes=None):
        """Least-squares projection of uniform periodic samples onto ``modes`` harmonics.

        With ``modes`` up to n/2 - 1 this is trigonometric interpolation minus
        the Nyquist term.
        """
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        kmax = n // 2 - 1 if modes is None else min(int(modes), n // 2 - 1)
        c = np.fft.rfft(samples) / n
        return cls(c[0].real, 2.0 * c[1 : kmax + 1].real, -2.0 * c[1 : kmax + 1].imag)

    @property
    def modes(self):
        return self.cos_coeffs.size

    @property
    def k(self):
        return np.arange(1, self.modes + 1)

    def __repr__(self):
        return f"BoundaryFunction(mean={self.mean:.6g}, modes={self.modes})"

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.modes == 0:
            return np.full(theta.shape, self.mean) if theta.ndim else self.mean
        # Horner in z = e^{i theta} on c_k = a_k - i b_k
        z = np.exp(1j * theta)
        c = self.cos_coeffs - 1j * self.sin_coeffs
        acc = np.full(theta.shape, c[-1], dtype=complex)
        for ck in c[-2::-1]:
            acc *= z
            acc += ck
        out = self.mean + np.real(acc * z)
        return out if theta.ndim else float(out)

    def average(self):
        return self.mean

    def integral(self):
        """Integral over one period."""
        return TWO_PI * self.mean

    def derivative(self):
        k = self.k
        return BoundaryFunction(0.0, k * self.sin_coeffs, -k * self.cos_coeffs)

    def antiderivative(self):
        """Zero-mean periodic A with A' = f - mean."""
        k = self.k
        return BoundaryFunction(0.0, -self.sin_coeffs / k, self.cos_coeffs / k)

    def integral_from_zero(self, theta):
        """int_0^theta f(s) ds, including the linear part mean*theta."""
        a = self.antiderivative()
        return self.mean * np.asarray(theta, dtype=float) + a(theta) - a(0.0)

    def sup(self, samples=512):
        return float(np.max(np.abs(self(np.linspace(0.0, TWO_PI, samples, endpoint=False)))))

    def norm_c1(self, samples=512):
        return self.sup(samples) + self.derivative().sup(samples)

    def _aligned(self, other):
        m = max(self.modes, other.modes)
        pad = lambda c: np.pad(c, (0, m - c.size))
        return (pad(self.cos_coeffs), pad(self.sin_coeffs), pad(other.cos_coeffs), pad(other.sin_coeffs))

    def __add__(self, other):
        if not isinstance(other, BoundaryFunction):
            return BoundaryFunction(self.mean + other, self.cos_coeffs, self.sin_coeffs)
        a1, b1, a2, b2 = self._aligned(other)
        return BoundaryFunction(self.mean + other.mean, a1 + a2, b1 + b2)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, s):
        return BoundaryFunction(s * self.mean, s * self.cos_coeffs, s * self.sin_coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def to_dict(self):
        return {
            "mean": self.mean,
            "cos": self.cos_coeffs.tolist(),
            "sin": self.sin_coeffs.tolist(),
        }


# ---------------------------------------------------------------------------
# one-dimensional derivatives


def d_r(values, dr):
    """Second-order radial derivative along axis 0.

    Centered inside. The 4-point one-sided rows at r0 and r1 share the
    centered leading error dr^2 f'''/6, so the error is smooth across the
    boundary and composed derivatives (div of a gradient) stay second-order.
    """
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * dr)
    out[0] = (-4.0 * v[0] + 7.0 * v[1] - 4.0 * v[2] + v[3]) / (2.0 * dr)
    out[-1] = (4.0 * v[-1] - 7.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (2.0 * dr)
    return out


def d_theta(values):
    """Spectral derivative along the last axis; the Nyquist mode is dropped."""
    v = np.asarray(values, dtype=float)
    n = v.shape[-1]
    c = np.fft.rfft(v, axis=-1)
    ik = 1j * np.arange(n // 2 + 1)
    ik[-1] = 0.0
    return np.fft.irfft(c * ik, n=n, axis=-1)


def theta_antiderivative(values):
    """Spectral int_0^theta along the last axis, returned with the linear part.

    Exact for the trigonometric interpolant of the samples (Nyquist dropped).
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[-1]
    c = np.fft.rfft(v, axis=-1) / n
    mean = c[..., 0].real
    k = np.arange(1, n // 2)
    theta = TWO_PI * np.arange(n) / n
    ck = c[..., 1 : n // 2]
    # periodic part: sum 2 Re[c_k e^{ikt} / (ik)]
    phase = np.exp(1j * np.multiply.outer(theta, k))
    per = 2.0 * np.real((ck / (1j * k)) @ phase.T)
    per0 = 2.0 * np.real(np.sum(ck / (1j * k), axis=-1))
    return mean[..., None] * theta + per - per0[..., None]


# ---------------------------------------------------------------------------
# polar operators


def _vals(x):
    return x.values if isinstance(x, ScalarField) else np.asarray(x, dtype=float)


def polar_grad(s):
    g = s.grid
    v = _vals(s)
    return PolarVectorField(g, d_r(v, g.dr), d_theta(v) / g.rr)


def polar_div(v):
    g = v.grid
    return ScalarField(g, (d_r(g.rr * v.vr, g.dr) + d_theta(v.vtheta)) / g.rr)


def polar_curl(v):
    g = v.grid
    return ScalarField(g, (d_r(g.rr * v.vtheta, g.dr) - d_theta(v.vr)) / g.rr)


def face_coefficients(grid):
    """Radial face weights for the conservative (r phi')' stencil.

    The logarithmic mean dr / ln(r_{i+1}/r_i) is a second-order approximation
    of r_{i+1/2} that makes ln r an exact discrete mode-0 solution.
    """
    r = grid.r
    return grid.dr / np.log(r[1:] / r[:-1])


# ---------------------------------------------------------------------------
# quadrature and interpolation


def theta_quadrature(samples):
    samples = np.asarray(samples, dtype=float)
    return (TWO_PI / samples.shape[-1]) * np.sum(samples, axis=-1)


def radial_quadrature(samples, dr):
    """Composite trapezoid along axis 0."""
    samples = np.asarray(samples, dtype=float)
    return dr * (np.sum(samples, axis=0) - 0.5 * (samples[0] + samples[-1]))


def ring_flux(v):
    """theta_quadrature(r * v_r) on every ring."""
    return theta_quadrature(v.grid.rr * v.vr)


def trig_coefficients(samples):
    """Complex coefficients of the trigonometric interpolant along the last axis.

    Returned with interior modes doubled and the Nyquist mode halved so that
    ``value = Re(sum_k c_k e^{ik theta})`` over k = 0..n/2.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[-1]
    c = np.fft.rfft(samples, axis=-1) / n
    c[..., 1 : n // 2] *= 2.0
    return c


def trig_evaluate(coeffs, theta):
    """Evaluate ``Re(sum_k c_k e^{ik theta})`` for coefficient rows.

    ``coeffs`` has shape (..., K); ``theta`` is broadcast against the leading
    axes of ``coeffs`` (one angle per coefficient row) or is any array when
    ``coeffs`` is one-dimensional.
    """
    coeffs = np.asarray(coeffs)
    theta = np.asarray(theta, dtype=float)
    kk = np.arange(coeffs.shape[-1])
    if coeffs.ndim == 1:
        return np.real(np.exp(1j * np.multiply.outer(theta, kk)) @ coeffs)
    phase = np.exp(1j * theta[..., None] * kk)
    return np.real(np.sum(phase * coeffs, axis=-1))


def trig_interpolate(samples, theta):
    """Value at ``theta`` of the degree <= n/2 trigonometric interpolant."""
    val = trig_evaluate(trig_coefficients(samples), np.mod(theta, TWO_PI))
    return val if np.ndim(theta) else float(val)


def check_periodic_row(row, ntheta, name="boundary data"):
    row = np.asarray(row, dtype=float)
    if row.shape != (ntheta,) or not np.all(np.isfinite(row)):
        raise NonPeriodicData(f"{name} must be {ntheta} finite samples over one period")
    return row
