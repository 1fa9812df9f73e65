"""Boundary data shared by both solution routes."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import NonMonotoneDiffeo, NonPositiveThroughflow
from .fields import TWO_PI, BoundaryFunction


def _zero():
    return BoundaryFunction(0.0)


class Diffeo:
    """Orientation-preserving circle map T(theta) = theta + shift(theta)."""

    def __init__(self, shift=None):
        self.shift = shift if shift is not None else _zero()

    def __call__(self, theta):
        return np.asarray(theta, dtype=float) + self.shift(theta)

    def derivative(self, theta):
        return 1.0 + self.shift.derivative()(theta)

    def check(self, samples):
        th = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        slope = self.derivative(th)
        bad = np.flatnonzero(slope <= 0.0)
        if bad.size:
            raise NonMonotoneDiffeo(th[bad[0]], float(slope[bad[0]]))

    def is_identity(self):
        return self.shift.mean == 0.0 and not np.any(self.shift.cos_coeffs) and not np.any(
            self.shift.sin_coeffs
        )


def check_throughflow(q, samples, offset=0.0):
    """Raise unless offset + q(theta) > 0 at ``samples`` uniform angles."""
    th = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    vals = offset + q(th)
    bad = np.flatnonzero(vals <= 0.0)
    if bad.size:
        raise NonPositiveThroughflow(th[bad[0]], float(vals[bad[0]]))


@dataclass
class BoundaryData:
    """Every boundary datum of the supported problems.

    Perturbation kinds (BC1*, BC2*, BC3, BC4, BC5 and the primed variants)
    read f0, f1 as perturbations of the unit through-flow r*u_r = 1. BC1 and
    BC2 for the stream-function route read them as the full through-flow.
    """

    f0: BoundaryFunction = field(default_factory=_zero)
    f1: BoundaryFunction = field(default_factory=_zero)
    b0: BoundaryFunction = field(default_factory=_zero)
    p0: BoundaryFunction = field(default_factory=_zero)
    p1: BoundaryFunction = field(default_factory=_zero)
    T_shift: BoundaryFunction = field(default_factory=_zero)
    j0: float = 0.0
    p1_at_0: float | None = None

    @property
    def T(self):
        return Diffeo(self.T_shift)

    @property
    def p1_dirichlet(self):
        """p1 with its value at theta=0 replaced by ``p1_at_0`` when given."""
        if self.p1_at_0 is None:
            return self.p1
        return self.p1 + (self.p1_at_0 - float(self.p1(0.0)))

    def scaled(self, eps):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, BoundaryFunction):
                out[f.name] = eps * v
            elif f.name == "j0":
                out[f.name] = eps * v
            else:
                out[f.name] = v if v is None else eps * v
        return BoundaryData(**out)

    def shifted_throughflow(self, delta):
        """Copy with ``delta`` added to f0 and f1 (switches normalized/full form)."""
        return BoundaryData(
            self.f0 + delta, self.f1 + delta, self.b0, self.p0, self.p1, self.T_shift,
            self.j0, self.p1_at_0,
        )

    def size(self):
        """Rough C^1 size of the data, used for smallness advisories and scales."""
        return (
            self.f0.norm_c1() + self.f1.norm_c1() + self.b0.norm_c1() + self.p0.norm_c1()
            + self.p1.derivative().sup() + self.T_shift.norm_c1() + abs(self.j0)
        )

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.to_dict() if isinstance(v, BoundaryFunction) else v
        return out


def flux_closure(integrand, J0, modes=None):
    """Outer through-flow from its derivative integrand.

    Builds f1 = f1(0) + int_0^theta (R - R_ave) with the constant f1(0) chosen
    so that int_0^{2pi} f1 = J0. ``integrand`` holds uniform samples of R.
    Returns ``(f1, R_ave, f1_at_0)``.
    """
    R = BoundaryFunction.from_samples(integrand, modes)
    r_ave = R.mean
    A = (R - r_ave).antiderivative()
    # int_0^{2pi} (R - R_ave)(z) (2pi - z) dz, evaluated coefficient-wise
    weighted = TWO_PI * float(np.sum((R.sin_coeffs) / R.k)) if R.modes else 0.0
    f1_at_0 = (J0 - weighted) / TWO_PI
    f1 = BoundaryFunction(f1_at_0 - float(A(0.0)), A.cos_coeffs, A.sin_coeffs)
    return f1, r_ave, f1_at_0
