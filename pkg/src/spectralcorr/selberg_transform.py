"""Admissible test functions and the Selberg transform h -> h_hat -> Q -> phi.

Fourier normalisation: h_hat(u) = (1/2pi) * integral of h(r) exp(-i r u) dr,
so that h(0) = integral of h_hat. The point-pair side uses
Q(e^u + e^-u - 2) = h_hat(u) and the Abel inversion
phi(x) = -(1/pi) * integral_x^inf Q'(t) / sqrt(t - x) dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import DomainError
from .quadrature import integrate, integrate_segments

#: Half-width of the strip |Im r| <= 1/2 + eps in which h must be holomorphic.
STRIP_HALF_WIDTH = 0.75


@dataclass(frozen=True)
class Gaussian:
    """h(r) = exp(-a r^2).

    Entire, even, and decaying faster than any power, so it satisfies the
    admissibility conditions for every a > 0.
    """

    a: float

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise DomainError(f"Gaussian width must be positive, got {self.a}")

    @property
    def spec(self) -> str:
        return f"gaussian:a={self.a!r}"

    def h(self, r):
        return np.exp(-self.a * np.asarray(r) ** 2)

    def h_hat(self, u):
        a = self.a
        return np.exp(-np.asarray(u, dtype=float) ** 2 / (4 * a)) / (2 * math.sqrt(math.pi * a))

    def h_hat_prime(self, u):
        u = np.asarray(u, dtype=float)
        return -u / (2 * self.a) * self.h_hat(u)

    def r_cutoff(self, eps: float = 1e-20) -> float:
        """R with |h(r)| * (1 + |r|)^2 < eps for |r| > R."""
        R = math.sqrt(-math.log(eps) / self.a)
        while math.exp(-self.a * R * R) * (1 + R) ** 2 >= eps:
            R *= 1.1
        return R

    def u_cutoff(self, eps: float = 1e-20) -> float:
        """U with h_hat(u) < eps for |u| > U."""
        c = 1.0 / (2 * math.sqrt(math.pi * self.a))
        if c <= eps:
            return 0.0
        return math.sqrt(4 * self.a * math.log(c / eps))

    def h_hat_tail(self, U: float) -> float:
        """Integral of h_hat over [U, inf)."""
        return 0.5 * float(erfc(U / (2 * math.sqrt(self.a))))

    def h_hat_moment_tail(self, U: float) -> float:
        """Integral of u * h_hat(u) over [U, inf), U >= 0."""
        return math.sqrt(self.a / math.pi) * math.exp(-U * U / (4 * self.a))

    def h_tail(self, R: float) -> float:
        """Integral of |h| over [R, inf)."""
        return 0.5 * math.sqrt(math.pi / self.a) * float(erfc(math.sqrt(self.a) * R))

    def h_moment_tail(self, R: float) -> float:
        """Integral of r |h(r)| over [R, inf), R >= 0."""
        return math.exp(-self.a * R * R) / (2 * self.a)

    def admissibility(self, delta: float = 1.0) -> dict:
        """Analytic certificate plus a numeric decay spot-check on [0, 100]."""
        r = np.linspace(0.0, 100.0, 2001)
        decay = np.abs(self.h(r)) * (1 + r) ** (2 + delta)
        return {
            "even": True,
            "holomorphic_strip": math.inf,
            "decay_exponent": math.inf,
            "decay_sup_on_0_100": float(decay.max()),
        }


TestFunction = Gaussian


def parse_test_function(spec: str) -> TestFunction:
    """Parse ``gaussian:a=<float>``."""
    family, _, params = spec.strip().partition(":")
    if family.strip().lower() != "gaussian":
        raise DomainError(f"unknown test function family {family!r}")
    values = {}
    for item in filter(None, params.split(",")):
        key, _, val = item.partition("=")
        values[key.strip()] = float(val)
    if set(values) != {"a"}:
        raise DomainError(f"gaussian needs exactly one parameter a, got {spec!r}")
    return Gaussian(values["a"])


def h_eval(f: TestFunction, r):
    r = np.asarray(r, dtype=complex)
    if np.any(np.abs(r.imag) > STRIP_HALF_WIDTH):
        raise DomainError(f"|Im r| must be at most {STRIP_HALF_WIDTH}")
    out = f.h(r)
    return out if out.ndim else complex(out)


def h_hat_quadrature(f: TestFunction, u, tol: float = 1e-13):
    """h_hat by direct quadrature of (1/pi) * integral_0^R h(r) cos(r u) dr."""
    R = f.r_cutoff(1e-22)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u_arr)
    for i, ui in enumerate(u_arr):
        # enough panels to resolve the oscillation
        panels = max(8, int(R * abs(ui) / math.pi) + 8)
        res = integrate(lambda r: f.h(r).real * np.cos(r * ui), 0.0, R, tol=tol, initial=panels)
        out[i] = res.value / math.pi
    return out if np.ndim(u) else float(out[0])


def h_hat(f: TestFunction, u, method: str = "closed"):
    if method == "closed":
        out = f.h_hat(u)
        return out if np.ndim(u) else float(out)
    if method == "quadrature":
        return h_hat_quadrature(f, u)
    raise DomainError(f"unknown method {method!r}")


def u_of_t(t):
    """Inverse of t = e^u + e^-u - 2 on u >= 0."""
    w = 1.0 + np.asarray(t, dtype=float) / 2.0
    return np.log(w + np.sqrt(w * w - 1.0))


def q_from_hhat(f: TestFunction, t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("Q is defined for t >= 0")
    out = f.h_hat(u_of_t(t_arr))
    return out if out.ndim else float(out)


def q_prime(f: TestFunction, t):
    """dQ/dt = h_hat'(u) / (2 sinh u), with the u -> 0 limit h_hat''(0)/2."""
    u = u_of_t(t)
    small = u < 1e-6
    safe = np.where(small, 1.0, u)
    ratio = f.h_hat_prime(safe) / (2.0 * np.sinh(safe))
    if np.any(small):
        # h_hat'(u) ~ h_hat''(0) u, so the ratio tends to h_hat''(0)/2
        eps = 1e-4
        limit = (f.h_hat_prime(eps) / eps) / 2.0
        ratio = np.where(small, limit, ratio)
    return ratio


def _s_breakpoints(f: TestFunction, x: float) -> list[float]:
    # beyond s_max, t = x + s^2 puts u past the effective support of h_hat
    u_max = f.u_cutoff(1e-24) + 1.0
    t_max = 2.0 * math.cosh(u_max) - 2.0
    s_max = math.sqrt(max(t_max - x, 1.0))
    pts = [0.0]
    s = 0.5
    while s < s_max:
        pts.append(s)
        s *= 4.0
    pts.append(s_max)
    return pts


def phi_from_q(f: TestFunction, x: float, tol: float = 1e-13) -> float:
    """phi(x) = -(2/pi) * integral_0^inf Q'(x + s^2) ds (after t = x + s^2)."""
    if x < 0:
        raise DomainError("phi is evaluated on x >= 0")
    res = integrate_segments(lambda s: q_prime(f, x + s * s), _s_breakpoints(f, x), tol=tol)
    return -2.0 / math.pi * res.value


def q_from_phi(f: TestFunction, x: float, tol: float = 1e-10) -> float:
    """Forward transform Q(x) = integral_x^inf phi(t)/sqrt(t - x) dt = 2 * integral_0^inf phi(x + s^2) ds."""
    if x < 0:
        raise DomainError("Q is defined for t >= 0")

    def integrand(s):
        return np.array([phi_from_q(f, x + si * si, tol=1e-14) for si in s])

    res = integrate_segments(integrand, _s_breakpoints(f, x), tol=tol)
    return 2.0 * res.value
