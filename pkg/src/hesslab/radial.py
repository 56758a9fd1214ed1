"""Closed-form radial solutions of the exterior problem on balls.

u(r) = -(R/r)^(n/k - 2) solves the homogeneous equation outside the ball of
radius R with u = -1 on the boundary; every derived quantity (level radii,
curvature integrals, the functional F, exterior volume integrals) has a
closed form here, making this module the exact oracle for the others.
"""

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.integrate import quad

from .errors import OutOfDomain
from .fields import Jet2
from .monotone import ProblemSpec, sphere_measure, weights

__all__ = [
    "RadialSolution",
    "asymptotic_predict",
    "exterior_skm1_grad2_integral",
    "radial_F",
    "radial_eval",
]


@dataclass(frozen=True)
class RadialSolution:
    """Exterior solution on the complement of the ball of radius R."""

    n: int
    k: int
    R: float

    def __post_init__(self):
        if not 1 <= self.k or not self.n > 2 * self.k:
            raise ValueError(f"need 1 <= k < n/2, got n={self.n}, k={self.k}")
        if self.R <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def alpha(self):
        """Decay exponent: u = -(R/r)^alpha."""
        return self.n / self.k - 2.0

    @property
    def rho(self):
        """Asymptotic constant of -u |x|^alpha."""
        return self.R**self.alpha

    @property
    def c_bdry(self):
        """|grad u| on the boundary sphere: (n/k - 2)/R."""
        return self.alpha / self.R

    def value(self, r):
        return -((self.R / np.asarray(r, dtype=float)) ** self.alpha)

    def slope(self, r):
        """u'(r) = alpha rho r^(-alpha-1) > 0."""
        r = np.asarray(r, dtype=float)
        return self.alpha * self.rho * r ** (-self.alpha - 1.0)

    def second(self, r):
        r = np.asarray(r, dtype=float)
        return -self.alpha * (self.alpha + 1.0) * self.rho * r ** (-self.alpha - 2.0)

    def level_radius(self, t):
        """Radius of the level sphere {u = t}: solves -(R/r)^alpha = t."""
        t = np.asarray(t, dtype=float)
        return self.R * (-t) ** (-1.0 / self.alpha)


def radial_eval(sol: RadialSolution, r, direction=None) -> Jet2:
    """Second-order jet of the radial solution at radius r.

    Hessian eigenvalues are u'' (radially, once) and u'/r (n-1 times);
    S_k of the Hessian vanishes identically for r >= R.
    """
    r = float(r)
    if r < sol.R:
        raise OutOfDomain(f"r = {r} below ball radius {sol.R}")
    if direction is None:
        direction = np.zeros(sol.n)
        direction[0] = 1.0
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    x = r * e
    up = float(sol.slope(r))
    upp = float(sol.second(r))
    proj = np.outer(e, e)
    H = upp * proj + (up / r) * (np.eye(sol.n) - proj)
    return Jet2(x=x, u=float(sol.value(r)), g=up * e, H=H)


def _level_sphere_integrals(sol: RadialSolution, t, a):
    """(area, int H_k |grad|^a, int H_{k-1} |grad|^(a+1)) on {u = t}."""
    n, k = sol.n, sol.k
    r = float(sol.level_radius(t))
    gn = float(sol.slope(r))
    area = sphere_measure(n - 1) * r ** (n - 1)
    int_hk = area * comb(n - 1, k) * r ** (-k) * gn**a
    int_hk1 = area * comb(n - 1, k - 1) * r ** (-(k - 1)) * gn ** (a + 1)
    return area, int_hk, int_hk1


def radial_F(sol: RadialSolution, t, spec: ProblemSpec):
    """Closed-form F(t) on the ball: constant in t, equal to the limit bound."""
    if not (sol.n, sol.k) == (spec.n, spec.k):
        raise ValueError("solution and problem spec disagree on (n, k)")
    t = float(t)
    if not -1.0 <= t < 0.0:
        raise ValueError("level must lie in [-1, 0)")
    _, int_hk, int_hk1 = _level_sphere_integrals(sol, t, spec.a)
    c1, c2 = weights(t, spec)
    return float(c1) * int_hk + float(c2) * int_hk1


def asymptotic_predict(rho, t, spec: ProblemSpec):
    """Leading-order level-set quantities for -u ~ rho |x|^(2 - n/k).

    Returns (area, int H_k |grad u|^a, int H_{k-1} |grad u|^(a+1), radius),
    dropping the (1 + o(1)) factors; exact at every level on balls.
    """
    n, k, a = spec.n, spec.k, spec.a
    t = float(t)
    mt = -t
    omega = sphere_measure(n - 1)
    area = omega * (mt / rho) ** (k * (n - 1) / (2 * k - n))
    e1 = ((a - k) * (k - n) - k) / (n - 2 * k)
    int_hk = (
        comb(n - 1, k - 1)
        * (n / k - 1.0)
        * ((n / k - 2.0) * rho) ** a
        * rho**e1
        * omega
        * mt**-e1
    )
    e2 = (a + 1 - k) * (n - k) / (n - 2 * k)
    int_hk1 = (
        comb(n - 1, k - 1)
        * ((n / k - 2.0) * rho) ** (a + 1)
        * rho**-e2
        * omega
        * mt**e2
    )
    radius = mt ** (k / (2 * k - n)) * rho ** (k / (n - 2 * k))
    return area, int_hk, int_hk1, radius


def exterior_skm1_grad2_integral(sol: RadialSolution, r_cut_factor=10.0):
    """int over the exterior of S_{k-1}(Hessian) |grad u|^2 dx.

    Adaptive quadrature out to a cut radius; beyond it the integrand is the
    pure power c r^(-(n-k)/k) whose tail is added in closed form.
    """
    n, k = sol.n, sol.k

    def integrand(r):
        lam_t = sol.slope(r) / r
        skm1 = comb(n - 1, k - 1) * lam_t ** (k - 1)
        if k >= 2:
            skm1 += comb(n - 1, k - 2) * sol.second(r) * lam_t ** (k - 2)
        return skm1 * sol.slope(r) ** 2 * sphere_measure(n - 1) * r ** (n - 1)

    r_cut = r_cut_factor * sol.R
    bulk, _ = quad(integrand, sol.R, r_cut, limit=200)
    p = (n - k) / k  # integrand ~ c r^(-p), p > 1 since k < n/2
    tail = integrand(r_cut) * r_cut / (p - 1.0)
    return bulk + tail
