"""Closed axisymmetric star-shaped hypersurfaces in R^n.

A surface is the rotation of a polar profile gamma(theta), theta in [0, pi],
about the z-axis through S^(n-2) orbits.  Provides principal curvatures,
quermassintegrals int H_k, enclosed volume, the Minkowski identity residual
and the Aleksandrov-Fenchel / Qiu-Xia inequality gaps.
"""

from dataclasses import dataclass
from math import comb, gamma as gamma_fn, pi

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NotConvex, StarShapeViolation

__all__ = [
    "RevolutionBody",
    "SurfaceSampleSet",
    "af_gap",
    "curvature_samples",
    "minkowski_residual",
    "qiu_xia_gap",
    "quermass",
    "sphere_measure",
    "surface_h_k",
    "volume",
]

PROFILE_HEADER = "# revolution-profile v1"


def sphere_measure(m):
    """Surface measure |S^m| of the unit m-sphere."""
    return 2.0 * pi ** ((m + 1) / 2.0) / gamma_fn((m + 1) / 2.0)


def _simpson_weights(num_nodes, h):
    if num_nodes < 3 or num_nodes % 2 == 0:
        raise ValueError("composite Simpson needs an odd node count >= 3")
    w = np.ones(num_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


@dataclass
class RevolutionBody:
    """Axisymmetric star-shaped body given by a positive polar profile.

    Stores the profile and its first two derivatives on a uniform grid of
    theta in [0, pi].  Builtin shapes carry analytic derivatives; profiles
    loaded from samples use a clamped cubic spline (gamma'(0) = gamma'(pi)
    = 0, the even endpoint condition at the poles).
    """

    n: int
    theta: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    d2gamma: np.ndarray

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("ambient dimension must be >= 3")
        if np.any(self.gamma <= 0):
            raise ValueError("profile radius must be positive everywhere")

    @property
    def num_intervals(self):
        return self.theta.size - 1

    @property
    def max_radius(self):
        return float(np.max(self.gamma))

    @property
    def mean_radius(self):
        return float(np.mean(self.gamma))

    # -- constructors -------------------------------------------------

    @classmethod
    def from_callables(cls, n, gamma, dgamma, d2gamma, samples=512):
        th = np.linspace(0.0, pi, samples + 1)
        return cls(n, th, gamma(th), dgamma(th), d2gamma(th))

    @classmethod
    def sphere(cls, R, n, samples=512):
        th = np.linspace(0.0, pi, samples + 1)
        z = np.zeros_like(th)
        return cls(n, th, np.full_like(th, float(R)), z, z.copy())

    @classmethod
    def spheroid(cls, a, b, n, samples=512):
        """Spheroid with semi-axis a along the rotation axis and b across."""
        a, b = float(a), float(b)

        def gam(th):
            return a * b / np.sqrt(b**2 * np.cos(th) ** 2 + a**2 * np.sin(th) ** 2)

        def dgam(th):
            D = b**2 * np.cos(th) ** 2 + a**2 * np.sin(th) ** 2
            Dp = (a**2 - b**2) * np.sin(2 * th)
            return -0.5 * a * b * D ** (-1.5) * Dp

        def d2gam(th):
            D = b**2 * np.cos(th) ** 2 + a**2 * np.sin(th) ** 2
            Dp = (a**2 - b**2) * np.sin(2 * th)
            Dpp = 2.0 * (a**2 - b**2) * np.cos(2 * th)
            return 0.75 * a * b * D ** (-2.5) * Dp**2 - 0.5 * a * b * D ** (-1.5) * Dpp

        return cls.from_callables(n, gam, dgam, d2gam, samples)

    @classmethod
    def cos_perturbed(cls, n, amplitude, frequency=2, R=1.0, samples=512):
        """Profile R (1 + amplitude cos(frequency * theta)); frequency integer."""
        R, amp, m = float(R), float(amplitude), int(frequency)
        return cls.from_callables(
            n,
            lambda th: R * (1.0 + amp * np.cos(m * th)),
            lambda th: -R * amp * m * np.sin(m * th),
            lambda th: -R * amp * m**2 * np.cos(m * th),
            samples,
        )

    @classmethod
    def from_samples(cls, n, theta, gamma, samples=None):
        """Spline a sampled profile; derivatives from the clamped spline."""
        spline = CubicSpline(theta, gamma, bc_type="clamped")
        if samples is None:
            th = np.asarray(theta, dtype=float)
        else:
            th = np.linspace(0.0, pi, samples + 1)
        return cls(n, th, spline(th), spline(th, 1), spline(th, 2))

    def resampled(self, samples):
        """Body on a refined uniform grid (spline through current samples)."""
        return RevolutionBody.from_samples(self.n, self.theta, self.gamma, samples)

    # -- profile file format ------------------------------------------

    def save_profile(self, path):
        with open(path, "w") as fh:
            fh.write(f"{PROFILE_HEADER} n={self.n}\n")
            for th, g in zip(self.theta, self.gamma):
                fh.write(f"{th:.17g} {g:.17g}\n")

    @classmethod
    def load_profile(cls, path, samples=None):
        with open(path) as fh:
            header = fh.readline().strip()
            if not header.startswith(PROFILE_HEADER):
                raise ValueError(f"not a revolution-profile file: {path}")
            n = int(header.split("n=")[1])
            data = np.loadtxt(fh)
        return cls.from_samples(n, data[:, 0], data[:, 1], samples)


@dataclass
class SurfaceSampleSet:
    """Per-node surface data with quadrature weights.

    area_weight already folds in the Simpson coefficient, the profile speed
    and the rotation factor |S^(n-2)| rho^(n-2); summing integrand *
    area_weight integrates over the closed hypersurface.
    """

    n: int
    theta: np.ndarray
    z: np.ndarray
    rho: np.ndarray
    nu_z: np.ndarray
    nu_rho: np.ndarray
    kappa_m: np.ndarray
    kappa_r: np.ndarray
    x_dot_nu: np.ndarray
    area_weight: np.ndarray

    def h_k(self, k):
        return surface_h_k(self.kappa_m, self.kappa_r, self.n, k)

    def integrate(self, values):
        return float(np.sum(values * self.area_weight))

    @property
    def area(self):
        return float(np.sum(self.area_weight))


def surface_h_k(kappa_m, kappa_r, n, k):
    """H_k = S_k of (kappa_m, kappa_r * (n-2)); H_0 = 1."""
    if k == 0:
        return np.ones_like(np.asarray(kappa_m, dtype=float))
    if k > n - 1:
        return np.zeros_like(np.asarray(kappa_m, dtype=float))
    val = np.zeros_like(np.asarray(kappa_m, dtype=float))
    if k <= n - 2:
        val = val + comb(n - 2, k) * kappa_r**k
    if k - 1 <= n - 2:
        val = val + comb(n - 2, k - 1) * kappa_m * kappa_r ** (k - 1)
    return val


def curvature_samples(body: RevolutionBody) -> SurfaceSampleSet:
    """Principal curvatures and quadrature weights over the profile grid.

    Orientation: a round sphere of radius R yields kappa_m = kappa_r = 1/R.
    At the poles the limit kappa_r = kappa_m is used.
    """
    th = body.theta
    g, gp, gpp = body.gamma, body.dgamma, body.d2gamma
    speed = np.sqrt(g**2 + gp**2)
    sin, cos = np.sin(th), np.cos(th)

    z = g * cos
    rho = g * sin
    nu_z = (g * cos + gp * sin) / speed
    nu_rho = (g * sin - gp * cos) / speed
    x_dot_nu = g**2 / speed
    if np.any(x_dot_nu <= 0):
        raise StarShapeViolation("<x, nu> <= 0 at a profile sample")

    kappa_m = (g**2 + 2 * gp**2 - g * gpp) / speed**3
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa_r = np.where(rho > 0, nu_rho / np.where(rho > 0, rho, 1.0), 0.0)
    pole = rho <= 0
    kappa_r[pole] = kappa_m[pole]

    h = th[1] - th[0]
    w = _simpson_weights(th.size, h)
    area_weight = w * sphere_measure(body.n - 2) * rho ** (body.n - 2) * speed
    return SurfaceSampleSet(
        n=body.n,
        theta=th,
        z=z,
        rho=rho,
        nu_z=nu_z,
        nu_rho=nu_rho,
        kappa_m=kappa_m,
        kappa_r=kappa_r,
        x_dot_nu=x_dot_nu,
        area_weight=area_weight,
    )


def quermass(body: RevolutionBody, k):
    """Quermassintegral int_{boundary} H_k dsigma."""
    if not 0 <= k <= body.n - 1:
        raise ValueError(f"need 0 <= k <= n-1, got k={k}")
    s = curvature_samples(body)
    return s.integrate(s.h_k(k))


def minkowski_residual(body: RevolutionBody, k):
    """Residual of int <x,nu> H_k = ((n-k)/k) int H_{k-1}; -> 0 on refinement."""
    if not 1 <= k <= body.n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got k={k}")
    s = curvature_samples(body)
    lhs = s.integrate(s.x_dot_nu * s.h_k(k))
    rhs = (body.n - k) / k * s.integrate(s.h_k(k - 1))
    return lhs - rhs


def volume(body: RevolutionBody):
    """Enclosed volume by the divergence theorem: (1/n) int <x,nu> dsigma."""
    s = curvature_samples(body)
    return s.integrate(s.x_dot_nu) / body.n


def _require_convex(samples: SurfaceSampleSet, margin=1e-12):
    worst = min(float(np.min(samples.kappa_m)), float(np.min(samples.kappa_r)))
    if worst <= margin:
        raise NotConvex(f"curvature sample {worst:.3e} <= convexity margin {margin:g}")


def af_gap(body: RevolutionBody, k):
    """Aleksandrov-Fenchel gap for convex bodies, k >= 2:

        (n-k)(k-1) (int H_{k-1})^2 - (n-k+1) k int H_k int H_{k-2}

    Nonnegative for convex bodies; zero exactly for balls.
    """
    n = body.n
    if k < 2:
        raise ValueError("af_gap needs k >= 2")
    s = curvature_samples(body)
    _require_convex(s)
    q_km1 = s.integrate(s.h_k(k - 1))
    q_k = s.integrate(s.h_k(k))
    q_km2 = s.integrate(s.h_k(k - 2))
    return (n - k) * (k - 1) * q_km1**2 - (n - k + 1) * k * q_k * q_km2


def qiu_xia_gap(body: RevolutionBody):
    """Gap (n-1)/n |bdry|^2 - |body| int H_1; >= 0 for convex, 0 for balls."""
    s = curvature_samples(body)
    _require_convex(s)
    area = s.area
    vol = s.integrate(s.x_dot_nu) / body.n
    int_h1 = s.integrate(s.h_k(1))
    return (body.n - 1) / body.n * area**2 - vol * int_h1
