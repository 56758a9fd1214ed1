"""Weight functions, the monotone level-set functional F(t), and its audit.

The weight pair (C1, C2) solves the ODE system

    C2' + (a - k(n-k-1)/(n-k)) ((n-k)/((n-2k) t))^2 C1 = 0,
    C1' - (a+1-k) C2 + 2 (n-k)/((n-2k) t) (a - k(n-k-1)/(n-k)) C1 = 0,

with the closed forms

    C1(t) = (-t)^(-p) C3 + (-t)^(1-p) C4,       p = ((a-k)(n-k)+k)/(n-2k),
    C2(t) = -(p/(a+1-k)) C3 (-t)^(-q) - ((n-k)/(n-2k)) C4 (-t)^(1-q),
                                                 q = (a-k+1)(n-k)/(n-2k).

F(t) = C1(t) int_{u=t} H_k |grad u|^a + C2(t) int_{u=t} H_{k-1} |grad u|^(a+1)
is non-increasing on [-1, 0) and bounded below by the C3-weighted limit value,
with equality exactly for balls.
"""

from dataclasses import dataclass, field as dc_field
from math import comb

import numpy as np

from .errors import CriticalPointOnLevel, LevelOutOfRange
from .fields import TAU_GRAD, EpsilonRHS, Jet2, approx_rhs, levelset_curvature
from .surfaces import RevolutionBody, curvature_samples, sphere_measure

__all__ = [
    "FResult",
    "LevelSetCurve",
    "MonotonicityReport",
    "ProblemSpec",
    "F_boundary",
    "F_eval",
    "boundary_integrals",
    "extract_levelset",
    "limit_bound",
    "monotonicity_audit",
    "weights",
    "weights_derivatives",
    "weights_ode_residual",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Global problem parameters: dimension, order, exponent and weights."""

    n: int
    k: int
    a: float
    C3: float = 1.0
    C4: float = 0.0
    t_grid: np.ndarray = dc_field(default=None)
    eps_schedule: tuple = (0.5, 0.1, 0.02)
    cnk: float = 1.0
    tau_grad: float = TAU_GRAD

    def __post_init__(self):
        if not 1 <= self.k or not self.n > 2 * self.k:
            raise ValueError(f"need 1 <= k < n/2, got n={self.n}, k={self.k}")
        if self.a < self.a_min - 1e-12:
            raise ValueError(f"need a >= k(n-k-1)/(n-k) = {self.a_min:g}, got {self.a}")
        if self.t_grid is None:
            object.__setattr__(self, "t_grid", np.linspace(-1.0, -0.02, 50))
        else:
            object.__setattr__(self, "t_grid", np.asarray(self.t_grid, dtype=float))
        c1, _ = weights(self.t_grid, self)
        if np.any(c1 < -1e-12):
            raise ValueError("C1(t) must be nonnegative on the t grid")

    @property
    def a_min(self):
        return self.k * (self.n - self.k - 1) / (self.n - self.k)

    @property
    def decay_exponent(self):
        """Far-field decay power: u ~ -rho |x|^(-(n/k - 2))."""
        return self.n / self.k - 2.0

    @property
    def p_exponent(self):
        n, k, a = self.n, self.k, self.a
        return ((a - k) * (n - k) + k) / (n - 2 * k)

    @property
    def q_exponent(self):
        n, k, a = self.n, self.k, self.a
        return (a - k + 1) * (n - k) / (n - 2 * k)


def weights(t, spec: ProblemSpec):
    """Closed-form weight pair (C1(t), C2(t)) for t in [-1, 0)."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= 0) or np.any(t < -1):
        raise ValueError("levels must lie in [-1, 0)")
    mt = -t
    n, k, a = spec.n, spec.k, spec.a
    p, q = spec.p_exponent, spec.q_exponent
    c1 = mt ** (-p) * spec.C3 + mt ** (1 - p) * spec.C4
    c2 = -(p / (a + 1 - k)) * spec.C3 * mt ** (-q) - (n - k) / (
        n - 2 * k
    ) * spec.C4 * mt ** (1 - q)
    return c1, c2


def weights_derivatives(t, spec: ProblemSpec):
    """Analytic t-derivatives (C1'(t), C2'(t)) of the closed forms."""
    t = np.asarray(t, dtype=float)
    mt = -t
    n, k, a = spec.n, spec.k, spec.a
    p, q = spec.p_exponent, spec.q_exponent
    # d/dt (-t)^m = -m (-t)^(m-1)
    c1p = p * mt ** (-p - 1) * spec.C3 - (1 - p) * mt ** (-p) * spec.C4
    c2p = -(p / (a + 1 - k)) * spec.C3 * q * mt ** (-q - 1) + (n - k) / (
        n - 2 * k
    ) * spec.C4 * (1 - q) * mt ** (-q)
    return c1p, c2p


def weights_ode_residual(t, spec: ProblemSpec):
    """Residuals of the two weight ODEs, normalized by their largest term."""
    t = np.asarray(t, dtype=float)
    n, k, a = spec.n, spec.k, spec.a
    b = a - k * (n - k - 1) / (n - k)
    c1, c2 = weights(t, spec)
    c1p, c2p = weights_derivatives(t, spec)
    coef = (n - k) / ((n - 2 * k) * t)
    term1a, term1b = c2p, b * coef**2 * c1
    res1 = term1a + term1b
    scale1 = np.maximum(np.maximum(np.abs(term1a), np.abs(term1b)), 1.0)
    term2a, term2b, term2c = c1p, -(a + 1 - k) * c2, 2 * coef * b * c1
    res2 = term2a + term2b + term2c
    scale2 = np.maximum.reduce(
        [np.abs(term2a), np.abs(term2b), np.abs(term2c), np.ones_like(res2)]
    )
    return res1 / scale1, res2 / scale2


def limit_bound(spec: ProblemSpec, rho):
    """Lower bound of F(t): the t -> 0 limit, attained exactly for balls."""
    n, k, a = spec.n, spec.k, spec.a
    return (
        (n - 2 * k)
        / (k * (a + 1 - k))
        * comb(n - 1, k - 1)
        * (n / k - 2.0) ** a
        * rho ** (k * (n - k - a - 1))
        * sphere_measure(n - 1)
        * spec.C3
    )


# ---------------------------------------------------------------------------
# Level-set extraction (marching squares on the solver grid)
# ---------------------------------------------------------------------------


@dataclass
class LevelSetCurve:
    """Contour {u = t} as quadrature-ready segments in the (z, rho) plane."""

    t: float
    n: int
    seg_z: np.ndarray  # (nseg, 2) endpoint z
    seg_rho: np.ndarray  # (nseg, 2) endpoint rho
    mid_s: np.ndarray
    mid_theta: np.ndarray
    jets: list  # Jet2 at segment midpoints
    weight: np.ndarray  # segment length * |S^(n-2)| rho^(n-2)

    @property
    def num_segments(self):
        return self.seg_z.shape[0]

    def integrate(self, values):
        return float(np.sum(np.asarray(values) * self.weight))


_EDGES = {  # marching-squares segment table: case -> list of edge pairs
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    5: [(3, 0), (1, 2)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(2, 0)],
    10: [(0, 1), (2, 3)],
    11: [(2, 1)],
    12: [(1, 3)],
    13: [(1, 0)],
    14: [(0, 3)],
}


def _edge_point(edge, i, j, f, hs, ht):
    """Crossing point of a cell edge in (s, theta) coordinates.

    Corners: 0=(i,j), 1=(i+1,j), 2=(i+1,j+1), 3=(i,j+1); f holds u - t.
    """
    corners = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
    a, b = {0: (0, 1), 1: (1, 2), 2: (3, 2), 3: (0, 3)}[edge]
    (ia, ja), (ib, jb) = corners[a], corners[b]
    fa, fb = f[ia, ja], f[ib, jb]
    lam = fa / (fa - fb)
    s = hs * (ia + lam * (ib - ia))
    th = ht * (ja + lam * (jb - ja))
    return s, th


def extract_levelset(field, t, tau_grad=TAU_GRAD) -> LevelSetCurve:
    """Marching-squares contour of {u = t} with midpoint jets.

    The level must sit strictly between the first interior grid row and the
    far-field row, so a full stencil separates the curve from both
    boundaries.
    """
    u = field.u
    if not (t > float(np.max(u[1, :])) and t < float(np.min(u[-1, :]))):
        raise LevelOutOfRange(
            f"level {t} not strictly between boundary and far-field values"
        )
    grid = field.grid
    ns, nt = u.shape
    hs = grid.s[1] - grid.s[0]
    ht = grid.theta[1] - grid.theta[0]
    f = u - t

    pts_s, pts_t = [], []
    for i in range(ns - 1):
        block = f[i : i + 2, :]
        if np.all(block > 0) or np.all(block < 0):
            continue
        for j in range(nt - 1):
            case = (
                (f[i, j] > 0) * 1
                + (f[i + 1, j] > 0) * 2
                + (f[i + 1, j + 1] > 0) * 4
                + (f[i, j + 1] > 0) * 8
            )
            for e0, e1 in _EDGES.get(case, ()):
                s0, th0 = _edge_point(e0, i, j, f, hs, ht)
                s1, th1 = _edge_point(e1, i, j, f, hs, ht)
                pts_s.append((s0, s1))
                pts_t.append((th0, th1))
    if not pts_s:
        raise LevelOutOfRange(f"level {t} produced no contour segments")

    seg_s = np.array(pts_s)
    seg_t = np.array(pts_t)
    z0, rho0 = grid.to_physical(seg_s[:, 0], seg_t[:, 0])
    z1, rho1 = grid.to_physical(seg_s[:, 1], seg_t[:, 1])
    seg_z = np.stack([z0, z1], axis=1)
    seg_rho = np.stack([rho0, rho1], axis=1)
    length = np.hypot(z1 - z0, rho1 - rho0)
    mid_s = 0.5 * (seg_s[:, 0] + seg_s[:, 1])
    mid_th = 0.5 * (seg_t[:, 0] + seg_t[:, 1])
    mid_rho = 0.5 * (rho0 + rho1)

    jets = [field.jet_at(s, th) for s, th in zip(mid_s, mid_th)]
    for jet in jets:
        if jet.grad_norm < tau_grad:
            raise CriticalPointOnLevel(
                f"|grad u| = {jet.grad_norm:.3e} on level {t}"
            )
    weight = length * sphere_measure(field.n - 2) * mid_rho ** (field.n - 2)
    return LevelSetCurve(
        t=t,
        n=field.n,
        seg_z=seg_z,
        seg_rho=seg_rho,
        mid_s=mid_s,
        mid_theta=mid_th,
        jets=jets,
        weight=weight,
    )


@dataclass
class FResult:
    t: float
    C1: float
    C2: float
    int_hk: float
    int_hk1: float
    F: float


def F_eval(field, t, spec: ProblemSpec) -> FResult:
    """Evaluate F(t) on an extracted level set of a solved field."""
    curve = extract_levelset(field, t, spec.tau_grad)
    rhs = EpsilonRHS(eps=field.eps, n=spec.n, cnk=field.cnk)
    hk = np.empty(curve.num_segments)
    hk1 = np.empty(curve.num_segments)
    gn = np.empty(curve.num_segments)
    for idx, jet in enumerate(curve.jets):
        sk_value = approx_rhs(float(np.linalg.norm(jet.x)), rhs)
        hk[idx], hk1[idx] = levelset_curvature(jet, spec.k, sk_value, spec.tau_grad)
        gn[idx] = jet.grad_norm
    int_hk = curve.integrate(hk * gn**spec.a)
    int_hk1 = curve.integrate(hk1 * gn ** (spec.a + 1))
    c1, c2 = weights(t, spec)
    return FResult(
        t=t,
        C1=float(c1),
        C2=float(c2),
        int_hk=int_hk,
        int_hk1=int_hk1,
        F=float(c1) * int_hk + float(c2) * int_hk1,
    )


def boundary_integrals(field, body: RevolutionBody, spec: ProblemSpec):
    """The two surface integrals of F at t = -1, on the boundary itself.

    Curvatures come from the body geometry; |grad u| is the one-sided
    normal derivative of the field (u is constant on the boundary).
    """
    s = curvature_samples(body)
    gn = field.boundary_gradient(body.theta)
    int_hk = s.integrate(s.h_k(spec.k) * gn**spec.a)
    int_hk1 = s.integrate(s.h_k(spec.k - 1) * gn ** (spec.a + 1))
    return int_hk, int_hk1


def F_boundary(field, body: RevolutionBody, spec: ProblemSpec) -> FResult:
    int_hk, int_hk1 = boundary_integrals(field, body, spec)
    c1, c2 = weights(-1.0, spec)
    return FResult(
        t=-1.0,
        C1=float(c1),
        C2=float(c2),
        int_hk=int_hk,
        int_hk1=int_hk1,
        F=float(c1) * int_hk + float(c2) * int_hk1,
    )


@dataclass
class MonotonicityReport:
    t: np.ndarray
    F: np.ndarray
    upward_violation: float
    limit_value: float
    limit_gap_min: float
    spread: float
    tol_mono: float

    @property
    def non_increasing(self):
        return self.upward_violation <= self.tol_mono

    @property
    def limit_respected(self):
        return self.limit_gap_min >= -self.tol_mono

    @property
    def constant_flag(self):
        """Ball candidate: F is flat to tolerance."""
        return self.spread <= self.tol_mono


def monotonicity_audit(field, spec: ProblemSpec, tol_mono, t_grid=None):
    """Evaluate F over the level grid and check the monotone contract.

    tol_mono should come from a Richardson error estimate on F itself
    (two grid levels); the continuum monotonicity is exact but discrete F
    carries O(h^2) + O(eps^2) bias.
    """
    ts = np.asarray(t_grid if t_grid is not None else spec.t_grid, dtype=float)
    Fs = np.array([F_eval(field, t, spec).F for t in ts])
    diffs = np.diff(Fs)
    upward = float(max(np.max(diffs, initial=0.0), 0.0))
    limit = limit_bound(spec, field.rho_hat)
    return MonotonicityReport(
        t=ts,
        F=Fs,
        upward_violation=upward,
        limit_value=limit,
        limit_gap_min=float(np.min(Fs - limit)),
        spread=float(np.max(Fs) - np.min(Fs)),
        tol_mono=float(tol_mono),
    )
