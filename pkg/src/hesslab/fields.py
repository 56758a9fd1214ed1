"""Pointwise level-set geometry of scalar fields.

Converts second-order jets of u into level-set curvatures H_k, H_{k-1} and
evaluates the regularized right-hand side of the approximating equation.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGradient
from .symfunc import ConeSpec, gamma_cone_contains, sigma_grad, symmetrize

__all__ = [
    "AdmissibilityReport",
    "EpsilonRHS",
    "Jet2",
    "admissibility_audit",
    "approx_rhs",
    "levelset_curvature",
]

#: Default gradient threshold below which curvature formulas refuse to run.
TAU_GRAD = 1e-8


@dataclass(frozen=True)
class Jet2:
    """Second-order jet of u at a point: value, gradient, symmetric Hessian."""

    x: np.ndarray
    u: float
    g: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))
        object.__setattr__(self, "H", symmetrize(self.H))

    @property
    def grad_norm(self):
        return float(np.linalg.norm(self.g))

    @property
    def n(self):
        return self.g.size


@dataclass(frozen=True)
class EpsilonRHS:
    """Regularized right-hand side c * eps^2 (|x|^2 + eps^2)^(-n/2 - 1).

    The scale constant is configurable and defaults to 1; it only sets the
    size of the eps-perturbation.
    """

    eps: float
    n: int
    cnk: float = 1.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.cnk <= 0:
            raise ValueError("cnk must be > 0")


def approx_rhs(x, rhs: EpsilonRHS):
    """Evaluate the regularized right-hand side at position(s) x.

    A 1-d input of length n is a single position vector; a scalar or any
    other shape is interpreted as |x| values.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and x.size == rhs.n:
        r2 = float(x @ x)
    elif x.ndim == 2:
        r2 = np.sum(x * x, axis=-1)
    else:
        r2 = x * x
    val = rhs.cnk * rhs.eps**2 * (r2 + rhs.eps**2) ** (-rhs.n / 2.0 - 1.0)
    return float(val) if np.ndim(val) == 0 else val


def levelset_curvature(jet: Jet2, k, sk_value, tau_grad=TAU_GRAD):
    """Level-set curvatures (H_k, H_{k-1}) at a non-critical point.

    H_{k-1} = S_k^{ij} u_i u_j / |grad u|^{k+1}; H_k is recovered from
    S_k(Hessian) = H_k |grad u|^k + S_k^{ij} u_i u_l u_lj / |grad u|^2
    with S_k supplied by the equation: pass sk_value = 0 for the
    homogeneous problem or f^eps(x) for the regularized one.
    """
    gnorm = jet.grad_norm
    if gnorm < tau_grad:
        raise DegenerateGradient(
            f"|grad u| = {gnorm:.3e} < {tau_grad:.1e}: critical point"
        )
    skij = sigma_grad(jet.H, k)
    g = jet.g
    h_km1 = float(g @ skij @ g) / gnorm ** (k + 1)
    correction = float(g @ skij @ (jet.H @ g)) / gnorm**2
    h_k = (sk_value - correction) / gnorm**k
    return h_k, h_km1


@dataclass
class AdmissibilityReport:
    """Outcome of a k-admissibility audit over a list of jets."""

    k: int
    margins: np.ndarray
    worst_margin: float
    worst_index: int
    failing: list = field(default_factory=list)
    tol: float = 1e-10

    @property
    def all_admissible(self):
        return not self.failing


def admissibility_audit(jets, k, tol=1e-10):
    """Test each jet's Hessian eigenvalues against the closure of Gamma_k.

    Never raises; failures are recorded in the report (margin < -tol).
    """
    margins = np.empty(len(jets))
    failing = []
    for idx, jet in enumerate(jets):
        lam = np.linalg.eigvalsh(jet.H)
        margins[idx] = gamma_cone_contains(lam, ConeSpec(lam.size, k)).margin
        if margins[idx] < -tol:
            failing.append(idx)
    worst = int(np.argmin(margins)) if len(jets) else 0
    return AdmissibilityReport(
        k=k,
        margins=margins,
        worst_margin=float(margins[worst]) if len(jets) else np.inf,
        worst_index=worst,
        failing=failing,
        tol=tol,
    )
