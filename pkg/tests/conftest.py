"""Session-scoped solved fields shared across test modules.

Solves are the expensive part of the suite; each battery below is
computed once and reused by the solver, monotone, identities and
acceptance tests.
"""

import pytest

from hesslab.monotone import ProblemSpec
from hesslab.solver import solve_exterior
from hesslab.surfaces import RevolutionBody


@pytest.fixture(scope="session")
def sphere_k1_field():
    """Unit sphere, n=3, k=1, deep eps schedule for oracle comparisons."""
    body = RevolutionBody.sphere(1.0, n=3)
    spec = ProblemSpec(n=3, k=1, a=1.0)
    return solve_exterior(
        body, spec, N_s=256, N_theta=256, R_out=40.0,
        schedule=(0.5, 0.1, 0.02, 0.005),
    )


@pytest.fixture(scope="session")
def sphere_k2_field():
    """Unit sphere, n=5, k=2, default eps schedule."""
    body = RevolutionBody.sphere(1.0, n=5)
    spec = ProblemSpec(n=5, k=2, a=2.0)
    return solve_exterior(body, spec, N_s=256, N_theta=256)


@pytest.fixture(scope="session")
def prolate_field():
    """Prolate spheroid (1.5, 1), n=3, k=1."""
    body = RevolutionBody.spheroid(1.5, 1.0, n=3)
    spec = ProblemSpec(n=3, k=1, a=1.0)
    return solve_exterior(body, spec, N_s=256, R_out=40.0)


@pytest.fixture(scope="session")
def prolate_field_half():
    """Half-resolution companion to prolate_field for Richardson estimates."""
    body = RevolutionBody.spheroid(1.5, 1.0, n=3)
    spec = ProblemSpec(n=3, k=1, a=1.0)
    return solve_exterior(body, spec, N_s=128, R_out=40.0)


@pytest.fixture(scope="session")
def cosper_field():
    """Cosine-perturbed sphere r = 1 + 0.05 cos(2 theta), n=3, k=1."""
    body = RevolutionBody.cos_perturbed(n=3, amplitude=0.05, frequency=2)
    spec = ProblemSpec(n=3, k=1, a=1.0)
    return solve_exterior(body, spec, N_s=256, R_out=40.0)


@pytest.fixture(scope="session")
def cosper_field_half():
    """Half-resolution companion to cosper_field for Richardson estimates."""
    body = RevolutionBody.cos_perturbed(n=3, amplitude=0.05, frequency=2)
    spec = ProblemSpec(n=3, k=1, a=1.0)
    return solve_exterior(body, spec, N_s=128, R_out=40.0)
