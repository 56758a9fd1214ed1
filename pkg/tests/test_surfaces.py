import numpy as np
import pytest
from math import pi

from hesslab.errors import NotConvex
from hesslab.surfaces import (
    RevolutionBody,
    af_gap,
    curvature_samples,
    minkowski_residual,
    qiu_xia_gap,
    quermass,
    sphere_measure,
    volume,
)

S4 = sphere_measure(4)  # 8 pi^2 / 3


class TestSphereMeasure:
    def test_known_values(self):
        assert sphere_measure(1) == pytest.approx(2 * pi)
        assert sphere_measure(2) == pytest.approx(4 * pi)
        assert sphere_measure(4) == pytest.approx(8 * pi**2 / 3)


class TestCurvatureSamples:
    def test_sphere_constant_curvature(self):
        s = curvature_samples(RevolutionBody.sphere(2.0, 3))
        assert np.max(np.abs(s.kappa_m - 0.5)) <= 1e-10
        assert np.max(np.abs(s.kappa_r - 0.5)) <= 1e-10

    def test_spheroid_pole_curvature(self):
        # pole on the long axis of a prolate (1.5, 1) spheroid: a/b^2
        s = curvature_samples(RevolutionBody.spheroid(1.5, 1.0, 3))
        assert s.kappa_m[0] == pytest.approx(1.5, rel=1e-12)
        assert s.kappa_r[0] == pytest.approx(1.5, rel=1e-12)
        assert s.kappa_m[-1] == pytest.approx(1.5, rel=1e-12)

    def test_unit_sphere_h2_n5(self):
        s = curvature_samples(RevolutionBody.sphere(1.0, 5))
        h2 = s.h_k(2)
        assert np.max(np.abs(h2 - 6.0)) <= 1e-10

    def test_star_shape_metric_positive(self):
        s = curvature_samples(RevolutionBody.cos_perturbed(3, 0.2))
        assert np.all(s.x_dot_nu > 0)


class TestQuermass:
    def test_sphere_area_n3(self):
        for R in (1.0, 2.0):
            assert quermass(RevolutionBody.sphere(R, 3), 0) == pytest.approx(
                4 * pi * R**2, rel=1e-9
            )

    def test_sphere_h1_n5(self):
        assert quermass(RevolutionBody.sphere(1.0, 5), 1) == pytest.approx(
            4 * S4, rel=1e-9
        )

    def test_sphere_h1_n3(self):
        assert quermass(RevolutionBody.sphere(2.0, 3), 1) == pytest.approx(
            16 * pi, rel=1e-9
        )

    def test_sphere_general_closed_form(self):
        from math import comb

        for n, k, R in [(3, 1, 1.5), (5, 2, 0.7), (7, 3, 2.0), (4, 2, 1.0)]:
            want = comb(n - 1, k) * R ** (-k) * sphere_measure(n - 1) * R ** (n - 1)
            got = quermass(RevolutionBody.sphere(R, n), k)
            assert got == pytest.approx(want, rel=1e-9)


class TestMinkowski:
    def test_sphere_exact(self):
        assert abs(minkowski_residual(RevolutionBody.sphere(1.0, 3), 1)) <= 1e-10

    def test_sphere_n5_k2(self):
        assert abs(minkowski_residual(RevolutionBody.sphere(1.0, 5), 2)) <= 1e-9

    def test_spheroid_at_2048_samples(self):
        body = RevolutionBody.spheroid(1.5, 1.0, 3, samples=2048)
        assert abs(minkowski_residual(body, 1)) <= 1e-8

    def test_all_bodies_all_orders(self):
        bodies = [
            RevolutionBody.sphere(1.0, 4, samples=2048),
            RevolutionBody.spheroid(1.5, 1.0, 5, samples=2048),
            RevolutionBody.cos_perturbed(5, 0.2, samples=2048),
        ]
        for body in bodies:
            scale = quermass(body, 0)
            for k in range(1, body.n):
                assert abs(minkowski_residual(body, k)) <= 1e-8 * max(scale, 1.0)

    def test_convergence_order(self):
        res = []
        for samples in (128, 256, 512):
            body = RevolutionBody.cos_perturbed(3, 0.2, samples=samples)
            res.append(abs(minkowski_residual(body, 1)))
        order = np.log2(res[0] / res[1])
        assert order >= 2.0
        order = np.log2(res[1] / res[2])
        assert order >= 2.0


class TestVolume:
    def test_spheres(self):
        assert volume(RevolutionBody.sphere(1.0, 3)) == pytest.approx(4 * pi / 3)
        assert volume(RevolutionBody.sphere(2.0, 3)) == pytest.approx(32 * pi / 3)

    def test_prolate_spheroid(self):
        body = RevolutionBody.spheroid(1.5, 1.0, 3)
        assert volume(body) == pytest.approx(2 * pi, rel=1e-9)


class TestInequalityGaps:
    def test_af_zero_on_spheres(self):
        for n, k, R in [(5, 2, 1.0), (5, 2, 2.0), (7, 3, 1.0), (6, 2, 0.5)]:
            body = RevolutionBody.sphere(R, n)
            scale = quermass(body, k - 1)
            assert abs(af_gap(body, k)) <= 1e-9 * scale**2

    def test_af_sphere_n5_arithmetic(self):
        # (3)(1)(4|S4|)^2 - (4)(2)(6|S4|)(|S4|) = 0
        assert af_gap(RevolutionBody.sphere(1.0, 5), 2) == pytest.approx(
            0.0, abs=1e-8
        )

    def test_af_positive_on_convex_spheroid(self):
        body = RevolutionBody.spheroid(1.5, 1.0, 5, samples=1024)
        assert af_gap(body, 2) >= 0.0

    def test_af_convex_battery(self):
        for a, b in [(1.2, 1.0), (1.0, 1.3), (2.0, 1.5)]:
            body = RevolutionBody.spheroid(a, b, 6, samples=512)
            scale = quermass(body, 1)
            assert af_gap(body, 2) >= -1e-9 * scale**2

    def test_qiu_xia_zero_on_spheres(self):
        for R in (0.5, 1.0, 3.0):
            body = RevolutionBody.sphere(R, 3)
            assert abs(qiu_xia_gap(body)) <= 1e-9 * (4 * pi * R**2) ** 2

    def test_qiu_xia_sphere_arithmetic(self):
        # (2/3)(4 pi)^2 - (4 pi / 3)(8 pi) = 0
        assert qiu_xia_gap(RevolutionBody.sphere(1.0, 3)) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_qiu_xia_strict_on_spheroid(self):
        assert qiu_xia_gap(RevolutionBody.spheroid(1.5, 1.0, 3, samples=1024)) > 1e-3

    def test_nonconvex_rejected(self):
        # boundary-flat at the equator: kappa_m = 0 there
        body = RevolutionBody.cos_perturbed(3, 0.2)
        with pytest.raises(NotConvex):
            af_gap(body, 2)
        with pytest.raises(NotConvex):
            qiu_xia_gap(body)


class TestProfileIO:
    def test_roundtrip(self, tmp_path):
        body = RevolutionBody.spheroid(1.5, 1.0, 3, samples=256)
        path = tmp_path / "prolate.profile"
        body.save_profile(path)
        loaded = RevolutionBody.load_profile(path)
        assert loaded.n == 3
        assert np.allclose(loaded.gamma, body.gamma, rtol=1e-12)
        # spline derivatives track the analytic ones closely away from noise
        assert np.max(np.abs(loaded.dgamma - body.dgamma)) <= 1e-5

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "junk.profile"
        path.write_text("# not a profile\n0 1\n")
        with pytest.raises(ValueError):
            RevolutionBody.load_profile(path)
