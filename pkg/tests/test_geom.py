"""Geometry kernel: saturation, rotation maps, error vectors."""

import math

import numpy as np
import pytest

from tiltsim.geom import (
    cross,
    exp_so3,
    integrate_rotation,
    norm,
    orthonormalize,
    rotation_error_vector,
    rotvec_rate,
    sat_vec,
    skew,
    unit,
    unit_vector,
    vee,
)


def random_rotation(rng):
    return exp_so3(rng.uniform(-math.pi, math.pi) * unit(rng.normal(size=3)))


class TestSatVec:
    def test_inside_is_identity(self):
        assert np.array_equal(sat_vec(np.array((0.3, 0.0)), 0.5), (0.3, 0.0))

    def test_outside_scales_onto_ball(self):
        np.testing.assert_allclose(
            sat_vec(np.array((0.6, 0.8)), 0.5), (0.3, 0.4), rtol=0, atol=1e-15
        )

    def test_zero_input(self):
        assert np.array_equal(sat_vec(np.zeros(3), 1.0), np.zeros(3))

    def test_idempotent_and_norm_bounded(self, rng):
        for _ in range(200):
            x = rng.normal(scale=3.0, size=rng.integers(1, 5))
            bound = rng.uniform(0.1, 2.0)
            s = sat_vec(x, bound)
            assert np.array_equal(sat_vec(s, bound), s)
            assert norm3(s) <= min(norm3(x), bound) + 1e-15

    def test_rejects_bad_bound(self):
        with pytest.raises(ValueError):
            sat_vec(np.ones(3), 0.0)


def norm3(v):
    return math.sqrt(float(np.dot(v, v)))


class TestExpSo3:
    def test_zero_gives_identity(self):
        np.testing.assert_array_equal(exp_so3(np.zeros(3)), np.identity(3))

    def test_quarter_yaw_closed_form(self):
        r = exp_so3(np.array((0.0, 0.0, math.pi / 2)))
        np.testing.assert_allclose(
            r, ((0, -1, 0), (1, 0, 0), (0, 0, 1)), atol=1e-15
        )

    def test_stays_orthonormal(self, rng):
        for _ in range(300):
            r = exp_so3(rng.normal(scale=2.0, size=3))
            assert np.abs(r.T @ r - np.identity(3)).max() < 1e-9
            assert abs(np.linalg.det(r) - 1.0) < 1e-9

    def test_series_branch_continuous(self):
        # the small-angle series and the closed form must agree at the switch
        w = unit(np.array((1.0, -2.0, 0.5)))
        for th in (9.9e-5, 1.01e-4):
            a = exp_so3(th * w)
            wx = skew(th * w)
            brute = np.identity(3) + wx + wx @ wx / 2 + wx @ wx @ wx / 6
            assert np.abs(a - brute).max() < 1e-12


class TestRotationErrorVector:
    def test_identity(self):
        assert np.array_equal(rotation_error_vector(np.identity(3)), np.zeros(3))

    def test_quarter_yaw(self):
        rv = rotation_error_vector(exp_so3(np.array((0.0, 0.0, math.pi / 2))))
        np.testing.assert_allclose(rv, (0, 0, math.pi / 2), atol=1e-12)

    def test_round_trip_random(self, rng):
        for _ in range(300):
            r = random_rotation(rng)
            rv = rotation_error_vector(r)
            assert np.abs(exp_so3(rv) - r).max() < 1e-10

    def test_round_trip_near_pi(self, rng):
        # trace-based angle extraction loses ~sqrt(eps) next to pi
        for _ in range(100):
            axis = unit(rng.normal(size=3))
            th = math.pi - 10 ** rng.uniform(-12, -3)
            r = exp_so3(th * axis)
            rv = rotation_error_vector(r)
            assert np.abs(exp_so3(rv) - r).max() < 1e-7

    def test_exactly_pi(self):
        for axis in (np.array((1.0, 0, 0)), unit(np.array((1.0, 1.0, 1.0)))):
            r = exp_so3(math.pi * axis)
            rv = rotation_error_vector(r)
            assert abs(norm(rv) - math.pi) < 1e-7
            assert np.abs(exp_so3(rv) - r).max() < 1e-7


class TestIntegrateRotation:
    def test_zero_rate_unchanged(self, rng):
        r = random_rotation(rng)
        np.testing.assert_allclose(integrate_rotation(r, np.zeros(3), 1.0), r, atol=1e-15)

    def test_closed_form_quarter_yaw(self):
        r = integrate_rotation(np.identity(3), np.array((0.0, 0.0, math.pi / 2)), 1.0)
        np.testing.assert_allclose(r, ((0, -1, 0), (1, 0, 0), (0, 0, 1)), atol=1e-15)

    def test_orthonormality_over_many_steps(self, rng):
        # round-off must not accumulate no matter how many steps compose
        r = random_rotation(rng)
        w = np.array((0.7, -1.3, 0.4))
        for _ in range(100_000):
            r = integrate_rotation(r, w, 1e-3)
        assert np.abs(r.T @ r - np.identity(3)).max() < 1e-12

    def test_composition_matches_single_step(self, rng):
        # constant rate: n small steps equal one big step exactly (group property)
        w = rng.normal(size=3)
        r1 = integrate_rotation(np.identity(3), w, 0.5)
        r2 = np.identity(3)
        for _ in range(500):
            r2 = integrate_rotation(r2, w, 1e-3)
        assert np.abs(r1 - r2).max() < 1e-12


class TestRotvecRate:
    def test_zero_sigma_is_omega(self, rng):
        w = rng.normal(size=3)
        np.testing.assert_array_equal(rotvec_rate(np.zeros(3), w), w)

    def test_reproduces_exponential_flow(self):
        # integrating dsigma/dt from sigma0 must land where the group says:
        # exp(sigma(T)) = exp(sigma0) exp(w T) for constant w
        sigma = np.array((0.03, -0.02, 0.04))
        w = np.array((0.6, 0.2, -0.5))
        T, nsub = 0.05, 50
        h = T / nsub
        target = exp_so3(sigma) @ exp_so3(w * T)
        for _ in range(nsub):
            k1 = rotvec_rate(sigma, w)
            k2 = rotvec_rate(sigma + 0.5 * h * k1, w)
            k3 = rotvec_rate(sigma + 0.5 * h * k2, w)
            k4 = rotvec_rate(sigma + h * k3, w)
            sigma = sigma + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        assert np.abs(exp_so3(sigma) - target).max() < 1e-8


class TestSkewVeeCross:
    def test_consistency(self, rng):
        for _ in range(100):
            w, v = rng.normal(size=3), rng.normal(size=3)
            np.testing.assert_allclose(skew(w) @ v, cross(w, v), atol=1e-12)
            np.testing.assert_allclose(cross(w, v), np.cross(w, v), atol=1e-12)
            np.testing.assert_array_equal(vee(skew(w)), w)


class TestUnitVectors:
    def test_unit_normalizes(self):
        np.testing.assert_allclose(unit(np.array((3.0, 0, 4.0))), (0.6, 0, 0.8))

    def test_unit_rejects_zero(self):
        with pytest.raises(ValueError):
            unit(np.zeros(3))

    def test_unit_vector_renormalizes_small_drift(self):
        v = np.array((1.0 + 5e-7, 0.0, 0.0))
        out = unit_vector(v)
        assert abs(norm(out) - 1.0) < 1e-15

    def test_unit_vector_rejects_large_drift(self):
        with pytest.raises(ValueError):
            unit_vector(np.array((1.1, 0.0, 0.0)))
        with pytest.raises(ValueError):
            unit_vector(np.ones(4))


class TestOrthonormalize:
    def test_fixes_small_drift(self, rng):
        r = random_rotation(rng)
        dirty = r + rng.normal(scale=1e-8, size=(3, 3))
        clean = orthonormalize(dirty)
        assert np.abs(clean.T @ clean - np.identity(3)).max() < 1e-14
