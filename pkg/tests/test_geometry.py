import numpy as np
import pytest

from hovi.core import ConstrainedSystem, WindowFunction
from hovi.delsolve import StepState, step
from hovi.errors import DimensionError
from hovi.geometry import (
    ExtendedPoint,
    GroupAction,
    check_momentum_conservation,
    check_symplecticity,
    legendre_minus,
    legendre_plus,
    momentum,
    omega_matrix,
    rotation_action,
    theta_minus,
    theta_plus,
    translation_action,
)
from hovi.applications import sphere_spline_system

from util_systems import free_particle, great_circle_state, second_difference_system


def zero_system(k=2, n=1):
    return ConstrainedSystem(k, n, WindowFunction(k, n, lambda w: 0.0), ())


def test_theta_free_particle_hand_values():
    system = free_particle(h=1.0)
    point = ExtendedPoint(np.array([[0.0], [1.0]]), np.zeros((1, 0)))
    np.testing.assert_allclose(theta_minus(system, point), [1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(theta_plus(system, point), [0.0, 1.0], atol=1e-12)


def test_theta_zero_lagrangian():
    system = zero_system()
    point = ExtendedPoint(np.arange(4.0)[:, None], np.zeros((2, 0)))
    np.testing.assert_allclose(theta_minus(system, point), 0.0)
    np.testing.assert_allclose(theta_plus(system, point), 0.0)


def test_theta_constant_sphere_window_vanishes():
    system = sphere_spline_system(1.0, 0.2)
    p = np.array([1.0, 0.0, 0.0])
    point = ExtendedPoint(np.tile(p, (4, 1)), np.zeros((2, 1)))
    np.testing.assert_allclose(theta_minus(system, point), 0.0, atol=1e-12)
    np.testing.assert_allclose(theta_plus(system, point), 0.0, atol=1e-12)


def test_theta_difference_is_window_sum_differential():
    # theta_plus - theta_minus equals d(sum of the first k augmented
    # window values) in the configuration coordinates
    system = sphere_spline_system(1.0, 0.3)
    rng = np.random.default_rng(13)
    configs = rng.normal(size=(4, 3))
    lams = rng.normal(size=(2, 1))
    point = ExtendedPoint(configs, lams)
    diff = theta_plus(system, point) - theta_minus(system, point)

    def window_sum(flat):
        c = flat.reshape(4, 3)
        total = 0.0
        for i in range(2):
            w = c[i : i + 3]
            total += system.lagrangian.value(w)
            total += lams[i, 0] * system.constraints[0].value(w)
        return total

    z0 = configs.ravel()
    fd = np.empty(z0.size)
    for a in range(z0.size):
        h = 1e-6 * max(1.0, abs(z0[a]))
        up, dn = z0.copy(), z0.copy()
        up[a] += h
        dn[a] -= h
        fd[a] = (window_sum(up) - window_sum(dn)) / (2.0 * h)
    np.testing.assert_allclose(diff, fd, atol=1e-6)


def test_omega_free_particle():
    h = 2.0
    system = free_particle(h=h)
    point = ExtendedPoint(np.array([[0.3], [1.7]]), np.zeros((1, 0)))
    expected = np.array([[0.0, 1.0 / h], [-1.0 / h, 0.0]])
    np.testing.assert_allclose(omega_matrix(system, point), expected, atol=1e-6)


def test_omega_zero_lagrangian_and_antisymmetry():
    system = zero_system()
    point = ExtendedPoint(np.arange(4.0)[:, None], np.zeros((2, 0)))
    np.testing.assert_allclose(omega_matrix(system, point), 0.0, atol=1e-12)

    rng = np.random.default_rng(21)
    sd = second_difference_system(h=0.8)
    point = ExtendedPoint(rng.normal(size=(4, 1)), np.zeros((2, 0)))
    om = omega_matrix(sd, point)
    np.testing.assert_array_equal(om + om.T, np.zeros_like(om))


def test_omega_from_minus_and_plus_agree():
    rng = np.random.default_rng(2)
    sd = second_difference_system(h=0.8)
    point = ExtendedPoint(rng.normal(size=(4, 1)), np.zeros((2, 0)))
    om_minus = omega_matrix(sd, point, which="minus")
    om_plus = omega_matrix(sd, point, which="plus")
    np.testing.assert_allclose(om_minus, om_plus, atol=1e-5)


def test_legendre_transforms():
    system = free_particle(h=1.0)
    q0, p0 = legendre_minus(system, [0.0], [1.0])
    q1, p1 = legendre_plus(system, [0.0], [1.0])
    np.testing.assert_allclose(p0, [1.0], atol=1e-12)
    np.testing.assert_allclose(p1, [1.0], atol=1e-12)
    np.testing.assert_allclose(q0, [0.0])
    np.testing.assert_allclose(q1, [1.0])

    zs = ConstrainedSystem(1, 1, WindowFunction(1, 1, lambda w: 0.0), ())
    _, pz = legendre_minus(zs, [0.4], [0.9])
    np.testing.assert_allclose(pz, [0.0], atol=1e-9)

    with pytest.raises(DimensionError):
        legendre_minus(second_difference_system(), [0.0], [1.0])


def test_legendre_momentum_matching_on_solution():
    # along a DEL solution, the plus momentum of one window equals the
    # minus momentum of the next
    system = free_particle(h=0.5)
    path = (0.3 + 1.2 * np.arange(5.0))[:, None]
    for j in range(1, 4):
        _, p_plus = legendre_plus(system, path[j - 1], path[j])
        _, p_minus = legendre_minus(system, path[j], path[j + 1])
        np.testing.assert_allclose(p_plus, p_minus, atol=1e-12)


def test_momentum_trivial_cases():
    system = sphere_spline_system(1.0, 0.2)
    p = np.array([0.0, 1.0, 0.0])
    point = ExtendedPoint(np.tile(p, (4, 1)), np.zeros((2, 1)))
    np.testing.assert_allclose(
        momentum(system, rotation_action(), point), 0.0, atol=1e-12
    )

    zs = zero_system(k=1, n=2)
    zp = ExtendedPoint(np.ones((2, 2)), np.zeros((1, 0)))
    np.testing.assert_allclose(
        momentum(zs, translation_action(2), zp), 0.0, atol=1e-12
    )
    with pytest.raises(DimensionError):
        momentum(zs, translation_action(2), zp, side="sideways")


def test_momentum_plus_equals_minus_for_invariant_system():
    system = sphere_spline_system(1.0, 0.1)
    state = great_circle_state(system, 1.0, 0.1)
    point = ExtendedPoint.from_state(state)
    jp = momentum(system, rotation_action(), point, side="plus")
    jm = momentum(system, rotation_action(), point, side="minus")
    np.testing.assert_allclose(jp, jm, atol=1e-8)


def test_momentum_conservation_translation():
    system = free_particle(h=1.0)
    state = StepState(np.array([[0.0], [0.7]]), np.zeros((1, 0)))
    traj = [state]
    for _ in range(3):
        nxt, _ = step(system, traj[-1])
        traj.append(nxt)
    drift = check_momentum_conservation(system, translation_action(1), traj)
    assert drift < 1e-12


def test_symplecticity_free_particle():
    system = free_particle(h=1.0)
    state = StepState(np.array([[0.0], [1.0]]), np.zeros((1, 0)))
    report = check_symplecticity(system, state)
    assert not report.restricted
    assert report.defect_norm < 1e-8


def test_group_action_shapes():
    act = rotation_action()
    assert act.dim == 3
    np.testing.assert_allclose(
        act.generators[2](np.array([1.0, 0.0, 0.0])), [0.0, 1.0, 0.0]
    )
    with pytest.raises(DimensionError):
        ExtendedPoint(np.zeros((3, 1)), np.zeros((1, 0)))
