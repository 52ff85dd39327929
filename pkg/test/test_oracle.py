import numpy as np
import pytest

import symivp


def linear9():
    return symivp.scalar_entry('linear9')


def test_config():
    with pytest.raises(ValueError):
        symivp.OracleConfig(h=0.0)
    with pytest.raises(ValueError):
        symivp.OracleConfig(method='euler')


def test_cos3t():
    traj = symivp.rk4_solve(linear9(), [1.0], [0.0], 0.0, 1.0)
    assert traj.times[-1] == 1.0
    assert len(traj) >= 10001
    assert abs(traj.y[-1, 0] - np.cos(3.0)) <= 1e-10
    assert abs(traj.yp[-1, 0] + 3 * np.sin(3.0)) <= 1e-9


def test_backwards():
    traj = symivp.rk4_solve(linear9(), [1.0], [0.0], 2.0, -1.0)
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[0] == 1.0
    assert traj.times[-1] == 2.0
    assert abs(traj.y[0, 0] - np.cos(3.0)) <= 1e-10


def test_free_motion():
    f = symivp.VectorField('zero', 2, lambda y: np.zeros_like(y))
    traj = symivp.rk4_solve(f, [1.0, -1.0], [0.5, 2.0], 0.0, 3.0,
                            symivp.OracleConfig(h=0.01))
    expected = np.array([1.0, -1.0]) + traj.tau[:, None] * [0.5, 2.0]
    assert np.allclose(traj.y, expected, atol=1e-12, rtol=0)
    assert np.all(traj.yp == [0.5, 2.0])


def test_fourth_order():
    errors = []
    for h in (1e-2, 5e-3):
        traj = symivp.rk4_solve(linear9(), [1.0], [0.0], 0.0, 1.0,
                                symivp.OracleConfig(h=h))
        errors.append(abs(traj.y[-1, 0] - np.cos(3.0)))
    assert errors[0] / errors[1] >= 14


def test_time_reversal():
    f = symivp.scalar_entry('pendulum')
    forward = symivp.rk4_solve(f, [0.3], [0.4], 0.0, 2.0)
    back = symivp.rk4_solve(f, forward.y[-1], forward.yp[-1], 2.0, -2.0)
    assert np.allclose(back.y[0], [0.3], atol=1e-9, rtol=0)
    assert np.allclose(back.yp[0], [0.4], atol=1e-9, rtol=0)


def test_energy_drift():
    f = symivp.scalar_entry('pendulum')
    traj = symivp.rk4_solve(f, [1.0], [0.0], 0.0, 5.0)
    assert symivp.energy_drift(traj, f) <= 1e-8


def test_zero_span():
    traj = symivp.rk4_solve(linear9(), [1.0], [0.0], 0.0, 0.0)
    assert len(traj) == 1
    assert traj.y[0, 0] == 1.0


def test_shape_mismatch():
    with pytest.raises(ValueError):
        symivp.rk4_solve(linear9(), [1.0, 2.0], [0.0, 0.0], 0.0, 1.0)


def test_two_body_infall():
    f = symivp.nbody_field([1.0, 1.0], guard_eps=1e-2)
    traj = symivp.rk4_solve(f, [-0.5, 0, 0, 0.5, 0, 0], np.zeros(6), 0.0, 1.0)
    assert traj.annotations
    assert 'guard' in traj.annotations[0]
    assert not traj.complete
    separation = np.linalg.norm(traj.y[:, 3:] - traj.y[:, :3], axis=1)
    assert np.all(np.diff(separation) < 0)
    # the last state is the one whose evaluation tripped the guard
    assert np.all(separation[:-1] >= 1e-2)
    # collision from rest at unit separation happens at t = pi/4
    assert traj.times[-1] < np.pi / 4
    assert traj.times[-1] > np.pi / 4 - 1e-2
    momentum = traj.yp[:, :3] + traj.yp[:, 3:]
    assert np.max(np.abs(momentum)) <= 1e-10 * np.max(np.abs(traj.yp))


def test_compare():
    f = symivp.scalar_entry('pendulum')
    a = symivp.rk4_solve(f, [0.5], [0.0], 0.0, 1.0,
                         symivp.OracleConfig(h=1e-3))
    assert symivp.compare(a, a) == (0.0, 0.0)
    b = symivp.rk4_solve(f, [0.5], [0.0], 0.0, 1.0)
    pos, vel = symivp.compare(a, b)
    assert pos <= 1e-8
    assert vel <= 1e-8
    c = symivp.rk4_solve(f, [0.5], [0.0], 2.0, 1.0)
    with pytest.raises(ValueError):
        symivp.compare(a, c)


def test_picard_matches_oracle():
    f = linear9()
    traj, report = symivp.solve_ivp(f, symivp.DomainTube([1.0], b=1.0))
    for span in (report.L_used, -report.L_used):
        ref = symivp.rk4_solve(f, [1.0], [0.0], 0.0, span)
        assert symivp.compare(traj, ref)[0] <= 1e-7
