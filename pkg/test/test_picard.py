import numpy as np
import pytest

import symivp
from symivp.picard import seed_trajectory, velocity_carried_back


def zero_field(n=1):
    return symivp.VectorField('zero', n, lambda y: np.zeros_like(y))


def constant_field(c):
    return symivp.VectorField('constant', 1, lambda y: np.full_like(y, c))


def linear9():
    return symivp.scalar_entry('linear9')


def test_config_validation():
    with pytest.raises(ValueError):
        symivp.PicardConfig(grid_points_per_half=4)
    with pytest.raises(ValueError):
        symivp.PicardConfig(max_iterations=0)
    with pytest.raises(ValueError):
        symivp.PicardConfig(stop_tol=0)
    with pytest.raises(ValueError):
        symivp.PicardConfig(L_cap=-1.0)
    with pytest.raises(ValueError):
        symivp.PicardConfig(sublinear=(1.0,))
    cfg = symivp.PicardConfig().replace(grid_points_per_half=64)
    assert cfg.grid_points_per_half == 64
    assert cfg.max_iterations == 40
    with pytest.raises(ValueError):
        cfg.replace(grid_size=3)


def test_existence_interval_examples():
    assert symivp.existence_interval(2.0, 1.0) == 2.0
    assert np.isclose(symivp.existence_interval(1.0, 18.9), 0.3253, atol=1e-3)
    assert symivp.existence_interval(1.0, 0.0) == np.inf
    with pytest.raises(ValueError):
        symivp.existence_interval(0.0, 1.0)
    with pytest.raises(ValueError):
        symivp.existence_interval(1.0, -1.0)


def test_estimate_bound_M():
    cfg = symivp.PicardConfig()
    tube = symivp.DomainTube([1.0], b=1.0)
    M = symivp.estimate_bound_M(linear9(), tube, 0.0, cfg)
    assert np.isclose(M, 18.9, rtol=1e-12)

    pendulum = symivp.scalar_entry('pendulum')
    tube = symivp.DomainTube([np.pi / 6], b=2.0)
    assert symivp.estimate_bound_M(pendulum, tube, 0.0, cfg) <= 1.05
    M = symivp.estimate_bound_M(pendulum, tube, 0.0,
                                cfg.replace(sublinear=(0.0, 1.0)))
    assert M == 1.0

    assert symivp.estimate_bound_M(zero_field(), tube, 0.0, cfg) == 0.0
    assert symivp.estimate_bound_M(linear9(), tube, 0.0,
                                   cfg.replace(M_override=3.0)) == 3.0


def test_estimate_bound_M_deterministic():
    f = symivp.scalar_entry('exp_plus')
    tube = symivp.DomainTube([0.0], [1.0], b=0.5)
    cfg = symivp.PicardConfig(seed=7)
    assert (symivp.estimate_bound_M(f, tube, 0.4, cfg)
            == symivp.estimate_bound_M(f, tube, 0.4, cfg))


def test_estimate_lipschitz_K():
    cfg = symivp.PicardConfig()
    tube = symivp.DomainTube([1.0], b=1.0)
    assert np.isclose(symivp.estimate_lipschitz_K(linear9(), tube, 0.3, cfg),
                      9.45, rtol=1e-6)
    assert symivp.estimate_lipschitz_K(constant_field(2.0), tube, 0.3,
                                       cfg) == 0.0
    duffing = symivp.scalar_entry('duffing')
    tube = symivp.DomainTube([0.0], b=2.0)
    assert np.isclose(symivp.estimate_lipschitz_K(duffing, tube, 0.3, cfg),
                      13.65, rtol=1e-6)
    # the elastic string pins its constant
    string = symivp.scalar_entry('elastic_string')
    assert symivp.estimate_lipschitz_K(string, tube, 0.3, cfg) == 1.0


def test_majorant_examples():
    assert np.isclose(symivp.majorant_bound(1, 1, 1, 1), 0.5, rtol=1e-14)
    assert np.isclose(symivp.majorant_bound(1, 1, 2, 1), 1 / 24, rtol=1e-14)
    psi = symivp.majorant_sum(2, 4, 1)
    assert np.isclose(psi, 1.38109, rtol=1e-5)
    partial = sum(symivp.majorant_bound(2, 4, j, 1) for j in range(1, 21))
    assert np.isclose(partial, psi, rtol=1e-14)


def test_majorant_zero_K():
    assert symivp.majorant_bound(3.0, 0.0, 1, 2.0) == 6.0
    assert symivp.majorant_bound(3.0, 0.0, 2, 2.0) == 0.0
    assert symivp.majorant_sum(3.0, 0.0, 2.0) == 6.0
    assert symivp.majorant_bound(0.0, 1.0, 3, 2.0) == 0.0
    with pytest.raises(ValueError):
        symivp.majorant_bound(1.0, 1.0, 0, 1.0)


def test_picard_step_examples():
    tube = symivp.DomainTube([2.0], [0.0], b=1.0)
    seed = seed_trajectory(zero_field(), tube, 0.5, 16)
    nxt = symivp.picard_step(seed, zero_field(), tube)
    assert np.array_equal(nxt.y, seed.y)

    f = constant_field(1.5)
    seed = seed_trajectory(f, tube, 0.5, 16)
    nxt = symivp.picard_step(seed, f, tube)
    assert np.allclose(nxt.y[:, 0], 2.0 + 0.75 * seed.tau**2, atol=1e-14,
                       rtol=0)
    assert np.allclose(nxt.yp[:, 0], 1.5 * seed.tau, atol=1e-14, rtol=0)


def test_picard_step_taylor_sums():
    f = linear9()
    tube = symivp.DomainTube([1.0], b=1.0)
    phi = seed_trajectory(f, tube, 0.3, 64)
    t = phi.tau
    phi = symivp.picard_step(phi, f, tube)
    assert np.allclose(phi.y[:, 0], 1 - 4.5 * t**2, atol=1e-13, rtol=0)
    phi = symivp.picard_step(phi, f, tube)
    assert np.allclose(phi.y[:, 0], 1 - 4.5 * t**2 + 27 * t**4 / 8,
                       atol=1e-8, rtol=0)


def test_picard_step_containment_error():
    f = linear9()
    tube = symivp.DomainTube([1.0], b=1.0)
    phi = seed_trajectory(f, tube, 2.0, 32)
    with pytest.raises(symivp.ContainmentError):
        symivp.picard_step(phi, f, tube)


def test_solve_cos3t():
    tube = symivp.DomainTube([1.0], b=1.0)
    traj, report = symivp.solve_ivp(linear9(), tube)
    assert np.isclose(report.L_used, np.sqrt(2 / 18.9), rtol=1e-12)
    assert np.isclose(report.M_used, 18.9, rtol=1e-12)
    assert report.converged
    assert report.iterations_run <= 40
    assert len(traj) == 1025
    err = np.max(np.abs(traj.y[:, 0] - np.cos(3 * traj.times)))
    assert err <= 1e-8
    assert np.allclose(traj.yp[:, 0], -3 * np.sin(3 * traj.times), atol=1e-7)
    assert report.final_integral_residual <= 1e-8
    assert report.final_ode_residual <= 1e-3
    assert symivp.integral_residual(traj, linear9()) <= 1e-8


def test_solve_zero_field():
    f = zero_field()
    tube = symivp.DomainTube([1.0], [0.5], b=1.0)
    traj, report = symivp.solve_ivp(f, tube,
                                    symivp.PicardConfig(L_cap=1.0))
    assert report.iterations_run == 1
    assert report.stop_reason == 'stop_tol'
    assert np.array_equal(traj.y[:, 0], 1.0 + 0.5 * traj.tau)
    assert symivp.integral_residual(traj, f) == 0
    # without a cap the interval is unbounded
    with pytest.raises(ValueError):
        symivp.solve_ivp(f, tube)


def test_perturbed_residual():
    f = linear9()
    traj, _ = symivp.solve_ivp(f, symivp.DomainTube([1.0], b=1.0),
                               symivp.PicardConfig(grid_points_per_half=128))
    bad = traj.copy()
    bad.y[200, 0] += 1e-3
    assert symivp.integral_residual(bad, f) >= 9e-4


def test_pendulum_against_oracle():
    f = symivp.scalar_entry('pendulum')
    tube = symivp.DomainTube([np.pi / 6], b=2.0)
    traj, report = symivp.solve_ivp(f, tube)
    assert report.L_used <= 2.0
    assert report.L_used >= np.sqrt(4 / 1.05) - 1e-12
    for span in (report.L_used, -report.L_used):
        ref = symivp.rk4_solve(f, [np.pi / 6], [0.0], 0.0, span)
        assert symivp.compare(traj, ref)[0] <= 1e-6

    cfg = symivp.PicardConfig(sublinear=(0.0, 1.0))
    traj, report = symivp.solve_ivp(f, tube, cfg)
    assert report.L_used == 2.0
    assert report.converged


def test_iterates_keep_parity():
    pendulum = symivp.scalar_entry('pendulum')
    tube = symivp.DomainTube([0.7], b=1.0)
    phi = seed_trajectory(pendulum, tube, 1.0, 64)
    for _ in range(10):
        phi = symivp.picard_step(phi, pendulum, tube)
        assert symivp.parity_defects(phi.positions()).even_defect <= 1e-13

    duffing = symivp.scalar_entry('duffing')
    tube = symivp.DomainTube([0.0], [1.0], b=1.0)
    phi = seed_trajectory(duffing, tube, 0.4, 64)
    for _ in range(10):
        phi = symivp.picard_step(phi, duffing, tube)
        assert symivp.parity_defects(phi.positions()).odd_defect <= 1e-13


@pytest.mark.parametrize("name,y0", [('linear9', 1.0), ('pendulum', 0.5),
                                     ('duffing', 0.5)])
def test_containment_and_majorant(name, y0):
    f = symivp.scalar_entry(name)
    tube = symivp.DomainTube([y0], b=1.0)
    _, report = symivp.solve_ivp(f, tube,
                                 symivp.PicardConfig(grid_points_per_half=128))
    assert max(report.containment) <= report.b_used
    assert report.majorant_violations() == []
    table = symivp.majorant_table(report)
    assert len(table) == report.iterations_run
    assert table.meta['PSI'] >= table['increment'][0]


def test_grid_refinement():
    errors = []
    for n in (8, 16):
        traj, _ = symivp.solve_ivp(
            linear9(), symivp.DomainTube([1.0], b=1.0),
            symivp.PicardConfig(grid_points_per_half=n))
        errors.append(np.max(np.abs(traj.y[:, 0] - np.cos(3 * traj.times))))
    assert errors[0] / errors[1] >= 8


def test_fixed_point():
    f = linear9()
    tube = symivp.DomainTube([1.0], b=1.0)
    traj, report = symivp.solve_ivp(f, tube)
    again = symivp.picard_step(traj, f, tube)
    change = np.max(np.abs(again.y - traj.y))
    assert change <= max(symivp.PicardConfig().stop_tol,
                         report.quadrature_floor)


def test_time_shift():
    f = symivp.scalar_entry('cubic_pendulum')
    cfg = symivp.PicardConfig(grid_points_per_half=64)
    a, ra = symivp.solve_ivp(f, symivp.DomainTube([0.4], [0.2], t0=0.0), cfg)
    b, rb = symivp.solve_ivp(f, symivp.DomainTube([0.4], [0.2], t0=5.0), cfg)
    assert np.array_equal(a.y, b.y)
    assert np.array_equal(a.yp, b.yp)
    assert np.array_equal(a.tau, b.tau)
    assert np.allclose(b.times, a.times + 5.0, atol=1e-14, rtol=0)
    assert ra.increments == rb.increments


def test_non_convergence():
    with pytest.warns(UserWarning, match="did not converge"):
        _, report = symivp.solve_ivp(
            linear9(), symivp.DomainTube([1.0], b=1.0),
            symivp.PicardConfig(grid_points_per_half=32, max_iterations=2))
    assert not report.converged
    assert report.stop_reason == 'max_iterations'
    assert report.iterations_run == 2


def test_override_too_small():
    cfg = symivp.PicardConfig(grid_points_per_half=32, M_override=0.1)
    with pytest.raises(symivp.ContainmentError):
        symivp.solve_ivp(linear9(), symivp.DomainTube([1.0], b=1.0), cfg)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        symivp.solve_ivp(linear9(), symivp.DomainTube([1.0, 2.0]))


def test_report_json():
    import json
    _, report = symivp.solve_ivp(
        linear9(), symivp.DomainTube([1.0], b=1.0),
        symivp.PicardConfig(grid_points_per_half=32))
    d = json.loads(report.to_json())
    for key in ['iterations', 'increments', 'majorant_terms', 'M', 'K', 'b',
                'L', 'integral_residual', 'ode_residual', 'converged',
                'stop_reason']:
        assert key in d
    assert d['iterations'] == len(d['increments'])
    assert d['converged'] is True


def test_resolve_interval_moving_seed():
    f = symivp.scalar_entry('duffing')
    tube = symivp.DomainTube([0.0], [1.0], b=1.0)
    cfg = symivp.PicardConfig()
    L, M = symivp.resolve_interval(f, tube, cfg)
    assert 0 < L <= symivp.existence_interval(1.0, M) * (1 + 1e-12)
    assert (L, M) == symivp.resolve_interval(f, tube, cfg)


def test_velocity_carried_back():
    f = linear9()
    tau = symivp.mirrored_grid(0.3, 200)
    t = 0.4 + tau
    y = np.cos(3 * t)
    yp = -3 * np.sin(3 * t)
    traj = symivp.Trajectory(0.4, tau, y, yp)
    for direction in (1, -1):
        carried = velocity_carried_back(traj, f, direction)
        assert np.allclose(carried, yp[200], atol=1e-10, rtol=0)
    # a velocity offset past t0 is reported as the jump
    kinked = symivp.Trajectory(0.4, tau, y, yp + 0.1 * (tau > 0))
    carried = velocity_carried_back(kinked, f, 1)
    assert np.isclose(carried[0] - yp[200], 0.1, atol=1e-10, rtol=0)
    carried = velocity_carried_back(kinked, f, -1)
    assert np.isclose(carried[0], yp[200], atol=1e-10, rtol=0)


def test_global_extend_zero_field():
    f = zero_field()
    tube = symivp.DomainTube([1.0], [0.5], b=1.0)
    traj = symivp.global_extend(f, tube, symivp.PicardConfig(), 3.0)
    assert np.isclose(traj.times[0], -3.0)
    assert np.isclose(traj.times[-1], 3.0)
    assert traj.stitches == []
    assert np.allclose(traj.y[:, 0], 1.0 + 0.5 * traj.times, atol=1e-14)
    assert np.all(np.diff(traj.times) > 0)


def test_global_extend_pendulum():
    f = symivp.scalar_entry('pendulum')
    tube = symivp.DomainTube([np.pi / 6], b=2.0)
    cfg = symivp.PicardConfig(grid_points_per_half=256)
    traj = symivp.global_extend(f, tube, cfg, 10.0)
    assert np.isclose(traj.times[0], -10.0)
    assert np.isclose(traj.times[-1], 10.0)
    assert np.all(np.diff(traj.times) > 0)
    assert not traj.annotations
    assert len(traj.stitches) >= 2
    for _, jump in traj.stitches:
        assert 0 < jump <= 1e-10
    oracle = symivp.OracleConfig(h=1e-3)
    for span in (10.0, -10.0):
        ref = symivp.rk4_solve(f, [np.pi / 6], [0.0], 0.0, span, oracle)
        assert symivp.compare(traj, ref)[0] <= 1e-5


def test_global_extend_halts_before_collision():
    f = symivp.nbody_field([1.0, 1.0])
    tube = symivp.DomainTube([-0.5, 0, 0, 0.5, 0, 0], b=0.25)
    cfg = symivp.PicardConfig(grid_points_per_half=64)
    with pytest.warns(UserWarning, match="partial"):
        traj = symivp.global_extend(f, tube, cfg, 2.0)
    assert traj.annotations
    assert any('guard' in note for note in traj.annotations)
    # from rest at unit separation the bodies collide at t = pi/4
    assert np.max(np.abs(traj.times)) < np.pi / 4
    separation = np.linalg.norm(traj.y[:, 3:] - traj.y[:, :3], axis=1)
    assert np.min(separation) > f.guard_eps
    assert np.all(np.diff(separation[len(traj) // 2:]) <= 0)
