import json
import os

import pytest
from astropy.table import Table

import symivp
from symivp.cli import main, build_parser, resolve_settings


def run(tmp_path, *argv):
    return main(list(argv) + ['--output-dir', str(tmp_path)])


def test_solve_even(tmp_path, capsys):
    assert run(tmp_path, 'solve-even', '--system', 'linear9', '--y0', '1',
               '--b', '1') == 0
    out = capsys.readouterr().out
    assert 'converged = true' in out
    csv = tmp_path / 'linear9_solve_even_trajectory.csv'
    with open(csv) as f:
        assert f.readline().strip() == 't,y1,yp1'
    table = Table.read(str(csv), format='ascii.csv')
    assert len(table) == 1025
    with open(tmp_path / 'linear9_solve_even_report.json') as f:
        report = json.load(f)
    assert abs(report['L'] - 0.3253) < 1e-3
    assert report['converged'] is True
    assert report['stop_reason'] in ('stop_tol', 'quadrature_floor')


def test_prefix_and_fits(tmp_path):
    assert run(tmp_path, 'solve', '--system', 'pendulum', '--y0', '0.3',
               '--eta', '0.1', '--grid', '32', '--prefix', 'p',
               '--format', 'fits') == 0
    traj = symivp.Trajectory.load_fits(str(tmp_path / 'p_trajectory.fits'))
    assert traj.field_name == 'pendulum'
    assert len(traj) == 65


def test_interval(tmp_path, capsys):
    assert run(tmp_path, 'interval', '--system', 'pendulum', '--y0', '0.5',
               '--b', '2', '--sublinear', 'M1=0,M2=1') == 0
    out = capsys.readouterr().out.splitlines()
    assert 'b = 2' in out
    assert 'M = 1' in out
    assert 'L = 2' in out


def test_solve_odd_collision(tmp_path, capsys):
    code = run(tmp_path, 'solve-odd', '--system', 'nbody',
               '--eta=0.1,0,0,-0.1,0,0', '--b', '0.1', '--grid', '32')
    assert code == 1
    assert 'mutual collision' in capsys.readouterr().err


def test_solve_odd_parity(tmp_path, capsys):
    code = run(tmp_path, 'solve-odd', '--system', 'exp_minus', '--eta', '1',
               '--grid', '32')
    assert code == 1
    assert 'not odd' in capsys.readouterr().err
    assert run(tmp_path, 'solve-odd', '--system', 'duffing', '--eta', '1',
               '--grid', '32') == 0


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as err:
        run(tmp_path, 'solve-odd', '--system', 'duffing', '--y0', '1',
            '--eta', '1')
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run(tmp_path, 'solve-even', '--system', 'no_such_system')
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run(tmp_path, 'solve-even', '--system', 'pendulum', '--y0', '1,2')
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run(tmp_path, 'solve-even', '--system', 'pendulum',
            '--param', 'omega')
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run(tmp_path, 'solve-even', '--system', 'pendulum', '--grid', '2')
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(['frobnicate'])
    assert err.value.code == 2


def test_non_convergence(tmp_path):
    with pytest.warns(UserWarning):
        code = run(tmp_path, 'solve-even', '--system', 'linear9', '--y0', '1',
                   '--grid', '32', '--max-iterations', '2')
    assert code == 1


def test_deterministic(tmp_path):
    outputs = []
    for name in ('a', 'b'):
        d = tmp_path / name
        assert run(d, 'solve-even', '--system', 'exp_plus', '--y0', '0.2',
                   '--grid', '64', '--svg') == 0
        with open(d / 'exp_plus_solve_even_trajectory.csv', 'rb') as f:
            csv = f.read()
        with open(d / 'exp_plus_solve_even_report.json', 'rb') as f:
            report = f.read()
        with open(d / 'exp_plus_solve_even.svg', 'rb') as f:
            svg = f.read()
        outputs.append((csv, report, svg))
    assert outputs[0] == outputs[1]
    assert outputs[0][2].startswith(b'<?xml')


def test_config_file(tmp_path, capsys):
    config = tmp_path / 'settings.ini'
    config.write_text("system = linear9\ny0 = 1\nb = 0.5\nmax-iterations = 30\n")
    assert run(tmp_path, 'interval', '--config', str(config)) == 0
    assert 'b = 0.5' in capsys.readouterr().out.splitlines()
    assert run(tmp_path, 'interval', '--config', str(config), '--b', '2') == 0
    assert 'b = 2' in capsys.readouterr().out.splitlines()


def test_config_file_constants(tmp_path, capsys):
    config = tmp_path / 'constants.ini'
    config.write_text("M = 3.0\nK = 2.0\nL_cap = 0.1\nb = 0.5\n")
    args = build_parser().parse_args(['interval', '--system', 'linear9',
                                      '--config', str(config)])
    resolve_settings(args)
    assert args.M == 3.0
    assert args.K == 2.0
    assert args.L_cap == 0.1
    assert args.b == 0.5

    config.write_text("m = 3.0\nl-cap = 0.1\n")
    assert run(tmp_path, 'interval', '--system', 'linear9', '--y0', '1',
               '--config', str(config)) == 0
    out = capsys.readouterr().out.splitlines()
    assert 'M = 3' in out
    assert 'L = 0.10000000000000001' in out

    # flags still win over the file
    assert run(tmp_path, 'interval', '--system', 'linear9', '--y0', '1',
               '--config', str(config), '--M', '2') == 0
    assert 'M = 2' in capsys.readouterr().out.splitlines()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    target = tmp_path / 'from_env'
    monkeypatch.setenv('SYMIVP_OUTPUT_DIR', str(target))
    assert main(['solve-even', '--system', 'pendulum', '--y0', '0.5',
                 '--grid', '32']) == 0
    assert os.path.exists(target / 'pendulum_solve_even_trajectory.csv')


def test_check_parity(tmp_path, capsys):
    assert run(tmp_path, 'check-parity', '--system', 'duffing',
               '--radius', '2') == 0
    with open(tmp_path / 'duffing_check_parity_parity.json') as f:
        data = json.load(f)
    assert data['classification'] == 'odd'
    assert data['declared_parity'] == 'odd'

    assert run(tmp_path, 'check-parity', '--system', 'exp_minus',
               '--prefix', 'em') == 0
    with open(tmp_path / 'em_parity.json') as f:
        assert json.load(f)['classification'] == 'neither'


def test_catalog(capsys):
    assert main(['catalog']) == 0
    listing = json.loads(capsys.readouterr().out)
    assert [item['name'] for item in listing] == symivp.known_systems()


def test_sweep(tmp_path):
    assert run(tmp_path, 'sweep', '--system', 'pendulum', '--vary',
               'initial_position', '--member', '0.1', '--member', '0.5',
               '--member', '1.0', '--grid', '32', '--oracle-h', '1e-3',
               '--workers', '2') == 0
    summary = Table.read(str(tmp_path / 'pendulum_sweep_summary.csv'),
                         format='ascii.csv')
    assert len(summary) == 3
    assert list(summary['member_index']) == [0, 1, 2]
    assert max(summary['parity_defect']) <= 1e-12
    for i in range(3):
        assert os.path.exists(tmp_path
                              / f'pendulum_sweep_member{i}_trajectory.csv')


def test_convergence(tmp_path, capsys):
    assert run(tmp_path, 'convergence', '--system', 'duffing', '--y0', '0.5',
               '--grid', '64', '--svg') == 0
    table = Table.read(str(tmp_path / 'duffing_convergence_convergence.csv'),
                       format='ascii.csv')
    assert list(table.colnames) == ['iteration', 'increment', 'majorant',
                                    'dominated']
    assert os.path.exists(tmp_path / 'duffing_convergence_convergence.svg')
    assert 'majorant' in capsys.readouterr().out
