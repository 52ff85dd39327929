"""
Static SVG figures of solutions and of their convergence.
"""
import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use('agg')
    import matplotlib.pyplot as plt
    # fixed ids and no timestamp, so identical runs give identical files
    matplotlib.rcParams['svg.hashsalt'] = 'symivp'
    return plt


def _save(plt, fig, filename):
    fig.tight_layout()
    fig.savefig(filename, format='svg', metadata={'Date': None})
    plt.close(fig)


def plot_trajectory(traj, filename, mirrored=True):
    """
    Plot each position component against time.

    For a trajectory on a grid mirrored about t0 the reflected curve
    y(t0 - tau) is overlaid, dashed, so even solutions show two coincident
    curves and odd ones two curves of opposite sign.

    Parameters
    ----------
    traj: Trajectory

    filename: str
        Destination SVG file

    mirrored: bool
        Whether to draw the reflected overlay when the grid allows it
    """
    plt = _pyplot()
    n = traj.dimension
    fig, axes = plt.subplots(n, 1, figsize=(6, 2.2 * n + 0.6), sharex=True,
                             squeeze=False)
    t = traj.times
    for i, ax in enumerate(axes[:, 0]):
        ax.plot(t, traj.y[:, i], color='C0', label=f'y{i + 1}(t)')
        if mirrored and traj.is_symmetric:
            ax.plot(t, traj.y[::-1, i], color='C1', linestyle='--',
                    label=f'y{i + 1}(2 t0 - t)')
        ax.axvline(traj.t0, color='0.6', linewidth=0.5)
        ax.set_ylabel(f'y{i + 1}')
        ax.legend(loc='best', fontsize='small')
    axes[-1, 0].set_xlabel('t')
    axes[0, 0].set_title(traj.field_name)
    _save(plt, fig, filename)


def plot_convergence(report, filename):
    """
    Plot the increments of a solve against their majorant bounds on a
    logarithmic scale, with the quadrature floor.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    j = np.arange(1, report.iterations_run + 1)
    inc = np.array(report.increments, dtype=float)
    bound = np.array(report.majorant_terms, dtype=float)
    tiny = np.finfo(float).tiny
    ax.semilogy(j, np.maximum(inc, tiny), 'o-', label='increment')
    ax.semilogy(j, np.maximum(bound, tiny), 's--', label='majorant')
    if report.quadrature_floor > 0:
        ax.axhline(report.quadrature_floor, color='0.5', linestyle=':',
                   label='quadrature floor')
    ax.set_xlabel('iteration')
    ax.set_ylabel('sup-norm')
    ax.set_title(f'M={report.M_used:.4g}, K={report.K_used:.4g}, '
                 f'L={report.L_used:.4g}')
    ax.legend(loc='best', fontsize='small')
    _save(plt, fig, filename)
