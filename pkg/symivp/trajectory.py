import os
from io import BytesIO

import numpy as np
from astropy.table import Table
from astropy.io import fits

from .symmetry import SampledFunction


class Trajectory:
    """
    A sampled solution y(t) of y'' = f(y), with its velocity.

    Times are held as offsets tau = t - t0 from the initial time, so that
    a grid built by mirroring stays bit-exactly symmetric about t0.

    Parameters
    ----------
    t0: float
        The initial time the offsets refer to

    tau: array
        Strictly increasing offsets, length m

    y: array
        Positions, shape (m, n)

    yp: array
        Velocities, shape (m, n)

    field_name: str
        Name of the field that generated the trajectory

    L: float or None
        Half-width of the interval for single-interval solves

    annotations: list of str
        Free-text notes, e.g. why an integration stopped early
    """

    def __init__(self, t0, tau, y, yp, field_name='', L=None,
                 annotations=None):
        tau = np.asarray(tau, dtype=float)
        y = np.asarray(y, dtype=float)
        yp = np.asarray(yp, dtype=float)
        if y.ndim == 1:
            y = y[:, np.newaxis]
        if yp.ndim == 1:
            yp = yp[:, np.newaxis]
        if tau.ndim != 1 or len(tau) == 0:
            raise ValueError("Trajectory times must be a non-empty 1D array")
        if y.shape != (len(tau), y.shape[-1]) or yp.shape != y.shape:
            raise ValueError(f"Inconsistent trajectory shapes: tau "
                             f"{tau.shape}, y {y.shape}, yp {yp.shape}")
        if not np.all(np.diff(tau) > 0):
            raise ValueError("Trajectory times must be strictly increasing")
        self.t0 = float(t0)
        self.tau = tau
        self.y = y
        self.yp = yp
        self.field_name = field_name
        self.L = None if L is None else float(L)
        self.annotations = [] if annotations is None else list(annotations)
        # (time, velocity jump) pairs written by global extension
        self.stitches = []

    def __len__(self):
        return len(self.tau)

    def __repr__(self):
        return (f"Trajectory('{self.field_name}', t0={self.t0}, "
                f"span=[{self.times[0]:g}, {self.times[-1]:g}], "
                f"points={len(self)}, dimension={self.dimension})")

    @property
    def dimension(self):
        return self.y.shape[1]

    @property
    def times(self):
        return self.t0 + self.tau

    @property
    def is_symmetric(self):
        """Whether the offsets are mirrored bit-exactly about zero."""
        tau = self.tau
        return (len(tau) % 2 == 1 and tau[len(tau) // 2] == 0
                and bool(np.all(tau + tau[::-1] == 0)))

    @property
    def complete(self):
        """False if the run that made this trajectory stopped early."""
        return not self.annotations

    def positions(self):
        """The positions as a SampledFunction of tau."""
        return SampledFunction(self.tau, self.y)

    def velocities(self):
        """The velocities as a SampledFunction of tau."""
        return SampledFunction(self.tau, self.yp)

    def copy(self):
        traj = self.__class__(self.t0, self.tau.copy(), self.y.copy(),
                              self.yp.copy(), self.field_name, self.L,
                              self.annotations)
        traj.stitches = list(self.stitches)
        return traj

    def column_names(self):
        n = self.dimension
        return (['t'] + [f'y{i + 1}' for i in range(n)]
                + [f'yp{i + 1}' for i in range(n)])

    def to_table(self, include_tau=False):
        """
        Convert to an astropy table with columns t, y1..yn, yp1..ypn.

        Parameters
        ----------
        include_tau: bool
            Also include the exact offsets as a final 'tau' column

        Returns
        -------
        table: astropy.table.Table
        """
        names = self.column_names()
        cols = [self.times] + list(self.y.T) + list(self.yp.T)
        if include_tau:
            names.append('tau')
            cols.append(self.tau)
        table = Table(data=cols, names=names)
        table.meta['T0'] = self.t0
        table.meta['FIELD'] = self.field_name
        if self.L is not None:
            table.meta['HALFWID'] = self.L
        table.meta['SYMMETRIC'] = self.is_symmetric
        return table

    @classmethod
    def from_table(cls, table, t0=None, field_name=None):
        """
        Rebuild a trajectory from a table made by to_table.

        Parameters
        ----------
        table: astropy.table.Table
            Table with columns t, y1..yn, yp1..ypn and optionally tau

        t0: float or None
            Initial time; read from the table metadata if None, or 0
            if the table has none

        field_name: str or None
            Overrides the metadata field name

        Returns
        -------
        traj: Trajectory
        """
        meta = table.meta
        if t0 is None:
            t0 = float(meta.get('T0', 0.0))
        if field_name is None:
            field_name = str(meta.get('FIELD', ''))
        L = meta.get('HALFWID')
        ycols = sorted((c for c in table.colnames
                        if c.startswith('y') and not c.startswith('yp')),
                       key=lambda c: int(c[1:]))
        ypcols = sorted((c for c in table.colnames if c.startswith('yp')),
                        key=lambda c: int(c[2:]))
        if not ycols or len(ycols) != len(ypcols):
            raise ValueError(f"Table columns {table.colnames} do not describe "
                             "a trajectory")
        if 'tau' in table.colnames:
            tau = np.array(table['tau'], dtype=float)
        else:
            tau = np.array(table['t'], dtype=float) - t0
        y = np.stack([np.array(table[c], dtype=float) for c in ycols], axis=-1)
        yp = np.stack([np.array(table[c], dtype=float) for c in ypcols],
                      axis=-1)
        return cls(t0, tau, y, yp, field_name=field_name, L=L)

    def save_csv(self, filename, overwrite=False):
        """
        Write the trajectory as CSV with 17 significant digits.

        The header row is t,y1..yn,yp1..ypn; metadata is not written.
        """
        table = self.to_table()
        formats = {name: '%.17g' for name in table.colnames}
        table.write(filename, format='ascii.csv', formats=formats,
                    overwrite=overwrite)

    @classmethod
    def load_csv(cls, filename, t0=0.0, field_name=''):
        """
        Read a trajectory CSV file written by save_csv.

        Parameters
        ----------
        filename: str
            Source file

        t0: float
            Initial time; CSV files do not record it

        field_name: str
            Name to attach
        """
        table = Table.read(filename, format='ascii.csv')
        return cls.from_table(table, t0=t0, field_name=field_name)

    def save_fits(self, filename, overwrite=False):
        """
        Save to a FITS file, with the exact offsets and the metadata.

        Parameters
        ----------
        filename: str
            Destination FITS file name

        overwrite: bool
            If False (the default), raise an error if the file already exists
        """
        table = self.to_table(include_tau=True)
        table.meta['EXTNAME'] = 'trajectory'
        hdr = fits.Header()
        hdr['NANNOT'] = len(self.annotations)
        for i, note in enumerate(self.annotations):
            hdr[f'ANNOT{i}'] = note
        hdr['NSTITCH'] = len(self.stitches)
        for i, (t, jump) in enumerate(self.stitches):
            hdr[f'STITT{i}'] = t
            hdr[f'STITJ{i}'] = jump
        hdu_list = fits.HDUList([fits.PrimaryHDU(header=hdr),
                                 fits.table_to_hdu(table)])

        if os.path.exists(filename) and not overwrite:
            raise OSError(f"File {filename} already exists and overwrite=False")

        buf = BytesIO()
        hdu_list.writeto(buf)
        buf.seek(0)
        with open(filename, "wb") as f:
            f.write(buf.read())

    @classmethod
    def load_fits(cls, filename):
        """
        Load a trajectory written by save_fits.

        Parameters
        ----------
        filename: str
            Source FITS file name

        Returns
        -------
        traj: Trajectory
        """
        with fits.open(filename, "readonly") as hdu_list:
            hdr = hdu_list[0].header
            table = Table.read(hdu_list['trajectory'])
            traj = cls.from_table(table)
            traj.annotations = [hdr[f'ANNOT{i}']
                                for i in range(hdr['NANNOT'])]
            traj.stitches = [(hdr[f'STITT{i}'], hdr[f'STITJ{i}'])
                             for i in range(hdr['NSTITCH'])]
        return traj
