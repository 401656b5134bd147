"""CSV point samples, structured-grid text blocks and JSON run summaries.

Floats are written with 17 significant digits so a value read back is the
same IEEE double that was written.
"""
import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .state import pressure

FMT = "%.17g"


def sample_points(samples):
    """Reference coordinates of ``samples`` equally spaced sub-cell centers."""
    if samples < 1:
        raise DomainError("need at least one sample per cell")
    return -1.0 + (2.0 * np.arange(samples) + 1.0) / samples


def primitive_samples(fld, eos, samples=None):
    """Coordinates and (rho, velocity..., p, E) on a regular sub-cell lattice.

    Returns ``(coords, columns)`` where every array has the lattice shape:
    ``(ncell * s,)`` in 1D and ``(nx * s, ny * s)`` in 2D.
    """
    mesh = fld.mesh
    s = samples or fld.degree + 1
    xi = sample_points(s)
    if mesh.dim == 1:
        U = fld.at_reference(xi).reshape(-1, fld.ncomp)
        coords = (mesh.to_physical(xi).reshape(-1),)
    else:
        X, Y = np.meshgrid(xi, xi, indexing="ij")
        ref = np.column_stack([X.ravel(), Y.ravel()])
        nx, ny = mesh.shape
        # cell (i, j), sample (a, b) -> lattice (i*s + a, j*s + b)
        U = fld.at_reference(ref).reshape(nx, ny, s, s, -1).transpose(0, 2, 1, 3, 4)
        U = U.reshape(nx * s, ny * s, -1)
        px, py = mesh.to_physical(ref)
        px = px.reshape(nx, ny, s, s).transpose(0, 2, 1, 3).reshape(nx * s, ny * s)
        py = py.reshape(nx, ny, s, s).transpose(0, 2, 1, 3).reshape(nx * s, ny * s)
        coords = (px, py)
    rho = U[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        vel = [U[..., 1 + d] / rho for d in range(mesh.dim)]
        p = pressure(U, eos)
    return coords, [rho, *vel, p, U[..., -1]]


def column_names(dim):
    return ["x", "rho", "u", "p", "E"] if dim == 1 else ["x", "y", "rho", "u", "v", "p", "E"]


def write_csv(path, fld, eos, samples=None):
    coords, cols = primitive_samples(fld, eos, samples)
    table = np.column_stack([np.ravel(a) for a in (*coords, *cols)])
    np.savetxt(path, table, delimiter=",", fmt=FMT, header=",".join(column_names(fld.mesh.dim)),
               comments="")
    return Path(path)


def write_grid(path, fld, eos, quantity="rho", samples=None):
    """2D structured block: header, x row, y row, then one row per x index."""
    if fld.mesh.dim != 2:
        raise DomainError("grid blocks are for 2D fields")
    names = column_names(2)[2:]
    if quantity not in names:
        raise DomainError(f"unknown quantity {quantity!r}; choose from {names}")
    (px, py), cols = primitive_samples(fld, eos, samples)
    values = cols[names.index(quantity)]
    with open(path, "w") as fh:
        fh.write(f"# {quantity} {values.shape[0]} {values.shape[1]}\n")
        np.savetxt(fh, px[:, 0][None], fmt=FMT)
        np.savetxt(fh, py[0, :][None], fmt=FMT)
        np.savetxt(fh, values, fmt=FMT)
    return Path(path)


def read_grid(path):
    """Inverse of ``write_grid``: (quantity, x, y, values)."""
    with open(path) as fh:
        head = fh.readline().split()
        x = np.array(fh.readline().split(), dtype=float)
        y = np.array(fh.readline().split(), dtype=float)
        values = np.loadtxt(fh, ndmin=2)
    return head[1], x, y, values


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def write_summary(path, summary):
    with open(path, "w") as fh:
        json.dump(_plain(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return Path(path)
