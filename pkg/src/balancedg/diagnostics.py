"""Error norms, convergence tables and conservation audits."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .field import DgField, tensor_gauss
from .quadrature import gauss_rule


def _same_mesh(a, b):
    if a.dim != b.dim or a.shape != b.shape:
        return False
    if a.dim == 1:
        return np.allclose(a.edges, b.edges, rtol=0, atol=1e-14 * max(1.0, np.abs(a.edges).max()))
    return (np.allclose(a.x_edges, b.x_edges, rtol=1e-14, atol=0)
            and np.allclose(a.y_edges, b.y_edges, rtol=1e-14, atol=0))


def _sample(fld, npts):
    """Quadrature points, weights and field values; values are mesh.shape + (npts, ncomp)."""
    mesh = fld.mesh
    if mesh.dim == 1:
        g = gauss_rule(npts)
        return (mesh.to_physical(g.nodes),), g.weights, fld.at_reference(g.nodes)
    ref, w = tensor_gauss(npts)
    return mesh.to_physical(ref), w, fld.at_reference(ref)


def l1_error(field_, reference, quad_points=None, normalized=True):
    """Domain-averaged L1 distance per component.

    With ``normalized=False`` the plain integral over the domain is returned.

    ``reference`` is another ``DgField`` on the same mesh or a callable
    ``f(*coords) -> (..., ncomp)`` in conserved variables.  Cells are
    integrated with a tensor Gauss rule of ``degree + 3`` points per direction.
    """
    mesh = field_.mesh
    n = quad_points or field_.degree + 3
    coords, w, vals = _sample(field_, n)
    if isinstance(reference, DgField):
        if not _same_mesh(mesh, reference.mesh):
            raise DomainError("fields live on different meshes")
        if reference.ncomp != field_.ncomp:
            raise DomainError("fields have different component counts")
        ref = reference.at_reference(_reference_points(mesh.dim, n))
    else:
        ref = np.asarray(reference(*coords), dtype=float)
        if ref.shape != vals.shape:
            raise DomainError(f"reference returns shape {ref.shape}, expected {vals.shape}")
    # cell means of |difference|, then weighted by cell measure
    cell = np.einsum("...qc,q->...c", np.abs(vals - ref), w) / w.sum()
    measure = mesh.sizes if mesh.dim == 1 else mesh.areas
    total = (cell * measure[..., None]).reshape(-1, cell.shape[-1]).sum(axis=0)
    return total / mesh.measure if normalized else total


def _reference_points(dim, n):
    if dim == 1:
        return gauss_rule(n).nodes
    return tensor_gauss(n)[0]


def observed_orders(errors, cells):
    """Pairwise orders log(e_coarse/e_fine)/log(n_fine/n_coarse); NaN where undefined."""
    errors = np.asarray(errors, dtype=float)
    cells = np.asarray(cells, dtype=float)
    if len(cells) < 2 or errors.shape[0] != len(cells):
        raise DomainError("need at least two meshes with one error row each")
    out = np.full((len(cells) - 1,) + errors.shape[1:], np.nan)
    for i in range(len(cells) - 1):
        ratio = cells[i + 1] / cells[i]
        if ratio <= 1:
            raise DomainError("mesh sequence must be increasing")
        ec, ef = errors[i], errors[i + 1]
        ok = (ec > 0) & (ef > 0)
        out[i] = np.where(ok, np.log(np.where(ok, ec, 1.0) / np.where(ok, ef, 1.0)) / math.log(ratio),
                          np.nan)
    return out


@dataclass
class ConvergenceTable:
    cells: list
    errors: np.ndarray          # (nmesh, ncomp)
    orders: np.ndarray          # (nmesh - 1, ncomp), NaN = undefined
    reports: list = field(default_factory=list)
    labels: tuple = ()

    def format(self):
        labels = self.labels or tuple(f"c{i}" for i in range(self.errors.shape[1]))
        head = f"{'cells':>8}" + "".join(f"{'l1 ' + s:>14}{'order':>8}" for s in labels)
        lines = [head]
        for i, n in enumerate(self.cells):
            row = f"{n:>8}"
            for c in range(self.errors.shape[1]):
                order = "" if i == 0 else _fmt_order(self.orders[i - 1, c])
                row += f"{self.errors[i, c]:>14.3e}{order:>8}"
            lines.append(row)
        return "\n".join(lines)


def _fmt_order(value):
    return "undef" if not np.isfinite(value) else f"{value:.2f}"


def component_labels(dim):
    return ("rho", "m", "E") if dim == 1 else ("rho", "mx", "my", "E")


def convergence_table(config, cells_sequence, degree=None, end_time=None, normalized=True):
    """Run ``config`` on each mesh and compare against its exact solution."""
    if config.exact is None:
        raise DomainError(f"{config.name!r} has no exact solution to converge to")
    cells_sequence = [int(n) for n in cells_sequence]
    if len(cells_sequence) < 2:
        raise DomainError("a convergence study needs at least two meshes")
    rows, reports = [], []
    for n in cells_sequence:
        cfg = config.with_(cells=(n,) * config.dim,
                           degree=config.degree if degree is None else int(degree),
                           end_time=config.end_time if end_time is None else float(end_time))
        sim = cfg.build()
        coef, report = sim.run()
        t = report.final_time
        rows.append(l1_error(sim.field(coef), lambda *c, t=t: cfg.exact(t, *c), normalized=normalized))
        reports.append(report)
    errors = np.array(rows)
    return ConvergenceTable(cells_sequence, errors, observed_orders(errors, cells_sequence), reports,
                            component_labels(config.dim))


def balance_error(sim, coef):
    """L1 distance between a state and the projected equilibrium."""
    return l1_error(sim.field(coef), sim.equilibrium.field)


def mass_audit(report):
    """Relative change of total mass over a run."""
    return report.mass_drift
