"""SSP-RK3 time stepping with per-stage limiting and step restarts."""
import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, PositivityFault, RunError
from .limiters import LimiterParams, check_averages, point_set_for, trouble_cell_limit

# rows: (weight of U^n, weight of the forward-Euler update of the previous stage)
SSP_RK3_STAGES = ((0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0))
SSP_RK3_TIMES = (0.0, 1.0, 0.5)


@dataclass
class StepController:
    cfl: float = 0.2
    end_time: float = 0.0
    max_restarts: int = 8
    restart_halving: bool = True
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.cfl > 0:
            raise DomainError("CFL number must be positive")
        if self.end_time < 0:
            raise DomainError("end time must be nonnegative")


@dataclass
class RunReport:
    steps: int = 0
    restarts: int = 0
    final_time: float = 0.0
    min_density: float = np.inf
    min_pressure: float = np.inf
    wall_time: float = 0.0
    mass_initial: float = np.nan
    mass_final: float = np.nan
    dt_min: float = np.inf
    dt_max: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def mass_drift(self):
        return abs(self.mass_final - self.mass_initial) / abs(self.mass_initial)


class Solver:
    """Spatial operator plus the per-stage limiting pipeline."""

    def __init__(self, operator, pp_limit=True, trouble_cells=False, params=LimiterParams()):
        self.op = operator
        self.pp_limit = pp_limit
        self.trouble_cells = trouble_cells
        self.params = params
        self.mesh = operator.mesh
        self.basis = operator.basis
        self.eos = operator.eos
        self.point_set = point_set_for(self.mesh, operator.k)
        self.P = self.basis.values(self.point_set.points)
        self.periodic = operator.closure.periodic
        self.last_extremes = None

    def limit(self, coef):
        if self.trouble_cells:
            coef = trouble_cell_limit(coef, self.basis, self.mesh, self.eos, self.params, self.periodic)
        check_averages(coef)
        if not self.pp_limit:
            return coef
        shape = coef.shape
        nm, nc = shape[-2], shape[-1]
        flat = np.ascontiguousarray(coef).reshape(-1, nm, nc)
        V = self._point_values(flat)
        thetas = np.empty((2, flat.shape[0]))
        rho_low, g_low = kernels.scaling_thetas(V, flat, self.params.eps1_cap, self.params.eps2_cap, thetas)
        self.last_extremes = (rho_low, g_low)
        out = np.empty_like(flat)
        kernels.apply_thetas(flat, thetas, out)
        return out.reshape(shape)

    def _point_values(self, flat):
        """Positivity point-set values, point-major (npts, ncell, ncomp)."""
        n, nm, nc = flat.shape
        X = np.ascontiguousarray(flat.transpose(1, 0, 2)).reshape(nm, n * nc)
        return (self.P @ X).reshape(-1, n, nc)

    def forward_euler_stage(self, coef, dt, t=0.0):
        return self.limit(coef + dt * self.op.rhs(coef, t))

    def ssp_rk3_step(self, coef, dt, t=0.0):
        self.last_extremes = None
        stage = coef
        for (a, b), c in zip(SSP_RK3_STAGES, SSP_RK3_TIMES):
            update = stage + dt * self.op.rhs(stage, t + c * dt)
            stage = self.limit(a * coef + b * update) if a else self.limit(update)
        return stage

    def extremes(self, coef):
        """Minimum density and pressure over the positivity point set."""
        if self.pp_limit and self.eos.kind == "ideal" and self.last_extremes is not None:
            rho_low, g_low = self.last_extremes
            self.last_extremes = None
            return rho_low, (self.eos.gamma - 1.0) * g_low
        flat = coef.reshape(-1, *coef.shape[-2:])
        V = self._point_values(flat)
        if self.eos.kind == "ideal":
            return kernels.point_extremes(V, self.eos.gamma - 1.0)
        rho = V[..., 0]
        g = V[..., -1] - 0.5 * np.sum(V[..., 1:-1] ** 2, axis=-1) / rho
        if np.all(rho > 0) and np.all(g > 0):
            return float(rho.min()), float(np.min(self.eos.pressure(rho, g)))
        return float(rho.min()), float(g.min())

    def mass(self, coef):
        if self.mesh.dim == 1:
            return float(np.sum(coef[:, 0, 0] * self.mesh.sizes))
        return float(np.sum(coef[..., 0, 0] * self.mesh.areas))


def forward_euler_stage(solver, coef, dt, t=0.0):
    return solver.forward_euler_stage(coef, dt, t)


def ssp_rk3_step(solver, coef, dt, t=0.0):
    return solver.ssp_rk3_step(coef, dt, t)


def advance(solver, coef, controller, t0=0.0, callback=None, fixed_dt=None):
    """Integrate to ``controller.end_time``; returns (coef, RunReport)."""
    report = RunReport(final_time=t0)
    start = _time.perf_counter()
    report.mass_initial = solver.mass(coef)
    rmin, pmin = solver.extremes(coef)
    report.min_density, report.min_pressure = rmin, pmin
    t = t0
    end = controller.end_time
    while t < end and (end - t) > 1e-14 * max(1.0, abs(end)):
        if report.steps >= controller.max_steps:
            raise RunError("step limit reached", report, coef)
        dt = fixed_dt if fixed_dt is not None else solver.op.max_stable_dt(coef, controller.cfl, t)
        if not np.isfinite(dt) or dt <= 0:
            raise RunError(f"invalid time step {dt}", report, coef)
        dt = min(dt, end - t)
        attempts = 0
        while True:
            try:
                with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                    new = solver.ssp_rk3_step(coef, dt, t)
                break
            except (PositivityFault, FloatingPointError) as exc:
                attempts += 1
                report.restarts += 1
                if not controller.restart_halving or attempts > controller.max_restarts:
                    report.final_time = t
                    report.wall_time = _time.perf_counter() - start
                    raise RunError(f"positivity fault at t={t:.6g}: {exc}", report, coef) from exc
                dt *= 0.5
        coef = new
        t += dt
        report.steps += 1
        report.dt_min = min(report.dt_min, dt)
        report.dt_max = max(report.dt_max, dt)
        rmin, pmin = solver.extremes(coef)
        report.min_density = min(report.min_density, rmin)
        report.min_pressure = min(report.min_pressure, pmin)
        if callback is not None:
            callback(t, coef)
    report.final_time = t
    report.mass_final = solver.mass(coef)
    report.wall_time = _time.perf_counter() - start
    return coef, report
