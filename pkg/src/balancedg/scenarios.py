"""The eight benchmark setups as declarative configurations.

``build_example(n, overrides)`` returns a frozen ``ScenarioConfig``;
``ScenarioConfig.build()`` turns it into a ready-to-run ``Simulation``.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .boundary import Boundary, BoundaryClosure
from .discretization import SchemeConfig, make_operator
from .eos import IdealGas, parse_eos
from .equilibrium import (EquilibriumProfile, ProjectedEquilibrium, gas_sphere_profile,
                          isothermal_profile, linear_potential, polytropic_profile,
                          quadratic_potential)
from .errors import DomainError
from .field import DgField, l2_project
from .limiters import LimiterParams, point_set_for, scaling_limit
from .mesh import Mesh1D, Mesh2D
from .state import PrimitiveState, is_admissible, prim_to_cons
from .timestepping import Solver, StepController, advance


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    dim: int
    box: tuple
    cells: tuple
    degree: int
    eos: object
    scheme: str
    profile: EquilibriumProfile
    initial: Optional[Callable]  # (*coords) -> primitive (rho, vel..., p); None = equilibrium
    closure: BoundaryClosure
    end_time: float
    cfl: float
    pp_limiter: bool = True
    trouble_cells: bool = False
    tvb_m: float = 0.0
    exact: Optional[Callable] = None  # (t, *coords) -> conserved state
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.cells) != self.dim or min(self.cells) < 1:
            raise DomainError(f"need {self.dim} positive cell counts, got {self.cells}")
        if self.degree not in (0, 1, 2, 3):
            raise DomainError("degree must be between 0 and 3")
        if not self.cfl > 0 or self.end_time < 0:
            raise DomainError("cfl must be positive and end time nonnegative")

    @property
    def equilibrium_run(self):
        return self.initial is None

    def with_(self, **kw):
        return replace(self, **kw)

    def mesh(self):
        if self.dim == 1:
            return Mesh1D.uniform(self.box[0], self.box[1], self.cells[0])
        return Mesh2D.uniform(self.box, *self.cells)

    def build(self):
        return Simulation(self)


def _conserved(initial, eos, dim):
    def f(*c):
        prim = np.asarray(initial(*c), dtype=float)
        return prim_to_cons(PrimitiveState(prim[..., 0], prim[..., 1:-1], prim[..., -1]), eos)
    return f


class Simulation:
    """Mesh, projected equilibrium, operator, limiter pipeline and initial data."""

    def __init__(self, config):
        self.config = cfg = config
        self.mesh = cfg.mesh()
        self.params = LimiterParams(tvb_m=cfg.tvb_m)
        periodic = cfg.closure.periodic
        self.equilibrium = ProjectedEquilibrium(cfg.profile, self.mesh, cfg.degree, cfg.eos,
                                                periodic, self.params)
        scheme = SchemeConfig(cfg.degree, cfg.eos, self.equilibrium, cfg.scheme, cfg.profile.potential)
        self.operator = make_operator(self.mesh, scheme, cfg.closure)
        self.solver = Solver(self.operator, cfg.pp_limiter, cfg.trouble_cells, self.params)
        self.coef0 = self.initial_coef()

    def initial_coef(self):
        cfg = self.config
        if cfg.initial is None:
            return self.equilibrium.coef.copy()
        raw = l2_project(_conserved(cfg.initial, cfg.eos, cfg.dim), self.mesh, cfg.degree, cfg.dim + 2)
        ps = point_set_for(self.mesh, cfg.degree)
        return scaling_limit(raw.coef, self.operator.basis.values(ps.points), self.params)

    def field(self, coef):
        return DgField(self.mesh, self.config.degree, coef)

    def initial_admissible(self):
        ps = point_set_for(self.mesh, self.config.degree)
        vals = self.operator.basis.values(ps.points) @ self.coef0
        return bool(np.all(is_admissible(vals).admissible))

    def run(self, end_time=None, cfl=None, callback=None, max_restarts=8, restart_halving=True):
        cfg = self.config
        ctl = StepController(cfl=cfg.cfl if cfl is None else cfl,
                             end_time=cfg.end_time if end_time is None else end_time,
                             max_restarts=max_restarts, restart_halving=restart_halving)
        return advance(self.solver, self.coef0.copy(), ctl, callback=callback)


# ---------------------------------------------------------------------------
# example builders

_COMMON = {"cells", "degree", "cfl", "end_time", "scheme", "eos", "pp_limiter",
           "trouble_cells", "tvb_m"}


def _eos(value, default):
    if value is None:
        return default
    return parse_eos(value) if isinstance(value, str) else value


def _cells(value, dim):
    if value is None:
        return None
    if np.ndim(value) == 0:
        return (int(value),) * dim
    cells = tuple(int(c) for c in value)
    if len(cells) != dim:
        raise DomainError(f"expected {dim} cell counts, got {cells}")
    return cells


def _finish(o, name, dim, box, cells, eos, profile, initial, closure, end_time, cfl,
            trouble=False, exact=None, params=None):
    return ScenarioConfig(
        name=name, dim=dim, box=box,
        cells=_cells(o.get("cells"), dim) or cells,
        degree=int(o.get("degree", 2)),
        eos=eos, scheme=o.get("scheme", "wb-hllc"), profile=profile, initial=initial,
        closure=closure,
        end_time=float(o.get("end_time", end_time)),
        cfl=float(o.get("cfl", cfl)),
        pp_limiter=bool(o.get("pp_limiter", True)),
        trouble_cells=bool(o.get("trouble_cells", trouble)),
        tvb_m=float(o.get("tvb_m", 0.0)),
        exact=exact, params=params or {})


def _sides(*kinds, **kw):
    return BoundaryClosure(tuple(k if isinstance(k, Boundary) else Boundary(k, **kw) for k in kinds))


def _example1(o):
    g, gamma = 1.0, 5.0 / 3.0
    eos = _eos(o.get("eos"), IdealGas(gamma))
    profile = polytropic_profile(1.0, gamma, 1.0, g=g)
    A = float(o.get("amplitude", 0.0))
    if A == 0.0:
        closure = _sides("equilibrium", "equilibrium")
        t_end = 4.0
    else:
        closure = _sides(Boundary("inflow", amplitude=A), "equilibrium")
        t_end = 1.5
    return _finish(o, "polytropic atmosphere", 1, (0.0, 2.0), (100,), eos, profile, None, closure,
                   t_end, 0.15, trouble=A >= 0.1, params=dict(g=g, amplitude=A))


def _example2(o):
    eos = _eos(o.get("eos"), IdealGas(1.4))
    rho0, p0 = 7.0, 0.2
    profile = isothermal_profile(rho0, p0, quadratic_potential(0.0, 1))

    def initial(x):
        x = np.asarray(x, float)
        return np.stack(np.broadcast_arrays(rho0, np.where(x < 0, -1.0, 1.0), p0), axis=-1)

    return _finish(o, "rarefaction", 1, (-1.0, 1.0), (800,), eos, profile, initial,
                   _sides("transmissive", "transmissive"), 0.6, 0.15)


def _example3(o):
    eos = _eos(o.get("eos"), IdealGas(5.0 / 3.0))
    profile = isothermal_profile(2.0, 1e9, linear_potential(1.0, 1))

    def initial(x):
        left = np.asarray(x, float) < 5.0
        return np.stack([np.where(left, 2.0, 1e-3), np.zeros_like(left, float),
                         np.where(left, 1e9, 1.0)], axis=-1)

    return _finish(o, "Leblanc shock tube", 1, (0.0, 10.0), (1600,), eos, profile, initial,
                   _sides("reflective", "reflective"), 4e-5, 0.15, trouble=True)


def _example4(o):
    gamma, u0, v0, p0 = 5.0 / 3.0, 1.0, 1.0, 4.5
    eos = _eos(o.get("eos"), IdealGas(gamma))
    pot = linear_potential(1.0, 2)
    # background hydrostatic state: rho = 1, p = p0 - x - y
    profile = EquilibriumProfile(lambda x, y: np.ones(np.broadcast(x, y).shape),
                                 lambda x, y: p0 - np.asarray(x, float) - y, 2, pot, "custom",
                                 dict(p0=p0))

    def prim(t, x, y):
        s = np.pi * (np.asarray(x, float) + y - t * (u0 + v0))
        rho = 1.0 + 0.2 * np.sin(s)
        p = p0 + t * (u0 + v0) - x - y + 0.2 * np.cos(s) / np.pi
        return np.stack(np.broadcast_arrays(rho, u0, v0, p), axis=-1)

    def exact(t, x, y):
        w = prim(t, x, y)
        return prim_to_cons(PrimitiveState(w[..., 0], w[..., 1:3], w[..., 3]), eos)

    closure = BoundaryClosure.uniform("dirichlet", 2, exact=exact)
    return _finish(o, "smooth 2D accuracy", 2, ((0.0, 2.0), (0.0, 2.0)), (32, 32), eos, profile,
                   lambda x, y: prim(0.0, x, y), closure, 0.1, 0.15, exact=exact,
                   params=dict(u0=u0, v0=v0, p0=p0))


def _example5(o):
    rho0, p0, g = 1.21, 1.0, 1.0
    dim = int(o.get("dim", 2))
    eos = _eos(o.get("eos"), IdealGas(1.4))
    profile = isothermal_profile(rho0, p0, linear_potential(g, dim))
    perturbed = bool(o.get("perturbed", False))
    eta = float(o.get("eta", 1e-3))
    box = (0.0, 1.0) if dim == 1 else ((0.0, 1.0), (0.0, 1.0))
    if not perturbed:
        closure = BoundaryClosure.uniform("equilibrium", dim)
        return _finish(o, "isothermal equilibrium", dim, box, (50,) * dim, eos, profile, None,
                       closure, 1.0, 0.15, params=dict(rho0=rho0, p0=p0, g=g))
    if dim != 2:
        raise DomainError("the perturbed isothermal setup is two-dimensional")
    k = rho0 * g / p0

    def initial(x, y):
        x = np.asarray(x, float)
        base = np.exp(-k * (x + y))
        p = p0 * base + eta * np.exp(-100.0 * k * ((x - 0.3) ** 2 + (y - 0.3) ** 2))
        z = np.zeros_like(base)
        return np.stack([rho0 * base, z, z, p], axis=-1)

    return _finish(o, "isothermal perturbation", 2, box, (100, 100), eos, profile, initial,
                   BoundaryClosure.uniform("transmissive", 2), 0.15, 0.15,
                   params=dict(rho0=rho0, p0=p0, g=g, eta=eta))


def _gas_sphere(o, rho_c):
    K0 = g = 1.0
    box = ((-0.5, 0.5), (-0.5, 0.5))
    eos = _eos(o.get("eos"), IdealGas(2.0))
    return K0, g, box, eos, gas_sphere_profile(K0, rho_c, g, (0.0, 0.0), box)


def _example6(o):
    K0, g, box, eos, profile = _gas_sphere(o, 1.0)
    perturbed = bool(o.get("perturbed", False))
    eta = float(o.get("eta", 1e-3))
    if not perturbed:
        return _finish(o, "gas sphere equilibrium", 2, box, (50, 50), eos, profile, None,
                       BoundaryClosure.uniform("equilibrium", 2), 14.8, 0.15,
                       params=dict(K0=K0, g=g, rho_c=1.0))

    def initial(x, y):
        r2 = np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2
        rho = profile.rho_e(x, y)
        z = np.zeros_like(rho)
        return np.stack([rho, z, z, K0 * rho ** 2 + eta * np.exp(-100.0 * r2)], axis=-1)

    return _finish(o, "gas sphere perturbation", 2, box, (200, 200), eos, profile, initial,
                   BoundaryClosure.uniform("transmissive", 2), 0.2, 0.15,
                   params=dict(K0=K0, g=g, rho_c=1.0, eta=eta))


def _example7(o):
    eos = _eos(o.get("eos"), IdealGas(1.4))
    profile = isothermal_profile(1.0, 0.4, quadratic_potential((0.5, 0.5), 2))

    def initial(x, y):
        rho = profile.rho_e(x, y)
        u = np.where(np.asarray(x, float) < 0.5, -2.0, 2.0) * np.ones_like(rho)
        return np.stack([rho, u, np.zeros_like(rho), 0.4 * rho], axis=-1)

    return _finish(o, "2D rarefaction", 2, ((0.0, 1.0), (0.0, 1.0)), (100, 100), eos, profile,
                   initial, BoundaryClosure.uniform("transmissive", 2), 0.1, 0.15)


def _example8(o):
    rho_c = float(o.get("rho_c", 0.01))
    K0, g, box, eos, profile = _gas_sphere(o, rho_c)

    def initial(x, y):
        r = np.hypot(np.asarray(x, float), y)
        rho = profile.rho_e(x, y)
        z = np.zeros_like(rho)
        return np.stack([rho, z, z, K0 * rho ** 2 + np.where(r < 0.1, 100.0, 0.0)], axis=-1)

    return _finish(o, "blast", 2, box, (400, 400), eos, profile, initial,
                   BoundaryClosure.uniform("transmissive", 2), 0.005, 0.15, trouble=True,
                   params=dict(K0=K0, g=g, rho_c=rho_c))


_BUILDERS = {1: (_example1, {"amplitude"}), 2: (_example2, set()), 3: (_example3, set()),
             4: (_example4, set()), 5: (_example5, {"dim", "perturbed", "eta"}),
             6: (_example6, {"perturbed", "eta"}), 7: (_example7, set()), 8: (_example8, {"rho_c"})}


def build_example(n, overrides=None):
    """Configuration of benchmark ``n`` (1..8) with optional parameter overrides."""
    if n not in _BUILDERS:
        raise DomainError(f"no example {n}; choose 1..8")
    builder, extra = _BUILDERS[n]
    o = {key: v for key, v in (overrides or {}).items() if v is not None}
    unknown = set(o) - _COMMON - extra
    if unknown:
        raise DomainError(f"example {n} does not accept {sorted(unknown)}")
    if "eta" in o and not o.get("perturbed", False):
        raise DomainError("eta only applies to the perturbed setup")
    return builder(o)
