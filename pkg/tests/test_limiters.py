import numpy as np
import pytest
from hypothesis import given, strategies as st

from balancedg import DomainError, IdealGas, PositivityFault
from balancedg.basis import basis_for
from balancedg.boundary import BoundaryClosure
from balancedg.discretization import SchemeConfig, make_operator
from balancedg.equilibrium import isothermal_profile, project_equilibrium
from balancedg.field import DgField, l2_project
from balancedg.limiters import (LimiterParams, characteristic_limit_coef, check_averages,
                                detect_trouble_cells, detect_trouble_coef, eigenvectors, pp_limit,
                                point_set_for, scaling_limit, trouble_cell_limit, tvb_minmod)
from balancedg.mesh import Mesh1D, Mesh2D
from balancedg.state import physical_flux
from balancedg.timestepping import Solver
from conftest import G, random_states

AIR = IdealGas(1.4)


def wild_coef(rng, shape, nm, ncomp, spread=3.0):
    avg = random_states(rng, int(np.prod(shape)), dim=ncomp - 2).reshape(shape + (ncomp,))
    coef = np.zeros(shape + (nm, ncomp))
    coef[..., 0, :] = avg
    coef[..., 1:, :] = spread * rng.normal(size=shape + (nm - 1, ncomp)) * np.abs(avg)[..., None, :]
    return coef


class TestScalingLimiter:
    def test_linear_density_theta(self):
        # rho = 1 + 2 xi on one cell: mean 1, minimum -1
        B = basis_for(1, 1)
        coef = np.array([[[1.0, 0.0, 10.0], [2.0 / B.values(np.array([1.0]))[0, 1], 0.0, 0.0]]])
        ps = point_set_for(Mesh1D.uniform(0, 1, 1), 1)
        _, t1, t2 = scaling_limit(coef, B.values(ps.points), thetas=True)
        assert t1[0] == pytest.approx((1 - 1e-13) / 2, rel=2e-14)
        assert t2[0] == 1.0

    def test_no_change_when_admissible(self):
        coef = np.array([[[1.0, 0.0, 2.5], [0.1, 0.0, 0.1]]])
        B = basis_for(1, 1).values(point_set_for(Mesh1D.uniform(0, 1, 1), 1).points)
        assert np.array_equal(scaling_limit(coef, B), coef)

    @pytest.mark.parametrize("dim,k", [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)])
    def test_averages_kept_and_points_admissible(self, dim, k, rng):
        mesh = Mesh1D.uniform(0, 1, 50) if dim == 1 else Mesh2D.uniform(((0, 1), (0, 1)), 7, 7)
        b = basis_for(dim, k)
        B = b.values(point_set_for(mesh, k).points)
        for _ in range(20):
            coef = wild_coef(rng, mesh.shape, b.nmodes, dim + 2)
            out = scaling_limit(coef, B)
            assert np.allclose(out[..., 0, :], coef[..., 0, :], rtol=1e-14, atol=0)
            vals = B @ out
            assert np.all(vals[..., 0] > 0) and np.all(G(vals) > 0)

    def test_idempotent(self, rng):
        b = basis_for(1, 2)
        B = b.values(point_set_for(Mesh1D.uniform(0, 1, 1), 2).points)
        coef = wild_coef(rng, (200,), b.nmodes, 3)
        once = scaling_limit(coef, B)
        twice = scaling_limit(once, B)
        assert np.allclose(twice, once, rtol=1e-12, atol=1e-300)

    def test_compiled_limit_matches_numpy(self, rng):
        mesh = Mesh2D.uniform(((0, 1), (0, 1)), 9, 6)
        closure = BoundaryClosure.uniform("transmissive", 2)
        eq = project_equilibrium(isothermal_profile(1.0, 1.0, dim=2), mesh, 2, AIR)
        solver = Solver(make_operator(mesh, SchemeConfig(2, AIR, eq), closure))
        coef = wild_coef(rng, mesh.shape, 6, 4)
        assert np.allclose(solver.limit(coef), scaling_limit(coef, solver.P), rtol=1e-13, atol=1e-300)

    def test_pp_limit_on_field(self, rng):
        f = DgField(Mesh1D.uniform(0, 1, 30), 2, wild_coef(rng, (30,), 3, 3))
        out = pp_limit(f)
        vals = out.basis.values(point_set_for(f.mesh, 2).points) @ out.coef
        assert np.all(G(vals) > 0)

    def test_floor_caps(self):
        with pytest.raises(DomainError):
            LimiterParams(eps1_cap=0.0)
        with pytest.raises(DomainError):
            LimiterParams(tvb_m=-1.0)

    def test_bad_average_raises(self):
        coef = np.array([[[1.0, 0.0, 2.5]], [[-1.0, 0.0, 2.5]]])
        with pytest.raises(PositivityFault) as info:
            check_averages(coef)
        assert info.value.cell == (1,)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 5))
def test_minmod_properties(a, b, c, thr):
    m = float(tvb_minmod(np.array(a), np.array(b), np.array(c), thr))
    if abs(a) <= thr:
        assert m == a
    else:
        assert abs(m) <= min(abs(a), abs(b), abs(c))
        assert m == 0 or np.sign(m) == np.sign(a) == np.sign(b) == np.sign(c)


def test_minmod_examples():
    assert tvb_minmod(np.array(1.0), np.array(2.0), np.array(3.0), 0.0) == 1.0
    assert tvb_minmod(np.array(-1.0), np.array(2.0), np.array(3.0), 0.0) == 0.0
    assert tvb_minmod(np.array(5.0), np.array(2.0), np.array(3.0), 0.0) == 2.0
    assert tvb_minmod(np.array(5.0), np.array(2.0), np.array(3.0), 10.0) == 5.0


@pytest.mark.parametrize("dim", [1, 2])
def test_eigenvectors_diagonalize_jacobian(dim, rng):
    for U in random_states(rng, 20, dim=dim, rho=(0.1, 10), p=(0.1, 10), speed=3):
        for axis in range(dim):
            R = eigenvectors(U, AIR, axis)
            n = np.eye(dim)[axis] if dim == 2 else 1.0
            J = np.empty((dim + 2, dim + 2))
            for i in range(dim + 2):
                d = np.zeros(dim + 2)
                d[i] = 1e-6 * max(1.0, abs(U[i]))
                J[:, i] = (physical_flux(U + d, AIR, n) - physical_flux(U - d, AIR, n)) / (2 * d[i])
            lam = np.linalg.solve(R, J @ R)
            off = lam - np.diag(np.diag(lam))
            assert np.max(np.abs(off)) < 1e-6 * np.max(np.abs(lam))


class TestTroubleCells:
    def test_linear_data_not_flagged(self):
        f = l2_project(lambda x: np.stack([1 + x, 0 * x, 2 + x], -1), Mesh1D.uniform(0, 1, 20), 2)
        assert not np.any(detect_trouble_cells(f))

    def test_jump_flagged(self):
        f = l2_project(lambda x: np.stack([np.where(x < 0.5, 1.0, 0.125), 0 * x,
                                           np.where(x < 0.5, 2.5, 0.25)], -1),
                       Mesh1D.uniform(0, 1, 21), 2, quad_points=12)
        flags = detect_trouble_cells(f)
        assert flags[10] and not flags[2] and not flags[18]

    def test_tvb_constant_relaxes(self):
        f = l2_project(lambda x: np.stack([2 + np.sin(2 * np.pi * x), 0 * x, 3 + 0 * x], -1),
                       Mesh1D.uniform(0, 1, 20), 2, quad_points=8)
        assert np.any(detect_trouble_cells(f, periodic=True))
        assert not np.any(detect_trouble_cells(f, LimiterParams(tvb_m=200.0), periodic=True))

    def test_limited_cells_keep_averages_and_are_linear(self):
        mesh = Mesh1D.uniform(0, 1, 21)
        f = l2_project(lambda x: np.stack([np.where(x < 0.5, 1.0, 0.125), 0 * x,
                                           np.where(x < 0.5, 2.5, 0.25)], -1), mesh, 2, quad_points=12)
        out = trouble_cell_limit(f.coef, f.basis, mesh, AIR)
        mask = detect_trouble_cells(f)
        assert np.array_equal(out[:, 0], f.coef[:, 0])
        assert np.all(out[mask, 2] == 0)
        assert np.array_equal(out[~mask], f.coef[~mask])

    def test_k0_untouched(self):
        mesh = Mesh1D.uniform(0, 1, 5)
        coef = np.ones((5, 1, 3))
        assert not np.any(detect_trouble_coef(coef, basis_for(1, 0), mesh, LimiterParams(), False))
        assert trouble_cell_limit(coef, basis_for(1, 0), mesh, AIR) is coef

    @pytest.mark.parametrize("periodic", [False, True])
    def test_compiled_2d_matches_numpy(self, periodic, rng):
        mesh = Mesh2D.uniform(((0, 1), (0, 1)), 10, 8)
        b = basis_for(2, 2)
        # smooth background with a step so that some, not all, cells are flagged
        def state(x, y):
            rho = 1.5 + 0.3 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y) + np.where(x > 0.55, 1.0, 0.0)
            p = 2.0 + 0.2 * np.cos(2 * np.pi * (x + y))
            u, v = 0.3 * np.sin(2 * np.pi * y), 0.1 + 0 * x
            return np.stack([rho, rho * u, rho * v, p / 0.4 + 0.5 * rho * (u * u + v * v)], -1)

        coef = l2_project(state, mesh, 2, quad_points=6).coef
        params = LimiterParams(tvb_m=10.0)
        mask = detect_trouble_coef(coef, b, mesh, params, periodic)
        assert 0 < mask.sum() < mask.size
        expect = characteristic_limit_coef(coef, b, mesh, mask, AIR, params, periodic)
        got = trouble_cell_limit(coef, b, mesh, AIR, params, periodic)
        assert np.allclose(got, expect, rtol=1e-12, atol=1e-14)
