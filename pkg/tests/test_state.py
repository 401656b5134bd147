import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from balancedg import DomainError, GeneralEOS, IdealGas, StiffenedGas, parse_eos
from balancedg.state import (PrimitiveState, alpha_max, alpha_n, cons_to_prim, internal_energy_functional,
                             is_admissible, physical_flux, prim_to_cons)
from conftest import G, inside, random_states

AIR = IdealGas(1.4)


class TestInternalEnergy:
    def test_zero_momentum(self):
        assert internal_energy_functional([1.0, 0.0, 2.5]) == 2.5

    def test_all_kinetic(self):
        assert internal_energy_functional([2.0, 2.0, 1.0]) == 0.0

    def test_hand_value(self):
        assert internal_energy_functional([7.0, -7.0, 3.85]) == pytest.approx(0.35, abs=1e-14)

    def test_zero_density_rejected(self):
        with pytest.raises(DomainError):
            internal_energy_functional([0.0, 1.0, 1.0])


class TestAdmissibility:
    def test_interior_state(self):
        assert is_admissible([1.0, 0.0, 2.5])

    def test_boundary_is_excluded(self):
        rep = is_admissible([1.0, 1.0, 0.5])
        assert not rep and rep.g_value == 0.0

    def test_negative_density(self):
        assert not is_admissible([-1.0, 0.0, 1.0])

    def test_nan_reports_inadmissible(self):
        assert not is_admissible([np.nan, 0.0, 1.0])

    def test_report_fields_consistent(self, rng):
        U = rng.normal(size=(500, 3))
        rep = is_admissible(U)
        assert np.array_equal(rep.admissible, rep.rho_ok & (rep.g_value > 0))


class TestConversions:
    def test_static_air(self):
        W = cons_to_prim([1.0, 0.0, 2.5], AIR)
        assert (W.rho, W.vel[0], W.pres) == (1.0, 0.0, pytest.approx(1.0, rel=1e-15))

    def test_moving_monatomic(self):
        W = cons_to_prim([1.0, 1.0, 1.0], IdealGas(5 / 3))
        assert W.vel[0] == 1.0 and W.pres == pytest.approx(1 / 3, rel=1e-15)

    def test_gamma_two(self):
        W = cons_to_prim([2.0, 0.0, 2.0], IdealGas(2.0))
        assert W.rho == 2.0 and W.pres == 2.0

    def test_prim_to_cons_examples(self):
        assert np.allclose(prim_to_cons(PrimitiveState(1.0, 0.0, 1.0), AIR), [1, 0, 2.5], rtol=1e-15)
        assert np.allclose(prim_to_cons(PrimitiveState(0.125, 0.0, 0.1), AIR), [0.125, 0, 0.25], rtol=1e-15)
        U = prim_to_cons(PrimitiveState(1.0, np.array([1.0, 1.0]), 4.5), IdealGas(5 / 3))
        assert np.allclose(U, [1, 1, 1, 7.75], rtol=1e-15)

    def test_rejects_bad_primitives(self):
        with pytest.raises(DomainError):
            prim_to_cons(PrimitiveState(1.0, 0.0, -1.0), AIR)
        with pytest.raises(DomainError):
            cons_to_prim([1.0, 2.0, 1.0], AIR)

    @pytest.mark.parametrize("eos", [IdealGas(1.4), StiffenedGas(4.4, 6e3),
                                     GeneralEOS(lambda r, p: p / (0.4 * r), lambda r, p: np.sqrt(1.4 * p / r))])
    def test_round_trip(self, eos, rng):
        U = random_states(rng, 2000 if eos.kind == "ideal" else 200, gamma=1.4)
        if isinstance(eos, StiffenedGas):
            rho, u = U[:, 0], U[:, 1] / U[:, 0]
            p = np.exp(rng.uniform(-5, 5, len(rho)))
            U = prim_to_cons(PrimitiveState(rho, u, p), eos)
        back = prim_to_cons(cons_to_prim(U, eos), eos)
        assert np.allclose(back, U, rtol=1e-12, atol=0)

    def test_parse_eos(self):
        assert parse_eos("ideal:1.4").gamma == 1.4
        s = parse_eos("stiffened:4.4,6e8")
        assert (s.gamma, s.p_inf) == (4.4, 6e8)
        with pytest.raises(DomainError):
            parse_eos("vdw:1")


class TestFluxAndSpeeds:
    def test_static_flux(self):
        assert np.allclose(physical_flux([1.0, 0.0, 2.5], AIR, 1.0), [0, 1, 0], atol=1e-15)

    def test_moving_flux(self):
        assert np.allclose(physical_flux([1.0, 1.0, 2.5], AIR, 1.0), [1, 1.8, 3.3], rtol=1e-14)

    def test_2d_flux_normal_y(self):
        assert np.allclose(physical_flux([1.0, 0.0, 0.0, 2.5], AIR, [0.0, 1.0]), [0, 0, 1, 0], atol=1e-15)

    def test_homogeneity(self, rng):
        U = random_states(rng, 300, dim=2)
        a = rng.uniform(0.01, 100, 300)[:, None]
        n = np.array([0.6, 0.8])
        assert np.allclose(physical_flux(a * U, AIR, n), a * physical_flux(U, AIR, n), rtol=1e-12)

    def test_alpha_max_examples(self):
        assert alpha_max([1.0, 0.0, 2.5], AIR) == pytest.approx(1.1832159566199232, rel=1e-14)
        assert alpha_max([1.0, 1.0, 3.0], AIR) == pytest.approx(1 + math.sqrt(1.4), rel=1e-14)

    def test_alpha_n_examples(self):
        U = prim_to_cons(PrimitiveState(1.0, np.array([3.0, 0.0]), 1.0), AIR)
        assert alpha_n(U, AIR, [0.0, 1.0]) == pytest.approx(math.sqrt(1.4), rel=1e-14)
        U = prim_to_cons(PrimitiveState(1.0, np.array([1.0, 1.0]), 1.0), AIR)
        assert alpha_n(U, AIR, [1.0, 0.0]) == pytest.approx(1 + math.sqrt(1.4), rel=1e-14)
        assert alpha_n([1.0, 0.5, 3.0], AIR, 1.0) == alpha_max([1.0, 0.5, 3.0], AIR)

    def test_general_signal_speed(self):
        eos = StiffenedGas(4.4, 0.0)
        rho, p = 2.0, 3.0
        e = eos.internal_energy(rho, p)
        expect = max(p / (rho * math.sqrt(2 * e)), math.sqrt(4.4 * p / rho))
        assert alpha_max([rho, 0.0, rho * e], eos) == pytest.approx(expect, rel=1e-14)


# ---------------------------------------------------------------- admissible-set lemmas

def test_convexity_lemma(rng):
    n = 100_000
    U1 = random_states(rng, n, dim=2)
    U0 = random_states(rng, n, dim=2)
    # push half of U0 onto the boundary of the set (zero internal energy)
    edge = rng.random(n) < 0.5
    U0[edge, -1] = 0.5 * np.sum(U0[edge, 1:3] ** 2, axis=1) / U0[edge, 0]
    lam = 1.0 - rng.random(n)  # (0, 1]
    mix = lam[:, None] * U1 + (1 - lam[:, None]) * U0
    g = G(mix)
    scale = mix[:, -1]
    assert np.all(mix[:, 0] > 0) and np.all(g > -1e-13 * scale)


def test_scale_invariance_lemma(rng):
    U = random_states(rng, 20_000, dim=2)
    lam = np.exp(rng.uniform(-30, 30, 20_000))
    assert np.all(inside(lam[:, None] * U))


def test_combination_lemma(rng):
    n = 20_000
    U1, U0 = random_states(rng, n), random_states(rng, n)
    l1 = np.exp(rng.uniform(-5, 5, n))
    l0 = np.where(rng.random(n) < 0.2, 0.0, np.exp(rng.uniform(-5, 5, n)))
    assert np.all(inside(l1[:, None] * U1 + l0[:, None] * U0))


@pytest.mark.parametrize("dim", [1, 2])
def test_source_control_lemma(rng, dim):
    n = 50_000
    U = random_states(rng, n, dim=dim)
    rho = U[:, 0]
    e = G(U) / rho
    a = rng.normal(size=(n, dim)) * np.exp(rng.uniform(-3, 3, (n, 1)))
    delta = rng.normal(size=n)
    bound = np.abs(delta) * np.linalg.norm(a, axis=1) / np.sqrt(2 * e)
    lam = bound * (1.0 + rng.random(n))  # any lambda at or above the bound
    lam[::7] = bound[::7]                 # and exactly on it
    hat = lam[:, None] * U
    hat[:, 1:-1] += delta[:, None] * rho[:, None] * a
    hat[:, -1] += delta * np.sum(U[:, 1:-1] * a, axis=1)
    # exact value rho e (1 + b/lam)(lam - b) >= 0; allow round-off relative to the terms
    g = G(hat)
    tol = 1e-11 * (np.abs(lam * U[:, -1]) + np.abs(delta * np.sum(U[:, 1:-1] * a, axis=1)))
    assert np.all(hat[:, 0] >= 0) and np.all(g >= -tol)


@pytest.mark.parametrize("dim", [1, 2])
def test_lf_flux_lemma(rng, dim):
    n = 50_000
    U = random_states(rng, n, dim=dim)
    theta = rng.uniform(0, 2 * np.pi, n)
    nrm = np.column_stack([np.cos(theta), np.sin(theta)]) if dim == 2 else np.sign(rng.normal(size=(n, 1)))
    an = alpha_n(U, AIR, nrm) if dim == 2 else alpha_max(U, AIR)
    lam = rng.uniform(-1, 1, n) / an
    F = physical_flux(U, AIR, nrm)
    assert np.all(inside(U - lam[:, None] * F))


@given(st.floats(1e-6, 1e6), st.floats(-1e3, 1e3), st.floats(1e-6, 1e6), st.floats(1.01, 5.0))
def test_prim_cons_round_trip_property(rho, u, p, gamma):
    eos = IdealGas(gamma)
    U = prim_to_cons(PrimitiveState(rho, u, p), eos)
    W = cons_to_prim(U, eos)
    assert W.rho == pytest.approx(rho, rel=1e-12)
    assert W.vel[0] == pytest.approx(u, rel=1e-9, abs=1e-9 * math.sqrt(p / rho))
    assert W.pres == pytest.approx(p, rel=1e-12 * (1 + rho * u * u / p) * 10)
