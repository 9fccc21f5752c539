"""
Tests for the Euler equations, numerical fluxes and the exact Riemann solver
"""
import numpy as np
import pytest

from src.common.exceptions import ConfigurationError, InvalidStateError
from src.common.models import FluxKind
from src.numerics.euler import (
    GAMMA,
    cons_to_prim,
    get_flux_function,
    hlle_flux,
    max_wavespeed,
    physical_flux,
    post_shock_state,
    pressure,
    prim_to_cons,
    roe_flux,
)
from src.numerics.exact_riemann import ExactRiemannSolver, PrimState1D
from src.solver.boundary import BoundarySet, make_boundary

NORMALS = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.6, -0.8])]


def random_states(rng, count=20):
    prim = np.column_stack([
        rng.uniform(0.2, 3.0, count),
        rng.uniform(-2.0, 2.0, count),
        rng.uniform(-2.0, 2.0, count),
        rng.uniform(0.1, 5.0, count),
    ])
    return prim_to_cons(prim)


def test_prim_cons_inverse(rng):
    w = random_states(rng)
    np.testing.assert_allclose(prim_to_cons(cons_to_prim(w)), w, rtol=1e-13)


def test_pressure_rejects_non_physical():
    w = prim_to_cons(np.array([1.0, 0.0, 0.0, 1.0]))
    w[3] = -1.0
    with pytest.raises(InvalidStateError):
        pressure(w)
    assert pressure(w, check=False) < 0.0


def test_wave_speed_at_rest():
    w = prim_to_cons(np.array([1.0, 0.0, 0.0, 1.0]))
    assert max_wavespeed(w) == pytest.approx(np.sqrt(GAMMA))


def test_wave_speed_mach3_inflow():
    w = prim_to_cons(np.array([1.4, 3.0, 0.0, 1.0]))
    assert max_wavespeed(w) == pytest.approx(4.0)


@pytest.mark.parametrize("flux", [roe_flux, hlle_flux])
@pytest.mark.parametrize("normal", NORMALS)
def test_flux_consistency(rng, flux, normal):
    w = random_states(rng)
    np.testing.assert_allclose(flux(w, w, normal), physical_flux(w, normal), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("flux", [roe_flux, hlle_flux])
@pytest.mark.parametrize("normal", NORMALS)
def test_flux_antisymmetry(rng, flux, normal):
    wL = random_states(rng)
    wR = random_states(rng)
    np.testing.assert_allclose(flux(wL, wR, normal), -flux(wR, wL, -normal), rtol=1e-11, atol=1e-11)


def test_roe_without_entropy_fix_is_consistent(rng):
    w = random_states(rng)
    np.testing.assert_allclose(
        roe_flux(w, w, NORMALS[0], entropy_fix=False),
        physical_flux(w, NORMALS[0]),
        atol=1e-12,
    )


def test_flux_factory():
    assert get_flux_function(FluxKind.HLLE) is hlle_flux
    roe = get_flux_function("roe")
    w = prim_to_cons(np.array([1.0, 0.3, 0.1, 1.0]))
    np.testing.assert_allclose(roe(w, w, NORMALS[0]), physical_flux(w, NORMALS[0]))
    with pytest.raises(ValueError):
        get_flux_function("rusanov")


def test_post_shock_state_mach10():
    rho2, speed2, p2, shock_speed = post_shock_state(10.0)
    assert rho2 == pytest.approx(8.0)
    assert p2 == pytest.approx(116.5)
    assert shock_speed == pytest.approx(10.0)
    assert speed2 == pytest.approx(8.25)


def test_sod_star_state():
    solver = ExactRiemannSolver(PrimState1D(1.0, 0.0, 1.0), PrimState1D(0.125, 0.0, 0.1))
    assert solver.p_star == pytest.approx(0.30313, abs=1e-5)
    assert solver.u_star == pytest.approx(0.92745, abs=1e-5)


def test_exact_solution_far_field_and_initial_data():
    solver = ExactRiemannSolver(PrimState1D(1.0, 0.0, 1.0), PrimState1D(0.125, 0.0, 0.1))
    rho, u, p = solver.solution(np.array([0.0, 1.0]), 0.2)
    np.testing.assert_allclose(rho, [1.0, 0.125])
    np.testing.assert_allclose(u, [0.0, 0.0])
    np.testing.assert_allclose(p, [1.0, 0.1])
    rho0, _, _ = solver.solution(np.array([0.4, 0.6]), 0.0)
    np.testing.assert_allclose(rho0, [1.0, 0.125])


def test_vacuum_rejected():
    with pytest.raises(ConfigurationError):
        ExactRiemannSolver(PrimState1D(1.0, -20.0, 0.1), PrimState1D(1.0, 20.0, 0.1))


def test_slip_wall_mirrors_normal_momentum():
    w = prim_to_cons(np.array([[1.2, 0.7, -0.3, 2.0]]))
    boundaries = BoundarySet({'wall': make_boundary('slip-wall')})
    normal = np.array([1.0, 0.0])
    ghost = boundaries.apply_bc(w, 'wall', normal, np.zeros(1), np.zeros(1), 0.0)
    np.testing.assert_allclose(ghost[:, 1], -w[:, 1])
    np.testing.assert_allclose(ghost[:, [0, 2, 3]], w[:, [0, 2, 3]])
    # no mass crosses the wall
    assert roe_flux(w, ghost, normal)[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_unknown_boundary_kind():
    with pytest.raises(ConfigurationError):
        make_boundary('sponge')
    with pytest.raises(ConfigurationError):
        BoundarySet({}).apply_bc(np.zeros((1, 4)), 'left', np.array([1.0, 0.0]), 0.0, 0.0, 0.0)
