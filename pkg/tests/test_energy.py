import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from fraclab.energy import (
    DegenerateNonlinearity, barycenter, energy, energy_value, grad, nehari_identity_energy,
    nehari_project, nehari_residual,
)
from fraclab.grid import Field, inner, make_grid, translate
from fraclab.problem import PotentialFamily, ProblemSpec, build_problem, limit_problem


@pytest.fixture(scope="module")
def prob():
    g = make_grid(1, 16.0, 256)
    return build_problem(0.4, 3.5, g, PotentialFamily("gaussian", 0.3),
                         PotentialFamily("algebraic_dip", 0.2, 3.0))


def bumpy(grid, rng):
    c = rng.uniform(-3, 3, size=grid.dim)
    w = rng.uniform(0.6, 2.0)
    amp = rng.uniform(0.3, 2.0)
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
    wiggle = 1 + 0.3 * np.cos(rng.uniform(0.5, 2) * grid.coords[0])
    return Field(grid, amp * np.exp(-r2 / (2 * w * w)) * wiggle)


def test_zero_field(prob):
    e = energy(prob, Field.zeros(prob.grid))
    assert e.kinetic == e.potential == e.nonlinear == e.J == 0.0
    assert np.all(grad(prob, Field.zeros(prob.grid)).values == 0)


def test_plane_wave_terms():
    g = make_grid(1, 8.0, 128)
    pr = limit_problem(0.3, 4.0, g)
    k, a = 3 * g.dxi, 1.7
    u = Field(g, a * np.cos(k * g.axis))
    e = energy(pr, u)
    L = g.half_width
    assert np.isclose(e.kinetic, k**0.6 * a * a * L, rtol=1e-12)
    assert np.isclose(e.potential, a * a * L, rtol=1e-12)
    nl = integrate.quad(lambda x: (a * np.cos(k * x)) ** 4, -L, L, limit=200)[0]
    assert np.isclose(e.nonlinear, nl, rtol=1e-10)
    assert np.isclose(e.J, 0.5 * (e.kinetic + e.potential) - nl / 4, rtol=1e-10)


def test_gradient_matches_finite_differences(prob, rng):
    u, v = bumpy(prob.grid, rng), bumpy(prob.grid, rng)
    eps = 1e-5
    fd = (energy_value(prob, u + Field(prob.grid, eps * v.values))
          - energy_value(prob, u - Field(prob.grid, eps * v.values))) / (2 * eps)
    an = inner(grad(prob, u), v)
    assert abs(fd - an) <= 1e-6 * max(1.0, abs(an))


def test_projection_of_balanced_field_is_identity(prob, rng):
    w = nehari_project(prob, bumpy(prob.grid, rng)).projected
    again = nehari_project(prob, w)
    assert abs(again.t - 1.0) < 1e-12


def test_projection_factor_root_find_oracle():
    g = make_grid(1, 32.0, 512)
    pr = limit_problem(0.5, 3.0, g)
    u = Field.from_function(g, lambda x: 0.7 * np.exp(-x**2 / 2))
    e = energy(pr, u)
    dJ = lambda t: t * e.v_norm_sq - t ** (pr.p - 1) * e.nonlinear
    t_root = optimize.brentq(dJ, 1e-3, 1e3, xtol=1e-14, rtol=1e-14)
    assert abs(nehari_project(pr, u).t - t_root) <= 1e-10 * t_root


def test_projection_scale_covariance(prob, rng):
    u = bumpy(prob.grid, rng)
    a = nehari_project(prob, u)
    b = nehari_project(prob, Field(prob.grid, 3.0 * u.values))
    assert np.isclose(a.t, 3.0 * b.t, rtol=1e-12)
    assert np.allclose(a.projected.values, b.projected.values, rtol=1e-12, atol=1e-14)


def test_residual_sign(prob, rng):
    u = nehari_project(prob, bumpy(prob.grid, rng)).projected
    small = Field(prob.grid, 0.5 * u.values)
    big = Field(prob.grid, 2.0 * u.values)
    assert nehari_residual(prob, small) > 0 > nehari_residual(prob, big)
    assert nehari_residual(prob, Field.zeros(prob.grid)) == 0.0


def test_degenerate_nonlinearity():
    g = make_grid(1, 8.0, 64)
    pr = limit_problem(0.5, 3.0, g)
    with pytest.raises(DegenerateNonlinearity):
        nehari_project(pr, Field.zeros(g))
    # Q vanishes where u lives
    q = Field(g, (np.abs(g.axis) > 4).astype(float))
    dead = ProblemSpec(0.5, 3.0, g, pr.v_field, q)
    with pytest.raises(DegenerateNonlinearity):
        nehari_project(dead, Field(g, np.where(np.abs(g.axis) < 2, np.cos(g.axis * np.pi / 4), 0)))


def test_nehari_identity(prob, rng):
    w = nehari_project(prob, bumpy(prob.grid, rng)).projected
    assert np.isclose(energy_value(prob, w), nehari_identity_energy(prob, w), rtol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_projection_lands_on_manifold(seed):
    g = make_grid(2, 8.0, 32)
    pr = build_problem(0.6, 3.0, g, PotentialFamily("algebraic_bump", 0.5, 3.0))
    proj = nehari_project(pr, bumpy(g, np.random.default_rng(seed)))
    e = energy(pr, proj.projected)
    assert abs(e.v_norm_sq - e.nonlinear) <= 1e-10 * e.v_norm_sq
    assert proj.residual <= 1e-10


def test_barycenter_cases():
    g = make_grid(2, 16.0, 64)
    radial = Field(g, np.exp(-g.radius**2))
    assert np.linalg.norm(barycenter(radial, 3.0)) < 1e-12
    norms = []
    for R in (2.0, 4.0, 7.0):
        b = barycenter(translate(radial, [R, 0.0]), 3.0)
        assert b[0] > 0 and abs(b[1]) < 1e-12
        norms.append(np.linalg.norm(b))
    assert norms[0] < norms[1] < norms[2] and norms[2] > 0.95
    pair = translate(radial, [3.0, 1.0]) + translate(radial, [-3.0, -1.0])
    assert np.linalg.norm(barycenter(pair, 3.0)) < 1e-12
    with pytest.raises(ValueError):
        barycenter(Field.zeros(g), 3.0)
