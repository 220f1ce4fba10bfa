"""Energy functional, gradient, Nehari projection and barycenter."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .grid import Field, frac_laplacian
from .problem import ProblemSpec

logger = logging.getLogger(__name__)

# relative threshold below which int Q|u|^p counts as zero
DEN_RTOL = 1e-14


class DegenerateNonlinearity(ValueError):
    """int Q|u|^p vanishes, so t -> J(tu) has no interior maximum."""


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    nonlinear: float
    J: float
    v_norm_sq: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("kinetic", "potential", "nonlinear", "J", "v_norm_sq")}


@dataclass(frozen=True)
class NehariProjection:
    t: float
    projected: Field
    residual: float


def _check_grid(prob: ProblemSpec, u: Field):
    if u.grid != prob.grid:
        raise ValueError(f"field grid {u.grid} differs from problem grid {prob.grid}")


def signed_power(u: np.ndarray, q: float) -> np.ndarray:
    """sign(u)|u|^q, i.e. |u|^(q-1) u, continuous at 0 for q > 0."""
    return np.sign(u) * np.abs(u) ** q


def _terms(prob: ProblemSpec, v: np.ndarray):
    g = prob.grid
    dv = g.cell_volume
    lap = frac_laplacian(Field(g, v), prob.s).values
    kin = dv * float(np.sum(v * lap))
    pot = dv * float(np.sum(prob.v_field.values * v * v))
    nl = dv * float(np.sum(prob.q_field.values * np.abs(v) ** prob.p))
    return lap, kin, pot, nl


def energy(prob: ProblemSpec, u: Field) -> EnergyBreakdown:
    """J(u) = (kinetic + potential)/2 - nonlinear/p with its parts."""
    _check_grid(prob, u)
    _, kin, pot, nl = _terms(prob, u.values)
    vn = kin + pot
    return EnergyBreakdown(kin, pot, nl, 0.5 * vn - nl / prob.p, vn)


def energy_value(prob: ProblemSpec, u: Field) -> float:
    return energy(prob, u).J


def grad(prob: ProblemSpec, u: Field) -> Field:
    """L^2 gradient (-Delta)^s u + V u - Q|u|^(p-2) u."""
    _check_grid(prob, u)
    v = u.values
    lap = frac_laplacian(u, prob.s).values
    g = lap + prob.v_field.values * v - prob.q_field.values * signed_power(v, prob.p - 1)
    return Field(u.grid, g)


def nehari_residual(prob: ProblemSpec, u: Field) -> float:
    """J'(u)u = ||u||_V^2 - int Q|u|^p."""
    e = energy(prob, u)
    return e.v_norm_sq - e.nonlinear


def projection_scale(v_norm_sq: float, nonlinear: float, p: float, l_p_mass: float) -> float:
    if not nonlinear > DEN_RTOL * l_p_mass:
        raise DegenerateNonlinearity(
            f"int Q|u|^p = {nonlinear:.3e} is not positive (scale {l_p_mass:.3e})"
        )
    return (v_norm_sq / nonlinear) ** (1.0 / (p - 2.0))


def nehari_project(prob: ProblemSpec, u: Field) -> NehariProjection:
    """Scale u onto the Nehari manifold with the closed-form factor t_u."""
    _check_grid(prob, u)
    e = energy(prob, u)
    lp_mass = prob.grid.cell_volume * float(np.sum(np.abs(u.values) ** prob.p))
    t = projection_scale(e.v_norm_sq, e.nonlinear, prob.p, lp_mass)
    w = Field(u.grid, t * u.values)
    ew = energy(prob, w)
    res = abs(ew.v_norm_sq - ew.nonlinear) / ew.v_norm_sq
    return NehariProjection(t, w, res)


def nehari_identity_energy(prob: ProblemSpec, u: Field) -> float:
    """(1/2 - 1/p) ||u||_V^2, which equals J(u) on the Nehari manifold."""
    return (0.5 - 1.0 / prob.p) * energy(prob, u).v_norm_sq


def barycenter(u: Field, p: float) -> np.ndarray:
    """int (x/|x|) |u|^p dx / ||u||_p^p; the origin sample gets weight 0."""
    g = u.grid
    w = np.abs(u.values) ** p
    total = float(np.sum(w))
    if not total > 0:
        raise ValueError("barycenter of the zero field is undefined")
    r = g.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(r > 0, 1.0 / r, 0.0)
    return np.array([float(np.sum(w * x * inv)) / total for x in g.coords])
