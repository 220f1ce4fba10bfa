"""Problem instances: exponents, potentials V and Q, hypothesis checks."""
from __future__ import annotations

import hashlib
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import Field, Grid, make_grid

logger = logging.getLogger(__name__)

FAMILY_KINDS = ("constant_one", "algebraic_bump", "algebraic_dip", "gaussian", "custom_table")


class HypothesisWarning(UserWarning):
    """alpha lies outside the reduced window N+2s < alpha < min{2(N+2s), p(N+2s)/2}."""


@dataclass(frozen=True)
class HypothesisParams:
    kappa1: float = 0.0
    kappa2: float = 0.0
    alpha: float = np.inf

    def __post_init__(self):
        if self.kappa1 < 0 or self.kappa2 < 0:
            raise ValueError("kappa1 and kappa2 must be nonnegative")


@dataclass(frozen=True)
class PotentialFamily:
    """Concrete potential shapes.

    ``algebraic_bump``: ``1 + amplitude * (1 + |x - center|^2)^(-alpha/2)``,
    ``algebraic_dip``:  ``1 - amplitude * (1 + |x - center|^2)^(-alpha/2)``,
    ``gaussian``:       ``1 + amplitude * exp(-|x - center|^2)`` (amplitude may be negative),
    ``custom_table``:   samples read from ``table`` (a path).
    """

    kind: str = "constant_one"
    amplitude: float = 0.0
    alpha: float = 0.0
    center: tuple = ()
    table: str | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown potential family {self.kind!r}")
        if self.kind == "custom_table" and not self.table:
            raise ValueError("custom_table family needs a table path")

    def sample(self, grid: Grid) -> Field:
        if self.kind == "custom_table":
            tgrid, f = read_field(self.table)
            if tgrid != grid:
                raise ValueError(f"table grid {tgrid} does not match problem grid {grid}")
            return f
        if self.kind == "constant_one":
            return Field(grid, np.ones(grid.shape))
        c = np.zeros(grid.dim) if len(self.center) == 0 else np.asarray(self.center, float)
        if c.shape != (grid.dim,):
            raise ValueError(f"center must have {grid.dim} components")
        r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
        if self.kind == "gaussian":
            return Field(grid, 1.0 + self.amplitude * np.exp(-r2))
        prof = (1.0 + r2) ** (-self.alpha / 2.0)
        sign = 1.0 if self.kind == "algebraic_bump" else -1.0
        return Field(grid, 1.0 + sign * self.amplitude * prof)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    s: float
    p: float
    grid: Grid
    v_field: Field
    q_field: Field
    hyp: HypothesisParams = field(default_factory=HypothesisParams)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def is_limit(self) -> bool:
        return bool(np.all(self.v_field.values == 1.0) and np.all(self.q_field.values == 1.0))

    def limit(self) -> "ProblemSpec":
        """Same exponents and grid with V = Q = 1."""
        return limit_problem(self.s, self.p, self.grid)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.s!r} {self.p!r} {self.grid.descriptor()}".encode())
        h.update(np.ascontiguousarray(self.v_field.values).tobytes())
        h.update(np.ascontiguousarray(self.q_field.values).tobytes())
        return h.hexdigest()[:16]


def critical_exponent(dim: int, s: float) -> float:
    """Upper end of the admissible p range (inf when 2s >= N)."""
    return np.inf if dim <= 2 * s else 2.0 * dim / (dim - 2.0 * s)


def alpha_window(dim: int, s: float, p: float) -> tuple[float, float]:
    a = dim + 2 * s
    return a, min(2 * a, 0.5 * p * a)


def build_problem(s, p, grid: Grid, v_family=None, q_family=None, hyp=None) -> ProblemSpec:
    """Sample V and Q on ``grid`` and validate the instance."""
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    pc = critical_exponent(grid.dim, s)
    if not 2 < p < pc:
        raise ValueError(f"p = {p} outside the subcritical range (2, {pc})")
    v_family = v_family or PotentialFamily()
    q_family = q_family or PotentialFamily()
    hyp = hyp or HypothesisParams()
    v, q = v_family.sample(grid), q_family.sample(grid)
    if not np.min(v.values) > 0:
        raise ValueError(f"V must be positive; min sample {np.min(v.values):.6g}")
    if np.min(q.values) < 0:
        raise ValueError(f"Q must be nonnegative; min sample {np.min(q.values):.6g}")
    if np.isfinite(hyp.alpha):
        lo, hi = alpha_window(grid.dim, s, p)
        if not lo < hyp.alpha < hi:
            warnings.warn(
                f"alpha = {hyp.alpha} outside the window ({lo}, {hi})", HypothesisWarning,
                stacklevel=2,
            )
    return ProblemSpec(float(s), float(p), grid, v, q, hyp)


def limit_problem(s, p, grid: Grid) -> ProblemSpec:
    return build_problem(s, p, grid)


@dataclass
class HypothesisReport:
    v_positive: bool
    q_nonnegative: bool
    h_upper_v: bool
    h_lower_q: bool
    alpha_ok: bool
    alpha_in_window: bool
    margins: dict
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations


def check_hypotheses(prob: ProblemSpec) -> HypothesisReport:
    """Pointwise check of (V), (Q) and (H) on the grid samples.

    (H) is evaluated only where |x| >= 1.  Margins are the worst
    slack: ``min(1 + k1|x|^-a - V)`` and ``min(Q - 1 + k2|x|^-a)``.
    """
    g, hyp = prob.grid, prob.hyp
    v, q = prob.v_field.values, prob.q_field.values
    a_thr = g.dim + 2 * prob.s
    margins = {"inf_V": float(np.min(v)), "inf_Q": float(np.min(q))}
    violations = []
    if not margins["inf_V"] > 0:
        violations.append("V")
    if margins["inf_Q"] < 0:
        violations.append("Q")

    far = g.radius >= 1.0
    r = g.radius[far]
    alpha = hyp.alpha
    if np.isfinite(alpha):
        decay = r ** (-alpha)
    else:
        decay = np.zeros_like(r)
    upper = 1.0 + hyp.kappa1 * decay - v[far]
    lower = q[far] - 1.0 + hyp.kappa2 * decay
    margins["H_V"] = float(np.min(upper)) if r.size else 0.0
    margins["H_Q"] = float(np.min(lower)) if r.size else 0.0
    # round-off slack relative to the O(1) potential values
    tol = 1e-12
    h_v = margins["H_V"] >= -tol
    h_q = margins["H_Q"] >= -tol
    alpha_ok = alpha > a_thr
    if not h_v:
        violations.append("H:V<=1+kappa1|x|^-alpha")
    if not h_q:
        violations.append("H:Q>=1-kappa2|x|^-alpha")
    if not alpha_ok:
        violations.append("H:alpha>N+2s")
    lo, hi = alpha_window(g.dim, prob.s, prob.p)
    in_window = bool(lo < alpha < hi)
    return HypothesisReport(
        v_positive="V" not in violations,
        q_nonnegative="Q" not in violations,
        h_upper_v=bool(h_v),
        h_lower_q=bool(h_q),
        alpha_ok=bool(alpha_ok),
        alpha_in_window=in_window,
        margins=margins,
        violations=violations,
    )


# --- field table files --------------------------------------------------------

def write_field(path, u: Field) -> None:
    """One value per line in lexicographic order after a ``# grid N L n`` header."""
    g = u.grid
    lines = [f"# grid {g.dim} {g.half_width!r} {g.points_per_dim}"]
    lines.extend(repr(float(x)) for x in u.values.ravel())
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> tuple[Grid, Field]:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ValueError(f"{path}: missing '# grid N L n' header")
    parts = text[0].lstrip("#").split()
    if len(parts) != 4 or parts[0] != "grid":
        raise ValueError(f"{path}: malformed header {text[0]!r}")
    grid = make_grid(int(parts[1]), float(parts[2]), int(parts[3]))
    vals = [float(line) for line in text[1:] if line.strip()]
    if len(vals) != grid.size:
        raise ValueError(f"{path}: expected {grid.size} samples, found {len(vals)}")
    return grid, Field(grid, np.array(vals))
