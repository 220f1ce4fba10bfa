"""Two-bump test functions, interaction asymptotics and scan tables.

All translates are exact spectral shifts on the periodic box.  To keep
wrap-around under control every shift is limited to half the box half-width.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .energy import energy, nehari_project
from .grid import Field, frac_laplacian, translate
from .problem import ProblemSpec

logger = logging.getLogger(__name__)

# rows whose two-bump field keeps more than this fraction of its L^2 mass in
# the unit boundary layer of the box are flagged
BOUNDARY_MASS_TOL = 1e-6


# smallest half-width (before doubling) of the convolution quadrature box
MIN_CONV_BOX = 1000.0


class TranslationRangeError(ValueError):
    pass


class SubIntegrableExponent(ValueError):
    pass


# --- scan tables --------------------------------------------------------------

@dataclass
class ScanTable:
    columns: list
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise ValueError("rows must be a rectangular array matching the columns")
        if not np.all(np.isfinite(rows)):
            raise ValueError("scan table entries must be finite")
        self.rows = rows

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def __len__(self):
        return self.rows.shape[0]

    def to_csv(self, path) -> None:
        lines = [f"# {k}: {_meta_str(v)}" for k, v in self.metadata.items()]
        lines.append(",".join(self.columns))
        lines.extend(",".join(f"{x:.12g}" for x in row) for row in self.rows)
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def read_csv(cls, path) -> "ScanTable":
        meta, body = {}, []
        for line in Path(path).read_text().splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition(":")
                meta[key.strip()] = val.strip()
            elif line.strip():
                body.append(line)
        columns = body[0].split(",")
        rows = [[float(x) for x in ln.split(",")] for ln in body[1:]]
        return cls(columns, np.array(rows, dtype=float).reshape(-1, len(columns)), meta)


def _meta_str(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_meta_str(float(x)) if not isinstance(x, str) else x for x in v)
    return str(v)


# --- translates and interaction -----------------------------------------------

def _vec(d, dim: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(d, dtype=float), (dim,)).copy()


def _check_shift(u: Field, *shifts):
    lim = 0.5 * u.grid.half_width
    for d in shifts:
        if np.linalg.norm(d) > lim + 1e-12:
            raise TranslationRangeError(
                f"shift of length {np.linalg.norm(d):.6g} exceeds 0.5 L = {lim:.6g}")


def interaction(u_inf: Field, d, p: float) -> float:
    """A = int u^(p-1) * u(. - d), the nonlinear coupling of two translates."""
    d = _vec(d, u_inf.grid.dim)
    _check_shift(u_inf, d)
    shifted = translate(u_inf, d).values
    return float(u_inf.grid.cell_volume * np.sum(np.abs(u_inf.values) ** (p - 1) * shifted))


def hs_pairing(u: Field, v: Field, s: float) -> float:
    """Bilinear form int (|xi|^2s + 1) u_hat conj(v_hat) dxi."""
    lap = frac_laplacian(v, s).values
    return float(u.grid.cell_volume * np.sum(u.values * (lap + v.values)))


def interaction_scan(u_inf: Field, s: float, p: float, distances, direction=None) -> ScanTable:
    """A(d) along a ray, with the log-log slope and the fitted sandwich bounds.

    ``metadata`` carries ``slope`` (fitted exponent of A against |d|) and
    ``zeta_lower`` / ``zeta_upper``: min and max of |d|^(N+2s) A(d) over the
    scanned distances.
    """
    g = u_inf.grid
    e = np.zeros(g.dim)
    e[-1] = 1.0
    if direction is not None:
        e = _vec(direction, g.dim)
        e = e / np.linalg.norm(e)
    dist = np.asarray(distances, dtype=float)
    rate = g.dim + 2 * s
    vals = np.array([interaction(u_inf, r * e, p) for r in dist])
    scaled = dist**rate * vals
    slope = float(np.polyfit(np.log(dist), np.log(vals), 1)[0]) if dist.size > 1 else np.nan
    meta = {"slope": slope, "expected_slope": -rate,
            "zeta_lower": float(scaled.min()), "zeta_upper": float(scaled.max())}
    return ScanTable(["distance", "A", "scaled_A"], np.column_stack([dist, vals, scaled]), meta)


# --- two-bump fields ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwoBump:
    lam: float
    y: np.ndarray
    z: np.ndarray
    w: Field
    t_inf: float
    J_value: float
    boundary_mass: float

    @property
    def flagged(self) -> bool:
        return self.boundary_mass > BOUNDARY_MASS_TOL


def limit_t_inf(lam: float, p: float) -> float:
    """Large-separation limit of the projection factor of the two-bump field."""
    return (((1 - lam) ** 2 + lam**2) / ((1 - lam) ** p + lam**p)) ** (1.0 / (p - 2.0))


def boundary_mass_fraction(u: Field, width: float = 1.0) -> float:
    g = u.grid
    layer = np.zeros(g.shape, dtype=bool)
    for c in g.coords:
        layer |= np.abs(c) >= g.half_width - width
    sq = u.values**2
    return float(np.sum(sq[layer]) / np.sum(sq))


def make_two_bump(prob: ProblemSpec, u_inf: Field, lam: float, y, z) -> TwoBump:
    """Project (1-lam) y*u_inf + lam z*u_inf onto the Nehari manifold of ``prob``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    g = prob.grid
    if u_inf.grid != g:
        raise ValueError("u_inf and problem live on different grids")
    y, z = _vec(y, g.dim), _vec(z, g.dim)
    _check_shift(u_inf, y, z, y - z)
    vals = np.zeros(g.shape)
    if lam < 1.0:
        vals += (1.0 - lam) * translate(u_inf, y).values
    if lam > 0.0:
        vals += lam * translate(u_inf, z).values
    w = Field(g, vals)
    proj = nehari_project(prob, w)
    J = energy(prob, proj.projected).J
    return TwoBump(float(lam), y, z, w, proj.t, J, boundary_mass_fraction(w))


def limit_energy(s: float, p: float, u_inf: Field) -> float:
    """J_inf(u_inf): the c_inf estimate carried by a computed limit ground state."""
    from .problem import limit_problem

    return energy(limit_problem(s, p, u_inf.grid), u_inf).J


def _unit_last(dim: int) -> np.ndarray:
    e = np.zeros(dim)
    e[-1] = 1.0
    return e


GEOMETRIES = ("near", "antipodal")


def energy_scan(prob: ProblemSpec, u_inf: Field, R_list, lambda_grid,
                geometry: str = "near", margin_fraction: float = 0.01):
    """J(t w) over R and lambda for y = R e_N and z on the sphere |z - y/3| = 4R/3.

    ``geometry="near"`` uses z = 5y/3 (|y - z| = 2R/3), ``"antipodal"`` uses
    z = -y (|y - z| = 2R); both satisfy |y|, |z| >= R and
    2R/3 <= |y - z| <= 2R.  The empirical R1 stored in the metadata is the
    smallest scanned R from which on every row clears 2 c_inf by at least
    ``margin_fraction * c_inf``.
    """
    if geometry not in GEOMETRIES:
        raise ValueError(f"geometry must be one of {GEOMETRIES}")
    g = prob.grid
    c_inf = limit_energy(prob.s, prob.p, u_inf)
    lams = np.asarray(lambda_grid, dtype=float)
    if lams.size == 0 or lams.min() > 0 or lams.max() < 1:
        raise ValueError("lambda grid must include the endpoints 0 and 1")
    e = _unit_last(g.dim)
    rows, flags, clears = [], [], []
    for R in R_list:
        R = float(R)
        if R > 0.25 * g.half_width + 1e-12:
            raise TranslationRangeError(f"R = {R} exceeds 0.25 L = {0.25 * g.half_width}")
        y = R * e
        z = (5.0 / 3.0) * y if geometry == "near" else -y
        worst = -np.inf
        for lam in lams:
            tb = make_two_bump(prob, u_inf, lam, y, z)
            margin = 2 * c_inf - tb.J_value
            rows.append([R, lam, tb.t_inf, limit_t_inf(lam, prob.p), tb.J_value, 2 * c_inf,
                         margin, float(tb.flagged)])
            flags.append(tb.flagged)
            worst = max(worst, tb.J_value)
        clears.append(2 * c_inf - worst >= margin_fraction * c_inf)
    R_arr = np.asarray(R_list, dtype=float)
    r1 = None
    for i in range(len(clears)):
        if all(clears[i:]):
            r1 = float(R_arr[i])
            break
    meta = {
        "c_inf": c_inf,
        "geometry": geometry,
        "margin_fraction": margin_fraction,
        "empirical_R1": "none" if r1 is None else r1,
        "flagged_rows": int(sum(flags)),
    }
    cols = ["R", "lambda", "t_inf", "t_inf_limit", "J", "two_c_inf", "margin", "boundary_flag"]
    return ScanTable(cols, np.array(rows), meta), r1


# --- weighted convolution estimate --------------------------------------------

def _conv_integral(sigma: float, tau: float, y: float, dim: int, box: float):
    def f_rad(x):
        return (1 + abs(x)) ** (-sigma) * (1 + abs(x - y)) ** (-tau)

    if dim == 1:
        pts = sorted({-box, 0.0, 0.5 * y, y, box})
        pieces = [integrate.quad(f_rad, a, b, limit=400, epsabs=0, epsrel=1e-11)
                  for a, b in zip(pts[:-1], pts[1:])]
        return sum(p[0] for p in pieces), sum(p[1] for p in pieces)

    # radial shells around the origin; |x - y|^2 = r^2 + y^2 - 2 r y cos(theta)
    def shell(r):
        if dim == 2:
            f = lambda th: (1 + np.sqrt(max(r * r + y * y - 2 * r * y * np.cos(th), 0.0))) ** (-tau)
            val = 2 * integrate.quad(f, 0, np.pi, limit=200, epsrel=1e-10)[0]
            return r * (1 + r) ** (-sigma) * val
        return r * r * (1 + r) ** (-sigma) * _sphere_mean_3d(r, y, tau)

    # geometric breakpoints keep each piece of the slowly decaying tail short
    far = (y + 1) * 2.0 ** np.arange(1, 64)
    pts = sorted({0.0, max(y - 1, 0.0), y, y + 1, box, *far[far < box].tolist()})
    pieces = [integrate.quad(shell, a, b, limit=200, epsrel=1e-9) for a, b in zip(pts[:-1], pts[1:])
              if b > a]
    return sum(p[0] for p in pieces), sum(p[1] for p in pieces)


def _rho_antiderivative(rho, tau):
    # int rho (1 + rho)^-tau d rho = int (1+rho)^(1-tau) - (1+rho)^-tau d rho
    def pw(x, k):
        return np.log(x) if k == 0 else x**k / k

    return pw(1 + rho, 2 - tau) - pw(1 + rho, 1 - tau)


def _sphere_mean_3d(r, y, tau):
    # int over the unit sphere of (1 + |r theta - y|)^-tau, via rho = |r theta - y|
    if r * y < 1e-12:
        return 4 * np.pi * (1 + max(r, y)) ** (-tau)
    F = _rho_antiderivative
    return 2 * np.pi / (r * y) * (F(r + y, tau) - F(abs(r - y), tau))


def _tail_bound(sigma, tau, dim, box):
    # for |x| > box >= 2|y|: (1 + |x - y|) >= (1 + |x|)/2, so the integrand is
    # at most 2^tau (1 + |x|)^-(sigma + tau)
    q = sigma + tau
    area = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}[dim]
    if q <= dim:
        return np.inf
    # int_box^inf r^(dim-1) (1+r)^-q dr <= (1+box)^(dim-q) / (q-dim)
    return area * 2.0**tau * (1 + box) ** (dim - q) / (q - dim)


def convolution_check(sigma: float, tau: float, y_list, dim: int = 1,
                      strict: bool = True, growth_tol: float = 0.05) -> ScanTable:
    """I(y) = int (1+|x|)^-sigma (1+|x-y|)^-tau dx and |y|^mu I(y), mu = min(sigma, tau).

    The quadrature box has half-width ``2 * max(|y|, MIN_CONV_BOX)``; ``tail_bound``
    bounds the neglected outer integral.  ``metadata['bounded']`` is true when
    over the upper half of the y range both max/median of |y|^mu I <= 3 and
    the log-log growth rate of |y|^mu I stays below ``growth_tol``.  With
    ``strict`` exponents <= N raise :class:`SubIntegrableExponent`; otherwise
    they are evaluated as a divergence probe.
    """
    if dim not in (1, 2, 3):
        raise ValueError("dim must be 1, 2 or 3")
    if strict and (sigma <= dim or tau <= dim):
        raise SubIntegrableExponent(f"need sigma, tau > N = {dim}; got ({sigma}, {tau})")
    ys = np.sort(np.abs(np.asarray(y_list, dtype=float)))
    mu = min(sigma, tau)
    box = 2.0 * max(float(ys.max()), MIN_CONV_BOX)
    tail = _tail_bound(sigma, tau, dim, box)
    rows = []
    for y in ys:
        val, err = _conv_integral(sigma, tau, float(y), dim, box)
        rows.append([y, val, y**mu * val, err, tail if np.isfinite(tail) else -1.0])
    rows = np.array(rows)
    upper = rows[ys.size // 2:]
    scaled = upper[:, 2]
    ratio = float(scaled.max() / np.median(scaled))
    pos = upper[:, 0] > 0
    growth = (float(np.polyfit(np.log(upper[pos, 0]), np.log(scaled[pos]), 1)[0])
              if pos.sum() >= 2 else 0.0)
    meta = {
        "sigma": sigma, "tau": tau, "mu": mu, "dim": dim, "box_half_width": box,
        "ratio": ratio, "growth": growth,
        "bounded": bool(ratio <= 3.0 and growth <= growth_tol),
    }
    return ScanTable(["y", "I", "scaled_I", "quad_error", "tail_bound"], rows, meta)


def convolution_slope(table: ScanTable) -> float:
    """Log-log slope of I(y) over the upper half of the scanned |y|."""
    y, I = table.column("y"), table.column("I")
    half = slice(len(y) // 2, None)
    return float(np.polyfit(np.log(y[half]), np.log(I[half]), 1)[0])


# --- superadditivity ----------------------------------------------------------

def superadditivity_defect(a, b, p: float):
    """a^p + b^p + p(a^(p-1) b + a b^(p-1)) - (a+b)^p."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    return a**p + b**p + p * (a ** (p - 1) * b + a * b ** (p - 1)) - (a + b) ** p


def superadditivity_check(p: float, sample_pairs, verify_pairs=None, seed: int = 0):
    """Smallest C >= 0 with (a+b)^p >= a^p + b^p + p(a^(p-1)b + ab^(p-1)) - C (ab)^(p/2).

    The estimate is the largest required C over ``sample_pairs``; it is then
    checked on ``verify_pairs`` (default: 2000 seeded uniform pairs on
    [0, 10]^2).  Returns ``(C_estimate, all_pass)``.
    """
    if not p > 2:
        raise ValueError("p must exceed 2")
    pairs = np.asarray(sample_pairs, dtype=float).reshape(-1, 2)
    if np.any(pairs < 0):
        raise ValueError("sample pairs must be nonnegative")
    a, b = pairs[:, 0], pairs[:, 1]
    both = (a > 0) & (b > 0)
    need = superadditivity_defect(a[both], b[both], p) / (a[both] * b[both]) ** (p / 2)
    C = max(0.0, float(need.max())) if need.size else 0.0
    if verify_pairs is None:
        verify_pairs = np.random.default_rng(seed).uniform(0.0, 10.0, size=(2000, 2))
    vp = np.asarray(verify_pairs, dtype=float).reshape(-1, 2)
    va, vb = vp[:, 0], vp[:, 1]
    lhs = (va + vb) ** p
    rhs = va**p + vb**p + p * (va ** (p - 1) * vb + va * vb ** (p - 1)) - C * (va * vb) ** (p / 2)
    scale = np.maximum(lhs, 1.0)
    return C, bool(np.all(lhs - rhs >= -1e-12 * scale))


# --- min-max level ------------------------------------------------------------

def sphere_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic unit vectors: both poles in 1-D, a circle in 2-D, Fibonacci points in 3-D."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = 2 * np.pi * np.arange(count) / count + np.pi / 2
        return np.column_stack([np.cos(th), np.sin(th)])
    i = np.arange(count) + 0.5
    zc = 1 - 2 * i / count
    r = np.sqrt(1 - zc**2)
    ph = np.pi * (1 + 5**0.5) * i
    return np.column_stack([r * np.cos(ph), r * np.sin(ph), zc])


def c0_upper_bound(prob: ProblemSpec, u_inf: Field, R: float, lambda_grid=None,
                   n_directions: int = 16):
    """Upper bound on the min-max level from the explicit surface gamma_2.

    gamma_2((1-lam) y + lam z) = t_inf((1-lam) y*u_inf + lam z*u_inf) with
    y = R e_N and z on the boundary sphere of the ball B_{4R/3}(y/3).  The bound
    is the largest J over the sampled (z, lambda) grid.
    """
    g = prob.grid
    lams = np.linspace(0, 1, 21) if lambda_grid is None else np.asarray(lambda_grid, float)
    c_inf = limit_energy(prob.s, prob.p, u_inf)
    y = R * _unit_last(g.dim)
    rows = []
    for theta in sphere_directions(g.dim, n_directions):
        z = y / 3.0 + (4.0 * R / 3.0) * theta
        for lam in lams:
            tb = make_two_bump(prob, u_inf, lam, y, z)
            rows.append([*z, lam, tb.t_inf, tb.J_value, c_inf, 2 * c_inf])
    rows = np.array(rows)
    jcol = 1 + g.dim + 1
    c0 = float(rows[:, jcol].max())
    meta = {
        "R": R, "c_inf": c_inf, "c0_bound": c0,
        "above_c_inf": bool(c0 > c_inf), "below_two_c_inf": bool(c0 < 2 * c_inf),
    }
    zcols = [f"z{i}" for i in range(g.dim)]
    table = ScanTable([*zcols, "lambda", "t_inf", "J", "c_inf", "two_c_inf"], rows, meta)
    return c0, table
