"""Ground states by Nehari-projected gradient descent, plus diagnostics.

The descent direction is the H^s Riesz representative of the L^2 gradient,
``(|xi|^(2s) + 1)^(-1) grad J(u)``, which makes a unit step size natural on
every grid.  After each step the iterate is folded to ``|u|`` (unless the
odd sector is requested), symmetrized if asked, and rescaled onto the Nehari
manifold with the closed-form factor.  A backtracking line search on ``J``
keeps the energy non-increasing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, optimize

from .energy import (
    DegenerateNonlinearity,
    EnergyBreakdown,
    barycenter,
    energy,
    grad,
    nehari_project,
)
from .grid import Field, Grid, apply_multiplier
from .problem import ProblemSpec

logger = logging.getLogger(__name__)

SYMMETRIES = ("none", "even", "odd")


class InsufficientWindow(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    step_size: float = 1.0
    grad_tol: float = 1e-9
    nehari_tol: float = 1e-10
    backtrack: float = 0.5
    max_halvings: int = 40
    step_growth: float = 1.25
    max_step: float = 1.0
    armijo: float = 1e-4
    seed: int = 0
    perturbation: float = 0.0
    symmetry: str = "none"
    fold: bool = True
    window_radius: float = 1.0
    escape_fraction: float = 0.25
    track_delta: float = 0.05
    snapshot_every: int = 10

    def __post_init__(self):
        if self.symmetry not in SYMMETRIES:
            raise ValueError(f"symmetry must be one of {SYMMETRIES}")
        if not (self.grad_tol > 0 and self.nehari_tol > 0 and self.step_size > 0):
            raise ValueError("tolerances and step_size must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    energy: EnergyBreakdown
    grad_supnorm: float
    nehari_residual: float
    positive: bool
    sign_changing: bool
    decay_exponent_fit: float
    barycenter: list
    escape_detected: bool
    trajectory_summary: list = field(default_factory=list)

    def as_dict(self) -> dict:
        def num(x):
            x = float(x)
            return x if np.isfinite(x) else None

        return {
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "energy": {k: num(v) for k, v in self.energy.as_dict().items()},
            "grad_supnorm": num(self.grad_supnorm),
            "nehari_residual": num(self.nehari_residual),
            "positive": bool(self.positive),
            "sign_changing": bool(self.sign_changing),
            "decay_exponent_fit": num(self.decay_exponent_fit),
            "barycenter": [num(b) for b in self.barycenter],
            "escape_detected": bool(self.escape_detected),
            "trajectory_summary": [
                {
                    "iteration": int(r["iteration"]),
                    "J": num(r["J"]),
                    "grad_norm": num(r["grad_norm"]),
                    "center": [num(c) for c in r["center"]],
                }
                for r in self.trajectory_summary
            ],
        }


# --- initial data and symmetry ------------------------------------------------

def gaussian_guess(grid: Grid, center=0.0, width: float = 1.0) -> Field:
    c = np.broadcast_to(np.asarray(center, float), (grid.dim,))
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
    return Field(grid, np.exp(-r2 / (2 * width**2)))


def odd_guess(grid: Grid, width: float = 1.0) -> Field:
    """Positive bump at +L/2 and negative bump at -L/2 along the first axis."""
    c = np.zeros(grid.dim)
    c[0] = grid.half_width / 2
    v = gaussian_guess(grid, c, width) - gaussian_guess(grid, -c, width)
    # exact oddness on the torus, where the sample at -L is its own mirror image
    return Field(grid, symmetrize(v.values, "odd"))


def reflect(values: np.ndarray) -> np.ndarray:
    """v(-x) on the grid; index j maps to (n - j) mod n on every axis."""
    out = values
    for ax in range(values.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def symmetrize(values: np.ndarray, symmetry: str) -> np.ndarray:
    if symmetry == "even":
        return 0.5 * (values + reflect(values))
    if symmetry == "odd":
        return 0.5 * (values - reflect(values))
    return values


# --- local mass windows -------------------------------------------------------

def _ball_kernel_hat(grid: Grid, radius: float) -> np.ndarray:
    ind = (grid.radius <= radius).astype(float)
    # centre the indicator at index 0 so the convolution is unshifted
    ind = np.roll(ind, [-(grid.points_per_dim // 2)] * grid.dim, axis=tuple(range(grid.dim)))
    return np.fft.rfftn(ind)


def window_mass(u: Field, radius: float = 1.0, _kernel=None) -> np.ndarray:
    """L^2 mass of u in the ball B_radius(x) for every sample point x."""
    g = u.grid
    k = _ball_kernel_hat(g, radius) if _kernel is None else _kernel
    axes = tuple(range(g.dim))
    m = np.fft.irfftn(np.fft.rfftn(u.values**2) * k, s=g.shape, axes=axes) * g.cell_volume
    return np.maximum(m, 0.0)


def _point(grid: Grid, idx) -> np.ndarray:
    return np.array([grid.axis[i] for i in idx])


def dominant_center(u: Field, radius: float = 1.0, _kernel=None) -> np.ndarray:
    m = window_mass(u, radius, _kernel)
    return _point(u.grid, np.unravel_index(int(np.argmax(m)), m.shape))


# --- solver -------------------------------------------------------------------

def _prepare(values: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    if cfg.fold and cfg.symmetry != "odd":
        values = np.abs(values)
    return symmetrize(values, cfg.symmetry)


def _initial(prob: ProblemSpec, cfg: SolverConfig, initial: Field | None) -> Field:
    if initial is None:
        initial = odd_guess(prob.grid) if cfg.symmetry == "odd" else gaussian_guess(prob.grid)
    v = initial.values
    if cfg.perturbation:
        rng = np.random.default_rng(cfg.seed)
        bump = gaussian_guess(prob.grid, 0.0, 2.0).values
        v = v + cfg.perturbation * bump * rng.standard_normal(v.shape)
    return Field(prob.grid, _prepare(v, cfg))


def solve_ground_state(prob: ProblemSpec, cfg: SolverConfig | None = None,
                       initial: Field | None = None, keep_snapshots: bool = False):
    """Minimize J on the Nehari manifold starting from ``initial``.

    Returns ``(u, report)``; with ``keep_snapshots`` returns
    ``(u, report, snapshots)`` where snapshots are the iterates recorded every
    ``cfg.snapshot_every`` steps (used for bump tracking).
    """
    cfg = cfg or SolverConfig()
    g = prob.grid
    precond = 1.0 / (g.multiplier(2 * prob.s) + 1.0)
    kernel = _ball_kernel_hat(g, cfg.window_radius)
    dv = g.cell_volume

    u = nehari_project(prob, _initial(prob, cfg, initial)).projected
    e = energy(prob, u)
    gr = grad(prob, u).values
    tau = cfg.step_size
    traj, snaps = [], [u]
    converged = False
    it = 0
    for it in range(cfg.max_iters + 1):
        gsup = float(np.max(np.abs(gr)))
        neh = abs(e.v_norm_sq - e.nonlinear) / e.v_norm_sq
        traj.append({"iteration": it, "J": e.J, "grad_norm": gsup,
                     "center": dominant_center(u, cfg.window_radius, kernel)})
        if gsup <= cfg.grad_tol and neh <= cfg.nehari_tol:
            converged = True
            break
        if it == cfg.max_iters:
            break
        d = apply_multiplier(gr, g, precond)
        slope = dv * float(np.sum(gr * d))
        accepted = False
        for _ in range(cfg.max_halvings):
            try:
                trial = nehari_project(prob, Field(g, _prepare(u.values - tau * d, cfg))).projected
            except DegenerateNonlinearity:
                tau *= cfg.backtrack
                continue
            et = energy(prob, trial)
            # round-off allowance: J differences below ~1e-14 |J| are noise
            if et.J <= e.J - cfg.armijo * tau * slope + 1e-14 * abs(e.J):
                accepted = True
                break
            tau *= cfg.backtrack
        if not accepted:
            logger.info("line search stalled at iteration %d (tau=%.3e)", it, tau)
            break
        u, e = trial, et
        gr = grad(prob, u).values
        tau = min(tau * cfg.step_growth, cfg.max_step)
        if (it + 1) % cfg.snapshot_every == 0:
            snaps.append(u)

    if snaps[-1] is not u:
        snaps.append(u)
    report = _make_report(prob, cfg, u, e, gr, it, converged, traj, snaps)
    if keep_snapshots:
        return u, report, snaps
    return u, report


def solve_odd(prob: ProblemSpec, cfg: SolverConfig | None = None,
              initial: Field | None = None):
    """Minimize J over odd fields on the Nehari manifold."""
    cfg = cfg or SolverConfig(symmetry="odd")
    if cfg.symmetry != "odd":
        cfg = SolverConfig(**{**cfg.__dict__, "symmetry": "odd"})
    return solve_ground_state(prob, cfg, initial)


def _make_report(prob, cfg, u, e, gr, it, converged, traj, snaps) -> SolveReport:
    v = u.values
    positive = bool(np.min(v) > 0.0)
    sign_changing = bool(np.max(v) > 0 > np.min(v) and
                         min(np.max(v), -np.min(v)) > 1e-8 * np.max(np.abs(v)))
    decay = np.nan
    if positive and not sign_changing:
        try:
            decay = fit_decay_exponent(u, periodic_images=True).exponent
        except (InsufficientWindow, ValueError) as exc:
            logger.info("decay fit skipped: %s", exc)
    track = track_bumps(snaps, cfg.track_delta, cfg.window_radius, cfg.escape_fraction)
    return SolveReport(
        converged=converged,
        iterations=it,
        energy=e,
        grad_supnorm=float(np.max(np.abs(gr))),
        nehari_residual=abs(e.v_norm_sq - e.nonlinear) / e.v_norm_sq,
        positive=positive,
        sign_changing=sign_changing,
        decay_exponent_fit=decay,
        barycenter=[float(b) for b in barycenter(u, prob.p)],
        escape_detected=track.escape_detected,
        trajectory_summary=traj,
    )


# --- decay fit ----------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    exponent: float
    r_squared: float
    drift: float
    amplitude: float
    radii: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)

    @property
    def algebraic(self) -> bool:
        """True when a single power law describes the window."""
        return self.r_squared > 0.99 and abs(self.drift) < 0.5


def _radial_bins(u: Field, lo: float, hi: float, max_points: int):
    g = u.grid
    r = g.radius.ravel()
    vals = u.values.ravel()
    sel = np.flatnonzero((r >= lo) & (r <= hi))
    if sel.size > max_points:
        sel = sel[:: int(np.ceil(sel.size / max_points))]
    nbins = max(1, int(round((hi - lo) / g.spacing)))
    edges = np.linspace(lo, hi, nbins + 1)
    which = np.clip(np.digitize(r[sel], edges) - 1, 0, nbins - 1)
    count = np.bincount(which, minlength=nbins)
    keep = count > 0
    return sel, which, count, keep


def _bin_mean(x, which, count, keep):
    return (np.bincount(which, weights=x, minlength=count.size)[keep] / count[keep])


def _image_sum(points: np.ndarray, period: float, a: float, dim: int, reach: int) -> np.ndarray:
    # sum over the periodic lattice of (1 + |x - period k|)^-a, |k|_inf <= reach,
    # plus a continuum estimate of the remaining images
    rng = np.arange(-reach, reach + 1)
    shifts = np.stack(np.meshgrid(*([rng] * dim), indexing="ij"), -1).reshape(-1, dim) * period
    total = np.zeros(points.shape[0])
    for sh in shifts:
        total += (1.0 + np.linalg.norm(points - sh, axis=1)) ** (-a)
    rho = (reach + 0.5) * period
    if dim == 1:
        tail = 2.0 * rho ** (1 - a) / ((a - 1) * period)
    else:
        area = 2 * np.pi if dim == 2 else 4 * np.pi
        tail = area * rho ** (dim - a) / ((a - dim) * period**dim)
    return total + tail


def fit_decay_exponent(u: Field, window=(0.4, 0.8), periodic_images: bool = False,
                       min_bins: int = 8, max_points: int = 4000) -> DecayFit:
    """Least-squares power-law fit of the radially averaged tail of ``u``.

    The plain fit regresses ``log u`` on ``log(1 + |x|)`` over
    ``window * L``.  With ``periodic_images`` the model is the lattice sum
    ``C * sum_k (1 + |x - 2Lk|)^-a``, which is the tail shape of a decaying
    solution on the periodic box; the exponent reported is ``-a``.
    ``drift`` is the difference between the slopes fitted on the two halves
    of the window (plain model) and flags curvature in log-log coordinates.
    """
    g = u.grid
    lo, hi = window[0] * g.half_width, window[1] * g.half_width
    sel, which, count, keep = _radial_bins(u, lo, hi, max_points)
    if keep.sum() < min_bins:
        raise InsufficientWindow(f"only {keep.sum()} radial bins in [{lo}, {hi}]")
    vals = u.values.ravel()[sel]
    if np.any(vals <= 0):
        raise ValueError("decay fit needs a positive tail")
    r = _bin_mean(g.radius.ravel()[sel], which, count, keep)
    prof = _bin_mean(vals, which, count, keep)
    lr, lu = np.log1p(r), np.log(prof)

    half = lr.size // 2
    s1 = np.polyfit(lr[:half], lu[:half], 1)[0]
    s2 = np.polyfit(lr[half:], lu[half:], 1)[0]
    drift = float(s2 - s1)

    if not periodic_images:
        slope, icpt = np.polyfit(lr, lu, 1)
        pred = slope * lr + icpt
        exponent, amp = float(slope), float(np.exp(icpt))
    else:
        pts = np.stack([c.ravel()[sel] for c in g.coords], axis=1)
        period = 2 * g.half_width
        reach = {1: 200, 2: 12, 3: 4}[g.dim]

        def model(a):
            return np.log(_bin_mean(_image_sum(pts, period, a, g.dim, reach), which, count, keep))

        def cost(a):
            d = lu - model(a)
            return float(np.sum((d - d.mean()) ** 2))

        res = optimize.minimize_scalar(cost, bounds=(g.dim + 0.02, 20.0), method="bounded",
                                       options={"xatol": 1e-6})
        a = float(res.x)
        m = model(a)
        icpt = float(np.mean(lu - m))
        pred = m + icpt
        exponent, amp = -a, float(np.exp(icpt))
    ss_res = float(np.sum((lu - pred) ** 2))
    ss_tot = float(np.sum((lu - lu.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(exponent, r2, drift, amp, r, prof)


# --- bump tracking ------------------------------------------------------------

@dataclass
class BumpTrack:
    frames: list
    escape_detected: bool
    dominant_radii: list

    @property
    def counts(self) -> list:
        return [len(f) for f in self.frames]


def _local_maxima(m: np.ndarray, grid: Grid, radius: float, delta: float):
    size = 2 * int(np.ceil(radius / grid.spacing)) + 1
    mx = ndimage.maximum_filter(m, size=size, mode="wrap")
    peaks = np.argwhere((m >= mx) & (m >= delta))
    out, taken = [], []
    for idx in sorted(map(tuple, peaks), key=lambda i: -m[i]):
        x = _point(grid, idx)
        # plateaus give several equal maxima within one window: keep the first
        if any(np.linalg.norm(_torus_diff(x, y, grid)) <= radius for y in taken):
            continue
        taken.append(x)
        out.append((x, float(m[idx])))
    return out


def _torus_diff(x, y, grid: Grid):
    d = np.asarray(x) - np.asarray(y)
    P = 2 * grid.half_width
    return d - P * np.round(d / P)


def track_bumps(trajectory, delta: float, radius: float = 1.0,
                escape_fraction: float = 0.25) -> BumpTrack:
    """Centres of radius-``radius`` windows holding L^2 mass >= ``delta``.

    Escape is reported when the dominant centre's distance from the origin
    never decreases by more than one grid spacing and ends beyond
    ``escape_fraction * L``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    frames, dom = [], []
    kernel = None
    grid = None
    for u in trajectory:
        if u.grid != grid:
            grid = u.grid
            kernel = _ball_kernel_hat(grid, radius)
        m = window_mass(u, radius, kernel)
        bumps = _local_maxima(m, grid, radius, delta)
        frames.append(bumps)
        dom.append(float(np.linalg.norm(bumps[0][0])) if bumps else np.nan)
    escape = False
    d = np.asarray(dom)
    if grid is not None and d.size >= 2 and np.all(np.isfinite(d)):
        steps = np.diff(d)
        escape = bool(np.all(steps >= -grid.spacing) and d[-1] > escape_fraction * grid.half_width
                      and d[-1] > d[0])
    return BumpTrack(frames, escape, dom)
