"""Hess-Smith panel method: constant-strength source panels plus one
global vortex strength, closed by the trailing-edge Kutta condition.

Freestream speed and chord are both 1, so every output is a
dimensionless coefficient.  The angle of attack is the only flow
parameter the inviscid solve uses; the Reynolds number is carried on
FlowCondition purely for dataset labeling.

Sign conventions (tied to the geometry module's clockwise point
ordering TE -> upper -> LE -> lower -> TE):

* panel direction t_j = (cos th_j, sin th_j) from node j to node j+1,
* outward normal n_j = (sin th_j, -cos th_j),
* the control point sees its own panel from the flow side, so the
  subtended angle of a panel at its own midpoint is -pi; that limit
  makes the source self-influence on the normal velocity q_i/2,
* the vortex strength tau is positive for clockwise circulation, which
  makes lift positive at positive incidence and gives the circulation
  cross-check cl = 2 * tau * perimeter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, SingularMatrixError
from .geometry import Airfoil

MIN_PANELS = 40
MAX_ALPHA_DEG = 30.0
_PIVOT_TOL = 1e-13
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FlowCondition:
    """Reynolds number and angle of attack of one sample."""

    reynolds: float
    alpha_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.reynolds) and self.reynolds > 0.0):
            raise ValueError(f"reynolds must be positive, got {self.reynolds}")
        if not math.isfinite(self.alpha_deg):
            raise ValueError("alpha_deg must be finite")


@dataclass(frozen=True)
class PanelGeometry:
    """Discretized contour: N panels between N+1 nodes."""

    nodes: np.ndarray           # (N+1, 2)
    control_points: np.ndarray  # (N, 2) panel midpoints
    lengths: np.ndarray         # (N,)
    orientations: np.ndarray    # (N,) panel inclination from +x axis, radians

    def __post_init__(self):
        for name in ("nodes", "control_points", "lengths", "orientations"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_panels(self) -> int:
        return len(self.lengths)


@dataclass(frozen=True)
class PanelSolution:
    """Solved surface singularity strengths and force coefficients."""

    source_strengths: np.ndarray   # (N,) per-panel source strength
    vortex_strength: float         # shared by all panels
    cp: np.ndarray                 # (N,) pressure coefficient at control points
    cl: float                      # lift coefficient (pressure integration)
    cdp: float                     # pressure-drag coefficient
    alpha_deg: float
    tangential_velocities: np.ndarray  # (N,) along each panel's own direction

    def __post_init__(self):
        for name in ("source_strengths", "cp", "tangential_velocities"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def segment_orientation(p0, p1) -> float:
    """Inclination of the segment p0 -> p1 measured from the +x axis."""
    return math.atan2(p1[1] - p0[1], p1[0] - p0[0])


def build_panels(airfoil: Airfoil) -> PanelGeometry:
    """Discretize the contour into panels with midpoint control points."""
    nodes = airfoil.points
    deltas = np.diff(nodes, axis=0)
    lengths = np.hypot(deltas[:, 0], deltas[:, 1])
    if len(lengths) < MIN_PANELS:
        raise GeometryError(
            f"need at least {MIN_PANELS} panels, got {len(lengths)}"
        )
    tiny = np.nonzero(lengths < 1e-12)[0]
    if tiny.size:
        raise GeometryError(f"zero-length panel at index {int(tiny[0])}")
    orientations = np.arctan2(deltas[:, 1], deltas[:, 0])
    controls = (nodes[:-1] + nodes[1:]) / 2.0
    return PanelGeometry(nodes, controls, lengths, orientations)


def _influence_matrices(geom: PanelGeometry):
    """Per-unit-strength velocity influence of every panel on every control point.

    Returns (normal_src, normal_vtx, tangent_src, tangent_vtx): the
    (N, N) source matrices and the (N,) vortex columns already summed
    over panels.
    """
    xc = geom.control_points[:, 0][:, None]
    yc = geom.control_points[:, 1][:, None]
    xn = geom.nodes[:-1, 0][None, :]
    yn = geom.nodes[:-1, 1][None, :]
    theta = geom.orientations
    sin_j, cos_j = np.sin(theta)[None, :], np.cos(theta)[None, :]
    lp = geom.lengths[None, :]

    # Control point i in the local frame of panel j (x* along the panel,
    # y* the left normal, which points into the body).
    dx = xc - xn
    dy = yc - yn
    xl = dx * cos_j + dy * sin_j
    yl = -dx * sin_j + dy * cos_j

    r1sq = xl**2 + yl**2
    r2sq = (xl - lp) ** 2 + yl**2
    log_ratio = 0.5 * np.log(r1sq / r2sq)
    beta = np.arctan2(yl, xl - lp) - np.arctan2(yl, xl)
    # Self-influence limits: log term vanishes, subtended angle is -pi
    # because the flow side is y* < 0 for a clockwise contour.
    np.fill_diagonal(log_ratio, 0.0)
    np.fill_diagonal(beta, -math.pi)

    rel = theta[:, None] - theta[None, :]
    sin_rel, cos_rel = np.sin(rel), np.cos(rel)

    normal_src = (log_ratio * sin_rel - beta * cos_rel) / _TWO_PI
    normal_vtx = ((beta * sin_rel + log_ratio * cos_rel) / _TWO_PI).sum(axis=1)
    tangent_src = (log_ratio * cos_rel + beta * sin_rel) / _TWO_PI
    tangent_vtx = ((beta * cos_rel - log_ratio * sin_rel) / _TWO_PI).sum(axis=1)
    return normal_src, normal_vtx, tangent_src, tangent_vtx


def _assemble(geom, influence, alpha_deg):
    normal_src, normal_vtx, tangent_src, tangent_vtx = influence
    n = geom.n_panels
    alpha = math.radians(alpha_deg)
    theta = geom.orientations

    a = np.empty((n + 1, n + 1))
    b = np.empty(n + 1)
    # Rows 1..N: zero normal velocity at each control point.
    a[:n, :n] = normal_src
    a[:n, n] = normal_vtx
    b[:n] = -np.sin(theta - alpha)
    # Row N+1: Kutta condition, tangential speeds on the two
    # trailing-edge panels equal and opposite along their directions.
    a[n, :n] = tangent_src[0] + tangent_src[-1]
    a[n, n] = tangent_vtx[0] + tangent_vtx[-1]
    b[n] = -(math.cos(theta[0] - alpha) + math.cos(theta[-1] - alpha))
    return a, b


def assemble_system(geom: PanelGeometry, alpha_deg: float):
    """Build the (N+1) x (N+1) linear system for N sources and one vortex."""
    return _assemble(geom, _influence_matrices(geom), alpha_deg)


def solve_dense(a, b) -> np.ndarray:
    """Gaussian elimination with partial pivoting on a dense system."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"rhs length {b.shape[0]} does not match matrix size {n}")
    for k in range(n):
        pivot_row = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[pivot_row, k]) < _PIVOT_TOL:
            raise SingularMatrixError(
                f"pivot {a[pivot_row, k]:.3e} below {_PIVOT_TOL:g} at column {k}"
            )
        if pivot_row != k:
            a[[k, pivot_row]] = a[[pivot_row, k]]
            b[[k, pivot_row]] = b[[pivot_row, k]]
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(factors, a[k, k + 1 :])
        a[k + 1 :, k] = 0.0
        b[k + 1 :] -= factors * b[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def force_coefficients(geom: PanelGeometry, cp, alpha_deg: float):
    """Integrate surface pressure into (cl, cdp).

    Body-axis force is -sum(cp_i * n_i * l_i); the lift coefficient is
    the component perpendicular to the freestream, the pressure-drag
    coefficient the parallel one.
    """
    cp = np.asarray(cp, dtype=float)
    if cp.shape != (geom.n_panels,):
        raise ValueError(
            f"cp must have one value per panel ({geom.n_panels}), got shape {cp.shape}"
        )
    # n_i * l_i = (dy_i, -dx_i) exactly, so the closed-contour sum telescopes.
    deltas = np.diff(geom.nodes, axis=0)
    fx = -float(np.sum(cp * deltas[:, 1]))
    fy = float(np.sum(cp * deltas[:, 0]))
    alpha = math.radians(alpha_deg)
    cl = fy * math.cos(alpha) - fx * math.sin(alpha)
    cdp = fx * math.cos(alpha) + fy * math.sin(alpha)
    return cl, cdp


def solve_flow(airfoil: Airfoil, alpha_deg: float) -> PanelSolution:
    """Solve the potential flow around the airfoil at the given incidence."""
    if not math.isfinite(alpha_deg):
        raise ValueError("alpha_deg must be finite")
    if abs(alpha_deg) > MAX_ALPHA_DEG:
        warnings.warn(
            f"alpha {alpha_deg:g} deg is outside the +-{MAX_ALPHA_DEG:g} deg "
            "range where an inviscid surface model is meaningful",
            stacklevel=2,
        )
    geom = build_panels(airfoil)
    influence = _influence_matrices(geom)
    a, b = _assemble(geom, influence, alpha_deg)
    solution = solve_dense(a, b)
    sources = solution[:-1]
    tau = float(solution[-1])

    _, _, tangent_src, tangent_vtx = influence
    alpha = math.radians(alpha_deg)
    vt = np.cos(geom.orientations - alpha) + tangent_src @ sources + tangent_vtx * tau
    cp = 1.0 - vt**2
    cl, cdp = force_coefficients(geom, cp, alpha_deg)
    return PanelSolution(sources, tau, cp, cl, cdp, alpha_deg, vt)


def circulation_lift(geom: PanelGeometry, vortex_strength: float) -> float:
    """Lift coefficient from total circulation: 2 * tau * perimeter."""
    return 2.0 * vortex_strength * float(np.sum(geom.lengths))
