"""NACA airfoil contour generation and Selig-style coordinate files.

Conventions used by every consumer in this package:

* coordinates are chord-normalized (chord = 1, dimensionless),
* points run trailing edge -> upper surface -> leading edge -> lower
  surface -> trailing edge (a clockwise loop),
* the point count is odd so the leading edge is a single shared node,
* the trailing edge is closed (thickness polynomial with the -0.1036
  final coefficient instead of the open-edge -0.1015).

Thickness is applied perpendicular to the camber line, which is the
exact construction and matters for thick sections.  Near the leading
edge of cambered airfoils that construction can push the upper-surface
x a fraction of a millichord below zero; those values are clamped back
to 0 so that all x stay inside [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ParseError, UnsupportedDesignationError

# Half-thickness polynomial y_t(x) = 5 t (a0 sqrt(x) + a1 x + ... + a4 x^4),
# closed trailing edge variant.
THICKNESS_COEFFS = (0.2969, -0.1260, -0.3516, 0.2843, -0.1036)

# Camber constants (m, k1) for the non-reflexed five-digit camber lines.
FIVE_DIGIT_CAMBER = {
    "210": (0.0580, 361.400),
    "220": (0.1260, 51.640),
    "230": (0.2025, 15.957),
    "240": (0.2900, 6.643),
    "250": (0.3910, 3.230),
}

DEFAULT_POINTS = 201
MIN_POINTS = 41
TRAILING_EDGE_GAP_TOL = 1e-6
_COORD_TOL = 1e-9


@dataclass(frozen=True)
class Airfoil:
    """Named closed 2-D contour, ordered TE -> upper -> LE -> lower -> TE."""

    name: str
    points: np.ndarray  # (n, 2) float64, read-only after construction

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise GeometryError("airfoil points must be an (n, 2) array")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def n_points(self) -> int:
        return len(self.points)


def cosine_spacing(n: int) -> np.ndarray:
    """n chordwise stations in [0, 1] clustered at both edges.

    x_k = (1 - cos(k*pi/(n-1))) / 2 for k = 0..n-1; strictly increasing
    with exact endpoints 0 and 1.
    """
    if n < 2:
        raise ValueError(f"need at least 2 stations, got {n}")
    k = np.arange(n)
    return (1.0 - np.cos(k * math.pi / (n - 1))) / 2.0


def _half_thickness(x: np.ndarray, thickness: float) -> np.ndarray:
    a0, a1, a2, a3, a4 = THICKNESS_COEFFS
    return 5.0 * thickness * (
        a0 * np.sqrt(x) + x * (a1 + x * (a2 + x * (a3 + x * a4)))
    )


def _camber_four_digit(x, max_camber, position):
    """Camber line and slope for the 4-digit parabolic-arc camber."""
    yc = np.zeros_like(x)
    dyc = np.zeros_like(x)
    if max_camber == 0.0:
        return yc, dyc
    m, p = max_camber, position
    fwd = x <= p
    yc[fwd] = m / p**2 * (2.0 * p * x[fwd] - x[fwd] ** 2)
    dyc[fwd] = 2.0 * m / p**2 * (p - x[fwd])
    aft = ~fwd
    yc[aft] = m / (1.0 - p) ** 2 * ((1.0 - 2.0 * p) + 2.0 * p * x[aft] - x[aft] ** 2)
    dyc[aft] = 2.0 * m / (1.0 - p) ** 2 * (p - x[aft])
    return yc, dyc


def _camber_five_digit(x, m, k1):
    """Camber line and slope for the 5-digit cubic/linear camber."""
    yc = np.zeros_like(x)
    dyc = np.zeros_like(x)
    fwd = x < m
    xf = x[fwd]
    yc[fwd] = k1 / 6.0 * (xf**3 - 3.0 * m * xf**2 + m**2 * (3.0 - m) * xf)
    dyc[fwd] = k1 / 6.0 * (3.0 * xf**2 - 6.0 * m * xf + m**2 * (3.0 - m))
    aft = ~fwd
    yc[aft] = k1 * m**3 / 6.0 * (1.0 - x[aft])
    dyc[aft] = -k1 * m**3 / 6.0
    return yc, dyc


def _assemble_contour(name, stations, yc, dyc, yt) -> Airfoil:
    theta = np.arctan(dyc)
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    xu = stations - yt * sin_t
    yu = yc + yt * cos_t
    xl = stations + yt * sin_t
    yl = yc - yt * cos_t
    # Perpendicular offset can undershoot x=0 by <1e-3 right at the nose of
    # cambered sections; clamp so the contour stays inside [0, 1].
    np.clip(xu, 0.0, 1.0, out=xu)
    np.clip(xl, 0.0, 1.0, out=xl)
    upper = np.column_stack([xu, yu])[::-1]          # TE .. LE
    lower = np.column_stack([xl, yl])[1:]            # LE excluded .. TE
    airfoil = Airfoil(name, np.vstack([upper, lower]))
    validate(airfoil)
    return airfoil


def _clean_designation(designation: str, length: int) -> str:
    digits = str(designation).strip().upper()
    if digits.startswith("NACA"):
        digits = digits[4:].strip()
    if len(digits) != length or not digits.isdigit():
        raise ParseError(
            f"designation {designation!r} is not a {length}-digit NACA code"
        )
    return digits


def _check_point_count(n_points: int) -> None:
    if n_points % 2 == 0:
        raise ValueError(f"point count must be odd, got {n_points}")
    if n_points < MIN_POINTS:
        raise ValueError(f"point count must be >= {MIN_POINTS}, got {n_points}")


def naca4(designation: str, n_points: int = DEFAULT_POINTS) -> Airfoil:
    """Generate a NACA 4-digit airfoil, e.g. naca4("2412").

    Digits: max camber in % of chord, camber position in tenths of
    chord, thickness in % of chord.  (n_points+1)/2 cosine-spaced
    stations per surface.
    """
    digits = _clean_designation(designation, 4)
    _check_point_count(n_points)
    max_camber = int(digits[0]) / 100.0
    position = int(digits[1]) / 10.0
    thickness = int(digits[2:4]) / 100.0
    if thickness == 0.0:
        raise ParseError(f"designation {designation!r} has zero thickness")
    if max_camber > 0.0 and position == 0.0:
        raise ParseError(
            f"designation {designation!r}: nonzero camber needs a nonzero position digit"
        )
    stations = cosine_spacing((n_points + 1) // 2)
    yc, dyc = _camber_four_digit(stations, max_camber, position)
    yt = _half_thickness(stations, thickness)
    yt[-1] = 0.0  # polynomial vanishes at x=1 by design; drop the fp residual
    return _assemble_contour("NACA" + digits, stations, yc, dyc, yt)


def naca5(designation: str, n_points: int = DEFAULT_POINTS) -> Airfoil:
    """Generate a non-reflexed NACA 5-digit airfoil, e.g. naca5("23012").

    The first three digits select the camber line (tabulated m, k1);
    the last two give thickness in % of chord.  Thickness distribution
    is shared with the 4-digit series.
    """
    digits = _clean_designation(designation, 5)
    _check_point_count(n_points)
    code = digits[:3]
    if code not in FIVE_DIGIT_CAMBER:
        supported = ", ".join(sorted(FIVE_DIGIT_CAMBER))
        raise UnsupportedDesignationError(
            f"camber-line code {code!r} not supported (have {supported})"
        )
    thickness = int(digits[3:5]) / 100.0
    if thickness == 0.0:
        raise ParseError(f"designation {designation!r} has zero thickness")
    m, k1 = FIVE_DIGIT_CAMBER[code]
    stations = cosine_spacing((n_points + 1) // 2)
    yc, dyc = _camber_five_digit(stations, m, k1)
    yt = _half_thickness(stations, thickness)
    yt[-1] = 0.0
    return _assemble_contour("NACA" + digits, stations, yc, dyc, yt)


def naca(designation: str, n_points: int = DEFAULT_POINTS) -> Airfoil:
    """Dispatch to naca4 or naca5 on designation length."""
    digits = str(designation).strip().upper()
    if digits.startswith("NACA"):
        digits = digits[4:].strip()
    if len(digits) == 4:
        return naca4(digits, n_points)
    if len(digits) == 5:
        return naca5(digits, n_points)
    raise ParseError(f"designation {designation!r} is not a 4- or 5-digit NACA code")


def validate(airfoil: Airfoil) -> None:
    """Check the contour invariants; raise GeometryError on violation.

    Files that do not follow the TE -> upper -> LE -> lower -> TE
    convention are rejected here rather than silently reordered.
    """
    pts = airfoil.points
    n = len(pts)
    if n < 5:
        raise GeometryError(f"airfoil has {n} points, need at least 5")
    if n % 2 == 0:
        raise GeometryError(f"airfoil point count must be odd, got {n}")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("airfoil contains non-finite coordinates")
    x, y = pts[:, 0], pts[:, 1]
    if x.min() < -_COORD_TOL or x.max() > 1.0 + _COORD_TOL:
        raise GeometryError("airfoil x coordinates outside [0, 1]")
    if abs(x[0] - 1.0) > _COORD_TOL or abs(x[-1] - 1.0) > _COORD_TOL:
        raise GeometryError("first and last points must sit at the trailing edge x=1")
    if abs(y[0] - y[-1]) > TRAILING_EDGE_GAP_TOL:
        raise GeometryError(
            f"trailing-edge gap {abs(y[0] - y[-1]):.3g} exceeds {TRAILING_EDGE_GAP_TOL:g}"
        )
    # Clockwise loop (upper surface first) has negative signed area.
    area2 = float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))
    if area2 >= 0.0:
        raise GeometryError(
            "contour is not ordered TE -> upper -> LE -> lower -> TE"
        )


def write_dat(airfoil: Airfoil) -> str:
    """Serialize to Selig format: a name line, then 'x y' pairs."""
    lines = [airfoil.name]
    for px, py in airfoil.points:
        lines.append(f"{px:.9f} {py:.9f}")
    return "\n".join(lines) + "\n"


def read_dat(text: str) -> Airfoil:
    """Parse a Selig coordinate file; inverse of write_dat to 1e-9.

    Blank lines and leading whitespace are tolerated.  Contours that
    break the package's ordering convention are rejected.
    """
    name = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if name is None:
            name = line
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(
                f"expected two coordinates, got {len(fields)} fields", line=lineno
            )
        try:
            rows.append((float(fields[0]), float(fields[1])))
        except ValueError:
            raise ParseError(f"could not parse coordinates {line!r}", line=lineno) from None
    if name is None:
        raise ParseError("file is empty")
    if len(rows) < 5:
        raise GeometryError(f"airfoil file has {len(rows)} points, need at least 5")
    airfoil = Airfoil(name, np.array(rows))
    validate(airfoil)
    return airfoil


def thickness_camber(airfoil: Airfoil):
    """(max thickness, its x, max |camber|, its x) from mirrored point pairs.

    Pairs point i on the upper surface with its station twin on the
    lower surface; thickness is the pair distance (exactly 2*y_t for
    generated sections), camber the pair midpoint height.
    """
    n = airfoil.n_points
    half = n // 2  # leading-edge index
    upper = airfoil.points[: half + 1]
    lower = airfoil.points[n - 1 : half - 1 : -1]  # TE..LE, matching upper order
    thickness = np.hypot(*(upper - lower).T)
    mid = (upper + lower) / 2.0
    it = int(np.argmax(thickness))
    ic = int(np.argmax(np.abs(mid[:, 1])))
    return (
        float(thickness[it]),
        float(mid[it, 0]),
        float(abs(mid[ic, 1])),
        float(mid[ic, 0]),
    )
