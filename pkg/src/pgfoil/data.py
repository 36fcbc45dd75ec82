"""Datasets over (airfoil x Reynolds x alpha) grids.

Each sample pairs the flattened airfoil coordinates (all x then all y)
with a flow condition, the panel-method lift and pressure-drag
coefficients for that geometry and incidence, and a target lift
coefficient.  Targets come either from a synthetic truth oracle (so the
whole experiment runs without any external solver) or from parsed XFOIL
polar files.

Feature normalization is min-max to [-1, 1].  Reynolds number and
incidence use fixed ranges ([1e6, 4e6] and [-20, 20] deg); geometry x
uses [0, 1]; geometry y and the two panel features use ranges fitted on
the training split only, so no test information leaks into the
statistics.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import re as _re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NormalizationError, ParseError, SchemaError
from .geometry import Airfoil
from .panel import FlowCondition, solve_flow

log = logging.getLogger(__name__)

DATASET_FORMAT = "pgfoil-dataset 1"
TEST_AIRFOILS = frozenset({"NACA23012", "NACA23024"})
RE_RANGE = (1.0e6, 4.0e6)
ALPHA_RANGE = (-20.0, 20.0)
X_RANGE = (0.0, 1.0)

DEFAULT_RE_VALUES = (1.0e6, 2.0e6, 3.0e6, 4.0e6)
DEFAULT_ALPHA_VALUES = tuple(float(a) for a in range(-20, 21))

# Compact training roster: 4-digit and 5-digit families, 6-18% thickness.
DESK_TRAIN_ROSTER = (
    "0006", "0009", "0012", "0015", "0018",
    "2406", "2409", "2412", "2415", "2418",
    "4412", "4415", "4418",
    "21006", "21012", "21018",
    "22009", "22015",
    "23006", "23018",
    "24012", "25012",
)
TEST_ROSTER = ("23012", "23024")


def paper_train_roster():
    """Full-size roster: 168 training geometries across the same families."""
    thicknesses = [f"{t:02d}" for t in range(6, 19)]
    roster = []
    for camber in ("00", "14", "24", "34", "44", "25", "35", "45"):
        roster.extend(camber + t for t in thicknesses)
    for code in ("210", "220", "230", "240", "250"):
        roster.extend(code + t for t in thicknesses)
    roster.remove("23012")  # reserved for the test set
    return tuple(roster)


@dataclass(frozen=True)
class PolarRecord:
    """One row of an externally computed polar."""

    alpha_deg: float
    cl: float
    cd: float
    cdp: float
    cm: float

    def __post_init__(self):
        values = (self.alpha_deg, self.cl, self.cd, self.cdp, self.cm)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"polar record has non-finite fields: {values}")
        if self.cd < 0.0:
            raise ValueError(f"polar record has negative drag cd={self.cd}")


@dataclass(frozen=True)
class Sample:
    geometry_features: np.ndarray  # 2*n_points reals, x block then y block
    condition: FlowCondition
    panel_features: tuple | None   # (panel cl, panel cdp)
    target_cl: float
    split: str
    airfoil_name: str


def parse_xfoil_polar(text: str):
    """Parse an XFOIL polar save file into PolarRecords.

    The free-text header is skipped up to the column-header line
    (containing both "alpha" and "CL") and its dashed separator; each
    following row yields one record.  Columns beyond CM (transition
    locations) are ignored.
    """
    lines = text.splitlines()
    start = None
    for i, line in enumerate(lines):
        fields = line.split()
        if "alpha" in fields and "CL" in fields:
            if i + 1 < len(lines):
                sep = lines[i + 1].strip()
                if sep and set(sep) <= {"-", " "}:
                    start = i + 2
                    break
    if start is None:
        raise ParseError("no column header / separator line found in polar file")
    records = []
    for lineno in range(start, len(lines)):
        line = lines[lineno].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 5:
            raise ParseError(
                f"polar row needs 5 numeric columns, got {len(fields)}",
                line=lineno + 1,
            )
        try:
            values = [float(v) for v in fields[:5]]
        except ValueError:
            raise ParseError(
                f"could not parse polar row {line!r}", line=lineno + 1
            ) from None
        try:
            records.append(PolarRecord(*values))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno + 1) from None
    return records


def format_xfoil_polar(records, name="", reynolds=None) -> str:
    """Emit a polar in the same layout parse_xfoil_polar reads.

    Values are written with full precision, so emit-then-parse is the
    identity.
    """
    header = [
        "       XFOIL         Version 6.99",
        "",
        f" Calculated polar for: {name}",
        "",
    ]
    if reynolds is not None:
        mantissa = reynolds / 10 ** int(math.floor(math.log10(reynolds)))
        exponent = int(math.floor(math.log10(reynolds)))
        header.append(f" Mach =   0.000     Re =     {mantissa:.3f} e {exponent}     Ncrit =   9.000")
        header.append("")
    header.append("   alpha    CL        CD       CDp       CM     Top_Xtr  Bot_Xtr")
    header.append("  ------ -------- --------- --------- -------- -------- --------")
    body = [
        f"  {r.alpha_deg:.17g} {r.cl:.17g} {r.cd:.17g} {r.cdp:.17g} {r.cm:.17g}"
        for r in records
    ]
    return "\n".join(header + body) + "\n"


_POLAR_NAME_RE = _re.compile(r"Calculated polar for:\s*(\S.*?)\s*$", _re.MULTILINE)
_POLAR_RE_RE = _re.compile(r"\bRe\s*=\s*([0-9.]+)\s*e\s*([0-9]+)")


def read_polar_directory(directory):
    """Load every *.pol / *.txt polar in a directory.

    Returns {(airfoil name, reynolds): [PolarRecord, ...]}.  Name and
    Reynolds number are taken from the file header.
    """
    polars = {}
    for entry in sorted(os.listdir(directory)):
        if not entry.endswith((".pol", ".txt")):
            continue
        path = os.path.join(directory, entry)
        with open(path) as fh:
            text = fh.read()
        name_match = _POLAR_NAME_RE.search(text)
        re_match = _POLAR_RE_RE.search(text)
        if name_match is None or re_match is None:
            raise ParseError(
                f"{entry}: polar header must state the airfoil name and Re"
            )
        name = name_match.group(1).replace(" ", "").upper()
        reynolds = float(re_match.group(1)) * 10 ** int(re_match.group(2))
        polars[(name, reynolds)] = parse_xfoil_polar(text)
    return polars


@dataclass
class SyntheticTruth:
    """Deterministic stand-in for viscous-solver lift labels.

    Blends the panel-method lift coefficient with a crude post-stall
    model: target = s * cl_panel + (1 - s) * cl_stall, where
    s = 1 / (1 + exp((|alpha| - alpha_onset) / width)) and
    cl_stall = sign(alpha) * max(0, plateau * |cl_panel(alpha_onset)|
    - decay * (|alpha| - alpha_onset)).  The stall onset moves with the
    Reynolds number: onset_deg + re_slope_deg per decade of Re/1e6.

    The constants are invented; they exist to open a gap between the
    panel model and the labels beyond roughly +-10 degrees while the
    two agree closely below that.  Optional Gaussian label noise is off
    by default.
    """

    onset_deg: float = 10.0
    re_slope_deg: float = 1.3
    blend_width_deg: float = 1.5
    plateau: float = 0.85
    decay_per_deg: float = 0.02
    noise_std: float = 0.0
    seed: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)
    _onset_cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)

    def stall_onset(self, reynolds: float) -> float:
        return self.onset_deg + self.re_slope_deg * math.log10(reynolds / 1.0e6)

    def _onset_cl(self, airfoil: Airfoil, onset: float) -> float:
        key = (airfoil.name, round(onset, 12))
        if key not in self._onset_cache:
            self._onset_cache[key] = solve_flow(airfoil, onset).cl
        return self._onset_cache[key]

    def target_cl(self, airfoil: Airfoil, condition: FlowCondition, panel_cl=None):
        alpha = condition.alpha_deg
        if panel_cl is None:
            panel_cl = solve_flow(airfoil, alpha).cl
        onset = self.stall_onset(condition.reynolds)
        blend = 1.0 / (1.0 + math.exp((abs(alpha) - onset) / self.blend_width_deg))
        sign = 0.0 if alpha == 0.0 else math.copysign(1.0, alpha)
        stall = sign * max(
            0.0,
            self.plateau * abs(self._onset_cl(airfoil, onset))
            - self.decay_per_deg * (abs(alpha) - onset),
        )
        target = blend * panel_cl + (1.0 - blend) * stall
        if self.noise_std > 0.0:
            target += float(self._rng.normal(0.0, self.noise_std))
        return target


def synth_truth(airfoil: Airfoil, condition: FlowCondition) -> float:
    """Synthetic target lift coefficient with the default constants."""
    return SyntheticTruth().target_cl(airfoil, condition)


@dataclass
class PolarTruth:
    """Targets interpolated from externally supplied polars.

    polars maps (airfoil name, reynolds) to PolarRecords.  Lookups
    interpolate linearly in alpha; samples outside a polar's coverage
    (or with no polar at all) return None and are dropped by the
    builder.
    """

    polars: dict

    def _find(self, name, reynolds):
        for (polar_name, polar_re), records in self.polars.items():
            if polar_name == name and math.isclose(polar_re, reynolds, rel_tol=1e-6):
                return records
        return None

    def target_cl(self, airfoil, condition, panel_cl=None):
        records = self._find(airfoil.name, condition.reynolds)
        if not records:
            return None
        alphas = np.array([r.alpha_deg for r in records])
        cls = np.array([r.cl for r in records])
        order = np.argsort(alphas)
        alphas, cls = alphas[order], cls[order]
        alpha = condition.alpha_deg
        if alpha < alphas[0] or alpha > alphas[-1]:
            return None
        return float(np.interp(alpha, alphas, cls))


def _minmax(value, lo, hi):
    if hi - lo < 1e-300:
        return np.zeros_like(np.asarray(value, dtype=float))
    return (np.asarray(value, dtype=float) - lo) / (hi - lo) * 2.0 - 1.0


def _minmax_inverse(scaled, lo, hi):
    return lo + (np.asarray(scaled, dtype=float) + 1.0) * 0.5 * (hi - lo)


@dataclass(frozen=True)
class Normalization:
    """Per-feature-group affine maps into [-1, 1] with exact inverses."""

    y_range: tuple
    panel_cl_range: tuple | None
    panel_cdp_range: tuple | None
    re_range: tuple = RE_RANGE
    alpha_range: tuple = ALPHA_RANGE
    x_range: tuple = X_RANGE

    def normalize_geometry(self, geometry):
        geometry = np.asarray(geometry, dtype=float)
        half = geometry.shape[-1] // 2
        x_block = _minmax(geometry[..., :half], *self.x_range)
        y_block = _minmax(geometry[..., half:], *self.y_range)
        return np.concatenate([x_block, y_block], axis=-1)

    def denormalize_geometry(self, scaled):
        scaled = np.asarray(scaled, dtype=float)
        half = scaled.shape[-1] // 2
        x_block = _minmax_inverse(scaled[..., :half], *self.x_range)
        y_block = _minmax_inverse(scaled[..., half:], *self.y_range)
        return np.concatenate([x_block, y_block], axis=-1)

    def normalize_reynolds(self, reynolds):
        return _minmax(reynolds, *self.re_range)

    def denormalize_reynolds(self, scaled):
        return _minmax_inverse(scaled, *self.re_range)

    def normalize_alpha(self, alpha_deg):
        return _minmax(alpha_deg, *self.alpha_range)

    def denormalize_alpha(self, scaled):
        return _minmax_inverse(scaled, *self.alpha_range)

    def normalize_panel(self, panel):
        if self.panel_cl_range is None or self.panel_cdp_range is None:
            raise NormalizationError("panel-feature statistics were never fitted")
        panel = np.asarray(panel, dtype=float)
        return np.stack(
            [
                _minmax(panel[..., 0], *self.panel_cl_range),
                _minmax(panel[..., 1], *self.panel_cdp_range),
            ],
            axis=-1,
        )

    def denormalize_panel(self, scaled):
        if self.panel_cl_range is None or self.panel_cdp_range is None:
            raise NormalizationError("panel-feature statistics were never fitted")
        scaled = np.asarray(scaled, dtype=float)
        return np.stack(
            [
                _minmax_inverse(scaled[..., 0], *self.panel_cl_range),
                _minmax_inverse(scaled[..., 1], *self.panel_cdp_range),
            ],
            axis=-1,
        )

    def as_dict(self):
        return {
            "y_range": list(self.y_range),
            "panel_cl_range": list(self.panel_cl_range) if self.panel_cl_range else None,
            "panel_cdp_range": list(self.panel_cdp_range) if self.panel_cdp_range else None,
            "re_range": list(self.re_range),
            "alpha_range": list(self.alpha_range),
            "x_range": list(self.x_range),
        }

    @classmethod
    def from_dict(cls, data):
        def tup(value):
            return tuple(value) if value is not None else None

        return cls(
            y_range=tup(data["y_range"]),
            panel_cl_range=tup(data["panel_cl_range"]),
            panel_cdp_range=tup(data["panel_cdp_range"]),
            re_range=tup(data.get("re_range", RE_RANGE)),
            alpha_range=tup(data.get("alpha_range", ALPHA_RANGE)),
            x_range=tup(data.get("x_range", X_RANGE)),
        )


@dataclass
class Dataset:
    """Column-oriented sample store plus normalization statistics."""

    names: list                  # airfoil name per sample
    geometry: np.ndarray         # (S, 2*n_points)
    reynolds: np.ndarray         # (S,)
    alpha_deg: np.ndarray        # (S,)
    panel: np.ndarray | None     # (S, 2) panel cl, cdp; None if absent
    target: np.ndarray           # (S,)
    split: np.ndarray            # (S,) "train" / "validation" / "test"
    normalization: Normalization | None = None

    def __len__(self):
        return len(self.target)

    @property
    def n_points(self):
        return self.geometry.shape[1] // 2

    def indices(self, split: str) -> np.ndarray:
        return np.nonzero(self.split == split)[0]

    def sample(self, i: int) -> Sample:
        panel = tuple(self.panel[i]) if self.panel is not None else None
        return Sample(
            geometry_features=self.geometry[i],
            condition=FlowCondition(float(self.reynolds[i]), float(self.alpha_deg[i])),
            panel_features=panel,
            target_cl=float(self.target[i]),
            split=str(self.split[i]),
            airfoil_name=self.names[i],
        )

    def injected_features(self, mode: str, idx=None):
        """Normalized injected feature matrix for "ml" (Re, alpha) or
        "pgml" (Re, alpha, panel cl, panel cdp)."""
        if self.normalization is None:
            raise NormalizationError("dataset has no fitted normalization")
        if idx is None:
            idx = np.arange(len(self))
        columns = [
            self.normalization.normalize_reynolds(self.reynolds[idx]),
            self.normalization.normalize_alpha(self.alpha_deg[idx]),
        ]
        if mode == "pgml":
            if self.panel is None:
                raise SchemaError(
                    "dataset has no panel-method feature columns; "
                    "pgml mode needs panel_cl and panel_cdp"
                )
            scaled = self.normalization.normalize_panel(self.panel[idx])
            columns.extend([scaled[:, 0], scaled[:, 1]])
        elif mode != "ml":
            raise ValueError(f"mode must be 'ml' or 'pgml', got {mode!r}")
        return np.column_stack(columns)

    def matrices(self, mode: str, split="train"):
        """(normalized geometry, injected features, targets) for one split."""
        if self.normalization is None:
            raise NormalizationError("dataset has no fitted normalization")
        idx = self.indices(split)
        geometry = self.normalization.normalize_geometry(self.geometry[idx])
        return geometry, self.injected_features(mode, idx), self.target[idx]

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update("\x1f".join(self.names).encode())
        for arr in (self.geometry, self.reynolds, self.alpha_deg, self.target):
            digest.update(np.ascontiguousarray(arr).tobytes())
        if self.panel is not None:
            digest.update(np.ascontiguousarray(self.panel).tobytes())
        digest.update("\x1f".join(self.split.tolist()).encode())
        return digest.hexdigest()


def fit_normalization(dataset: Dataset) -> Normalization:
    """Min-max statistics from the training split only."""
    idx = dataset.indices("train")
    if idx.size == 0:
        raise NormalizationError("cannot fit normalization: no training samples")
    half = dataset.geometry.shape[1] // 2
    y_block = dataset.geometry[idx][:, half:]
    panel_cl_range = panel_cdp_range = None
    if dataset.panel is not None:
        panel = dataset.panel[idx]
        panel_cl_range = (float(panel[:, 0].min()), float(panel[:, 0].max()))
        panel_cdp_range = (float(panel[:, 1].min()), float(panel[:, 1].max()))
    return Normalization(
        y_range=(float(y_block.min()), float(y_block.max())),
        panel_cl_range=panel_cl_range,
        panel_cdp_range=panel_cdp_range,
    )


def geometry_features(airfoil: Airfoil) -> np.ndarray:
    """Flatten an airfoil into the network's input layout: x block, y block."""
    return np.concatenate([airfoil.x, airfoil.y])


def build_dataset(airfoils, re_values, alpha_values, truth, test_names=None) -> Dataset:
    """Cartesian product of the grids, with panel features computed once
    per (airfoil, alpha).

    The named holdout airfoils are tagged "test" no matter what grids
    were requested; NACA23012 and NACA23024 are always held out.
    Samples whose truth source returns None (polar coverage misses) are
    dropped with a logged count.
    """
    airfoils = list(airfoils)
    re_values = [float(r) for r in re_values]
    alpha_values = [float(a) for a in alpha_values]
    if not airfoils or not re_values or not alpha_values:
        raise ValueError("airfoils, re_values and alpha_values must be non-empty")
    names = [a.name for a in airfoils]
    if len(set(names)) != len(names):
        raise ValueError("airfoil names must be unique within a dataset")
    n_points = airfoils[0].n_points
    if any(a.n_points != n_points for a in airfoils):
        raise ValueError("all airfoils in a dataset must share one point count")
    holdout = TEST_AIRFOILS | {str(n) for n in (test_names or ())}

    def solve_airfoil(airfoil):
        return {alpha: solve_flow(airfoil, alpha) for alpha in alpha_values}

    workers = _builder_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            panel_solutions = list(pool.map(solve_airfoil, airfoils))
    else:
        panel_solutions = [solve_airfoil(a) for a in airfoils]

    rows_name, rows_geo, rows_re, rows_alpha = [], [], [], []
    rows_panel, rows_target, rows_split = [], [], []
    dropped = 0
    for airfoil, solutions in zip(airfoils, panel_solutions):
        features = geometry_features(airfoil)
        split = "test" if airfoil.name in holdout else "train"
        for reynolds in re_values:
            for alpha in alpha_values:
                solution = solutions[alpha]
                condition = FlowCondition(reynolds, alpha)
                target = truth.target_cl(airfoil, condition, panel_cl=solution.cl)
                if target is None:
                    dropped += 1
                    continue
                rows_name.append(airfoil.name)
                rows_geo.append(features)
                rows_re.append(reynolds)
                rows_alpha.append(alpha)
                rows_panel.append((solution.cl, solution.cdp))
                rows_target.append(target)
                rows_split.append(split)
    if dropped:
        log.warning("dropped %d samples outside truth-source coverage", dropped)
    if not rows_target:
        raise ValueError("no samples survived the truth-source lookup")
    dataset = Dataset(
        names=rows_name,
        geometry=np.array(rows_geo),
        reynolds=np.array(rows_re),
        alpha_deg=np.array(rows_alpha),
        panel=np.array(rows_panel),
        target=np.array(rows_target),
        split=np.array(rows_split),
    )
    if dataset.indices("train").size:
        dataset.normalization = fit_normalization(dataset)
    else:
        log.warning("dataset has no training samples; normalization left unfitted")
    return dataset


def _builder_workers() -> int:
    try:
        return max(1, int(os.environ.get("PGFOIL_WORKERS", "1")))
    except ValueError:
        return 1


def _float_cell(value) -> str:
    return f"{value:.10g}"


def save_dataset(dataset: Dataset, path) -> None:
    """Write the CSV (one row per sample) and its JSON sidecar.

    Columns: airfoil, re, alpha_deg, panel_cl, panel_cdp, target_cl,
    split, then x000.. and y000.. geometry blocks.  The sidecar at
    <path>.json holds the normalization statistics and provenance.
    """
    n_points = dataset.n_points
    header = ["airfoil", "re", "alpha_deg"]
    if dataset.panel is not None:
        header += ["panel_cl", "panel_cdp"]
    header += ["target_cl", "split"]
    header += [f"x{i:03d}" for i in range(n_points)]
    header += [f"y{i:03d}" for i in range(n_points)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(dataset)):
            row = [
                dataset.names[i],
                _float_cell(dataset.reynolds[i]),
                _float_cell(dataset.alpha_deg[i]),
            ]
            if dataset.panel is not None:
                row += [_float_cell(v) for v in dataset.panel[i]]
            row += [_float_cell(dataset.target[i]), str(dataset.split[i])]
            row += [_float_cell(v) for v in dataset.geometry[i]]
            writer.writerow(row)
    sidecar = {
        "format": DATASET_FORMAT,
        "n_samples": len(dataset),
        "n_points": n_points,
        "airfoils": sorted(set(dataset.names)),
        "normalization": dataset.normalization.as_dict()
        if dataset.normalization
        else None,
        "split_counts": {
            split: int(np.sum(dataset.split == split))
            for split in sorted(set(dataset.split.tolist()))
        },
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(path) -> Dataset:
    """Read a dataset CSV (and sidecar, when present) back into memory.

    Datasets without panel columns load fine but cannot feed pgml
    training.  Without a sidecar the normalization is refitted from the
    file's training rows.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty dataset file") from None
        columns = {name: i for i, name in enumerate(header)}
        required = ["airfoil", "re", "alpha_deg", "target_cl", "split"]
        missing = [c for c in required if c not in columns]
        if missing:
            raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
        has_panel = "panel_cl" in columns and "panel_cdp" in columns
        x_cols = [c for c in header if _re.fullmatch(r"x\d{3}", c)]
        y_cols = [c for c in header if _re.fullmatch(r"y\d{3}", c)]
        if not x_cols or len(x_cols) != len(y_cols):
            raise SchemaError(f"{path}: malformed geometry columns")
        geo_idx = [columns[c] for c in sorted(x_cols)] + [
            columns[c] for c in sorted(y_cols)
        ]
        names, geo, reynolds, alpha, panel, target, split = [], [], [], [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"row has {len(row)} cells, header has {len(header)}", line=lineno
                )
            try:
                names.append(row[columns["airfoil"]])
                reynolds.append(float(row[columns["re"]]))
                alpha.append(float(row[columns["alpha_deg"]]))
                if has_panel:
                    panel.append(
                        (float(row[columns["panel_cl"]]), float(row[columns["panel_cdp"]]))
                    )
                target.append(float(row[columns["target_cl"]]))
                split.append(row[columns["split"]])
                geo.append([float(row[i]) for i in geo_idx])
            except ValueError:
                raise ParseError("could not parse numeric cell", line=lineno) from None
    if not target:
        raise SchemaError(f"{path}: dataset has no sample rows")
    dataset = Dataset(
        names=names,
        geometry=np.array(geo),
        reynolds=np.array(reynolds),
        alpha_deg=np.array(alpha),
        panel=np.array(panel) if has_panel else None,
        target=np.array(target),
        split=np.array(split),
    )
    sidecar_path = str(path) + ".json"
    if os.path.exists(sidecar_path):
        with open(sidecar_path) as fh:
            sidecar = json.load(fh)
        if sidecar.get("normalization"):
            dataset.normalization = Normalization.from_dict(sidecar["normalization"])
    if dataset.normalization is None and dataset.indices("train").size:
        dataset.normalization = fit_normalization(dataset)
    return dataset
