"""pgfoil: airfoil lift surrogates with panel-method feature injection.

Pipeline pieces: NACA contour generation (geometry), a Hess-Smith
potential-flow panel method (panel), a feed-forward network that
concatenates extra features at a chosen hidden layer (net), seed
ensembles for epistemic uncertainty (ensemble), dataset construction
and normalization (data), and a CLI gluing it all together (cli).
"""

from .data import (
    Dataset,
    PolarRecord,
    PolarTruth,
    Sample,
    SyntheticTruth,
    build_dataset,
    load_dataset,
    parse_xfoil_polar,
    save_dataset,
    synth_truth,
)
from .ensemble import Ensemble, predict_with_uncertainty, train_ensemble
from .geometry import Airfoil, cosine_spacing, naca, naca4, naca5, read_dat, write_dat
from .net import (
    InjectionSpec,
    Network,
    NetworkSpec,
    TrainConfig,
    backward,
    forward,
    glorot_init,
    loss,
    train,
)
from .panel import (
    FlowCondition,
    PanelGeometry,
    PanelSolution,
    assemble_system,
    build_panels,
    force_coefficients,
    solve_dense,
    solve_flow,
)

__version__ = "0.1.0"

__all__ = [
    "Airfoil",
    "Dataset",
    "Ensemble",
    "FlowCondition",
    "InjectionSpec",
    "Network",
    "NetworkSpec",
    "PanelGeometry",
    "PanelSolution",
    "PolarRecord",
    "PolarTruth",
    "Sample",
    "SyntheticTruth",
    "TrainConfig",
    "assemble_system",
    "backward",
    "build_dataset",
    "build_panels",
    "cosine_spacing",
    "force_coefficients",
    "forward",
    "glorot_init",
    "load_dataset",
    "loss",
    "naca",
    "naca4",
    "naca5",
    "parse_xfoil_polar",
    "predict_with_uncertainty",
    "read_dat",
    "save_dataset",
    "solve_dense",
    "solve_flow",
    "synth_truth",
    "train",
    "train_ensemble",
    "write_dat",
]
