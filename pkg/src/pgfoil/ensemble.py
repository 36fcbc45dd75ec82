"""Deep ensembles: identically shaped networks trained from different
initialization seeds; the spread of their predictions is the epistemic
uncertainty estimate.

Only the initialization varies between members -- the training schedule
(config, shuffling seed, data) is shared -- so each member is fully
deterministic and members can be trained concurrently.  The worker
count comes from the PGFOIL_WORKERS environment variable (default 1);
results are independent of it.
"""

from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DivergenceError
from .net import (
    InjectionSpec,
    NetworkSpec,
    TrainConfig,
    forward,
    glorot_init,
    load_model,
    save_model,
    train,
)

ENSEMBLE_FORMAT = "pgfoil-ensemble 1"
MANIFEST_NAME = "manifest.json"
DEFAULT_SEEDS = tuple(range(1, 11))


@dataclass
class Ensemble:
    members: list               # trained Networks, one per seed
    config: TrainConfig
    member_seeds: list
    histories: list = field(default_factory=list)  # LossHistory per member

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        spec = self.members[0].spec
        if any(m.spec != spec for m in self.members):
            raise ValueError("ensemble members must share one network spec")

    @property
    def spec(self) -> NetworkSpec:
        return self.members[0].spec


def worker_count() -> int:
    try:
        workers = int(os.environ.get("PGFOIL_WORKERS", "1"))
    except ValueError:
        workers = 1
    return max(1, workers)


def train_ensemble(spec: NetworkSpec, train_data, config: TrainConfig, seeds) -> Ensemble:
    """Train one member per seed; identical data and config throughout.

    train_data is (geometry_features, injected_features, targets), already
    normalized.  Duplicate seeds are allowed but warned about, since they
    produce bitwise-identical members.
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    if len(set(seeds)) != len(seeds):
        warnings.warn(
            "duplicate seeds produce identical ensemble members", stacklevel=2
        )
    features, injected, targets = train_data

    def train_member(seed):
        member = glorot_init(spec, seed)
        try:
            return train(member, features, injected, targets, config)
        except DivergenceError as exc:
            raise DivergenceError(f"seed {seed}: {exc}") from exc

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(train_member, seeds))
    else:
        results = [train_member(seed) for seed in seeds]
    members = [network for network, _ in results]
    histories = [history for _, history in results]
    return Ensemble(members, config, seeds, histories)


def predict_with_uncertainty(ensemble: Ensemble, geometry_features, injected=None):
    """(mean, std) of member predictions; std is the population value.

    Dividing the variance by the member count keeps the estimate
    defined for a single-member ensemble (std 0).
    """
    preds = np.stack(
        [
            np.asarray(forward(m, geometry_features, injected), dtype=float).ravel()
            for m in ensemble.members
        ]
    )
    return preds.mean(axis=0), preds.std(axis=0)


def _member_filename(index: int) -> str:
    return f"member_{index:02d}.model"


def save_ensemble(ensemble: Ensemble, directory, extra=None) -> None:
    """Write member model files plus a deterministic JSON manifest.

    extra entries (mode, normalization statistics, dataset fingerprint,
    ...) are merged into the manifest by the caller that owns them.
    """
    os.makedirs(directory, exist_ok=True)
    member_files = []
    for i, member in enumerate(ensemble.members):
        filename = _member_filename(i)
        save_model(member, os.path.join(directory, filename))
        member_files.append(filename)
    spec = ensemble.spec
    manifest = {
        "format": ENSEMBLE_FORMAT,
        "seeds": ensemble.member_seeds,
        "members": member_files,
        "config": asdict(ensemble.config),
        "network": {
            "input_width": spec.input_width,
            "hidden_widths": list(spec.hidden_widths),
            "output_width": spec.output_width,
            "injection_layer": spec.injection.layer_index,
            "injection_width": spec.injection.injected_width,
            "activation": spec.activation,
        },
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(directory, MANIFEST_NAME), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_ensemble(directory):
    """Read an ensemble directory back; returns (Ensemble, manifest dict)."""
    with open(os.path.join(directory, MANIFEST_NAME)) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != ENSEMBLE_FORMAT:
        raise ValueError(f"{directory} is not a {ENSEMBLE_FORMAT!r} directory")
    members = [
        load_model(os.path.join(directory, name)) for name in manifest["members"]
    ]
    config = TrainConfig(**manifest["config"])
    ensemble = Ensemble(members, config, [int(s) for s in manifest["seeds"]])
    return ensemble, manifest


def spec_from_manifest(manifest) -> NetworkSpec:
    info = manifest["network"]
    return NetworkSpec(
        input_width=int(info["input_width"]),
        hidden_widths=tuple(int(w) for w in info["hidden_widths"]),
        output_width=int(info["output_width"]),
        injection=InjectionSpec(
            layer_index=int(info["injection_layer"]),
            injected_width=int(info["injection_width"]),
        ),
        activation=info["activation"],
    )
