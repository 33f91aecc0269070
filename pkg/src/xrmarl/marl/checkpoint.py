"""Versioned ``.npz`` checkpoints of a learner and its action filter."""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .actions import DisabledActionTable
from .learner import Hyperparams, QmixLearner

FORMAT_VERSION = 1


def save_checkpoint(path: str | Path, learner: QmixLearner, table: DisabledActionTable,
                    extra: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays: dict[str, np.ndarray] = {}
    for prefix, nets in (("agent", learner.agents), ("target_agent", learner.target_agents)):
        for n, net in enumerate(nets):
            for k, v in net.state_dict().items():
                arrays[f"{prefix}{n}/{k}"] = v
    for prefix, net in (("mixer", learner.mixer), ("target_mixer", learner.target_mixer)):
        for k, v in net.state_dict().items():
            arrays[f"{prefix}/{k}"] = v
    for i, acc in enumerate(learner.optimizer.accumulators):
        arrays[f"rmsprop/{i}"] = acc
    arrays["disabled"] = table.as_array()
    meta = {
        "format_version": FORMAT_VERSION,
        "hyperparams": asdict(learner.hp),
        "n_agents": learner.n_agents,
        "obs_dim": learner.agents[0].obs_dim,
        "state_dim": learner.mixer.state_dim,
        "train_steps": learner.train_steps,
        "n_accumulators": len(learner.optimizer.accumulators),
        **(extra or {}),
    }
    arrays["meta"] = np.array(json.dumps(meta, sort_keys=True))
    with path.open("wb") as fh:
        np.savez(fh, **arrays)
    return path


def load_checkpoint(path: str | Path) -> tuple[QmixLearner, DisabledActionTable, dict]:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('format_version')}")
        hp = Hyperparams(**meta["hyperparams"])
        learner = QmixLearner(meta["n_agents"], meta["obs_dim"], meta["state_dim"], hp)
        for prefix, nets in (("agent", learner.agents), ("target_agent", learner.target_agents)):
            for n, net in enumerate(nets):
                net.load_state_dict({k: data[f"{prefix}{n}/{k}"] for k in net.state_dict()})
        for prefix, net in (("mixer", learner.mixer), ("target_mixer", learner.target_mixer)):
            net.load_state_dict({k: data[f"{prefix}/{k}"] for k in net.state_dict()})
        learner.optimizer.accumulators = [np.array(data[f"rmsprop/{i}"])
                                          for i in range(meta["n_accumulators"])]
        learner.train_steps = meta["train_steps"]
        table = DisabledActionTable(meta["n_agents"], hp.n_levels)
        table.load(data["disabled"])
    return learner, table, meta
