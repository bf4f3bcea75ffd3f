"""Network description as JSON. Synapses are stored as an explicit list in
insertion order, so a round trip rebuilds an identical connection table."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from mtsnn.netmodels.generators import GeneratorSpec
from mtsnn.network import Network
from mtsnn.neuron import IzhikevichParams

FORMAT = "mtsnn-network/1"


def network_to_dict(net: Network) -> dict:
    pre, post, w, d = net.synapse_arrays()
    return {
        "format": FORMAT,
        "name": net.name,
        "seed": net.seed,
        "synapse_mode": net.synapse_mode,
        "max_delay": net.max_delay,
        "metadata": net.metadata,
        "groups": [
            {
                "name": g.name,
                "size": g.size,
                "partition": g.partition,
                "polarity": g.polarity,
                "params": g.params.to_dict() if g.params is not None else None,
                "generator": g.generator.to_dict() if g.generator is not None else None,
            }
            for g in net.groups
        ],
        "synapses": {
            "pre": pre.tolist(),
            "post": post.tolist(),
            "weight": w.tolist(),
            "delay": d.tolist(),
        },
    }


def network_from_dict(doc: dict, freeze: bool = True) -> Network:
    if doc.get("format") != FORMAT:
        raise ValueError(f"unsupported network format {doc.get('format')!r}")
    net = Network(
        seed=doc["seed"], synapse_mode=doc["synapse_mode"], max_delay=doc["max_delay"], name=doc.get("name", "network")
    )
    net.metadata = dict(doc.get("metadata") or {})
    for g in doc["groups"]:
        if g.get("generator") is not None:
            net.add_generator(g["name"], g["size"], GeneratorSpec.from_dict(g["generator"]), partition=g["partition"])
        else:
            net.add_group(g["name"], g["size"], IzhikevichParams(**g["params"]), g["polarity"], g["partition"])
    s = doc["synapses"]
    if s["pre"]:
        net.add_synapses(
            np.array(s["pre"], dtype=np.int64),
            np.array(s["post"], dtype=np.int64),
            np.array(s["weight"], dtype=np.float64),
            np.array(s["delay"], dtype=np.int64),
        )
    return net.freeze() if freeze else net


def save_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net)))


def load_network(path) -> Network:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise OSError(f"cannot read network file {path}: {exc}") from exc
    return network_from_dict(doc)
