from mtsnn.netmodels.chainfire import ChainfireConfig, build_chainfire
from mtsnn.netmodels.generators import GeneratorSpec, make_generator
from mtsnn.netmodels.io import load_network, network_from_dict, network_to_dict, save_network
from mtsnn.netmodels.synfire import SynfireConfig, build_synfire

__all__ = [
    "ChainfireConfig",
    "GeneratorSpec",
    "SynfireConfig",
    "build_chainfire",
    "build_synfire",
    "load_network",
    "make_generator",
    "network_from_dict",
    "network_to_dict",
    "save_network",
]
