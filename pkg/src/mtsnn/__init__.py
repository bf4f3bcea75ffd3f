"""Multi-threaded Izhikevich spiking network kernel with benchmark harness."""

from mtsnn.neuron import FS, RS, IzhikevichParams, NeuronState
from mtsnn.network import Network
from mtsnn.kernel import KernelConfig, SimResult, Simulator, run

__all__ = [
    "FS",
    "RS",
    "IzhikevichParams",
    "NeuronState",
    "Network",
    "KernelConfig",
    "SimResult",
    "Simulator",
    "run",
]

__version__ = "0.1.0"
