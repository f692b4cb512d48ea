"""Polar outer codes concatenated with quantum LDPC CSS inner codes.

Modules:

- :mod:`polarcss.gf2`: packed GF(2) matrices and elimination
- :mod:`polarcss.polar`: polar construction, encoding and SC decoding
- :mod:`polarcss.css_ldpc`: CSS codes, bicycle construction, erasure and BP decoding
- :mod:`polarcss.channels`: quantum erasure and depolarizing channels
- :mod:`polarcss.concat`: the concatenated scheme
- :mod:`polarcss.baselines`: polar-only and ldpc-only comparison schemes
- :mod:`polarcss.sim`: Monte Carlo runs, sweeps, CSV, floor and complexity probes
"""

from .channels import ChannelModel, PauliErrorSample, depolarizing, quantum_erasure
from .concat import ConcatScheme, TrialOutcome
from .css_ldpc import CssCode, Outcome, Side, bicycle_construct, steane_code
from .polar import PolarCodeSpec, construct
from .sim import ConfigError, InnerSpec, SimConfig, SimResult, run, sweep

__version__ = "0.1.0"

__all__ = [
    "ChannelModel",
    "ConcatScheme",
    "ConfigError",
    "CssCode",
    "InnerSpec",
    "Outcome",
    "PauliErrorSample",
    "PolarCodeSpec",
    "Side",
    "SimConfig",
    "SimResult",
    "TrialOutcome",
    "bicycle_construct",
    "construct",
    "depolarizing",
    "quantum_erasure",
    "run",
    "steane_code",
    "sweep",
]
