"""Hard YES/NO instance families for estimating maximum matching size
under vertex-pair queries, with exact EMD and matching oracles."""
from .params import ParamSet, desk_preset, g_eval, theoretical_preset, validate
from .construction import Instance, build_instance

__version__ = "0.1.0"

__all__ = [
    "Instance",
    "ParamSet",
    "build_instance",
    "desk_preset",
    "g_eval",
    "theoretical_preset",
    "validate",
]
