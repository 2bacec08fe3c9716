from ._core import (
    ConfigurationError,
    FitError,
    InvalidParameter,
    MemoryModel,
    ParseError,
    RepeaterParams,
    UndefinedResult,
    direct_transmission_probability,
    estimate_success,
    fit,
    inversion_profile,
    link_herald_probability,
    memory_efficiency,
    optimize_links,
    pulse_memory_defaults,
    run_command,
    run_pulse,
    success_probability,
    sweep_distance,
)

__all__ = [
    "ConfigurationError",
    "FitError",
    "InvalidParameter",
    "MemoryModel",
    "ParseError",
    "RepeaterParams",
    "UndefinedResult",
    "direct_transmission_probability",
    "estimate_success",
    "fit",
    "inversion_profile",
    "link_herald_probability",
    "memory_efficiency",
    "optimize_links",
    "pulse_memory_defaults",
    "run_command",
    "run_pulse",
    "success_probability",
    "sweep_distance",
]
