"""usc_lab: a capacity-expansion LP laboratory for the unintended storage
cycling artifact induced by renewable-share constraints."""

from .model import (
    CONVENTIONAL,
    RENEWABLE,
    PolicySpec,
    Scenario,
    Storage,
    Technology,
    Violation,
    annualize,
    default_demand,
    default_scenario,
    parse_variant,
    synth_profiles,
    validate_scenario,
    variant_label,
)

__all__ = [
    "CONVENTIONAL",
    "RENEWABLE",
    "PolicySpec",
    "Scenario",
    "Storage",
    "Technology",
    "Violation",
    "annualize",
    "default_demand",
    "default_scenario",
    "parse_variant",
    "synth_profiles",
    "validate_scenario",
    "variant_label",
]

__version__ = "0.1.0"
