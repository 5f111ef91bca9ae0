"""Storm-avoiding trajectory planning from thunderstorm nowcasts."""

from ._stormreach import (
    DegenerateError,
    DimensionError,
    DomainError,
    ParseError,
    PlanarFrame,
    SchemaError,
    compare_fits,
    fit,
    fit_logistic,
    gen_scenario,
    kmeans,
    merge_probabilities,
    min_volume_ellipse,
    plan,
    run_all,
    scenario_kinds,
    set_threads,
    simulate,
    solve_reach_avoid,
)

__all__ = [
    "DegenerateError",
    "DimensionError",
    "DomainError",
    "ParseError",
    "PlanarFrame",
    "SchemaError",
    "compare_fits",
    "fit",
    "fit_logistic",
    "gen_scenario",
    "kmeans",
    "merge_probabilities",
    "min_volume_ellipse",
    "plan",
    "run_all",
    "scenario_kinds",
    "set_threads",
    "simulate",
    "solve_reach_avoid",
]
