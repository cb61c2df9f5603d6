from ._core import (
    Mdp,
    bisim_distance,
    coffee_machine,
    equivalence_check,
    export_dot,
    gridworld_from_map,
    learn_alergia,
    learn_exact,
    learn_sampling,
    load_mdp,
    minimize,
    parse_mdp,
    pmax,
    save_mdp,
    serialize_mdp,
    validate,
)

__all__ = [
    "Mdp",
    "bisim_distance",
    "coffee_machine",
    "equivalence_check",
    "export_dot",
    "gridworld_from_map",
    "learn_alergia",
    "learn_exact",
    "learn_sampling",
    "load_mdp",
    "minimize",
    "parse_mdp",
    "pmax",
    "save_mdp",
    "serialize_mdp",
    "validate",
]
