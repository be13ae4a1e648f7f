from verdant.approxmul.library import find_variant, load_library, save_library
from verdant.approxmul.metrics import ErrorMetrics, error_metrics
from verdant.approxmul.netlist import (
    Gate,
    Netlist,
    all_operand_pairs,
    apply_approximation,
    build_exact_multiplier,
    dumps,
    loads,
    gate_area,
    precision_scale,
    prune,
    simulate,
    simulate_batch,
)
from verdant.approxmul.search import (
    MultiplierVariant,
    SearchParams,
    exact_variant,
    filter_by_accuracy,
    make_variant,
    pareto_search,
)

__all__ = [
    "ErrorMetrics",
    "Gate",
    "MultiplierVariant",
    "Netlist",
    "SearchParams",
    "all_operand_pairs",
    "apply_approximation",
    "build_exact_multiplier",
    "dumps",
    "error_metrics",
    "exact_variant",
    "filter_by_accuracy",
    "find_variant",
    "gate_area",
    "load_library",
    "loads",
    "make_variant",
    "pareto_search",
    "precision_scale",
    "prune",
    "save_library",
    "simulate",
    "simulate_batch",
]
