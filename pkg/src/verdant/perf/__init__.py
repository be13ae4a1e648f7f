from verdant.perf.model import (
    AcceleratorConfig,
    AcceleratorPreset,
    AreaLib,
    LayerShape,
    Mapping,
    PerfResult,
    accelerator_area,
    array_shape,
    layer_macs,
    map_layer,
    workload_latency,
)
from verdant.perf.workloads import BUILTIN_WORKLOADS, builtin_workload, load_workload, resolve_workload

__all__ = [
    "AcceleratorConfig",
    "AcceleratorPreset",
    "AreaLib",
    "BUILTIN_WORKLOADS",
    "LayerShape",
    "Mapping",
    "PerfResult",
    "accelerator_area",
    "array_shape",
    "builtin_workload",
    "layer_macs",
    "load_workload",
    "map_layer",
    "resolve_workload",
    "workload_latency",
]
