"""Carbon-aware design-space exploration for DNN accelerators with approximate multipliers."""

__version__ = "0.1.0"
