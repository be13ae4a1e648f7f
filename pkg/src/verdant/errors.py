"""Exception types shared across the toolkit."""


class VerdantError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(VerdantError):
    """A config file or context is missing fields or is inconsistent."""


class UnsupportedError(VerdantError, ValueError):
    """Requested operation is outside the supported envelope."""


class InfeasibleMappingError(VerdantError):
    """No tiling of a layer fits the register file and global buffer."""


class BudgetError(VerdantError):
    """Search space exceeds the exhaustive-evaluation budget."""


class InfeasibleError(VerdantError):
    """No design satisfies the constraints.

    ``binding`` names the constraint that could not be met
    (``"fps_min"``, ``"drop_max"``, ``"fps_min+drop_max"`` or ``"mapping"``).
    """

    def __init__(self, binding: str, detail: str = ""):
        self.binding = binding
        self.detail = detail
        msg = f"infeasible: binding constraint {binding}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
