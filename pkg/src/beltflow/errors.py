"""Exception types shared across the package."""


class BeltflowError(Exception):
    """Base class for all package-level errors."""


class ConfigurationError(BeltflowError):
    """A user-supplied parameter or file is invalid or inconsistent."""


class ContractViolation(BeltflowError):
    """Two internal objects that must agree (grids, shapes) do not."""


class CflViolation(BeltflowError):
    """A time step exceeds the stability bound of the active scheme."""
