"""Exception hierarchy for amalgam-lab."""


class AmalgamLabError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(AmalgamLabError):
    """Bad experiment key, malformed literal or invalid user parameter."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class GridError(AmalgamLabError, ValueError):
    """Invalid grid, grid mismatch or off-grid shift of a pure grid field."""


class ScanCapError(AmalgamLabError, ValueError):
    """Associated-function scan reached pmax without turning."""


class DualityError(AmalgamLabError, ValueError):
    """Space pair is not a Hölder dual pair."""


class WindowError(AmalgamLabError, ValueError):
    """Window (or every window of a family) is identically zero."""
