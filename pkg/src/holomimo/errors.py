"""Exception hierarchy shared by all modules."""


class HoloMimoError(Exception):
    """Base class for every error raised by this package."""


class InvalidGeometryError(HoloMimoError, ValueError):
    pass


class DomainError(HoloMimoError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConfigurationError(HoloMimoError, ValueError):
    """Inconsistent or invalid configuration.

    ``field`` carries the dotted path of the offending config entry when known.
    """

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class AssemblyError(HoloMimoError, ValueError):
    pass


class NormalizationError(HoloMimoError, ValueError):
    pass


class QuadratureError(HoloMimoError, RuntimeError):
    def __init__(self, message, cell_index=None, achieved=None):
        if cell_index is not None:
            message = f"cell {cell_index}: {message}"
        super().__init__(message)
        self.cell_index = cell_index
        self.achieved = achieved


class DatasetError(HoloMimoError, ValueError):
    """Measurement dataset failed to load or validate."""
