"""Exception hierarchy shared by every module."""


class UwbFusionError(Exception):
    """Base class for all package errors."""


class ConfigurationError(UwbFusionError, ValueError):
    """Invalid parameters or an inconsistent configuration."""


class EmptyInputError(UwbFusionError, ValueError):
    pass


class OutOfRangeError(UwbFusionError, ValueError):
    pass


class DataError(UwbFusionError):
    """Problem with ingested sensor data."""


class ParseError(DataError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class UnknownAnchorError(DataError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown anchor"


class OrderingError(DataError, ValueError):
    """Timestamps are not strictly increasing."""


class NumericalError(UwbFusionError, ArithmeticError):
    pass


class DegenerateGeometryError(NumericalError):
    """Anchor layout does not determine a position (e.g. collinear anchors)."""


class UnderdeterminedError(UwbFusionError, ValueError):
    pass
