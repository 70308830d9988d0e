class SfgkatError(Exception):
    """Base class for all library errors."""


class CapacityError(SfgkatError):
    pass


class UniverseError(SfgkatError):
    pass


class ParseError(SfgkatError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


class ExplosionError(SfgkatError):
    pass


class NondeterminismError(SfgkatError):
    pass


class DeterminismError(SfgkatError):
    pass


class LayeringError(SfgkatError):
    pass


class InterpretationError(SfgkatError):
    pass
