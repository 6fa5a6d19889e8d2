"""Exception hierarchy shared by every layer of the engine."""


class TDBError(Exception):
    """Base class for all engine errors."""

    pass
