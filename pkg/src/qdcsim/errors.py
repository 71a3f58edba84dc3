"""Exception hierarchy shared by every module in the simulator."""


class QDCError(Exception):
    """Base class for all simulator errors."""


class InvalidAxis(QDCError, ValueError):
    pass


class InvalidState(QDCError, ValueError):
    pass


class EmptyInput(QDCError, ValueError):
    pass


class UnsupportedLength(QDCError, ValueError):
    pass


class PayloadSize(QDCError, ValueError):
    pass


class PackageSize(QDCError, ValueError):
    pass


class InvalidInit(QDCError, ValueError):
    pass


class InvalidTolerance(QDCError, ValueError):
    pass


class InsufficientSample(QDCError, ValueError):
    pass


class InconsistentEstimate(QDCError, ValueError):
    pass


class ChannelEmpty(QDCError, RuntimeError):
    pass


class ProtocolOrder(QDCError, RuntimeError):
    pass


class SpanMismatch(QDCError, ValueError):
    pass


class ConfigError(QDCError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
