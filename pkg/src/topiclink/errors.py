"""Exception hierarchy shared by every module."""


class TopicLinkError(Exception):
    """Base class for domain errors; the CLI maps these to exit code 1."""


class ParseError(TopicLinkError, ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class ValidationError(TopicLinkError, ValueError):
    pass


class UnknownIdError(TopicLinkError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown id"


class NoCommonHashtag(TopicLinkError):
    pass


class UndefinedDensity(TopicLinkError):
    pass


class InsufficientAdopters(TopicLinkError):
    pass


class DegenerateLabels(TopicLinkError):
    pass


class StratificationError(TopicLinkError):
    pass


class SamplingError(TopicLinkError):
    def __init__(self, message, deficient_class=None):
        self.deficient_class = deficient_class
        super().__init__(message)


class FitError(TopicLinkError):
    pass


class WindowError(TopicLinkError):
    pass
