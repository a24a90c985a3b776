"""Exception hierarchy shared by all modules."""


class EqError(Exception):
    """Base class for library errors."""


class ArityError(EqError, ValueError):
    pass


class ResourceError(EqError):
    """A configured cap or search budget would be exceeded."""


class ValidationError(EqError, ValueError):
    pass


class ParseError(EqError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class CrossValidationError(EqError):
    """Operational and syntactic routes disagree; this indicates a bug."""
