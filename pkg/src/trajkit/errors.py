"""Exception types shared across the toolkit."""


class TrajkitError(Exception):
    pass


class DataFormatError(TrajkitError):
    """A data file could not be parsed. Carries file and line context."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)


class SpecValidationError(TrajkitError):
    """An experiment spec field failed validation. Names the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
