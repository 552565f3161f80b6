"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid data supplied to the pipeline (bad file, bad config, bad inputs)."""


class ConfigError(DataError):
    """Configuration document is malformed or violates an invariant."""


class FormatError(DataError):
    """A structured text file failed to parse.

    Carries enough context to point at the offending record.
    """

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        prefix = ""
        if source is not None:
            prefix += str(source)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)
