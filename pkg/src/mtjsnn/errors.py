"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A parameter or configuration file violates a documented constraint."""


class IdxFormatError(ValueError):
    """An IDX file failed to parse; carries the file path and byte offset."""

    def __init__(self, path, offset, message):
        self.path = str(path)
        self.offset = offset
        super().__init__(f"{self.path}: byte {offset}: {message}")


class SnapshotFormatError(ValueError):
    """A network snapshot failed to parse."""
