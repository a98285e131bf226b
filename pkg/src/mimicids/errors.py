"""Exception hierarchy. Each class carries the CLI exit status it maps to."""


class MimicError(Exception):
    exit_code = 4


class UsageError(MimicError):
    """Bad flags, bad config values, missing files."""

    exit_code = 2


class ContractError(MimicError):
    """Inputs that violate an operation's preconditions (schema mismatch, wrong labeling state)."""

    exit_code = 2


class ConfigError(UsageError):
    pass


class StateError(ContractError):
    pass


class DataError(MimicError):
    exit_code = 3


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LabelError(DataError):
    pass


class SizeError(DataError):
    pass


class TrainingError(MimicError):
    exit_code = 3


class SelectionError(MimicError):
    exit_code = 3


class StorageError(MimicError):
    exit_code = 3


class VersionError(StorageError):
    pass


class IntegrityError(StorageError):
    pass


class StageError(MimicError):
    """Wraps a failure inside one pipeline stage; keeps the inner exit status."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 4)
        super().__init__(f"[{stage}] {cause}")
