"""Exception taxonomy shared across the package."""


class DimensionError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ContractError(ValueError):
    """An argument violates a documented precondition."""


class ModeError(ContractError):
    """A model/checkpoint was used in the wrong conditioning mode or variant."""


class ValidationError(ValueError):
    """User-supplied configuration or data failed validation."""


class CheckpointError(IOError):
    """Checkpoint or tensor container could not be read or written."""


class DatasetError(IOError):
    """Dataset directory is missing files or contains corrupt ones."""


class TrackError(ValueError):
    """A tracks.jsonl stream contains a malformed record."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during optimization."""

    def __init__(self, step: int):
        super().__init__(f"non-finite loss at step {step}")
        self.step = step
