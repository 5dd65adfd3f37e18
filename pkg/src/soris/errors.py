"""Exception types shared across the package."""


class SorisError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(SorisError):
    """Invalid or inconsistent configuration."""


class SelectionInfeasibleError(SorisError):
    """The requested number of transmit elements cannot be placed."""


class TrainingDivergedError(SorisError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch
