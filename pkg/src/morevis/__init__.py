"""MoReVis: 1D-space x time ribbon summaries of moving-region datasets."""

__version__ = "0.1.0"


class MoReVisError(Exception):
    """Base class for user-facing errors raised by this package."""


class SolverError(MoReVisError):
    """A per-timestep optimization failed; carries the timestep id."""

    def __init__(self, message: str, timestep: int | None = None):
        super().__init__(message)
        self.timestep = timestep
