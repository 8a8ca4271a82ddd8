"""Exception types for the extraction harness."""


class HarnessError(Exception):
    """Base class for harness failures."""


class ModelError(HarnessError):
    """Raised when a model cannot be built or its weights cannot be loaded."""


class ImageError(HarnessError):
    """Raised when a single input image cannot be read or processed."""
