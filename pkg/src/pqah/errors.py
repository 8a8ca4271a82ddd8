"""Exception types shared across the pipeline."""


class PqahError(Exception):
    """Base class for all pipeline errors."""


class ManifestError(PqahError):
    """Manifest file missing, unparseable, or violating an invariant."""


class MaskError(PqahError):
    """Part mask unreadable or containing unmapped indices."""


class HeatmapError(PqahError):
    """Heatmap file unreadable, malformed, or out of range."""


class RegionError(PqahError):
    """Lung-region synthesis failed (e.g. fewer than two components)."""


class StatsError(PqahError):
    """Stats input empty or unusable for aggregation/reporting."""


class ReportError(PqahError):
    """Base class for report-generation failures."""


class ReportConfigError(ReportError):
    """Report endpoint/token configuration is incomplete."""


class ReportTransportError(ReportError):
    """LLM endpoint returned a non-2xx response or was unreachable."""

    def __init__(self, message, status=None, body_excerpt=""):
        super().__init__(message)
        self.status = status
        self.body_excerpt = body_excerpt


class ReportTimeoutError(ReportError):
    """LLM endpoint did not answer within the configured timeout."""


class ReportProtocolError(ReportError):
    """LLM endpoint answered with a body that is not a chat completion."""
