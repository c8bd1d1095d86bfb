"""Exception types shared across the package."""


class RiskgridError(Exception):
    """Base class for every riskgrid-specific error."""


class GeohashParseError(RiskgridError, ValueError):
    """A geohash string has characters outside the base32 alphabet or a bad length."""


class CellBudgetError(RiskgridError):
    """A grid covering would produce more cells than the configured cap."""

    def __init__(self, count: int, cap: int, hint: str | None = None):
        msg = f"covering needs {count} cells, exceeding the cap of {cap}"
        super().__init__(msg if hint is None else f"{msg}; {hint}")
        self.count = count
        self.cap = cap


class SchemaError(RiskgridError):
    """Input data does not match the documented schema."""


class LoadError(RiskgridError):
    """A dataset file could not be loaded (too many malformed rows, bad header)."""


class GeocodeError(RiskgridError):
    """Base class for geocoding failures."""


class GeocodeNotFound(GeocodeError):
    """The geocoding service returned zero matches for an address."""


class GeocodeProtocolError(GeocodeError):
    """The geocoding service responded with a document we cannot interpret."""


class GeocodeUnavailable(GeocodeError):
    """Transient network or service failure; the request may be retried."""


class TrainingError(RiskgridError):
    """Model training cannot proceed (e.g. no positive cells)."""


class ModelFormatError(RiskgridError):
    """A model file is not in the expected format."""


class UnsupportedVersionError(ModelFormatError):
    """The model file declares a format version this build does not read."""


class IntegrityError(ModelFormatError):
    """The model file is truncated or internally inconsistent."""
