"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A requested expansion or grid exceeds its configured budget."""


class SchemaError(ValueError):
    """A CSV or JSON document does not match the expected layout."""
