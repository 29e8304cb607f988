"""Exception types shared across the package."""


class BeanroastError(Exception):
    """Base class for all beanroast errors."""


class ColorSpaceError(BeanroastError, ValueError):
    """Operation received an image in the wrong color space."""


class ShapeError(BeanroastError, ValueError):
    """Mismatched image/mask dimensions or malformed arrays."""


class ConfigError(BeanroastError, ValueError):
    """Invalid configuration value."""


class LayoutError(BeanroastError, ValueError):
    """Dataset directory does not follow the class-per-directory layout."""


class DataError(BeanroastError, ValueError):
    """Input data violates an operation precondition."""


class TrainingError(BeanroastError, RuntimeError):
    """Training failed (e.g. loss diverged)."""


class ArtifactError(BeanroastError, RuntimeError):
    """Model artifact is missing, corrupt, or unreadable."""


class CompatibilityError(BeanroastError, RuntimeError):
    """Serving-time preprocess configuration does not match the artifact."""
