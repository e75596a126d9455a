"""horosol: towers of finite covers of punctured hyperbolic surfaces, their
odometers and cusp trichotomy, and horocycle-flow experiments on the
inverse-limit solenoids."""

__version__ = "0.1.0"

from .errors import InvariantError, ValidationError  # noqa: E402

__all__ = ["InvariantError", "ValidationError", "__version__"]
