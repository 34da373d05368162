from .emitter import (
    DEFAULT_MAPPING,
    DEFAULT_WATCH_COMMAND,
    ConfigurationError,
    EmitterConfig,
    MetricsEmitter,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MAPPING",
    "DEFAULT_WATCH_COMMAND",
    "ConfigurationError",
    "EmitterConfig",
    "MetricsEmitter",
    "__version__",
]
