class BoostDepthError(Exception):
    exit_code = 1


class ConfigError(BoostDepthError, ValueError):
    """Invalid configuration, shapes or arguments."""

    exit_code = 2


class DataError(BoostDepthError):
    """Missing or malformed files on disk."""

    exit_code = 3


class NumericError(BoostDepthError, ArithmeticError):
    """Degenerate numerics: no valid pixels, NaN losses."""

    exit_code = 4
