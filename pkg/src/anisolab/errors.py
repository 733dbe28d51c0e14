"""Shared exception types."""


class AnisolabError(Exception):
    pass


class SpectrumError(AnisolabError, ValueError):
    """Matrix spectrum does not lie in the open right half-plane."""


class NonMonotoneError(AnisolabError, ValueError):
    """Non-diagonal dilation matrix without positive-definite symmetric part."""


class ConvergenceError(AnisolabError, RuntimeError):
    """Iterative solve exhausted its iteration budget."""


class GridError(AnisolabError, ValueError):
    """Invalid sampling lattice or mismatched grid shapes."""


class BandOverflowError(AnisolabError, ValueError):
    """A spectral operation would move coefficients past the Nyquist range."""


class EmptyBandError(AnisolabError, ValueError):
    """A frequency band selector matched no lattice frequencies."""


class CoverageError(AnisolabError, ValueError):
    """Spectrum of a function exits the zone where the filter bank sums to one."""


class ParameterWindowError(AnisolabError, ValueError):
    """Space/difference parameters fall outside the validated window."""


class WeightError(AnisolabError, ValueError):
    """Weight exponents outside the admissible power range."""


class DegenerateCubeError(AnisolabError, ValueError):
    """Cube holds fewer samples than polynomial coefficients."""


class ConfigError(AnisolabError, ValueError):
    """Invalid run configuration; message names the offending field."""
