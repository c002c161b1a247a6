"""Exception types raised by schedule construction, design and simulation."""


class StaError(Exception):
    """Base class for all errors raised by :mod:`sta_anneal`."""


class DivergentSchedule(StaError):
    """The azimuthal angle crosses ``sin(phi) = 0`` inside the horizon.

    The designed transverse field would diverge at ``t``.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SingularDrive(StaError):
    """A designed coefficient is non-finite or exceeds the magnitude cap."""

    def __init__(self, message, t=None, value=None):
        super().__init__(message)
        self.t = t
        self.value = value


class RequiresLongitudinalField(StaError, ValueError):
    """Mean-field design needs ``h > 0``; the f denominator vanishes at t = 0."""


class SiteInconsistent(StaError):
    """Per-site design equations disagree, so no common (Gamma, f) exists."""

    def __init__(self, message, discrepancy):
        super().__init__(message)
        self.discrepancy = discrepancy


class NormDrift(StaError):
    """The integrated state left the unit sphere beyond tolerance."""

    def __init__(self, message, drift):
        super().__init__(message)
        self.drift = drift


class DimensionOverflow(StaError, ValueError):
    """Requested Hilbert space is larger than the solver supports."""
