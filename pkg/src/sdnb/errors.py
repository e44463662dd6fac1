"""Exception hierarchy shared by every layer of the engine."""


class SdnbError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SdnbError):
    """Invalid user-facing configuration (maps to CLI exit code 2)."""


class PrecisionError(SdnbError):
    pass


class DenominatorPrecision(PrecisionError):
    """A rational is not representable at the requested absolute precision."""


class PrecisionExhausted(PrecisionError):
    """Nothing is known about the unit part of a result."""


class DivisionByZeroToPrecision(PrecisionError, ZeroDivisionError):
    pass


class GuardExhausted(PrecisionError):
    """Guard digits do not cover the valuation lost to factorial denominators."""


class TruncationTooShort(PrecisionError):
    """A truncated series cannot certify its tail at the requested precision."""


class ReducibleModulus(SdnbError):
    pass


class NotAUniformizerSeed(SdnbError):
    pass


class NotOneUnit(SdnbError):
    pass


class ExponentNotIntegral(SdnbError):
    pass


class NotAUnit(SdnbError):
    pass


class IntegralityViolation(SdnbError):
    pass


class VerificationFailed(SdnbError):
    pass


class AxiomViolation(SdnbError):
    pass


class UnexpectedValuation(SdnbError):
    pass


class RootMismatch(SdnbError):
    pass


class StructureViolation(SdnbError):
    pass


class NotInDelta(SdnbError):
    pass


class ZeroExponentVector(ConfigError):
    pass


class MembershipViolation(SdnbError):
    pass


class ProjectorRankError(SdnbError):
    pass


class NonIntegralValuation(SdnbError):
    pass


class SingularSystem(SdnbError):
    pass
