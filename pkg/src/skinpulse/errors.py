"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures without a
lookup table: 2 for bad input, 3 for "no physiological signal", 4 otherwise.
"""


class SkinPulseError(Exception):
    exit_code = 4

    @property
    def code(self) -> str:
        return type(self).__name__


class InputError(SkinPulseError, ValueError):
    exit_code = 2


class MissingFile(InputError, FileNotFoundError):
    pass


class DimensionMismatch(InputError):
    pass


class MissingFps(InputError):
    pass


class InvalidInput(InputError):
    pass


class TooFewFrames(InputError):
    pass


class BadWindowLength(InputError):
    pass


class NonPositiveScale(InputError):
    pass


class InvalidBand(InputError):
    pass


class FsMismatch(InputError):
    pass


class TooShort(InputError):
    pass


class LengthMismatch(InputError):
    pass


class OutOfBounds(InputError, IndexError):
    pass


class OutOfRange(InputError, IndexError):
    pass


class PatchOutOfBounds(InputError):
    pass


class EmptyInput(InputError):
    pass


class IoFailure(SkinPulseError, OSError):
    pass


class NoParamsFound(SkinPulseError):
    pass


class NoPeak(SkinPulseError):
    """All in-band power is negligible (e.g. a pixel that was always masked)."""

    exit_code = 3


class EmptyField(SkinPulseError):
    """No pixel survived exclusion, so there is no heart rate to report."""

    exit_code = 3
