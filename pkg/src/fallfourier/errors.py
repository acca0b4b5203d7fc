"""Exception hierarchy.

Every error raised by the package derives from :class:`FallFourierError`.
The three intermediate classes map onto CLI exit codes (usage 1, data 2,
numeric 3).
"""


class FallFourierError(Exception):
    exit_code = 1


class UsageError(FallFourierError, ValueError):
    exit_code = 1


class DataError(FallFourierError, ValueError):
    exit_code = 2


class NumericError(FallFourierError, ArithmeticError):
    exit_code = 3


# ingest
class MissingDirectory(DataError):
    pass


class MissingFile(DataError):
    pass


class EmptyDataset(DataError):
    pass


class MalformedLine(DataError):
    pass


class RowCountMismatch(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class RecordingTooShort(DataError):
    pass


class InsufficientPool(DataError):
    def __init__(self, stratum, needed, available):
        self.stratum = stratum
        self.needed = needed
        self.available = available
        super().__init__(
            f"stratum {stratum!r} needs {needed} windows, pool has {available}"
        )


# features / numerics
class EmptyInput(DataError):
    pass


class NonConvergence(NumericError):
    def __init__(self, iterations, gap):
        self.iterations = iterations
        self.gap = gap
        super().__init__(
            f"solver stopped after {iterations} iterations with gap {gap:.3g}"
        )


# classify
class EmptyTrainingSet(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class KTooLarge(UsageError):
    pass


class ContainsFall(DataError):
    pass


class InsufficientData(DataError):
    pass


class MissingClass(DataError):
    pass


# eval
class LengthMismatch(DataError):
    pass


class ClassAbsent(DataError):
    pass


class TooFewInstances(DataError):
    pass


class StratumTooSmall(DataError):
    pass


class ConfigError(UsageError):
    pass
