class EvoterError(Exception):
    """Base class for every error raised by this package."""


# rule model

class RuleError(EvoterError, ValueError):
    pass


class RuleSyntaxError(RuleError):
    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class UnknownFeature(RuleError):
    pass


class UnknownAction(RuleError):
    pass


class CoefficientOutOfRange(RuleError):
    pass


class InsufficientHistory(RuleError):
    pass


# evolution engine

class EngineError(EvoterError):
    pass


class EmptyPopulation(EngineError, ValueError):
    pass


class EmptyParent(EngineError, ValueError):
    pass


class DimensionMismatch(EngineError, ValueError):
    pass


class InvalidParams(EngineError, ValueError):
    pass


class EvaluatorFailure(EngineError, RuntimeError):
    def __init__(self, message, partial=None):
        # partial: RunResult accumulated before the failing generation
        self.partial = partial
        super().__init__(message)


# data

class DataError(EvoterError, ValueError):
    pass


class HeaderMismatch(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row, col):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, column {col}: {message}")


class MissingLabel(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class BadFractions(DataError):
    pass


# environments

class EnvError(EvoterError):
    pass


class StepAfterDone(EnvError, RuntimeError):
    pass


class ActionSetMismatch(EnvError, ValueError):
    pass


# predictors

class PredictorError(EvoterError):
    pass


class NotFitted(PredictorError, RuntimeError):
    pass


class TooFewSamples(PredictorError, ValueError):
    pass


class ConfigError(EvoterError, ValueError):
    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)
