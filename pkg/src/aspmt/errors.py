"""Exception hierarchy shared by every stage of the pipeline."""


class AspmtError(Exception):
    pass


class SortError(AspmtError):
    """A term or formula is not well-sorted."""


class DeclarationError(AspmtError):
    """A constant, sort or variable is used without (or with a conflicting) declaration."""


class EvaluationError(AspmtError):
    pass


class ParseError(AspmtError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {msg}" if line else msg)


class DefinitenessError(AspmtError):
    """A causal law violates the definiteness or law-kind restrictions."""


class CompletionError(AspmtError):
    pass


class EmissionError(AspmtError):
    pass


class SolverError(AspmtError):
    def __init__(self, msg: str, output: str = ""):
        self.output = output
        super().__init__(msg)


class EnumerationBoundExceeded(AspmtError):
    pass
