"""Exception hierarchy shared by all ncbm modules."""


class NcbmError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(NcbmError, ValueError):
    pass


class OutOfRange(ValidationError):
    """A parameter lies outside its admissible interval."""

    def __init__(self, name, value, allowed="[0, 1]"):
        self.name = name
        self.value = value
        super().__init__(f"parameter {name}={value!r} is outside {allowed}")


class RowOverflow(ValidationError):
    """A row of the transition matrix would carry more than unit mass."""

    def __init__(self, row, total):
        self.row = row
        self.total = total
        terms = "a+c+d" if row == "W" else "b+c+d"
        super().__init__(f"row {row}: {terms} = {total!r} exceeds 1")


class Unclassifiable(NcbmError, ValueError):
    """No status clause matches the observed levels."""


class NumericalFailure(NcbmError, ArithmeticError):
    pass


class EmptyInput(NcbmError, ValueError):
    pass


class DegenerateRow(NcbmError, ArithmeticError):
    """An entrywise product row sums to zero and cannot be renormalized."""

    def __init__(self, row, position=None):
        self.row = row
        self.position = position
        where = f" at fold position {position}" if position is not None else ""
        super().__init__(f"row {row} of the composed matrix sums to 0{where}")


class ZeroDenominator(NcbmError, ArithmeticError):
    def __init__(self, term, denominator):
        self.term = term
        self.denominator = denominator
        super().__init__(
            f"correlated function {term}: denominator {denominator} is zero"
        )


class DivisionByZero(NcbmError, ZeroDivisionError):
    """An estimation formula has a zero denominator."""

    def __init__(self, parameter, reason):
        self.parameter = parameter
        self.reason = reason
        super().__init__(f"cannot estimate {parameter}: {reason}")


class InfeasibleGrid(NcbmError, ValueError):
    pass


class LogParseError(NcbmError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")
