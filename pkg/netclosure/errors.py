# Copyright (C) 2024 netclosure contributors. All rights reserved.

from typing import Optional, Tuple

__all__ = [
    'NetClosureError',
    'SizeLimitError',
    'InvariantError',
    'NotIndependentError',
    'FormatError',
]


class NetClosureError(ValueError):
    """Base class of all errors raised by netclosure."""


class SizeLimitError(NetClosureError):
    """A size guard refused the computation."""

    def __init__(self, what: str, value: int, limit: int) -> None:
        super().__init__(f"{what} is {value}, exceeding the limit {limit}")
        self.what = what
        self.value = value
        self.limit = limit


class InvariantError(NetClosureError):
    """The input violates a structural rule; ``rule`` names it."""

    def __init__(self, rule: str, detail: Optional[str] = None) -> None:
        message = rule if detail is None else f"{rule}: {detail}"
        super().__init__(message)
        self.rule = rule


class NotIndependentError(NetClosureError):
    """Two words are adjacent in the solvability graph."""

    def __init__(self, pair: Tuple[int, int], agreement: int) -> None:
        super().__init__(
            f"words {pair[0]} and {pair[1]} are adjacent "
            f"(agreement set {agreement:#x} is not closed)")
        self.pair = pair
        self.agreement = agreement


class FormatError(NetClosureError):
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
