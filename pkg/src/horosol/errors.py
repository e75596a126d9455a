"""Exception types shared across the package.

``ValidationError`` is raised for bad user input (violated preconditions);
``InvariantError`` signals that an internal invariant was found broken, which
always means a bug or corrupted input data.  The CLI maps them to exit codes
2 and 1 respectively.
"""


class ValidationError(ValueError):
    pass


class InvariantError(RuntimeError):
    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        msg = f"invariant violated: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
