"""Exception hierarchy shared by the library and the CLI."""


class HetclustError(ValueError):
    """Base class for every error raised on bad input or degenerate data."""


class DomainError(HetclustError):
    pass


class InsufficientDataError(HetclustError):
    pass


class DegenerateVarianceError(HetclustError):
    pass


class DegenerateRateError(HetclustError):
    pass


class InvalidMergeError(HetclustError):
    pass


class InputError(HetclustError):
    pass


class ParseError(InputError):
    """Malformed input row. ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class DegenerateGroupsError(InputError):
    """One or more groups cannot be summarized. ``problems`` maps group id to reason."""

    def __init__(self, problems):
        self.problems = dict(problems)
        detail = "; ".join(f"{gid}: {why}" for gid, why in self.problems.items())
        super().__init__(f"{len(self.problems)} degenerate group(s): {detail}")
