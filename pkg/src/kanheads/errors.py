"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
everything else -> 3.
"""


class KanHeadsError(Exception):
    pass


class ShapeError(KanHeadsError, ValueError):
    pass


class StateError(KanHeadsError, RuntimeError):
    pass


class ConfigError(KanHeadsError, ValueError):
    pass


class DataError(KanHeadsError, ValueError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class FormatError(ParseError):
    pass


class LookupFailure(DataError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class SplitError(DataError):
    pass
