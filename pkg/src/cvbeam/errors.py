"""Exception hierarchy shared by all cvbeam modules."""


class CvbeamError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(CvbeamError):
    pass


class DomainError(CvbeamError, ValueError):
    pass


class EmptyInputError(CvbeamError, ValueError):
    pass


class EmptyCodebookError(EmptyInputError):
    pass


class EmptyCandidateSetError(CvbeamError):
    """No codeword of the codebook points inside the selected SSB sector."""


class DimensionMismatchError(CvbeamError, ValueError):
    pass


class OutOfSectorError(CvbeamError):
    pass


class ConfigParseError(CvbeamError):
    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ConfigValidationError(CvbeamError, ValueError):
    pass
