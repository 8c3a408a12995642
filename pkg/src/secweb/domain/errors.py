from __future__ import annotations


class SecWebError(Exception):
    """Base class for domain failures."""


class MalformedIdError(SecWebError, ValueError):
    pass


class DuplicateUserError(SecWebError):
    pass


class UnknownUserError(SecWebError):
    pass


class FormatError(SecWebError, ValueError):
    """A stored envelope or access list does not follow its file format."""


class NoSuchPageError(SecWebError):
    pass


class AccessDeniedError(SecWebError):
    pass


class IntegrityError(SecWebError):
    pass


class SequenceGapError(SecWebError):
    pass
