"""Exception types raised across the package.

The CLI prints ``error: <ClassName>`` for any of these and exits with code 2,
so class names are part of the user-facing contract.
"""


class AffectRecError(Exception):
    """Base class for all domain errors."""


class ZeroVector(AffectRecError):
    pass


class EmptyList(AffectRecError):
    pass


class ParseError(AffectRecError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class DuplicateRating(ParseError):
    pass


class NegativeEmotion(ParseError):
    pass


class EmptyJoin(AffectRecError):
    pass


class MissingVoteCount(AffectRecError):
    pass


class UnknownUser(AffectRecError):
    pass


class UnknownItem(AffectRecError):
    pass


class EmptyTarget(AffectRecError):
    pass


class InsufficientUsers(AffectRecError):
    pass


class NotAMember(AffectRecError):
    pass


class EmptyGroup(AffectRecError):
    pass


class GroupTooSmall(AffectRecError):
    pass


class NotOwner(AffectRecError):
    pass


class UnknownGroup(AffectRecError):
    pass


class AlreadyMember(AffectRecError):
    pass


class EmptyCandidates(AffectRecError):
    pass


class DuplicateCandidate(AffectRecError):
    pass


class EmptySlice(AffectRecError):
    pass


class InsufficientRaters(AffectRecError):
    pass
