"""Exception hierarchy shared by the stores.

Every store error derives from :class:`KBError` so callers (the TELL layer,
the CLI) can catch one type and report ``type(err).__name__`` as the cause.
"""


class KBError(Exception):
    """Base class for structural errors raised by any store."""


# semantic network
class DuplicateNode(KBError):
    pass


class DuplicateLink(KBError):
    pass


class DuplicateSpace(KBError):
    pass


class UnknownNode(KBError):
    pass


class UnknownSpace(KBError):
    pass


class CycleDetected(KBError):
    pass


class KindMismatch(KBError):
    pass


class InvalidSpace(KBError):
    pass


# scripts and episodes
class InvalidScript(KBError):
    def __init__(self, name, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__(f"script {name}: " + "; ".join(self.diagnostics))


class DuplicateScript(KBError):
    pass


class UnknownScript(KBError):
    pass


class UnboundRole(KBError):
    pass


class EntryConditionFailed(KBError):
    def __init__(self, pattern):
        self.pattern = pattern
        super().__init__(f"entry condition not satisfied: {pattern}")


class NoAlignment(KBError):
    pass


class AlreadyCompleted(KBError):
    pass


class EmptyEpisode(KBError):
    pass


class NoOpenEpisode(KBError):
    pass


class DuplicateEpisode(KBError):
    pass


# hybrid links
class DanglingScriptElement(KBError):
    pass


class DanglingNode(KBError):
    pass


class RoleLinkToNonClass(KBError):
    pass


class UnlinkedRole(KBError):
    pass


# queries
class MalformedQuery(KBError):
    pass


class NothingToExplain(KBError):
    pass
