"""Error types raised by the VDP parser, resolver and distributor."""


class VdpError(Exception):
    """Base class for all VDP failures."""


class VdpSyntaxError(VdpError):
    """Document is not well-formed (bad JSON, wrong types, malformed node)."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = "%s (at %s)" % (message, location)
        super().__init__(message)


class UnsupportedVersion(VdpError):
    pass


class DuplicateSiblingId(VdpError):
    pass


class EmptySplit(VdpError):
    pass


class InvalidShares(VdpError):
    pass


class UnknownKeyword(VdpError):
    pass


class FetchError(VdpError):
    def __init__(self, url, reason=""):
        self.url = url
        super().__init__("fetch failed for %s%s" % (url, ": " + reason if reason else ""))


class CycleError(VdpError):
    def __init__(self, url):
        self.url = url
        super().__init__("reference cycle through %s" % url)


class DepthExceeded(VdpError):
    pass


class DocumentBudgetExceeded(VdpError):
    pass


class UnresolvedNode(VdpError):
    pass


class Overflow(VdpError):
    pass


class EmptyContributions(VdpError):
    pass
