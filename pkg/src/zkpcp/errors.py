"""Exceptions shared across modules."""


class ZkpcpError(Exception):
    pass


class SearchSpaceTooLarge(ZkpcpError):
    pass


class BudgetExceeded(ZkpcpError):
    """An oracle was asked for more symbols than its budget allows."""


class OutOfDomain(ZkpcpError, KeyError):
    pass


class ArityMismatch(ZkpcpError, ValueError):
    pass


class BadIndex(ZkpcpError, IndexError):
    pass


class DegreeTooHigh(ZkpcpError, ValueError):
    pass


class InvalidInstance(ZkpcpError, ValueError):
    pass


class PreconditionViolated(ZkpcpError, ValueError):
    pass
