"""
Usage errors raised by command handlers
"""


class UsageError(Exception):
    """Bad invocation: missing input path, conflicting flags. Exits with code 2."""
    pass
