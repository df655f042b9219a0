"""Exception formatting helpers"""


def str_exc(exc: BaseException) -> str:
    """Convert an exception to its string representation.

    >>> str_exc(ValueError("visibility=1.5"))
    'ValueError: visibility=1.5'
    """
    return f"{type(exc).__name__}: {exc}"
