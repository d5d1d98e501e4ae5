"""Low-energy pump-down tours through the Saturn moon system.
"""

__version__ = "0.1.0"


def main() -> int:
    from .cmds import dispatch

    return dispatch(None)
