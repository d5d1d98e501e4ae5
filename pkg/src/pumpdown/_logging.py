import logging
import pathlib
import sys
import typing


class _PrettyFormatter(logging.Formatter):
    def format(self, record):
        message = record.getMessage()
        if record.levelno < logging.WARNING:
            return message
        return f"{record.levelname}: {message}"


def _package_logger() -> logging.Logger:
    return logging.getLogger(__name__.split(".", 1)[0])


def configure_logging(level):
    h = logging.StreamHandler(sys.stderr)
    if level >= logging.INFO:
        f = _PrettyFormatter()
    else:
        f = logging.Formatter("%(levelname)s: %(message)s")
    h.setFormatter(f)

    logger = _package_logger()
    logger.addHandler(h)
    logger.setLevel(level)


def attach_logfile(path: pathlib.Path) -> logging.Handler:
    """Mirror package logging into ``path`` with timestamps."""
    path.parent.mkdir(parents=True, exist_ok=True)
    h = logging.FileHandler(path, mode="a", encoding="utf-8")
    h.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    )
    _package_logger().addHandler(h)
    return h


def detach_handler(handler: typing.Optional[logging.Handler]) -> None:
    if handler is None:
        return
    _package_logger().removeHandler(handler)
    handler.close()
