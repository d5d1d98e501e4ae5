import argparse
import logging


class _AliasedSubParsersAction(argparse._SubParsersAction):
    """Custom subparser to also register subcommand aliases.

    This relies heavily on argparse internals, but I guess it's good enough.
    Aliases are registered without showing up in the help message, so old
    underscore spellings of commands keep working quietly.
    """

    def add_parser(self, name, *, aliases=(), **kwargs):
        parser = super().add_parser(name, **kwargs)
        for alias in aliases:
            self._name_parser_map[alias] = parser
        return parser


class PumpdownArgumentParser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.register("action", "parsers", _AliasedSubParsersAction)
        self.add_argument(
            "--config",
            help="JSON run configuration (defaults apply when omitted)",
            metavar="PATH",
            default=None,
        )
        self.add_argument(
            "--out",
            help="results directory (default: $PUMPDOWN_OUT or ./results)",
            metavar="DIR",
            default=None,
        )
        self.add_argument(
            "--workers",
            help="worker processes (overrides the config)",
            metavar="N",
            type=int,
            default=None,
        )
        self.add_argument(
            "-v",
            "--verbose",
            dest="log_level",
            action="store_const",
            const=logging.DEBUG,
            default=logging.INFO,
            help="log debug details",
        )
        self.add_argument(
            "-q",
            "--quiet",
            dest="log_level",
            action="store_const",
            const=logging.WARNING,
            help="log warnings and errors only",
        )

    def add_subparsers(self, **kwargs):
        # Revert to the basic parser class to avoid root arguments from being
        # defined in subparsers.
        if "parser_class" not in kwargs:
            kwargs["parser_class"] = argparse.ArgumentParser
        return super().add_subparsers(**kwargs)
