"""Declarative subcommands: handlers register on a router, the CLI mounts the routers."""
import argparse
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

from ckptprof.config import Config
from ckptprof.misc.manifest import RunManifest

Handler = Callable[[RunManifest, Config], None]


@dataclass(frozen=True)
class Argument:
    flags: Tuple[str, ...]
    options: Dict[str, Any] = field(default_factory=dict)


def arg(*flags: str, **options: Any) -> Argument:
    return Argument(flags=flags, options=options)


TREE = arg("--tree", metavar="PATH", help="call-tree JSON document")
CONFIG = arg("--config", metavar="PATH", help="checkpointing config (inhibit/binomial lines)")
OUT = arg("--out", metavar="DIR", default="out", help="output directory (created if absent)")
SEED = arg("--seed", type=int, default=0)


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    handler: Handler
    arguments: Tuple[Argument, ...] = ()


class CommandRouter:
    def __init__(self):
        self.commands: List[Command] = []

    def command(self, name: str, help: str, *arguments: Argument):
        def register(handler: Handler) -> Handler:
            self.commands.append(Command(name=name, help=help, handler=handler, arguments=arguments))
            return handler

        return register

    def mount(self, subparsers: "argparse._SubParsersAction") -> None:
        for command in self.commands:
            parser = subparsers.add_parser(command.name, help=command.help)
            for argument in command.arguments:
                parser.add_argument(*argument.flags, **argument.options)
            parser.set_defaults(handler=command.handler)
