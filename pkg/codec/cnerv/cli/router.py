import argparse
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple
from .deps import add_common_arguments

Handler = Callable[[argparse.Namespace], None]


@dataclass
class Argument:
    flags: Tuple[str, ...]
    options: Dict[str, Any]


def argument(*flags: str, **options: Any) -> Argument:
    return Argument(flags, options)


@dataclass
class Command:
    name: str
    handler: Handler
    summary: str
    arguments: List[Argument] = field(default_factory=list)


class CommandRouter:
    """Collects command handlers; routers of several modules are merged into one parser."""

    def __init__(self) -> None:
        self.commands: Dict[str, Command] = {}

    def command(
        self,
        name: str,
        summary: str,
        arguments: Tuple[Argument, ...] = ()
    ) -> Callable[[Handler], Handler]:
        def register(handler: Handler) -> Handler:
            self.commands[name] = Command(name, handler, summary, list(arguments))
            return handler
        return register

    def include_router(self, router: "CommandRouter") -> None:
        for name, command in router.commands.items():
            if name in self.commands:
                raise ValueError(f"command '{name}' is registered twice")
            self.commands[name] = command

    def build_parser(self, prog: str) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=prog)
        subparsers = parser.add_subparsers(dest="command", required=True)
        for command in self.commands.values():
            sub = subparsers.add_parser(command.name, help=command.summary, description=command.summary)
            add_common_arguments(sub)
            for arg in command.arguments:
                sub.add_argument(*arg.flags, **arg.options)
            sub.set_defaults(handler=command.handler)
        return parser
