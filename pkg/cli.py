import argparse
import logging
import sys
from typing import List, Optional

import betterlogging as bl

from ckptprof.config import Config, load_config
from ckptprof.handlers import EXPERIMENTS, commands_list
from ckptprof.handlers.experiment import EXPERIMENT_ARGUMENTS, experiment_flags, experiment_manifest
from ckptprof.misc.errors import CkptProfError
from ckptprof.misc.manifest import RunManifest

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3


class CkptProf:
    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)
        self._setup_logging()

    def _setup_logging(self) -> None:
        """Logging setup; everything goes to stderr so stdout stays reproducible"""
        level = getattr(logging, self.config.logging.level, logging.INFO)
        bl.basic_colorized_config(level=level)
        logging.getLogger().setLevel(level)

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="ckptprof",
            description="Simulate, profile and optimize checkpointing in adjoint codes",
        )
        for argument in EXPERIMENT_ARGUMENTS:
            parser.add_argument(*argument.flags, **argument.options)

        sub = parser.add_subparsers(dest="command")
        for router in commands_list:
            router.mount(sub)
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        parser = self.build_parser()
        args = parser.parse_args(argv)
        if not args.experiment and not args.command:
            parser.error("a subcommand or --experiment is required")
        flags = [f"--{name.replace('_', '-')}" for name in experiment_flags(args)]
        if args.experiment:
            flags.insert(0, "--experiment")
        if args.command and flags:
            parser.error(f"{', '.join(flags)} cannot be combined with the {args.command} subcommand")

        manifest = experiment_manifest(args) if args.experiment else RunManifest.from_args(args)
        try:
            if args.experiment:
                self.logger.info(f"Running experiment {args.experiment}")
                EXPERIMENTS[args.experiment](manifest, self.config)
            else:
                args.handler(manifest, self.config)
        except CkptProfError as e:
            self.logger.error(f"{manifest.command}: {e}")
            return e.exit_code
        except FileNotFoundError as e:
            self.logger.error(f"{manifest.command}: {e}")
            return EXIT_MISSING_FILE
        except Exception as e:
            self.logger.exception(f"{manifest.command}: unexpected error: {e}")
            return EXIT_UNEXPECTED
        return EXIT_OK


def main(argv: Optional[List[str]] = None, config: Optional[Config] = None) -> int:
    app = CkptProf(config or load_config(".env"))
    try:
        return app.run(argv)
    except SystemExit as e:
        # argparse: 2 for usage errors, 0 for --help
        return e.code if isinstance(e.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
