import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from ckptprof.misc.errors import CkptProfError, ConfigSyntaxError, MissingInputError, TreeSyntaxError
from ckptprof.model.documents import parse_config, parse_tree
from ckptprof.model.tree import CallTree, CheckpointConfig

logger = logging.getLogger(__name__)

_COMMON = ("tree", "config", "out", "seed", "command", "experiment")


def read_input(path: Path, error: Callable[[str], CkptProfError]) -> str:
    """Read a UTF-8 input file; undecodable bytes raise `error` instead of UnicodeDecodeError."""
    if not path.is_file():
        raise MissingInputError(f"input file not found: {path}")
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise error(f"{path} is not valid UTF-8 ({e.reason} at byte {e.start})") from e


@dataclass
class RunManifest:
    """Everything one command invocation reads and writes."""

    command: str
    tree_path: Optional[Path] = None
    config_path: Optional[Path] = None
    out_dir: Optional[Path] = None
    seed: Optional[int] = None
    knobs: Dict[str, Any] = field(default_factory=dict)

    @staticmethod
    def from_args(args: argparse.Namespace) -> "RunManifest":
        values = vars(args)
        return RunManifest(
            command=values.get("command") or "",
            tree_path=Path(values["tree"]) if values.get("tree") else None,
            config_path=Path(values["config"]) if values.get("config") else None,
            out_dir=Path(values["out"]) if values.get("out") else None,
            seed=values.get("seed"),
            knobs={
                key: value
                for key, value in values.items()
                if key not in _COMMON and key != "handler" and not key.startswith("experiment_")
            },
        )

    def check_inputs(self) -> None:
        for path in (self.tree_path, self.config_path):
            if path is not None and not path.is_file():
                raise MissingInputError(f"input file not found: {path}")

    def load_tree(self) -> CallTree:
        if self.tree_path is None:
            raise MissingInputError(f"{self.command} needs --tree")
        self.check_inputs()
        return parse_tree(read_input(self.tree_path, TreeSyntaxError))

    def load_config(self) -> CheckpointConfig:
        if self.config_path is None:
            return CheckpointConfig()
        self.check_inputs()
        return parse_config(read_input(self.config_path, ConfigSyntaxError))

    def output(self, name: str) -> Path:
        out_dir = self.out_dir or Path(".")
        out_dir.mkdir(parents=True, exist_ok=True)
        return out_dir / name

    def write(self, name: str, text: str) -> Path:
        path = self.output(name)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {path}")
        return path
