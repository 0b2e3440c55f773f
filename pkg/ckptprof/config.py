from dataclasses import dataclass
from typing import Optional

from environs import Env


@dataclass
class Logging:
    level: str

    @staticmethod
    def from_env(env: Env):
        level = env.str("CKPTPROF_LOG_LEVEL", "INFO").upper()
        return Logging(level=level)


@dataclass
class Runtime:
    workers: int
    pareto_guard: int

    @staticmethod
    def from_env(env: Env):
        workers = env.int("CKPTPROF_WORKERS", 1)
        pareto_guard = env.int("CKPTPROF_PARETO_GUARD", 20)
        return Runtime(workers=max(1, workers), pareto_guard=pareto_guard)


@dataclass
class Config:
    logging: Logging
    runtime: Runtime


def default_config() -> Config:
    return Config(
        logging=Logging(level="INFO"),
        runtime=Runtime(workers=1, pareto_guard=20),
    )


def load_config(path: Optional[str] = None) -> Config:
    env = Env()
    env.read_env(path)

    return Config(
        logging=Logging.from_env(env),
        runtime=Runtime.from_env(env),
    )
