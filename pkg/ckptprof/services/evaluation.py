"""Batch evaluation of configurations of one tree.

Results always come back in input order, whatever the pool width.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import List, Sequence

from ckptprof.model.tree import CallTree, CheckpointConfig
from ckptprof.services.simulator import AdjointCost, simulate

logger = logging.getLogger(__name__)

# Configs handed to one worker at a time.
CHUNK_SIZE = 16


def _evaluate_one(tree: CallTree, config: CheckpointConfig) -> AdjointCost:
    return simulate(tree, config)


def evaluate_configs(tree: CallTree, configs: Sequence[CheckpointConfig], workers: int = 1) -> List[AdjointCost]:
    """Simulate every config; parallel across processes when `workers > 1`."""
    if workers <= 1 or len(configs) < 2:
        return [simulate(tree, config) for config in configs]

    logger.info(f"Evaluating {len(configs)} configurations on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(partial(_evaluate_one, tree), configs, chunksize=CHUNK_SIZE))
