"""
Utils package initialization.
"""

from src.utils.chain_io import (
    read_chain_csv,
    read_loss_grid,
    read_states,
    write_chain_csv,
    write_json,
    write_loss_grid,
)
from src.utils.grid_cache import GridCache
from src.utils.hashing import content_hash
from src.utils.logging_utils import configure_logging, get_logger
from src.utils.rng import derive_seed, make_rng

__all__ = [
    'GridCache',
    'configure_logging',
    'content_hash',
    'derive_seed',
    'get_logger',
    'make_rng',
    'read_chain_csv',
    'read_loss_grid',
    'read_states',
    'write_chain_csv',
    'write_json',
    'write_loss_grid',
]
