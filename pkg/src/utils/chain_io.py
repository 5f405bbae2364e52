"""
Flat-file formats: chain CSV, JSON summaries and loss-grid tables.

Every writer goes through a temporary file and an atomic rename.
"""

import io
import json
import re
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.models.calibration_models import LossGrid, LossKind
from src.models.chain_models import Chain, ProposalKind
from src.models.errors import ChainFileError
from src.utils.grid_cache import atomic_write_text

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.17g"
STATE_COLUMN = re.compile(r"^x\d+$")
_HEADER = re.compile(r"^#\s*(.*)$")

PathLike = Union[str, Path]


def chain_to_frame(chain: Chain) -> pd.DataFrame:
    """One row per state; row 0 is the initial state with blank bookkeeping."""
    frame = pd.DataFrame({"iteration": np.arange(chain.n_iterations + 1)})
    for d in range(chain.ndim):
        frame[f"x{d}"] = chain.states[:, d]
    frame["accepted"] = pd.array([None] + chain.accepted.astype(int).tolist(), dtype="Int64")
    frame["dr_stage"] = pd.array(
        [None] + [int(s) if s > 0 else None for s in chain.dr_stage], dtype="Int64"
    )
    frame["target_evals"] = np.concatenate([[0], chain.target_evals]).astype(np.int64)
    frame["proposal"] = [ProposalKind.INIT.value] + [str(k) for k in chain.proposal_kinds]
    return frame


def write_chain_csv(chain: Chain, path: PathLike, config_hash: str) -> Path:
    """
    Write a chain with full round-trip float precision.

    Args:
        chain: Chain to write
        path: Destination file
        config_hash: Recorded in the leading comment line

    Returns:
        The written path
    """
    buffer = io.StringIO()
    buffer.write(f"# schema_version={SCHEMA_VERSION} config_hash={config_hash}\n")
    chain_to_frame(chain).to_csv(
        buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    path = Path(path)
    atomic_write_text(path, buffer.getvalue())
    return path


def read_metadata(path: PathLike) -> dict:
    """key=value pairs of the leading comment line, empty when absent."""
    with open(path, encoding="utf-8") as f:
        first = f.readline().strip()
    match = _HEADER.match(first)
    if not match:
        return {}
    return dict(item.split("=", 1) for item in match.group(1).split() if "=" in item)


def _read_frame(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment="#", float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ChainFileError(f"cannot parse {path}: {e}") from e


def _state_columns(frame: pd.DataFrame) -> list:
    columns = sorted(
        (c for c in frame.columns if STATE_COLUMN.match(str(c))), key=lambda c: int(c[1:])
    )
    if not columns:
        raise ChainFileError("chain file has no x0, x1, ... state columns")
    return columns


def read_states(path: PathLike) -> np.ndarray:
    """State columns only; works for any CSV with x0, x1, ... columns."""
    frame = _read_frame(path)
    try:
        states = frame[_state_columns(frame)].to_numpy(dtype=float)
    except ValueError as e:
        raise ChainFileError(f"non-numeric states in {path}: {e}") from e
    if not np.all(np.isfinite(states)):
        raise ChainFileError("chain file contains non-numeric or missing states")
    return states


def read_chain_csv(path: PathLike) -> Tuple[Chain, dict]:
    """
    Read a chain written by write_chain_csv.

    Returns:
        (chain, metadata from the comment line)
    """
    frame = _read_frame(path)
    required = {"accepted", "dr_stage", "target_evals", "proposal"}
    missing = required - set(frame.columns)
    if missing:
        raise ChainFileError(f"chain file lacks columns {sorted(missing)}")
    body = frame.iloc[1:]
    try:
        chain = Chain(
            states=frame[_state_columns(frame)].to_numpy(dtype=float),
            accepted=body["accepted"].to_numpy(dtype=np.int64).astype(bool),
            dr_stage=body["dr_stage"].fillna(0).to_numpy(dtype=np.int64),
            target_evals=body["target_evals"].to_numpy(dtype=np.int64),
            proposal_kinds=body["proposal"].astype(str).to_numpy(dtype=object),
        )
    except (ValueError, TypeError) as e:
        raise ChainFileError(f"malformed chain file {path}: {e}") from e
    return chain, read_metadata(path)


def write_json(payload: Union[BaseModel, dict], path: PathLike) -> Path:
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True)
    path = Path(path)
    atomic_write_text(path, text + "\n")
    return path


def write_loss_grid(grid: LossGrid, path: PathLike, config_hash: str) -> Path:
    """Flat CSV table plus a ``.json`` sidecar with kind, sample count and hash."""
    path = Path(path)
    atomic_write_text(path, grid.to_frame().to_csv(index=False, float_format=FLOAT_FORMAT))
    write_json(
        {
            "schema_version": SCHEMA_VERSION,
            "kind": grid.kind.value,
            "mc_samples": grid.mc_samples,
            "config_hash": config_hash,
        },
        path.with_suffix(".json"),
    )
    return path


def read_loss_grid(path: PathLike) -> LossGrid:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    frame = pd.read_csv(path, float_precision="round_trip")
    return LossGrid.from_frame(frame, LossKind(sidecar["kind"]), int(sidecar["mc_samples"]))
