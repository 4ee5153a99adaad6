"""Provenance headers and deterministic CSV output"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Sequence, Union

import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
# columns whose values depend on the machine rather than on (config, seed)
TIMING_COLUMNS = ("wall_time", "wall_time_mean")


def config_hash(document: Dict[str, Any]) -> str:
    """
    :param document: configuration with its defaults materialized
    :return: sha256 of the canonical JSON form
    """
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def provenance_header(command: str, document: Dict[str, Any], seed: int) -> str:
    """
    :return: '#' comment lines naming the command, the config hash and the seed
    """
    return f"# cluster-conquer {command}\n# config_sha256={config_hash(document)}\n# seed={seed}\n"


def write_csv(frame: pd.DataFrame, path: Union[str, Path], command: str, document: Dict[str, Any], seed: int,
              drop: Sequence[str] = TIMING_COLUMNS) -> Path:
    """
    Writes the frame below the provenance header. Timing columns are dropped so equal (config, seed) pairs give equal bytes
    :return: the written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = frame.drop(columns=[column for column in drop if column in frame.columns])
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(provenance_header(command, document, seed))
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"wrote {len(frame)} rows to {path}")
    return path


def write_timings(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """
    :return: the written path holding the identifying columns and the timing columns
    """
    path = Path(path)
    timing = [column for column in TIMING_COLUMNS if column in frame.columns]
    keys = [column for column in ("procedure", "p", "rep") if column in frame.columns]
    frame[keys + timing].to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """
    :return: a CSV written by write_csv, header comments skipped
    """
    return pd.read_csv(path, comment="#")
