"""Versioned flat-file format for trained agents.

Layout, little-endian throughout:
    4 bytes   magic b"ODQN"
    uint16    format version
    uint32    header length N
    N bytes   UTF-8 JSON header (dims, norms, seed, episodes, param_count)
    rest      float64 parameters in QFunction flat order
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from rl.agent import DQNAgent
from rl.qnetwork import QFunction, param_count
from rl.views import AgentConfig, NormalizationBounds

logger = logging.getLogger(__name__)

MAGIC = b"ODQN"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sHI")


class AgentFileError(ValueError):
    pass


def agent_to_bytes(agent: DQNAgent) -> bytes:
    header = {
        "dims": list(agent.qfunction.dims),
        "norms": agent.norms.model_dump(mode="json"),
        "seed": agent.cfg.seed,
        "episodes": agent.episodes_trained,
        "param_count": int(agent.qfunction.params.size),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = agent.qfunction.params.astype("<f8").tobytes()
    return _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + body


def agent_from_bytes(blob: bytes, source: str = "<bytes>") -> DQNAgent:
    if len(blob) < _PREFIX.size:
        raise AgentFileError(f"{source}: file too short to be an agent file")
    magic, version, header_len = _PREFIX.unpack_from(blob)
    if magic != MAGIC:
        raise AgentFileError(f"{source}: bad magic {magic!r}, not an agent file")
    if version != FORMAT_VERSION:
        raise AgentFileError(f"{source}: unsupported agent format version {version} (expected {FORMAT_VERSION})")

    start = _PREFIX.size
    try:
        header = json.loads(blob[start : start + header_len].decode("utf-8"))
        dims = tuple(int(d) for d in header["dims"])
        norms = NormalizationBounds.model_validate(header["norms"])
        seed = int(header["seed"])
        episodes = int(header["episodes"])
        expected = int(header["param_count"])
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError, ValidationError) as e:
        raise AgentFileError(f"{source}: unreadable header: {e}") from e

    if expected != param_count(dims):
        raise AgentFileError(f"{source}: header declares {expected} parameters but dims {dims} need {param_count(dims)}")
    body = blob[start + header_len :]
    if len(body) != expected * 8:
        raise AgentFileError(f"{source}: expected {expected * 8} parameter bytes, found {len(body)}")

    params = np.frombuffer(body, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(params)):
        raise AgentFileError(f"{source}: parameter array contains non-finite values")
    try:
        cfg = AgentConfig(seed=seed, hidden_sizes=dims[1:-1])
        return DQNAgent(QFunction(dims, params), norms, cfg, episodes_trained=episodes)
    except (ValueError, ValidationError) as e:
        raise AgentFileError(f"{source}: {e}") from e


def save_agent(agent: DQNAgent, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(agent_to_bytes(agent))
    logger.info("saved agent (%d parameters, %d episodes) to %s", agent.qfunction.params.size, agent.episodes_trained, path)
    return path


def load_agent(path: str | Path) -> DQNAgent:
    path = Path(path)
    if not path.is_file():
        raise AgentFileError(f"agent file not found: {path}")
    return agent_from_bytes(path.read_bytes(), source=str(path))
