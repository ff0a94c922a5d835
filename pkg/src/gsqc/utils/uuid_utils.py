"""UUID utilities for reproducible run identifiers."""

import json
import uuid

from ..models.run_config import RunConfig

# Namespace for run identifiers (URL namespace as base)
GSQC_RUN_UUID_NAMESPACE = uuid.UUID('6ba7b811-9dad-11d1-80b4-00c04fd430c8')


def generate_run_uuid(config: RunConfig) -> str:
    """
    Generate a deterministic UUID for one command run.

    Identical configurations (seed included) always map to the same identifier, so
    artifacts of repeated runs land on the same file names.

    Args:
        config: RunConfig capturing every command-line input

    Returns:
        String representation of UUID
    """
    content = json.dumps(config.model_dump(mode='json'), sort_keys=True, separators=(',', ':'))
    return str(uuid.uuid5(GSQC_RUN_UUID_NAMESPACE, content))


def generate_artifact_name(config: RunConfig, suffix: str) -> str:
    """File name `<command>-<uuid><suffix>` for an artifact of a run."""
    return f"{config.command}-{generate_run_uuid(config)}{suffix}"
