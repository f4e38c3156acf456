"""Pipeline configuration: packaged defaults deep-merged with a user file."""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import ValidationFailure


def _data_json(name: str) -> Any:
    return json.loads(resources.files("sargen.data").joinpath(name).read_text(encoding="utf-8"))


def packaged_seed_path() -> str:
    """Filesystem path of the bundled mock MCP seed (for spawning mock-mcp)."""
    return str(resources.files("sargen.data").joinpath("mcp_seed.json"))


DEFAULT_AGENT_CONFIG: dict[str, Any] = {
    "txn_fraud": {
        "band_low_major": 9000,
        "band_high_major": 10000,
        "structuring_min_count": 3,
        "structuring_window_hours": 72,
        "pass_through_window_hours": 72,
        "pass_through_ratio": 0.8,
        "pass_through_min_inflow_major": 5000,
    },
    "velocity": {
        "window_hours": 1,
        "max_count": 10,
        "max_sum_major": 10000,
        "directions": ["debit"],
    },
    "country_risk": {
        "countries": ["IR", "KP", "SY", "CU", "MM", "NG", "TR", "AF", "YE"],
        "min_count": 1,
    },
    "text_content": {
        "min_hits": 1,
        "lexicons": {
            "romance": [
                "fiancé", "fiancée", "fiance", "fiancee", "boyfriend", "girlfriend",
                "soulmate", "my love", "never met", "online romance", "overseas partner",
            ],
            "gift_card": ["gift card", "gift cards", "prepaid card", "itunes card", "steam card"],
            "secrecy": [
                "under the radar", "keep this quiet", "don't tell", "do not tell",
                "avoid detection", "split into smaller", "no questions asked",
            ],
            "urgency": ["urgent", "immediately", "right away", "emergency", "act now"],
        },
    },
    "geo_anomaly": {"max_speed_kmh": 900},
    "account_health": {
        "dormancy_days": 90,
        "burst_window_hours": 72,
        "burst_min_count": 3,
        "credential_window_hours": 72,
        "spike_min_count": 3,
    },
    "dispute_pattern": {"max_ratio": 0.15},
}

DEFAULT_TYPOLOGY_AGENT_MAP: dict[str, list[str]] = {
    "elder_exploitation": ["text_content", "account_health", "txn_fraud"],
    "romance_scam": ["text_content", "velocity", "txn_fraud"],
    "human_trafficking": ["country_risk", "velocity", "text_content"],
    "money_mule": ["velocity", "txn_fraud", "account_health", "text_content"],
    "terrorist_financing": ["country_risk", "txn_fraud", "text_content"],
    "csam": ["text_content", "txn_fraud"],
    "identity_theft": ["account_health", "dispute_pattern", "geo_anomaly"],
    "fraud_scheme": ["txn_fraud", "dispute_pattern", "velocity"],
}


def default_config() -> dict[str, Any]:
    return {
        "privacy": {"mask_threshold": 0.5, "stream_overlap": 256},
        "crimetype": {
            "registry": _data_json("indicator_registry.json"),
            "model": _data_json("typology_model.json"),
            "activation_threshold": 0.35,
        },
        "agents": copy.deepcopy(DEFAULT_AGENT_CONFIG),
        "pipeline": {
            "typology_agents": copy.deepcopy(DEFAULT_TYPOLOGY_AGENT_MAP),
            "floor_agents": ["txn_fraud"],
            "max_regen_cycles": 5,
            "deterministic_clock": True,
        },
        "intel": {
            "servers": [],
            "cap": 5,
            "timeout_s": 10.0,
            "retries": 1,
        },
        "narrative": {
            "adapter": {"kind": "mock"},
            "max_prompt_chars": 60000,
            "memory_k_typology": 3,
            "memory_k_historical": 2,
        },
        "memory": {"path": None, "seed": _data_json("memory_seed.json")},
        "institution": {
            "name": "Meridian Community Bank, N.A.",
            "id": "RSSD-2840412",
            "address": "500 Main Street, Columbus, OH 43215",
        },
        "filer": {
            "name": "Compliance Operations Desk",
            "title": "BSA Officer",
            "phone": "614-555-0142",
            "email": "bsa-office@meridian.example",
        },
        "eval": {
            "intro_weights": {"date_range": 0.25, "amount": 0.35, "subjects": 0.25, "accounts": 0.15},
            "narrative_weights": {
                "who": 1 / 7, "what": 1 / 7, "when": 1 / 7, "where": 1 / 7,
                "how": 1 / 7, "why": 1 / 7, "supporting_information": 1 / 7,
            },
            "final_weights": {"intro": 0.3, "narrative": 0.7},
        },
        "service": {"host": "127.0.0.1", "port": 8040, "token_env": "SARGEN_API_TOKEN"},
    }


def _deep_merge(base: dict, overlay: dict) -> dict:
    merged = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: str | Path | None = None) -> dict[str, Any]:
    config = default_config()
    if path is None:
        return config
    try:
        overlay = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(overlay, dict):
        raise ValidationFailure(f"config {path} must be a JSON object")
    return _deep_merge(config, overlay)


def mock_intel_server_entry(seed_path: str | None = None) -> dict[str, Any]:
    """Server-registry row that spawns the bundled mock MCP server over stdio."""
    import sys

    return {
        "server_id": "mock-intel",
        "transport": "stdio",
        "command": [
            sys.executable, "-m", "sargen.intel.mockserver",
            "--seed", seed_path or packaged_seed_path(),
            "--transport", "stdio",
        ],
    }
