"""Serialization helpers: complex values as [re, im] pairs, matrices as
row-major nested arrays, canonical JSON, and content fingerprints."""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .errors import ConfigError


def complex_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_complex(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ConfigError(f"expected [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def matrix_rows(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[complex_pair(z) for z in row] for row in a]


def rows_matrix(rows) -> np.ndarray:
    try:
        return np.array([[pair_complex(z) for z in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed matrix: {exc}") from exc


def vector_pairs(v: np.ndarray) -> list:
    return [complex_pair(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def pairs_vector(pairs) -> np.ndarray:
    try:
        return np.array([pair_complex(z) for z in pairs], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed vector: {exc}") from exc


def model_payload(model) -> dict:
    return {
        "probe_dim": model.probe_dim,
        "system_dim": model.system_dim,
        "step_time": model.step_time,
        "hamiltonians": [matrix_rows(h) for h in model.hamiltonians],
    }


def explicit_scenario(model) -> dict:
    """Config-format scenario block that reconstructs this model exactly."""
    return {
        "kind": "explicit",
        "hamiltonians": [matrix_rows(h) for h in model.hamiltonians],
        "step_time": model.step_time,
    }


def protocol_payload(protocol) -> dict:
    payload = {
        "model": model_payload(protocol.model),
        "preparation": vector_pairs(protocol.preparation.amplitudes),
        "step_bases": [
            {
                "name": basis.name,
                "labels": list(basis.labels),
                "states": matrix_rows(basis.states),
            }
            for basis in protocol.step_bases
        ],
    }
    if protocol.step_times is not None:
        payload["step_times"] = list(protocol.step_times)
    return payload


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def fingerprint(data) -> str:
    """Stable 16-hex-digit digest of a JSON-serializable payload."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()[:16]


def write_json(path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")
