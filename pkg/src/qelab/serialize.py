"""JSON wire formats: matrices, states, ciphertexts, experiment results.

Matrices serialize row-major with [re, im] pairs per entry.  Tags are
bitstrings packed into base64 alongside their bit length.  Result
documents are versioned and rendered canonically (sorted keys, fixed
indentation) so identical runs produce byte-identical files.
"""

from __future__ import annotations

import base64
import csv
import io
import json

import numpy as np

from .errors import MalformedKeyError
from .quantum import DensityMatrix
from .schemes import Ciphertext, PkeCiphertext, SkeCiphertext

SCHEMA_VERSION = 1


def matrix_to_json(mat: np.ndarray) -> list:
    mat = np.asarray(mat, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in mat]


def matrix_from_json(data: list) -> np.ndarray:
    return np.array(
        [[complex(entry[0], entry[1]) for entry in row] for row in data],
        dtype=np.complex128,
    )


def state_to_json(state: DensityMatrix) -> dict:
    return {
        "layout": [[r.name, r.qubits] for r in state.layout],
        "matrix": matrix_to_json(state.to_float().mat),
    }


def state_from_json(data: dict) -> DensityMatrix:
    return DensityMatrix(matrix_from_json(data["matrix"]), data["layout"])


def bits_to_base64(bits: str) -> str:
    if any(b not in "01" for b in bits):
        raise MalformedKeyError(f"expected a 0/1 string, got {bits!r}")
    padded = bits + "0" * (-len(bits) % 8)
    raw = bytes(int(padded[i : i + 8], 2) for i in range(0, len(padded), 8))
    return base64.b64encode(raw).decode("ascii")


def base64_to_bits(data: str, length: int) -> str:
    raw = base64.b64decode(data.encode("ascii"))
    bits = "".join(format(byte, "08b") for byte in raw)
    if len(bits) < length:
        raise MalformedKeyError("encoded tag shorter than its declared length")
    return bits[:length]


def ciphertext_to_json(ct: Ciphertext) -> dict:
    return {
        "tag_b64": bits_to_base64(ct.tag),
        "tag_len": len(ct.tag),
        "payload": state_to_json(ct.payload),
    }


_CIPHERTEXT_KINDS = {"ske": SkeCiphertext, "pke": PkeCiphertext, "plain": Ciphertext}


def ciphertext_from_json(data: dict, kind: str = "plain") -> Ciphertext:
    cls = _CIPHERTEXT_KINDS[kind]
    tag = base64_to_bits(data["tag_b64"], data["tag_len"])
    return cls(tag, state_from_json(data["payload"]))


# ---------------------------------------------------------------------------
# Experiment result documents
# ---------------------------------------------------------------------------


def result_document(command: str, config: dict, results: list, passed: bool) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
        "pass": bool(passed),
    }


def canonical_json(document: dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def results_to_csv(document: dict) -> str:
    """Flat CSV mirror of the result rows (scalars only; JSON stays primary)."""
    rows = []
    for result in document.get("results", []):
        row = {"command": document["command"]}
        for key, value in sorted(result.items()):
            if isinstance(value, (str, int, float, bool)) or value is None:
                row[key] = value
        rows.append(row)
    if not rows:
        return ""
    fields = sorted({k for row in rows for k in row})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
