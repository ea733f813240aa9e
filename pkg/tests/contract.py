"""Loader for the shared wire-protocol contract cases.

The same JSON drives the mock-backend HTTP tests here and the adapter's
test suite, so both servers are held to identical request/response
schemas and error shapes.
"""

from __future__ import annotations

import json
from pathlib import Path

CASES_PATH = Path(__file__).parent / "data" / "wire_contract_cases.json"

_ROLE_BY_PATH = {
    "/v1/generate": "generate",
    "/v1/localize": "localize",
    "/v1/refine": "refine",
}


def load_contract() -> dict:
    doc = json.loads(CASES_PATH.read_text(encoding="utf-8"))
    image = doc["image_png_base64"]
    image2 = doc["image2_png_base64"]

    def expand(value):
        if value == "$IMAGE":
            return image
        if value == "$IMAGE2":
            return image2
        return value

    for case in doc["cases"]:
        case["body"] = {k: expand(v) for k, v in case["body"].items()}
    return doc


def cases_for(server: str, config: str | None = None) -> list[dict]:
    doc = load_contract()
    selected = [c for c in doc["cases"] if server in c["servers"]]
    if config is not None:
        selected = [c for c in selected if c["config"] == config]
    return selected


def mock_fixture_rows(image_hash: str) -> list[dict]:
    """Fixture rows scripting every 200-response mock case by image hash."""
    rows = []
    for case in cases_for("mock"):
        if case["expect_status"] != 200:
            continue
        rows.append(
            {
                "role": _ROLE_BY_PATH[case["path"]],
                "match": image_hash,
                "response": case["expect_body"],
            }
        )
    return rows
