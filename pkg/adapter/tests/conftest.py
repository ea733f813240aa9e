import json
from pathlib import Path

import pytest

# The wire contract is shared with the primary package so both servers
# answer the identical fixtures.
CONTRACT_PATH = Path(__file__).resolve().parents[2] / "tests" / "data" / "wire_contract_cases.json"


def load_contract() -> dict:
    doc = json.loads(CONTRACT_PATH.read_text(encoding="utf-8"))
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


@pytest.fixture(scope="session")
def contract() -> dict:
    return load_contract()


class ScriptedGenerate:
    def __init__(self, latex: str):
        self.latex = latex

    def generate(self, image) -> str:
        return self.latex


class ScriptedLocalize:
    """Returns a scripted raw index per token sequence (pre-clamping)."""

    def __init__(self, by_tokens: dict[tuple, int]):
        self.by_tokens = by_tokens

    def localize(self, image, tokens) -> int:
        return self.by_tokens[tuple(tokens)]


class ScriptedRefine:
    def __init__(self, by_prompt: dict[tuple, list[str]]):
        self.by_prompt = by_prompt

    def refine(self, image, prompt_tokens) -> list[str]:
        return list(self.by_prompt[tuple(prompt_tokens)])


class ExplodingEngine:
    def generate(self, image) -> str:
        raise RuntimeError("checkpoint produced garbage")


def engines_from_contract(doc: dict):
    """Stub engines scripted with every 200-case's raw output."""
    from latte_adapter.engines import RoleEngines

    generate_latex = None
    localize_map: dict[tuple, int] = {}
    refine_map: dict[tuple, list[str]] = {}
    for case in doc["cases"]:
        if case["expect_status"] != 200 or "adapter" not in case["servers"]:
            continue
        stub = case.get("stub", {})
        if case["path"] == "/v1/generate":
            generate_latex = stub["latex"]
        elif case["path"] == "/v1/localize":
            localize_map[tuple(case["body"]["tokens"])] = stub["index"]
        elif case["path"] == "/v1/refine":
            refine_map[tuple(case["body"]["prompt_tokens"])] = stub["completion_tokens"]
    return RoleEngines(
        generate=ScriptedGenerate(generate_latex),
        localize=ScriptedLocalize(localize_map),
        refine=ScriptedRefine(refine_map),
    )
