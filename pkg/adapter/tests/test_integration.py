"""Wire compatibility: the primary orchestrator runs unmodified against
the adapter over real HTTP."""

import threading
import time

import numpy as np
import pytest
import uvicorn

from latte import FORMULA, HttpBackend, PixelGrid, TraceStatus, recognize, tokenize
from latte.render import FixtureRenderer

from latte_adapter.engines import RoleEngines
from latte_adapter.server import create_app

from .conftest import ScriptedGenerate, ScriptedLocalize, ScriptedRefine

CORRECT_SRC = "a+b"
WRONG_SRC = "a-b"


@pytest.fixture(scope="module")
def images():
    rng = np.random.default_rng(8)
    gt_arr = np.full((224, 1344, 3), 255, dtype=np.uint8)
    gt_arr[40:90, 80:420] = rng.integers(0, 100, size=(50, 340, 3))
    wrong_arr = gt_arr.copy()
    wrong_arr[60:70, 200:260] = 255
    return PixelGrid(gt_arr), PixelGrid(wrong_arr)


@pytest.fixture(scope="module")
def adapter_url():
    gt_tokens = list(tokenize(CORRECT_SRC))
    wrong_tokens = list(tokenize(WRONG_SRC))
    fault = next(
        i for i, (a, b) in enumerate(zip(wrong_tokens, gt_tokens)) if a != b
    )
    prompt = tuple(wrong_tokens[fault:]) + ("<s>",) + tuple(wrong_tokens[:fault])
    engines = RoleEngines(
        generate=ScriptedGenerate(WRONG_SRC),
        localize=ScriptedLocalize({tuple(wrong_tokens): fault}),
        refine=ScriptedRefine({prompt: gt_tokens[fault:]}),
    )
    config = uvicorn.Config(
        create_app(engines), host="127.0.0.1", port=0, log_level="error"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("adapter server did not start")
        time.sleep(0.02)
    host, port = server.servers[0].sockets[0].getsockname()[:2]
    yield f"http://{host}:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_orchestrator_against_adapter(images, adapter_url):
    gt_image, wrong_image = images
    backend = HttpBackend(adapter_url)
    renderer = FixtureRenderer({CORRECT_SRC: gt_image, WRONG_SRC: wrong_image})
    trace = recognize(gt_image, FORMULA, backend, budget=4, renderer=renderer)
    assert trace.status is TraceStatus.MATCHED
    assert len(trace.rounds) == 2
    assert trace.final_candidate.raw == CORRECT_SRC
    assert trace.rounds[1].fault.index == 1
