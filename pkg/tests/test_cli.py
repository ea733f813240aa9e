import json

import numpy as np
import pytest

from latte.cli import main
from latte.orchestrator import tokenize
from latte.raster import PixelGrid, save_image

from .conftest import column_palette, grid_from_ids


@pytest.fixture
def png_pair(tmp_path):
    palette = column_palette(4, 3)
    gt = grid_from_ids([0, 1, 2, 0], palette)
    rendered = grid_from_ids([0, 2, 2, 0], palette)
    gt_path = tmp_path / "gt.png"
    r_path = tmp_path / "rendered.png"
    save_image(gt, gt_path)
    save_image(rendered, r_path)
    return gt_path, r_path


class TestDiff:
    def test_identical_images(self, tmp_path, png_pair, capsys):
        gt_path, _ = png_pair
        out = tmp_path / "dv.png"
        code = main(["diff", str(gt_path), str(gt_path), "--out", str(out)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["distance"] == 0
        assert payload["orientation"] == "column"
        assert out.exists()

    def test_differing_images_summary(self, png_pair, capsys):
        gt_path, r_path = png_pair
        code = main(["diff", str(gt_path), str(r_path)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["distance"] == 1
        assert payload["op_blocks"]["Substitute"] == 1
        assert payload["op_counts"]["Copy"] == 3

    def test_dimension_mismatch_is_domain_error(self, tmp_path, capsys):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        save_image(PixelGrid.white(4, 4), a)
        save_image(PixelGrid.white(5, 4), b)
        assert main(["diff", str(a), str(b)]) == 1

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            main(["definitely-not-a-command"])
        assert err.value.code == 2


def write_recognize_fixtures(tmp_path, spec_h=224, spec_w=1344):
    rng = np.random.default_rng(99)
    gt_arr = np.full((spec_h, spec_w, 3), 255, dtype=np.uint8)
    gt_arr[10:20, 30:60] = rng.integers(0, 200, size=(10, 30, 3))
    gt = PixelGrid(gt_arr)
    wrong_arr = gt_arr.copy()
    wrong_arr[12:16, 40:45] = 255
    wrong = PixelGrid(wrong_arr)

    gt_png = tmp_path / "gt.png"
    wrong_png = tmp_path / "wrong.png"
    save_image(gt, gt_png)
    save_image(wrong, wrong_png)

    correct_src = "a+b"
    wrong_src = "a-b"
    render_fixture = tmp_path / "renders.json"
    render_fixture.write_text(
        json.dumps({correct_src: str(gt_png), wrong_src: str(wrong_png)}), encoding="utf-8"
    )

    gt_tokens = list(tokenize(correct_src))
    mock = tmp_path / "mock.jsonl"
    rows = [
        {"role": "generate", "match": 0, "response": {"latex": wrong_src}},
        {"role": "localize", "match": 0, "response": {"index": 1}},
        {"role": "refine", "match": 0, "response": {"completion_tokens": gt_tokens[1:]}},
    ]
    mock.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
    return gt_png, mock, render_fixture


class TestRecognize:
    def test_two_round_fixture_flow(self, tmp_path, capsys):
        gt_png, mock, render_fixture = write_recognize_fixtures(tmp_path)
        trace_path = tmp_path / "trace.json"
        delta_dir = tmp_path / "deltas"
        code = main(
            [
                "recognize",
                "--image", str(gt_png),
                "--kind", "formula",
                "--mock", str(mock),
                "--budget", "4",
                "--trace-out", str(trace_path),
                "--emit-delta", str(delta_dir),
                "--render-fixture", str(render_fixture),
                "--require-match",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "matched"
        assert payload["rounds"] == 2
        trace = json.loads(trace_path.read_text())
        assert len(trace["rounds"]) == 2
        assert trace["rounds"][1]["fault"]["index"] == 1
        assert (delta_dir / "delta_round_1.png").exists()

    def test_require_match_fails_on_budget_exhaustion(self, tmp_path, capsys):
        gt_png, _, render_fixture = write_recognize_fixtures(tmp_path)
        mock = tmp_path / "always_wrong.jsonl"
        rows = [{"role": "generate", "match": 0, "response": {"latex": "zz"}}]
        for i in range(3):
            rows.append({"role": "localize", "match": i, "response": {"index": 0}})
            rows.append({"role": "refine", "match": i, "response": {"completion_tokens": ["z", "z"]}})
        mock.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
        code = main(
            [
                "recognize",
                "--image", str(gt_png),
                "--mock", str(mock),
                "--budget", "4",
                "--render-fixture", str(render_fixture),
                "--require-match",
            ]
        )
        assert code == 1
        payload = json.loads(capsys.readouterr().out)
        assert payload["status"] == "budget_exhausted"
        assert payload["rounds"] == 4

    def test_missing_backend_is_usage_error(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("LATTE_BACKEND_URL", raising=False)
        gt_png, _, _ = write_recognize_fixtures(tmp_path)
        code = main(["recognize", "--image", str(gt_png)])
        assert code == 2


class TestEval:
    def test_manifest_with_candidate_images(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        gt_arr = np.full((224, 1344, 3), 255, dtype=np.uint8)
        gt_arr[: 20, : 40] = rng.integers(0, 200, size=(20, 40, 3))
        gt = PixelGrid(gt_arr)
        bad_arr = gt_arr.copy()
        bad_arr[:, 10] = 255
        gt_png = tmp_path / "gt.png"
        good_png = tmp_path / "good.png"
        bad_png = tmp_path / "bad.png"
        save_image(gt, gt_png)
        save_image(gt, good_png)
        save_image(PixelGrid(bad_arr), bad_png)
        manifest = tmp_path / "eval.jsonl"
        rows = [
            {
                "gt_image": str(gt_png),
                "candidate_image": str(good_png),
                "candidate_source": "x+y",
                "gt_source": "x+y",
            },
            {
                "gt_image": str(gt_png),
                "candidate_image": str(bad_png),
                "candidate_source": "x-y",
                "gt_source": "x+y",
            },
        ]
        manifest.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
        code = main(["eval", str(manifest), "--kind", "formula"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["samples"] == 2
        assert payload["match_rate"] == 0.5
        assert 0.0 < payload["mean_edit_score"] <= 1.0
        assert payload["mean_bleu4"] is not None


class TestCorpusCli:
    def test_extract(self, tmp_path, capsys):
        tex = tmp_path / "doc.tex"
        tex.write_text(
            "\\begin{tabular}{cc} a & b \\\\ \\end{tabular} % trailing\n", encoding="utf-8"
        )
        code = main(["corpus", "extract", str(tex)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["count"] == 1


class TestRenderCli:
    def test_missing_toolchain_is_config_error(self, capsys, monkeypatch, tmp_path):
        from latte.render import toolchain_available

        if toolchain_available():
            pytest.skip("toolchain present; config-error path not reachable")
        code = main(["render", "--text", "x", "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "configuration error" in capsys.readouterr().err
