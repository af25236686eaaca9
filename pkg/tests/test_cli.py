import json

import numpy as np
import pytest
from click.testing import CliRunner

from cliplab.cli import main
from cliplab.session import assign_label, load_session, record_toa, save_session
from conftest import gaussian_clusters, write_manifest


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workspace(tmp_path):
    feats, labels = gaussian_clusters(60, 3, 8, seed=0)
    manifest = write_manifest(tmp_path, feats, [(f"v{i}", 6) for i in range(10)])
    return tmp_path, manifest, labels


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


FAST_EMBED = ["--perplexity", "5", "--iters", "500", "--exaggeration-iters", "100", "--seed", "1"]


class TestIngest:
    def test_creates_session(self, runner, workspace):
        tmp, manifest, _ = workspace
        out = tmp / "session.json"
        result = run_ok(runner, ["ingest", str(manifest), "--out", str(out)])
        assert out.is_file()
        assert "10 videos" in result.output
        session = load_session(out)
        assert session.pool_counts() == (0, 60)

    def test_extractor_hook(self, runner, tmp_path, workspace):
        tmp, manifest, _ = workspace
        out = tmp / "session.json"
        staged = tmp / "staged.json"
        cmd = f"cp {manifest} {staged} && cp {tmp / 'manifest.bin'} {tmp / 'staged.bin'}"
        run_ok(runner, ["ingest", str(staged), "--out", str(out), "--extractor-cmd", cmd])
        assert out.is_file()

    def test_missing_manifest_is_io_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["ingest", str(tmp_path / "none.json"), "--out", str(tmp_path / "s.json")]
        )
        assert result.exit_code == 3
        err = json.loads(result.stderr.strip())
        assert err["error"]["type"] == "IoError"


class TestEmbed:
    def test_writes_embedding_and_updates_session(self, runner, workspace):
        tmp, manifest, _ = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        run_ok(runner, ["embed", str(session_file), *FAST_EMBED])

        emb_file = tmp / "session.embedding.json"
        assert emb_file.is_file()
        doc = json.loads(emb_file.read_text())
        assert len(doc["points"]) == 60
        assert doc["config"]["perplexity"] == 5.0
        session = load_session(session_file)
        assert session.embedding is not None

    def test_same_seed_identical_output(self, runner, workspace):
        tmp, manifest, _ = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        out1 = tmp / "e1.json"
        out2 = tmp / "e2.json"
        run_ok(runner, ["embed", str(session_file), "--out", str(out1), *FAST_EMBED])
        run_ok(runner, ["embed", str(session_file), "--out", str(out2), *FAST_EMBED])
        assert out1.read_bytes() == out2.read_bytes()

    def test_validation_error_exit_code(self, runner, workspace):
        tmp, manifest, _ = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        result = runner.invoke(main, ["embed", str(session_file), "--perplexity", "90"])
        assert result.exit_code == 2
        err = json.loads(result.stderr.strip())
        assert "perplexity" in err["error"]["message"]

    def test_numeric_error_exit_code(self, runner, workspace):
        tmp, manifest, _ = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        result = runner.invoke(
            main,
            ["embed", str(session_file), "--perplexity", "5", "--lr", "1e300",
             "--iters", "200", "--exaggeration-iters", "40"],
        )
        assert result.exit_code == 4
        err = json.loads(result.stderr.strip())
        assert err["error"]["type"] == "OptimizationError"


def label_everything(session_file, labels):
    session = load_session(session_file)
    by_class = {}
    for clip, lab in zip(session.dataset.clips, labels):
        by_class.setdefault(str(lab), []).append(clip.clip_id)
    for class_name, ids in by_class.items():
        assign_label(session, ids, f"class{class_name}")
    record_toa(session, 120.0)
    save_session(session, session_file)


class TestMetricsCommand:
    def test_report(self, runner, workspace):
        tmp, manifest, labels = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        run_ok(runner, ["embed", str(session_file), *FAST_EMBED])
        label_everything(session_file, labels)
        result = run_ok(runner, ["metrics", str(session_file)])
        report = json.loads(result.output)
        assert report["knn_accuracy"] >= 0.9
        assert report["kmeans_k"] == 3
        assert report["time_gain"] == int((60 * 32 / 30 / 60) / 2.0)
        assert sum(report["per_class_counts"].values()) == 60

    def test_requires_embedding(self, runner, workspace):
        tmp, manifest, _ = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        result = runner.invoke(main, ["metrics", str(session_file)])
        assert result.exit_code == 2


class TestEmulate:
    def test_table_shape_and_range(self, runner, workspace):
        tmp, manifest, labels = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        run_ok(runner, ["embed", str(session_file), *FAST_EMBED])
        label_everything(session_file, labels)
        result = run_ok(
            runner,
            ["emulate", str(session_file), "--perplexities", "5,10,15",
             "--iters", "120", "--seed", "0"],
        )
        lines = result.output.strip().splitlines()
        assert "px-5" in lines[0] and "px-15" in lines[0]
        assert lines[1].startswith("homogeneity")
        assert lines[2].startswith("completeness")
        for line in lines[1:3]:
            for cell in line.split()[1:]:
                value = float(cell.rstrip("%"))
                assert 0.0 <= value <= 100.0

    def test_bad_perplexity_list(self, runner, workspace):
        tmp, manifest, _ = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        result = runner.invoke(main, ["emulate", str(session_file), "--perplexities", "a,b"])
        assert result.exit_code == 2


class TestExport:
    def test_roundtrip(self, runner, workspace):
        tmp, manifest, labels = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        run_ok(runner, ["embed", str(session_file), *FAST_EMBED])
        label_everything(session_file, labels)

        out = tmp / "labels.json"
        run_ok(runner, ["export", str(session_file), "--out", str(out)])
        doc = json.loads(out.read_text())
        assert doc["version"] == 1

        # reconstruct per-clip labels from the exported segments
        from cliplab.core import TemporalSegment, labels_from_segments

        session = load_session(session_file)
        expected = session.store.current_labels()
        rebuilt = {}
        for vid, segs in doc["videos"].items():
            segments = [
                TemporalSegment(video_id=vid, class_name=s["label"],
                                start_s=s["segment"][0], end_s=s["segment"][1])
                for s in segs
            ]
            rebuilt.update(labels_from_segments(session.dataset, vid, segments))
        assert rebuilt == expected

    def test_stdout_default(self, runner, workspace):
        tmp, manifest, _ = workspace
        session_file = tmp / "session.json"
        run_ok(runner, ["ingest", str(manifest), "--out", str(session_file)])
        result = run_ok(runner, ["export", str(session_file)])
        doc = json.loads(result.output)
        assert doc["videos"] == {f"v{i}": [] for i in range(10)}
