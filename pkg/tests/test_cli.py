import hashlib
import json
import subprocess
import sys

import pytest

from faqmatch.cli import main

KB_LINES = [
    {"id": "q1", "question": "What causes fabry disease?", "answer": "It is genetic. Enzymes are missing. See a doctor."},
    {"id": "q2", "question": "What is acid reflux?", "answer": "Stomach acid rises. Diet helps."},
    {"id": "q3", "question": "How is strep treated?", "answer": "Antibiotics. Rest. Fluids."},
]


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


@pytest.fixture
def workspace(tmp_path):
    kb_path = tmp_path / "kb.jsonl"
    write_jsonl(kb_path, KB_LINES)
    index_path = tmp_path / "index.json"
    assert main(["index", "--kb", str(kb_path), "--out", str(index_path)]) == 0

    pairs_path = tmp_path / "pairs.jsonl"
    write_jsonl(
        pairs_path,
        [
            {"chq": "my stomach burns after meals what could it be", "ref_faq": "what is acid reflux"},
            {"chq": "my kid has a sore throat with fever", "ref_faq": "how is strep treated"},
        ],
    )
    params_path = tmp_path / "params.txt"
    code = main(
        ["train", "--pairs", str(pairs_path), "--index", str(index_path),
         "--params-out", str(params_path), "--epochs", "0", "--dim", "8"]
    )
    assert code == 0
    return tmp_path, index_path, params_path, pairs_path


class TestIndex:
    def test_summary_line(self, tmp_path, capsys):
        kb_path = tmp_path / "kb.jsonl"
        write_jsonl(kb_path, KB_LINES)
        out = tmp_path / "index.json"
        assert main(["index", "--kb", str(kb_path), "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "entries=3" in stdout
        assert out.exists()

    def test_duplicate_id_exit_code(self, tmp_path, capsys):
        kb_path = tmp_path / "kb.jsonl"
        write_jsonl(kb_path, [KB_LINES[0], KB_LINES[0]])
        out = tmp_path / "index.json"
        assert main(["index", "--kb", str(kb_path), "--out", str(out)]) == 1
        assert "q1" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path):
        assert main(["index", "--kb", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o.json")]) == 2

    def test_ref_faqs_widen_vocab(self, tmp_path):
        kb_path = tmp_path / "kb.jsonl"
        write_jsonl(kb_path, KB_LINES)
        refs_path = tmp_path / "refs.jsonl"
        write_jsonl(refs_path, [{"chq": "x", "ref_faq": "zebra stripes question"}])
        out = tmp_path / "index.json"
        assert main(["index", "--kb", str(kb_path), "--ref-faqs", str(refs_path), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert "zebra" in payload["tfidf"]["vocab"]

    def test_custom_abbreviation_list(self, tmp_path):
        kb_path = tmp_path / "kb.jsonl"
        write_jsonl(kb_path, [{"id": "a", "question": "What is sec two?", "answer": "See sec. Two for details."}])
        abbr = tmp_path / "abbr.txt"
        out = tmp_path / "index.json"

        assert main(["index", "--kb", str(kb_path), "--out", str(out)]) == 0
        default_split = json.loads(out.read_text())["entries"][0]["answer_sentences"]
        assert len(default_split) == 2

        abbr.write_text("sec\n", encoding="utf-8")
        assert main(["index", "--kb", str(kb_path), "--out", str(out), "--abbreviations", str(abbr)]) == 0
        guarded = json.loads(out.read_text())["entries"][0]["answer_sentences"]
        assert guarded == ["See sec. Two for details."]


class TestQuery:
    def test_verbatim_faq(self, workspace, capsys):
        _, index_path, params_path, _ = workspace
        code = main(
            ["query", "--index", str(index_path), "--params", str(params_path),
             "What is acid reflux?", "--json"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["matched_faq"]["id"] == "q2"
        assert payload["matched_faq"]["score"] == pytest.approx(1.0)
        assert {"matched_faq", "answers", "timing_ms"} <= set(payload)
        for ans in payload["answers"]:
            assert {"index", "text", "score"} <= set(ans)

    def test_human_readable(self, workspace, capsys):
        _, index_path, params_path, _ = workspace
        assert main(["query", "--index", str(index_path), "--params", str(params_path), "strep"]) == 0
        out = capsys.readouterr().out
        assert "matched:" in out and "timing_ms" in out

    def test_batch_order_preserved(self, workspace, capsys):
        tmp_path, index_path, params_path, _ = workspace
        queries = [{"id": f"u{i}", "question": f"question {i} acid reflux"} for i in range(100)]
        qfile = tmp_path / "queries.jsonl"
        write_jsonl(qfile, queries)
        code = main(["query", "--index", str(index_path), "--params", str(params_path), "--query-file", str(qfile)])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 100
        assert [json.loads(line)["id"] for line in lines] == [f"u{i}" for i in range(100)]

    def test_batch_accepts_summary_field(self, workspace, capsys):
        tmp_path, index_path, params_path, _ = workspace
        qfile = tmp_path / "sums.jsonl"
        write_jsonl(qfile, [{"id": "s1", "chq": "long text", "summary": "acid reflux"}])
        assert main(["query", "--index", str(index_path), "--params", str(params_path), "--query-file", str(qfile)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["id"] == "s1"

    def test_both_query_sources_rejected(self, workspace):
        tmp_path, index_path, params_path, _ = workspace
        assert main(["query", "--index", str(index_path), "--params", str(params_path)]) == 1

    def test_k_n_flags(self, workspace, capsys):
        _, index_path, params_path, _ = workspace
        code = main(
            ["query", "--index", str(index_path), "--params", str(params_path),
             "acid reflux", "--json", "--k", "2", "--n", "1"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["answers"]) == 1

    def test_config_file_precedence(self, workspace, capsys):
        tmp_path, index_path, params_path, _ = workspace
        cfg = tmp_path / "engine.cfg"
        cfg.write_text("n_select = 1\nk = 2\n", encoding="utf-8")
        code = main(
            ["query", "--index", str(index_path), "--params", str(params_path),
             "acid reflux", "--json", "--config", str(cfg)]
        )
        assert code == 0
        assert len(json.loads(capsys.readouterr().out)["answers"]) == 1

    def test_paths_from_config_file(self, workspace, capsys):
        tmp_path, index_path, params_path, _ = workspace
        cfg = tmp_path / "engine.cfg"
        cfg.write_text(f"index_path = {index_path}\nparams_path = {params_path}\n", encoding="utf-8")
        assert main(["query", "--config", str(cfg), "acid reflux", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["matched_faq"]["id"] == "q2"

    def test_missing_paths_rejected(self):
        assert main(["query", "acid reflux"]) == 1


class TestTrain:
    def test_epochs_zero_hash_equal(self, workspace):
        tmp_path, index_path, params_path, pairs_path = workspace
        out_path = tmp_path / "params2.txt"
        code = main(
            ["train", "--pairs", str(pairs_path), "--index", str(index_path),
             "--params-in", str(params_path), "--params-out", str(out_path), "--epochs", "0"]
        )
        assert code == 0
        digest = lambda p: hashlib.sha256(p.read_bytes()).hexdigest()
        assert digest(out_path) == digest(params_path)

    def test_training_writes_loss_log(self, workspace, capsys):
        tmp_path, index_path, params_path, pairs_path = workspace
        out_path = tmp_path / "trained.txt"
        log_path = tmp_path / "loss.csv"
        code = main(
            ["train", "--pairs", str(pairs_path), "--index", str(index_path),
             "--params-in", str(params_path), "--params-out", str(out_path),
             "--epochs", "2", "--lr", "0.1", "--loss-log", str(log_path)]
        )
        assert code == 0
        lines = log_path.read_text().strip().splitlines()
        assert lines[0] == "epoch,mean_total,mean_mat,mean_sim,mean_sel"
        assert len(lines) == 3
        assert "epoch=2" in capsys.readouterr().out

    def test_empty_pairs_file(self, workspace):
        tmp_path, index_path, params_path, _ = workspace
        empty = tmp_path / "empty.jsonl"
        empty.write_text("", encoding="utf-8")
        code = main(
            ["train", "--pairs", str(empty), "--index", str(index_path),
             "--params-out", str(tmp_path / "x.txt"), "--epochs", "1"]
        )
        assert code == 1


class TestFilter:
    def test_cutoff_zero_keeps_everything(self, workspace, capsys):
        tmp_path, index_path, _, pairs_path = workspace
        out = tmp_path / "filtered.jsonl"
        hist = tmp_path / "hist.csv"
        code = main(
            ["filter", "--pairs", str(pairs_path), "--index", str(index_path),
             "--cutoff", "0", "--out", str(out), "--histogram", str(hist)]
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert "survivors=2" in stdout and "rejected=0" in stdout
        rows = [json.loads(line) for line in out.read_text().strip().splitlines()]
        assert all(r["split"] in ("train", "dev", "test") for r in rows)
        hist_lines = hist.read_text().strip().splitlines()
        assert hist_lines[0] == "bucket_low,bucket_high,count"
        assert len(hist_lines) == 21

    def test_cutoff_above_one_rejects_everything(self, workspace, capsys):
        tmp_path, index_path, _, pairs_path = workspace
        out = tmp_path / "filtered.jsonl"
        code = main(
            ["filter", "--pairs", str(pairs_path), "--index", str(index_path),
             "--cutoff", "1.0", "--out", str(out)]
        )
        assert code == 0


class TestEvalRouge:
    def test_prints_report(self, tmp_path, capsys):
        pred = tmp_path / "pred.txt"
        ref = tmp_path / "ref.txt"
        pred.write_text("what causes pain\n", encoding="utf-8")
        ref.write_text("what causes migraine pain\n", encoding="utf-8")
        assert main(["eval-rouge", "--pred", str(pred), "--ref", str(ref)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["r1"] == pytest.approx(6 / 7, abs=1e-6)
        assert payload["n_examples"] == 1

    def test_mismatched_lines_exit_code(self, tmp_path):
        pred = tmp_path / "pred.txt"
        ref = tmp_path / "ref.txt"
        pred.write_text("a\nb\n", encoding="utf-8")
        ref.write_text("a\n", encoding="utf-8")
        assert main(["eval-rouge", "--pred", str(pred), "--ref", str(ref)]) == 1


class TestGradcheck:
    def test_passes_on_correct_build(self, capsys):
        assert main(["gradcheck", "--trials", "20", "--tol", "1e-4"]) == 0
        out = capsys.readouterr().out
        assert "gradcheck sim: ok" in out
        assert "gradcheck loss: ok" in out


def test_console_entry_point_runs():
    result = subprocess.run(
        [sys.executable, "-m", "faqmatch.cli", "gradcheck", "--trials", "3"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert result.returncode == 0, result.stderr
