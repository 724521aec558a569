import json
import subprocess
import sys

import jsonschema
import pytest

from excseq import gallery, search
from excseq.cli import REPORT_SCHEMA, main, read_sequence_file, InputError


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    lines = [json.loads(x) for x in out.splitlines() if x.strip()]
    return code, (lines[0] if len(lines) == 1 else lines), err


def doc(points, **extra):
    return {"rank": len(points[0]), "points": [list(p) for p in points], **extra}


# -- check ------------------------------------------------------------------------------


def test_check_maximal_plane(capsys, seq_file):
    code, out, _ = call(capsys, "check", seq_file(doc(gallery.NOLEX_PLANE)))
    assert code == 0
    assert out["exceptional"] and out["maximal"] and out["violations"] == []
    assert out["widths"] == [9, 3]
    assert out["layer_loads"][1] == {"axis": 1, "offset": 0, "loads": [1, 2, 1]}


def test_check_unordered_set(capsys, seq_file):
    code, out, _ = call(capsys, "check", seq_file(doc(gallery.NOT_ORDERED)))
    assert code == 1
    assert out["violations"] == [[0, 3]] and not out["maximal"]


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        json.dumps({"points": [[0, 0]]}),
        json.dumps({"rank": 2, "points": [[0, 0, 0]]}),
        json.dumps({"rank": 2, "points": [[0, 0.5]]}),
        json.dumps({"rank": 2, "points": []}),
        json.dumps({"rank": 2, "d": [1], "points": [[0, 0]]}),
        json.dumps({"rank": 1, "d": [0], "points": [[0]]}),
        json.dumps([1, 2]),
    ],
)
def test_malformed_input(capsys, seq_file, text):
    code, _, err = call(capsys, "check", seq_file(text))
    assert code == 2
    assert "error" in json.loads(err)


def test_missing_file(capsys, tmp_path):
    assert call(capsys, "check", tmp_path / "nope.json")[0] == 2


def test_read_sequence_file_with_d(seq_file):
    seq, d = read_sequence_file(seq_file(doc([(0,), (1,), (2,)], d=[2])))
    assert d.d == (2,) and len(seq) == 3
    with pytest.raises(InputError):
        read_sequence_file(seq_file('{"rank": 1, "points": [[true]]}'))


# -- contaminate -------------------------------------------------------------------------


@pytest.mark.parametrize("name, steps", sorted(gallery.GOLDEN_STEPS.items()))
def test_contaminate_golden(capsys, seq_file, name, steps):
    code, out, _ = call(capsys, "contaminate", seq_file(doc(gallery.get(name).points)))
    assert code == 0
    assert out["full"] and out["steps"] == steps and out["status"] == "full"
    assert len(out["flats_per_round"]) == steps + 1 and out["flats_per_round"][-1] == 1


def test_contaminate_stable_set(capsys, seq_file):
    code, out, _ = call(capsys, "contaminate", seq_file(doc(gallery.NOT_ORDERED)))
    assert code == 1
    assert out == {"full": False, "status": "stable_not_full", "steps": 0, "flats_per_round": [4]}


def test_contaminate_round_cap(capsys, seq_file):
    code, out, _ = call(capsys, "contaminate", seq_file(doc(gallery.SEVEN_STEP)), "--max-rounds", 2)
    assert code == 3 and out["status"] == "round_cap_reached"


def test_contaminate_general_d(capsys, seq_file):
    code, out, _ = call(capsys, "contaminate", seq_file(doc([(0,), (1,), (2,)], d=[2])))
    assert code == 0 and out["steps"] == 1


def test_contaminate_frames(capsys, seq_file, tmp_path):
    frames = tmp_path / "frames.jsonl"
    code, _, _ = call(capsys, "contaminate", seq_file(doc(gallery.FOUR_STEP)), "--frames", frames)
    assert code == 0
    recs = [json.loads(x) for x in frames.read_text().splitlines()]
    assert [r["round"] for r in recs] == [0, 1, 2, 3, 4]
    assert recs[0]["window"] == [[-1, 6]] * 3
    assert all(set("".join(row)) == {"#"} for plane in recs[-1]["raster"] for row in plane)
    assert sum(row.count("#") for plane in recs[0]["raster"] for row in plane) == 8


def test_contaminate_explicit_window(capsys, seq_file, tmp_path):
    frames = tmp_path / "frames.jsonl"
    call(capsys, "contaminate", seq_file(doc(gallery.FOUR_STEP)), "--frames", frames, "--window", "0:5,0:5,0:5")
    rec = json.loads(frames.read_text().splitlines()[1])
    assert rec["window"] == [[0, 5]] * 3 and len(rec["raster"]) == 6
    assert call(capsys, "contaminate", seq_file(doc(gallery.FOUR_STEP)), "--frames", frames, "--window", "0:5")[0] == 2


# -- label -----------------------------------------------------------------------------------


def test_label_tetra(capsys, seq_file):
    code, out, _ = call(capsys, "label", seq_file(doc(gallery.TETRA)))
    assert code == 0
    assert out["labeling"] == [list(v) for v in gallery.TETRA_LABELING]
    assert out["normalized"][0] == [0, 0, 0]


def test_label_standard(capsys, tmp_path):
    path = tmp_path / "std.json"
    assert main(["examples", "--which", "standard", "--out", str(path)]) == 0
    code, out, _ = call(capsys, "label", path)
    assert code == 0 and out["normalized"][0] == [0, 0, 0] and len(out["labeling"]) == 8


def test_label_non_maximal(capsys, seq_file):
    assert call(capsys, "label", seq_file(doc([(0, 0), (1, 0)])))[0] == 1


# -- examples ----------------------------------------------------------------------------------


def test_examples(capsys):
    code, out, _ = call(capsys, "examples", "--which", "stretch", "--n", 3)
    assert code == 0 and out["rank"] == 3 and out["points"][1] == [1, 3, 3]
    assert call(capsys, "examples", "--which", "nope")[0] == 2
    assert call(capsys, "examples", "--which", "stretch", "--n", 0)[0] == 2


# -- enumerate ---------------------------------------------------------------------------------


def test_enumerate_smoke_profile(capsys, tmp_path):
    out_file = tmp_path / "rep.json"
    code, out, _ = call(capsys, "enumerate", "--profile", "smoke_2d_5x5", "--out", out_file)
    assert code == 0 and out["sequences_found"] == 13 and out["all_full"]
    report = json.loads(out_file.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert (tmp_path / "rep.records.jsonl").exists()


def test_enumerate_prune_flag_gives_identical_sets(capsys, tmp_path):
    sets = []
    for flags in ([], ["--no-prune"]):
        rec = tmp_path / f"rec{len(sets)}.jsonl"
        code, _, _ = call(capsys, "enumerate", "--grid", "2x2x2", "--records", rec, "--save-sequences", *flags)
        assert code == 0
        saved = tmp_path.glob(f"{rec.stem}.2x2x2.*.jsonl")
        sets.append(sorted(json.loads(x)["points"] for p in saved for x in p.read_text().splitlines()))
    assert sets[0] == sets[1] and len(sets[0]) == 8


def test_enumerate_argument_errors(capsys):
    assert call(capsys, "enumerate")[0] == 2
    assert call(capsys, "enumerate", "--grid", "2x2", "--profile", "smoke_2d_5x5")[0] == 2
    assert call(capsys, "enumerate", "--profile", "nonsense")[0] == 2


def test_enumerate_counterexample_exit_code(capsys, monkeypatch):
    from excseq.contamination import STABLE, ClosureResult

    monkeypatch.setattr(search, "closure", lambda pts, d, cap: ClosureResult(STABLE, 0, ()))
    monkeypatch.setattr(search, "thin_axis", lambda seq: None)
    code, out, err = call(capsys, "enumerate", "--grid", "2x2")
    assert code == 4 and not out["all_full"]
    assert json.loads(err.splitlines()[0])["not_full"]


def test_enumerate_unknown_exit_code(capsys, monkeypatch):
    from excseq.contamination import CAPPED, ClosureResult

    monkeypatch.setattr(search, "closure", lambda pts, d, cap: ClosureResult(CAPPED, cap, ()))
    assert call(capsys, "enumerate", "--grid", "2x2")[0] == 3


def test_module_entry_point(tmp_path):
    path = tmp_path / "four_step.json"
    path.write_text(json.dumps(doc(gallery.FOUR_STEP)))
    proc = subprocess.run([sys.executable, "-m", "excseq", "contaminate", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["steps"] == 4
