import json

import numpy as np
import pytest

from textcc.cli import main
from textcc.evaluation import aggregate, evaluate
from textcc.formats import loads_records, read_detections, read_gt, write_chars, write_proposals
from textcc.pipeline import detect
from textcc.raster import read_map, write_map
from textcc.synth import SceneSpec, WordSpec, load_bundle, random_scene_spec, render_scene, save_bundle


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def scene(tmp_path):
    d = tmp_path / "scene"
    assert main(["synth", str(d), "--seed", "4"]) == 0
    return d


def files(d):
    return d / "word.pgm", d / "centerline.pgm", d / "chars.txt"


def test_detect_matches_unrotated_ground_truth(tmp_path, capsys):
    spec = SceneSpec(120, 80, (WordSpec((5, 5), 3, (10, 20)), WordSpec((50, 40), 4, (8, 18), dotted=(2,)),
                               WordSpec((60, 5), 1, (12, 24))))
    save_bundle(render_scene(spec), tmp_path)
    code, out, _ = run(capsys, "detect", *files(tmp_path))
    assert code == 0
    recs = loads_records(out, "detections")
    words = [r for r in recs if r["kind"] == "word"]
    assert len(words) == 3 and not [r for r in recs if r["kind"] == "rejected"]
    dets = [np.array(w["quad"]) for w in words]
    gt = read_gt(tmp_path / "gt.txt")
    rep = evaluate(gt, dets, iou_threshold=0.99)
    assert rep.recall == 1.0 and rep.precision == 1.0
    assert all(s >= 0.99 for _, _, s in rep.pairs)
    # the dotted word picked up its dot
    assert sorted(w["source"] for w in words) == ["geodesic", "geodesic", "orphan_attached"]


def test_detect_rotated_scene_matches_gt(scene, capsys):
    code, out, _ = run(capsys, "detect", *files(scene))
    assert code == 0
    (scene / "det.txt").write_text(out)
    rep = evaluate(read_gt(scene / "gt.txt"), read_detections(scene / "det.txt"))
    assert rep.recall == 1.0 and rep.precision == 1.0


def test_empty_maps(tmp_path, capsys):
    write_map(np.zeros((10, 12)), tmp_path / "w.pgm")
    write_map(np.zeros((10, 12)), tmp_path / "c.pgm")
    write_chars(tmp_path / "ch.txt", [])
    code, out, _ = run(capsys, "detect", tmp_path / "w.pgm", tmp_path / "c.pgm", tmp_path / "ch.txt")
    assert code == 0
    recs = loads_records(out, "detections")
    assert [r["kind"] for r in recs] == ["meta"] and recs[0]["n_proposals"] == 0


def test_size_mismatch(tmp_path, capsys):
    write_map(np.zeros((10, 12)), tmp_path / "w.pgm")
    write_map(np.zeros((11, 12)), tmp_path / "c.pgm")
    write_chars(tmp_path / "ch.txt", [])
    code, out, err = run(capsys, "detect", tmp_path / "w.pgm", tmp_path / "c.pgm", tmp_path / "ch.txt")
    assert code != 0 and out == ""
    assert "12x10" in err and "12x11" in err


def test_unreadable_and_malformed(scene, tmp_path, capsys):
    code, _, err = run(capsys, "detect", tmp_path / "nope.pgm", scene / "centerline.pgm", scene / "chars.txt")
    assert code != 0 and "nope.pgm" in err
    bad = tmp_path / "bad.txt"
    bad.write_text('#textcc chars v1\n{"box":[1,2,3],"class_id":1,"confidence":1}\n')
    code, _, err = run(capsys, "detect", scene / "word.pgm", scene / "centerline.pgm", bad)
    assert code != 0 and "bad.txt:2" in err
    cfg = tmp_path / "c.ini"
    cfg.write_text("[loss]\ntau = 1.5\n")
    code, _, err = run(capsys, "detect", *files(scene), "--config", cfg)
    assert code != 0 and "c.ini:2" in err


def test_eval_composes_with_detect(tmp_path, capsys):
    pairs, gts, dets = [], [], []
    for seed in range(3):
        d = tmp_path / f"s{seed}"
        assert main(["synth", str(d), "--seed", str(seed), "--flip", "0.01", "--spurious", "2",
                     "--jitter", "1"]) == 0
        assert main(["detect", *map(str, files(d)), "-o", str(d / "det.txt")]) == 0
        pairs += [d / "gt.txt", d / "det.txt"]
        b = load_bundle(d)
        res = detect(b.word_map, b.centerline_map, b.chars)
        gts.append(list(b.gt_words))
        dets.append(res.quads)
    capsys.readouterr()
    code, out, _ = run(capsys, "eval", *pairs, "--per-image")
    assert code == 0
    recs = loads_records(out, "eval")
    reps = [evaluate(g, d) for g, d in zip(gts, dets)]
    agg = aggregate(reps)
    summary = recs[0]
    for k in ("recall", "precision", "f_score", "n_gt", "n_det"):
        assert summary[k] == agg[k]
    assert [r["f_score"] for r in recs[1:]] == [r.f_score for r in reps]
    code, out, _ = run(capsys, "eval", *pairs, "--protocol", "deteval", "--geometry", "axis")
    assert code == 0 and loads_records(out, "eval")[0]["protocol"] == "deteval"
    code, _, err = run(capsys, "eval", pairs[0])
    assert code != 0 and "pairs" in err


def test_loss_subcommand(scene, tmp_path, capsys):
    code, out, _ = run(capsys, "loss", scene / "word.pgm", scene / "chars.txt", "--centerline",
                       scene / "centerline.pgm", "--table", "--tau", "1.0")
    assert code == 0
    recs = loads_records(out, "loss")
    assert recs[0]["total"] == 0.0 and all(not r["below_tau"] for r in recs[1:])
    b = load_bundle(scene)
    res = detect(b.word_map, b.centerline_map, b.chars)
    write_proposals(tmp_path / "p.txt", res.proposals)
    code, out2, _ = run(capsys, "loss", scene / "word.pgm", scene / "chars.txt", "--segments",
                        tmp_path / "p.txt", "--verified", "--tau", "1.0")
    assert code == 0 and loads_records(out2, "loss")[0]["total"] == 0.0
    code, _, err = run(capsys, "loss", scene / "word.pgm", scene / "chars.txt")
    assert code != 0 and "--segments" in err


def test_synth_from_spec_file(tmp_path, capsys):
    spec = {"width": 60, "height": 40, "rng_seed": 2,
            "words": [{"origin": [5, 5], "glyph_count": 3, "glyph_size": [10, 20]}]}
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert main(["synth", str(tmp_path / "out"), "--spec", str(tmp_path / "spec.json")]) == 0
    b = load_bundle(tmp_path / "out")
    assert b.word_map.values.sum() == 600
    assert json.loads((tmp_path / "out" / "spec.json").read_text())["width"] == 60


def test_overlay(scene, tmp_path):
    from PIL import Image

    assert main(["overlay", *map(str, files(scene)), str(tmp_path / "o.png"), "--scale", "2"]) == 0
    img = Image.open(tmp_path / "o.png")
    w = read_map(scene / "word.pgm")
    assert img.size == (2 * w.width, 2 * w.height) and img.mode == "RGB"


def test_config_subcommand(tmp_path, capsys):
    code, out, _ = run(capsys, "config", "--tau", "0.25", "--connectivity", "four", "--min-confidence", "0.6")
    assert code == 0
    assert "tau = 0.25" in out and "connectivity = four" in out and out.count("min_confidence = 0.6") == 2


def test_batch_matches_single_runs(tmp_path, capsys):
    src = tmp_path / "scenes"
    for name, seed in (("b", 3), ("a", 5)):
        assert main(["synth", str(src / name), "--seed", str(seed)]) == 0
    assert main(["batch", str(src), str(tmp_path / "out1")]) == 0
    assert main(["batch", str(src), str(tmp_path / "out2"), "--jobs", "2"]) == 0
    for name in ("a", "b"):
        main(["detect", *map(str, files(src / name))])
        single = capsys.readouterr().out
        assert (tmp_path / "out1" / f"{name}.txt").read_text() == single
        assert (tmp_path / "out2" / f"{name}.txt").read_bytes() == single.encode()


def test_random_scenes_detect_without_rejections(tmp_path):
    for seed in range(5):
        b = render_scene(random_scene_spec(seed))
        res = detect(b.word_map, b.centerline_map, b.chars)
        assert not res.verified.rejected
        assert len(res.detections) == len(b.gt_words)
