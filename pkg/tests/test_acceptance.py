"""Acceptance suite: each test checks one criterion and reports a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v``; the lines are
collected under "acceptance criteria" in the terminal summary.
"""
import json
import time

import numpy as np

from oracles import csgraph_assignment, flood_fill_labels, naive_loss, same_partition, sweep_min_rect_area
from textcc.cli import main
from textcc.evaluation import f_score
from textcc.formats import loads_records
from textcc.geometry import axis_aligned_bbox, convex_hull, min_area_rect, rasterize_polygon
from textcc.loss import LossConfig, compute_consistency_loss
from textcc.proposals import SeedSet, generate_proposals, geodesic_label_assignment
from textcc.raster import Connectivity, connected_components, threshold_map
from textcc.synth import NoiseSpec, apply_noise, random_scene_spec, render_scene
from textcc.verification import verify_proposals

# (recall, precision, published F) for the rows whose F is the harmonic mean of R and P
TABLE_ROWS = {
    "ICDAR2013 CTPN": (0.830, 0.930, 0.877),
    "ICDAR2013 DeepText": (0.842, 0.907, 0.873),
    "ICDAR2013 Zhu": (0.816, 0.934, 0.871),
    "ICDAR2013 Baseline": (0.903, 0.913, 0.908),
    "ICDAR2013 Proposed": (0.915, 0.922, 0.919),
    "Multilingual CTPN": (0.800, 0.840, 0.820),
    "Multilingual Baseline": (0.836, 0.812, 0.824),
    "Multilingual Proposed": (0.843, 0.809, 0.826),
}


def test_c1_f_score_table(acceptance):
    errs = {name: abs(f_score(r, p) - f) for name, (r, p, f) in TABLE_ROWS.items()}
    worst = max(errs, key=errs.get)
    ok = all(e <= 0.001 for e in errs.values())
    acceptance(1, "F-score arithmetic reproduces the table rows", ok,
               f"{len(errs)} rows, worst {worst} off by {errs[worst]:.5f}")
    assert ok


def _random_seeds(rng, h, w, k):
    free = np.ones((h, w), dtype=bool)
    sets = []
    for _ in range(k):
        for _ in range(50):
            x, y = int(rng.integers(0, w)), int(rng.integers(0, h))
            bw, bh = int(rng.integers(1, 4)), int(rng.integers(1, 3))
            blob = [(xx, yy) for yy in range(y, min(y + bh, h)) for xx in range(x, min(x + bw, w))
                    if free[yy, xx]]
            if blob:
                for xx, yy in blob:
                    free[yy, xx] = False
                sets.append(blob)
                break
    return sets


def test_c2_geodesic_matches_shortest_path_oracle(acceptance):
    rng = np.random.default_rng(2)
    bad, elapsed = 0, 0.0
    for i in range(200):
        h, w = (int(v) for v in rng.integers(4, 33, size=2))
        bits = rng.random((h, w)) < rng.uniform(0.4, 0.9)
        conn = Connectivity.EIGHT if i % 2 == 0 else Connectivity.FOUR
        sets = _random_seeds(rng, h, w, int(rng.integers(1, 5)))
        seeds = SeedSet.from_pixel_sets(sets, (h, w))
        t = time.perf_counter()
        a = geodesic_label_assignment(bits, seeds, conn)
        elapsed += time.perf_counter() - t
        ref_a, ref_d = csgraph_assignment(bits, sets, conn is Connectivity.EIGHT)
        fin = np.isfinite(ref_d)
        same = (np.array_equal(a.assignment, ref_a)
                and np.array_equal(fin, np.isfinite(a.distance))
                and np.max(np.abs(a.distance[fin] - ref_d[fin]), initial=0.0) <= 1e-9)
        bad += not same
    ok = bad == 0 and elapsed < 30
    acceptance(2, "geodesic assignment equals brute-force shortest paths", ok,
               f"200 masks, {bad} mismatches, {elapsed:.2f}s")
    assert ok


def test_c3_components_match_flood_fill(acceptance):
    rng = np.random.default_rng(3)
    bad, elapsed = 0, 0.0
    for i in range(500):
        h, w = (int(v) for v in rng.integers(1, 65, size=2))
        bits = rng.random((h, w)) < rng.uniform(0.1, 0.8)
        conn = Connectivity.EIGHT if i % 2 == 0 else Connectivity.FOUR
        t = time.perf_counter()
        lm = connected_components(bits, conn)
        elapsed += time.perf_counter() - t
        ref, n = flood_fill_labels(bits, conn is Connectivity.EIGHT)
        bad += not (lm.component_count == n and same_partition(lm.labels, ref))
    ok = bad == 0 and elapsed < 10
    acceptance(3, "connected components equal flood fill up to renaming", ok,
               f"500 masks, {bad} mismatches, {elapsed:.2f}s")
    assert ok


def _small_scene(seed, noisy):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(24, 49))
    spec = random_scene_spec(seed, width=size, height=size, n_words=(1, 3), glyph_count=(1, 3),
                             glyph_width=(3, 8), glyph_height=(6, 16), spacing=(0, 1), margin=3.0,
                             noise=NoiseSpec(confidence_range=(0.5, 1.0)))
    b = render_scene(spec)
    if noisy:
        b = apply_noise(b, NoiseSpec(0.03, 2, spurious_char_count=2, drop_char_rate=0.1), seed + 1)
    return b


def test_c4_loss_matches_naive_recount(acceptance):
    rng = np.random.default_rng(4)
    worst, bounds_ok, clean_ok, elapsed = 0.0, True, True, 0.0
    for i in range(300):
        noisy = i % 2 == 1
        b = _small_scene(1000 + i, noisy)
        segments = generate_proposals(b.word_map, b.centerline_map)
        word = threshold_map(b.word_map)
        if noisy:
            cfg = LossConfig(tau=float(rng.random()), min_confidence=float(rng.random()))
            sr = float(rng.random())
        else:
            cfg, sr = LossConfig(tau=float(rng.uniform(0, 1)), min_confidence=0.0), float(rng.uniform(0, 1))
        t = time.perf_counter()
        rep = compute_consistency_loss(word, segments, b.chars, cfg, sr)
        elapsed += time.perf_counter() - t
        l1, l2, *_ = naive_loss(word.bits, segments, b.chars, cfg.tau, cfg.min_confidence, sr)
        worst = max(worst, abs(rep.l1 - l1), abs(rep.l2 - l2))
        bounds_ok &= 0.0 <= rep.l1 <= 1.0 and 0.0 <= rep.l2 <= 0.5
        if not noisy:
            clean_ok &= rep.total == 0.0
    ok = worst <= 1e-12 and bounds_ok and clean_ok and elapsed < 30
    acceptance(4, "consistency loss equals naive recount", ok,
               f"300 bundles, max diff {worst:.1e}, bounds {'ok' if bounds_ok else 'violated'}, "
               f"noise-free total 0: {clean_ok}, {elapsed:.2f}s")
    assert ok


def test_c5_min_rect_matches_sweep(acceptance):
    rng = np.random.default_rng(5)
    worst, dominated, elapsed = 0.0, True, 0.0
    for _ in range(100):
        pts = rng.uniform(0, rng.uniform(4, 40), size=(int(rng.integers(3, 12)), 2))
        pts = pts @ np.array([[1.0, 0.0], [rng.uniform(-1, 1), rng.uniform(0.2, 1.5)]])
        pts -= pts.min(axis=0)
        pix = rasterize_polygon(convex_hull(pts))
        if len(pix) == 0:
            pix = np.floor(pts[:1]).astype(np.int64)
        t = time.perf_counter()
        r = min_area_rect(pix)
        elapsed += time.perf_counter() - t
        ref = sweep_min_rect_area(pix, 0.1)
        worst = max(worst, r.area / ref - 1.0)
        dominated &= r.area <= axis_aligned_bbox(pix).area + 1e-9
    ok = worst <= 0.005 and dominated and elapsed < 30
    acceptance(5, "min-area rect agrees with a 0.1 degree sweep", ok,
               f"100 clouds, worst excess {100 * worst:.3f}%, bbox dominance {dominated}, {elapsed:.2f}s")
    assert ok


def _cli_run(root, n, seed0, synth_flags, detect_flags):
    pairs = []
    for i in range(n):
        d = root / f"scene{i:03d}"
        assert main(["synth", str(d), "--seed", str(seed0 + i), *synth_flags]) == 0
        assert main(["detect", str(d / "word.pgm"), str(d / "centerline.pgm"), str(d / "chars.txt"),
                     "-o", str(d / "det.txt"), *detect_flags]) == 0
        pairs += [str(d / "gt.txt"), str(d / "det.txt")]
    out = root / "eval.txt"
    assert main(["eval", *pairs, "--iou-threshold", "0.5", "-o", str(out)]) == 0
    return loads_records(out.read_text(), "eval")[0]


def test_c6_end_to_end_detection(acceptance, tmp_path):
    t = time.perf_counter()
    clean = _cli_run(tmp_path / "clean", 100, 6000, [], [])
    dotted = sum(
        any(w["dotted"] for w in json.loads((tmp_path / "clean" / f"scene{i:03d}" / "spec.json").read_text())["words"])
        for i in range(100)
    )
    noisy = _cli_run(tmp_path / "noisy", 100, 7000,
                        ["--flip", "0.02", "--jitter", "2", "--spurious", "2", "--spurious-conf-max", "0.5"],
                        ["--drop-seedless"])
    elapsed = time.perf_counter() - t
    ok = (clean["recall"] >= 0.99 and clean["precision"] >= 0.99
          and noisy["recall"] >= 0.90 and noisy["precision"] >= 0.90 and dotted > 0 and elapsed < 120)
    acceptance(6, "end-to-end CLI detection on synthetic scenes", ok,
               f"noise-free R={clean['recall']:.3f} P={clean['precision']:.3f} "
               f"({clean['n_gt']} words, {dotted} scenes with dotted glyphs); "
               f"noisy R={noisy['recall']:.3f} P={noisy['precision']:.3f}; {elapsed:.1f}s")
    assert ok


def test_c7_verification_lowers_loss(acceptance):
    wins = 0
    for i in range(100):
        spec = random_scene_spec(8000 + i)
        b = apply_noise(render_scene(spec), NoiseSpec(0.02, 2, spurious_char_count=2), 9000 + i)
        props = generate_proposals(b.word_map, b.centerline_map)
        accepted = verify_proposals(props, b.chars).accepted
        word = threshold_map(b.word_map)
        before = compute_consistency_loss(word, props, b.chars).total
        after = compute_consistency_loss(word, accepted, b.chars).total
        wins += after < before
    ok = wins >= 95
    acceptance(7, "verified proposals give strictly lower loss than unverified", ok, f"{wins}/100 trials")
    assert ok


def test_c8_cli_is_byte_reproducible(acceptance, tmp_path, capsys):
    src = tmp_path / "src"
    assert main(["synth", str(src / "a"), "--seed", "81", "--flip", "0.02", "--spurious", "2", "--jitter", "2"]) == 0
    assert main(["synth", str(src / "b"), "--seed", "82"]) == 0
    a = src / "a"
    inputs = [str(a / "word.pgm"), str(a / "centerline.pgm"), str(a / "chars.txt")]
    assert main(["detect", *inputs, "-o", str(a / "det.txt")]) == 0
    (tmp_path / "spec.json").write_text(
        '{"width": 60, "height": 40, "words": [{"origin": [5, 5], "glyph_count": 3, "glyph_size": [10, 20]}]}')

    def commands(run):
        o = tmp_path / f"run{run}"
        o.mkdir()
        return {
            "detect": ["detect", *inputs, "-o", str(o / "det.txt")],
            "loss": ["loss", inputs[0], inputs[2], "--centerline", inputs[1], "--table", "-o", str(o / "loss.txt")],
            "eval": ["eval", str(a / "gt.txt"), str(a / "det.txt"), "--per-image", "-o", str(o / "eval.txt")],
            "synth": ["synth", str(o / "syn"), "--seed", "5", "--flip", "0.05", "--spurious", "3"],
            "synth-spec": ["synth", str(o / "syn2"), "--spec", str(tmp_path / "spec.json")],
            "overlay": ["overlay", *inputs, str(o / "ov.png")],
            "batch": ["batch", str(src), str(o / "batch"), "--jobs", "2"],
            "config": ["config", "--tau", "0.3", "-o", str(o / "cfg.ini")],
            "config-stdout": ["config", "--connectivity", "four"],
        }, o

    def snapshot(run):
        cmds, o = commands(run)
        result = {}
        for name, argv in cmds.items():
            result[name] = main(argv)
            result[name + ":stdout"] = capsys.readouterr().out
        for p in sorted(o.rglob("*")):
            if p.is_file():
                result[str(p.relative_to(o))] = p.read_bytes()
        return result

    first, second = snapshot(1), snapshot(2)
    differing = [k for k in first if first[k] != second.get(k)]
    n_cmds = 9
    codes_ok = sorted(v for k, v in first.items() if isinstance(v, int)) == [0] * n_cmds
    ok = not differing and codes_ok and set(first) == set(second)
    acceptance(8, "every CLI subcommand is byte-reproducible", ok,
               f"{n_cmds} invocations, {len(first) - 2 * n_cmds} output files compared, "
               f"differing: {differing or 'none'}")
    assert ok
