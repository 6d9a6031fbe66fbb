"""Command line front end.

    textcc detect word.pgm centerline.pgm chars.txt -o detections.txt
    textcc loss word.pgm chars.txt --centerline centerline.pgm --table
    textcc eval gt.txt detections.txt --protocol deteval
    textcc synth scene_dir --seed 7 --flip 0.02
    textcc overlay word.pgm centerline.pgm chars.txt overlay.png
    textcc batch scenes/ out/ --jobs 4
    textcc config defaults.ini
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import PipelineConfig, load_config, save_config, with_overrides
from .evaluation import aggregate, evaluate
from .formats import dumps_records, read_chars, read_detections, read_gt, read_proposals
from .loss import compute_consistency_loss
from .pipeline import detect, run_detect
from .proposals import generate_proposals
from .raster import read_map, threshold_map
from .synth import (
    NoiseSpec,
    apply_noise,
    random_scene_spec,
    render_scene,
    save_bundle,
    scene_spec_from_dict,
    scene_spec_to_dict,
)
from .verification import verify_proposals

PROG = "textcc"


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags below override it")
    p.add_argument("--word-threshold", type=float, dest="proposal__word_threshold")
    p.add_argument("--centerline-threshold", type=float, dest="proposal__centerline_threshold")
    p.add_argument("--connectivity", choices=["four", "eight"], dest="proposal__connectivity")
    p.add_argument("--orphan-dist", type=float, dest="proposal__orphan_attach_max_dist",
                   help="max gap (px) for attaching seedless components; 'inf' for unlimited")
    p.add_argument("--drop-seedless", action="store_const", const=True, dest="proposal__drop_seedless")
    p.add_argument("--attach-orphans", action="store_const", const=False, dest="proposal__drop_seedless")
    p.add_argument("--min-confidence", type=float, dest="min_confidence",
                   help="character confidence cutoff for both verification and the loss")
    p.add_argument("--support-ratio", type=float, dest="verification__support_ratio")
    p.add_argument("--tau", type=float, dest="loss__tau")


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    over = {k: v for k, v in vars(args).items() if "__" in k}
    mc = getattr(args, "min_confidence", None)
    if mc is not None:
        over["verification__min_confidence"] = mc
        over["loss__min_confidence"] = mc
    return with_overrides(cfg, **over)


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_detect(args) -> int:
    doc = run_detect(args.word_map, args.centerline_map, args.chars, _config(args))
    _emit(doc, args.output)
    return 0


def cmd_loss(args) -> int:
    cfg = _config(args)
    word_map = read_map(args.word_map)
    chars = read_chars(args.chars)
    if args.segments:
        segments = read_proposals(args.segments)
    elif args.centerline:
        segments = generate_proposals(word_map, read_map(args.centerline), cfg.proposal)
    else:
        raise ValueError("loss needs --segments or --centerline")
    if args.verified:
        segments = verify_proposals(segments, chars, cfg.verification).accepted
    mask = threshold_map(word_map, cfg.proposal.word_threshold)
    rep = compute_consistency_loss(mask, segments, chars, cfg.loss, cfg.verification.support_ratio)
    recs = [{"kind": "loss", "l1": rep.l1, "l2": rep.l2, "total": rep.total,
             "n_phi": rep.n_phi, "m_psi": rep.m_psi, "k_boxes": rep.k_boxes,
             "n_segments": len(segments)}]
    if args.table:
        recs += [{"kind": "box", "index": k, "ratio": r, "below_tau": r < cfg.loss.tau}
                 for k, r in enumerate(rep.per_box_ratio)]
    _emit(dumps_records("loss", recs), args.output)
    return 0


def cmd_eval(args) -> int:
    files = args.files
    if len(files) % 2:
        raise ValueError("eval expects GT/DETECTIONS file pairs")
    cfg = _config(args)
    protocol = args.protocol or cfg.evaluation.protocol
    thr = args.iou_threshold if args.iou_threshold is not None else cfg.evaluation.iou_threshold
    reports, recs = [], []
    for gt_path, det_path in zip(files[0::2], files[1::2]):
        rep = evaluate(read_gt(gt_path), read_detections(det_path, args.geometry), protocol, thr)
        reports.append(rep)
        if args.per_image:
            recs.append({"kind": "image", "gt": str(gt_path), "detections": str(det_path),
                         "recall": rep.recall, "precision": rep.precision, "f_score": rep.f_score,
                         "pairs": [list(p) for p in rep.pairs],
                         "unmatched_gt": rep.unmatched_gt, "unmatched_det": rep.unmatched_det})
    summary = {"kind": "summary", "protocol": protocol, "images": len(reports)}
    if protocol == "iou":
        summary["iou_threshold"] = thr
    summary.update(aggregate(reports))
    _emit(dumps_records("eval", [summary] + recs), args.output)
    return 0


def _noise_from_args(args) -> NoiseSpec:
    return NoiseSpec(
        pixel_flip_rate=args.flip,
        box_jitter=args.jitter,
        confidence_range=(args.conf_min, args.conf_max),
        spurious_char_count=args.spurious,
        drop_char_rate=args.drop_rate,
        spurious_confidence_range=(0.0, args.spurious_conf_max),
    )


def cmd_synth(args) -> int:
    if args.spec:
        d = json.loads(Path(args.spec).read_text())
        if args.seed is not None:
            d["rng_seed"] = args.seed
        spec = scene_spec_from_dict(d)
    else:
        seed = args.seed if args.seed is not None else 0
        spec = random_scene_spec(seed, width=args.width, height=args.height,
                                 angle_range=(-args.max_angle, args.max_angle),
                                 n_words=(1, args.max_words), noise=_noise_from_args(args))
    bundle = render_scene(spec)
    n = spec.noise
    if n.pixel_flip_rate or n.box_jitter or n.spurious_char_count or n.drop_char_rate:
        noise_seed = args.noise_seed if args.noise_seed is not None else spec.rng_seed + 1
        bundle = apply_noise(bundle, n, noise_seed)
    out = Path(args.output_dir)
    save_bundle(bundle, out)
    (out / "spec.json").write_text(json.dumps(scene_spec_to_dict(spec), sort_keys=True, indent=1) + "\n")
    return 0


def cmd_overlay(args) -> int:
    from .overlay import write_overlay

    cfg = _config(args)
    word_map = read_map(args.word_map)
    res = detect(word_map, read_map(args.centerline_map), read_chars(args.chars), cfg)
    write_overlay(args.output, threshold_map(word_map, cfg.proposal.word_threshold),
                  res.proposals, read_chars(args.chars), res.quads, scale=args.scale)
    return 0


def _batch_one(job):
    name, scene_dir, out_path, cfg = job
    doc = run_detect(scene_dir / "word.pgm", scene_dir / "centerline.pgm", scene_dir / "chars.txt", cfg)
    return name, out_path, doc


def cmd_batch(args) -> int:
    cfg = _config(args)
    src, dst = Path(args.input_dir), Path(args.output_dir)
    scenes = sorted(p for p in src.iterdir() if p.is_dir() and (p / "word.pgm").exists())
    dst.mkdir(parents=True, exist_ok=True)
    jobs = [(p.name, p, dst / f"{p.name}.txt", cfg) for p in scenes]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_batch_one, jobs))
    else:
        results = [_batch_one(j) for j in jobs]
    for _, out_path, doc in sorted(results, key=lambda r: r[0]):
        out_path.write_text(doc)
    return 0


def cmd_config(args) -> int:
    cfg = _config(args)
    if args.output:
        save_config(cfg, args.output)
    else:
        from .config import dumps_config
        sys.stdout.write(dumps_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog=PROG, description="Connected-component text proposals and checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="maps + character boxes -> verified word detections")
    p.add_argument("word_map")
    p.add_argument("centerline_map")
    p.add_argument("chars")
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("loss", help="consistency loss report")
    p.add_argument("word_map")
    p.add_argument("chars")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--segments", help="proposals document")
    g.add_argument("--centerline", help="center-line map; proposals are generated from it")
    p.add_argument("--verified", action="store_true", help="keep only proposals that pass verification")
    p.add_argument("--table", action="store_true", help="append per-box fill ratios")
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("eval", help="score detections against ground truth")
    p.add_argument("files", nargs="+", metavar="GT DETECTIONS")
    p.add_argument("--protocol", choices=["iou", "deteval"])
    p.add_argument("--iou-threshold", type=float)
    p.add_argument("--geometry", choices=["quad", "axis"], default="quad")
    p.add_argument("--per-image", action="store_true")
    p.add_argument("-o", "--output")
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic scene bundle")
    p.add_argument("output_dir")
    p.add_argument("--spec", help="JSON scene spec; random scene when omitted")
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-seed", type=int)
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--height", type=int, default=160)
    p.add_argument("--max-words", type=int, default=5)
    p.add_argument("--max-angle", type=float, default=60.0)
    p.add_argument("--flip", type=float, default=0.0)
    p.add_argument("--jitter", type=int, default=0)
    p.add_argument("--spurious", type=int, default=0)
    p.add_argument("--drop-rate", type=float, default=0.0)
    p.add_argument("--conf-min", type=float, default=1.0)
    p.add_argument("--conf-max", type=float, default=1.0)
    p.add_argument("--spurious-conf-max", type=float, default=0.5)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("overlay", help="render a debugging PNG")
    p.add_argument("word_map")
    p.add_argument("centerline_map")
    p.add_argument("chars")
    p.add_argument("output")
    p.add_argument("--scale", type=int, default=4)
    _add_config_flags(p)
    p.set_defaults(func=cmd_overlay)

    p = sub.add_parser("batch", help="run detect over every scene directory in a folder")
    p.add_argument("input_dir")
    p.add_argument("output_dir")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("config", help="print or write the effective configuration")
    p.add_argument("-o", "--output")
    _add_config_flags(p)
    p.set_defaults(func=cmd_config)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as e:
        msg = e.strerror + f": {e.filename}" if isinstance(e, OSError) and e.strerror else str(e)
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
