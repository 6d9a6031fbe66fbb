"""
Synthetic scenes through the whole pipeline
===========================================

Render random scenes, corrupt them, write them to disk, and run the same
commands a user would: ``synth``, ``detect`` and ``eval``. The scores are
pooled over all scenes.
"""

import tempfile
from pathlib import Path

from textcc.cli import main
from textcc.formats import read_records

root = Path(tempfile.mkdtemp(prefix="textcc-demo-"))
for label, noise in (("clean", []), ("noisy", ["--flip", "0.02", "--jitter", "2", "--spurious", "2"])):
    pairs = []
    for seed in range(10):
        d = root / label / f"{seed:02d}"
        main(["synth", str(d), "--seed", str(seed), *noise])
        main(["detect", str(d / "word.pgm"), str(d / "centerline.pgm"), str(d / "chars.txt"),
              "-o", str(d / "det.txt"), "--drop-seedless"])
        pairs += [str(d / "gt.txt"), str(d / "det.txt")]
    main(["eval", *pairs, "-o", str(root / f"{label}.txt")])
    s = read_records(root / f"{label}.txt", "eval")[0]
    print(f"{label}: recall {s['recall']:.3f}  precision {s['precision']:.3f}  f {s['f_score']:.3f}  "
          f"({s['n_gt']} words)")

main(["overlay", str(root / "noisy/00/word.pgm"), str(root / "noisy/00/centerline.pgm"),
      str(root / "noisy/00/chars.txt"), str(root / "overlay.png")])
print("overlay written to", root / "overlay.png")
