"""Line-oriented text formats.

Every document starts with a header line ``#textcc <kind> v<version>``
followed by one JSON object per line. Blank lines and lines starting with
``#`` after the header are ignored. Keys are written sorted so identical
content always produces identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .evaluation import GroundTruthWord
from .geometry import AxisBox
from .proposals import ProposalSource, WordProposal
from .raster import pixel_set
from .verification import CharacterBox

FORMAT_VERSION = 1

__all__ = [
    "FormatError",
    "rle_encode",
    "rle_decode",
    "dumps_records",
    "loads_records",
    "read_records",
    "write_records",
    "char_to_record",
    "char_from_record",
    "read_chars",
    "write_chars",
    "gt_to_record",
    "gt_from_record",
    "read_gt",
    "write_gt",
    "proposal_to_record",
    "proposal_from_record",
    "read_proposals",
    "write_proposals",
    "read_detections",
]


class FormatError(ValueError):
    pass


def rle_encode(pixels) -> list[list[int]]:
    """Row runs ``[y, x_start, length]`` of a pixel set, row-major."""
    p = pixel_set(pixels)
    runs: list[list[int]] = []
    for x, y in p.tolist():
        if runs and runs[-1][0] == y and runs[-1][1] + runs[-1][2] == x:
            runs[-1][2] += 1
        else:
            runs.append([y, x, 1])
    return runs


def rle_decode(runs) -> np.ndarray:
    pts = [(x0 + k, y) for y, x0, n in runs for k in range(n)]
    return pixel_set(pts)


def _header(kind: str) -> str:
    return f"#textcc {kind} v{FORMAT_VERSION}"


def dumps_records(kind: str, records) -> str:
    lines = [_header(kind)]
    lines += [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in records]
    return "\n".join(lines) + "\n"


def loads_records(text: str, kind: str, source: str = "<string>") -> list[dict]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#textcc "):
        raise FormatError(f"{source}:1: missing '#textcc {kind} v{FORMAT_VERSION}' header")
    parts = lines[0].split()
    if len(parts) != 3 or parts[1] != kind:
        raise FormatError(f"{source}:1: expected a '{kind}' document, header says {lines[0]!r}")
    if parts[2] != f"v{FORMAT_VERSION}":
        raise FormatError(f"{source}:1: unsupported version {parts[2]!r}")
    out = []
    for no, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"{source}:{no}: malformed record: {e.msg}") from None
        if not isinstance(rec, dict):
            raise FormatError(f"{source}:{no}: record must be an object")
        rec["_line"] = no
        out.append(rec)
    return out


def read_records(path, kind: str) -> list[dict]:
    path = Path(path)
    return loads_records(path.read_text(), kind, str(path))


def write_records(path, kind: str, records) -> None:
    Path(path).write_text(dumps_records(kind, records))


def _field(rec, name, source, conv=None):
    if name not in rec:
        raise FormatError(f"{source}:{rec.get('_line', '?')}: missing field '{name}'")
    v = rec[name]
    if conv is None:
        return v
    try:
        return conv(v)
    except (TypeError, ValueError) as e:
        raise FormatError(f"{source}:{rec.get('_line', '?')}: bad field '{name}': {e}") from None


def _checked(build, rec, source):
    try:
        return build()
    except FormatError:
        raise
    except (TypeError, ValueError) as e:
        raise FormatError(f"{source}:{rec.get('_line', '?')}: {e}") from None


# -- character boxes ---------------------------------------------------------

def char_to_record(c: CharacterBox) -> dict:
    return {"box": list(c.bounds), "class_id": c.class_id, "confidence": c.confidence}


def char_from_record(rec: dict, source: str = "<chars>") -> CharacterBox:
    box = _field(rec, "box", source, lambda v: [int(x) for x in v])
    if len(box) != 4:
        raise FormatError(f"{source}:{rec.get('_line', '?')}: 'box' needs 4 numbers")
    cls = _field(rec, "class_id", source, int)
    conf = _field(rec, "confidence", source, float)
    return _checked(lambda: CharacterBox(*box, class_id=cls, confidence=conf), rec, source)


def write_chars(path, chars) -> None:
    write_records(path, "chars", [char_to_record(c) for c in chars])


def read_chars(path) -> list[CharacterBox]:
    return [char_from_record(r, str(path)) for r in read_records(path, "chars")]


# -- ground truth ------------------------------------------------------------

def gt_to_record(g: GroundTruthWord) -> dict:
    if isinstance(g.box, AxisBox):
        return {"box": list(g.box.as_tuple()), "ignore": g.ignore_flag}
    return {"polygon": np.asarray(g.box, dtype=float).tolist(), "ignore": g.ignore_flag}


def _region_from_record(rec: dict, source: str):
    if "box" in rec:
        b = _field(rec, "box", source, lambda v: [int(x) for x in v])
        if len(b) != 4:
            raise FormatError(f"{source}:{rec.get('_line', '?')}: 'box' needs 4 numbers")
        return _checked(lambda: AxisBox(*b), rec, source)
    if "polygon" in rec:
        return _field(rec, "polygon", source, lambda v: np.asarray(v, dtype=np.float64))
    raise FormatError(f"{source}:{rec.get('_line', '?')}: record needs 'box' or 'polygon'")


def gt_from_record(rec: dict, source: str = "<gt>") -> GroundTruthWord:
    region = _region_from_record(rec, source)
    return _checked(lambda: GroundTruthWord(region, bool(rec.get("ignore", False))), rec, source)


def write_gt(path, gt_words) -> None:
    write_records(path, "gt", [gt_to_record(g) for g in gt_words])


def read_gt(path) -> list[GroundTruthWord]:
    return [gt_from_record(r, str(path)) for r in read_records(path, "gt")]


# -- proposals ---------------------------------------------------------------

def proposal_to_record(p: WordProposal, **extra) -> dict:
    rec = {"id": p.proposal_id, "seed_id": p.seed_id, "source": p.source.value, "rle": rle_encode(p.pixels)}
    rec.update(extra)
    return rec


def proposal_from_record(rec: dict, source: str = "<proposals>") -> WordProposal:
    pid = _field(rec, "id", source, int)
    sid = _field(rec, "seed_id", source, int)
    src = _field(rec, "source", source, ProposalSource)
    pix = _field(rec, "rle", source, rle_decode)
    return _checked(lambda: WordProposal(pid, sid, pix, src), rec, source)


def write_proposals(path, proposals, geometry=None) -> None:
    """``geometry`` optionally maps proposal id to extra record fields (boxes)."""
    geometry = geometry or {}
    write_records(path, "proposals",
                  [proposal_to_record(p, **geometry.get(p.proposal_id, {})) for p in proposals])


def read_proposals(path) -> list[WordProposal]:
    return [proposal_from_record(r, str(path)) for r in read_records(path, "proposals")]


# -- detections --------------------------------------------------------------

def read_detections(path, use: str = "quad") -> list:
    """Accepted-word regions from a detection document.

    ``use="quad"`` returns the rotated-rectangle corners, ``"axis"`` the
    axis-aligned boxes.
    """
    out = []
    src = str(path)
    for rec in read_records(path, "detections"):
        if rec.get("kind") != "word":
            continue
        if use == "axis":
            b = _field(rec, "axis_box", src, lambda v: [int(x) for x in v])
            out.append(_checked(lambda: AxisBox(*b), rec, src))
        elif use == "quad":
            out.append(_field(rec, "quad", src, lambda v: np.asarray(v, dtype=np.float64).reshape(4, 2)))
        else:
            raise ValueError(f"unknown detection geometry {use!r}")
    return out
