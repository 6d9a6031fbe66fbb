"""Word-instance proposals by geodesic clustering around center-line seeds.

Center-line components act as cluster centres. Every word pixel is handed to
the seed it can reach along the shortest path that stays on the word mask
(axis steps cost 1, diagonal steps sqrt(2)). Word components that no seed can
reach (the dot over a "j") are optionally glued to the nearest proposal.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .raster import (
    Connectivity,
    as_map,
    as_mask,
    component_pixels,
    connected_components,
    pixel_set,
    threshold_map,
)

__all__ = [
    "Seed",
    "SeedSet",
    "AssignmentMap",
    "ProposalSource",
    "WordProposal",
    "ProposalConfig",
    "extract_seeds",
    "geodesic_label_assignment",
    "proposals_from_masks",
    "generate_proposals",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Seed:
    seed_id: int
    pixels: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, Seed)
            and self.seed_id == other.seed_id
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class SeedSet:
    """Seeds numbered 1..n plus the ``(height, width)`` frame they live in."""

    seeds: tuple[Seed, ...]
    shape: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(self.seeds))
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        for i, s in enumerate(self.seeds, start=1):
            if s.seed_id != i:
                raise ValueError(f"seed ids must be contiguous from 1, got {s.seed_id} at position {i}")
            if len(s.pixels) == 0:
                raise ValueError(f"seed {s.seed_id} is empty")

    def __len__(self):
        return len(self.seeds)

    def __iter__(self):
        return iter(self.seeds)

    @classmethod
    def from_pixel_sets(cls, pixel_sets, shape) -> "SeedSet":
        seeds = tuple(Seed(i, pixel_set(p)) for i, p in enumerate(pixel_sets, start=1))
        seen: set[tuple[int, int]] = set()
        for s in seeds:
            pts = {tuple(p) for p in s.pixels.tolist()}
            if pts & seen:
                raise ValueError("seed pixel sets must be disjoint")
            seen |= pts
        return cls(seeds, shape)


@dataclass(frozen=True, eq=False)
class AssignmentMap:
    assignment: np.ndarray  # (h, w) int, 0 = unassigned
    distance: np.ndarray  # (h, w) float, inf where unassigned

    @property
    def shape(self) -> tuple[int, int]:
        return self.assignment.shape

    def __eq__(self, other):
        return (
            isinstance(other, AssignmentMap)
            and np.array_equal(self.assignment, other.assignment)
            and np.array_equal(self.distance, other.distance)
        )


class ProposalSource(enum.Enum):
    GEODESIC = "geodesic"
    ORPHAN_ATTACHED = "orphan_attached"


@dataclass(frozen=True, eq=False)
class WordProposal:
    proposal_id: int
    seed_id: int
    pixels: np.ndarray
    source: ProposalSource = ProposalSource.GEODESIC

    def __post_init__(self):
        if len(self.pixels) == 0:
            raise ValueError(f"proposal {self.proposal_id} has no pixels")

    def __len__(self):
        return len(self.pixels)

    def __eq__(self, other):
        return (
            isinstance(other, WordProposal)
            and (self.proposal_id, self.seed_id, self.source)
            == (other.proposal_id, other.seed_id, other.source)
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class ProposalConfig:
    connectivity: Connectivity = Connectivity.EIGHT
    word_threshold: float = 0.5
    centerline_threshold: float = 0.5
    orphan_attach_max_dist: float = 20.0  # math.inf for unlimited
    drop_seedless: bool = False

    def __post_init__(self):
        object.__setattr__(self, "connectivity", Connectivity.parse(self.connectivity))
        for name in ("word_threshold", "centerline_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not self.orphan_attach_max_dist >= 0:
            raise ValueError(f"orphan_attach_max_dist must be >= 0, got {self.orphan_attach_max_dist}")


def extract_seeds(centerline_mask, conn: Connectivity = Connectivity.EIGHT) -> SeedSet:
    """One seed per center-line component, numbered in row-major first-encounter order."""
    centerline_mask = as_mask(centerline_mask)
    lm = connected_components(centerline_mask, conn)
    seeds = tuple(Seed(k, component_pixels(lm, k)) for k in range(1, lm.component_count + 1))
    return SeedSet(seeds, centerline_mask.shape)


def _check_shapes(a, b, what_a: str, what_b: str) -> None:
    if tuple(a) != tuple(b):
        raise ValueError(
            f"dimension mismatch: {what_a} is {a[1]}x{a[0]} (WxH) "
            f"but {what_b} is {b[1]}x{b[0]} (WxH)"
        )


def geodesic_label_assignment(
    word_mask, seeds: SeedSet, conn: Connectivity = Connectivity.EIGHT
) -> AssignmentMap:
    """Multi-source Dijkstra confined to word pixels plus seed pixels.

    Each reachable word pixel takes the id of its geodesically nearest seed;
    equal distances resolve to the smaller seed id.
    """
    word_mask = as_mask(word_mask)
    conn = Connectivity.parse(conn)
    _check_shapes(word_mask.shape, seeds.shape, "word mask", "seed frame")
    h, w = word_mask.shape

    # one-pixel False border so neighbour lookups never wrap
    W = w + 2
    vertex = np.zeros((h + 2, W), dtype=bool)
    vertex[1:-1, 1:-1] = word_mask.bits
    for s in seeds:
        vertex[s.pixels[:, 1] + 1, s.pixels[:, 0] + 1] = True
    vflat = vertex.ravel().tolist()

    steps = []
    for dx, dy in conn.offsets:
        diag = dx != 0 and dy != 0
        steps.append((dy * W + dx, 0 if diag else 1, 1 if diag else 0))

    n = vertex.size
    n_axis = [0] * n
    n_diag = [0] * n
    key = [math.inf] * n
    owner = [0] * n
    heap: list[tuple[float, int, int]] = []
    for s in seeds:
        for x, y in s.pixels.tolist():
            i = (y + 1) * W + (x + 1)
            key[i] = 0.0
            owner[i] = s.seed_id
            heap.append((0.0, s.seed_id, i))
    heapq.heapify(heap)

    done = [False] * n
    while heap:
        d, sid, i = heapq.heappop(heap)
        if done[i] or d != key[i] or sid != owner[i]:
            continue
        done[i] = True
        a0, b0 = n_axis[i], n_diag[i]
        for off, da, db in steps:
            j = i + off
            if not vflat[j] or done[j]:
                continue
            a, b = a0 + da, b0 + db
            # recomputed from integer step counts so equal paths give identical floats
            nd = a + b * SQRT2
            kj = key[j]
            if nd < kj or (nd == kj and sid < owner[j]):
                key[j] = nd
                owner[j] = sid
                n_axis[j] = a
                n_diag[j] = b
                heapq.heappush(heap, (nd, sid, j))

    own = np.asarray(owner, dtype=np.int64).reshape(h + 2, W)[1:-1, 1:-1]
    dist = np.asarray(key, dtype=np.float64).reshape(h + 2, W)[1:-1, 1:-1]
    on = word_mask.bits & (own > 0)
    assignment = np.where(on, own, 0)
    distance = np.where(on, dist, np.inf)
    return AssignmentMap(assignment, distance)


def proposals_from_masks(word_mask, centerline_mask, cfg: ProposalConfig = ProposalConfig()):
    """Proposals from already-binarised masks. See :func:`generate_proposals`."""
    word_mask = as_mask(word_mask)
    centerline_mask = as_mask(centerline_mask)
    _check_shapes(word_mask.shape, centerline_mask.shape, "word map", "center-line map")

    seeds = extract_seeds(centerline_mask, cfg.connectivity)
    amap = geodesic_label_assignment(word_mask, seeds, cfg.connectivity)

    groups: dict[int, np.ndarray] = {}
    lab = amap.assignment
    for sid in np.unique(lab[lab > 0]).tolist():
        ys, xs = np.nonzero(lab == sid)
        groups[sid] = np.column_stack([xs, ys]).astype(np.int64)

    attached: dict[int, list[np.ndarray]] = {}
    if not cfg.drop_seedless and groups:
        comps = connected_components(word_mask, cfg.connectivity)
        assigned_labels = set(np.unique(comps.labels[lab > 0]).tolist())
        orphans = [k for k in range(1, comps.component_count + 1) if k not in assigned_labels]
        if orphans:
            sids = np.concatenate([np.full(len(p), sid) for sid, p in groups.items()])
            tree = cKDTree(np.vstack(list(groups.values())).astype(np.float64))
            for k in orphans:
                pts = component_pixels(comps, k).astype(np.float64)
                d, _ = tree.query(pts, k=1, distance_upper_bound=cfg.orphan_attach_max_dist + 1e-9)
                gap = float(d.min())
                if not gap <= cfg.orphan_attach_max_dist:
                    continue
                # every seed reaching the orphan at the minimal gap; smallest id wins
                near = tree.query_ball_point(pts[d <= gap + 1e-9], gap + 1e-9)
                best_sid = min(int(sids[i]) for hits in near for i in hits)
                attached.setdefault(best_sid, []).append(pts.astype(np.int64))

    proposals = []
    for pid, sid in enumerate(sorted(groups), start=1):
        pix = groups[sid]
        source = ProposalSource.GEODESIC
        if sid in attached:
            pix = pixel_set(np.vstack([pix] + attached[sid]))
            source = ProposalSource.ORPHAN_ATTACHED
        proposals.append(WordProposal(pid, sid, pix, source))
    return proposals


def generate_proposals(word_map, centerline_map, cfg: ProposalConfig = ProposalConfig()):
    """Threshold both saliency maps and cluster word pixels into proposals.

    Returns a list of :class:`WordProposal` ordered by seed id. Proposal ids
    run 1..n over the seeds that captured at least one word pixel.
    """
    word_map = as_map(word_map)
    centerline_map = as_map(centerline_map)
    _check_shapes(word_map.shape, centerline_map.shape, "word map", "center-line map")
    return proposals_from_masks(
        threshold_map(word_map, cfg.word_threshold),
        threshold_map(centerline_map, cfg.centerline_threshold),
        cfg,
    )
