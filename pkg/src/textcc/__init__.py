"""Post-processing for two-branch scene-text detectors.

Word and center-line saliency maps become word proposals by geodesic
clustering around center-line components; character detections verify
them; the consistency loss scores how well the two agree.
"""
from .raster import (
    BinaryMask,
    Connectivity,
    LabelMap,
    ProbabilityMap,
    component_pixels,
    connected_components,
    threshold_map,
)
from .proposals import (
    AssignmentMap,
    ProposalConfig,
    ProposalSource,
    SeedSet,
    WordProposal,
    extract_seeds,
    generate_proposals,
    geodesic_label_assignment,
)
from .verification import CharacterBox, VerificationConfig, VerifiedResult, fill_ratio, verify_proposals
from .loss import LossConfig, LossReport, compute_consistency_loss, phi_det, psi_seg
from .geometry import AxisBox, RotatedRect, axis_aligned_bbox, min_area_rect
from .evaluation import GroundTruthWord, MatchReport, f_score, match_deteval, match_one_to_one
from .synth import NoiseSpec, SceneBundle, SceneSpec, WordSpec, apply_noise, render_scene
from .config import PipelineConfig, load_config
from .pipeline import detect, run_detect

__version__ = "0.1.0"
