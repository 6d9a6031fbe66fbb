"""
Character boxes as evidence
===========================

A segment survives only if some confident character box is at least
partly filled by it. The consistency loss measures how much the word mask
and the character boxes disagree; dropping unsupported segments lowers it.
"""

import numpy as np

from textcc import (
    CharacterBox,
    LossConfig,
    compute_consistency_loss,
    generate_proposals,
    verify_proposals,
)
from textcc.raster import threshold_map

word = np.zeros((30, 70))
word[5:25, 5:35] = 1.0  # a real word
word[8:14, 50:62] = 1.0  # a text-like false alarm
center = np.zeros_like(word)
center[10:20, 5:35] = 1.0
center[10:12, 50:62] = 1.0

chars = [CharacterBox(5 + 10 * k, 5, 15 + 10 * k, 25, class_id=k + 1, confidence=0.95) for k in range(3)]
chars.append(CharacterBox(48, 4, 64, 18, confidence=0.3))  # weak detection over the false alarm

props = generate_proposals(word, center)
res = verify_proposals(props, chars)
print("proposals:", [p.proposal_id for p in props])
print("accepted :", [p.proposal_id for p in res.accepted], "support:", res.support)
print("rejected :", [(p.proposal_id, r.value) for p, r in res.rejected])

mask = threshold_map(word)
for name, segs in (("all proposals", props), ("verified only", res.accepted)):
    rep = compute_consistency_loss(mask, segs, chars, LossConfig(tau=0.5))
    print(f"{name:14s} L1={rep.l1:.4f} L2={rep.l2:.4f} total={rep.total:.4f}")
