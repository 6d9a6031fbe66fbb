"""
Splitting touching words with center-line seeds
===============================================

Two words whose masks touch form one connected blob. Their center lines
do not touch, so each center-line component seeds a geodesic flood that
claims the word pixels nearest to it. The dot of a "j" has no seed of its
own and gets attached to the closest proposal.
"""

import numpy as np

from textcc import ProposalConfig, generate_proposals
from textcc.raster import connected_components

# two 20-pixel-high words joined by a one-pixel bridge, plus a detached dot
word = np.zeros((32, 60))
word[6:26, 2:26] = 1.0
word[6:26, 34:58] = 1.0
word[15, 26:34] = 1.0
word[1:4, 50:53] = 1.0

center = np.zeros_like(word)
center[11:21, 2:26] = 1.0
center[11:21, 34:58] = 1.0

print("word-mask components:", connected_components(word > 0.5).component_count)

props = generate_proposals(word, center)
for p in props:
    xs, ys = p.pixels[:, 0], p.pixels[:, 1]
    print(f"proposal {p.proposal_id}: {len(p.pixels)} px, x {xs.min()}..{xs.max()}, "
          f"y {ys.min()}..{ys.max()}, source={p.source.value}")

# without orphan attachment the dot is simply left out
strict = generate_proposals(word, center, ProposalConfig(drop_seedless=True))
print("sizes with drop_seedless:", [len(p.pixels) for p in strict])
