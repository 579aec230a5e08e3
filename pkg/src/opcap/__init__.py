"""Operative-action captioning at desk scale.

Given a current-state image and a target-state image, generate a caption of
the action that transforms one into the other. Training uses a dual spatial
attention encoder over the image pair and its difference, a dynamic-attention
caption decoder, and an optional scene-graph prediction auxiliary task.
"""

__version__ = "0.1.0"
