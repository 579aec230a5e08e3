"""State-pair extraction from annotated timelines.

A pair of frames is cut around every point where the active relationship for
some (subject, object) pair changes — including the first activation of a
pair. Events whose margin window falls outside the timeline bounds are
skipped and reported, not raised.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

from opcap.data.types import AnnotationTimeline, SceneGraphTriplet


class ExtractedPair(NamedTuple):
    frame_before: int
    frame_after: int
    triplet: SceneGraphTriplet


class SkippedEvent(NamedTuple):
    t: float
    triplet: SceneGraphTriplet
    reason: str


def extract_state_pairs(
    timeline: AnnotationTimeline, margin: float
) -> tuple[list[ExtractedPair], list[SkippedEvent]]:
    """Emit (frame@t-margin, frame@t+margin, new triplet) per relationship change.

    Output is ordered by timestamp. Re-activating the relationship already
    active for a (subject, object) pair is not a change.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    pairs: list[ExtractedPair] = []
    skips: list[SkippedEvent] = []
    active: dict[tuple[str, str], str] = {}
    for ev in timeline.events:
        key = (ev.triplet.subject, ev.triplet.object)
        if active.get(key) == ev.triplet.relationship:
            continue
        active[key] = ev.triplet.relationship
        if ev.t - margin < timeline.start:
            skips.append(SkippedEvent(ev.t, ev.triplet, "before-frame outside timeline"))
        elif ev.t + margin > timeline.end:
            skips.append(SkippedEvent(ev.t, ev.triplet, "after-frame outside timeline"))
        else:
            pairs.append(
                ExtractedPair(
                    frame_before=timeline.frame_at(ev.t - margin),
                    frame_after=timeline.frame_at(ev.t + margin),
                    triplet=ev.triplet,
                )
            )
    return pairs, skips


def write_skip_log(path, skips: list[SkippedEvent]) -> None:
    """Plain text, one skipped event per line."""
    lines = [f"t={s.t:g}\t{s.triplet.subject}-{s.triplet.relationship}-{s.triplet.object}\t{s.reason}" for s in skips]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
