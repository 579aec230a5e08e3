"""Core record types shared by the data pipeline, generator, and trainer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

VIEWPOINTS = ("first_person", "third_person")


class SceneGraphTriplet(NamedTuple):
    """One subject-relationship-object event descriptor.

    Triplets carry string labels; they are encoded to vocabulary ids only when
    building prediction targets, and every label seen in a dataset is
    guaranteed a vocabulary entry.
    """

    subject: str
    relationship: str
    object: str


@dataclass(frozen=True)
class StatePairSample:
    """One training/eval record: a (current, target) image pair plus labels."""

    id: str
    image_a: str  # relative path, current state
    image_b: str  # relative path, target state
    viewpoint: str
    object_hint: str
    caption: str
    graphs_a: frozenset[SceneGraphTriplet]
    graphs_b: frozenset[SceneGraphTriplet]

    def __post_init__(self):
        if self.viewpoint not in VIEWPOINTS:
            raise ValueError(f"viewpoint must be one of {VIEWPOINTS}, got {self.viewpoint!r}")


class TimelineEvent(NamedTuple):
    """A triplet becoming active at a point in time.

    An event replaces whatever relationship was previously active for the same
    (subject, object) pair; there is no separate removal event in this model.
    """

    t: float
    triplet: SceneGraphTriplet
    rect: Optional[tuple[float, float, float, float]] = None


@dataclass
class AnnotationTimeline:
    """Time-stamped triplet activations over one recorded session.

    `start`/`end` bound the usable time range (frames outside it do not
    exist), independently of where the first or last annotation falls.
    The timestamp→frame map is `frame_at`, a uniform `fps` sampling.
    """

    events: list[TimelineEvent] = field(default_factory=list)
    start: float = 0.0
    end: float = 0.0
    fps: float = 30.0

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"timeline end {self.end} precedes start {self.start}")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        prev = None
        for ev in self.events:
            if prev is not None and ev.t < prev:
                raise ValueError(f"event timestamps must be non-decreasing, got {ev.t} after {prev}")
            if not (self.start <= ev.t <= self.end):
                raise ValueError(f"event at t={ev.t} outside timeline [{self.start}, {self.end}]")
            prev = ev.t

    def frame_at(self, t: float) -> int:
        return int(round((t - self.start) * self.fps))

    def to_json_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "fps": self.fps,
            "events": [
                {
                    "t": ev.t,
                    "subject": ev.triplet.subject,
                    "relationship": ev.triplet.relationship,
                    "object": ev.triplet.object,
                    "rect": list(ev.rect) if ev.rect is not None else None,
                }
                for ev in self.events
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "AnnotationTimeline":
        events = [
            TimelineEvent(
                t=float(e["t"]),
                triplet=SceneGraphTriplet(e["subject"], e["relationship"], e["object"]),
                rect=tuple(e["rect"]) if e.get("rect") is not None else None,
            )
            for e in d.get("events", [])
        ]
        return cls(
            events=events,
            start=float(d.get("start", 0.0)),
            end=float(d.get("end", 0.0)),
            fps=float(d.get("fps", 30.0)),
        )
