import numpy as np
import pytest

from opcap.data.pairs import extract_state_pairs, write_skip_log
from opcap.data.types import AnnotationTimeline, SceneGraphTriplet, TimelineEvent


def T(s, r, o):
    return SceneGraphTriplet(s, r, o)


def test_fork_replacement_scenario():
    # holding -> putting at t=5.0; the initial activation's before-frame falls
    # outside the timeline, so exactly one pair comes out
    tl = AnnotationTimeline(
        events=[TimelineEvent(2.0, T("person", "holding", "fork")),
                TimelineEvent(5.0, T("person", "putting", "fork"))],
        start=2.0, end=6.0, fps=10.0,
    )
    pairs, skips = extract_state_pairs(tl, margin=0.5)
    assert len(pairs) == 1
    p = pairs[0]
    assert p.triplet == T("person", "putting", "fork")
    assert p.frame_before == tl.frame_at(4.5) and p.frame_after == tl.frame_at(5.5)
    assert len(skips) == 1 and skips[0].t == 2.0


def test_no_relationship_change_gives_nothing():
    tl = AnnotationTimeline(
        events=[TimelineEvent(1.0, T("person", "holding", "fork")),
                TimelineEvent(3.0, T("person", "holding", "fork"))],
        start=0.0, end=10.0,
    )
    pairs, skips = extract_state_pairs(tl, margin=0.5)
    # the first activation is a change; the re-activation is not
    assert len(pairs) == 1 and not skips
    assert extract_state_pairs(AnnotationTimeline(end=10.0), 0.5) == ([], [])


def test_early_event_skipped():
    tl = AnnotationTimeline(events=[TimelineEvent(0.1, T("a", "r", "b"))], start=0.0, end=10.0)
    pairs, skips = extract_state_pairs(tl, margin=0.5)
    assert pairs == []
    assert len(skips) == 1 and "before-frame" in skips[0].reason


def test_late_event_skipped():
    tl = AnnotationTimeline(events=[TimelineEvent(9.8, T("a", "r", "b"))], start=0.0, end=10.0)
    pairs, skips = extract_state_pairs(tl, margin=0.5)
    assert pairs == [] and "after-frame" in skips[0].reason


def test_margin_must_be_positive():
    with pytest.raises(ValueError):
        extract_state_pairs(AnnotationTimeline(end=1.0), 0.0)


def test_timestamps_must_be_ordered():
    with pytest.raises(ValueError):
        AnnotationTimeline(
            events=[TimelineEvent(2.0, T("a", "r", "b")), TimelineEvent(1.0, T("a", "q", "b"))],
            start=0.0, end=3.0,
        )


def test_output_ordered_by_timestamp():
    tl = AnnotationTimeline(
        events=[TimelineEvent(2.0, T("a", "r1", "b")),
                TimelineEvent(4.0, T("c", "r1", "d")),
                TimelineEvent(6.0, T("a", "r2", "b"))],
        start=0.0, end=10.0,
    )
    pairs, _ = extract_state_pairs(tl, 0.5)
    frames = [p.frame_before for p in pairs]
    assert frames == sorted(frames) and len(pairs) == 3


def brute_force_reference(timeline, margin):
    """Literal restatement of the contract, kept independent of the implementation."""
    kept, skipped = [], 0
    state = {}
    for ev in timeline.events:
        key = (ev.triplet.subject, ev.triplet.object)
        changed = key not in state or state[key] != ev.triplet.relationship
        state[key] = ev.triplet.relationship
        if not changed:
            continue
        if timeline.start <= ev.t - margin and ev.t + margin <= timeline.end:
            kept.append((timeline.frame_at(ev.t - margin), timeline.frame_at(ev.t + margin), ev.triplet))
        else:
            skipped += 1
    return kept, skipped


@pytest.mark.parametrize("seed", range(5))
def test_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    subjects, rels, objects = ["p", "q"], ["r1", "r2", "r3"], ["x", "y", "z"]
    for _ in range(40):
        times = np.sort(rng.uniform(0, 20, size=rng.integers(0, 15)))
        events = [
            TimelineEvent(float(t), T(rng.choice(subjects), rng.choice(rels), rng.choice(objects)))
            for t in times
        ]
        tl = AnnotationTimeline(events=events, start=0.0, end=20.0, fps=5.0)
        margin = float(rng.uniform(0.1, 3.0))
        pairs, skips = extract_state_pairs(tl, margin)
        ref_pairs, ref_skips = brute_force_reference(tl, margin)
        assert [(p.frame_before, p.frame_after, p.triplet) for p in pairs] == ref_pairs
        assert len(skips) == ref_skips


def test_skip_log_format(tmp_path):
    tl = AnnotationTimeline(events=[TimelineEvent(0.1, T("a", "r", "b"))], start=0.0, end=10.0)
    _, skips = extract_state_pairs(tl, 0.5)
    log = tmp_path / "skips.log"
    write_skip_log(log, skips)
    lines = log.read_text().splitlines()
    assert len(lines) == 1 and "a-r-b" in lines[0]
