"""Templated operative-action captions with gold part-of-speech tags.

Each verb owns at least three paraphrase templates. Verb tokens are disjoint
across verbs, so a caption's verb token identifies the generating verb class
(used by the caption-graph alignment checks). The POS entries double as the
gold lexicon shipped next to generated datasets.
"""

from __future__ import annotations

import numpy as np

from opcap.world.actions import ActionSpec
from opcap.world.scene import OBJECT_CLASSES, ZONES

TEMPLATES: dict[str, list[str]] = {
    "take": [
        "take the {obj} from the {src}",
        "pick the {obj} up from the {src}",
        "grab the {obj} off the {src}",
    ],
    "put": [
        "put the {obj} on the {dst}",
        "place the {obj} on the {dst}",
        "set the {obj} down on the {dst}",
    ],
    "open": [
        "open the {obj}",
        "pull the {obj} open",
        "flip the {obj} open",
    ],
    "close": [
        "close the {obj}",
        "shut the {obj}",
        "push the {obj} closed",
    ],
    "move": [
        "move the {obj} from the {src} to the {dst}",
        "carry the {obj} over to the {dst}",
        "shift the {obj} from the {src} onto the {dst}",
    ],
    "wash": [
        "wash the {obj} in the sink",
        "rinse the {obj} in the sink",
        "give the {obj} a quick wash in the sink",
        "clean the {obj} in the sink",
    ],
    "hang": [
        "hang the {obj} on the rack",
        "hang the {obj} up on the rack",
        "drape the {obj} over the rack",
    ],
    "remove": [
        "remove the {obj} from the rack",
        "unhook the {obj} from the rack",
        "lift the {obj} off the rack",
    ],
}

# lexical verb tokens per verb class; disjoint by construction (asserted below)
VERB_TOKENS: dict[str, frozenset[str]] = {
    "take": frozenset({"take", "pick", "grab"}),
    "put": frozenset({"put", "place", "set"}),
    "open": frozenset({"open", "pull", "flip"}),
    "close": frozenset({"close", "shut", "push"}),
    "move": frozenset({"move", "carry", "shift"}),
    "wash": frozenset({"wash", "rinse", "clean"}),
    "hang": frozenset({"hang", "drape"}),
    "remove": frozenset({"remove", "unhook", "lift"}),
}

_all_verb_tokens = [t for toks in VERB_TOKENS.values() for t in toks]
assert len(_all_verb_tokens) == len(set(_all_verb_tokens)), "verb tokens must be disjoint across verbs"

AUX_VERBS = ("give", "is", "are", "was", "were", "be", "been", "being", "get", "got", "do", "does", "have", "has")

_FUNCTION_WORDS = ("the", "a", "from", "to", "on", "in", "of", "off", "over", "down", "up", "out", "quick")


def pos_lexicon_entries() -> dict[str, str]:
    """token → POS class for every token the synthetic world can emit."""
    entries: dict[str, str] = {}
    for w in _FUNCTION_WORDS + ("closed", "dirty"):
        entries[w] = "other"
    for cls in OBJECT_CLASSES:
        entries[cls] = "noun"
    for z in ZONES:
        entries[z] = "noun"
    for extra in ("person", "rack", "sink"):
        entries[extra] = "noun"
    for toks in VERB_TOKENS.values():
        for t in toks:
            entries[t] = "verb"
    for t in AUX_VERBS:
        entries[t] = "aux_verb"
    for rel in ("holding", "putting", "hanging_on", "in_front_of"):
        entries[rel] = "verb"
    return entries


def caption_action(action: ActionSpec, seed: int) -> str:
    """Sample one paraphrase for the action, deterministic in seed."""
    templates = TEMPLATES[action.verb]
    rng = np.random.default_rng(seed)
    template = templates[int(rng.integers(len(templates)))]
    return template.format(obj=action.target, src=action.source, dst=action.destination)
