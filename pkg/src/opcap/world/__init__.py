from opcap.world.scene import (
    CLASS_TRAITS,
    OBJECT_CLASSES,
    ZONES,
    Scene,
    SceneObject,
    generate_scene,
    scene_triplets,
    zone_of,
)
from opcap.world.actions import ActionError, ActionSpec, VERBS, applicable_actions, apply_action, sample_action
from opcap.world.captions import TEMPLATES, VERB_TOKENS, caption_action, pos_lexicon_entries
from opcap.world.render import render, save_image
from opcap.world.generate import GeneratorConfig, generate_dataset

__all__ = [
    "Scene",
    "SceneObject",
    "OBJECT_CLASSES",
    "CLASS_TRAITS",
    "ZONES",
    "zone_of",
    "generate_scene",
    "scene_triplets",
    "ActionSpec",
    "ActionError",
    "VERBS",
    "applicable_actions",
    "apply_action",
    "sample_action",
    "caption_action",
    "TEMPLATES",
    "VERB_TOKENS",
    "pos_lexicon_entries",
    "render",
    "save_image",
    "GeneratorConfig",
    "generate_dataset",
]
