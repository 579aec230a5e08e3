import inspect
import math

import numpy as np
import pytest
import torch

from opcap.data.targets import scene_graph_targets, target_length
from opcap.data.vocab import EOS_ID, PAD_ID, build_vocabulary
from opcap.model.config import ModelConfig
from opcap.model.sg_head import SceneGraphHead, build_role_masks, decode_triplets, sg_loss

import torch_mirror as mirror
from conftest import make_sample
from test_decoder import random_bundle


def head_cfg(vocab_size, **kw):
    base = dict(vocab_size=vocab_size, image_size=8, channels=4, feat_hw=4, attn_hidden=3,
                embed_size=4, hidden_size=6, max_len=6, max_triplets=2)
    base.update(kw)
    return ModelConfig(**base)


@pytest.fixture()
def role_vocab(tiny_samples):
    return build_vocabulary(tiny_samples)


def test_role_masks_structure(role_vocab):
    masks = build_role_masks(role_vocab)
    assert masks.shape == (3, len(role_vocab))
    assert masks[0, EOS_ID] and not masks[1, EOS_ID] and not masks[2, EOS_ID]
    relationship_only = role_vocab.relationship_ids - role_vocab.subject_ids
    assert relationship_only, "world vocab should have relationship-only labels"
    for i in relationship_only:
        assert masks[1, i] and not masks[0, i] and not masks[2, i]


def test_eos_forced_params_give_zero_triplets(role_vocab):
    cfg = head_cfg(len(role_vocab))
    head = SceneGraphHead(cfg)
    with torch.no_grad():
        head.out.weight.zero_()
        head.out.bias.fill_(-100.0)
        head.out.bias[EOS_ID] = 100.0
    _, triplets = head.predict_triplets(random_bundle(batch=3), 2, build_role_masks(role_vocab))
    assert triplets == [[], [], []]


def test_role_masking_restricts_every_slot(role_vocab):
    masks = build_role_masks(role_vocab)
    for seed in range(10):
        torch.manual_seed(seed)
        head = SceneGraphHead(head_cfg(len(role_vocab)))
        _, triplets = head.predict_triplets(random_bundle(batch=4, seed=seed), 3, masks)
        for row in triplets:
            for s, r, o in row:
                assert s in role_vocab.subject_ids
                assert r in role_vocab.relationship_ids
                assert o in role_vocab.object_ids


def test_head_matches_numpy_mirror(role_vocab):
    torch.manual_seed(2)
    cfg = head_cfg(len(role_vocab))
    head = SceneGraphHead(cfg).double()
    p = mirror.params_of(head)
    bundle = random_bundle(batch=2, dtype=torch.float64, seed=4)
    targets = torch.tensor([[5, 6, 7, EOS_ID, PAD_ID, PAD_ID, PAD_ID],
                            [8, 9, 10, EOS_ID, PAD_ID, PAD_ID, PAD_ID]])
    logits, weights = head.teacher_forced(bundle, targets)

    streams = bundle.streams().numpy()
    hidden = np.zeros((2, cfg.hidden_size))
    prev = np.array([1, 1])  # BOS
    attn_p = {k.split("attention.")[1]: v for k, v in p.items() if k.startswith("attention.")}
    for t in range(targets.shape[1]):
        ctx, w = mirror.dynamic_attention(streams, hidden, attn_p)
        x = np.concatenate([p["embedding.weight"][prev], ctx], axis=-1)
        hidden = mirror.gru_cell(x, hidden, p["cell.weight_ih"], p["cell.weight_hh"],
                                 p["cell.bias_ih"], p["cell.bias_hh"])
        want = mirror.linear(hidden, p["out.weight"], p["out.bias"])
        assert np.allclose(logits[:, t].detach().numpy(), want, atol=1e-10), t
        assert np.allclose(weights[:, t].detach().numpy(), w, atol=1e-10), t
        prev = targets[:, t].numpy()


def test_sg_loss_limits_and_oracle():
    vocab = 11
    targets = torch.tensor([[4, 5, 6, EOS_ID, PAD_ID]])
    perfect = torch.full((1, 5, vocab), -100.0)
    for t, tok in enumerate([4, 5, 6, EOS_ID, PAD_ID]):
        perfect[0, t, tok] = 100.0
    assert sg_loss(perfect, targets).item() < 1e-6
    assert abs(sg_loss(torch.zeros(1, 5, vocab), targets).item() - math.log(vocab)) < 1e-6
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(2, 4, vocab))
    tgt = rng.integers(4, vocab, size=(2, 4))
    tgt[0, -1] = PAD_ID
    got = sg_loss(torch.tensor(logits), torch.tensor(tgt)).item()
    total, count = 0.0, 0
    for b in range(2):
        for t in range(4):
            if tgt[b, t] == PAD_ID:
                continue
            z = logits[b, t]
            total += -(z[tgt[b, t]] - math.log(np.exp(z).sum()))
            count += 1
    assert abs(got - total / count) < 1e-10


def test_loss_finite_positive_on_dataset(tiny_samples, role_vocab):
    cfg = head_cfg(len(role_vocab), max_triplets=8)
    head = SceneGraphHead(cfg)
    targets = torch.tensor(
        [scene_graph_targets(s, "diff", role_vocab, 8) for s in tiny_samples[:6]], dtype=torch.long
    )
    bundle = random_bundle(batch=6)
    logits, _ = head.teacher_forced(bundle, targets)
    loss = sg_loss(logits, targets)
    assert torch.isfinite(loss) and loss.item() > 0


def test_head_takes_no_caption_input():
    params = inspect.signature(SceneGraphHead.teacher_forced).parameters
    assert set(params) == {"self", "bundle", "targets"}
    params = inspect.signature(SceneGraphHead.predict_triplets).parameters
    assert set(params) == {"self", "bundle", "max_triplets", "role_masks"}


def test_head_params_disjoint_from_captioner():
    from opcap.model.network import ChangeCaptioner

    model = ChangeCaptioner(head_cfg(16))
    sg = {id(p) for p in model.sg_head.parameters()}
    cap = {id(p) for p in model.captioner.parameters()}
    assert not sg & cap


def test_decode_triplets_parsing():
    assert decode_triplets([4, 5, 6, EOS_ID, PAD_ID, PAD_ID, PAD_ID]) == [(4, 5, 6)]
    assert decode_triplets([EOS_ID, PAD_ID, PAD_ID, PAD_ID]) == []
    assert decode_triplets([4, 5, 6, 7, 8, 9, EOS_ID]) == [(4, 5, 6), (7, 8, 9)]


def test_single_batch_overfit_memorizes(role_vocab):
    """Capacity check: 500 steps on one batch reach >= 95% exact match."""
    torch.manual_seed(0)
    cfg = head_cfg(len(role_vocab), channels=8, embed_size=24, hidden_size=64, max_triplets=2)
    head = SceneGraphHead(cfg)
    masks = build_role_masks(role_vocab)
    n = 16
    rng = np.random.default_rng(3)
    subjects = sorted(role_vocab.subject_ids)
    rels = sorted(role_vocab.relationship_ids)
    objects = sorted(role_vocab.object_ids)
    rows = []
    for _ in range(n):
        triplets = sorted(
            (int(rng.choice(subjects)), int(rng.choice(rels)), int(rng.choice(objects)))
            for _ in range(int(rng.integers(1, 3)))
        )
        flat = [i for t in triplets for i in t] + [EOS_ID]
        flat += [PAD_ID] * (target_length(2) - len(flat))
        rows.append(flat)
    targets = torch.tensor(rows, dtype=torch.long)
    bundle = random_bundle(batch=n, channels=8, seed=8)
    opt = torch.optim.Adam(head.parameters(), lr=5e-3)
    for _ in range(500):
        logits, _ = head.teacher_forced(bundle, targets)
        loss = sg_loss(logits, targets)
        opt.zero_grad()
        loss.backward()
        opt.step()
    _, decoded = head.predict_triplets(bundle, 2, masks)
    hits = sum(decoded[i] == decode_triplets(rows[i]) for i in range(n))
    assert hits / n >= 0.95, f"exact match {hits}/{n}"
