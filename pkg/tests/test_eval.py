import numpy as np
import pytest

from opcap.metrics.content import PosLexicon
from opcap.metrics.evaluate import (
    REPORT_COLUMNS,
    EvalReport,
    VocabMismatchError,
    evaluate,
    read_report,
    score_captions,
    write_report,
)
from opcap.training.loop import TrainConfig, train
from opcap.world.captions import pos_lexicon_entries


@pytest.fixture(scope="module")
def lexicon():
    return PosLexicon(pos_lexicon_entries())


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    from opcap.world.generate import GeneratorConfig, generate_dataset

    data = tmp_path_factory.mktemp("eval_data")
    generate_dataset(GeneratorConfig(count=30, seed=2), data)
    out = tmp_path_factory.mktemp("eval_run")
    cfg = TrainConfig(channels=16, attn_hidden=12, embed_size=24, hidden_size=48, epochs=1, batch_size=16)
    train(data, cfg, out, quiet=True)
    return data, out / "checkpoints" / "best.pt"


def test_self_evaluation_ceiling(tiny_samples, lexicon):
    from opcap.data.vocab import normalize_caption

    refs = [normalize_caption(s.caption) for s in tiny_samples]
    report = score_captions(refs, refs, lexicon)
    assert report.bleu_smoothed == (1.0, 1.0, 1.0, 1.0)
    assert report.bleu_corpus == (1.0, 1.0, 1.0, 1.0)
    assert report.rouge_l == 1.0
    for cls, (p, r, f) in report.content.items():
        assert (p, r, f) == (1.0, 1.0, 1.0), cls


def test_report_bounds_for_any_checkpoint(trained, lexicon):
    data, ckpt = trained
    report = evaluate(ckpt, data, "test", lexicon)
    report.validate()
    assert report.sample_count == 4
    row = report.row()
    assert set(REPORT_COLUMNS) - {"system"} == set(row)


def test_vocab_mismatch_refused(trained, lexicon, tmp_path):
    from opcap.world.generate import GeneratorConfig, generate_dataset

    _, ckpt = trained
    other = tmp_path / "other_data"
    generate_dataset(GeneratorConfig(count=20, seed=99, min_objects=2, max_objects=3), other)
    with pytest.raises(VocabMismatchError, match="does not match"):
        evaluate(ckpt, other, "test", lexicon)


def test_beam_strategy_runs(trained, lexicon):
    data, ckpt = trained
    report = evaluate(ckpt, data, "dev", lexicon, strategy="beam", beam_width=2)
    report.validate()


def test_report_roundtrip(tmp_path, lexicon, tiny_samples):
    from opcap.data.vocab import normalize_caption

    refs = [normalize_caption(s.caption) for s in tiny_samples]
    report = score_captions(refs, refs, lexicon)
    path = write_report(tmp_path / "r.tsv", {"self": report})
    loaded = read_report(path)
    assert loaded["self"]["bleu4"] == 1.0
    assert loaded["self"]["noun_f"] == 1.0
    header = path.read_text().splitlines()[0].split("\t")
    assert header == list(REPORT_COLUMNS)


def test_fscore_consistency_enforced():
    bad = EvalReport(
        sample_count=1,
        bleu_smoothed=(0.5, 0.4, 0.3, 0.2),
        bleu_corpus=(0.5, 0.4, 0.3, 0.2),
        rouge_l=0.5,
        cider=1.0,
        content={"noun": (0.5, 0.5, 0.9)},
    )
    with pytest.raises(ValueError, match="harmonic"):
        bad.validate()
