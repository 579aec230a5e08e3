"""Single command-line entry point.

Subcommands: gen-data, extract-pairs, train, eval, caption, report-plots.
Exit codes: 0 success, 1 usage error, 2 runtime failure. All randomness is
routed through --seed; environment variables are never consulted.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve 2 for runtime
        raise UsageError(message)


def _parse_overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs or []:
        key, sep, raw = pair.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {pair!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def build_parser() -> _Parser:
    parser = _Parser(prog="opcap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic paired-state dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="generator config JSON")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="overrides")

    p = sub.add_parser("extract-pairs", help="cut state pairs around relationship changes")
    p.add_argument("--timeline", required=True, help="timeline JSON file")
    p.add_argument("--margin", type=float, required=True, help="seconds either side of the change")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a captioner on a dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="training config JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="overrides")

    p = sub.add_parser("eval", help="score a checkpoint on a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--report", required=True)
    p.add_argument("--lexicon", help="token TAB pos file; defaults to <data>/lexicon.tsv")
    p.add_argument("--system", default="model", help="row label in the report")
    p.add_argument("--beam", type=int, default=0, help="beam width; 0 = greedy")

    p = sub.add_parser("caption", help="caption one image pair")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--image-a", required=True)
    p.add_argument("--image-b", required=True)
    p.add_argument("--beam", type=int, default=0, help="beam width; 0 = greedy")

    p = sub.add_parser("report-plots", help="render loss curves and metric bars")
    p.add_argument("--out", required=True)
    p.add_argument("--train-log", help="log.tsv from a training run")
    p.add_argument("--report", action="append", help="eval report (repeatable)")
    return parser


def _echo_config(out_dir: Path, payload: dict, name: str = "run_config.json") -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def cmd_gen_data(args) -> int:
    from opcap.world.generate import GeneratorConfig, generate_dataset

    base = {}
    if args.config:
        base.update(json.loads(Path(args.config).read_text()))
    base.update(_parse_overrides(args.overrides))
    if args.count is not None:
        base["count"] = args.count
    if args.seed is not None:
        base["seed"] = args.seed
    try:
        cfg = GeneratorConfig.from_dict(base)
    except Exception as e:
        raise UsageError(str(e)) from e
    manifest = generate_dataset(cfg, args.out)
    print(manifest.read_text().splitlines()[-1])
    print(f"dataset written to {args.out}")
    return 0


def cmd_extract_pairs(args) -> int:
    from opcap.data.pairs import extract_state_pairs, write_skip_log
    from opcap.data.types import AnnotationTimeline

    timeline = AnnotationTimeline.from_json_dict(json.loads(Path(args.timeline).read_text()))
    pairs, skips = extract_state_pairs(timeline, args.margin)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["frame_before\tframe_after\tsubject\trelationship\tobject"]
    lines += [f"{p.frame_before}\t{p.frame_after}\t{p.triplet.subject}\t{p.triplet.relationship}\t{p.triplet.object}" for p in pairs]
    (out / "pairs.tsv").write_text("\n".join(lines) + "\n")
    write_skip_log(out / "skips.log", skips)
    _echo_config(out, {"timeline": args.timeline, "margin": args.margin})
    print(f"{len(pairs)} pairs, {len(skips)} skipped -> {out}")
    return 0


def cmd_train(args) -> int:
    from opcap.training.loop import load_train_config, train

    overrides = _parse_overrides(args.overrides)
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        cfg = load_train_config(args.config, overrides)
    except KeyError as e:
        raise UsageError(str(e)) from e
    state = train(args.data, cfg, args.out)
    print(f"trained {state.epoch} epochs; best dev BLEU-4 {state.best_dev_bleu4:.4f} "
          f"at epoch {state.best_epoch}; checkpoints in {args.out}/checkpoints")
    return 0


def cmd_eval(args) -> int:
    from opcap.metrics.content import PosLexicon
    from opcap.metrics.evaluate import evaluate, write_report

    lexicon_path = args.lexicon or str(Path(args.data) / "lexicon.tsv")
    if not Path(lexicon_path).is_file():
        raise UsageError(f"lexicon file not found: {lexicon_path}")
    lexicon = PosLexicon.from_file(lexicon_path)
    strategy = "beam" if args.beam > 0 else "greedy"
    report = evaluate(args.checkpoint, args.data, args.split, lexicon,
                      strategy=strategy, beam_width=max(args.beam, 1))
    write_report(args.report, {args.system: report})
    row = report.row()
    print("\t".join(f"{k}={row[k]:.4f}" for k in ("bleu4", "rouge_l", "cider", "noun_f", "verb_f")))
    print(f"report written to {args.report}")
    return 0


def cmd_caption(args) -> int:
    import torch

    from opcap.data.vocab import detokenize_ids
    from opcap.training.checkpoint import load_checkpoint
    from opcap.world.render import load_image

    model, vocab, _ = load_checkpoint(args.checkpoint)
    imgs = []
    for ref in (args.image_a, args.image_b):
        arr = load_image(ref)
        imgs.append(torch.from_numpy(arr.copy()).permute(2, 0, 1).float().unsqueeze(0) / 255.0)
    if imgs[0].shape != imgs[1].shape:
        raise ValueError(f"image dimensions differ: {tuple(imgs[0].shape)} vs {tuple(imgs[1].shape)}")
    strategy = "beam" if args.beam > 0 else "greedy"
    with torch.no_grad():
        rows = model.generate(imgs[0], imgs[1], strategy=strategy, beam_width=max(args.beam, 1))
    print(" ".join(detokenize_ids(rows[0], vocab)))
    return 0


def cmd_report_plots(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from opcap.metrics.evaluate import read_report

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    made = []
    if args.train_log:
        rows = [line.split("\t") for line in Path(args.train_log).read_text().splitlines()]
        header, data = rows[0], rows[1:]

        def col(name):
            i = header.index(name)
            return [float(r[i]) if r[i] else float("nan") for r in data]

        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot(col("epoch"), col("l_cap"), label="caption loss")
        if any(v > 0 for v in col("l_sgr")):
            ax.plot(col("epoch"), col("l_sgr"), label="scene-graph loss")
        ax2 = ax.twinx()
        ax2.plot(col("epoch"), col("dev_bleu4"), color="tab:green", ls="--", label="dev BLEU-4")
        ax2.set_ylabel("dev BLEU-4")
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss")
        ax.legend(loc="upper right")
        fig.tight_layout()
        path = out / "training_curves.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        made.append(path)
    if args.report:
        systems: dict[str, dict[str, float]] = {}
        for rp in args.report:
            systems.update(read_report(rp))
        metrics = ["bleu1", "bleu2", "bleu3", "bleu4", "rouge_l", "noun_f", "verb_f", "verb_independent_f"]
        fig, ax = plt.subplots(figsize=(9, 4))
        width = 0.8 / max(len(systems), 1)
        for i, (name, row) in enumerate(systems.items()):
            xs = [j + i * width for j in range(len(metrics))]
            ax.bar(xs, [row[m] for m in metrics], width=width, label=name)
        ax.set_xticks([j + 0.4 - width / 2 for j in range(len(metrics))])
        ax.set_xticklabels(metrics, rotation=30)
        ax.legend()
        fig.tight_layout()
        path = out / "metric_bars.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        made.append(path)
    if not made:
        raise UsageError("nothing to plot: pass --train-log and/or --report")
    print("wrote " + ", ".join(str(p) for p in made))
    return 0


_COMMANDS = {
    "gen-data": cmd_gen_data,
    "extract-pairs": cmd_extract_pairs,
    "train": cmd_train,
    "eval": cmd_eval,
    "caption": cmd_caption,
    "report-plots": cmd_report_plots,
}


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
