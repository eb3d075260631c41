"""Command-line front end: lattice building, joint parsing, training, serving.

The two-step batch workflow mirrors the library pipeline: `hebma` turns a
token file into sentence lattices, `joint` disambiguates and parses those
lattices into segments, a path mapping, and a dependency file.  `train`
fits a model on a lattice/treebank pair and `api` serves the same pipeline
over HTTP.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile

from jointparse.conll_io import (
    FileFormatError,
    format_conll,
    format_lattices,
    format_paths,
    format_segments,
    load_model,
    model_to_json,
    read_lattice,
    read_tokens,
    rows_from_parse,
)
from jointparse.core import DEFAULT_TAGSET
from jointparse.decode import beam_decode
from jointparse.features import new_model
from jointparse.lexicon import (
    EMPTY_OOV,
    LexiconFormatError,
    build_lattice,
    default_lexicon_path,
    load_lexicon,
)
from jointparse.toydata import default_model_path
from jointparse.train import load_training_corpus, train
from jointparse.transition import MODE_JOINT


class CliError(Exception):
    """Failure with a message for stderr and exit code 1."""


def _atomic_write(path: str, text: str) -> None:
    # Write whole files via rename so readers never see partial output.
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".jointparse-")
    try:
        os.fchmod(fd, 0o644)
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be zero or more")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jointparse",
        description="Lattice-based morphological disambiguation and "
                    "dependency parsing.  Typical workflow: "
                    "`jointparse hebma -raw in.txt -out in.lattice` then "
                    "`jointparse joint -in in.lattice -os out.segmentation "
                    "-om out.mapping -oc out.conll`.")
    sub = parser.add_subparsers(dest="command", required=True)

    hebma = sub.add_parser(
        "hebma", help="build morphological lattices from a token file",
        description="Read one token per line, with a blank line closing "
                    "each sentence, and write the analysis lattices.")
    hebma.add_argument("-raw", required=True, metavar="FILE",
                       help="input token file (one token per line)")
    hebma.add_argument("-out", required=True, metavar="FILE",
                       help="output lattice file")
    hebma.add_argument("-lexicon", metavar="FILE",
                       help="lexicon file (default: bundled demo lexicon)")
    hebma.set_defaults(func=cmd_hebma)

    joint = sub.add_parser(
        "joint", help="jointly disambiguate and parse lattices",
        description="Read sentence lattices and write the chosen "
                    "segmentation, the path mapping in lattice format, and "
                    "the dependency tree in CoNLL-X format.")
    joint.add_argument("-in", dest="infile", required=True, metavar="FILE",
                       help="input lattice file")
    joint.add_argument("-os", dest="segments_out", required=True,
                       metavar="FILE", help="output segmentation file")
    joint.add_argument("-om", dest="mapping_out", required=True,
                       metavar="FILE", help="output path mapping file")
    joint.add_argument("-oc", dest="conll_out", required=True,
                       metavar="FILE", help="output CoNLL-X file")
    joint.add_argument("-model", metavar="FILE",
                       help="model file (default: bundled toy model)")
    joint.add_argument("-beam", type=_positive, metavar="K",
                       help="beam width (default: the model's setting)")
    joint.set_defaults(func=cmd_joint)

    trainer = sub.add_parser(
        "train", help="train a joint model on a lattice/treebank pair",
        description="Fit an averaged structured perceptron and write the "
                    "model file; per-epoch metrics go to standard output "
                    "as TSV and a learning-curve figure is rendered next "
                    "to the model.")
    trainer.add_argument("-train", nargs=2, required=True,
                         metavar=("LATTICE", "CONLL"),
                         help="training lattice file and gold CoNLL file")
    trainer.add_argument("-dev", nargs=2, metavar=("LATTICE", "CONLL"),
                         help="held-out pair evaluated after each epoch")
    trainer.add_argument("-epochs", type=_nonnegative, default=50,
                         metavar="N", help="training epochs (default 50)")
    trainer.add_argument("-beam", type=_positive, default=8, metavar="K",
                         help="beam width (default 8)")
    trainer.add_argument("-seed", type=int, default=1, metavar="S",
                         help="shuffle seed (default 1)")
    trainer.add_argument("-out", required=True, metavar="FILE",
                         help="output model file")
    trainer.set_defaults(func=cmd_train)

    api = sub.add_parser(
        "api", help="serve the joint parser over HTTP",
        description="Start the REST server exposing /yap/heb/joint, "
                    "/yap/heb/lattice and /healthz.")
    api.add_argument("-port", type=_positive, default=8000, metavar="P",
                     help="listening port (default 8000)")
    api.add_argument("-model", metavar="FILE",
                     help="model file (default: bundled toy model)")
    api.add_argument("-lexicon", metavar="FILE",
                     help="lexicon file (default: bundled demo lexicon)")
    api.add_argument("-admin", action="store_true",
                     help="enable the lexicon hot-swap endpoint")
    api.set_defaults(func=cmd_api)

    return parser


def _load_lexicon(path: str | None):
    chosen = path or default_lexicon_path()
    if not os.path.exists(chosen):
        raise CliError(f"lexicon not found: {chosen}")
    return load_lexicon(chosen, DEFAULT_TAGSET)


def _load_model(path: str | None):
    chosen = path or default_model_path()
    if not os.path.exists(chosen):
        raise CliError(f"model not found: {chosen}")
    return load_model(chosen, DEFAULT_TAGSET)


def cmd_hebma(args: argparse.Namespace) -> int:
    lexicon = _load_lexicon(args.lexicon)
    sentences = read_tokens(args.raw)
    lattices = [build_lattice(lexicon, EMPTY_OOV, tokens)
                for tokens in sentences]
    _atomic_write(args.out, format_lattices(lattices))
    return 0


def cmd_joint(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    lattices = read_lattice(args.infile)
    paths, trees = [], []
    for index, lattice in enumerate(lattices, start=1):
        results = beam_decode(model, lattice, beam_width=args.beam)
        if not results:
            raise CliError(f"sentence {index}: no complete parse")
        path, tree, _ = results[0]
        paths.append(path)
        trees.append(tree)
    rows = [rows_from_parse(p, t) for p, t in zip(paths, trees)]
    _atomic_write(args.segments_out, format_segments(paths))
    _atomic_write(args.mapping_out, format_paths(paths))
    _atomic_write(args.conll_out, format_conll(rows))
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    corpus, infused = load_training_corpus(*args.train)
    if infused:
        print(f"infused gold analyses into {infused} training lattices",
              file=sys.stderr)
    dev = None
    if args.dev:
        dev, _ = load_training_corpus(*args.dev)
    model = new_model(DEFAULT_TAGSET, mode=MODE_JOINT,
                      beam_width=args.beam, seed=args.seed)
    stats = train(model, corpus, epochs=args.epochs, dev=dev)
    _atomic_write(args.out, model_to_json(model))

    print("epoch\tupdates\tdev_las\tdev_seg_f1")
    for stat in stats:
        dev_las = "_" if stat.dev_las is None else f"{stat.dev_las:.4f}"
        dev_f1 = "_" if stat.dev_seg_f1 is None else f"{stat.dev_seg_f1:.4f}"
        print(f"{stat.epoch}\t{stat.updates}\t{dev_las}\t{dev_f1}")
    _render_curve(stats, args.out + ".metrics.png")
    return 0


def _render_curve(stats, figure_path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    figure, axis = plt.subplots(figsize=(6, 4))
    epochs = [s.epoch for s in stats]
    axis.plot(epochs, [s.updates for s in stats], marker="o",
              color="tab:blue", label="updates")
    axis.set_xlabel("epoch")
    axis.set_ylabel("perceptron updates")
    if any(s.dev_las is not None for s in stats):
        twin = axis.twinx()
        twin.plot(epochs, [s.dev_las for s in stats], marker="s",
                  color="tab:orange", label="dev LAS")
        twin.set_ylabel("dev LAS")
        twin.set_ylim(0.0, 1.05)
    axis.set_title("training curve")
    figure.tight_layout()
    figure.savefig(figure_path)
    plt.close(figure)


def cmd_api(args: argparse.Namespace) -> int:
    # Load everything before binding so a bad path never occupies the port.
    model = _load_model(args.model)
    lexicon = _load_lexicon(args.lexicon)
    from jointparse.service import serve
    try:
        serve(model, lexicon, port=args.port, admin_enabled=args.admin)
    except OSError as err:
        raise CliError(f"cannot bind port {args.port}: {err}") from None
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (FileFormatError, LexiconFormatError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
