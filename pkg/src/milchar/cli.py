"""Command-line pipeline: gen -> eval -> dist -> embed, plus oos, diversity and plotdata.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import synth
from .classifiers import catalog, find_classifiers
from .data import DatasetFormatError, load_dataset, meta_vector, normalize_meta, save_dataset
from .distance import (
    d_auc,
    d_meta,
    d_roc,
    diversity_report,
    dumps_square,
    load_distance,
    save_distance,
)
from .embedding import (
    Embedding2D,
    classical_mds,
    load_embedding,
    out_of_sample,
    placement_residual,
    save_embedding,
)
from .evaluation import (
    EvalFormatError,
    EvaluationError,
    evaluate_all,
    load_eval,
    save_eval,
)
from .roc import roc_area_between

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _log(msg):
    print(msg, file=sys.stderr, flush=True)


def _load_datasets(paths):
    out = []
    for p in paths:
        if not Path(p).is_file():
            raise DataError(f"dataset file not found: {p}")
        try:
            out.append(load_dataset(p))
        except DatasetFormatError as exc:
            raise DataError(f"{p}: {exc}") from None
    return out


def _load_eval(path):
    if not Path(path).is_file():
        raise DataError(f"EvalMatrix file not found: {path}")
    try:
        return load_eval(path)
    except EvalFormatError as exc:
        raise DataError(f"{path}: {exc}") from None


def _load_embedding(path):
    if not Path(path).is_file():
        raise DataError(f"embedding file not found: {path}")
    try:
        return load_embedding(path)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def cmd_gen(args):
    if args.all:
        kinds = list(synth.KINDS)
    elif args.kinds:
        kinds = [k.strip().lower() for k in ",".join(args.kinds).split(",") if k.strip()]
    else:
        raise UsageError("choose --all or one or more generator kinds")
    unknown = [k for k in kinds if k not in synth.KINDS]
    if unknown:
        raise UsageError(f"unknown generator kind(s): {', '.join(unknown)} "
                         f"(choose from {', '.join(synth.KINDS)})")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in kinds:
        spec = synth.default_spec(kind, args.seed)
        ds = synth.generate(spec)
        save_dataset(ds, out / f"{ds.name}.csv")
        _write_text(out / f"{ds.name}.spec", spec.to_text())
        _log(f"wrote {out / (ds.name + '.csv')} ({len(ds.bags)} bags, {ds.n_instances} instances)")
    return EXIT_OK


def _resolve_classifiers(text):
    if not text:
        return catalog()
    try:
        return find_classifiers(text.split(","))
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def cmd_eval(args):
    specs = _resolve_classifiers(args.classifiers)
    datasets = _load_datasets(args.datasets)
    folds = args.folds if args.folds is not None else 10

    def progress(dataset, classifier, auc_value, done, total):
        _log(f"[{done}/{total}] {dataset} {classifier} auc={auc_value:.4f}")

    em = evaluate_all(datasets, folds=folds, seed=args.seed, classifiers=specs,
                      jobs=args.jobs, progress=progress)
    save_eval(em, args.out)
    _log(f"wrote {args.out} ({len(em.datasets) * len(em.classifiers)} cells)")
    return EXIT_OK


def _dataset_paths_for(em, data):
    by_name = {Path(p).stem: p for p in data}
    missing = [d for d in em.datasets if d not in by_name]
    if missing:
        raise DataError(f"no dataset file given for: {', '.join(missing)}")
    return [by_name[d] for d in em.datasets]


def cmd_dist(args):
    em = _load_eval(args.eval)
    datasets = _load_datasets(_dataset_paths_for(em, args.datasets))
    metas = normalize_meta([meta_vector(d) for d in datasets])
    dm_meta = d_meta(metas, em.datasets)
    dm_auc = d_auc(em)
    dm_roc = d_roc(em)
    if np.any(dm_auc.values > dm_roc.values + 1e-12):
        raise FloatingPointError("d_auc exceeds d_roc for some pair")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, dm in (("d_meta", dm_meta), ("d_auc", dm_auc), ("d_roc", dm_roc)):
        save_distance(dm, out / f"{name}.csv")
        _log(f"wrote {out / (name + '.csv')}")
    return EXIT_OK


def cmd_embed(args):
    if not Path(args.distance).is_file():
        raise DataError(f"distance file not found: {args.distance}")
    try:
        dm = load_distance(args.distance)
    except ValueError as exc:
        raise DataError(f"{args.distance}: {exc}") from None
    emb = classical_mds(dm, 2)
    save_embedding(emb, args.out)
    _log(f"wrote {args.out} (stress={emb.stress:.6g})")
    return EXIT_OK


def cmd_oos(args):
    em = _load_eval(args.eval)
    base = _load_embedding(args.embedding)
    if args.folds is not None and args.folds != em.folds:
        raise UsageError(f"catalog/protocol mismatch: --folds {args.folds} but the base "
                         f"EvalMatrix used {em.folds}")
    if args.seed is not None and args.seed != em.seed:
        raise UsageError(f"catalog/protocol mismatch: --seed {args.seed} but the base "
                         f"EvalMatrix used {em.seed}")
    try:
        specs = find_classifiers(em.classifiers)
    except KeyError as exc:
        raise UsageError(f"catalog/protocol mismatch: {exc.args[0]}") from None
    unknown = [n for n in base.names if n not in em.datasets]
    if unknown:
        raise DataError(f"embedding datasets missing from the EvalMatrix: {', '.join(unknown)}")
    (new,) = _load_datasets([args.dataset])
    new_em = evaluate_all([new], folds=em.folds, seed=em.seed, classifiers=specs)
    if new_em.classifiers != em.classifiers:
        raise UsageError("catalog/protocol mismatch between base and new evaluation")
    new_row = new_em.row(new.name)
    dists = []
    for name in base.names:
        row = em.row(name)
        if args.distance == "auc":
            diff = [a.auc - b.auc for a, b in zip(new_row, row)]
        else:
            diff = [roc_area_between(a.roc, b.roc) for a, b in zip(new_row, row)]
        dists.append(float(np.linalg.norm(diff)))
    z = out_of_sample(base, dists)
    residual = placement_residual(base.coords, np.array(dists), z)
    merged = Embedding2D(base.names + (new.name,), np.vstack([base.coords, z]), base.stress)
    save_embedding(merged, args.out, marker=[0] * len(base.names) + [1])
    print(f"{new.name}\t{float(z[0])!r}\t{float(z[1])!r}\tresidual={residual!r}")
    return EXIT_OK


def cmd_diversity(args):
    em = _load_eval(args.eval)
    rep = diversity_report(em)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / "correlations.csv",
                dumps_square(em.classifiers, rep.correlations, corner="classifier"))
    lines = ["component,cumulative_fraction"]
    lines += [f"{i + 1},{float(v)!r}" for i, v in enumerate(rep.cumulative_variance)]
    _write_text(out / "cumulative_variance.csv", "\n".join(lines) + "\n")
    _log(f"wrote {out / 'correlations.csv'} and {out / 'cumulative_variance.csv'}")
    return EXIT_OK


def cmd_plotdata(args):
    em = _load_eval(args.eval)
    emb = _load_embedding(args.embedding)
    matches = [c for c in em.classifiers if c.lower() == args.classifier.lower()]
    if not matches:
        raise UsageError(f"classifier {args.classifier!r} not in the EvalMatrix")
    aucs = em.auc_matrix()
    k = em.classifiers.index(matches[0])
    lines = ["name,x,y,mean_auc,selected_auc"]
    for name, (x, y) in zip(emb.names, emb.coords):
        if name not in em.datasets:
            raise DataError(f"dataset {name!r} missing from the EvalMatrix")
        row = aucs[em.datasets.index(name)]
        lines.append(f"{name},{float(x)!r},{float(y)!r},{float(row.mean())!r},{float(row[k])!r}")
    _write_text(args.out, "\n".join(lines) + "\n")
    _log(f"wrote {args.out}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="root random seed")
    common.add_argument("--folds", type=int, default=None, help="cross-validation folds (10)")
    common.add_argument("--jobs", type=int, default=1, help="parallel evaluation workers")
    common.add_argument("--out", required=True, help="output file or directory")

    parser = _Parser(prog="milchar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="write the artificial datasets")
    p.add_argument("kinds", nargs="*", help="generator kinds (comma or space separated)")
    p.add_argument("--all", action="store_true", help="all six artificial datasets")
    p.set_defaults(func=cmd_gen, default_seed=1)

    p = sub.add_parser("eval", parents=[common], help="cross-validate the classifier catalog")
    p.add_argument("datasets", nargs="+", help="dataset CSV files")
    p.add_argument("--classifiers", help="comma-separated display names (default: all 22)")
    p.set_defaults(func=cmd_eval, default_seed=1)

    p = sub.add_parser("dist", parents=[common], help="meta, AUC and ROC distance matrices")
    p.add_argument("eval", help="EvalMatrix file")
    p.add_argument("datasets", nargs="+", help="dataset CSVs, matched to the matrix by file stem")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("embed", parents=[common], help="2-D classical MDS of a distance CSV")
    p.add_argument("distance", help="square distance CSV")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("oos", parents=[common], help="place a new dataset in an embedding")
    p.add_argument("dataset", help="new dataset CSV")
    p.add_argument("--eval", required=True, help="base EvalMatrix file")
    p.add_argument("--embedding", required=True, help="base embedding CSV")
    p.add_argument("--distance", choices=("roc", "auc"), default="roc")
    p.set_defaults(func=cmd_oos)

    p = sub.add_parser("diversity", parents=[common], help="classifier correlation and PCA tables")
    p.add_argument("eval", help="EvalMatrix file")
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("plotdata", parents=[common], help="embedding joined with AUC colorings")
    p.add_argument("eval", help="EvalMatrix file")
    p.add_argument("--embedding", required=True, help="embedding CSV")
    p.add_argument("--classifier", default="EMDD", help="classifier for selected_auc")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None and hasattr(args, "default_seed"):
        args.seed = args.default_seed
    if args.folds is not None and args.folds < 2:
        parser.error("--folds must be at least 2")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        _log(f"milchar: error: {exc}")
        return EXIT_USAGE
    except (DataError, synth.GenSpecError, OSError) as exc:
        _log(f"milchar: error: {exc}")
        return EXIT_DATA
    except EvaluationError as exc:
        _log(f"milchar: error: {exc}")
        if isinstance(exc.cause, (FloatingPointError, np.linalg.LinAlgError)):
            return EXIT_NUMERIC
        return EXIT_DATA
    except ValueError as exc:
        _log(f"milchar: error: {exc}")
        return EXIT_DATA
    except (FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        _log(f"milchar: numerical failure: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
