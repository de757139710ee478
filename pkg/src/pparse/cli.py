"""Command-line interface exposing the full experimental protocol.

Subcommands: train, parse, eval, compile-constraints, simulate-degrade,
cost-curve, agreement, learning-curve, experiment.  Every command accepts
--seed and --config (a key=value file); explicit flags override the config
file, which overrides built-in defaults, and the resolved configuration is
echoed to stderr.  Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import sys

import numpy as np

from .constraints import (
    ArcIndex,
    build_gfl_vector,
    compile_gfl_constraints,
    compile_ug_vector,
    constraint_rows,
    default_rules,
)
from .evaluate import (
    agreement_matrix,
    agreement_tsv,
    learning_curve,
    learning_curve_tsv,
    uas,
)
from .features import build_design_matrix
from .gfl import EMPTY_GRAPH, FragmentGraph, merge_graphs, read_gfl_file, serialize_gfl
from .optimizer import (
    TrainConfig,
    frank_wolfe_train,
    load_model,
    parse_corpus,
    save_model,
    training_log_tsv,
)
from .simulate import CostModel, DegradationConfig, cost_curve, cost_curve_tsv, degrade_corpus
from .treebank import filter_by_length, read_conll, write_conll
from .decoder import right_branching


class UsageError(Exception):
    """Bad flags or inconsistent configuration (exit code 2)."""


def _parse_bool(text):
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# keys accepted in --config files, with their converters
CONFIG_KEYS = {
    "lam": float,
    "mu": float,
    "xi": float,
    "max_iters": int,
    "gap_tol": float,
    "step_rule": str,
    "seed": int,
    "single_root": _parse_bool,
    "max_len": int,
    "count_punct": _parse_bool,
    "depth_bias": float,
    "fraction": float,
    "beta": float,
    "cost_model": str,
}

DEFAULTS = {
    "lam": 1.0,
    "mu": 0.1,
    "xi": 0.2,
    "max_iters": 200,
    "gap_tol": 1e-4,
    "step_rule": "harmonic",
    "seed": 0,
    "single_root": True,
    "max_len": None,
    "count_punct": False,
    "depth_bias": 1.0,
    "fraction": 0.0,
    "beta": 0.0,
    "cost_model": "equal",
}


def _read_config_file(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def _resolve(args, keys):
    """Merge defaults, config file and explicit flags for the given keys."""
    resolved = {key: DEFAULTS[key] for key in keys}
    if getattr(args, "config", None):
        from_file = _read_config_file(args.config)
        unknown = set(from_file) - set(keys)
        if unknown:
            raise UsageError(f"config keys not used by this command: {', '.join(sorted(unknown))}")
        resolved.update(from_file)
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _echo(command, resolved):
    parts = " ".join(f"{key}={resolved[key]}" for key in sorted(resolved))
    print(f"pparse {command}: {parts}", file=sys.stderr)


def _train_config(resolved):
    return TrainConfig(
        lam=resolved["lam"],
        mu=resolved["mu"],
        xi=resolved["xi"],
        max_iters=resolved["max_iters"],
        gap_tol=resolved["gap_tol"],
        step_rule=resolved["step_rule"],
        seed=resolved["seed"],
        single_root=resolved["single_root"],
    )


def _load_corpus(path, resolved=None):
    with open(path, "r", encoding="utf-8") as fh:
        corpus = read_conll(fh)
    if resolved and resolved.get("max_len") is not None:
        corpus = filter_by_length(corpus, resolved["max_len"], resolved["count_punct"])
    return corpus


def _read_records(gfl_path, path, corpus):
    """Sidecar records, resolved against the corpus as read from disk.

    Sidecar ids address the unfiltered treebank, so records are parsed
    against it and records for length-filtered sentences are dropped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        full_corpus = read_conll(fh)
    with open(gfl_path, "r", encoding="utf-8") as fh:
        records = read_gfl_file(fh, full_corpus)
    kept = {s.id for s in corpus.sentences}
    return [rec for rec in records if rec.sentence_id in kept]


def _write_output(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _sidecar_sets(gfl_path, input_path, corpus, idx):
    """Per-sentence merged constraint sets from a GFL sidecar (None = no annotation)."""
    records = _read_records(gfl_path, input_path, corpus)
    by_id = {}
    for rec in records:
        by_id.setdefault(rec.sentence_id, []).append(rec.graph)
    sets = []
    for sentence in corpus.sentences:
        graphs = by_id.get(sentence.id)
        if not graphs:
            sets.append(None)
            continue
        merged = graphs[0] if len(graphs) == 1 else merge_graphs(graphs, sentence)
        sets.append(compile_gfl_constraints(merged, sentence, idx))
    return sets


def _training_sets(args, resolved, input_path, corpus, idx):
    """Constraint sets from a GFL sidecar or by degrading gold trees."""
    if getattr(args, "gfl", None) and getattr(args, "degrade", None) is not None:
        raise UsageError("--gfl and --degrade are mutually exclusive")
    if getattr(args, "gfl", None):
        return _sidecar_sets(args.gfl, input_path, corpus, idx)
    if getattr(args, "degrade", None) is not None:
        cfg = DegradationConfig(
            removal_fraction=args.degrade,
            depth_bias=resolved["depth_bias"],
            seed=resolved["seed"],
        )
        return degrade_corpus(corpus, idx, cfg)
    return None


TRAIN_KEYS = (
    "lam",
    "mu",
    "xi",
    "max_iters",
    "gap_tol",
    "step_rule",
    "seed",
    "single_root",
    "max_len",
    "count_punct",
    "depth_bias",
)


def cmd_train(args):
    resolved = _resolve(args, TRAIN_KEYS)
    _echo("train", resolved)
    corpus = _load_corpus(args.train, resolved)
    idx = ArcIndex(corpus)
    X, vocab = build_design_matrix(corpus, idx)
    u = compile_ug_vector(corpus, idx)
    sets = _training_sets(args, resolved, args.train, corpus, idx)
    v = build_gfl_vector(sets, idx.n_arcs) if sets is not None else np.zeros(idx.n_arcs)
    model = frank_wolfe_train(corpus, X, idx, u, v, _train_config(resolved), vocab=vocab)
    save_model(model, args.out)
    if args.log:
        _write_output(training_log_tsv(model), args.log)
    print(f"trained on {len(corpus)} sentences, {idx.n_arcs} arcs -> {args.out}", file=sys.stderr)
    return 0


def cmd_parse(args):
    resolved = _resolve(args, ("seed", "max_len", "count_punct"))
    _echo("parse", resolved)
    model = load_model(args.model)
    corpus = _load_corpus(args.input, resolved)
    idx = ArcIndex(corpus)
    sets = _sidecar_sets(args.gfl, args.input, corpus, idx) if args.gfl else None
    preds = parse_corpus(model, corpus, constraint_sets=sets, idx=idx, hard=args.hard)
    _write_output(write_conll(corpus, [list(map(int, p)) for p in preds]), args.out)
    return 0


def cmd_eval(args):
    resolved = _resolve(args, ("seed", "max_len", "count_punct"))
    _echo("eval", resolved)
    pred = _load_corpus(args.pred, resolved)
    gold = _load_corpus(args.gold, resolved)
    heads = []
    for sentence in pred.sentences:
        sent_heads = sentence.gold_heads()
        if sent_heads is None:
            raise ValueError(f"prediction file leaves sentence {sentence.id} unattached")
        heads.append(sent_heads)
    score = uas(heads, gold, exclude_punct=not args.include_punct)
    _write_output(f"uas\t{score:.6f}\n", args.out)
    return 0


def cmd_compile_constraints(args):
    resolved = _resolve(args, ("seed",))
    _echo("compile-constraints", resolved)
    corpus = _load_corpus(args.input)
    idx = ArcIndex(corpus)
    sets = _sidecar_sets(args.gfl, args.input, corpus, idx)
    lines = ["sentence\tdep\thead\tmark"]
    for sid, dep, head, mark in constraint_rows(corpus, idx, sets):
        lines.append(f"{sid}\t{dep}\t{head}\t{mark}")
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate_degrade(args):
    resolved = _resolve(args, ("seed", "fraction", "depth_bias"))
    _echo("simulate-degrade", resolved)
    corpus = _load_corpus(args.input)
    idx = ArcIndex(corpus)
    cfg = DegradationConfig(
        removal_fraction=resolved["fraction"],
        depth_bias=resolved["depth_bias"],
        seed=resolved["seed"],
    )
    sets = degrade_corpus(corpus, idx, cfg)
    if args.format == "tsv":
        lines = ["sentence\tdep\thead\tmark"]
        for sid, dep, head, mark in constraint_rows(corpus, idx, sets):
            lines.append(f"{sid}\t{dep}\t{head}\t{mark}")
        _write_output("\n".join(lines) + "\n", args.out)
        return 0
    # GFL sidecar with the surviving arcs as direct dependencies
    blocks = []
    for sentence, cs in zip(corpus.sentences, sets):
        local = {}
        for coord in cs.whitelist:
            _, dep, head = idx.decode(coord)
            if head != 0:
                local[dep] = head
        graph = FragmentGraph(
            dep_edges=frozenset((h, d) for d, h in local.items()),
            brackets=(),
            root_marks=frozenset(
                d for coord in cs.whitelist for _, d, h in [idx.decode(coord)] if h == 0
            ),
        )
        if graph == EMPTY_GRAPH:
            continue
        body = serialize_gfl(graph, sentence)
        blocks.append(f"# id: {sentence.id}\n# text: {' '.join(sentence.forms)}\n{body}")
    _write_output("\n".join(blocks), args.out)
    return 0


def cmd_cost_curve(args):
    keys = TRAIN_KEYS + ("beta", "cost_model")
    resolved = _resolve(args, keys)
    _echo("cost-curve", resolved)
    train_corpus = _load_corpus(args.input, resolved)
    eval_corpus = _load_corpus(args.eval, resolved)
    levels = [float(x) for x in args.levels.split(",")]
    budgets = [float(x) for x in args.budgets.split(",")]
    rows = cost_curve(
        train_corpus,
        eval_corpus,
        levels,
        budgets,
        DegradationConfig(removal_fraction=0.0, depth_bias=resolved["depth_bias"], seed=resolved["seed"]),
        _train_config(resolved),
        CostModel(kind=resolved["cost_model"], beta=resolved["beta"]),
    )
    _write_output(cost_curve_tsv(rows), args.out)
    return 0


def cmd_agreement(args):
    resolved = _resolve(args, ("seed",))
    _echo("agreement", resolved)
    corpus = _load_corpus(args.input)
    idx = ArcIndex(corpus)
    records = _read_records(args.gfl, args.input, corpus)
    by_annotator = {}
    for rec in records:
        by_annotator.setdefault(rec.annotator or "anon", []).append(rec)
    if len(by_annotator) < 2:
        raise UsageError("agreement needs a sidecar with at least two distinct '# annotator:' values")
    names = sorted(by_annotator)
    per_annotator = []
    for name in names:
        sets = [None] * len(corpus.sentences)
        for rec in by_annotator[name]:
            ordinal = idx.ordinal_of(rec.sentence_id)
            sentence = corpus.sentences[ordinal]
            cs = compile_gfl_constraints(rec.graph, sentence, idx)
            sets[ordinal] = cs
        per_annotator.append(sets)
    report = agreement_matrix(per_annotator, idx, annotators=names)
    _write_output(agreement_tsv(report), args.out)
    return 0


def cmd_learning_curve(args):
    resolved = _resolve(args, TRAIN_KEYS)
    _echo("learning-curve", resolved)
    corpus = _load_corpus(args.input, resolved)
    eval_corpus = _load_corpus(args.eval, resolved)
    records = _read_records(args.gfl, args.input, corpus)
    rows = learning_curve(corpus, records, _train_config(resolved), eval_corpus)
    _write_output(learning_curve_tsv(rows), args.out)
    return 0


FEATURE_CONDITIONS = ("ug", "gfl", "ug+gfl", "rb")


def cmd_experiment(args):
    resolved = _resolve(args, TRAIN_KEYS)
    _echo("experiment", resolved)
    features = [f.strip() for f in args.features.split(",") if f.strip()]
    unknown = [f for f in features if f not in FEATURE_CONDITIONS]
    if unknown:
        raise UsageError(f"unknown feature conditions: {', '.join(unknown)}")
    needs_gfl = any(f in ("gfl", "ug+gfl") for f in features)
    if needs_gfl and not args.gfl and args.degrade is None:
        raise UsageError("gfl conditions need --gfl or --degrade")

    train_corpus = _load_corpus(args.train, resolved)
    test_corpus = _load_corpus(args.test, resolved)
    idx = ArcIndex(train_corpus)
    X, vocab = build_design_matrix(train_corpus, idx)
    u = compile_ug_vector(train_corpus, idx)
    sets = _training_sets(args, resolved, args.train, train_corpus, idx)
    v = build_gfl_vector(sets, idx.n_arcs) if sets is not None else np.zeros(idx.n_arcs)
    base = _train_config(resolved)
    rules = default_rules()

    lines = ["features\tmu\txi\tn_train\tn_test\tuas"]
    for condition in features:
        if condition == "rb":
            preds = [right_branching(s) for s in test_corpus.sentences]
            mu = xi = 0.0
        else:
            mu = base.mu if condition in ("ug", "ug+gfl") else 0.0
            xi = base.xi if condition in ("gfl", "ug+gfl") else 0.0
            cfg = base.with_overrides(mu=mu, xi=xi)
            model = frank_wolfe_train(train_corpus, X, idx, u, v, cfg, vocab=vocab)
            preds = parse_corpus(model, test_corpus, rules=rules)
        score = uas(preds, test_corpus, exclude_punct=not args.include_punct)
        lines.append(
            f"{condition}\t{mu!r}\t{xi!r}\t{len(train_corpus)}\t{len(test_corpus)}\t{score:.6f}"
        )
    _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--config", default=None, help="key=value file; flags override it")


def _add_hyper(sub):
    sub.add_argument("--lam", type=float, default=None)
    sub.add_argument("--mu", type=float, default=None)
    sub.add_argument("--xi", type=float, default=None)
    sub.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    sub.add_argument("--gap-tol", dest="gap_tol", type=float, default=None)
    sub.add_argument("--step-rule", dest="step_rule", choices=("harmonic", "line_search"), default=None)
    sub.add_argument("--multi-root", dest="single_root", action="store_const", const=False, default=None)
    sub.add_argument("--max-len", dest="max_len", type=int, default=None)
    sub.add_argument("--count-punct", dest="count_punct", action="store_const", const=True, default=None)
    sub.add_argument("--depth-bias", dest="depth_bias", type=float, default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="pparse", description=__doc__.splitlines()[0])
    sp = ap.add_subparsers(dest="command", required=True)

    s = sp.add_parser("train", help="train a model from a treebank plus optional partial annotations")
    s.add_argument("--train", required=True)
    s.add_argument("--gfl", default=None)
    s.add_argument("--degrade", type=float, default=None, help="simulate partials: fraction of gold arcs removed")
    s.add_argument("--out", required=True)
    s.add_argument("--log", default=None, help="write the training log TSV here")
    _add_hyper(s)
    _add_common(s)
    s.set_defaults(func=cmd_train)

    s = sp.add_parser("parse", help="parse a treebank with a trained model")
    s.add_argument("--model", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--gfl", default=None, help="sidecar constraints applied at decode time")
    s.add_argument("--hard", action="store_true", help="enforce constraints instead of soft rewards")
    s.add_argument("--out", default="-")
    s.add_argument("--max-len", dest="max_len", type=int, default=None)
    s.add_argument("--count-punct", dest="count_punct", action="store_const", const=True, default=None)
    _add_common(s)
    s.set_defaults(func=cmd_parse)

    s = sp.add_parser("eval", help="score predictions against gold heads")
    s.add_argument("--pred", required=True)
    s.add_argument("--gold", required=True)
    s.add_argument("--include-punct", action="store_true")
    s.add_argument("--max-len", dest="max_len", type=int, default=None, help="filter both files before scoring")
    s.add_argument("--count-punct", dest="count_punct", action="store_const", const=True, default=None)
    s.add_argument("--out", default="-")
    _add_common(s)
    s.set_defaults(func=cmd_eval)

    s = sp.add_parser("compile-constraints", help="audit TSV of whitelist/blacklist arcs")
    s.add_argument("--input", required=True)
    s.add_argument("--gfl", required=True)
    s.add_argument("--out", default="-")
    _add_common(s)
    s.set_defaults(func=cmd_compile_constraints)

    s = sp.add_parser("simulate-degrade", help="derive partial annotations from gold trees")
    s.add_argument("--input", required=True)
    s.add_argument("--fraction", type=float, default=None)
    s.add_argument("--depth-bias", dest="depth_bias", type=float, default=None)
    s.add_argument("--format", choices=("tsv", "gfl"), default="tsv")
    s.add_argument("--out", default="-")
    _add_common(s)
    s.set_defaults(func=cmd_simulate_degrade)

    s = sp.add_parser("cost-curve", help="UAS versus annotation budget under a cost model")
    s.add_argument("--input", required=True)
    s.add_argument("--eval", required=True)
    s.add_argument("--levels", default="0.3,0.5,1.0", help="completion levels, comma separated")
    s.add_argument("--budgets", required=True, help="budget grid, comma separated")
    s.add_argument("--cost-model", dest="cost_model", choices=("equal", "variable"), default=None)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--out", default="-")
    _add_hyper(s)
    _add_common(s)
    s.set_defaults(func=cmd_cost_curve)

    s = sp.add_parser("agreement", help="pairwise and total annotator agreement")
    s.add_argument("--input", required=True)
    s.add_argument("--gfl", required=True)
    s.add_argument("--out", default="-")
    _add_common(s)
    s.set_defaults(func=cmd_agreement)

    s = sp.add_parser("learning-curve", help="UAS over annotation hours per annotator and pooled")
    s.add_argument("--input", required=True)
    s.add_argument("--gfl", required=True)
    s.add_argument("--eval", required=True)
    s.add_argument("--out", default="-")
    _add_hyper(s)
    _add_common(s)
    s.set_defaults(func=cmd_learning_curve)

    s = sp.add_parser("experiment", help="run the feature-condition grid and emit a results TSV")
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--gfl", default=None)
    s.add_argument("--degrade", type=float, default=None)
    s.add_argument("--features", default="ug,gfl,ug+gfl,rb")
    s.add_argument("--include-punct", action="store_true")
    s.add_argument("--out", default="-")
    _add_hyper(s)
    _add_common(s)
    s.set_defaults(func=cmd_experiment)

    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pparse: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: missing files, bad data, infeasibility
        print(f"pparse: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
