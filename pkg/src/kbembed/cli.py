"""Command-line pipelines: ingest, subset, embed, evaluate, export.

Every invocation that writes files also writes a machine-readable run
manifest (parameters, seed, input and output digests) next to its first
output, so runs can be compared byte-for-byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from kbembed import brain, embeddings, graph, sgns, simeval, sme, spectral, walk

WORKERS_ENV = "KBEMBED_WORKERS"


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    command: str,
    params: dict,
    seed: int | None,
    inputs: list[Path],
    outputs: list[Path],
) -> None:
    manifest = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "inputs": [
            {"path": str(p), "sha256": _sha256(p), "bytes": p.stat().st_size}
            for p in inputs
        ],
        "outputs": [
            {"path": str(p), "sha256": _sha256(p), "bytes": p.stat().st_size}
            for p in outputs
            if p.exists()
        ],
    }
    target = outputs[0].with_name(outputs[0].name + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")


def _require_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        if args.strict:
            raise SystemExit("--strict requires an explicit --seed for randomized pipelines")
        return 0
    return args.seed


def _load_graph_arg(args: argparse.Namespace) -> tuple[graph.LexicalGraph, Path]:
    if getattr(args, "swow", None):
        path = Path(args.swow)
        g = graph.ingest_swow(
            graph.load_swow_tsv(path),
            mode=getattr(args, "mode", "combined"),
            drop_response_only=getattr(args, "drop_response_only", False),
        )
    elif getattr(args, "edgelist", None):
        path = Path(args.edgelist)
        g = graph.ingest_edge_list(graph.load_edge_list_tsv(path))
    else:
        path = Path(args.graph)
        g = graph.load_graph_tsv(path)
    return g, path


def _add_graph_source(parser: argparse.ArgumentParser) -> None:
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="exported graph TSV (lhs, rel, rhs, weight)")
    src.add_argument("--swow", help="SWOW strength TSV (cue, response, slot, count)")
    src.add_argument("--edgelist", help="edge-list TSV (lhs, rel, rhs)")


def _emb_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", required=True, help="embedding file to write")
    parser.add_argument("--format", choices=("text", "binary"), default="text")
    parser.add_argument("--dim", type=int, default=300)
    parser.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbembed",
        description="Build and evaluate word embeddings from lexical knowledge bases.",
    )
    parser.add_argument(
        "--strict", action="store_true", help="require explicit seeds for randomized pipelines"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-swow", help="strength TSV -> graph TSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=("combined", "per-slot"), default="combined")
    p.add_argument("--drop-response-only", action="store_true")

    p = sub.add_parser("ingest-edgelist", help="edge-list TSV -> graph TSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("subgraph", help="keep the k words with most outgoing edges")
    p.add_argument("--graph", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--output", required=True)

    embed = sub.add_parser("embed", help="train embeddings from a graph")
    embed_sub = embed.add_subparsers(dest="method", required=True)

    p = embed_sub.add_parser("pmi", help="PPMI + L2 + PCA")
    _add_graph_source(p)
    _emb_output_args(p)
    p.add_argument("--no-center", dest="center", action="store_false")

    p = embed_sub.add_parser("katz", help="Katz + PPMI + L2 + PCA")
    _add_graph_source(p)
    _emb_output_args(p)
    p.add_argument("--no-center", dest="center", action="store_false")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--katz-mode", choices=("exact", "truncated"), default="exact")
    p.add_argument("--truncation-order", type=int, default=50)

    p = embed_sub.add_parser("walk", help="random walks + skip-gram")
    _add_graph_source(p)
    _emb_output_args(p)
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--token-budget", type=int, default=20_000_000)
    p.add_argument("--max-walk-len", type=int, default=100)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--min-count", type=int, default=5)
    p.add_argument("--subsample-t", type=float, default=1e-3)
    p.add_argument("--corpus-out", help="also write the walk corpus as text")

    p = embed_sub.add_parser("sme", help="margin-ranking edge reconstruction")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="per-slot SWOW graph TSV")
    src.add_argument("--synset-edges", help="synset relation TSV (needs --synset-members, --vocab)")
    p.add_argument("--synset-members", help="synset membership TSV")
    p.add_argument("--vocab", help="one word per line; entity vocabulary for synset input")
    _emb_output_args(p)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--eval-every", type=int, default=None,
                   help="default 5 for association graphs, 10 for synset input")
    p.add_argument("--lr", type=float, default=None,
                   help="default 0.001 for association graphs, 0.01 for synset input")
    p.add_argument("--batches", type=int, default=200)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--valid-frac", type=float, default=0.05)
    p.add_argument("--test-frac", type=float, default=0.05)

    ev = sub.add_parser("eval", help="evaluate an embedding file")
    eval_sub = ev.add_subparsers(dest="task", required=True)

    p = eval_sub.add_parser("sim", help="similarity/relatedness benchmarks")
    p.add_argument("--emb", required=True)
    p.add_argument("--pairs", required=True, help="benchmark TSV path(s), comma-separated")
    p.add_argument("--output", help="write the TSV report here instead of stdout")

    p = eval_sub.add_parser("brain", help="fMRI activation prediction")
    p.add_argument("--emb", required=True)
    p.add_argument("--fmri", required=True, help="fMRI file path(s), comma-separated")
    p.add_argument("--metric", choices=("2v2", "mse"), default="2v2")
    p.add_argument("--folds", type=int, default=None, help="2v2 fold subsample size")
    p.add_argument("--kfold", type=int, default=5, help="fold count for --metric mse")
    p.add_argument("--epochs", type=int, default=1000)
    p.add_argument("--batch-size", type=int, default=29)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--huber-delta", type=float, default=1.0)
    p.add_argument("--l2-weight", type=float, default=1e-4)
    p.add_argument("--stable-voxels", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", help="write the TSV report here instead of stdout")

    p = sub.add_parser("export", help="convert an embedding file between formats")
    p.add_argument("--emb", required=True)
    p.add_argument("--format", choices=("text", "binary"), required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("info", help="summarize a graph, embedding, or fMRI file")
    what = p.add_mutually_exclusive_group(required=True)
    what.add_argument("--graph")
    what.add_argument("--emb")
    what.add_argument("--fmri")

    return parser


def _cmd_ingest_swow(args) -> int:
    g = graph.ingest_swow(
        graph.load_swow_tsv(args.input),
        mode=args.mode,
        drop_response_only=args.drop_response_only,
    )
    out = Path(args.output)
    graph.save_graph_tsv(g, out)
    _write_manifest(
        "ingest-swow",
        {"mode": args.mode, "drop_response_only": args.drop_response_only},
        None,
        [Path(args.input)],
        [out],
    )
    return 0


def _cmd_ingest_edgelist(args) -> int:
    g = graph.ingest_edge_list(graph.load_edge_list_tsv(args.input))
    out = Path(args.output)
    graph.save_graph_tsv(g, out)
    _write_manifest("ingest-edgelist", {}, None, [Path(args.input)], [out])
    return 0


def _cmd_subgraph(args) -> int:
    g = graph.select_subgraph(graph.load_graph_tsv(args.graph), args.k)
    out = Path(args.output)
    graph.save_graph_tsv(g, out)
    _write_manifest("subgraph", {"k": args.k}, None, [Path(args.graph)], [out])
    return 0


def _emb_outputs(out: Path) -> list[Path]:
    sidecar = out.with_name(out.name + ".words.tsv")
    return [out] + ([sidecar] if sidecar.exists() else [])


def _cmd_embed(args) -> int:
    if args.method == "sme" and not args.graph:
        g, src = None, None
    else:
        g, src = _load_graph_arg(args)
    out = Path(args.output)
    extra_inputs: list[Path] = []
    seed = None

    if args.method in ("pmi", "katz"):
        params = spectral.SpectralParams(
            beta=getattr(args, "beta", 0.5),
            katz_mode=getattr(args, "katz_mode", "exact"),
            truncation_order=getattr(args, "truncation_order", 50),
            dim=args.dim,
            center=args.center,
        )
        if args.method == "pmi":
            emb = spectral.pipeline_pmi(g, params)
            shown = {"dim": args.dim, "center": args.center}
        else:
            emb = spectral.pipeline_katz(g, params)
            shown = {
                "dim": args.dim,
                "center": args.center,
                "beta": params.beta,
                "katz_mode": params.katz_mode,
                "truncation_order": params.truncation_order,
            }
    elif args.method == "walk":
        seed = _require_seed(args)
        wp = walk.WalkParams(
            alpha=args.alpha,
            token_budget=args.token_budget,
            max_walk_len=args.max_walk_len,
            seed=seed,
        )
        sp = sgns.SgnsParams(
            dim=args.dim,
            window=args.window,
            negatives=args.negatives,
            epochs=args.epochs,
            min_count=args.min_count,
            subsample_t=args.subsample_t,
            seed=seed,
        )
        corpus = walk.generate_walk_corpus(g, wp)
        if args.corpus_out:
            walk.save_corpus(corpus, args.corpus_out)
        emb = sgns.train_skipgram(corpus, sp)
        shown = {
            "alpha": args.alpha,
            "token_budget": args.token_budget,
            "max_walk_len": args.max_walk_len,
            "dim": args.dim,
            "window": args.window,
            "negatives": args.negatives,
            "epochs": args.epochs,
            "min_count": args.min_count,
            "subsample_t": args.subsample_t,
        }
    elif args.method == "sme":
        seed = _require_seed(args)
        if args.graph:
            triples = sme.swow_triples(g)
        else:
            if not (args.synset_members and args.vocab):
                raise SystemExit("--synset-edges needs --synset-members and --vocab")
            members: dict[str, list[str]] = {}
            members_path = Path(args.synset_members)
            extra_inputs.append(members_path)
            with members_path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.rstrip("\n")
                    if not line or line.startswith("#"):
                        continue
                    synset, _, word = line.partition("\t")
                    members.setdefault(synset, []).append(word)
            vocab_path = Path(args.vocab)
            extra_inputs.append(vocab_path)
            from kbembed.vocab import Vocabulary, normalize_word

            vocab = Vocabulary(
                normalize_word(w)
                for w in vocab_path.read_text("utf-8").splitlines()
                if w.strip()
            )
            edges = list(graph.load_edge_list_tsv(args.synset_edges))
            triples = sme.wordnet_triples(edges, members, vocab)
        feature_based = bool(args.graph)
        eval_every = args.eval_every if args.eval_every is not None else (5 if feature_based else 10)
        lr = args.lr if args.lr is not None else (0.001 if feature_based else 0.01)
        params = sme.SmeTrainParams(
            dim=args.dim,
            epochs=args.epochs,
            eval_every=eval_every,
            lr=lr,
            n_batches=args.batches,
            margin=args.margin,
            valid_frac=args.valid_frac,
            test_frac=args.test_frac,
            seed=seed,
        )
        train, valid, _test = sme.split_triples(
            triples, params.valid_frac, params.test_frac, seed
        )
        _model, emb = sme.train_sme(train, valid, params)
        shown = {
            "dim": args.dim,
            "epochs": args.epochs,
            "eval_every": eval_every,
            "lr": lr,
            "n_batches": args.batches,
            "margin": args.margin,
            "valid_frac": args.valid_frac,
            "test_frac": args.test_frac,
        }
    else:  # pragma: no cover
        raise SystemExit(f"unknown embed method {args.method!r}")

    embeddings.write_embeddings(emb, out, format=args.format)
    outputs = _emb_outputs(out)
    if getattr(args, "corpus_out", None):
        outputs.append(Path(args.corpus_out))
    if args.method == "sme" and not args.graph:
        inputs = [Path(args.synset_edges)] + extra_inputs
    else:
        inputs = [src]
    _write_manifest(f"embed-{args.method}", shown, seed, inputs, outputs)
    return 0


def _cmd_eval_sim(args) -> int:
    emb = embeddings.read_embeddings(args.emb)
    lines = ["dataset\trho\tn_scored\tcoverage"]
    for path in args.pairs.split(","):
        dataset = simeval.load_pairs(path.strip())
        result = simeval.evaluate_similarity(emb, dataset)
        lines.append(
            f"{dataset.name}\t{result.rho:.4f}\t{result.n_scored}\t{result.coverage:.4f}"
        )
    report = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(report, "utf-8")
        _write_manifest(
            "eval-sim",
            {"pairs": args.pairs},
            None,
            [Path(args.emb)] + [Path(p.strip()) for p in args.pairs.split(",")],
            [Path(args.output)],
        )
    else:
        sys.stdout.write(report)
    return 0


def _cmd_eval_brain(args) -> int:
    emb = embeddings.read_embeddings(args.emb)
    seed = _require_seed(args)
    params = brain.DecoderParams(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        huber_delta=args.huber_delta,
        l2_weight=args.l2_weight,
        n_stable_voxels=args.stable_voxels,
        seed=seed,
    )
    lines = ["participant\tmetric\tvalue\tfolds"]
    for path in args.fmri.split(","):
        dataset = brain.load_fmri(path.strip())
        if args.metric == "2v2":
            n_pairs = dataset.n_words * (dataset.n_words - 1) // 2
            folds = min(args.folds, n_pairs) if args.folds else n_pairs
            value = brain.two_vs_two(
                emb, dataset, params, fold_limit=args.folds, workers=worker_count()
            )
        else:
            folds = args.kfold
            value = brain.mse_eval(emb, dataset, params, n_folds=args.kfold)
        lines.append(f"{dataset.participant_id}\t{args.metric}\t{value:.6f}\t{folds}")
    report = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(report, "utf-8")
        _write_manifest(
            "eval-brain",
            {"metric": args.metric, "folds": args.folds, "kfold": args.kfold},
            seed,
            [Path(args.emb)] + [Path(p.strip()) for p in args.fmri.split(",")],
            [Path(args.output)],
        )
    else:
        sys.stdout.write(report)
    return 0


def _cmd_export(args) -> int:
    emb = embeddings.read_embeddings(args.emb)
    out = Path(args.output)
    embeddings.write_embeddings(emb, out, format=args.format)
    _write_manifest(
        "export", {"format": args.format}, None, [Path(args.emb)], _emb_outputs(out)
    )
    return 0


def _cmd_info(args) -> int:
    if args.graph:
        g = graph.load_graph_tsv(args.graph)
        print(f"graph: {g.n_words} words, {g.n_edges} edges")
        print(f"relations: {', '.join(sorted(g.relation_labels))}")
        print(f"total weight: {g.total_weight():g}")
    elif args.emb:
        emb = embeddings.read_embeddings(args.emb)
        print(f"embeddings: {len(emb.vocab)} words, dim {emb.dim}")
    else:
        dataset = brain.load_fmri(args.fmri)
        reps = sorted({p.shape[0] for p in dataset.presentations})
        print(
            f"fmri: participant {dataset.participant_id}, {dataset.n_words} words, "
            f"{dataset.voxel_count} voxels, presentations {reps}, grid {dataset.grid_size}"
        )
    return 0


_HANDLERS = {
    "ingest-swow": _cmd_ingest_swow,
    "ingest-edgelist": _cmd_ingest_edgelist,
    "subgraph": _cmd_subgraph,
    "embed": _cmd_embed,
    "export": _cmd_export,
    "info": _cmd_info,
}


def run(args: argparse.Namespace) -> int:
    if args.command == "eval":
        handler = _cmd_eval_sim if args.task == "sim" else _cmd_eval_brain
    else:
        handler = _HANDLERS[args.command]
    return handler(args)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"kbembed: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
