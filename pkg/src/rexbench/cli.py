"""Command-line entry points: corpus preparation, rule evaluation, export,
bootstrap iterations, benchmarking and the HTTP server."""

from __future__ import annotations

import pickle
import random
import statistics
import sys
import time
from pathlib import Path

import click

from . import bootstrap as bootstrap_mod
from . import synth, wordsim
from .corpus import build_indices, load_corpus
from .executor import (evaluate_rule, extractions, materialize_ruleset,
                       export_tsv)
from .rules import Registry, Ruleset, infer_types, parse_rule


@click.group()
def main():
    """Relation-extraction workbench."""


def _save_corpus(corpus, path):
    with open(path, "wb") as fh:
        pickle.dump(corpus, fh, protocol=pickle.HIGHEST_PROTOCOL)


def _load_store(path):
    with open(path, "rb") as fh:
        return pickle.load(fh)


@main.command()
@click.argument("files", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("-o", "--output", default="corpus.pkl", show_default=True)
@click.option("--gazetteer", multiple=True, metavar="ETYPE=FILE",
              help="register a head-word gazetteer before indexing")
def ingest(files, output, gazetteer):
    """Parse annotation files into an indexed corpus store."""
    from .corpus import ingest as ingest_stream
    text = "\n".join(Path(p).read_text(encoding="utf-8") for p in files)
    merged = ingest_stream(text)
    for spec in gazetteer:
        etype, _, gazpath = spec.partition("=")
        if not gazpath:
            raise click.ClickException("--gazetteer needs ETYPE=FILE")
        words = {line.strip() for line in
                 Path(gazpath).read_text(encoding="utf-8").splitlines()
                 if line.strip()}
        added = merged.register_gazetteer(etype, words)
        click.echo(f"gazetteer {etype}: {added} mentions")
    build_indices(merged)
    _save_corpus(merged, output)
    click.echo(f"{merged.sentence_count} sentences, {merged.token_count} "
               f"tokens, {len(merged.dep_edges)} dependencies, "
               f"{len(merged.entity_mentions)} entity mentions -> {output}")


@main.command()
@click.argument("store", type=click.Path(exists=True))
def index(store):
    """Rebuild the indices of a pickled corpus store."""
    corpus = _load_store(store)
    corpus.indexed = False
    corpus._frozen = False
    build_indices(corpus)
    _save_corpus(corpus, store)
    click.echo(f"reindexed {corpus.sentence_count} sentences")


@main.command("precompute-wordsim")
@click.argument("store", type=click.Path(exists=True))
@click.option("-o", "--output", default="wordsim.tsv", show_default=True)
@click.option("--min-count", default=5, show_default=True)
def precompute_wordsim(store, output, min_count):
    """Build and serialize the distributional-similarity table."""
    corpus = _load_store(store)
    table = wordsim.build_vectors(corpus, min_count=min_count)
    Path(output).write_text(wordsim.serialize_table(table), encoding="utf-8")
    click.echo(f"{len(table.vectors)} vectors -> {output}")


@main.command("eval")
@click.argument("store", type=click.Path(exists=True))
@click.argument("ruleset_file", type=click.Path(exists=True))
def eval_ruleset(store, ruleset_file):
    """Evaluate a ruleset file and print per-rule match counts."""
    corpus = _load_store(store)
    text = Path(ruleset_file).read_text(encoding="utf-8")
    ruleset = Ruleset.from_text(text, Registry(corpus))
    result = materialize_ruleset(ruleset, corpus)
    for rule in ruleset.rules:
        ms = 1000 * result.rule_seconds.get(rule.rule_id, 0)
        click.echo(f"{result.count(rule.rule_id):8d}  {ms:7.1f}ms  "
                   f"{rule.head.pred}  {rule.rule_id}")
    for pred in result.order:
        click.echo(f"# {pred}: {len(result.tuples(pred))} tuples")


@main.command()
@click.argument("store", type=click.Path(exists=True))
@click.argument("ruleset_file", type=click.Path(exists=True))
@click.argument("relation")
@click.option("-o", "--output", type=click.Path(), default="-")
def export(store, ruleset_file, relation, output):
    """Export a relation's extractions as TSV."""
    corpus = _load_store(store)
    ruleset = Ruleset.from_text(Path(ruleset_file).read_text(encoding="utf-8"),
                                Registry(corpus))
    result = materialize_ruleset(ruleset, corpus)
    text = export_tsv(extractions(relation, result, corpus))
    if output == "-":
        click.echo(text, nl=False)
    else:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote {output}")


@main.command()
@click.argument("store", type=click.Path(exists=True))
@click.argument("ruleset_file", type=click.Path(exists=True))
@click.argument("relation")
@click.option("--sort", type=click.Choice(["pmi", "count"]), default="pmi")
@click.option("--use-coref/--no-coref", default=True)
@click.option("--entity-types", is_flag=True, default=False)
@click.option("--min-overlap", default=1, show_default=True)
def bootstrap(store, ruleset_file, relation, sort, use_coref, entity_types,
              min_overlap):
    """Run one bootstrap iteration and print ranked candidates as TSV."""
    corpus = _load_store(store)
    ruleset = Ruleset.from_text(Path(ruleset_file).read_text(encoding="utf-8"),
                                Registry(corpus))
    result = materialize_ruleset(ruleset, corpus)
    ex = extractions(relation, result, corpus)
    config = bootstrap_mod.BootstrapConfig(
        use_coref=use_coref, use_entity_types=entity_types,
        min_overlap=min_overlap, sort=sort)
    ranked, diag = bootstrap_mod.iterate(
        relation, ex, corpus, ruleset.registry, config,
        exclude_rule_ids=[r.rule_id for r in ruleset.rules])
    click.echo(bootstrap_mod.candidates_tsv(ranked), nl=False)
    click.echo(f"# matches={diag.matches} skipped={diag.skipped_no_path}",
               err=True)


@main.command()
@click.option("--sentences", default=100_000, show_default=True)
@click.option("--rules", "rule_count", default=1000, show_default=True)
@click.option("--seed", default=13, show_default=True)
def bench(sentences, rule_count, seed):
    """Generate a synthetic corpus and measure rule-evaluation latency."""
    rng = random.Random(seed)
    click.echo(f"generating {sentences} sentences ...", err=True)
    t0 = time.perf_counter()
    corpus = synth.benchmark_corpus(rng, sentences)
    click.echo(f"built + indexed in {time.perf_counter() - t0:.1f}s "
               f"({corpus.token_count} tokens)", err=True)
    registry = Registry(corpus)
    stats = corpus.stats()
    times = []
    for text in synth.benchmark_rules(rng, rule_count):
        rule = parse_rule(text, registry)
        infer_types(rule, registry)
        t0 = time.perf_counter()
        evaluate_rule(rule, registry, corpus, {}, stats=stats)
        times.append(time.perf_counter() - t0)
    times_ms = sorted(t * 1000 for t in times)
    median = statistics.median(times_ms)
    p95 = times_ms[int(0.95 * len(times_ms))]
    click.echo(f"rules: {len(times_ms)}  median {median:.1f}ms  "
               f"p95 {p95:.1f}ms  max {times_ms[-1]:.1f}ms")

    ruleset = Ruleset.empty(registry).with_rule(
        'seedrel(a,b) <= nsubj(c,a) & dobj(c,b) & token(c,"murdered")')
    result = materialize_ruleset(ruleset, corpus)
    ex = extractions("seedrel", result, corpus)
    t0 = time.perf_counter()
    ranked, _ = bootstrap_mod.iterate(
        "seedrel", ex, corpus, ruleset.registry,
        bootstrap_mod.BootstrapConfig(use_coref=False))
    bootstrap_s = time.perf_counter() - t0
    click.echo(f"bootstrap iteration: {bootstrap_s:.2f}s "
               f"({len(ranked)} candidates from {len(ex)} extractions)")

    t0 = time.perf_counter()
    hits = corpus.search_sentences("murdered", limit=20)
    search_ms = (time.perf_counter() - t0) * 1000
    click.echo(f"search: {search_ms:.2f}ms ({len(hits)} hits)")


@main.command()
@click.argument("store", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8400, show_default=True)
@click.option("--state-dir", type=click.Path(), default=None)
@click.option("--wordsim-min-count", default=5, show_default=True)
@click.option("--wordsim", "wordsim_file", type=click.Path(exists=True),
              default=None, help="precomputed vector table (TSV)")
def serve(store, host, port, state_dir, wordsim_min_count, wordsim_file):
    """Serve the workbench HTTP API over a corpus store."""
    import uvicorn

    from .http_api import build_app
    from .session import Session
    corpus = _load_store(store)
    vectors = None
    if wordsim_file:
        vectors = wordsim.deserialize_table(
            Path(wordsim_file).read_text(encoding="utf-8"), corpus)
    session = Session(corpus, state_dir=state_dir,
                      wordsim_min_count=wordsim_min_count, vectors=vectors)
    app = build_app(session)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
