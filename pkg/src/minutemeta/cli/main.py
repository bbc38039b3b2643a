"""Command-line entry point orchestrating preparation, training, extraction,
evaluation, and benchmarking, driven by declarative recipe files.

Exit codes: 0 success, 1 runtime failure, 2 configuration/validation failure.
"""
from __future__ import annotations

import hashlib
import json
import logging
import sys
from pathlib import Path

import click

from minutemeta.cli.recipe import Recipe
from minutemeta.errors import ConfigError, MinuteMetaError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _load_recipe(recipe_path: str, **overrides) -> Recipe:
    try:
        return Recipe.load(recipe_path, overrides)
    except ConfigError as exc:
        click.echo(f"recipe error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


@click.group()
@click.option("--verbose", is_flag=True, help="Debug-level logging.")
def cli(verbose: bool):
    """Metadata extraction from municipal meeting minutes."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


@cli.command()
@click.argument("recipe_path", type=click.Path(exists=True))
def prepare(recipe_path: str):
    """Materialize QA/BIO datasets and split manifests from the corpus."""
    recipe = _load_recipe(recipe_path)
    from minutemeta.boundary import gold_region
    from minutemeta.corpus import (
        corpus_to_squad,
        load_corpus,
        make_global_split,
        to_bio,
        word_tokenize,
        write_conll,
        write_squad_json,
    )
    from minutemeta.ner.model import region_annotations

    try:
        corpus = load_corpus(recipe.corpus)
    except MinuteMetaError as exc:
        click.echo(f"corpus validation failed: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    out = recipe.output_dir / "prepared"
    out.mkdir(parents=True, exist_ok=True)
    recipe.write_effective(out)

    split = make_global_split(corpus, seed=recipe.seeds["split"])
    split_path = out / "split-global.json"
    split_path.write_text(
        json.dumps(
            {"name": split.name, "train": split.train, "val": split.val,
             "test": split.test},
            ensure_ascii=False, indent=1,
        ),
        encoding="utf-8",
    )

    instances = corpus_to_squad(corpus, recipe.prompts or None)
    qa_path = out / "qa-instances.json"
    write_squad_json(instances, qa_path)

    sequences = []
    for minute in corpus:
        region = gold_region(minute.document, minute.segments)
        if region.is_empty:
            continue
        annotations = region_annotations(minute, region)
        sequences.append(to_bio(region.text, word_tokenize(region.text), annotations))
    bio_path = out / "regions.conll"
    write_conll(sequences, bio_path)

    manifest = {
        "documents": len(corpus),
        "qa_instances": len(instances),
        "unanswerable": sum(1 for i in instances if i.is_impossible),
        "bio_regions": len(sequences),
        "recipe_hash": recipe.digest(),
        "hashes": {
            "qa-instances.json": _sha256_file(qa_path),
            "regions.conll": _sha256_file(bio_path),
            "split-global.json": _sha256_file(split_path),
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=1), encoding="utf-8"
    )
    click.echo(json.dumps(manifest, indent=1))


@cli.command("deslex")
@click.argument("recipe_path", type=click.Path(exists=True))
@click.option("--out", "out_file", default=None, help="Output JSONL path.")
@click.option("--train-only/--all-docs", default=True,
              help="Augment only the training split of the global split.")
def deslex_cmd(recipe_path: str, out_file: str | None, train_only: bool):
    """Write a deslexicalized copy of the corpus (training data by default)."""
    recipe = _load_recipe(recipe_path)
    from minutemeta.corpus import load_corpus, make_global_split, save_corpus
    from minutemeta.deslex import deslexicalize_corpus

    policy = recipe.deslex_policy()
    if policy is None:
        click.echo("recipe has no enabled deslex section", err=True)
        sys.exit(EXIT_CONFIG)
    corpus = load_corpus(recipe.corpus)
    doc_ids = None
    if train_only:
        split = make_global_split(corpus, seed=recipe.seeds["split"])
        doc_ids = split.train
    augmented = deslexicalize_corpus(corpus, policy, doc_ids)
    target = Path(out_file) if out_file else recipe.output_dir / "deslexicalized.jsonl"
    save_corpus(augmented, target)
    recipe.write_effective(target.parent)
    click.echo(f"wrote {len(augmented)} documents to {target}")


@cli.command()
@click.argument("recipe_path", type=click.Path(exists=True))
@click.option("--stage", type=click.Choice(["mbd", "mer"]), required=True)
@click.option("--use-crf/--no-crf", default=None, help="Override the recipe's CRF flag.")
def train(recipe_path: str, stage: str, use_crf: bool | None):
    """Fine-tune the boundary (mbd) or entity (mer) model."""
    recipe = _load_recipe(recipe_path)
    from minutemeta.corpus import load_corpus, make_global_split, minute_qa_instances

    corpus = load_corpus(recipe.corpus)
    split = make_global_split(corpus, seed=recipe.seeds["split"])
    train_minutes = [corpus[d] for d in split.train]
    val_minutes = [corpus[d] for d in split.val]
    out_dir = recipe.output_dir / ("boundary" if stage == "mbd" else "ner")
    recipe.write_effective(recipe.output_dir)

    try:
        if stage == "mbd":
            from minutemeta.boundary import train_boundary

            def instances(minutes):
                out = []
                for minute in minutes:
                    out.extend(minute_qa_instances(minute, recipe.prompts or None))
                return out

            handle = train_boundary(
                instances(train_minutes), instances(val_minutes),
                recipe.boundary_hyperparams(), out_dir,
            )
            click.echo(json.dumps({"checkpoint": str(handle.checkpoint_dir),
                                   "val": handle.meta.get("val_metrics")}, indent=1))
        else:
            from minutemeta.ner import train_ner

            crf = use_crf if use_crf is not None else recipe.ner.get("use_crf", False)
            handle = train_ner(
                train_minutes, val_minutes, recipe.ner_hyperparams(),
                use_crf=crf,
                deslex_policy=recipe.deslex_policy(),
                labels=corpus.label_inventory(),
                out_dir=out_dir,
            )
            click.echo(json.dumps({"checkpoint": str(handle.checkpoint_dir),
                                   "val_entity_f1": handle.meta.get("val_entity_f1")},
                                  indent=1))
    except MinuteMetaError as exc:
        click.echo(f"training failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    sys.exit(EXIT_OK)


@cli.command()
@click.argument("recipe_path", type=click.Path(exists=True))
@click.option("--input", "input_path", default=None,
              help="JSONL of documents to extract (defaults to the recipe corpus).")
@click.option("--qa-model", default=None, help="Boundary checkpoint directory.")
@click.option("--ner-model", default=None, help="Entity checkpoint directory.")
@click.option("--null-threshold", type=float, default=None)
@click.option("--out", "out_dir", default=None)
@click.option("--meter/--no-meter", "use_meter", default=True)
def extract(recipe_path, input_path, qa_model, ner_model, null_threshold, out_dir,
            use_meter):
    """Run the full pipeline over documents, writing one record per document."""
    recipe = _load_recipe(recipe_path)
    from minutemeta.boundary import BoundaryModelHandle
    from minutemeta.corpus import load_corpus
    from minutemeta.ner import NerModelHandle
    from minutemeta.pipeline import PipelineConfig, batch_extract, write_records

    source = Path(input_path) if input_path else recipe.corpus
    corpus = load_corpus(source)
    if len(corpus) == 0:
        click.echo("no documents in input", err=True)
        sys.exit(EXIT_CONFIG)

    qa_dir = qa_model or str(recipe.output_dir / "boundary")
    ner_dir = ner_model or str(recipe.output_dir / "ner")
    try:
        qa_handle = BoundaryModelHandle.load(qa_dir)
        ner_handle = NerModelHandle.load(ner_dir)
    except MinuteMetaError as exc:
        click.echo(f"cannot load models: {exc}", err=True)
        sys.exit(EXIT_CONFIG)

    meter = recipe.resource_meter() if use_meter else None
    config = PipelineConfig(
        null_threshold=null_threshold,
        prompt_overrides=recipe.prompts or None,
    )
    records, errors, report = batch_extract(
        list(corpus), qa_handle, ner_handle, config, meter
    )
    target = Path(out_dir) if out_dir else recipe.output_dir / "records"
    write_records(records, target, report)
    recipe.write_effective(target)
    if errors:
        (target / "errors.jsonl").write_text(
            "\n".join(json.dumps(e, ensure_ascii=False) for e in errors) + "\n",
            encoding="utf-8",
        )
    click.echo(f"{len(records)} records, {len(errors)} errors -> {target}")
    if records:
        sys.exit(EXIT_OK)
    sys.exit(EXIT_RUNTIME)


@cli.command("eval")
@click.argument("recipe_path", type=click.Path(exists=True))
@click.option("--protocol", type=click.Choice(
    ["global", "loo", "incremental", "ablation", "llm"]), required=True)
@click.option("--municipality", default=None,
              help="Target municipality for the incremental protocol.")
def eval_cmd(recipe_path: str, protocol: str, municipality: str | None):
    """Run an evaluation protocol end to end and write report files."""
    recipe = _load_recipe(recipe_path)
    from minutemeta.corpus import load_corpus
    from minutemeta.evaluation import ProtocolRecipe

    corpus = load_corpus(recipe.corpus)
    out = recipe.output_dir / f"eval-{protocol}"
    out.mkdir(parents=True, exist_ok=True)
    recipe.write_effective(out)
    protocol_recipe = ProtocolRecipe(
        boundary_hp=recipe.boundary_hyperparams(),
        ner_hp=recipe.ner_hyperparams(),
        use_crf=recipe.ner.get("use_crf", False),
        deslex_policy=recipe.deslex_policy(),
        labels=corpus.label_inventory(),
        prompt_overrides=recipe.prompts or None,
        split_seed=recipe.seeds["split"],
        workdir=out / "models",
        k_max=recipe.incremental.get("k_max", 5),
    )

    try:
        if protocol == "global":
            from minutemeta.evaluation import run_global_eval

            report = run_global_eval(corpus, protocol_recipe)
            report.save(out / "report.json")
            click.echo(report.table())
        elif protocol == "loo":
            from minutemeta.evaluation import run_leave_one_out

            reports, aggregate = run_leave_one_out(corpus, protocol_recipe)
            for fold in reports:
                name = fold.extra["held_out"]
                fold.save(out / f"fold-{name}.json")
            aggregate.save(out / "aggregate.json")
            click.echo(aggregate.table())
        elif protocol == "incremental":
            from minutemeta.evaluation import run_incremental

            target = municipality or recipe.incremental.get("municipality")
            if not target:
                click.echo("incremental protocol needs --municipality", err=True)
                sys.exit(EXIT_CONFIG)
            report = run_incremental(corpus, target, protocol_recipe)
            report.save(out / f"incremental-{target}.json")
            click.echo(json.dumps(report.extra["curve"], indent=1))
        elif protocol == "ablation":
            _run_ablation(recipe, corpus, protocol_recipe, out)
        else:
            _run_llm_benchmark(recipe, corpus, out)
    except MinuteMetaError as exc:
        click.echo(f"evaluation failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    sys.exit(EXIT_OK)


def _run_ablation(recipe: Recipe, corpus, protocol_recipe, out: Path):
    import time

    from minutemeta.corpus import make_global_split, minute_qa_instances
    from minutemeta.boundary import train_boundary
    from minutemeta.ner import train_ner
    from minutemeta.pipeline import run_ablation_no_mbd

    split = make_global_split(corpus, seed=recipe.seeds["split"])
    train_minutes = [corpus[d] for d in split.train]
    val_minutes = [corpus[d] for d in split.val]
    test_minutes = [corpus[d] for d in split.test]

    def instances(minutes):
        collected = []
        for minute in minutes:
            collected.extend(minute_qa_instances(minute, recipe.prompts or None))
        return collected

    qa_handle = train_boundary(
        instances(train_minutes), instances(val_minutes),
        recipe.boundary_hyperparams(), out / "models" / "boundary",
    )
    started = time.perf_counter()
    ner_region = train_ner(
        train_minutes, val_minutes, recipe.ner_hyperparams(),
        use_crf=recipe.ner.get("use_crf", False),
        deslex_policy=recipe.deslex_policy(),
        labels=corpus.label_inventory(),
        out_dir=out / "models" / "ner-region",
    )
    region_seconds = time.perf_counter() - started

    from minutemeta.cli.fulldoc import train_ner_fulldoc

    started = time.perf_counter()
    ner_fulldoc = train_ner_fulldoc(
        train_minutes, val_minutes, recipe, corpus.label_inventory(),
        out / "models" / "ner-fulldoc",
    )
    fulldoc_seconds = time.perf_counter() - started

    result = run_ablation_no_mbd(
        test_minutes, ner_fulldoc, qa_handle, ner_region,
        training_seconds={"pipeline": region_seconds, "fulldoc": fulldoc_seconds},
    )
    (out / "ablation.json").write_text(
        json.dumps(result, ensure_ascii=False, indent=1), encoding="utf-8"
    )
    click.echo(json.dumps({k: result[k] for k in (
        "pipeline_f1", "fulldoc_f1", "f1_delta", "token_reduction")}, indent=1))


def _run_llm_benchmark(recipe: Recipe, corpus, out: Path):
    from minutemeta.evaluation import ResourceMeter
    from minutemeta.llm import (
        ExtractionPromptSpec,
        HttpEndpoint,
        MockEndpoint,
        ResponseCache,
        llm_benchmark,
    )

    llm_cfg = recipe.llm
    meter = recipe.resource_meter() or ResourceMeter(carbon_intensity=0.5)
    spec = ExtractionPromptSpec(
        model_name=llm_cfg.get("model_name", "mock"),
        temperature=llm_cfg.get("temperature", 0.0),
        max_output_tokens=llm_cfg.get("max_output_tokens", 1024),
        timeout=llm_cfg.get("timeout", 120.0),
        retries=llm_cfg.get("retries", 3),
        few_shot=llm_cfg.get("few_shot", []),
    )
    kind = llm_cfg.get("endpoint", "mock")
    if kind == "mock":
        directory = llm_cfg.get("responses_dir")
        endpoint = MockEndpoint(
            directory=Path(recipe.path.parent / directory) if directory else None
        )
    elif kind == "http":
        if "url" not in llm_cfg:
            raise ConfigError("llm.url is required for the http endpoint")
        endpoint = HttpEndpoint(
            url=llm_cfg["url"], headers=llm_cfg.get("headers", {}),
            timeout=llm_cfg.get("timeout", 120.0), retries=llm_cfg.get("retries", 3),
        )
    else:
        raise ConfigError(f"unknown llm endpoint kind {kind!r}")

    cache_dir = llm_cfg.get("cache_dir")
    cache = ResponseCache(
        Path(recipe.output_dir) / (cache_dir or "llm-cache")
    )
    pipeline_resources = None
    resources_path = recipe.output_dir / "records" / "resources.json"
    if resources_path.exists():
        pipeline_resources = json.loads(resources_path.read_text(encoding="utf-8"))
    result = llm_benchmark(
        list(corpus), spec, endpoint, meter, cache,
        pipeline_resources=pipeline_resources,
    )
    (out / "llm-benchmark.json").write_text(
        json.dumps(result, ensure_ascii=False, indent=1), encoding="utf-8"
    )
    click.echo(json.dumps({
        "model": result["model"],
        "f1": result["scores"]["micro"]["f1"],
        "parse_failures": result["parse_failures"],
        "seconds_per_doc": result["seconds_per_doc"],
    }, indent=1))


@cli.command("bench-llm")
@click.argument("recipe_path", type=click.Path(exists=True))
def bench_llm(recipe_path: str):
    """Benchmark the generative-model baseline (alias of eval --protocol llm)."""
    recipe = _load_recipe(recipe_path)
    from minutemeta.corpus import load_corpus

    corpus = load_corpus(recipe.corpus)
    out = recipe.output_dir / "eval-llm"
    out.mkdir(parents=True, exist_ok=True)
    recipe.write_effective(out)
    try:
        _run_llm_benchmark(recipe, corpus, out)
    except MinuteMetaError as exc:
        click.echo(f"benchmark failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    sys.exit(EXIT_OK)


@cli.command()
@click.argument("report_files", nargs=-1, type=click.Path(exists=True))
def report(report_files):
    """Render saved evaluation reports as human-readable tables."""
    from minutemeta.evaluation.report import EvalReport

    if not report_files:
        click.echo("no report files given", err=True)
        sys.exit(EXIT_CONFIG)
    for path in report_files:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rendered = EvalReport(
            protocol=data.get("protocol", "?"),
            model=data.get("model", "?"),
            micro=data.get("micro", {}),
            per_category=data.get("per_category", {}),
            qa_metrics=data.get("qa"),
            taxonomy=data.get("taxonomy", {}),
            resources=data.get("resources"),
            extra=data.get("extra", {}),
        )
        click.echo(rendered.table())
        click.echo("")


if __name__ == "__main__":
    cli()
