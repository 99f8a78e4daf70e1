"""Command line entry point: ``molviews <command> --config run.toml``.

Stages communicate through files under the output directory::

    split.json                 record order and split membership
    rejects.csv                rows that failed to parse
    rule_features.csv          raw rule values per molecule
    normalization.json         train-split z-score statistics
    views/struct.npy           structure view, rows in split.json order
    views/task.npy             task view
    seed_<s>/model.bin         checkpoint (+ model.json sidecar)
    seed_<s>/train_log.jsonl   one record per epoch
    seed_<s>/timing.json       wall time per epoch
    seed_<s>/metrics.json      test metrics for that seed
    metrics.json               mean and std over seeds
    contributions*.json/.csv   mean view weights and per-molecule table
    prompts/                   generated prompt text
    manifest.json              config snapshot, input digests, artifacts
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from molviews import __version__, pipeline
from molviews.data import DatasetSpec, aggregate_seeds, dumps_report, evaluate, load_dataset, scaffold_split, write_rejects
from molviews.data.dataset import MissingColumn, tomllib
from molviews.data.split import DatasetSplit
from molviews.model import (
    TrainConfig,
    VIEW_NAMES,
    component_contributions,
    init_model,
    load_checkpoint,
    save_checkpoint,
    train,
)
from molviews.rules import (
    NormalizationStats,
    build_data_rule_prompt,
    build_scientific_rule_prompt,
    parse_rules,
    sample_data_subsets,
)
from molviews.rules.dsl import RuleError
from molviews.views import (
    BBBP_TASK_QUESTION,
    EmbeddingCache,
    HttpEmbeddingProvider,
    MockProvider,
    ProviderFailure,
    build_structure_prompts,
    build_task_prompt,
)

log = logging.getLogger("molviews")


class ConfigError(ValueError):
    pass


class EmptyRuleSet(ValueError):
    pass


class MissingArtifact(FileNotFoundError):
    pass


# --- configuration -----------------------------------------------------------

_ENV = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def _interpolate(value):
    if isinstance(value, str):
        def sub(m):
            if m.group(1) not in os.environ:
                raise ConfigError(f"environment variable {m.group(1)} is not set")
            return os.environ[m.group(1)]
        return _ENV.sub(sub, value)
    return value


class RunConfig:
    """Resolved run configuration; relative paths are taken from the config file's folder."""

    def __init__(self, raw: dict, base: Path):
        self.raw = raw
        self.base = base
        ds = raw.get("dataset", {})
        if "path" not in ds:
            raise ConfigError("[dataset] needs a 'path'")
        self.dataset_path = self._path(ds["path"])
        if "spec" in ds:
            self.spec = DatasetSpec.from_file(self._path(ds["spec"]))
        else:
            self.spec = DatasetSpec.from_dict({k: v for k, v in ds.items() if k != "path"})
        self.rules_path = self._path(raw["rules"]["path"]) if "path" in raw.get("rules", {}) else None
        self.provider_raw = dict(raw.get("provider", {"kind": "mock"}))
        self.provider = {k: _interpolate(v) for k, v in self.provider_raw.items()}
        views = raw.get("views", {})
        self.views = tuple(v for v in VIEW_NAMES if views.get(v, True))
        self.task_question = views.get("task_question", BBBP_TASK_QUESTION)
        self.wrapper_style = views.get("wrapper_style", "galactica_smiles_tags")
        self.train = TrainConfig.from_dict(raw.get("train", {}))
        run = raw.get("run", {})
        self.out = self._path(run.get("out", "out"))
        self.seeds = [int(s) for s in run.get("seeds", [self.train.seed])]
        self.fractions = tuple(run.get("fractions", (0.8, 0.1, 0.1)))
        self.cache_dir = self._path(run["cache"]) if "cache" in run else self.out / "cache"
        self.max_in_flight = int(run.get("max_in_flight", 1))
        self.prompts = raw.get("prompts", {})
        self.validate()

    def _path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base / p

    def validate(self):
        if not self.views:
            raise ConfigError("at least one view must be enabled")
        if not self.seeds:
            raise ConfigError("seed list is empty")

    @classmethod
    def load(cls, path, overrides=None) -> "RunConfig":
        path = Path(path)
        try:
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        overrides = overrides or {}
        if overrides.get("seed") is not None:
            raw.setdefault("run", {})["seeds"] = [overrides["seed"]]
            raw.setdefault("train", {})["seed"] = overrides["seed"]
        if overrides.get("views"):
            wanted = [v.strip() for v in overrides["views"].split(",") if v.strip()]
            bad = set(wanted) - set(VIEW_NAMES)
            if bad:
                raise ConfigError(f"unknown views {sorted(bad)}; choose from {','.join(VIEW_NAMES)}")
            section = raw.setdefault("views", {})
            for v in VIEW_NAMES:
                section[v] = v in wanted
        if overrides.get("out"):
            raw.setdefault("run", {})["out"] = str(Path(overrides["out"]).resolve())
        if overrides.get("provider"):
            if overrides["provider"] != "mock":
                raise ConfigError("--provider only accepts 'mock'")
            prov = raw.get("provider", {})
            raw["provider"] = {"kind": "mock", "dim": prov.get("dim", 32), "seed": prov.get("seed", 0)}
        return cls(raw, path.parent.resolve())

    def snapshot(self) -> dict:
        # uninterpolated values, so secrets pulled from the environment never reach disk
        provider = dict(self.provider_raw)
        return {
            "dataset": {"path": str(self.dataset_path), "spec": self.spec.to_dict()},
            "rules": str(self.rules_path) if self.rules_path else None,
            "provider": provider,
            "views": {"enabled": list(self.views), "task_question": self.task_question,
                      "wrapper_style": self.wrapper_style},
            "train": self.train.to_dict(),
            "run": {"out": str(self.out), "seeds": self.seeds, "fractions": list(self.fractions),
                    "cache": str(self.cache_dir)},
        }


def make_provider(settings: dict):
    kind = settings.get("kind", "mock")
    if kind == "mock":
        return MockProvider(int(settings.get("dim", 32)), int(settings.get("seed", 0)))
    if kind == "http":
        for key in ("url", "model"):
            if key not in settings:
                raise ConfigError(f"[provider] kind 'http' needs '{key}'")
        return HttpEmbeddingProvider(
            settings["url"], settings["model"], settings.get("api_key_env", "EMBEDDING_API_KEY"),
            provider_id=settings.get("provider_id", "http"),
            timeout=float(settings.get("timeout", 60.0)),
            max_retries=int(settings.get("max_retries", 5)),
        )
    raise ConfigError(f"unknown provider kind {kind!r}")


# --- shared stage helpers ----------------------------------------------------


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
    return path


def _update_manifest(cfg: RunConfig, command: str, artifacts):
    path = cfg.out / "manifest.json"
    manifest = json.loads(path.read_text(encoding="utf-8")) if path.exists() else {"runs": []}
    inputs = {"dataset": str(cfg.dataset_path)}
    if cfg.rules_path:
        inputs["rules"] = str(cfg.rules_path)
    manifest["config"] = cfg.snapshot()
    manifest["input_digests"] = {k: _digest(Path(v)) for k, v in inputs.items() if Path(v).exists()}
    manifest["versions"] = {"molviews": __version__, "numpy": np.__version__, "python": sys.version.split()[0]}
    manifest["runs"].append({
        "command": command,
        "finished_at": datetime.now(timezone.utc).isoformat(),
        "artifacts": sorted(str(Path(a).relative_to(cfg.out)) for a in artifacts),
    })
    _write_json(path, manifest)


def _load_split(cfg: RunConfig):
    """Load and scaffold-split the dataset; the split is a pure function of the file."""
    loaded = load_dataset(cfg.dataset_path, cfg.spec)
    split = scaffold_split(loaded.records, cfg.fractions)
    return loaded, split


def _load_rules(cfg: RunConfig):
    if cfg.rules_path is None:
        raise ConfigError("[rules] needs a 'path'")
    text = cfg.rules_path.read_text(encoding="utf-8")
    try:
        ruleset = parse_rules(text, task_id=cfg.spec.name)
    except RuleError as exc:
        line = getattr(exc, "line", None)
        where = f"{cfg.rules_path}:{line}" if line else str(cfg.rules_path)
        raise ConfigError(f"{where}: {exc}") from exc
    if len(ruleset) == 0:
        raise EmptyRuleSet(f"{cfg.rules_path}: no rules defined")
    return ruleset


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise MissingArtifact(f"{path} is missing; run '{stage}' first")
    return path


def _split_members(split: DatasetSplit):
    return {name: [r.smiles for r in part] for name, part in split.parts()}


def _read_rule_features(cfg: RunConfig, split: DatasetSplit):
    path = _require(cfg.out / "rule_features.csv", "featurize")
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    body = rows[1:]
    raw = {}
    offset = 0
    for name, part in split.parts():
        chunk = body[offset:offset + len(part)]
        offset += len(part)
        if [r[1] for r in chunk] != [r.smiles for r in part] or any(r[0] != name for r in chunk):
            raise MissingArtifact(f"{path} does not match the current split; rerun 'featurize'")
        raw[name] = np.array([[float(x) for x in r[2:]] for r in chunk], dtype=np.float64).reshape(len(chunk), -1)
    stats = NormalizationStats.from_dict(json.loads(
        _require(cfg.out / "normalization.json", "featurize").read_text(encoding="utf-8")))
    return raw, stats


def _read_embeddings(cfg: RunConfig, split: DatasetSplit):
    struct = np.load(_require(cfg.out / "views" / "struct.npy", "embed"))
    task = np.load(_require(cfg.out / "views" / "task.npy", "embed"))
    n = sum(len(p) for _, p in split.parts())
    if len(struct) != n or len(task) != n:
        raise MissingArtifact("view files do not match the current split; rerun 'embed'")
    out, offset = {}, 0
    for name, part in split.parts():
        out[name] = (struct[offset:offset + len(part)], task[offset:offset + len(part)])
        offset += len(part)
    return out


def _view_data(cfg: RunConfig, split: DatasetSplit):
    rules = stats = embeddings = None
    if "rule" in cfg.views:
        rules, stats = _read_rule_features(cfg, split)
    if "struct" in cfg.views or "task" in cfg.views:
        embeddings = _read_embeddings(cfg, split)
    return pipeline.view_data(split, cfg.spec.task_count, rules, stats, embeddings, cfg.views)


def _head(spec: DatasetSpec) -> str:
    if spec.task_kind == "regression":
        if spec.task_count != 1:
            raise ConfigError("regression supports a single label column")
        return "linear_scalar"
    return "sigmoid_scalar" if spec.task_count == 1 else "sigmoid_multitask"


# --- commands ----------------------------------------------------------------


def cmd_featurize(cfg: RunConfig) -> int:
    ruleset = _load_rules(cfg)
    loaded, split = _load_split(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    try:
        raw, stats = pipeline.featurize_split(split, ruleset)
    except pipeline.FeaturizeError as exc:
        raise ConfigError(f"{cfg.rules_path}: {exc}") from exc
    path = cfg.out / "rule_features.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["split", "smiles", *ruleset.rule_ids])
        for name, part in split.parts():
            for r, row in zip(part, raw[name]):
                w.writerow([name, r.smiles, *(repr(float(x)) for x in row)])
    norm = _write_json(cfg.out / "normalization.json", stats.to_dict())
    split_path = _write_json(cfg.out / "split.json", {
        "fractions": list(split.fractions), "sizes": list(split.sizes()), "members": _split_members(split)})
    rejects = write_rejects(loaded.rejects, cfg.out / "rejects.csv")
    print(f"featurized {len(loaded)} molecules with {len(ruleset)} rules; "
          f"split {'/'.join(map(str, split.sizes()))}; rejected {len(loaded.rejects)}")
    if loaded.rejects:
        log.warning("%d rows rejected; see %s", len(loaded.rejects), rejects)
    _update_manifest(cfg, "featurize", [path, norm, split_path, rejects])
    return 0


def cmd_embed(cfg: RunConfig) -> int:
    loaded, split = _load_split(cfg)
    provider = make_provider(cfg.provider)
    cache = EmbeddingCache(cfg.cache_dir)
    before = len(cache)
    stats = {}
    emb = pipeline.embed_split(provider, split, cfg.task_question, cache, cfg.wrapper_style,
                               stats=stats, max_in_flight=cfg.max_in_flight)
    views = cfg.out / "views"
    views.mkdir(parents=True, exist_ok=True)
    struct = np.concatenate([emb[n][0] for n in pipeline.PARTS])
    task = np.concatenate([emb[n][1] for n in pipeline.PARTS])
    np.save(views / "struct.npy", struct)
    np.save(views / "task.npy", task)
    added = len(cache) - before
    print(f"embedded {len(loaded)} molecules: {stats.get('hits', 0)} cache hits, "
          f"{stats.get('misses', 0)} misses, {added} new cache entries")
    _update_manifest(cfg, "embed", [views / "struct.npy", views / "task.npy"])
    return 0


def cmd_train(cfg: RunConfig) -> int:
    _, split = _load_split(cfg)
    data = _view_data(cfg, split)
    dims = pipeline.view_dims(data)
    artifacts = []
    for seed in cfg.seeds:
        tc = TrainConfig.from_dict({**cfg.train.to_dict(), "seed": seed})
        model = init_model(dims, tc.hidden_dim, tc.mlp_widths, _head(cfg.spec), cfg.spec.task_count,
                           seed=seed, init_scale=tc.init_scale, gate_init=tc.gate_init)
        result = train(model, data["train"], data["valid"], tc)
        folder = cfg.out / f"seed_{seed}"
        ckpt = save_checkpoint(model, folder / "model.bin", {"train": tc.to_dict(), "views": list(cfg.views)})
        log_path = folder / "train_log.jsonl"
        log_path.write_text(result.log_jsonl(), encoding="utf-8")
        timing = _write_json(folder / "timing.json", {"epoch_seconds": result.wall_times})
        artifacts += [ckpt, ckpt.with_suffix(".json"), log_path, timing]
        print(f"seed {seed}: {len(result.log)} epochs, best epoch {result.best_epoch}, "
              f"valid metric {result.log[result.best_epoch - 1]['valid_metric']:.4f}")
    _update_manifest(cfg, "train", artifacts)
    return 0


def _checkpoint(cfg: RunConfig, seed: int):
    return load_checkpoint(_require(cfg.out / f"seed_{seed}" / "model.bin", "train"))


def cmd_evaluate(cfg: RunConfig) -> int:
    _, split = _load_split(cfg)
    data = _view_data(cfg, split)
    reports, artifacts = [], []
    for seed in cfg.seeds:
        report = evaluate(_checkpoint(cfg, seed), data["test"], cfg.spec, seed)
        path = cfg.out / f"seed_{seed}" / "metrics.json"
        path.write_text(dumps_report(report), encoding="utf-8")
        artifacts.append(path)
        reports.append(report)
    summary = aggregate_seeds(reports)
    path = cfg.out / "metrics.json"
    path.write_text(dumps_report(summary), encoding="utf-8")
    artifacts.append(path)
    flagged = sorted({t for r in reports for t in r["not_evaluable"]})
    print(f"{summary['metric']}: {summary['mean']:.4f} +/- {summary['std']:.4f} over {len(reports)} seed(s)")
    if flagged:
        log.warning("tasks not evaluable on the test split: %s", ", ".join(flagged))
    _update_manifest(cfg, "evaluate", artifacts)
    return 0


def cmd_contributions(cfg: RunConfig, part="test") -> int:
    _, split = _load_split(cfg)
    data = _view_data(cfg, split)
    members = _split_members(split)[part]
    artifacts = []
    for seed in cfg.seeds:
        report = component_contributions(_checkpoint(cfg, seed), data[part], members)
        stem = cfg.out / f"contributions_seed{seed}"
        path = _write_json(stem.with_suffix(".json"), {"seed": seed, "split": part, **report.to_dict()})
        with open(stem.with_suffix(".csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["smiles", *(f"alpha_{v}" for v in VIEW_NAMES)])
            for row in report.rows():
                w.writerow([row[0], *(repr(x) for x in row[1:])])
        artifacts += [path, stem.with_suffix(".csv")]
        means = ", ".join(f"{v} {report.means[v]:.3f}" for v in VIEW_NAMES)
        print(f"seed {seed}: mean view weights {means}")
    _update_manifest(cfg, "contributions", artifacts)
    return 0


PROMPT_KINDS = ("structure", "task", "rules-sci", "rules-data")


def cmd_prompts(cfg: RunConfig, kind: str) -> int:
    out = cfg.out / "prompts" / kind
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.prompts
    written = []
    if kind in ("structure", "task"):
        loaded = load_dataset(cfg.dataset_path, cfg.spec)
        limit = int(p.get("limit", len(loaded)))
        for i, r in enumerate(loaded.records[:limit]):
            if kind == "structure":
                texts = build_structure_prompts(r.smiles)
            else:
                texts = [build_task_prompt(r.smiles, cfg.task_question, cfg.wrapper_style)]
            for j, text in enumerate(texts):
                name = f"{i:05d}.txt" if kind == "task" else f"{i:05d}_{j + 1}.txt"
                (out / name).write_text(text, encoding="utf-8")
                written.append(out / name)
    elif kind == "rules-sci":
        text = build_scientific_rule_prompt(p.get("task_description", cfg.spec.name), int(p.get("rule_count", 20)))
        (out / "prompt.txt").write_text(text, encoding="utf-8")
        written.append(out / "prompt.txt")
    else:
        if cfg.spec.task_count != 1:
            raise ConfigError("rules-data prompts need a single-task dataset")
        loaded = load_dataset(cfg.dataset_path, cfg.spec)
        pairs = [(r.smiles, r.labels[0]) for r in loaded.records if r.labels[0] is not None]
        subsets = sample_data_subsets(pairs, int(p.get("k", 5)), int(p.get("m", 20)), int(p.get("seed", 0)))
        meaning = p.get("label_meaning", cfg.spec.name)
        for i, subset in enumerate(subsets):
            text = build_data_rule_prompt(subset, meaning, int(p.get("data_rule_count", 3)))
            (out / f"subset_{i + 1}.txt").write_text(text, encoding="utf-8")
            written.append(out / f"subset_{i + 1}.txt")
    print(f"wrote {len(written)} {kind} prompt file(s) to {out}")
    _update_manifest(cfg, f"prompts {kind}", written)
    return 0


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="molviews", description="Multi-view molecular property prediction.")
    parser.add_argument("--version", action="version", version=f"molviews {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="run configuration (TOML)")
        p.add_argument("--seed", type=int, help="train a single seed instead of the configured list")
        p.add_argument("--views", help="comma list of enabled views, e.g. struct,task,rule")
        p.add_argument("--out", help="output directory")
        p.add_argument("--provider", choices=["mock"], help="force the deterministic mock provider")
        return p

    common(sub.add_parser("featurize", help="evaluate the rule file on every molecule"))
    common(sub.add_parser("embed", help="fetch structure and task embeddings"))
    common(sub.add_parser("train", help="train one model per seed"))
    common(sub.add_parser("evaluate", help="score checkpoints on the test split"))
    c = common(sub.add_parser("contributions", help="average view weights per molecule"))
    c.add_argument("--split", choices=pipeline.PARTS, default="test")
    p = common(sub.add_parser("prompts", help="write prompt text files"))
    p.add_argument("kind", choices=PROMPT_KINDS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config, {"seed": args.seed, "views": args.views,
                                           "out": args.out, "provider": args.provider})
        if args.command == "featurize":
            return cmd_featurize(cfg)
        if args.command == "embed":
            return cmd_embed(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "contributions":
            return cmd_contributions(cfg, args.split)
        return cmd_prompts(cfg, args.kind)
    except (ConfigError, MissingColumn, RuleError, ProviderFailure, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
