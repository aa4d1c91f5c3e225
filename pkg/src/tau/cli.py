"""The ``tau`` command line.

Exit status: 0 on success, 1 on a usage error, 2 when some file failed.
Flags can also come from ``--config FILE`` (``key = value`` lines) and from
the ``TAU_SEED`` and ``TAU_ENDPOINT`` environment variables; explicit
flags win over both.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from tau import corpus as corpus_mod
from tau import evaluation, fit_prep
from tau.block_tree import attach_usage_comments, build_tree, format_tree
from tau.lang.parser import MTSSyntaxError, parse
from tau.predictor import PredictorFailure, make_predictor
from tau.predictor.base import Sentinels
from tau.search.config import SearchConfig
from tau.search.engine import migrate
from tau.typedness import score_program
from tau.typesys.checker import check, diagnostics_report


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def read_config(path: str) -> dict[str, str]:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _coerce(action: argparse.Action, raw: str):
    if isinstance(action, argparse.BooleanOptionalAction) or action.nargs == 0:
        return raw.lower() in ("1", "true", "yes", "on")
    return action.type(raw) if action.type else raw


# -- argument groups ----------------------------------------------------------------


def _search_args(p: argparse.ArgumentParser) -> None:
    d = SearchConfig()
    p.add_argument("--mode", choices=("tree", "baseline"), default=d.mode)
    p.add_argument("--num-comps", type=int, default=d.num_comps)
    p.add_argument("--stop-at", type=int, default=d.stop_at)
    p.add_argument("--temperature", type=float, default=d.temperature)
    p.add_argument("--window", type=int, default=d.window)
    p.add_argument("--lam", type=float, default=d.lam, help="Poisson parameter for combination sampling")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--usages", action=argparse.BooleanOptionalAction, default=d.usages)
    p.add_argument("--max-usages", type=int, default=d.max_usages)
    p.add_argument("--type-parser", action=argparse.BooleanOptionalAction, default=d.type_parser,
                   help="extract the first type from each completion (--no-type-parser splices raw text)")
    p.add_argument("--predictor", choices=("scripted", "adversarial", "oracle", "remote"), default="oracle")
    p.add_argument("--script", help="JSON file of scripted completions: {\"node:site\": [...]}")
    p.add_argument("--endpoint", help="remote predictor base URL")
    p.add_argument("--endpoint-style", choices=("infill", "prompt"), default="infill",
                   help="send prefix/suffix (infill) or a sentinel-composed prompt (prompt)")


def _search_config(a) -> SearchConfig:
    return SearchConfig(num_comps=a.num_comps, stop_at=a.stop_at, temperature=a.temperature, window=a.window,
                        lam=a.lam, seed=a.seed, mode=a.mode, usages=a.usages, max_usages=a.max_usages,
                        type_parser=a.type_parser, trace=bool(getattr(a, "trace", None)))


def load_script(path: str) -> tuple[dict, Optional[list]]:
    """``{"node:site": [...], "site": [...], "*": [...]}``; ``*`` answers any other hole."""
    raw = json.loads(Path(path).read_text())
    out = {}
    default = raw.pop("*", None)
    for k, v in raw.items():
        if ":" in k:
            node, site = k.rsplit(":", 1)
            out[(node, int(site))] = v
        else:
            out[int(k)] = v
    return out, default


def _predictor(a):
    kw = {}
    if a.predictor == "scripted" and a.script:
        kw["script"], kw["default"] = load_script(a.script)
    if a.predictor == "remote":
        kw["endpoint"] = a.endpoint or os.environ.get("TAU_ENDPOINT")
        if not kw["endpoint"]:
            raise UsageError("remote predictor needs --endpoint or TAU_ENDPOINT")
        kw["style"] = a.endpoint_style
    return make_predictor(a.predictor, **kw)


def _read_program(path: str):
    text = Path(path).read_text()
    return parse(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- commands ---------------------------------------------------------------------------


def cmd_migrate(a) -> int:
    cfg = _search_config(a)
    out_dir = Path(a.out) if a.out else Path(a.file).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(a.file).name.removesuffix(".mts")
    try:
        result = migrate(_read_program(a.file), _predictor(a), cfg)
    except MTSSyntaxError as exc:
        print(f"{a.file}: {exc}", file=sys.stderr)
        return 2
    except PredictorFailure as exc:
        print(f"{a.file}: predictor failed: {exc}", file=sys.stderr)
        return 2
    (out_dir / f"{stem}.out.mts").write_text(result.best.text)
    (out_dir / f"{stem}.manifest.json").write_text(_dump(result.manifest()))
    if a.trace:
        Path(a.trace).write_text("".join(json.dumps(e, sort_keys=True, default=str) + "\n"
                                         for e in [{"event": "order", "nodes": result.order}, *result.trace]))
    best = result.best
    print(_dump({"out": str(out_dir / f"{stem}.out.mts"), "type_errors": best.type_errors,
                 "syntax_errors": best.syntax_errors, "typedness": best.typedness.to_dict()}), end="")
    return 0 if best.type_errors == 0 and best.syntax_errors == 0 else 2


def cmd_check(a) -> int:
    text = Path(a.file).read_text()
    try:
        program = parse(text)
    except MTSSyntaxError as exc:
        print(_dump({"syntax_errors": [vars(e) | {"span": list(e.span)} for e in exc.errors]}), end="")
        return 2
    errors = check(program)
    print(_dump({"errors": diagnostics_report(errors, text)}), end="")
    return 2 if errors else 0


def cmd_typedness(a) -> int:
    try:
        program = _read_program(a.file)
    except MTSSyntaxError as exc:
        print(f"{a.file}: {exc}", file=sys.stderr)
        return 2
    print(_dump(score_program(program).to_dict(rounded=not a.exact)), end="")
    return 0


def cmd_decompose(a) -> int:
    try:
        program = _read_program(a.file)
    except MTSSyntaxError as exc:
        print(f"{a.file}: {exc}", file=sys.stderr)
        return 2
    tree = build_tree(program)
    if a.json:
        if a.usages:
            attach_usage_comments(tree, program)
        doc = tree.to_dict()
        if a.usages:
            doc["usage_comments"] = {n.name: n.usage_comment for n in tree.walk() if n.usage_comment}
        print(_dump(doc), end="")
    else:
        print(format_tree(tree))
    return 0


def cmd_fit_prep(a) -> int:
    paths = []
    for p in a.inputs:
        path = Path(p)
        paths.extend(sorted(path.rglob("*.mts")) if path.is_dir() else [path])
    root = Path(a.inputs[0]) if len(a.inputs) == 1 and Path(a.inputs[0]).is_dir() else None
    cfg = fit_prep.FitConfig(psm_ratio=a.psm_ratio, strip_prob=a.strip_prob, seed=a.seed,
                             max_per_file=a.max_per_file, one_per_file=a.one_per_file)
    sentinels = Sentinels(a.pre, a.suf, a.mid)
    manifest = fit_prep.emit_dataset(fit_prep.read_corpus(paths, root), a.out, cfg, sentinels, a.gzip)
    print(_dump({"records": manifest.records, "files": manifest.files, "skipped": manifest.skipped}), end="")
    return 2 if manifest.skipped else 0


def cmd_corpus(a) -> int:
    files = corpus_mod.load_corpus(a.dir, a.metadata)
    cutoff = dt.date.fromisoformat(a.cutoff)
    result = corpus_mod.build_corpus(files, cutoff)
    corpus_mod.write_outputs(result, a.out)
    sel = result.selection
    print(_dump({"kept": len(sel.kept), "eval": len(sel.eval_set), "train": len(sel.train_set),
                 "rejected": len(sel.rejected)}), end="")
    return 0


def cmd_eval(a) -> int:
    if not Path(a.corpus).is_dir():
        raise UsageError(f"{a.corpus} is not a directory")
    report = evaluation.run_eval(a.corpus, _predictor(a), _search_config(a), jobs=a.jobs, out_dir=a.outputs)
    doc = report.to_json()
    if a.out:
        Path(a.out).write_text(doc)
    print(report.table(a.label) if a.table else doc, end="")
    return 2 if report.failures else 0


def cmd_compare(a) -> int:
    ra = evaluation.EvalReport.from_dict(json.loads(Path(a.a).read_text()))
    rb = evaluation.EvalReport.from_dict(json.loads(Path(a.b).read_text()))
    try:
        cmp = evaluation.compare(ra, rb, (a.label_a or Path(a.a).stem, a.label_b or Path(a.b).stem))
    except evaluation.CorpusMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(_dump(cmp) if a.json else evaluation.comparison_table(cmp), end="")
    return 0


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tau", description="Type migration for MTS programs.")
    parser.add_argument("--config", help="key = value file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("migrate", help="annotate one file")
    p.add_argument("file")
    _search_args(p)
    p.add_argument("--out", help="output directory (default: next to the input)")
    p.add_argument("--trace", help="write a JSONL trace of visits and prompts here")
    p.set_defaults(func=cmd_migrate)

    p = sub.add_parser("check", help="type check one file")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("typedness", help="typedness score of one file")
    p.add_argument("file")
    p.add_argument("--exact", action="store_true", help="do not round the score")
    p.set_defaults(func=cmd_typedness)

    p = sub.add_parser("decompose", help="print the block tree")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--usages", action="store_true", help="include usage comments (with --json)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("fit-prep", help="fill-in-the-type training shards")
    p.add_argument("inputs", nargs="+", help="files or directories of typed .mts files")
    p.add_argument("--out", required=True)
    p.add_argument("--psm-ratio", type=float, default=0.5)
    p.add_argument("--strip-prob", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-per-file", type=int)
    p.add_argument("--one-per-file", action="store_true")
    p.add_argument("--gzip", action="store_true")
    p.add_argument("--pre", default="<PRE>")
    p.add_argument("--suf", default="<SUF>")
    p.add_argument("--mid", default="<M>")
    p.set_defaults(func=cmd_fit_prep)

    p = sub.add_parser("corpus", help="filter, score and split a corpus")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    p.add_argument("--metadata", help="JSONL of {path, earliest_timestamp}")
    p.add_argument("--cutoff", default=corpus_mod.CUTOFF.isoformat())
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("eval", help="migrate a corpus and report metrics")
    p.add_argument("corpus")
    _search_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write the report JSON here")
    p.add_argument("--outputs", help="directory for best candidates")
    p.add_argument("--table", action="store_true", help="print a table instead of JSON")
    p.add_argument("--label", default="")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="compare two eval reports")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--label-a")
    p.add_argument("--label-b")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def _apply_defaults(parser: argparse.ArgumentParser, argv: list[str], config: dict[str, str],
                    env: dict[str, str]) -> None:
    """Install config-file and environment values as subcommand defaults.

    Unknown config keys are an error; environment values that the command
    does not take are ignored.
    """
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((x for x in argv if x in sub.choices), None)
    if command is None:
        return
    sp = sub.choices[command]
    actions = {a.dest: a for a in sp._actions}
    unknown = [k for k in config if k not in actions]
    if unknown:
        raise UsageError(f"unknown config key {unknown[0]!r} for {command}")
    values = {}
    for k, raw in {**config, **{k: v for k, v in env.items() if k in actions}}.items():
        try:
            values[k] = _coerce(actions[k], raw)
        except ValueError as exc:
            raise UsageError(f"bad value for {k}: {raw!r}") from exc
    sp.set_defaults(**values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        config = read_config(known.config) if known.config else {}
        env = {"seed": os.environ["TAU_SEED"]} if "TAU_SEED" in os.environ else {}
        _apply_defaults(parser, argv, config, env)
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, FileNotFoundError) as exc:
        print(f"tau: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
