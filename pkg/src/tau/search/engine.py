"""The migration search.

Nodes of the block tree are visited bottom up. A node's candidates are
built from combinations of its children's candidates: the children's
annotations are transplanted into the node's block, the node's own holes
are filled left to right by the predictor, and variable declarations are
filled by local inference. At the root every candidate program is type
checked and ranked by (type errors, typedness, text).
"""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from tau.block_tree import BlockNode, attach_usage_comments, build_tree, traversal_order
from tau.lang import ast as A
from tau.lang.parser import MTSSyntaxError, parse, parse_lenient
from tau.lang.sites import AnnotationSite, SiteKey, apply_annotations, find_annotation_sites
from tau.predictor.base import HOLE, PredictorFailure, PredictRequest
from tau.predictor.typeparse import NoType, extract_first_type
from tau.search.combine import combine_children
from tau.search.config import SearchConfig
from tau.search.window import truncate_split
from tau.typedness import TypednessReport, score_types
from tau.typesys.checker import MTSChecker, run_checker
from tau.typesys.texpr import ANY, NotAType, TypeExpr, parse_type_expr

log = logging.getLogger(__name__)

Value = Union[TypeExpr, str]  # a str is a raw completion spliced verbatim


class TransplantMismatch(ValueError):
    """A child's annotation has no matching site in the parent block."""


@dataclass
class Candidate:
    text: str
    annotations: dict[SiteKey, Value]
    typedness: TypednessReport
    type_errors: Optional[int] = None
    syntax_errors: int = 0
    origin: tuple = ()

    @property
    def score(self) -> float:
        return self.typedness.score

    def rank_key(self) -> tuple:
        return rank_key(self)


def rank_key(c) -> tuple:
    """Fewer type errors first, then lower typedness, then text.

    Candidates that do not parse sort after every parseable one.
    """
    return (c.syntax_errors > 0, c.syntax_errors, c.type_errors or 0, c.typedness.score, c.text)


def rank(candidates: list) -> list:
    return sorted(candidates, key=rank_key)


def _value_type(v: Value) -> Optional[TypeExpr]:
    if isinstance(v, str):
        try:
            return parse_type_expr(v)
        except NotAType:
            return ANY
    return v


def _is_weak(v: Optional[Value]) -> bool:
    return v is None or _value_type(v) == ANY


# -- text-level transplanting -------------------------------------------------------------


def block_sites(text: str, prefix: tuple[str, ...] = (), fragment: str = "program") -> list[AnnotationSite]:
    return find_annotation_sites(parse(text, fragment), prefix)


def transplant(parent_block: str, child: Union[Candidate, Mapping[SiteKey, Value]],
               prefix: tuple[str, ...] = (), fragment: str = "program",
               inferred: Optional[Mapping[SiteKey, TypeExpr]] = None) -> str:
    """Copy a child candidate's annotations into the parent's copy of the child.

    Sites are matched through their keys, built from declaration names.
    Variable sites left ``any`` or empty take ``inferred[key]`` when given.
    """
    annotations = child.annotations if isinstance(child, Candidate) else child
    sites = block_sites(parent_block, prefix, fragment)
    keys = {s.key: s for s in sites}
    mapping: dict[SiteKey, Value] = {}
    for k, v in annotations.items():
        if k not in keys:
            raise TransplantMismatch(f"no site {k} in parent block")
        mapping[k] = v
    for k, s in keys.items():
        if s.site_kind == "VarDecl" and inferred and k in inferred and _is_weak(mapping.get(k, s.type)):
            if inferred[k] != ANY:
                mapping[k] = inferred[k]
    return apply_annotations(parent_block, sites, mapping)


# -- the search ---------------------------------------------------------------------------


@dataclass
class NodeStats:
    name: str
    kind: str
    combinations: int = 0
    candidates: int = 0
    predictor_calls: int = 0
    predictor_failures: int = 0
    parse_failures: int = 0


@dataclass
class MigrationResult:
    best: Candidate
    all: list[Candidate]
    tree: BlockNode
    order: list[str]
    stats: list[NodeStats]
    trace: list[dict] = field(default_factory=list)
    config: Optional[SearchConfig] = None

    def manifest(self) -> dict:
        return {
            "config": self.config.to_dict() if self.config else None,
            "order": self.order,
            "nodes": [vars(s) for s in self.stats],
            "root_candidates": len(self.all),
            "best": {"type_errors": self.best.type_errors, "syntax_errors": self.best.syntax_errors,
                     "typedness": self.best.typedness.to_dict()},
        }


def node_rng(seed: int, node: BlockNode) -> np.random.Generator:
    label = "/".join(node.path) if node.path else node.name
    return np.random.default_rng([seed, zlib.crc32(label.encode())])


class Migrator:
    def __init__(self, program: A.Program, predictor, cfg: SearchConfig, checker=None):
        if HOLE in program.text:
            raise ValueError(f"source already contains the hole marker {HOLE!r}")
        self.program = program
        self.text = program.text
        self.predictor = predictor
        self.cfg = cfg
        self.checker = checker or MTSChecker()
        self.sites = find_annotation_sites(program)
        self.trace: list[dict] = []
        self.stats: dict[int, NodeStats] = {}
        self.baseline = cfg.mode == "baseline"
        if self.baseline:
            self.tree = BlockNode("Root", "root", (0, len(self.text)), sites=list(self.sites))
        else:
            self.tree = build_tree(program)
            if cfg.usages:
                attach_usage_comments(self.tree, program, cfg.max_usages, cfg.window)
        self._infer_cache: dict[str, dict[SiteKey, TypeExpr]] = {}

    # rendering ------------------------------------------------------------------------------

    def render(self, node: BlockNode, mapping: Mapping[SiteKey, Value]) -> str:
        sites = node.subtree_sites()
        if node.kind == "VarGroup":
            parts = []
            for a, b in node.parts:
                inside = [s for s in sites if a <= s.insert_offset <= b]
                parts.append(apply_annotations(self.text[a:b], inside, mapping, offset=a))
            return "\n".join(parts) + "\n"
        a, b = node.span
        return apply_annotations(self.text[a:b], sites, mapping, offset=a)

    def initial(self, node: BlockNode) -> dict[SiteKey, Value]:
        """Annotations already written in the source."""
        return {s.key: s.type for s in node.sites if s.type is not None}

    def typedness(self, node: BlockNode, mapping: Mapping[SiteKey, Value]) -> TypednessReport:
        out = []
        for s in node.subtree_sites():
            v = mapping.get(s.key)
            if self.baseline and s.site_kind == "VarDecl":
                v = None
            out.append(None if v is None else _value_type(v))
        return score_types(out)

    # inference --------------------------------------------------------------------------------

    def inferred_vars(self, mapping: Mapping[SiteKey, Value]) -> dict[SiteKey, TypeExpr]:
        full = self.render(self.tree, mapping)
        if full not in self._infer_cache:
            out: dict[SiteKey, TypeExpr] = {}
            try:
                program = parse(full)
            except MTSSyntaxError:
                program = None
            if program is not None:
                local = run_checker(program).local_types
                for s in find_annotation_sites(program):
                    if s.site_kind == "VarDecl" and s.owner in local:
                        out[s.key] = local[s.owner]
            self._infer_cache[full] = out
        return self._infer_cache[full]

    def fill_vars(self, node: BlockNode, mapping: dict[SiteKey, Value]) -> dict[SiteKey, Value]:
        var_keys = [s.key for s in node.subtree_sites()
                    if s.site_kind == "VarDecl" and _is_weak(mapping.get(s.key))]
        if not var_keys:
            return mapping
        inferred = self.inferred_vars(mapping)
        out = dict(mapping)
        for k in var_keys:
            t = inferred.get(k, ANY)
            if t != ANY:
                out[k] = t
        return out

    # prediction -------------------------------------------------------------------------------

    def model_sites(self, node: BlockNode) -> list[AnnotationSite]:
        return [s for s in node.sites if s.site_kind != "VarDecl" and s.type is None]

    def prompt(self, node: BlockNode, mapping: Mapping[SiteKey, Value], site: AnnotationSite) -> tuple[str, str]:
        text = self.render(node, {**mapping, site.key: HOLE})
        i = text.index(": " + HOLE) + 2
        prefix, suffix = text[:i], text[i + len(HOLE):]
        if node.usage_comment:
            prefix = node.usage_comment + "\n" + prefix
        return truncate_split(prefix, suffix, self.cfg.window)

    def ask(self, node: BlockNode, mapping, site: AnnotationSite, n: int, chain: int) -> list[Value]:
        prefix, suffix = self.prompt(node, mapping, site)
        req = PredictRequest(prefix, suffix, n, self.cfg.temperature, self.cfg.max_tokens,
                             context={"node_name": node.name, "site_index": site.site_index,
                                      "site_key": site.key, "chain": chain, "mode": self.cfg.mode})
        st = self.stats[id(node)]
        st.predictor_calls += 1
        if self.cfg.trace:
            self.trace.append({"event": "prompt", "node": node.name, "site": site.site_index,
                               "chain": chain, "prefix": prefix, "suffix": suffix})
        completions = self.predictor.predict(req).completions[:n]
        if not completions:
            raise PredictorFailure("empty response")
        out: list[Value] = []
        for c in completions:
            if not self.cfg.type_parser:
                out.append(c)
                continue
            try:
                out.append(extract_first_type(c))
            except NoType:
                st.parse_failures += 1
                out.append(ANY)
        return out

    def fill_own(self, node: BlockNode, base: dict[SiteKey, Value]) -> list[tuple[dict, int]]:
        holes = self.model_sites(node)
        if not holes:
            return [(base, 0)]
        st = self.stats[id(node)]
        try:
            first = self.ask(node, base, holes[0], self.cfg.num_comps, 0)
            chains = []
            for c, value in enumerate(first):
                m = {**base, holes[0].key: value}
                for site in holes[1:]:
                    m[site.key] = self.ask(node, m, site, 1, c)[0]
                chains.append((m, c))
            return chains
        except PredictorFailure as exc:
            st.predictor_failures += 1
            log.info("predictor failed on %s: %s", node.name, exc)
            return [(base, -1)]

    # nodes ----------------------------------------------------------------------------------------

    def process(self, node: BlockNode) -> list[Candidate]:
        st = self.stats.setdefault(id(node), NodeStats(node.name, node.kind))
        if self.cfg.trace:
            self.trace.append({"event": "visit", "node": node.name})
        child_lists = [c.candidates for c in node.children]
        combos = combine_children(child_lists, self.cfg, node_rng(self.cfg.seed, node)) if child_lists else [()]
        st.combinations = len(combos)
        own = self.initial(node)
        subtree = {s.key for s in node.subtree_sites()}
        out: list[Candidate] = []
        seen: set[str] = set()
        for combo in combos:
            merged: dict[SiteKey, Value] = dict(own)
            for child_cands, idx in zip(child_lists, combo):
                for k, v in child_cands[idx].annotations.items():
                    if k not in subtree:
                        raise TransplantMismatch(f"no site {k} in block {node.name}")
                    merged[k] = v
            for mapping, comp in self.fill_own(node, merged):
                if not self.baseline:
                    mapping = self.fill_vars(node, mapping)
                text = self.render(node, mapping)
                if text in seen:
                    continue
                seen.add(text)
                out.append(Candidate(text, mapping, self.typedness(node, mapping), origin=(combo, comp)))
        node.candidates = out
        st.candidates = len(out)
        return out

    def evaluate(self, c: Candidate) -> Candidate:
        program, errors = parse_lenient(c.text)
        if errors:
            c.syntax_errors = len(errors)
            c.type_errors = None
        else:
            c.type_errors = len(self.checker.check(program))
        return c

    def run(self) -> MigrationResult:
        order = traversal_order(self.tree)
        for node in order:
            self.process(node)
        stats = [self.stats[id(n)] for n in order]
        calls = sum(s.predictor_calls for s in stats)
        if calls and all(s.predictor_failures and s.predictor_failures == s.predictor_calls for s in stats
                         if s.predictor_calls):
            raise PredictorFailure("predictor failed on every node")
        ranked = rank([self.evaluate(c) for c in self.tree.candidates])
        return MigrationResult(ranked[0], ranked, self.tree, [n.name for n in order], stats, self.trace, self.cfg)


def migrate(program: Union[A.Program, str], predictor, cfg: Optional[SearchConfig] = None,
            checker=None) -> MigrationResult:
    if isinstance(program, str):
        program = parse(program)
    return Migrator(program, predictor, cfg or SearchConfig(), checker).run()


def process_leaf(node: BlockNode, predictor, cfg: SearchConfig, program: A.Program) -> list[Candidate]:
    """Candidates for one childless node of ``program``'s tree."""
    if node.children:
        raise ValueError("process_leaf expects a node without children")
    m = Migrator(program, predictor, cfg)
    target = next((n for n in m.tree.walk() if n.span == node.span and n.name == node.name), None)
    if target is None:
        raise ValueError(f"node {node.name} does not belong to the program")
    return m.process(target)
