"""Statement mapping between two method bodies.

Leaves match when their normalized token streams can be reconciled by a
syntactically valid replacement sequence (identifier renames, literal changes,
type substitutions, call-argument edits). Composites match only with at least
one matched nested statement, identical expression lists, or a recognized
block-to-block transformation. Candidate pairs are ranked by tier
(exact text, identical expressions, replacement-based), then fewer
replacements, higher child match ratio, smaller line distance; each stage
resolves the ranked candidates as a minimum-cost assignment so that the result
is optimal in (unmatched count, then total replacements).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import SizeLimit
from .javalex import Token, tokenize
from .javaparse import MethodDeclarationInfo, StatementNode

DEFAULT_NODE_LIMIT = 20_000

TRANSFORMATION_KINDS = (
    "if-else-if↔switch",
    "if↔while",
    "iterator-while↔enhanced-for",
    "for↔while",
    "for↔forEach-pipeline",
    "for↔if",
    "try↔try-with-resources",
    "try↔synchronized",
    "catch↔finally",
)

_STRUCTURAL_KEYWORDS = frozenset(
    ["if", "else", "for", "while", "do", "try", "catch", "finally", "switch",
     "case", "default", "return", "throw", "break", "continue", "synchronized", "class"]
)

_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {v: k for k, v in _OPEN.items()}


@dataclass(frozen=True)
class Replacement:
    left: str
    right: str
    category: str  # identifier | literal | type | method-call | expression


@dataclass(frozen=True)
class BlockTransformation:
    kind: str  # one of TRANSFORMATION_KINDS
    direction: str  # forward | inverse


@dataclass(eq=False)
class StatementMapping:
    left: StatementNode
    right: StatementNode
    replacements: list[Replacement] = field(default_factory=list)
    transformation: BlockTransformation | None = None


@dataclass(eq=False)
class MultiMapping:
    """One right-side node matched by several left-side nodes (a merge)."""

    lefts: list[StatementNode]
    right: StatementNode


@dataclass(eq=False)
class MappingSet:
    mappings: list[StatementMapping] = field(default_factory=list)
    unmatched_left: list[StatementNode] = field(default_factory=list)
    unmatched_right: list[StatementNode] = field(default_factory=list)
    multi: list[MultiMapping] = field(default_factory=list)

    def right_for(self, left: StatementNode) -> StatementNode | None:
        for m in self.mappings:
            if m.left is left:
                return m.right
        return None

    def mapping_for_right(self, right: StatementNode) -> StatementMapping | None:
        for m in self.mappings:
            if m.right is right:
                return m
        return None

    def pair_set(self) -> set[tuple[int, int]]:
        """(left id, right id) pairs, for structural comparisons in tests."""
        return {(id(m.left), id(m.right)) for m in self.mappings}


# -- token-level replacement engine -----------------------------------------


@functools.lru_cache(maxsize=8192)
def _toks(text: str) -> tuple[Token, ...]:
    return tuple(tokenize(text))


def _balanced(frag: tuple[Token, ...]) -> bool:
    stack: list[str] = []
    for t in frag:
        if t.text in _OPEN:
            stack.append(t.text)
        elif t.text in _CLOSE:
            if not stack or stack[-1] != _CLOSE[t.text]:
                return False
            stack.pop()
    return not stack


def _frag_valid(frag: tuple[Token, ...]) -> bool:
    if not _balanced(frag):
        return False
    for t in frag:
        if t.text == ";":
            return False
        if t.kind == "keyword" and t.text in _STRUCTURAL_KEYWORDS:
            return False
    return True


def _classify(
    lfrag: tuple[Token, ...],
    rfrag: tuple[Token, ...],
    lctx: tuple[str, str],
    rctx: tuple[str, str],
) -> Replacement:
    ltxt = " ".join(t.text for t in lfrag)
    rtxt = " ".join(t.text for t in rfrag)
    if len(lfrag) == 1 and len(rfrag) == 1:
        lt, rt = lfrag[0], rfrag[0]
        if lt.kind in ("number", "string", "char") and rt.kind in ("number", "string", "char"):
            return Replacement(ltxt, rtxt, "literal")
        if lt.kind == "ident" and rt.kind == "ident":
            if lctx[0] == "new" and rctx[0] == "new":
                return Replacement(ltxt, rtxt, "type")
            return Replacement(ltxt, rtxt, "identifier")
    joined = ltxt + " " + rtxt
    if "(" in joined:
        return Replacement(ltxt, rtxt, "method-call")
    return Replacement(ltxt, rtxt, "expression")


def compute_replacements(left_text: str, right_text: str) -> list[Replacement] | None:
    """Replacements turning one token stream into the other, or None if invalid.

    Requires at least one shared non-punctuation anchor token; pure inserts and
    deletes are admitted only as call-argument edits (adjacent to '(' ',' ')').
    """
    if left_text == right_text:
        return []
    import difflib

    lt, rt = _toks(left_text), _toks(right_text)
    sm = difflib.SequenceMatcher(a=[t.text for t in lt], b=[t.text for t in rt], autojunk=False)
    replacements: list[Replacement] = []
    anchored = False
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            if any(t.kind != "op" for t in lt[i1:i2]):
                anchored = True
            continue
        lfrag, rfrag = lt[i1:i2], rt[j1:j2]
        if not _frag_valid(lfrag) or not _frag_valid(rfrag):
            return None
        lctx = (lt[i1 - 1].text if i1 > 0 else "", lt[i2].text if i2 < len(lt) else "")
        rctx = (rt[j1 - 1].text if j1 > 0 else "", rt[j2].text if j2 < len(rt) else "")
        if tag in ("insert", "delete"):
            near_call = (tag == "insert" and (rctx[0] in ("(", ",") or rctx[1] in (")", ",")) and lctx[0] in ("(", ",", "")) or (
                tag == "delete" and (lctx[0] in ("(", ",") or lctx[1] in (")", ","))
            )
            # Argument-list edits must sit against call punctuation on the changed side.
            frag = rfrag if tag == "insert" else lfrag
            ctx = rctx if tag == "insert" else lctx
            if not (ctx[0] in ("(", ",") or ctx[1] in (")", ",")):
                return None
            replacements.append(
                Replacement(" ".join(t.text for t in lfrag), " ".join(t.text for t in rfrag), "method-call")
            )
            continue
        replacements.append(_classify(lfrag, rfrag, lctx, rctx))
    if not anchored:
        return None
    return replacements


def _expression_replacements(left: StatementNode, right: StatementNode) -> list[Replacement]:
    """Replacements over the expression lists; whole-expression fallback per slot."""
    reps: list[Replacement] = []
    for lexpr, rexpr in zip(left.expressions, right.expressions):
        if lexpr == rexpr:
            continue
        slot = compute_replacements(lexpr, rexpr)
        if slot is not None:
            reps.extend(slot)
        else:
            reps.append(Replacement(lexpr, rexpr, "expression"))
    longer = max(len(left.expressions), len(right.expressions))
    shorter = min(len(left.expressions), len(right.expressions))
    for _ in range(longer - shorter):
        reps.append(Replacement("", "", "expression"))
    return reps


# -- transformation detection ------------------------------------------------


def _leaf_texts(node: StatementNode) -> set[str]:
    return {n.text for n in node.walk() if n.kind == "leaf"}


def _ident_tokens(text: str) -> set[str]:
    return {t.text for t in _toks(text) if t.kind == "ident"}


def _shares_leaf(a: StatementNode, b: StatementNode) -> bool:
    return bool(_leaf_texts(a) & _leaf_texts(b))


def _shares_ident(a_text: str, b_text: str) -> bool:
    return bool(_ident_tokens(a_text) & _ident_tokens(b_text))


def _condition_overlap(a: StatementNode, b: StatementNode) -> bool:
    a_expr = " ".join(a.expressions)
    b_expr = " ".join(b.expressions)
    return a_expr == b_expr or _shares_ident(a_expr, b_expr)


def _ladder_subject(node: StatementNode) -> str | None:
    """Common equality-test subject of an if/else-if chain, if there is one."""
    subjects: set[str] = set()
    cursor: StatementNode | None = node
    while cursor is not None and cursor.kind == "if":
        cond = cursor.expressions[0] if cursor.expressions else ""
        toks = [t.text for t in _toks(cond)]
        if "==" in toks:
            subjects.add(" ".join(toks[: toks.index("==")]))
        elif "equals" in toks:
            subjects.add(" ".join(toks[: toks.index(".")]) if "." in toks else cond)
        else:
            return None
        nxt = cursor.children[cursor.branch_split :] if cursor.branch_split >= 0 else []
        cursor = nxt[0] if len(nxt) == 1 and nxt[0].kind == "if" else None
    return subjects.pop() if len(subjects) == 1 else None


def _is_pipeline_leaf(node: StatementNode) -> bool:
    if node.kind != "leaf":
        return False
    toks = [t.text for t in _toks(node.text)]
    return "forEach" in toks or ("stream" in toks and "->" in " ".join(toks)) or ("->" in toks and "." in toks)


def detect_transformation(left: StatementNode, right: StatementNode) -> BlockTransformation | None:
    """Recognize one of the supported block-to-block transformations."""
    forward = _detect_directed(left, right)
    if forward is not None:
        return BlockTransformation(forward, "forward")
    inverse = _detect_directed(right, left)
    if inverse is not None:
        return BlockTransformation(inverse, "inverse")
    return None


def _detect_directed(a: StatementNode, b: StatementNode) -> str | None:
    """Transformation kinds in their listed (forward) direction: a older, b newer."""
    ka, kb = a.kind, b.kind
    if ka == "if" and kb == "switch":
        subject = _ladder_subject(a)
        if subject is not None and b.expressions and b.expressions[0] == subject:
            return "if-else-if↔switch"
        if _shares_leaf(a, b):
            return "if-else-if↔switch"
    if ka == "if" and kb == "while" and (_condition_overlap(a, b) or _shares_leaf(a, b)):
        return "if↔while"
    if ka == "while" and kb == "enhanced-for":
        cond = a.expressions[0] if a.expressions else ""
        if "hasNext" in cond:
            return "iterator-while↔enhanced-for"
    if ka == "for" and kb == "while" and (_condition_overlap(a, b) or _shares_leaf(a, b)):
        return "for↔while"
    if ka in ("for", "enhanced-for") and _is_pipeline_leaf(b):
        if _shares_ident(" ".join(s.text for s in a.children) + " " + " ".join(a.expressions), b.text):
            return "for↔forEach-pipeline"
    if ka == "for" and kb == "if" and (_condition_overlap(a, b) or _shares_leaf(a, b)):
        return "for↔if"
    if ka == "try" and kb == "try" and not a.expressions and b.expressions:
        return "try↔try-with-resources"
    if ka == "try" and kb == "synchronized" and _shares_leaf(a, b):
        return "try↔synchronized"
    if ka == "catch" and kb == "finally" and _shares_leaf(a, b):
        return "catch↔finally"
    return None


# -- ratio --------------------------------------------------------------------


def child_match_ratio(left: StatementNode, right: StatementNode, mapping: MappingSet) -> float:
    """Matched descendant pairs over the larger descendant count."""
    pairs = {(id(m.left), id(m.right)) for m in mapping.mappings}
    return _ratio_from_pairs(left, right, pairs)


def _ratio_from_pairs(left: StatementNode, right: StatementNode, pairs: set[tuple[int, int]]) -> float:
    ldesc = left.descendants()
    rdesc = right.descendants()
    if not ldesc and not rdesc:
        return 1.0 if left.text == right.text else 0.0
    lids = {id(n) for n in ldesc}
    rids = {id(n) for n in rdesc}
    matched = sum(1 for (li, ri) in pairs if li in lids and ri in rids)
    return matched / max(len(ldesc), len(rdesc))


# -- assignment helpers --------------------------------------------------------

_UNMATCHED_COST = float(1 << 44)
_FORBIDDEN = float(1 << 50)


def _pack_cost(tier: int, repl: int, ratio: float, dist: int) -> float:
    ratio_term = int(round((1.0 - ratio) * 1000))
    return float(
        (tier << 40) + (min(repl, 1023) << 24) + (ratio_term << 13) + min(dist, 8191)
    )


def _assign(n_left: int, n_right: int, costs: dict[tuple[int, int], float]) -> list[tuple[int, int]]:
    """Max-cardinality min-cost pairing; returns index pairs."""
    if n_left == 0 or n_right == 0 or not costs:
        return []
    size = n_left + n_right
    matrix = np.full((size, size), 0.0)
    matrix[:n_left, :n_right] = _FORBIDDEN
    matrix[:n_left, n_right:] = _UNMATCHED_COST
    matrix[n_left:, :n_right] = _UNMATCHED_COST
    for (i, j), c in costs.items():
        matrix[i, j] = c
    rows, cols = linear_sum_assignment(matrix)
    out = []
    for r, c in zip(rows, cols):
        if r < n_left and c < n_right and matrix[r, c] < _UNMATCHED_COST:
            out.append((r, c))
    return out


# -- the mapper ----------------------------------------------------------------


def map_bodies(
    left_method: MethodDeclarationInfo,
    right_method: MethodDeclarationInfo,
    node_limit: int = DEFAULT_NODE_LIMIT,
) -> MappingSet:
    left_nodes = left_method.all_nodes()
    right_nodes = right_method.all_nodes()
    if len(left_nodes) + len(right_nodes) > node_limit:
        raise SizeLimit(f"{len(left_nodes)}+{len(right_nodes)} nodes exceeds limit {node_limit}")

    pairs: dict[int, int] = {}  # left index -> right index
    transformations: dict[tuple[int, int], BlockTransformation] = {}
    replacements: dict[tuple[int, int], list[Replacement]] = {}

    l_leaf = [i for i, n in enumerate(left_nodes) if n.kind == "leaf"]
    r_leaf = [j for j, n in enumerate(right_nodes) if n.kind == "leaf"]

    # Stage 1: leaves.
    leaf_costs: dict[tuple[int, int], float] = {}
    leaf_reps: dict[tuple[int, int], list[Replacement]] = {}
    for a, i in enumerate(l_leaf):
        ln = left_nodes[i]
        for b, j in enumerate(r_leaf):
            rn = right_nodes[j]
            reps = compute_replacements(ln.text, rn.text)
            if reps is None:
                continue
            tier = 0 if not reps else 2
            dist = abs(ln.start_line - rn.start_line)
            leaf_costs[(a, b)] = _pack_cost(tier, len(reps), 1.0, dist)
            leaf_reps[(a, b)] = reps
    for a, b in _assign(len(l_leaf), len(r_leaf), leaf_costs):
        i, j = l_leaf[a], r_leaf[b]
        pairs[i] = j
        replacements[(i, j)] = leaf_reps[(a, b)]

    # Stage 2: composites, to a fixpoint (an inner match can enable an outer one).
    l_comp = [i for i, n in enumerate(left_nodes) if n.kind != "leaf"]
    r_comp = [j for j, n in enumerate(right_nodes) if n.kind != "leaf"]
    while True:
        open_l = [i for i in l_comp if i not in pairs]
        taken_r = set(pairs.values())
        open_r = [j for j in r_comp if j not in taken_r]
        id_pairs = {
            (id(left_nodes[i]), id(right_nodes[j])) for i, j in pairs.items()
        }
        comp_costs: dict[tuple[int, int], float] = {}
        comp_meta: dict[tuple[int, int], tuple[list[Replacement], BlockTransformation | None]] = {}
        for a, i in enumerate(open_l):
            ln = left_nodes[i]
            for b, j in enumerate(open_r):
                rn = right_nodes[j]
                entry = _composite_candidate(ln, rn, id_pairs)
                if entry is None:
                    continue
                tier, reps, trans = entry
                ratio = _ratio_from_pairs(ln, rn, id_pairs)
                dist = abs(ln.start_line - rn.start_line)
                comp_costs[(a, b)] = _pack_cost(tier, len(reps), ratio, dist)
                comp_meta[(a, b)] = (reps, trans)
        assigned = _assign(len(open_l), len(open_r), comp_costs)
        if not assigned:
            break
        for a, b in assigned:
            i, j = open_l[a], open_r[b]
            pairs[i] = j
            reps, trans = comp_meta[(a, b)]
            replacements[(i, j)] = reps
            if trans is not None:
                transformations[(i, j)] = trans

    # Stage 3: loop <-> pipeline (composite <-> leaf is allowed only here).
    taken_r = set(pairs.values())
    for i in l_comp:
        if i in pairs or left_nodes[i].kind not in ("for", "enhanced-for", "while"):
            continue
        best: tuple[float, int] | None = None
        for j in r_leaf:
            if j in taken_r:
                continue
            trans = detect_transformation(left_nodes[i], right_nodes[j])
            if trans is None or trans.kind != "for↔forEach-pipeline":
                continue
            dist = abs(left_nodes[i].start_line - right_nodes[j].start_line)
            if best is None or dist < best[0]:
                best = (dist, j)
        if best is not None:
            j = best[1]
            pairs[i] = j
            taken_r.add(j)
            replacements[(i, j)] = []
            transformations[(i, j)] = detect_transformation(left_nodes[i], right_nodes[j])
    for j in r_comp:
        if j in taken_r or right_nodes[j].kind not in ("for", "enhanced-for", "while"):
            continue
        best = None
        for i in l_leaf:
            if i in pairs:
                continue
            trans = detect_transformation(left_nodes[i], right_nodes[j])
            if trans is None or trans.kind != "for↔forEach-pipeline":
                continue
            dist = abs(left_nodes[i].start_line - right_nodes[j].start_line)
            if best is None or dist < best[0]:
                best = (dist, i)
        if best is not None:
            i = best[1]
            pairs[i] = j
            taken_r.add(j)
            replacements[(i, j)] = []
            transformations[(i, j)] = detect_transformation(left_nodes[i], right_nodes[j])

    # Stage 4: merge scan -> multi-mappings.
    id_pairs = {(id(left_nodes[i]), id(right_nodes[j])) for i, j in pairs.items()}
    by_right: dict[int, int] = {j: i for i, j in pairs.items()}
    multi_groups: list[tuple[list[int], int]] = []
    consumed_left: set[int] = set()
    consumed_right: set[int] = set()
    for j in r_comp:
        if j not in by_right:
            continue
        rn = right_nodes[j]
        contributors = _merge_contributors(rn, left_nodes, right_nodes, pairs)
        if len(contributors) < 2 or by_right[j] not in contributors:
            continue
        if not _merge_covers(rn, [left_nodes[i] for i in contributors], left_nodes, right_nodes, pairs):
            continue
        multi_groups.append((sorted(contributors), j))
        consumed_left.update(contributors)
        consumed_right.add(j)

    result = MappingSet()
    for i, j in sorted(pairs.items()):
        if i in consumed_left or j in consumed_right:
            continue
        result.mappings.append(
            StatementMapping(
                left=left_nodes[i],
                right=right_nodes[j],
                replacements=replacements.get((i, j), []),
                transformation=transformations.get((i, j)),
            )
        )
    for lefts, j in multi_groups:
        result.multi.append(MultiMapping(lefts=[left_nodes[i] for i in lefts], right=right_nodes[j]))
    in_multi_left = {i for lefts, _ in multi_groups for i in lefts}
    mapped_left = set(pairs) | in_multi_left
    mapped_right = set(pairs.values()) | consumed_right
    result.unmatched_left = [n for i, n in enumerate(left_nodes) if i not in mapped_left]
    result.unmatched_right = [n for j, n in enumerate(right_nodes) if j not in mapped_right]
    return result


def _composite_candidate(
    ln: StatementNode, rn: StatementNode, id_pairs: set[tuple[int, int]]
) -> tuple[int, list[Replacement], BlockTransformation | None] | None:
    """(tier, replacements, transformation) when the pair is admissible, else None."""
    trans: BlockTransformation | None = None
    if ln.kind != rn.kind:
        trans = detect_transformation(ln, rn)
        if trans is None:
            return None
    if ln.text == rn.text:
        return (0, [], trans or detect_transformation(ln, rn))
    same_kind_trans = detect_transformation(ln, rn) if ln.kind == rn.kind else trans
    if ln.kind == rn.kind and ln.expressions == rn.expressions:
        return (1, [], same_kind_trans)
    lids = {id(n) for n in ln.descendants()}
    rids = {id(n) for n in rn.descendants()}
    has_child_pair = any(li in lids and ri in rids for (li, ri) in id_pairs)
    if not has_child_pair and (trans or same_kind_trans) is None:
        return None
    reps = _expression_replacements(ln, rn)
    return (2, reps, trans or same_kind_trans)


def _merge_contributors(
    rn: StatementNode, left_nodes: list[StatementNode], right_nodes: list[StatementNode], pairs: dict[int, int]
) -> set[int]:
    """Minimal same-kind left composites with a mapped child inside rn's subtree."""
    rids = {id(n) for n in rn.descendants()}
    child_source_ids = {id(left_nodes[i]) for i, j in pairs.items() if id(right_nodes[j]) in rids}
    contributors: set[int] = set()
    for i, ln in enumerate(left_nodes):
        if ln.kind != rn.kind:
            continue
        ldesc_ids = {id(n) for n in ln.descendants()}
        if ldesc_ids & child_source_ids:
            contributors.add(i)
    # Keep only the deepest contributors (drop ancestors of other contributors).
    out = set(contributors)
    for i in contributors:
        desc_ids = {id(n) for n in left_nodes[i].descendants()}
        for k in contributors:
            if k != i and id(left_nodes[k]) in desc_ids:
                out.discard(i)
                break
    return out


def _merge_covers(
    rn: StatementNode,
    group: list[StatementNode],
    left_nodes: list[StatementNode],
    right_nodes: list[StatementNode],
    pairs: dict[int, int],
) -> bool:
    """Every mapped child of rn must map to a child of some group member."""
    rids = {id(n) for n in rn.descendants()}
    group_ids = {id(g) for g in group}
    group_desc = {id(n) for g in group for n in g.descendants()} | group_ids
    for i, j in pairs.items():
        if id(right_nodes[j]) in rids and id(left_nodes[i]) not in group_desc:
            return False
    return True
