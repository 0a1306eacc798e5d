# -*- coding: utf-8-*-
"""
Module : RuleEngine
Author : InvoiceReader team
Description :
    Human-readable rules for block type detection and seller/buyer/delivery
    classification. One rule reads

        seller info -> block_annot.data in [ORGANIZATION, PERSON] and
            SELLER in top_blocks.block_annot.keyword and top_blocks.num_lines == 1

    The target is the text before "->", the condition is parsed with lark into
    an immutable expression tree that can be printed back and evaluated on a
    block of a page. Block type rules are additive, role rules stop at the first
    match.
"""
import functools
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple, Union

# Lark imports
from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

# Local imports
from InvoiceReader.DocModel import AnnotationKind, Block, BlockType, Direction, Page, Role
from InvoiceReader.Errors import ConfigError, EvalError, ParseError, StageError
from InvoiceReader.PipelineConfig import resource_path

__all__ = [
    "Accessor",
    "Literal",
    "ListExpr",
    "Compare",
    "InList",
    "Contains",
    "Predicate",
    "And",
    "Or",
    "Not",
    "Rule",
    "NEIGHBOR_ROOTS",
    "PREDICATES",
    "parse_rule",
    "parse_rules",
    "format_rule",
    "eval_rule",
    "detect_block_types",
    "classify_roles",
    "is_role_candidate",
    "load_rules",
]

logger = logging.getLogger(__name__)

_GRAMMAR = r"""
?start: or_expr
?or_expr: and_expr (_OR and_expr)*
?and_expr: not_expr (_AND not_expr)*
?not_expr: _NOT not_expr                -> negation
         | atom
?atom: operand _IN operand              -> membership
     | operand COMPOP operand           -> compare
     | NAME "(" [operand ("," operand)*] ")"   -> predicate
     | "(" or_expr ")"
?operand: path
        | STRING                        -> string
        | INT                           -> integer
        | "[" [operand ("," operand)*] "]"   -> list
path: NAME ("." NAME)*

_AND: "and"
_OR: "or"
_NOT: "not"
_IN: "in"
COMPOP: "==" | "!=" | "<=" | ">=" | "<" | ">"
NAME: /[A-Za-z_][A-Za-z0-9_]*/
INT: /-?[0-9]+/
STRING: /"(?:[^"\\]|\\.)*"/
COMMENT: /#[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(_GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=False)

NEIGHBOR_ROOTS = {
    "top_blocks": Direction.TOP,
    "bottom_blocks": Direction.BOTTOM,
    "left_blocks": Direction.LEFT,
    "right_blocks": Direction.RIGHT,
    "bottom_right_blocks": Direction.BOTTOM_RIGHT,
}
_ANNOT_ATTRS = {
    "data": (AnnotationKind.DATATYPE, AnnotationKind.ENTITY, AnnotationKind.ADDRESS_PART),
    "keyword": (AnnotationKind.KEYWORD,),
    "entity": (AnnotationKind.ENTITY,),
    "address": (AnnotationKind.ADDRESS_PART,),
    "datatype": (AnnotationKind.DATATYPE,),
}
_LEAF_ROOTS = ("num_lines", "zone_v", "zone_h", "block_types", "role")
_PAGE_ATTRS = ("number", "num_blocks")
# predicate name -> argument kinds, "role" or "list"
PREDICATES = {
    "aligned_with": ("role",),
    "content_disjoint": ("role", "list"),
    "role_present": ("role",),
    "first_candidate": (),
}
_TOKEN_NAMES = {"LSQB": "[", "RSQB": "]", "LPAR": "(", "RPAR": ")", "COMMA": ",", "DOT": ".",
                "_AND": "and", "_OR": "or", "_NOT": "not", "_IN": "in", "$END": "end of input"}
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEYWORDS = frozenset({"and", "or", "not", "in"})


# --------------------------------------------------------------- AST -------

@dataclass(frozen=True)
class Accessor:
    """Accessor path such as top_blocks.block_annot.keyword"""

    parts: Tuple[str, ...]
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Literal:
    value: Union[str, int]
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ListExpr:
    items: Tuple[Literal, ...]
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Compare:
    op: str
    left: Accessor
    right: Literal
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class InList:
    left: Accessor
    items: ListExpr
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Contains:
    item: Literal
    right: Accessor
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Predicate:
    name: str
    args: Tuple[Union[Literal, ListExpr], ...]
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class And:
    items: tuple
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Or:
    items: tuple
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Not:
    operand: object
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Rule:
    """
    Rule : target label and condition.
    target keeps the raw text before "->" ("seller info", "SELLER").
    """

    target: str
    condition: object
    pos: Tuple[int, int] = field(default=(1, 1), compare=False)

    @property
    def block_type(self) -> BlockType:
        name = re.sub(r"\s+", "_", self.target.strip()).upper()
        try:
            block_type = BlockType(name)
        except ValueError:
            raise ConfigError(f"rule target '{self.target}' is not a block type") from None
        if block_type == BlockType.EMPTY:
            raise ConfigError("EMPTY is assigned automatically and cannot be a rule target")
        return block_type

    @property
    def role(self) -> Role:
        try:
            role = Role(self.target.strip().upper())
        except ValueError:
            raise ConfigError(f"rule target '{self.target}' is not a role") from None
        if role == Role.NONE:
            raise ConfigError("NONE cannot be a rule target")
        return role


# ------------------------------------------------------------- parsing -----

class _Offset:
    """Maps positions inside the condition text back to the rule text"""

    def __init__(self, line: int, column: int):
        self.line = line
        self.column = column

    def __call__(self, line: int, column: int) -> Tuple[int, int]:
        if line == 1:
            return self.line, self.column + column - 1
        return self.line + line - 1, column


def _unquote(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text[1:-1])


class _ToAst(Transformer):
    def __init__(self, offset: _Offset):
        super().__init__()
        self.offset = offset

    def _pos(self, meta) -> Tuple[int, int]:
        if getattr(meta, "empty", True):
            return 0, 0
        return self.offset(meta.line, meta.column)

    def _error(self, message: str, pos: Tuple[int, int], expected=()):
        raise ParseError(message, pos[0], pos[1], expected)

    @v_args(meta=True)
    def path(self, meta, children):
        return Accessor(tuple(str(c) for c in children), self._pos(meta))

    def string(self, children):
        token = children[0]
        return Literal(_unquote(str(token)), self.offset(token.line, token.column))

    def integer(self, children):
        token = children[0]
        return Literal(int(token), self.offset(token.line, token.column))

    @v_args(meta=True)
    def list(self, meta, children):
        return ListExpr(tuple(self._literal(c) for c in children), self._pos(meta))

    def _literal(self, node) -> Literal:
        if isinstance(node, Literal):
            return node
        if isinstance(node, Accessor) and len(node.parts) == 1:
            return Literal(node.parts[0], node.pos)
        self._error("expected a literal", node.pos, ("NAME", "STRING", "INT"))

    def _accessor(self, node) -> Accessor:
        if not isinstance(node, Accessor):
            self._error("expected an accessor path", node.pos, ("NAME",))
        _check_path(node)
        return node

    @v_args(meta=True)
    def membership(self, meta, children):
        left, right = children
        if isinstance(right, ListExpr):
            return InList(self._accessor(left), right, self._pos(meta))
        if isinstance(right, Accessor):
            return Contains(self._literal(left), self._accessor(right), self._pos(meta))
        self._error("right side of 'in' must be a list or an accessor path", right.pos, ("[", "NAME"))

    @v_args(meta=True)
    def compare(self, meta, children):
        left, op, right = children
        return Compare(str(op), self._accessor(left), self._literal(right), self._pos(meta))

    @v_args(meta=True)
    def predicate(self, meta, children):
        name, args = children[0], children[1:]
        pos = self.offset(name.line, name.column)
        if str(name) not in PREDICATES:
            self._error(f"unknown predicate '{name}'", pos, PREDICATES)
        kinds = PREDICATES[str(name)]
        if len(args) != len(kinds):
            self._error(f"{name}() takes {len(kinds)} argument(s), got {len(args)}", pos)
        checked = []
        for kind, arg in zip(kinds, args):
            if kind == "list":
                if not isinstance(arg, ListExpr):
                    self._error(f"{name}() expects a list", arg.pos, ("[",))
                checked.append(arg)
                continue
            literal = self._literal(arg)
            if str(literal.value).upper() not in ("SELLER", "BUYER", "DELIVERY"):
                self._error(f"'{literal.value}' is not a role", literal.pos, ("SELLER", "BUYER", "DELIVERY"))
            checked.append(literal)
        return Predicate(str(name), tuple(checked), pos)

    @v_args(meta=True)
    def negation(self, meta, children):
        return Not(children[0], self._pos(meta))

    @v_args(meta=True)
    def and_expr(self, meta, children):
        return And(tuple(_flatten(children, And)), self._pos(meta))

    @v_args(meta=True)
    def or_expr(self, meta, children):
        return Or(tuple(_flatten(children, Or)), self._pos(meta))


def _flatten(children, kind) -> list:
    out = []
    for child in children:
        out.extend(child.items if isinstance(child, kind) else (child,))
    return out


def _check_path(path: Accessor):
    """Unknown accessors are rejected while parsing"""
    parts = list(path.parts)
    while parts and parts[0] in NEIGHBOR_ROOTS:
        parts.pop(0)
    roots = set(NEIGHBOR_ROOTS) | {"block_annot", "page"} | set(_LEAF_ROOTS)
    if not parts:
        raise ParseError("a neighbor accessor needs an attribute", *path.pos, roots - set(NEIGHBOR_ROOTS))
    head, rest = parts[0], parts[1:]
    if head == "block_annot":
        if len(rest) > 1 or (rest and rest[0] not in _ANNOT_ATTRS):
            raise ParseError(f"unknown block_annot attribute '{'.'.join(rest)}'", *path.pos, _ANNOT_ATTRS)
    elif head == "page":
        if len(rest) != 1 or rest[0] not in _PAGE_ATTRS:
            raise ParseError(f"unknown page attribute '{'.'.join(rest)}'", *path.pos, _PAGE_ATTRS)
    elif head in _LEAF_ROOTS:
        if rest:
            raise ParseError(f"'{head}' has no attributes", *path.pos)
    else:
        raise ParseError(f"unknown accessor root '{head}'", *path.pos, roots)


def _blank_comments(text: str) -> str:
    return re.sub(r"#[^\n]*", lambda m: " " * len(m.group(0)), text)


def _end_position(text: str, first_line: int) -> Tuple[int, int]:
    lines = text.split("\n")
    return first_line + len(lines) - 1, len(lines[-1]) + 1


def _expected_names(names) -> frozenset:
    return frozenset(_TOKEN_NAMES.get(n, n) for n in (names or ()))


def _parse_condition(text: str, offset: _Offset):
    try:
        tree = _PARSER.parse(text)
    except (UnexpectedEOF, UnexpectedToken) as e:
        expected = _expected_names(getattr(e, "expected", ()))
        token = getattr(e, "token", None)
        if isinstance(e, UnexpectedEOF) or (token is not None and token.type == "$END"):
            line, column = _end_position(text, offset.line)
            if line == offset.line:
                column += offset.column - 1
            raise ParseError("unexpected end of input", line, column, expected) from None
        line, column = offset(e.line, e.column)
        raise ParseError(f"unexpected token {str(token)!r}", line, column, expected) from None
    except UnexpectedCharacters as e:
        line, column = offset(e.line, e.column)
        raise ParseError(f"unexpected character {e.char!r}", line, column, _expected_names(e.allowed)) from None
    except UnexpectedInput as e:
        line, column = offset(max(1, e.line), max(1, e.column))
        raise ParseError(str(e), line, column) from None
    try:
        return _ToAst(offset).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise e.orig_exc from None
        raise


def parse_rule(text: str, first_line: int = 1) -> Rule:
    """
    Parses one rule "target -> condition". The condition may span several
    lines and '#' starts a comment. Raises ParseError with the position and
    the set of expected tokens.
    """
    clean = _blank_comments(text)
    arrow = clean.find("->")
    if arrow < 0:
        line, column = _end_position(clean, first_line)
        raise ParseError("missing '->' after the rule target", line, column, ("->",))
    target = clean[:arrow].strip()
    if not target:
        raise ParseError("missing rule target before '->'", first_line, 1, ("TARGET",))
    if "\n" in target:
        raise ParseError("rule target must fit on one line", first_line, 1, ("->",))
    head = clean[:arrow + 2]
    line = first_line + head.count("\n")
    column = len(head.rsplit("\n", 1)[-1]) + 1
    condition = _parse_condition(clean[arrow + 2:], _Offset(line, column))
    target_line = first_line + clean[:clean.find(target)].count("\n")
    return Rule(target, condition, (target_line, 1))


def parse_rules(text: str) -> List[Rule]:
    """
    Parses a rule file. A line containing "->" starts a new rule; following
    lines without "->" continue its condition.
    """
    clean = _blank_comments(text)
    chunks: List[Tuple[int, List[str]]] = []
    for number, line in enumerate(clean.split("\n"), start=1):
        if "->" in line:
            chunks.append((number, [line]))
        elif chunks:
            chunks[-1][1].append(line)
        elif line.strip():
            raise ParseError("text before the first rule", number, 1, ("->",))
    return [parse_rule("\n".join(lines), first_line) for first_line, lines in chunks]


def load_rules(name: str, base: Union[str, Path, None] = None) -> List[Rule]:
    """Loads config/rules/<name>.rules (block_types, roles or global)"""
    path = resource_path("rules", f"{name}.rules", base=base)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read rule file {path}: {e}") from e
    rules = parse_rules(text)
    logger.debug("Loaded %d rule(s) from %s", len(rules), path)
    return rules


# ------------------------------------------------------------ printing -----

def _format_literal(value: Union[str, int]) -> str:
    if isinstance(value, int):
        return str(value)
    if _IDENTIFIER.fullmatch(value) and value not in _KEYWORDS:
        return value
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format(node, parent: int = 0) -> str:
    # precedence: or 1, and 2, not 3, atoms 4
    if isinstance(node, Or):
        text, own = " or ".join(_format(i, 1) for i in node.items), 1
    elif isinstance(node, And):
        text, own = " and ".join(_format(i, 2) for i in node.items), 2
    elif isinstance(node, Not):
        text, own = "not " + _format(node.operand, 3), 3
    elif isinstance(node, Compare):
        text, own = f"{'.'.join(node.left.parts)} {node.op} {_format_literal(node.right.value)}", 4
    elif isinstance(node, InList):
        text, own = f"{'.'.join(node.left.parts)} in {_format(node.items)}", 4
    elif isinstance(node, Contains):
        text, own = f"{_format_literal(node.item.value)} in {'.'.join(node.right.parts)}", 4
    elif isinstance(node, Predicate):
        text, own = f"{node.name}({', '.join(_format(a) for a in node.args)})", 4
    elif isinstance(node, ListExpr):
        text, own = "[" + ", ".join(_format_literal(i.value) for i in node.items) + "]", 4
    elif isinstance(node, Literal):
        text, own = _format_literal(node.value), 4
    else:
        raise EvalError(f"cannot print node {node!r}")
    return f"({text})" if own <= parent and own < 4 else text


def format_rule(rule: Rule) -> str:
    return f"{rule.target} -> {_format(rule.condition)}"


# ---------------------------------------------------------- evaluation -----

_ABSENT = object()


def _norm(value):
    if isinstance(value, str):
        return value.upper()
    if isinstance(value, frozenset):
        return frozenset(_norm(v) for v in value)
    return value


def _resolve(parts: Sequence[str], block: Block, page: Page):
    head, rest = parts[0], parts[1:]
    if head in NEIGHBOR_ROOTS:
        neighbor_id = block.neighbor(NEIGHBOR_ROOTS[head])
        neighbor = page.block_by_id(neighbor_id) if neighbor_id is not None else None
        if neighbor is None:
            return _ABSENT
        return _resolve(rest, neighbor, page)
    if head == "block_annot":
        kinds = _ANNOT_ATTRS[rest[0]] if rest else tuple(AnnotationKind)
        return frozenset(a.label.upper() for a in block.annotations if a.kind in kinds)
    if head == "num_lines":
        return len(block.lines)
    if head == "zone_v":
        return block.zone_v.value.upper() if block.zone_v else _ABSENT
    if head == "zone_h":
        return block.zone_h.value.upper() if block.zone_h else _ABSENT
    if head == "block_types":
        return frozenset(t.value for t in block.block_types)
    if head == "role":
        return (block.role or Role.NONE).value
    if head == "page":
        return page.number if rest[0] == "number" else len(page.blocks)
    raise EvalError(f"no accessor for '{'.'.join(parts)}'")


_ORDER_OPS: Dict[str, Callable[[int, int], bool]] = {
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


def _compare(op: str, value, literal) -> bool:
    if op in ("==", "!="):
        equal = value == frozenset({literal}) if isinstance(value, frozenset) else value == literal
        return equal if op == "==" else not equal
    if isinstance(value, int) and isinstance(literal, int):
        return _ORDER_OPS[op](value, literal)
    return False


def _has_vertical_alignment(a: Block, b: Block) -> bool:
    return a.bbox.horizontal_overlap(b.bbox) >= 0.5 * min(a.bbox.width, b.bbox.width)


def _has_horizontal_alignment(a: Block, b: Block) -> bool:
    return a.bbox.vertical_overlap(b.bbox) >= 0.5 * min(a.bbox.height, b.bbox.height)


_CONTENT: Dict[str, Callable[[Block], bool]] = {
    "COMPANY": lambda b: "ORGANIZATION" in b.labels(AnnotationKind.ENTITY),
    "ADDRESS": lambda b: bool(b.annotations_of(AnnotationKind.ADDRESS_PART)),
    "ID": lambda b: "COMPANY ID" in b.labels(AnnotationKind.DATATYPE, AnnotationKind.KEYWORD),
    "VAT": lambda b: "VAT NUMBER" in b.labels(AnnotationKind.DATATYPE),
    "VAT NUMBER": lambda b: "VAT NUMBER" in b.labels(AnnotationKind.DATATYPE),
}


def _has_content(block: Block, category: str) -> bool:
    check = _CONTENT.get(category)
    if check is not None:
        return check(block)
    return category in {label.upper() for label in block.labels()}


_CONTACT_DATA = frozenset({"EMAIL", "PHONE", "URL", "VAT NUMBER"})


def is_role_candidate(block: Block) -> bool:
    """Blocks typed as party info or carrying party or contact content take part in role classification"""
    if block.block_types & {BlockType.SELLER_INFO, BlockType.BUYER_INFO, BlockType.DELIVERY_INFO}:
        return True
    return bool({"ORGANIZATION", "PERSON"} & block.labels(AnnotationKind.ENTITY)
                or _CONTACT_DATA & block.labels(AnnotationKind.DATATYPE)
                or block.annotations_of(AnnotationKind.ADDRESS_PART))


def _reading_order(a: Block, b: Block) -> int:
    if _has_horizontal_alignment(a, b):
        return (a.bbox.left > b.bbox.left) - (a.bbox.left < b.bbox.left) or a.id - b.id
    return (a.bbox.top > b.bbox.top) - (a.bbox.top < b.bbox.top) or a.id - b.id


def _ordered(blocks: Sequence[Block]) -> List[Block]:
    return sorted(blocks, key=functools.cmp_to_key(_reading_order))


def _predicate(node: Predicate, block: Block, page: Page) -> bool:
    if node.name == "first_candidate":
        pending = [b for b in _ordered(page.blocks) if b.role is None and is_role_candidate(b)]
        return bool(pending) and pending[0].id == block.id
    role = Role(str(node.args[0].value).upper())
    others = [b for b in page.blocks if b.role == role and b.id != block.id]
    if node.name == "role_present":
        return bool(others)
    if node.name == "aligned_with":
        return any(_has_vertical_alignment(block, o) or _has_horizontal_alignment(block, o) for o in others)
    if node.name == "content_disjoint":
        categories = [str(i.value).upper() for i in node.args[1].items]
        return not any(_has_content(block, c) and any(_has_content(o, c) for o in others) for c in categories)
    raise EvalError(f"no predicate '{node.name}'")


def _evaluate(node, block: Block, page: Page) -> bool:
    if isinstance(node, And):
        return all(_evaluate(i, block, page) for i in node.items)
    if isinstance(node, Or):
        return any(_evaluate(i, block, page) for i in node.items)
    if isinstance(node, Not):
        return not _evaluate(node.operand, block, page)
    if isinstance(node, Predicate):
        return _predicate(node, block, page)
    if isinstance(node, Compare):
        value = _resolve(node.left.parts, block, page)
        return value is not _ABSENT and _compare(node.op, _norm(value), _norm(node.right.value))
    if isinstance(node, InList):
        value = _resolve(node.left.parts, block, page)
        if value is _ABSENT:
            return False
        items = {_norm(i.value) for i in node.items.items}
        value = _norm(value)
        return bool(value & items) if isinstance(value, frozenset) else value in items
    if isinstance(node, Contains):
        value = _resolve(node.right.parts, block, page)
        if value is _ABSENT:
            return False
        item, value = _norm(node.item.value), _norm(value)
        return item in value if isinstance(value, frozenset) else item == value
    raise EvalError(f"cannot evaluate node {node!r}")


def eval_rule(rule: Rule, block: Block, page: Page) -> bool:
    """Evaluates the rule condition on a block of page; a missing neighbor makes its atom false"""
    return _evaluate(rule.condition, block, page)


def detect_block_types(page: Page, rules: Sequence[Rule]) -> Page:
    """Adds the target of every matching rule to each block; blocks matching nothing become EMPTY"""
    targets = [(rule, rule.block_type) for rule in rules]
    blocks = []
    for block in page.blocks:
        types = set(block.block_types) - {BlockType.EMPTY}
        types |= {block_type for rule, block_type in targets if eval_rule(rule, block, page)}
        blocks.append(replace(block, block_types=frozenset(types or {BlockType.EMPTY})))
    return replace(page, blocks=tuple(blocks))


def _assign(page: Page, block_id: int, role: Role) -> Page:
    return replace(page, blocks=tuple(replace(b, role=role) if b.id == block_id else b for b in page.blocks))


def classify_roles(page: Page, role_rules: Sequence[Rule], global_rules: Sequence[Rule]) -> Page:
    """
    Assigns SELLER/BUYER/DELIVERY to candidate blocks without a role.
    Role rules are tried in order and the first match wins; passes repeat
    while they label new blocks, since alignment rules depend on earlier
    labels. Global rules then run on the remaining blocks, restarting after
    every assignment. Rule order matters.
    """
    if any(not b.block_types for b in page.blocks):
        raise StageError("block types must be detected before role classification")
    role_targets = [(rule, rule.role) for rule in role_rules]
    global_targets = [(rule, rule.role) for rule in global_rules]

    for targets, restart in ((role_targets, False), (global_targets, True)):
        changed = True
        while changed:
            changed = False
            for block in _ordered(page.blocks):
                current = page.block_by_id(block.id)
                if current.role is not None or not is_role_candidate(current):
                    continue
                for rule, role in targets:
                    if eval_rule(rule, current, page):
                        logger.debug("Page %d block %d -> %s by '%s'", page.number, block.id, role.value,
                                     format_rule(rule))
                        page = _assign(page, block.id, role)
                        changed = True
                        break
                if changed and restart:
                    break
    return page
