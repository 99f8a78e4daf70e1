"""Rule language: parsing, type checking, evaluation and serialization.

A rule file holds one statement per line::

    # comments start with '#'
    external logp unit "log units"
    provenance data_pattern
    rule mw_lt_500: molecular_weight < 500
    rule logp_window: 1 <= logp <= 3
    rule has_benzene: substructure("c1ccccc1")
    rule hbd: numeric hbd_count

Expressions support numbers, descriptor and external identifiers, ``+ - * /``,
chained comparisons ``< <= > >= ==``, ``and``/``or``/``not``, parentheses,
``substructure("smiles")`` (boolean) and ``substructure_count("smiles")``
(number of distinct matches). ``provenance`` switches the provenance of the
rules that follow it.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from molviews.chem import DESCRIPTOR_IDS, Molecule, SmilesError, match_substructure, parse_pattern
from molviews.chem.substructure import PatternTooLarge, has_substructure

PROVENANCES = ("scientific", "data_pattern")
KINDS = ("predicate", "numeric")
COMPARISONS = ("<", "<=", ">", ">=", "==")
_KEYWORDS = {"rule", "numeric", "external", "unit", "provenance", "and", "or", "not",
             "substructure", "substructure_count"}


class RuleError(ValueError):
    pass


class RuleSyntaxError(RuleError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownDescriptor(RuleError):
    def __init__(self, name, line=None):
        where = f" (line {line})" if line else ""
        super().__init__(f"unknown descriptor {name!r}{where}")
        self.name = name
        self.line = line


class DuplicateRuleId(RuleError):
    def __init__(self, name):
        super().__init__(f"duplicate rule id {name!r}")
        self.name = name


class BadPattern(RuleError):
    def __init__(self, pattern, reason, line=None):
        super().__init__(f"bad substructure pattern {pattern!r}: {reason}")
        self.pattern = pattern
        self.line = line


class MissingExternal(RuleError):
    def __init__(self, name, rule_id=None):
        suffix = f" required by rule {rule_id!r}" if rule_id else ""
        super().__init__(f"missing external descriptor {name!r}{suffix}")
        self.name = name
        self.rule_id = rule_id


class NonFiniteResult(RuleError):
    def __init__(self, rule_id):
        super().__init__(f"rule {rule_id!r} produced a non-finite value")
        self.rule_id = rule_id


# --- expression tree -------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    external: bool = False


@dataclass(frozen=True)
class Substructure:
    pattern: str
    count: bool = False
    mol: Optional[Molecule] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Compare:
    ops: tuple[str, ...]
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    operands: tuple["Expr", ...]


@dataclass(frozen=True)
class Not:
    operand: "Expr"


Expr = Union[Num, Var, Substructure, Neg, BinOp, Compare, BoolOp, Not]


@dataclass(frozen=True)
class Rule:
    id: str
    kind: str
    expression: Expr
    provenance: str = "scientific"


@dataclass(frozen=True)
class ExternalDescriptor:
    id: str
    unit: str = ""


@dataclass(frozen=True)
class RuleSet:
    task_id: str
    rules: tuple[Rule, ...]
    external_descriptor_declarations: tuple[ExternalDescriptor, ...] = ()

    def __post_init__(self):
        seen = set()
        for r in self.rules:
            if r.id in seen:
                raise DuplicateRuleId(r.id)
            seen.add(r.id)

    def __len__(self):
        return len(self.rules)

    @property
    def rule_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.rules)

    @property
    def external_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.external_descriptor_declarations)

    def union(self, other: "RuleSet") -> "RuleSet":
        """Literal union: ``self`` rules first, duplicate ids rejected."""
        externals = list(self.external_descriptor_declarations)
        known = {e.id: e for e in externals}
        for e in other.external_descriptor_declarations:
            if e.id in known:
                if known[e.id] != e:
                    raise RuleError(f"external {e.id!r} declared with different units")
                continue
            externals.append(e)
        return RuleSet(self.task_id, self.rules + other.rules, tuple(externals))


# --- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|[<>:()+\-*/,])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line, lineno):
    toks = []
    pos = 0
    while pos < len(line):
        if line[pos] == "#":
            break
        m = _TOKEN_RE.match(line, pos)
        if not m:
            raise RuleSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    toks.append(_Tok("end", "", len(line) + 1))
    return toks


# --- parser ------------------------------------------------------------------


class _LineParser:
    def __init__(self, toks, lineno, externals):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.externals = externals

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return RuleSyntaxError(message, self.lineno, tok.col)

    def advance(self):
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "name"):
            return self.advance()
        return None

    def expect(self, text):
        tok = self.accept(text)
        if tok is None:
            found = self.tok.text or "end of line"
            raise self.error(f"expected {text!r}, found {found!r}")
        return tok

    def expect_name(self, what):
        tok = self.tok
        if tok.kind != "name" or tok.text in _KEYWORDS:
            raise self.error(f"expected {what}")
        return self.advance().text

    def expect_end(self):
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")

    # expression grammar, lowest precedence first

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        operands = [self.and_expr()]
        while self.accept("or"):
            operands.append(self.and_expr())
        return operands[0] if len(operands) == 1 else BoolOp("or", tuple(operands))

    def and_expr(self):
        operands = [self.not_expr()]
        while self.accept("and"):
            operands.append(self.not_expr())
        return operands[0] if len(operands) == 1 else BoolOp("and", tuple(operands))

    def not_expr(self):
        if self.accept("not"):
            return Not(self.not_expr())
        return self.comparison()

    def comparison(self):
        first = self.arith()
        ops, operands = [], [first]
        while self.tok.kind == "op" and self.tok.text in COMPARISONS:
            ops.append(self.advance().text)
            operands.append(self.arith())
        if not ops:
            return first
        return Compare(tuple(ops), tuple(operands))

    def arith(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name" and tok.text in ("substructure", "substructure_count"):
            self.advance()
            self.expect("(")
            s = self.tok
            if s.kind != "str":
                raise self.error("expected a quoted SMILES pattern")
            self.advance()
            self.expect(")")
            pattern = json.loads(s.text)
            try:
                mol = parse_pattern(pattern)
            except (SmilesError, PatternTooLarge) as exc:
                raise BadPattern(pattern, str(exc), self.lineno) from None
            return Substructure(pattern, tok.text == "substructure_count", mol)
        if tok.kind == "name" and tok.text not in _KEYWORDS:
            self.advance()
            if tok.text in DESCRIPTOR_IDS:
                return Var(tok.text)
            if tok.text in self.externals:
                return Var(tok.text, external=True)
            raise UnknownDescriptor(tok.text, self.lineno)
        raise self.error(f"unexpected {tok.text or 'end of line'!r}")


def _type_of(node):
    """'bool' or 'num'; raises TypeError on ill-typed trees."""
    if isinstance(node, (Num, Var)):
        return "num"
    if isinstance(node, Substructure):
        return "num" if node.count else "bool"
    if isinstance(node, Neg):
        if _type_of(node.operand) != "num":
            raise TypeError("unary '-' needs a number")
        return "num"
    if isinstance(node, BinOp):
        if _type_of(node.left) != "num" or _type_of(node.right) != "num":
            raise TypeError(f"{node.op!r} needs numbers")
        return "num"
    if isinstance(node, Compare):
        if any(_type_of(o) != "num" for o in node.operands):
            raise TypeError("comparisons need numbers")
        return "bool"
    if isinstance(node, BoolOp):
        if any(_type_of(o) != "bool" for o in node.operands):
            raise TypeError(f"{node.op!r} needs true/false operands")
        return "bool"
    if isinstance(node, Not):
        if _type_of(node.operand) != "bool":
            raise TypeError("'not' needs a true/false operand")
        return "bool"
    raise TypeError(f"unknown node {node!r}")


def parse_rules(source: str, task_id: str = "", provenance: str = "scientific") -> RuleSet:
    """Compile rule-file text into a :class:`RuleSet`.

    Externals may be declared anywhere in the file. Unknown identifiers,
    duplicate ids and unparseable patterns are rejected here, never at
    evaluation time.
    """
    if provenance not in PROVENANCES:
        raise ValueError(f"provenance must be one of {PROVENANCES}")
    lines = source.splitlines()
    tokenized = [(n, _tokenize(text, n)) for n, text in enumerate(lines, start=1)]

    externals: dict[str, ExternalDescriptor] = {}
    for lineno, toks in tokenized:
        if toks[0].text != "external" or toks[0].kind != "name":
            continue
        p = _LineParser(toks, lineno, {})
        p.advance()
        name = p.expect_name("external descriptor id")
        if name in DESCRIPTOR_IDS:
            raise RuleSyntaxError(f"{name!r} is a built-in descriptor", lineno, toks[1].col)
        if name in externals:
            raise RuleSyntaxError(f"external {name!r} declared twice", lineno, toks[1].col)
        unit = ""
        if p.accept("unit"):
            if p.tok.kind != "str":
                raise p.error("expected a quoted unit")
            unit = json.loads(p.advance().text)
        p.expect_end()
        externals[name] = ExternalDescriptor(name, unit)

    rules = []
    seen = set()
    current = provenance
    for lineno, toks in tokenized:
        head = toks[0]
        if head.kind == "end" or head.text == "external":
            continue
        p = _LineParser(toks, lineno, externals)
        if head.text == "provenance":
            p.advance()
            value = p.expect_name("provenance")
            if value not in PROVENANCES:
                raise p.error(f"provenance must be one of {PROVENANCES}", toks[1])
            p.expect_end()
            current = value
            continue
        if head.text != "rule":
            raise p.error("expected 'rule', 'external' or 'provenance'")
        p.advance()
        rule_id = p.expect_name("rule id")
        p.expect(":")
        kind = "numeric" if p.accept("numeric") else "predicate"
        expr_tok = p.tok
        expr = p.expr()
        p.expect_end()
        try:
            typ = _type_of(expr)
        except TypeError as exc:
            raise RuleSyntaxError(str(exc), lineno, expr_tok.col) from None
        if kind == "predicate" and typ != "bool":
            raise RuleSyntaxError(
                "predicate rule needs a true/false expression (use 'numeric' for values)",
                lineno, expr_tok.col,
            )
        if rule_id in seen:
            raise DuplicateRuleId(rule_id)
        seen.add(rule_id)
        rules.append(Rule(rule_id, kind, expr, current))
    return RuleSet(task_id, tuple(rules), tuple(externals.values()))


# --- evaluation --------------------------------------------------------------


def evaluate_expression(node, descriptors, externals, mol, rule_id=None):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.external:
            if node.name not in externals:
                raise MissingExternal(node.name, rule_id)
            return float(externals[node.name])
        return descriptors[node.name]
    if isinstance(node, Substructure):
        pattern = node.mol if node.mol is not None else parse_pattern(node.pattern)
        if node.count:
            return float(match_substructure(pattern, mol).count)
        return has_substructure(pattern, mol)
    if isinstance(node, Neg):
        return -evaluate_expression(node.operand, descriptors, externals, mol, rule_id)
    if isinstance(node, BinOp):
        a = evaluate_expression(node.left, descriptors, externals, mol, rule_id)
        b = evaluate_expression(node.right, descriptors, externals, mol, rule_id)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            return math.copysign(math.inf, a) if a else math.nan
        return a / b
    if isinstance(node, Compare):
        values = [evaluate_expression(o, descriptors, externals, mol, rule_id) for o in node.operands]
        for op, a, b in zip(node.ops, values, values[1:]):
            if not _compare(op, a, b):
                return False
        return True
    if isinstance(node, BoolOp):
        vals = (evaluate_expression(o, descriptors, externals, mol, rule_id) for o in node.operands)
        return all(vals) if node.op == "and" else any(vals)
    if isinstance(node, Not):
        return not evaluate_expression(node.operand, descriptors, externals, mol, rule_id)
    raise TypeError(f"unknown node {node!r}")


def _compare(op, a, b):
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    return a == b


# --- serialization -------------------------------------------------------------

def _prec(node):
    if isinstance(node, BoolOp):
        return 0 if node.op == "or" else 1
    if isinstance(node, Not):
        return 2
    if isinstance(node, Compare):
        return 3
    if isinstance(node, BinOp):
        return 4 if node.op in "+-" else 5
    if isinstance(node, Neg):
        return 6
    return 7


def _fmt(node, min_prec=0):
    p = _prec(node)
    if isinstance(node, Num):
        text = repr(node.value)
        if node.value < 0:
            text = f"({text})"
    elif isinstance(node, Var):
        text = node.name
    elif isinstance(node, Substructure):
        fn = "substructure_count" if node.count else "substructure"
        text = f"{fn}({json.dumps(node.pattern)})"
    elif isinstance(node, Neg):
        text = "-" + _fmt(node.operand, 6)
    elif isinstance(node, BinOp):
        # left-associative: right operand needs strictly higher precedence
        text = f"{_fmt(node.left, p)} {node.op} {_fmt(node.right, p + 1)}"
    elif isinstance(node, Compare):
        parts = [_fmt(node.operands[0], 4)]
        for op, operand in zip(node.ops, node.operands[1:]):
            parts += [op, _fmt(operand, 4)]
        text = " ".join(parts)
    elif isinstance(node, BoolOp):
        text = f" {node.op} ".join(_fmt(o, p + 1) for o in node.operands)
    elif isinstance(node, Not):
        text = "not " + _fmt(node.operand, 2)
    else:
        raise TypeError(f"unknown node {node!r}")
    return f"({text})" if p < min_prec else text


def format_expression(node: Expr) -> str:
    return _fmt(node)


def serialize_rules(ruleset: RuleSet) -> str:
    """Rule-file text that :func:`parse_rules` turns back into an equal RuleSet."""
    lines = []
    for ext in ruleset.external_descriptor_declarations:
        lines.append(f"external {ext.id} unit {json.dumps(ext.unit)}")
    current = "scientific"
    for rule in ruleset.rules:
        if rule.provenance != current:
            lines.append(f"provenance {rule.provenance}")
            current = rule.provenance
        prefix = "numeric " if rule.kind == "numeric" else ""
        lines.append(f"rule {rule.id}: {prefix}{format_expression(rule.expression)}")
    return "\n".join(lines) + "\n"


def expression_to_dict(node: Expr) -> dict:
    if isinstance(node, Num):
        return {"type": "number", "value": node.value}
    if isinstance(node, Var):
        return {"type": "external" if node.external else "descriptor", "name": node.name}
    if isinstance(node, Substructure):
        return {"type": "substructure_count" if node.count else "substructure", "pattern": node.pattern}
    if isinstance(node, Neg):
        return {"type": "negate", "operand": expression_to_dict(node.operand)}
    if isinstance(node, BinOp):
        return {"type": "arithmetic", "op": node.op,
                "left": expression_to_dict(node.left), "right": expression_to_dict(node.right)}
    if isinstance(node, Compare):
        return {"type": "compare", "ops": list(node.ops),
                "operands": [expression_to_dict(o) for o in node.operands]}
    if isinstance(node, BoolOp):
        return {"type": node.op, "operands": [expression_to_dict(o) for o in node.operands]}
    if isinstance(node, Not):
        return {"type": "not", "operand": expression_to_dict(node.operand)}
    raise TypeError(f"unknown node {node!r}")


def ruleset_to_json(ruleset: RuleSet) -> dict:
    """Audit export of the compiled rule set."""
    return {
        "task_id": ruleset.task_id,
        "externals": [{"id": e.id, "unit": e.unit} for e in ruleset.external_descriptor_declarations],
        "rules": [
            {
                "index": i,
                "id": r.id,
                "kind": r.kind,
                "provenance": r.provenance,
                "source": format_expression(r.expression),
                "expression": expression_to_dict(r.expression),
            }
            for i, r in enumerate(ruleset.rules)
        ],
    }
