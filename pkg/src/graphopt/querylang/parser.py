"""Tokenizer, recursive-descent parser, and parameter substitution.

Parsing produces either a ``Query`` (no ``$`` placeholders) or a
``QueryTemplate`` (placeholders present).  Substitution is purely
syntactic: it rewrites the AST by replacing ``Param`` nodes with literal
nodes, producing a new immutable ``Query``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .ast import (
    AGGREGATE_FUNCS,
    Aggregate,
    Binary,
    EdgePattern,
    Expr,
    InExpr,
    ListLiteral,
    Literal,
    MatchPattern,
    NodePattern,
    Param,
    Prop,
    QueryAst,
    ReturnItem,
    Unary,
    render_query,
)

MAX_IN_LIST = 100_000

_KEYWORDS = {"match", "where", "return", "and", "or", "not", "in", "as",
             "distinct", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<param>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'(?:\\.|[^'\\])*'|"(?:\\.|[^"\\])*")
  | (?P<arrow>->)
  | (?P<op><=|>=|<>|[=<>+\-*/(),.:\[\]])
    """,
    re.VERBOSE,
)

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}


class ParseError(ValueError):
    """Raised for malformed query text; carries the byte offset."""

    def __init__(self, message: str, text: str, pos: int):
        self.offset = len(text[:pos].encode("utf-8"))
        super().__init__(f"{message} (byte offset {self.offset})")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'keyword' | 'int' | 'float' | 'string' | 'param' | 'op' | 'eof'
    value: object
    pos: int  # character offset into source text


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        raw = m.group()
        if kind == "ws":
            pass
        elif kind == "int":
            tokens.append(Token("int", int(raw), pos))
        elif kind == "float":
            tokens.append(Token("float", float(raw), pos))
        elif kind == "ident":
            if raw.lower() in _KEYWORDS:
                tokens.append(Token("keyword", raw.lower(), pos))
            else:
                tokens.append(Token("ident", raw, pos))
        elif kind == "param":
            tokens.append(Token("param", raw[1:], pos))
        elif kind == "string":
            body = raw[1:-1]
            out: list[str] = []
            i = 0
            while i < len(body):
                ch = body[i]
                if ch == "\\":
                    i += 1
                    if i >= len(body) or body[i] not in _ESCAPES:
                        raise ParseError("bad string escape", text, pos)
                    out.append(_ESCAPES[body[i]])
                else:
                    out.append(ch)
                i += 1
            tokens.append(Token("string", "".join(out), pos))
        elif kind == "arrow":
            tokens.append(Token("op", "->", pos))
        else:
            tokens.append(Token("op", raw, pos))
        pos = m.end()
    tokens.append(Token("eof", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token plumbing -------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.text, self.cur.pos)

    def expect_op(self, op: str) -> None:
        if self.cur.kind != "op" or self.cur.value != op:
            raise self.error(f"expected {op!r}")
        self.advance()

    def expect_keyword(self, kw: str) -> None:
        if self.cur.kind != "keyword" or self.cur.value != kw:
            raise self.error(f"expected {kw.upper()}")
        self.advance()

    def expect_ident(self, what: str) -> str:
        if self.cur.kind != "ident":
            raise self.error(f"expected {what}")
        return self.advance().value

    def at_op(self, *ops: str) -> bool:
        return self.cur.kind == "op" and self.cur.value in ops

    def at_keyword(self, *kws: str) -> bool:
        return self.cur.kind == "keyword" and self.cur.value in kws

    # -- grammar ---------------------------------------------------------

    def parse(self) -> QueryAst:
        self.expect_keyword("match")
        pattern = self.pattern()
        where = None
        if self.at_keyword("where"):
            self.advance()
            where = self.expr()
        self.expect_keyword("return")
        items = self.return_items()
        if self.cur.kind != "eof":
            raise self.error("unexpected trailing input")
        self._check_variables(pattern, where, items)
        return QueryAst(pattern=pattern, where=where, items=items)

    def pattern(self) -> MatchPattern:
        src = self.node_pattern()
        if not self.at_op("-"):
            return MatchPattern(src=src)
        self.advance()
        self.expect_op("[")
        edge_var: Optional[str] = None
        if self.cur.kind == "ident":
            edge_var = self.advance().value
        self.expect_op(":")
        edge_type = self.expect_ident("relationship type")
        self.expect_op("]")
        self.expect_op("->")
        dst = self.node_pattern()
        names = [src.var, dst.var] + ([edge_var] if edge_var else [])
        if len(set(names)) != len(names):
            raise self.error("duplicate variable in pattern")
        return MatchPattern(src=src, edge=EdgePattern(edge_var, edge_type), dst=dst)

    def node_pattern(self) -> NodePattern:
        self.expect_op("(")
        var = self.expect_ident("variable name")
        self.expect_op(":")
        label = self.expect_ident("label")
        self.expect_op(")")
        return NodePattern(var=var, label=label)

    def return_items(self) -> tuple[ReturnItem, ...]:
        items = [self.return_item()]
        while self.at_op(","):
            self.advance()
            items.append(self.return_item())
        kinds = {isinstance(item.value, Aggregate) for item in items}
        if kinds == {True, False}:
            raise self.error("cannot mix aggregated and bare return items")
        return tuple(items)

    def return_item(self) -> ReturnItem:
        if (self.cur.kind == "ident"
                and self.tokens[self.i + 1].kind == "op"
                and self.tokens[self.i + 1].value == "("):
            value: Union[Aggregate, Expr] = self.aggregate()
        else:
            value = self.expr()
        alias = None
        if self.at_keyword("as"):
            self.advance()
            alias = self.expect_ident("alias")
        return ReturnItem(value=value, alias=alias)

    def aggregate(self) -> Aggregate:
        name = self.advance().value.lower()
        if name not in AGGREGATE_FUNCS:
            raise self.error(f"unknown function {name!r}")
        self.expect_op("(")
        if self.at_op("*"):
            if name != "count":
                raise self.error(f"{name}(*) is not supported")
            self.advance()
            self.expect_op(")")
            return Aggregate(func=name, arg=None)
        distinct = False
        if self.at_keyword("distinct"):
            if name not in ("count", "collect"):
                raise self.error(f"DISTINCT is not supported for {name}")
            self.advance()
            distinct = True
        arg = self.expr()
        self.expect_op(")")
        return Aggregate(func=name, arg=arg, distinct=distinct)

    def expr(self) -> Expr:
        return self.or_expr()

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at_keyword("or"):
            self.advance()
            left = Binary("OR", left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at_keyword("and"):
            self.advance()
            left = Binary("AND", left, self.not_expr())
        return left

    def not_expr(self) -> Expr:
        if self.at_keyword("not"):
            self.advance()
            return Unary("NOT", self.not_expr())
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.additive()
        if self.at_op("=", "<>", "<", "<=", ">", ">="):
            op = self.advance().value
            return Binary(op, left, self.additive())
        if self.at_keyword("in"):
            self.advance()
            if self.cur.kind == "param":
                haystack: Union[ListLiteral, Param] = Param(self.advance().value)
            elif self.at_op("["):
                haystack = self.list_literal()
            else:
                raise self.error("IN expects a list literal or $parameter")
            return InExpr(needle=left, haystack=haystack)
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.at_op("+", "-"):
            op = self.advance().value
            left = Binary(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.at_op("*", "/"):
            op = self.advance().value
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            operand = self.unary()
            if isinstance(operand, Literal) and isinstance(operand.value, (int, float)):
                return Literal(-operand.value)
            return Unary("-", operand)
        return self.primary()

    def primary(self) -> Expr:
        tok = self.cur
        if tok.kind in ("int", "float", "string"):
            self.advance()
            return Literal(tok.value)
        if tok.kind == "keyword" and tok.value in ("true", "false"):
            self.advance()
            return Literal(tok.value == "true")
        if tok.kind == "param":
            self.advance()
            return Param(tok.value)
        if tok.kind == "ident":
            var = self.advance().value
            self.expect_op(".")
            name = self.expect_ident("property name")
            return Prop(var=var, name=name)
        if self.at_op("("):
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if self.at_op("["):
            return self.list_literal()
        raise self.error("expected an expression")

    def list_literal(self) -> ListLiteral:
        self.expect_op("[")
        values: list = []
        if not self.at_op("]"):
            values.append(self.literal_value())
            while self.at_op(","):
                self.advance()
                values.append(self.literal_value())
        self.expect_op("]")
        return ListLiteral(values=tuple(values))

    def literal_value(self):
        negate = False
        if self.at_op("-"):
            self.advance()
            negate = True
        tok = self.cur
        if tok.kind in ("int", "float"):
            self.advance()
            return -tok.value if negate else tok.value
        if negate:
            raise self.error("expected a number after '-'")
        if tok.kind == "string":
            self.advance()
            return tok.value
        if tok.kind == "keyword" and tok.value in ("true", "false"):
            self.advance()
            return tok.value == "true"
        raise self.error("list literals may only contain scalar literals")

    def _check_variables(self, pattern: MatchPattern, where, items) -> None:
        bound = {pattern.src.var}
        if pattern.edge is not None:
            bound.add(pattern.dst.var)
            if pattern.edge.var:
                bound.add(pattern.edge.var)

        def walk(expr) -> None:
            if isinstance(expr, Prop):
                if expr.var not in bound:
                    raise ParseError(f"unknown variable {expr.var!r}",
                                     self.text, len(self.text))
            elif isinstance(expr, Unary):
                walk(expr.operand)
            elif isinstance(expr, Binary):
                walk(expr.left)
                walk(expr.right)
            elif isinstance(expr, InExpr):
                walk(expr.needle)

        if where is not None:
            walk(where)
        for item in items:
            value = item.value
            if isinstance(value, Aggregate):
                if value.arg is not None:
                    walk(value.arg)
            else:
                walk(value)


class SubstitutionError(ValueError):
    """A placeholder binding does not line up with the template."""


def _collect_params(ast: QueryAst) -> frozenset[str]:
    found: set[str] = set()

    def walk(expr) -> None:
        if isinstance(expr, Param):
            found.add(expr.name)
        elif isinstance(expr, Unary):
            walk(expr.operand)
        elif isinstance(expr, Binary):
            walk(expr.left)
            walk(expr.right)
        elif isinstance(expr, InExpr):
            walk(expr.needle)
            walk(expr.haystack)

    if ast.where is not None:
        walk(ast.where)
    for item in ast.items:
        value = item.value
        if isinstance(value, Aggregate):
            if value.arg is not None:
                walk(value.arg)
        else:
            walk(value)
    return frozenset(found)


@dataclass(frozen=True)
class Query:
    """A fully bound, executable query."""

    ast: QueryAst
    text: str = field(compare=False)

    @staticmethod
    def from_ast(ast: QueryAst) -> "Query":
        return Query(ast=ast, text=render_query(ast))


@dataclass(frozen=True)
class QueryTemplate:
    """Parsed query text whose ``$name`` placeholders await binding."""

    text: str
    ast: QueryAst
    placeholders: frozenset[str]


def parse_query(text: str) -> Query:
    ast = _Parser(text).parse()
    params = _collect_params(ast)
    if params:
        names = ", ".join(sorted(params))
        raise ParseError(f"unbound placeholders: {names}", text, len(text))
    return Query(ast=ast, text=text)


def parse_template(text: str) -> QueryTemplate:
    ast = _Parser(text).parse()
    return QueryTemplate(text=text, ast=ast, placeholders=_collect_params(ast))


_SCALAR_TYPES = (str, int, float, bool)


def _check_scalar(name: str, value) -> None:
    if isinstance(value, _SCALAR_TYPES):
        return
    raise TypeError(f"${name}: scalar placeholder bound to {type(value).__name__}")


def _check_list(name: str, values) -> tuple:
    if isinstance(values, (str, bytes)) or not hasattr(values, "__iter__"):
        raise TypeError(f"${name}: list placeholder bound to {type(values).__name__}")
    out = tuple(values)
    if len(out) > MAX_IN_LIST:
        raise SubstitutionError(
            f"${name}: IN list has {len(out)} elements (limit {MAX_IN_LIST})")
    for v in out:
        if not isinstance(v, _SCALAR_TYPES):
            raise TypeError(f"${name}: IN list elements must be scalars")
    return out


def substitute(template: QueryTemplate, scalars: Optional[dict] = None,
               lists: Optional[dict] = None) -> Query:
    """Bind every placeholder in ``template`` and return a runnable Query.

    ``scalars`` maps names to scalar values, ``lists`` maps names to
    sequences (allowed only where the placeholder follows IN).  Every
    placeholder must be bound exactly once; unknown or doubly bound
    names raise SubstitutionError, and a binding of the wrong kind
    raises TypeError.
    """
    scalars = dict(scalars or {})
    lists = dict(lists or {})
    both = set(scalars) & set(lists)
    if both:
        raise SubstitutionError(
            "bound as both scalar and list: " + ", ".join(sorted(both)))
    provided = set(scalars) | set(lists)
    missing = template.placeholders - provided
    if missing:
        raise SubstitutionError("unbound placeholders: " + ", ".join(sorted(missing)))
    extra = provided - template.placeholders
    if extra:
        raise SubstitutionError("unknown placeholders: " + ", ".join(sorted(extra)))

    for name, value in scalars.items():
        _check_scalar(name, value)
    checked_lists = {name: _check_list(name, v) for name, v in lists.items()}

    def rewrite(expr):
        if isinstance(expr, Param):
            if expr.name in checked_lists:
                raise TypeError(
                    f"${expr.name}: list bound where a scalar is expected")
            return Literal(scalars[expr.name])
        if isinstance(expr, Unary):
            return Unary(expr.op, rewrite(expr.operand))
        if isinstance(expr, Binary):
            return Binary(expr.op, rewrite(expr.left), rewrite(expr.right))
        if isinstance(expr, InExpr):
            haystack = expr.haystack
            if isinstance(haystack, Param):
                if haystack.name in scalars:
                    raise TypeError(
                        f"${haystack.name}: scalar bound where a list is expected")
                haystack = ListLiteral(values=checked_lists[haystack.name])
            return InExpr(needle=rewrite(expr.needle), haystack=haystack)
        return expr

    where = rewrite(template.ast.where) if template.ast.where is not None else None
    items = []
    for item in template.ast.items:
        value = item.value
        if isinstance(value, Aggregate):
            arg = rewrite(value.arg) if value.arg is not None else None
            value = Aggregate(func=value.func, arg=arg, distinct=value.distinct)
        else:
            value = rewrite(value)
        items.append(ReturnItem(value=value, alias=item.alias))
    ast = QueryAst(pattern=template.ast.pattern, where=where, items=tuple(items))
    return Query.from_ast(ast)
