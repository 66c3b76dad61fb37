"""AST node types for the mini query language, plus canonical rendering.

The grammar is a single-hop subset of the Cypher family: one MATCH
pattern, an optional WHERE expression, and a RETURN list that is either
all-aggregate or all-bare.  See QUERYLANG.md for the EBNF and semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

AGGREGATE_FUNCS = ("count", "sum", "min", "max", "avg", "collect")


@dataclass(frozen=True)
class Prop:
    """Property access ``var.name``; ``id`` resolves to the element id."""
    var: str
    name: str


@dataclass(frozen=True)
class Literal:
    value: object


@dataclass(frozen=True)
class ListLiteral:
    values: tuple


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # '-' or 'NOT'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / AND OR = <> < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class InExpr:
    needle: "Expr"
    haystack: Union[ListLiteral, Param]


Expr = Union[Prop, Literal, ListLiteral, Param, Unary, Binary, InExpr]


@dataclass(frozen=True)
class Aggregate:
    func: str
    arg: Optional[Expr]  # None only for count(*)
    distinct: bool = False


@dataclass(frozen=True)
class ReturnItem:
    value: Union[Aggregate, Expr]
    alias: Optional[str] = None


@dataclass(frozen=True)
class NodePattern:
    var: str
    label: str


@dataclass(frozen=True)
class EdgePattern:
    var: Optional[str]
    type: str


@dataclass(frozen=True)
class MatchPattern:
    src: NodePattern
    edge: Optional[EdgePattern] = None
    dst: Optional[NodePattern] = None


@dataclass(frozen=True)
class QueryAst:
    pattern: MatchPattern
    where: Optional[Expr]
    items: tuple[ReturnItem, ...]


def _render_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    return repr(value)


def render_expr(expr: Expr) -> str:
    if isinstance(expr, Prop):
        return f"{expr.var}.{expr.name}"
    if isinstance(expr, Literal):
        return _render_value(expr.value)
    if isinstance(expr, ListLiteral):
        return "[" + ", ".join(_render_value(v) for v in expr.values) + "]"
    if isinstance(expr, Param):
        return f"${expr.name}"
    if isinstance(expr, Unary):
        if expr.op == "NOT":
            return f"NOT ({render_expr(expr.operand)})"
        return f"-{render_expr(expr.operand)}"
    if isinstance(expr, Binary):
        return f"({render_expr(expr.left)} {expr.op} {render_expr(expr.right)})"
    if isinstance(expr, InExpr):
        return f"{render_expr(expr.needle)} IN {render_expr(expr.haystack)}"
    raise TypeError(f"not an expression node: {expr!r}")


def render_item(item: ReturnItem) -> str:
    value = item.value
    if isinstance(value, Aggregate):
        if value.arg is None:
            inner = "*"
        else:
            inner = ("DISTINCT " if value.distinct else "") + render_expr(value.arg)
        text = f"{value.func}({inner})"
    else:
        text = render_expr(value)
    if item.alias:
        text += f" AS {item.alias}"
    return text


def render_query(ast: QueryAst) -> str:
    pat = ast.pattern
    text = f"MATCH ({pat.src.var}:{pat.src.label})"
    if pat.edge is not None:
        edge_var = pat.edge.var or ""
        text += f"-[{edge_var}:{pat.edge.type}]->({pat.dst.var}:{pat.dst.label})"
    if ast.where is not None:
        text += f" WHERE {render_expr(ast.where)}"
    text += " RETURN " + ", ".join(render_item(item) for item in ast.items)
    return text
