"""Query execution against a frozen PropertyGraph.

Evaluation compiles the AST into nested closures over match rows, then
streams rows in deterministic order: ascending source node id, then
ascending edge id for two-element patterns.  A missing property makes
the enclosing WHERE clause non-matching and contributes nothing to
aggregates; each such lookup increments ``missing_property_count`` on
the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real
from typing import Callable, Optional

from ..graph import PropertyGraph
from .ast import (Aggregate, Binary, InExpr, ListLiteral, Literal, Param,
                  Prop, ReturnItem, Unary, render_item)
from .parser import Query


class ExecutionError(ValueError):
    """Raised when a query applies an operator to unsupported types."""


class _Missing:
    __slots__ = ()

    def __repr__(self):
        return "MISSING"


MISSING = _Missing()


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    missing_property_count: int = 0

    def scalar(self):
        """The single value of a one-column, one-row result."""
        if len(self.rows) != 1 or len(self.columns) != 1:
            raise ExecutionError(
                f"expected a 1x1 result, got {len(self.rows)}x{len(self.columns)}")
        return self.rows[0][0]

    def column(self, name: Optional[str] = None) -> list:
        idx = 0 if name is None else self.columns.index(name)
        return [row[idx] for row in self.rows]


def _is_number(value) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


@dataclass
class _Compiler:
    slots: dict
    miss: list = field(default_factory=lambda: [0])

    def compile(self, expr) -> Callable:
        if isinstance(expr, Literal):
            value = expr.value
            return lambda row: value
        if isinstance(expr, Prop):
            slot = self.slots[expr.var]
            name = expr.name
            miss = self.miss
            if name == "id":
                # reserved name: always the element's dense id, never a
                # stored property
                return lambda row: row[slot].id

            def get(row):
                value = row[slot].properties.get(name, MISSING)
                if value is MISSING:
                    miss[0] += 1
                return value
            return get
        if isinstance(expr, Unary):
            inner = self.compile(expr.operand)
            if expr.op == "-":
                def neg(row):
                    value = inner(row)
                    if value is MISSING:
                        return MISSING
                    if not _is_number(value):
                        raise ExecutionError(f"cannot negate {type(value).__name__}")
                    return -value
                return neg

            def invert(row):
                value = inner(row)
                if value is MISSING:
                    return MISSING
                if not isinstance(value, bool):
                    raise ExecutionError("NOT expects a boolean")
                return not value
            return invert
        if isinstance(expr, Binary):
            return self._compile_binary(expr)
        if isinstance(expr, InExpr):
            return self._compile_in(expr)
        if isinstance(expr, ListLiteral):
            values = list(expr.values)
            return lambda row: values
        if isinstance(expr, Param):
            raise ExecutionError(f"unbound placeholder ${expr.name}")
        raise ExecutionError(f"cannot compile {type(expr).__name__}")

    def _compile_binary(self, expr: Binary) -> Callable:
        op = expr.op
        left = self.compile(expr.left)
        right = self.compile(expr.right)

        if op in ("AND", "OR"):
            keep_if = op == "OR"  # short-circuit value

            def logic(row):
                lv = left(row)
                rv = right(row)
                for v in (lv, rv):
                    if v is not MISSING and not isinstance(v, bool):
                        raise ExecutionError(f"{op} expects booleans")
                # a known short-circuiting operand decides even if the
                # other side is missing
                if lv is keep_if or rv is keep_if:
                    return keep_if
                if lv is MISSING or rv is MISSING:
                    return MISSING
                return (lv or rv) if keep_if else (lv and rv)
            return logic

        if op in ("+", "-", "*", "/"):
            import operator
            fn = {"+": operator.add, "-": operator.sub,
                  "*": operator.mul, "/": operator.truediv}[op]

            def arith(row):
                lv = left(row)
                rv = right(row)
                if lv is MISSING or rv is MISSING:
                    return MISSING
                if not (_is_number(lv) and _is_number(rv)):
                    raise ExecutionError(
                        f"'{op}' expects numbers, got "
                        f"{type(lv).__name__} and {type(rv).__name__}")
                if op == "/" and rv == 0:
                    raise ExecutionError("division by zero")
                return fn(lv, rv)
            return arith

        # comparison operators; = and <> accept any matching scalar kind,
        # the orderings require two numbers or two strings
        def compare(row):
            lv = left(row)
            rv = right(row)
            if lv is MISSING or rv is MISSING:
                return MISSING
            numeric = _is_number(lv) and _is_number(rv)
            same_kind = numeric or (
                isinstance(lv, str) and isinstance(rv, str)) or (
                isinstance(lv, bool) and isinstance(rv, bool))
            if op == "=":
                if not same_kind:
                    raise ExecutionError("'=' expects values of the same kind")
                return lv == rv
            if op == "<>":
                if not same_kind:
                    raise ExecutionError("'<>' expects values of the same kind")
                return lv != rv
            if not same_kind or isinstance(lv, bool):
                raise ExecutionError(
                    f"'{op}' expects two numbers or two strings")
            if op == "<":
                return lv < rv
            if op == "<=":
                return lv <= rv
            if op == ">":
                return lv > rv
            return lv >= rv
        return compare

    def _compile_in(self, expr: InExpr) -> Callable:
        if isinstance(expr.haystack, Param):
            raise ExecutionError(f"unbound placeholder ${expr.haystack.name}")
        needle = self.compile(expr.needle)
        members = frozenset(expr.haystack.values)

        def contains(row):
            value = needle(row)
            if value is MISSING:
                return MISSING
            try:
                return value in members
            except TypeError:
                raise ExecutionError(
                    f"IN needle must be a scalar, got {type(value).__name__}")
        return contains


def _match_rows(graph: PropertyGraph, query: Query):
    pattern = query.ast.pattern
    nodes = graph.nodes
    src_ids = graph.nodes_by_label(pattern.src.label)
    if pattern.edge is None:
        return {pattern.src.var: 0}, ((nodes[nid],) for nid in src_ids)

    edge_type = pattern.edge.type
    dst_label = pattern.dst.label
    edges = graph.edges
    slots = {pattern.src.var: 0, pattern.dst.var: 2}
    if pattern.edge.var:
        slots[pattern.edge.var] = 1

    def rows():
        for nid in src_ids:
            src = nodes[nid]
            for eid in graph.out_edges(nid):
                edge = edges[eid]
                if edge.type != edge_type:
                    continue
                dst = nodes[edge.dst]
                if dst_label in dst.labels:
                    yield (src, edge, dst)
    return slots, rows()


def _hashable(value):
    return tuple(value) if isinstance(value, list) else value


class _Acc:
    """Streaming accumulator for one aggregate return item."""

    __slots__ = ("func", "distinct", "arg", "count", "total", "best", "seen", "items")

    def __init__(self, agg: Aggregate, compiler: _Compiler):
        self.func = agg.func
        self.distinct = agg.distinct
        self.arg = compiler.compile(agg.arg) if agg.arg is not None else None
        self.count = 0
        self.total = 0
        self.best = None
        self.seen = set() if agg.distinct else None
        self.items: list = []

    def add(self, row) -> None:
        if self.arg is None:  # count(*)
            self.count += 1
            return
        value = self.arg(row)
        if value is MISSING:
            return
        func = self.func
        if func == "count":
            if self.distinct:
                self.seen.add(_hashable(value))
            else:
                self.count += 1
        elif func == "sum":
            if not _is_number(value):
                raise ExecutionError("sum expects numbers")
            self.total += value
        elif func == "avg":
            if not _is_number(value):
                raise ExecutionError("avg expects numbers")
            self.total += value
            self.count += 1
        elif func in ("min", "max"):
            if not (_is_number(value) or isinstance(value, str)):
                raise ExecutionError(f"{func} expects numbers or strings")
            if self.best is None:
                self.best = value
            else:
                if _is_number(value) != _is_number(self.best):
                    raise ExecutionError(f"{func} saw mixed value kinds")
                if (value < self.best) == (func == "min"):
                    self.best = value
        elif func == "collect":
            if self.distinct:
                key = _hashable(value)
                if key in self.seen:
                    return
                self.seen.add(key)
            self.items.append(value)

    def result(self):
        func = self.func
        if func == "count":
            if self.arg is None or not self.distinct:
                return self.count
            return len(self.seen)
        if func == "sum":
            return self.total
        if func == "avg":
            return self.total / self.count if self.count else None
        if func in ("min", "max"):
            return self.best
        return list(self.items)


def execute(graph: PropertyGraph, query: Query) -> ResultTable:
    """Run a bound query and return its result table.

    Aggregate queries yield exactly one row.  Bare item queries yield
    one row per surviving match, with missing values surfaced as None.
    """
    if not isinstance(query, Query):
        raise TypeError("execute() expects a bound Query; substitute templates first")
    if not graph.frozen:
        raise ExecutionError("graph must be frozen before it can be queried")
    slots, rows = _match_rows(graph, query)
    compiler = _Compiler(slots=slots)
    where = compiler.compile(query.ast.where) if query.ast.where is not None else None

    items = query.ast.items
    columns = [item.alias or render_item(ReturnItem(value=item.value, alias=None))
               for item in items]

    aggregated = isinstance(items[0].value, Aggregate)
    if aggregated:
        accs = [_Acc(item.value, compiler) for item in items]
        for row in rows:
            if where is not None and where(row) is not True:
                continue
            for acc in accs:
                acc.add(row)
        out_rows = [tuple(acc.result() for acc in accs)]
    else:
        getters = [compiler.compile(item.value) for item in items]
        out_rows = []
        for row in rows:
            if where is not None and where(row) is not True:
                continue
            values = tuple(g(row) for g in getters)
            out_rows.append(tuple(None if v is MISSING else v for v in values))
    return ResultTable(columns=columns, rows=out_rows,
                       missing_property_count=compiler.miss[0])
