"""Query language: parse errors with offsets, substitution, execution
semantics (aggregates, missing properties, DISTINCT), and the brute-force
filter-equivalence property."""

import pytest

from graphopt.graph import PropertyGraph
from graphopt.querylang import (MISSING, MAX_IN_LIST, ExecutionError,
                                ParseError, SubstitutionError, execute,
                                parse_query, parse_template, render_query,
                                substitute)
from graphopt.rng import SeededRng


def drug_gene_graph():
    """3 drugs with side_effect_count {4, 2, 7}; two share a target gene."""
    g = PropertyGraph()
    d0 = g.add_node({"Drug"}, {"side_effect_count": 4})
    d1 = g.add_node({"Drug"}, {"side_effect_count": 2})
    d2 = g.add_node({"Drug"}, {"side_effect_count": 7})
    g0 = g.add_node({"Gene"}, {"symbol": "TP53"})
    g1 = g.add_node({"Gene"}, {"symbol": "EGFR"})
    g.add_edge(d0, "TARGETS", g0, {})
    g.add_edge(d1, "TARGETS", g1, {})
    g.add_edge(d2, "TARGETS", g0, {})  # d0 and d2 hit the same gene
    g.freeze()
    return g, (d0, d1, d2), (g0, g1)


# ---- parsing ----

def test_parse_single_node_template():
    t = parse_template(
        "MATCH (d:Drug) WHERE d.id IN $selected "
        "RETURN sum(d.side_effect_count)")
    assert t.placeholders == frozenset({"selected"})


def test_parse_two_hop_template():
    t = parse_template(
        "MATCH (d:Drug)-[:TARGETS]->(g:Gene) WHERE d.id IN $selected "
        "RETURN count(DISTINCT g.id)")
    assert t.placeholders == frozenset({"selected"})
    assert t.ast.pattern.edge is not None


def test_parse_error_carries_byte_offset():
    bad = "MATCH (d:Drug RETURN"
    with pytest.raises(ParseError) as err:
        parse_query(bad)
    assert err.value.offset is not None
    assert 0 <= err.value.offset <= len(bad)


def test_unknown_aggregate_rejected():
    with pytest.raises(ParseError):
        parse_query("MATCH (a:A) RETURN median(a.x)")


def test_empty_text_rejected():
    with pytest.raises(ParseError):
        parse_query("")


def test_render_round_trip():
    text = ("MATCH (d:Drug)-[:TARGETS]->(g:Gene) "
            "WHERE d.id IN [1, 2, 3] AND d.n > 4 "
            "RETURN count(DISTINCT g.id)")
    q = parse_query(text)
    assert parse_query(render_query(q.ast)).ast == q.ast


# ---- substitution ----

def test_list_substitution_inlines_literal():
    t = parse_template(
        "MATCH (d:Drug) WHERE d.id IN $selected RETURN count(*)")
    q = substitute(t, lists={"selected": [3, 17, 42]})
    assert "[3, 17, 42]" in render_query(q.ast)


def test_scalar_substitution():
    t = parse_template("MATCH (x:N) WHERE x.n > $k RETURN count(*)")
    q = substitute(t, scalars={"k": 5})
    assert "5" in render_query(q.ast)


def test_unbound_placeholder_raises():
    t = parse_template(
        "MATCH (d:Drug) WHERE d.id IN $selected RETURN count(*)")
    with pytest.raises(SubstitutionError, match="selected"):
        substitute(t)


def test_list_bound_as_scalar_rejected():
    t = parse_template("MATCH (x:N) WHERE x.n > $k RETURN count(*)")
    with pytest.raises(TypeError):
        substitute(t, scalars={"k": [1, 2]})


def test_list_placeholder_outside_in_rejected():
    t = parse_template("MATCH (x:N) WHERE x.n > $k RETURN count(*)")
    with pytest.raises(TypeError):
        substitute(t, lists={"k": [1, 2]})


def test_in_list_cap():
    t = parse_template("MATCH (x:N) WHERE x.id IN $s RETURN count(*)")
    with pytest.raises(SubstitutionError):
        substitute(t, lists={"s": list(range(MAX_IN_LIST + 1))})


def test_substitution_leaves_template_reusable():
    t = parse_template(
        "MATCH (d:Drug) WHERE d.id IN $selected RETURN count(*)")
    a = substitute(t, lists={"selected": [0]})
    b = substitute(t, lists={"selected": [1, 2]})
    assert render_query(a.ast) != render_query(b.ast)


# ---- execution ----

def test_sum_over_selection():
    g, drugs, _ = drug_gene_graph()
    t = parse_template(
        "MATCH (d:Drug) WHERE d.id IN $sel RETURN sum(d.side_effect_count)")
    q = substitute(t, lists={"sel": [drugs[0], drugs[2]]})
    assert execute(g, q).scalar() == 11


def test_count_distinct_shared_gene():
    g, drugs, _ = drug_gene_graph()
    t = parse_template(
        "MATCH (d:Drug)-[:TARGETS]->(g:Gene) WHERE d.id IN $sel "
        "RETURN count(DISTINCT g.id)")
    q = substitute(t, lists={"sel": [drugs[0], drugs[2]]})
    assert execute(g, q).scalar() == 1  # same gene counted once


def test_empty_aggregate_conventions():
    g, _, _ = drug_gene_graph()
    base = "MATCH (d:Drug) WHERE d.id IN [] RETURN "
    assert execute(g, parse_query(base + "sum(d.side_effect_count)")).scalar() == 0
    assert execute(g, parse_query(base + "count(*)")).scalar() == 0
    for agg in ("min", "max", "avg"):
        got = execute(g, parse_query(base + f"{agg}(d.side_effect_count)")).scalar()
        assert got is None


def test_missing_property_fails_filter_and_counts():
    g = PropertyGraph()
    g.add_node({"N"}, {"x": 1})
    g.add_node({"N"}, {})  # no x
    g.add_node({"N"}, {"x": 5})
    g.freeze()
    table = execute(g, parse_query("MATCH (a:N) WHERE a.x > 0 RETURN count(*)"))
    assert table.scalar() == 2
    assert table.missing_property_count == 1


def test_missing_property_in_aggregate_contributes_nothing():
    g = PropertyGraph()
    g.add_node({"N"}, {"x": 3})
    g.add_node({"N"}, {})
    g.freeze()
    table = execute(g, parse_query("MATCH (a:N) RETURN sum(a.x)"))
    assert table.scalar() == 3
    assert table.missing_property_count == 1


def test_bare_expression_rows_and_row_order():
    g, drugs, _ = drug_gene_graph()
    table = execute(g, parse_query(
        "MATCH (d:Drug) WHERE d.side_effect_count > 1 "
        "RETURN d.id, d.side_effect_count"))
    assert table.columns == ["d.id", "d.side_effect_count"]
    assert table.rows == [(0, 4), (1, 2), (2, 7)]  # ascending node id


def test_collect_distinct():
    g, drugs, genes = drug_gene_graph()
    table = execute(g, parse_query(
        "MATCH (d:Drug)-[:TARGETS]->(g:Gene) RETURN collect(DISTINCT g.id)"))
    assert sorted(table.scalar()) == sorted(set(genes))


def test_arithmetic_and_boolean_operators():
    g = PropertyGraph()
    g.add_node({"N"}, {"a": 2, "b": 3.0})
    g.freeze()
    assert execute(g, parse_query(
        "MATCH (x:N) WHERE x.a * 2 + 1 = 5 AND NOT x.b < 1 "
        "RETURN count(*)")).scalar() == 1
    assert execute(g, parse_query(
        "MATCH (x:N) WHERE x.a > 5 OR x.b >= 3 RETURN count(*)")).scalar() == 1


def test_int_float_comparison_coerces():
    g = PropertyGraph()
    g.add_node({"N"}, {"a": 2})
    g.freeze()
    assert execute(g, parse_query(
        "MATCH (x:N) WHERE x.a = 2.0 RETURN count(*)")).scalar() == 1


def test_type_mismatch_comparison_errors():
    g = PropertyGraph()
    g.add_node({"N"}, {"a": "text"})
    g.freeze()
    with pytest.raises(ExecutionError):
        execute(g, parse_query("MATCH (x:N) WHERE x.a < 3 RETURN count(*)"))


def test_avg_returns_float():
    g = PropertyGraph()
    g.add_node({"N"}, {"v": 1})
    g.add_node({"N"}, {"v": 2})
    g.freeze()
    assert execute(g, parse_query(
        "MATCH (x:N) RETURN avg(x.v)")).scalar() == pytest.approx(1.5)


def test_execution_is_pure():
    g, drugs, _ = drug_gene_graph()
    before = [(n.id, dict(n.properties)) for n in g.nodes]
    execute(g, parse_query("MATCH (d:Drug) RETURN count(*)"))
    assert [(n.id, dict(n.properties)) for n in g.nodes] == before


def test_execute_requires_frozen_graph():
    g = PropertyGraph()
    g.add_node({"N"}, {})
    with pytest.raises(ExecutionError):
        execute(g, parse_query("MATCH (x:N) RETURN count(*)"))


def test_determinism():
    g, _, _ = drug_gene_graph()
    q = parse_query(
        "MATCH (d:Drug)-[:TARGETS]->(g:Gene) RETURN d.id, g.id")
    assert execute(g, q) == execute(g, q)


def test_in_substitution_equals_manual_filter():
    """IN-substituted query == brute-force membership filter, row for row,
    on random graphs up to 100 nodes."""
    rng = SeededRng(31)
    template = parse_template(
        "MATCH (d:D) WHERE d.id IN $sel RETURN d.id, d.v")
    for _ in range(20):
        g = PropertyGraph()
        n = rng.integer(2, 101)
        values = []
        for i in range(n):
            v = rng.integer(0, 50)
            g.add_node({"D"}, {"v": v})
            values.append(v)
        g.freeze()
        sel = rng.sample(n, rng.integer(1, n + 1))
        got = execute(g, substitute(template, lists={"sel": sel}))
        want = [(i, values[i]) for i in sorted(sel)]
        assert got.rows == want


def test_scalar_requires_1x1():
    g, _, _ = drug_gene_graph()
    table = execute(g, parse_query("MATCH (d:Drug) RETURN d.id"))
    with pytest.raises(ExecutionError):
        table.scalar()
