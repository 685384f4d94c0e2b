import random

import pytest

from schemarl import (
    BinaryTable,
    Catalog,
    CatalogEntry,
    ConstraintError,
    ConstraintPool,
    InvalidActionError,
    JoinAction,
    PhysicalTable,
    SchemaState,
    apply_join,
    init_state,
    joinable,
    parse_constraints,
    parse_signature,
    signature,
    state_facts,
    valid_actions,
)


def all_partitions(items):
    """Independent partition enumerator (used as the signature oracle)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in all_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1:]
        yield [[first]] + part


def make_state(groups, family="e"):
    tables = tuple(PhysicalTable(id=min(g), attrs=tuple(sorted(g)),
                                 key_cols=(family,), rows=())
                   for g in groups)
    location = {a: min(g) for g in groups for a in g}
    return SchemaState(tables=tables, attr_location=location)


# ---------------------------------------------------------------------------
# init_state
# ---------------------------------------------------------------------------

def test_init_state_one_table_per_binary_table(canonical):
    state = canonical["state0"]
    assert len(state.tables) == len(canonical["catalog"])
    assert all(len(t.attrs) == 1 for t in state.tables)


def test_init_state_key_col_is_entity_label(canonical):
    catalog = canonical["catalog"]
    for table in canonical["state0"].tables:
        assert table.key_cols == (catalog.family_of(table.attrs[0]),)


def test_init_state_signature_stable(canonical):
    tables = canonical["env"].initial_tables
    assert signature(init_state(tables)) == signature(init_state(tables))
    assert signature(canonical["state0"]) == \
        "|".join("{%d}" % a for a in range(len(canonical["catalog"])))


# ---------------------------------------------------------------------------
# joinable / valid_actions
# ---------------------------------------------------------------------------

def test_same_family_tables_joinable(canonical):
    assert joinable(canonical["pool"], canonical["state0"], 0, 1)


def test_cross_model_needs_constraint(canonical):
    state = canonical["state0"]
    catalog = canonical["catalog"]
    with_pool = canonical["pool"]
    empty_pool = ConstraintPool()
    assert joinable(with_pool, state, 2, 4)
    assert not joinable(empty_pool, state, 2, 4)


def test_colocated_attrs_not_joinable(canonical):
    state = apply_join(canonical["pool"], canonical["state0"], JoinAction(0, 1))
    assert not joinable(canonical["pool"], state, 0, 1)


def test_valid_actions_match_double_loop(canonical):
    pool, state = canonical["pool"], canonical["state0"]
    n = len(canonical["catalog"])
    expected = [JoinAction(a, b) for a in range(n) for b in range(n)
                if a < b and joinable(pool, state, a, b)]
    assert valid_actions(pool, state) == expected


def test_valid_actions_after_merges_match_double_loop(canonical):
    pool = canonical["pool"]
    state = canonical["state0"]
    rng = random.Random(5)
    n = len(canonical["catalog"])
    for _ in range(4):
        acts = valid_actions(pool, state)
        expected = [JoinAction(a, b) for a in range(n) for b in range(n)
                    if a < b and joinable(pool, state, a, b)]
        assert acts == expected
        state = apply_join(pool, state, acts[rng.randrange(len(acts))])


def test_terminal_state_has_no_actions():
    state = make_state([[0, 1, 2]])
    assert valid_actions(ConstraintPool(), state) == []


def test_adding_constraint_never_removes_actions(canonical):
    state = canonical["state0"]
    catalog = canonical["catalog"]
    base = set(valid_actions(ConstraintPool(), state))
    grown_pool = parse_constraints("2 = 4\n", catalog)
    grown = set(valid_actions(grown_pool, state))
    assert base <= grown


def test_equivalence_links_whole_tables(canonical):
    # after 2 and 4 are co-located with other attrs, their host tables join
    pool = canonical["pool"]
    state = apply_join(pool, canonical["state0"], JoinAction(0, 2))
    state = apply_join(pool, state, JoinAction(4, 5))
    # host(0) now contains 2; host(5) contains 4 -> (0, 5) joinable via 2=4
    assert joinable(pool, state, 0, 5)


# ---------------------------------------------------------------------------
# apply_join
# ---------------------------------------------------------------------------

def binary_fixture():
    title = BinaryTable(attr=0, key_family="person",
                        rows=(("p1", "DB"), ("p2", "ML"), ("p3", "IR")))
    name = BinaryTable(attr=1, key_family="person",
                       rows=(("p1", "Ann"), ("p2", "Bob")))
    return init_state([title, name])


def test_key_join_nulls_pad_missing_side():
    state = binary_fixture()
    merged = apply_join(ConstraintPool(), state, JoinAction(0, 1))
    table = merged.tables[0]
    assert table.attrs == (0, 1)
    assert set(table.rows) == {("p1", "DB", "Ann"), ("p2", "ML", "Bob"),
                               ("p3", "IR", None)}


def test_join_decreases_table_count_by_one(canonical):
    state = canonical["state0"]
    merged = apply_join(canonical["pool"], state, JoinAction(0, 1))
    assert len(merged.tables) == len(state.tables) - 1
    # input state untouched
    assert len(state.tables) == len(canonical["catalog"])


def test_repeated_action_rejected(canonical):
    state = apply_join(canonical["pool"], canonical["state0"], JoinAction(0, 1))
    with pytest.raises(InvalidActionError):
        apply_join(canonical["pool"], state, JoinAction(0, 1))


def test_invalid_cross_family_action_rejected(canonical):
    with pytest.raises(InvalidActionError):
        apply_join(ConstraintPool(), canonical["state0"], JoinAction(2, 4))


def test_partition_invariant_under_random_joins(canonical):
    pool = canonical["pool"]
    rng = random.Random(17)
    n = len(canonical["catalog"])
    for _ in range(10):
        state = canonical["state0"]
        joins = 0
        while True:
            acts = valid_actions(pool, state)
            if not acts:
                break
            state = apply_join(pool, state, acts[rng.randrange(len(acts))])
            joins += 1
            located = sorted(state.attr_location)
            assert located == list(range(n))
            hosted = sorted(a for t in state.tables for a in t.attrs)
            assert hosted == list(range(n))
        assert joins <= n - 1


def test_no_family_mixing_without_constraint(canonical):
    pool = ConstraintPool()
    rng = random.Random(23)
    catalog = canonical["catalog"]
    for _ in range(5):
        state = canonical["state0"]
        while True:
            acts = valid_actions(pool, state)
            if not acts:
                break
            state = apply_join(pool, state, acts[rng.randrange(len(acts))])
        for table in state.tables:
            families = {catalog.family_of(a) for a in table.attrs}
            assert len(families) == 1


def test_state_facts_preserved_by_joins(canonical):
    pool = canonical["pool"]
    catalog = canonical["catalog"]
    baseline = state_facts(canonical["state0"], catalog)
    rng = random.Random(31)
    state = canonical["state0"]
    while True:
        acts = valid_actions(pool, state)
        if not acts:
            break
        state = apply_join(pool, state, acts[rng.randrange(len(acts))])
        assert state_facts(state, catalog) == baseline


# ---------------------------------------------------------------------------
# signature
# ---------------------------------------------------------------------------

def test_signature_initial_three_attrs():
    state = make_state([[0], [1], [2]])
    assert signature(state) == "{0}|{1}|{2}"


def test_signature_permutation_invariant():
    a = make_state([[0, 3], [1], [2, 5]])
    b = make_state([[2, 5], [0, 3], [1]])
    assert signature(a) == signature(b)


def test_signatures_distinct_for_all_partitions_of_5():
    partitions = list(all_partitions(list(range(5))))
    assert len(partitions) == 52  # Bell(5)
    signatures = {signature(make_state(p)) for p in partitions}
    assert len(signatures) == 52


def test_parse_signature_round_trip():
    state = make_state([[0, 3], [1], [2, 5]])
    assert parse_signature(signature(state)) == [[0, 3], [1], [2, 5]]
    assert parse_signature("0,3|1|2") == [[0, 3], [1], [2]]


# ---------------------------------------------------------------------------
# parse_constraints
# ---------------------------------------------------------------------------

def small_catalog():
    kinds = ["TEXT"] * 6 + ["INTEGER", "FLOAT"]
    return Catalog(entries=tuple(
        CatalogEntry(attr=i, name=f"a{i}", source_model="JSON",
                     entity_label="e", value_kind=k)
        for i, k in enumerate(kinds)))


def test_parse_single_pair():
    pool = parse_constraints("5 = 3", small_catalog())
    assert pool.equivalent(5, 3)
    assert not pool.equivalent(5, 2)


def test_parse_comments_and_blanks():
    text = "# comment\n\n5 = 3  # inline\n"
    pool = parse_constraints(text, small_catalog())
    assert pool.equivalent(3, 5)


def test_empty_text_gives_empty_pool():
    pool = parse_constraints("", small_catalog())
    assert pool.classes() == []


def test_transitive_closure():
    pool = parse_constraints("5 = 3\n3 = 1\n", small_catalog())
    assert pool.classes() == [[1, 3, 5]]
    assert pool.equivalent(5, 1)


@pytest.mark.parametrize("text,match", [
    ("42 = 1", "unknown"),
    ("3 = 3", "itself"),
    ("0 = 6", "incompatible"),
    ("nonsense", "expected"),
    ("1 = x", "integers"),
])
def test_constraint_errors(text, match):
    with pytest.raises(ConstraintError, match=match):
        parse_constraints(text, small_catalog())


def test_error_carries_line_number():
    with pytest.raises(ConstraintError, match="line 3"):
        parse_constraints("1 = 2\n\n3 = 3\n", small_catalog())


def test_numeric_kinds_compatible():
    pool = parse_constraints("6 = 7", small_catalog())
    assert pool.equivalent(6, 7)
