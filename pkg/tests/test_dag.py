import itertools

import pytest

from causalpipe.dag import (
    Dag,
    d_separated,
    descendants,
    is_valid_backdoor,
    load_dag,
    parse_dag,
    render_dag,
)
from causalpipe.dag import testable_implications as implications_of
from causalpipe.errors import (
    DagCycleError,
    DagStructureError,
    DagSyntaxError,
    UnknownNodeError,
    ValidationError,
)

FRAMINGHAM_DAG = "src/causalpipe/data/framingham.dag"


class TestParse:
    def test_minimal_graph(self):
        dag = parse_dag("A; B; A -> B;")
        assert dag.nodes == ("A", "B")
        assert dag.edges == (("A", "B"),)

    def test_two_cycle_rejected(self):
        with pytest.raises(DagCycleError) as err:
            parse_dag("A; B; A -> B; B -> A;")
        assert "A" in err.value.cycle and "B" in err.value.cycle

    def test_comments_and_blank_lines(self):
        dag = parse_dag("# header\nA;\n\nB;  # trailing\nA -> B;\n")
        assert dag == parse_dag("A; B; A -> B;")

    def test_syntax_error_carries_position(self):
        with pytest.raises(DagSyntaxError) as err:
            parse_dag("A;\nB\nA -> B;")
        assert err.value.line == 2

    def test_missing_semicolon_after_edge(self):
        with pytest.raises(DagSyntaxError):
            parse_dag("A; B; A -> B")

    def test_bad_arrow_target(self):
        with pytest.raises(DagSyntaxError):
            parse_dag("A; B; A -> ;")

    def test_duplicate_node(self):
        with pytest.raises(DagStructureError):
            parse_dag("A; A;")

    def test_duplicate_edge(self):
        with pytest.raises(DagStructureError):
            parse_dag("A; B; A -> B; A -> B;")

    def test_undeclared_endpoint(self):
        with pytest.raises(DagStructureError):
            parse_dag("A; A -> B;")

    def test_self_loop(self):
        with pytest.raises(DagStructureError):
            parse_dag("A; A -> A;")

    def test_order_independent_equality(self):
        a = parse_dag("A; B; C; A -> B; B -> C;")
        b = parse_dag("C; B; A; B -> C; A -> B;")
        assert a == b

    def test_roundtrip_small(self):
        dag = parse_dag("A; B; C; A -> B; A -> C;")
        assert parse_dag(render_dag(dag)) == dag

    def test_roundtrip_random_dags(self):
        import random

        rng = random.Random(5)
        names = ["N%d" % i for i in range(7)]
        for _ in range(50):
            edges = [
                (names[i], names[j])
                for i in range(7)
                for j in range(i + 1, 7)
                if rng.random() < 0.3
            ]
            dag = Dag(names, edges)
            assert parse_dag(render_dag(dag)) == dag


class TestDescendants:
    def test_chain(self):
        dag = parse_dag("A; B; C; A -> B; B -> C;")
        assert descendants(dag, "A") == {"B", "C"}

    def test_isolated(self):
        dag = parse_dag("X; Y; X -> Y;")
        assert descendants(dag, "Y") == set()

    def test_unknown_node(self):
        dag = parse_dag("A;")
        with pytest.raises(UnknownNodeError):
            descendants(dag, "Z")


class TestDSeparation:
    def test_chain_blocked_by_middle(self):
        dag = parse_dag("A; B; C; A -> B; B -> C;")
        assert d_separated(dag, "A", "C", {"B"})
        assert not d_separated(dag, "A", "C", set())

    def test_collider_opens_when_conditioned(self):
        dag = parse_dag("A; B; C; A -> C; B -> C;")
        assert d_separated(dag, "A", "B", set())
        assert not d_separated(dag, "A", "B", {"C"})

    def test_collider_descendant_opens(self):
        dag = parse_dag("A; B; C; D; A -> C; B -> C; C -> D;")
        assert not d_separated(dag, "A", "B", {"D"})

    def test_argument_validation(self):
        dag = parse_dag("A; B; A -> B;")
        with pytest.raises(ValidationError):
            d_separated(dag, "A", "A", set())
        with pytest.raises(ValidationError):
            d_separated(dag, "A", "B", {"A"})
        with pytest.raises(UnknownNodeError):
            d_separated(dag, "A", "Q", set())

    def test_symmetry_on_random_graphs(self):
        import random

        rng = random.Random(3)
        names = ["N%d" % i for i in range(6)]
        for _ in range(30):
            edges = [
                (names[i], names[j])
                for i in range(6)
                for j in range(i + 1, 6)
                if rng.random() < 0.35
            ]
            dag = Dag(names, edges)
            for _ in range(10):
                x, y = rng.sample(names, 2)
                cond = {n for n in names if n not in (x, y) and rng.random() < 0.3}
                assert d_separated(dag, x, y, cond) == d_separated(dag, y, x, cond)


def brute_force_d_separated(dag, x, y, cond):
    """Path-enumeration oracle: all simple paths, standard blocking rules."""
    parents = {n: dag.parents_of(n) for n in dag.nodes}
    children = {n: dag.children_of(n) for n in dag.nodes}
    neighbors = {n: parents[n] | children[n] for n in dag.nodes}

    def desc(node):
        return descendants(dag, node)

    def blocked(path):
        for i in range(1, len(path) - 1):
            prev_node, node, next_node = path[i - 1], path[i], path[i + 1]
            arrow_in_from_prev = node in children[prev_node]
            arrow_in_from_next = node in children[next_node]
            collider = arrow_in_from_prev and arrow_in_from_next
            if collider:
                if node not in cond and not (desc(node) & cond):
                    return True
            else:
                if node in cond:
                    return True
        return False

    stack = [(x, [x])]
    while stack:
        node, path = stack.pop()
        for nxt in neighbors[node]:
            if nxt in path:
                continue
            if nxt == y:
                if not blocked(path + [nxt]):
                    return False
            else:
                stack.append((nxt, path + [nxt]))
    return True


class TestBackdoor:
    def test_confounder_triangle_empty_set_invalid(self):
        dag = parse_dag("U; T; Y; U -> T; U -> Y; T -> Y;")
        verdict = is_valid_backdoor(dag, "T", "Y", set())
        assert not verdict.valid
        kinds = {v.kind for v in verdict.violations}
        assert kinds == {"open_backdoor_path"}
        assert verdict.violations[0].path == ("T", "U", "Y")

    def test_confounder_triangle_adjusted_valid(self):
        dag = parse_dag("U; T; Y; U -> T; U -> Y; T -> Y;")
        assert is_valid_backdoor(dag, "T", "Y", {"U"}).valid

    def test_descendant_in_set_invalid(self):
        dag = parse_dag("U; T; M; Y; U -> T; U -> Y; T -> M; M -> Y;")
        verdict = is_valid_backdoor(dag, "T", "Y", {"U", "M"})
        assert not verdict.valid
        assert any(
            v.kind == "descendant_of_treatment" and v.node == "M" for v in verdict.violations
        )

    def test_verdict_consistency_random(self):
        import random

        rng = random.Random(9)
        names = ["N%d" % i for i in range(5)]
        for _ in range(100):
            edges = [
                (names[i], names[j])
                for i in range(5)
                for j in range(i + 1, 5)
                if rng.random() < 0.4
            ]
            dag = Dag(names, edges)
            t, y = rng.sample(names, 2)
            z = {n for n in names if n not in (t, y) and rng.random() < 0.4}
            verdict = is_valid_backdoor(dag, t, y, z)
            assert verdict.valid == (len(verdict.violations) == 0)
            if z & descendants(dag, t):
                assert not verdict.valid


class TestTestableImplications:
    def test_complete_dag_empty(self):
        dag = parse_dag("A; B; C; A -> B; A -> C; B -> C;")
        assert implications_of(dag, 3) == []

    def test_chain_includes_endpoints(self):
        dag = parse_dag("A; B; C; A -> B; B -> C;")
        imps = implications_of(dag, 3)
        assert any(i.x == "A" and i.y == "C" and i.cond == frozenset({"B"}) for i in imps)

    def test_every_implication_is_d_separated(self):
        dag = load_dag(FRAMINGHAM_DAG)
        for imp in implications_of(dag, 4):
            assert d_separated(dag, imp.x, imp.y, imp.cond)

    def test_lexicographic_order(self):
        dag = load_dag(FRAMINGHAM_DAG)
        imps = implications_of(dag, 2)
        keys = [(i.x, i.y) for i in imps]
        assert keys == sorted(keys)

    def test_cond_size_restriction(self):
        dag = load_dag(FRAMINGHAM_DAG)
        assert all(len(i.cond) <= 1 for i in implications_of(dag, 1))


class TestFraminghamDag:
    def test_counts(self):
        dag = load_dag(FRAMINGHAM_DAG)
        assert len(dag.nodes) == 11
        assert len(dag.edges) == 24

    def test_sysbp_descendants(self):
        dag = load_dag(FRAMINGHAM_DAG)
        assert {"BPMEDS", "PREVHYP", "CHD"} <= descendants(dag, "SYSBP")

    def test_primary_adjustment_set_valid(self):
        dag = load_dag(FRAMINGHAM_DAG)
        assert is_valid_backdoor(dag, "SYSBP", "CHD", {"AGE", "SEX_MALE", "BMI", "CURSMOKE"}).valid

    def test_bpmeds_invalidates_adjustment(self):
        dag = load_dag(FRAMINGHAM_DAG)
        verdict = is_valid_backdoor(
            dag, "SYSBP", "CHD", {"AGE", "SEX_MALE", "BMI", "CURSMOKE", "BPMEDS"}
        )
        assert not verdict.valid
        assert any(
            v.kind == "descendant_of_treatment" and v.node == "BPMEDS"
            for v in verdict.violations
        )

    def test_stated_independencies(self):
        dag = load_dag(FRAMINGHAM_DAG)
        assert d_separated(dag, "BPMEDS", "TOTCHOL", {"AGE", "SYSBP"})
        assert d_separated(dag, "BPMEDS", "GLUCOSE", {"AGE", "SYSBP"})
        assert d_separated(dag, "SEX_MALE", "GLUCOSE", {"BMI", "DIABETES"})
        assert d_separated(dag, "AGE", "BPMEDS", {"SYSBP"})
        # direct edge retained: sex is not separated from blood pressure
        assert not d_separated(dag, "SEX_MALE", "SYSBP", {"AGE", "BMI"})

    def test_implications_include_age_bpmeds(self):
        dag = load_dag(FRAMINGHAM_DAG)
        imps = implications_of(dag, 2)
        assert any(
            {i.x, i.y} == {"AGE", "BPMEDS"} and i.cond == frozenset({"SYSBP"}) for i in imps
        )

    def test_agrees_with_brute_force_oracle(self):
        dag = load_dag(FRAMINGHAM_DAG)
        import random

        rng = random.Random(17)
        for _ in range(60):
            x, y = rng.sample(dag.nodes, 2)
            cond = {n for n in dag.nodes if n not in (x, y) and rng.random() < 0.25}
            assert d_separated(dag, x, y, cond) == brute_force_d_separated(dag, x, y, cond)
