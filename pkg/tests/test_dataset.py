import numpy as np
import pytest

from causalpipe.dataset import (
    Table,
    complete_cases,
    load_table,
    mcar_test,
    summarize_baseline,
)
from causalpipe.errors import SchemaError, ValidationError
from causalpipe.ranktests import chi2_independence_2x2


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadTable:
    def test_missing_cell_mask(self, tmp_path):
        path = write_csv(tmp_path, "x\n1\n\n")
        table = load_table(path, [("x", "continuous")])
        assert table.n_rows == 2
        assert table.mask("x").tolist() == [False, True]
        assert table.column("x")[0] == 1.0

    def test_header_order_insensitive(self, tmp_path):
        path = write_csv(tmp_path, "b,a\n1,2\n3,4\n")
        table = load_table(path, [("a", "continuous"), ("b", "continuous")])
        assert table.column("a").tolist() == [2.0, 4.0]
        assert table.column("b").tolist() == [1.0, 3.0]

    def test_extra_columns_ignored(self, tmp_path):
        path = write_csv(tmp_path, "a,junk\n1,zzz\n")
        table = load_table(path, [("a", "continuous")])
        assert table.n_rows == 1

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path, "a\n1\n")
        with pytest.raises(SchemaError):
            load_table(path, [("a", "continuous"), ("b", "binary")])

    def test_non_numeric_cell(self, tmp_path):
        path = write_csv(tmp_path, "a\n1\nxyz\n")
        with pytest.raises(SchemaError) as err:
            load_table(path, [("a", "continuous")])
        assert "line 3" in str(err.value)

    def test_binary_out_of_range(self, tmp_path):
        path = write_csv(tmp_path, "a\n0\n2\n")
        with pytest.raises(SchemaError):
            load_table(path, [("a", "binary")])

    def test_unknown_kind(self, tmp_path):
        path = write_csv(tmp_path, "a\n1\n")
        with pytest.raises(SchemaError):
            load_table(path, [("a", "categorical")])


class TestTable:
    def test_binary_invariant_enforced(self):
        with pytest.raises(ValidationError):
            Table.from_columns({"b": np.array([0.0, 2.0])}, {"b": "binary"})

    def test_matrix_requires_complete(self):
        t = Table.from_columns({"x": np.array([1.0, np.nan])}, {"x": "continuous"})
        with pytest.raises(ValidationError):
            t.matrix(("x",))

    def test_select_rows(self):
        t = Table.from_columns(
            {"x": np.array([1.0, 2.0, 3.0])}, {"x": "continuous"}
        )
        assert t.select_rows([2, 0]).column("x").tolist() == [3.0, 1.0]

    def test_unknown_column(self):
        t = Table.from_columns({"x": np.array([1.0])}, {"x": "continuous"})
        with pytest.raises(ValidationError):
            t.column("y")


class TestMcar:
    def _table(self, miss_mask, outcome):
        x = np.arange(len(outcome), dtype=float)
        x[miss_mask] = np.nan
        return Table.from_columns(
            {"x": x, "y": np.asarray(outcome, dtype=float)},
            {"x": "continuous", "y": "binary"},
        )

    def test_random_missingness_not_flagged(self):
        rng = np.random.default_rng(0)
        y = (rng.random(2000) < 0.3).astype(float)
        miss = rng.random(2000) < 0.5
        res = mcar_test(self._table(miss, y), "x", "y")
        assert res.p_value > 0.05
        assert 0.0 < res.missing_fraction < 1.0
        assert res.df == 1

    def test_missingness_equals_outcome(self):
        rng = np.random.default_rng(1)
        y = (rng.random(2000) < 0.4).astype(float)
        res = mcar_test(self._table(y == 1.0, y), "x", "y")
        assert res.p_value < 1e-6

    def test_requires_missing_values(self):
        y = np.array([0.0, 1.0] * 10)
        with pytest.raises(ValidationError):
            mcar_test(self._table(np.zeros(20, dtype=bool), y), "x", "y")

    def test_outcome_must_be_complete(self):
        t = Table.from_columns(
            {"x": np.array([np.nan, 1.0, 2.0, 3.0]), "y": np.array([0.0, 1.0, np.nan, 0.0])},
            {"x": "continuous", "y": "binary"},
        )
        with pytest.raises(ValidationError):
            mcar_test(t, "x", "y")

    def test_pvalues_roughly_uniform_under_null(self):
        # KS-style sanity check over repeated MCAR simulations
        rng = np.random.default_rng(2)
        pvals = []
        for _ in range(500):
            y = (rng.random(400) < 0.35).astype(float)
            miss = rng.random(400) < 0.25
            if not miss.any() or miss.all():
                continue
            pvals.append(mcar_test(self._table(miss, y), "x", "y").p_value)
        pvals = np.sort(pvals)
        grid = np.arange(1, len(pvals) + 1) / len(pvals)
        ks = np.max(np.abs(pvals - grid))
        # alpha=0.01 KS critical value ~ 1.63/sqrt(n); chi-square p-values are
        # discrete so allow headroom
        assert ks < 2.5 * 1.63 / np.sqrt(len(pvals))


class TestCompleteCases:
    def test_identity_when_complete(self):
        t = Table.from_columns({"x": np.array([1.0, 2.0])}, {"x": "continuous"})
        out = complete_cases(t)
        assert out.n_rows == 2
        assert out.column("x").tolist() == [1.0, 2.0]

    def test_drops_rows_with_any_gap(self):
        t = Table.from_columns(
            {
                "x": np.array([1.0, np.nan, 3.0]),
                "y": np.array([0.0, 1.0, 1.0]),
            },
            {"x": "continuous", "y": "binary"},
        )
        out = complete_cases(t)
        assert out.n_rows == 2
        assert out.column("x").tolist() == [1.0, 3.0]


class TestBaseline:
    def test_null_simulation_not_significant(self):
        rng = np.random.default_rng(3)
        t = Table.from_columns(
            {
                "v": rng.standard_normal(2000),
                "g": (rng.random(2000) < 0.5).astype(float),
            },
            {"v": "continuous", "g": "binary"},
        )
        row = summarize_baseline(t, "g", ["v"])[0]
        assert row.p_value > 0.05
        assert row.test == "mann_whitney_u"
        assert row.n_group0 + row.n_group1 == row.n_overall == 2000

    def test_variable_equal_to_group(self):
        rng = np.random.default_rng(4)
        g = (rng.random(500) < 0.5).astype(float)
        t = Table.from_columns({"v": g.copy(), "g": g}, {"v": "binary", "g": "binary"})
        row = summarize_baseline(t, "g", ["v"])[0]
        assert row.p_value < 1e-6
        assert row.test == "chi_square"

    def test_formatting(self):
        t = Table.from_columns(
            {
                "v": np.array([1.0, 2.0, 3.0, 4.0]),
                "b": np.array([1.0, 0.0, 1.0, 1.0]),
                "g": np.array([0.0, 0.0, 1.0, 1.0]),
            },
            {"v": "continuous", "b": "binary", "g": "binary"},
        )
        rows = summarize_baseline(t, "g", ["v", "b"])
        assert "±" in rows[0].overall
        assert "(" in rows[1].overall and "%" in rows[1].overall

    def test_group_must_be_complete(self):
        t = Table.from_columns(
            {"v": np.array([1.0, 2.0]), "g": np.array([0.0, np.nan])},
            {"v": "continuous", "g": "binary"},
        )
        with pytest.raises(ValidationError):
            summarize_baseline(t, "g", ["v"])


class TestChi2Helper:
    def test_known_value(self):
        # 2x2 with margins (50, 50) x (50, 50) and 10 excess: chi2 = 4*10^2/25 = 16
        stat, p = chi2_independence_2x2([[35, 15], [15, 35]])
        assert stat == pytest.approx(16.0)
        assert p == pytest.approx(6.334e-5, rel=1e-3)

    def test_degenerate_margin(self):
        with pytest.raises(ValidationError):
            chi2_independence_2x2([[0, 0], [5, 5]])
