import numpy as np
import pytest

from causalpipe import scm
from causalpipe.dag import parse_dag
from causalpipe.dataset import Table
from causalpipe.effects import (
    CausalModelSpec,
    binary_treatment,
    dose_response_curve,
    estimate_propensity,
    gcomp_ace,
    gcomp_interventional_risk,
    ipw_ate,
    mean_z_plugin,
    naive_contrast,
    psm_att,
    standardized_mean_difference,
    validate_spec,
)
from causalpipe.errors import IdentificationError, PositivityError, ValidationError
from causalpipe.regress import sigmoid


def make_table(seed=0, n=10_000, beta_t=0.0, confounding=1.0, t_noise=15.0):
    """Logistic outcome with one confounder; beta_t on the treatment."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    t = 10.0 * confounding * z + 100.0 + t_noise * rng.standard_normal(n)
    p = sigmoid(-1.5 + beta_t * (t - 100.0) + confounding * 0.8 * z)
    y = (rng.random(n) < p).astype(float)
    return Table.from_columns(
        {"T": t, "Z": z, "Y": y},
        {"T": "continuous", "Z": "continuous", "Y": "binary"},
    )


SPEC = CausalModelSpec(treatment="T", outcome="Y", adjustment=("Z",))


class TestCausalModelSpec:
    def test_overlap_rejected(self):
        with pytest.raises(ValidationError):
            CausalModelSpec(treatment="T", outcome="Y", adjustment=("T",))
        with pytest.raises(ValidationError):
            CausalModelSpec(treatment="T", outcome="Y", adjustment=("A",), precision=("A",))
        with pytest.raises(ValidationError):
            CausalModelSpec(treatment="T", outcome="T", adjustment=())

    def test_validate_spec_against_dag(self):
        dag = parse_dag("Z; T; Y; Z -> T; Z -> Y; T -> Y;")
        verdict = validate_spec(dag, SPEC)
        assert verdict.valid
        with pytest.raises(IdentificationError):
            validate_spec(dag, CausalModelSpec(treatment="T", outcome="Y", adjustment=()))

    def test_descendant_violation_message(self):
        dag = parse_dag("Z; T; M; Y; Z -> T; Z -> Y; T -> M; M -> Y;")
        with pytest.raises(IdentificationError) as err:
            validate_spec(dag, CausalModelSpec(treatment="T", outcome="Y", adjustment=("Z", "M")))
        assert "descendant" in str(err.value)


class TestGcomp:
    def test_null_effect_risks_equal(self):
        table = make_table(seed=1, beta_t=0.0, t_noise=40.0)
        hi = gcomp_interventional_risk(table, SPEC, 110.0)
        lo = gcomp_interventional_risk(table, SPEC, 90.0)
        assert abs(hi - lo) < 0.003

    def test_matches_mc_oracle(self, reference_table, reference_model):
        spec = scm.reference_scm()
        s1 = float(reference_table.column("SYSBP").mean())
        for s in (s1, s1 - 20.0):
            est = gcomp_interventional_risk(reference_table, reference_model, s)
            oracle = scm.mc_interventional_risk(spec, "SYSBP", s, "CHD", 300_000, seed=50)
            assert abs(est - oracle.risk) < 0.005

    def test_degenerate_contrast(self):
        table = make_table(seed=2, beta_t=0.01)
        res = gcomp_ace(table, SPEC, 100.0, 100.0, n_boot=100, seed=0)
        assert res.ace == 0.0
        assert res.ci_low == 0.0 and res.ci_high == 0.0

    def test_bootstrap_reproducible(self):
        table = make_table(seed=3, n=2000, beta_t=0.02)
        a = gcomp_ace(table, SPEC, 110.0, 90.0, n_boot=120, seed=7)
        b = gcomp_ace(table, SPEC, 110.0, 90.0, n_boot=120, seed=7)
        assert a == b

    def test_row_order_invariance(self):
        table = make_table(seed=4, n=3000, beta_t=0.02)
        perm = np.random.default_rng(5).permutation(table.n_rows)
        shuffled = table.select_rows(perm)
        a = gcomp_interventional_risk(table, SPEC, 105.0)
        b = gcomp_interventional_risk(shuffled, SPEC, 105.0)
        assert a == pytest.approx(b, abs=1e-10)

    def test_precision_rescale_invariance(self):
        rng = np.random.default_rng(60)
        table = make_table(seed=6, n=3000, beta_t=0.02)
        extra = rng.standard_normal(3000)
        with_prec = Table.from_columns(
            {
                "T": table.column("T"),
                "Z": table.column("Z"),
                "P": extra,
                "Y": table.column("Y"),
            },
            {"T": "continuous", "Z": "continuous", "P": "continuous", "Y": "binary"},
        )
        spec = CausalModelSpec(treatment="T", outcome="Y", adjustment=("Z",), precision=("P",))
        a = gcomp_interventional_risk(with_prec, spec, 105.0)
        rescaled = with_prec.replace_columns({"P": 100.0 * extra - 7.0})
        b = gcomp_interventional_risk(rescaled, spec, 105.0)
        assert a == pytest.approx(b, abs=1e-8)

    def test_n_boot_minimum(self):
        table = make_table(seed=7, n=1000)
        with pytest.raises(ValidationError):
            gcomp_ace(table, SPEC, 110.0, 90.0, n_boot=50, seed=0)


class TestDoseResponse:
    def test_singleton_matches_gcomp(self):
        table = make_table(seed=8, n=3000, beta_t=0.02)
        curve = dose_response_curve(table, SPEC, [104.0])
        assert curve[0][1] == pytest.approx(
            gcomp_interventional_risk(table, SPEC, 104.0), abs=1e-12
        )

    def test_monotone_with_positive_coefficient(self):
        table = make_table(seed=9, n=5000, beta_t=0.03)
        curve = dose_response_curve(table, SPEC, list(np.linspace(80.0, 120.0, 9)))
        risks = [r for _, r in curve]
        assert all(a < b for a, b in zip(risks, risks[1:]))

    def test_empty_grid(self):
        table = make_table(seed=10, n=1000)
        with pytest.raises(ValidationError):
            dose_response_curve(table, SPEC, [])


class TestNaiveContrast:
    def test_unconfounded_matches_gcomp(self):
        table = make_table(seed=11, n=20_000, beta_t=0.02, confounding=0.0)
        naive = naive_contrast(table, "T", "Y", 110.0, 90.0)
        adjusted = gcomp_ace(table, SPEC, 110.0, 90.0, n_boot=100, seed=0).ace
        assert abs(naive - adjusted) < 0.005

    def test_zero_association(self):
        table = make_table(seed=12, n=20_000, beta_t=0.0, confounding=0.0)
        assert abs(naive_contrast(table, "T", "Y", 110.0, 90.0)) < 0.01

    def test_band_variant(self):
        table = make_table(seed=13, n=20_000, beta_t=0.02)
        band = naive_contrast(table, "T", "Y", 110.0, 90.0, method="band")
        model = naive_contrast(table, "T", "Y", 110.0, 90.0, method="model")
        assert np.sign(band) == np.sign(model)

    def test_unknown_method(self):
        table = make_table(seed=14, n=1000)
        with pytest.raises(ValidationError):
            naive_contrast(table, "T", "Y", 110.0, 90.0, method="magic")


class TestMeanZPlugin:
    def test_close_to_ace_when_nearly_linear(self):
        table = make_table(seed=15, n=20_000, beta_t=0.005, confounding=0.3)
        plugin = mean_z_plugin(table, SPEC, 110.0, 90.0)
        marginal = gcomp_ace(table, SPEC, 110.0, 90.0, n_boot=100, seed=0).ace
        assert abs(plugin - marginal) < 0.002

    def test_differs_under_strong_curvature(self):
        # wide logit spread puts many units in the saturated region
        rng = np.random.default_rng(16)
        n = 20_000
        z = rng.standard_normal(n)
        t = 100.0 + 10.0 * z + 10.0 * rng.standard_normal(n)
        p = sigmoid(-6.0 + 0.1 * (t - 100.0) + 3.0 * z)
        y = (rng.random(n) < p).astype(float)
        table = Table.from_columns(
            {"T": t, "Z": z, "Y": y},
            {"T": "continuous", "Z": "continuous", "Y": "binary"},
        )
        plugin = mean_z_plugin(table, SPEC, 110.0, 90.0)
        marginal = gcomp_ace(table, SPEC, 110.0, 90.0, n_boot=100, seed=0).ace
        assert abs(plugin - marginal) > 0.002


class TestPropensity:
    def test_empty_z_gives_treated_fraction(self):
        table = make_table(seed=17, n=2000)
        t_bin, _ = binary_treatment(table, SPEC)
        scores = estimate_propensity(table, (), t_bin)
        assert np.allclose(scores, t_bin.mean(), atol=1e-6)

    def test_row_permutation_equivariance(self):
        table = make_table(seed=18, n=2000)
        t_bin, _ = binary_treatment(table, SPEC)
        scores = estimate_propensity(table, ("Z",), t_bin)
        perm = np.random.default_rng(19).permutation(table.n_rows)
        scores_perm = estimate_propensity(table.select_rows(perm), ("Z",), t_bin[perm])
        assert np.allclose(scores[perm], scores_perm, atol=1e-8)

    def test_rank_agreement_with_true_scores(self):
        from causalpipe.cate import spearman

        rng = np.random.default_rng(20)
        n = 5000
        z = rng.standard_normal(n)
        true_p = sigmoid(0.3 + 1.2 * z)
        t_bin = (rng.random(n) < true_p).astype(float)
        table = Table.from_columns(
            {"T": t_bin, "Z": z, "Y": t_bin},
            {"T": "binary", "Z": "continuous", "Y": "binary"},
        )
        scores = estimate_propensity(table, ("Z",), t_bin)
        assert spearman(scores, true_p) > 0.95


class TestPsm:
    def test_identical_distributions_balance(self):
        rng = np.random.default_rng(21)
        n = 4000
        z = rng.standard_normal(n)
        t = 100.0 + 15.0 * rng.standard_normal(n)  # independent of z
        y = (rng.random(n) < 0.2).astype(float)
        table = Table.from_columns(
            {"T": t, "Z": z, "Y": y},
            {"T": "continuous", "Z": "continuous", "Y": "binary"},
        )
        res = psm_att(table, SPEC, caliper=0.05, n_boot=100, seed=0)
        for before, after in res.balance.values():
            assert abs(after) < 0.1

    def test_caliper_zero_keeps_exact_matches_only(self):
        # treated (3, 4) and controls (1, 2) share propensity levels via Z
        t = np.array([1.0, 2.0, 3.0, 4.0] * 10, dtype=float)
        z = np.array([0.0, 1.0, 0.0, 1.0] * 10, dtype=float)
        y = np.zeros(40)
        table = Table.from_columns(
            {"T": t, "Z": z, "Y": y},
            {"T": "continuous", "Z": "binary", "Y": "binary"},
        )
        res = psm_att(table, SPEC, caliper=0.0, n_boot=100, seed=0)
        ps = estimate_propensity(table, ("Z",), (t > np.median(t)).astype(float))
        for a, b in res.pairs:
            assert ps[a] == ps[b]

    def test_pairs_respect_caliper_and_strata(self, reference_table, reference_model):
        stratum = (reference_table.column("AGE") > 50).astype(float)
        table = Table.from_columns(
            {
                "SYSBP": reference_table.column("SYSBP"),
                "AGE": reference_table.column("AGE"),
                "BMI": reference_table.column("BMI"),
                "OLD": stratum,
                "CHD": reference_table.column("CHD"),
            },
            {
                "SYSBP": "continuous",
                "AGE": "continuous",
                "BMI": "continuous",
                "OLD": "binary",
                "CHD": "binary",
            },
        )
        res = psm_att(table, reference_model, caliper=0.02, stratum="OLD", n_boot=50, seed=0)
        t_bin, _ = binary_treatment(table, reference_model)
        ps = estimate_propensity(table, reference_model.adjustment, t_bin)
        old = table.column("OLD")
        used_controls = set()
        for a, b in res.pairs:
            assert old[a] == old[b]
            assert abs(ps[a] - ps[b]) <= 0.02 + 1e-12
            assert t_bin[a] == 1.0 and t_bin[b] == 0.0
            assert b not in used_controls
            used_controls.add(b)

    def test_empty_stratum_rejected(self):
        rng = np.random.default_rng(40)
        t = np.array([1.0, 2.0, 3.0, 200.0] * 5, dtype=float)
        g = np.array([0.0, 0.0, 0.0, 1.0] * 5, dtype=float)  # stratum 1 all treated
        table = Table.from_columns(
            {"T": t, "Z": rng.standard_normal(20), "G": g, "Y": np.zeros(20)},
            {"T": "continuous", "Z": "continuous", "G": "binary", "Y": "binary"},
        )
        with pytest.raises(ValidationError):
            psm_att(table, SPEC, stratum="G", n_boot=100, seed=0)


class TestSmd:
    def test_identical_groups_zero(self):
        x = np.arange(10.0)
        assert standardized_mean_difference(x, x.copy(), binary=False) == 0.0

    def test_binary_uses_proportion_variance(self):
        a = np.array([1.0] * 6 + [0.0] * 4)  # p=0.6
        b = np.array([1.0] * 4 + [0.0] * 6)  # p=0.4
        expected = (0.6 - 0.4) / np.sqrt((0.6 * 0.4 + 0.4 * 0.6) / 2.0)
        assert standardized_mean_difference(a, b, binary=True) == pytest.approx(expected)


class TestIpw:
    def test_constant_propensity_reduces_to_mean_difference(self):
        rng = np.random.default_rng(22)
        n = 4000
        t = 100.0 + 15.0 * rng.standard_normal(n)
        y = (rng.random(n) < 0.25).astype(float)
        table = Table.from_columns(
            {"T": t, "Z": np.zeros(n), "Y": y},
            {"T": "continuous", "Z": "continuous", "Y": "binary"},
        )
        spec = CausalModelSpec(treatment="T", outcome="Y", adjustment=())
        res = ipw_ate(table, spec, n_boot=100, seed=0)
        t_bin, _ = binary_treatment(table, spec)
        plain = y[t_bin == 1.0].mean() - y[t_bin == 0.0].mean()
        assert res.ate == pytest.approx(plain, abs=1e-9)
        assert res.weight_summary[0] == pytest.approx(1.0, abs=1e-9)

    def test_matches_discrete_standardization_oracle(self):
        table = scm.generate(scm.discrete_confounder_scm(), 20_000, seed=30)
        spec = CausalModelSpec(treatment="T", outcome="Y", adjustment=("Z",))
        res = ipw_ate(table, spec, n_boot=100, seed=0)
        t_bin, _ = binary_treatment(table, spec)
        y = table.column("Y")
        z = table.column("Z")
        oracle = 0.0
        for value in (0.0, 1.0):
            sel = z == value
            e1 = y[sel & (t_bin == 1.0)].mean()
            e0 = y[sel & (t_bin == 0.0)].mean()
            oracle += (e1 - e0) * sel.mean()
        assert abs(res.ate - oracle) < 0.003

    def test_weight_cap_exact(self, reference_table, reference_model):
        res = ipw_ate(reference_table, reference_model, trim_percentile=90, n_boot=100, seed=0)
        assert res.weight_summary[0] == res.weight_summary[2]

    def test_positivity_error_names_rows(self):
        # wide logit range: the fitted scores reach ~1e-11 in the tails while
        # the overlap region near zero keeps the fit non-separated
        rng = np.random.default_rng(23)
        n = 2000
        z = np.linspace(-25.0, 25.0, n)
        t_bin = (rng.random(n) < sigmoid(z)).astype(float)
        t = t_bin + 0.1 * rng.random(n)
        y = (rng.random(n) < 0.3).astype(float)
        table = Table.from_columns(
            {"T": t, "Z": z, "Y": y},
            {"T": "continuous", "Z": "continuous", "Y": "binary"},
        )
        with pytest.raises(PositivityError) as err:
            ipw_ate(table, SPEC, n_boot=100, seed=0)
        assert len(err.value.rows) > 0
