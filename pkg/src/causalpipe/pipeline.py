"""Batch orchestration: config + CSV + DAG in, machine-readable report out.

Stages run in a fixed order (validate, impute, identify, estimate,
refute, CATE, sensitivity); each stage derives its own seed from the
master seed and a stage label, so re-running a single stage reproduces
the numbers of a full run. The report is a single JSON document with
deterministic serialization; per-table CSV side files carry the
plot-ready data (dose-response curve, balance table, CATE subgroups,
permutation null samples). No plotting happens here.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .boosting import BoostParams
from .cate import (
    RLearnerConfig,
    minimum_detectable_effect,
    r_learner,
    spearman,
    subgroup_summary,
    t_learner,
)
from .dag import load_dag, testable_implications
from .dataset import complete_cases, impute_iterative, load_table, mcar_test, summarize_baseline
from .effects import (
    CausalModelSpec,
    binary_treatment,
    gcomp_ace,
    dose_response_curve,
    ipw_ate,
    mean_z_plugin,
    naive_contrast,
    psm_att,
    validate_spec,
)
from .errors import CausalPipeError, ConfigError, StageError, ValidationError
from .observational import fit_observational
from .refute import permutation_refute, placebo_instrument_test
from .regress import partial_correlation
from .sensitivity import e_value_table

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STAGES = (
    "validate",
    "impute",
    "identify",
    "estimate",
    "refute",
    "cate",
    "sensitivity",
)


@dataclass(frozen=True)
class PlaceboSpec:
    instrument: str
    target: str
    adjust: tuple = ()
    pre_specified_invalid: bool = False


@dataclass(frozen=True)
class SubgroupSpec:
    name: str
    column: str
    kind: str  # "binary" | "strata"
    labels: tuple = ()  # binary: (label0, label1)
    cut_points: tuple = ()


@dataclass(frozen=True)
class PipelineConfig:
    data: str
    dag: str
    columns: tuple  # ((name, kind), ...)
    model: CausalModelSpec
    observational_predictors: tuple
    baseline_variables: tuple
    interventions_mmhg: tuple
    bootstrap: dict
    permutations: int = 600
    caliper: float = 0.05
    trim_percentile: float = 98.0
    max_cond_size: int = 2
    rlearner: RLearnerConfig = field(default_factory=RLearnerConfig)
    placebos: tuple = ()
    subgroups: tuple = ()
    psm_stratum: str | None = None
    seed: int = 42
    missing: str = "impute"
    imputation_iterations: int = 10

    def __post_init__(self):
        names = [n for n, _ in self.columns]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate column in schema")
        known = set(names)

        def check_cols(cols, where):
            for c in cols:
                if c not in known:
                    raise ConfigError(f"{where}: column {c!r} not in schema")

        check_cols((self.model.treatment, self.model.outcome), "model")
        check_cols(self.model.adjustment, "model.adjustment")
        check_cols(self.model.precision, "model.precision")
        check_cols(self.observational_predictors, "observational_predictors")
        check_cols(self.baseline_variables, "baseline_variables")
        for p in self.placebos:
            check_cols((p.instrument, p.target) + tuple(p.adjust), "placebos")
        for s in self.subgroups:
            check_cols((s.column,), "subgroups")
        if self.psm_stratum is not None:
            check_cols((self.psm_stratum,), "psm_stratum")
        for key in ("gcomp", "psm", "ipw", "cate_subgroup"):
            if key not in self.bootstrap or int(self.bootstrap[key]) < 1:
                raise ConfigError(f"bootstrap.{key} must be a positive count")
        if self.permutations < 1:
            raise ConfigError("permutations must be positive")
        if not self.interventions_mmhg or any(d < 0 for d in self.interventions_mmhg):
            raise ConfigError("interventions_mmhg must be nonnegative and non-empty")
        if self.caliper < 0:
            raise ConfigError("caliper must be nonnegative")
        if not 50.0 < self.trim_percentile <= 100.0:
            raise ConfigError("trim_percentile must lie in (50, 100]")
        if self.missing not in ("impute", "complete-case"):
            raise ConfigError(f"missing mode {self.missing!r} must be 'impute' or 'complete-case'")

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "data": self.data,
            "dag": self.dag,
            "columns": [[n, k] for n, k in self.columns],
            "model": {
                "treatment": self.model.treatment,
                "outcome": self.model.outcome,
                "adjustment": list(self.model.adjustment),
                "precision": list(self.model.precision),
            },
            "observational_predictors": list(self.observational_predictors),
            "baseline_variables": list(self.baseline_variables),
            "interventions_mmhg": list(self.interventions_mmhg),
            "bootstrap": dict(self.bootstrap),
            "permutations": self.permutations,
            "caliper": self.caliper,
            "trim_percentile": self.trim_percentile,
            "max_cond_size": self.max_cond_size,
            "rlearner": {
                "folds": self.rlearner.folds,
                "residual_threshold": self.rlearner.residual_threshold,
                "clip_percentiles": list(self.rlearner.clip_percentiles),
                "boost": asdict(self.rlearner.boost),
            },
            "placebos": [
                {
                    "instrument": p.instrument,
                    "target": p.target,
                    "adjust": list(p.adjust),
                    "pre_specified_invalid": p.pre_specified_invalid,
                }
                for p in self.placebos
            ],
            "subgroups": [
                {
                    "name": s.name,
                    "column": s.column,
                    "kind": s.kind,
                    "labels": list(s.labels),
                    "cut_points": list(s.cut_points),
                }
                for s in self.subgroups
            ],
            "psm_stratum": self.psm_stratum,
            "seed": self.seed,
            "missing": self.missing,
            "imputation_iterations": self.imputation_iterations,
        }

    @classmethod
    def from_dict(cls, payload):
        try:
            version = payload.get("schema_version", SCHEMA_VERSION)
            if version != SCHEMA_VERSION:
                raise ConfigError(f"unsupported schema_version {version}")
            model = payload["model"]
            subgroups = []
            for s in payload.get("subgroups", ()):
                labels = s.get("labels", {})
                if isinstance(labels, dict):
                    labels = (labels.get("0", "0"), labels.get("1", "1")) if labels else ()
                subgroups.append(
                    SubgroupSpec(
                        name=s["name"],
                        column=s["column"],
                        kind=s.get("kind", "binary"),
                        labels=tuple(labels),
                        cut_points=tuple(float(c) for c in s.get("cut_points", ())),
                    )
                )
            rl = payload.get("rlearner", {})
            boost = rl.get("boost", {})
            return cls(
                data=payload["data"],
                dag=payload["dag"],
                columns=tuple((str(n), str(k)) for n, k in payload["columns"]),
                model=CausalModelSpec(
                    treatment=model["treatment"],
                    outcome=model["outcome"],
                    adjustment=tuple(model.get("adjustment", ())),
                    precision=tuple(model.get("precision", ())),
                ),
                observational_predictors=tuple(payload.get("observational_predictors", ())),
                baseline_variables=tuple(payload.get("baseline_variables", ())),
                interventions_mmhg=tuple(float(d) for d in payload["interventions_mmhg"]),
                bootstrap={k: int(v) for k, v in payload["bootstrap"].items()},
                permutations=int(payload.get("permutations", 600)),
                caliper=float(payload.get("caliper", 0.05)),
                trim_percentile=float(payload.get("trim_percentile", 98)),
                max_cond_size=int(payload.get("max_cond_size", 2)),
                rlearner=RLearnerConfig(
                    folds=int(rl.get("folds", 5)),
                    residual_threshold=float(rl.get("residual_threshold", 2.0)),
                    clip_percentiles=tuple(rl.get("clip_percentiles", (5, 95))),
                    boost=BoostParams(
                        n_estimators=int(boost.get("n_estimators", 200)),
                        max_depth=int(boost.get("max_depth", 3)),
                        learning_rate=float(boost.get("learning_rate", 0.05)),
                        min_leaf=int(boost.get("min_leaf", 20)),
                    ),
                ),
                placebos=tuple(
                    PlaceboSpec(
                        instrument=p["instrument"],
                        target=p["target"],
                        adjust=tuple(p.get("adjust", ())),
                        pre_specified_invalid=bool(p.get("pre_specified_invalid", False)),
                    )
                    for p in payload.get("placebos", ())
                ),
                subgroups=tuple(subgroups),
                psm_stratum=payload.get("psm_stratum"),
                seed=int(payload.get("seed", 42)),
                missing=payload.get("missing", "impute"),
                imputation_iterations=int(payload.get("imputation_iterations", 10)),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc}") from exc

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        config = cls.from_dict(payload)
        base = os.path.dirname(os.path.abspath(path))
        return config.resolve_paths(base)

    def resolve_paths(self, base):
        data = self.data if os.path.isabs(self.data) else os.path.join(base, self.data)
        dag = self.dag if os.path.isabs(self.dag) else os.path.join(base, self.dag)
        if data == self.data and dag == self.dag:
            return self
        payload = self.to_dict()
        payload["data"] = data
        payload["dag"] = dag
        return PipelineConfig.from_dict(payload)


def stage_seed(master_seed, label):
    """Stage seeds combine the master seed with a stable label hash."""
    return int((int(master_seed) + zlib.crc32(label.encode("utf-8"))) % 2**31)


def subgroup_labels(table, sub):
    """Row labels for a subgroup definition (binary levels or cut-point strata)."""
    col = table.column(sub.column)
    if sub.kind == "binary":
        lab0, lab1 = (sub.labels + ("0", "1"))[:2] if sub.labels else ("0", "1")
        return np.where(col == 1.0, lab1, lab0)
    if sub.kind == "strata":
        cuts = tuple(sub.cut_points)
        if not cuts:
            raise ConfigError(f"subgroup {sub.name!r}: strata need cut_points")
        edges = (-np.inf,) + cuts + (np.inf,)
        names = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if lo == -np.inf:
                names.append(f"<{hi:g}")
            elif hi == np.inf:
                names.append(f">={lo:g}")
            else:
                names.append(f"{lo:g}-{hi:g}")
        idx = np.digitize(col, cuts, right=False)
        return np.asarray([names[i] for i in idx])
    raise ConfigError(f"subgroup {sub.name!r}: unknown kind {sub.kind!r}")


class _Run:
    """Lazily computes and caches the shared intermediate artifacts."""

    def __init__(self, config):
        self.config = config
        self.durations = {}
        self._cache = {}

    def _timed(self, label, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except CausalPipeError as exc:
            raise StageError(label, exc) from exc
        self.durations[label] = round(time.perf_counter() - start, 3)
        return result

    def raw_table(self):
        if "raw" not in self._cache:
            self._cache["raw"] = self._timed(
                "load", lambda: load_table(self.config.data, self.config.columns)
            )
        return self._cache["raw"]

    def dag(self):
        if "dag" not in self._cache:
            self._cache["dag"] = self._timed("validate", lambda: load_dag(self.config.dag))
        return self._cache["dag"]

    def identify(self):
        if "verdict" not in self._cache:
            def _check():
                verdict = validate_spec(self.dag(), self.config.model)
                implications = testable_implications(self.dag(), self.config.max_cond_size)
                return verdict, implications

            self._cache["verdict"] = self._timed("identify", _check)
        return self._cache["verdict"]

    def analysis_table(self):
        if "analysis" not in self._cache:
            def _prepare():
                raw = self.raw_table()
                if self.config.missing == "impute":
                    return impute_iterative(
                        raw,
                        iterations=self.config.imputation_iterations,
                        seed=stage_seed(self.config.seed, "impute"),
                    )
                return complete_cases(raw)

            self._cache["analysis"] = self._timed("impute", _prepare)
        return self._cache["analysis"]

    def intervention_levels(self):
        table = self.analysis_table()
        s1 = float(table.column(self.config.model.treatment).mean())
        s0 = s1 - float(self.config.interventions_mmhg[0])
        return s1, s0

    # ---------------- report sections ----------------

    def baseline_section(self):
        def _build():
            raw = self.raw_table()
            table = self.analysis_table()
            outcome = self.config.model.outcome
            mcar_rows = []
            for name in raw.names:
                if name != outcome and raw.mask(name).any():
                    res = mcar_test(raw, name, outcome)
                    mcar_rows.append(
                        {
                            "variable": res.variable,
                            "chi_square": res.chi_square,
                            "df": res.df,
                            "p_value": res.p_value,
                            "missing_fraction": res.missing_fraction,
                        }
                    )
            rows = summarize_baseline(table, outcome, self.config.baseline_variables)
            y = table.column(outcome)
            return {
                "n_rows_raw": raw.n_rows,
                "n_rows_analysis": table.n_rows,
                "n_events": int(y.sum()),
                "missing_mode": self.config.missing,
                "mcar": mcar_rows,
                "rows": [
                    {
                        "variable": r.variable,
                        "overall": r.overall,
                        "group0": r.group0,
                        "group1": r.group1,
                        "test": r.test,
                        "p_value": r.p_value,
                        "n_group0": r.n_group0,
                        "n_group1": r.n_group1,
                    }
                    for r in rows
                ],
            }

        return self._timed("baseline", _build)

    def dag_tests_section(self):
        verdict, implications = self.identify()

        def _build():
            table = self.analysis_table()
            dag = self.dag()
            rows = []
            for imp in implications:
                cond = sorted(imp.cond)
                pc = partial_correlation(
                    table.column(imp.x), table.column(imp.y), table.matrix(cond)
                )
                rows.append(
                    {
                        "x": imp.x,
                        "y": imp.y,
                        "cond": cond,
                        "partial_r": pc.r,
                        "p_value": pc.p_value,
                        "n": pc.n,
                        "verdict": "PASS" if pc.p_value > 0.05 else "FAIL",
                    }
                )
            return {
                "n_nodes": len(dag.nodes),
                "n_edges": len(dag.edges),
                "backdoor_valid": verdict.valid,
                "adjustment": list(self.config.model.adjustment),
                "implications": rows,
            }

        return self._timed("dag_tests", _build)

    def observational_section(self):
        def _build():
            table = self.analysis_table()
            res = fit_observational(
                table,
                self.config.observational_predictors,
                self.config.model.outcome,
                folds=5,
                seed=stage_seed(self.config.seed, "observational"),
            )
            return {
                "predictors": list(self.config.observational_predictors),
                "auroc": res.auroc,
                "cv_auroc_mean": res.cv_auroc_mean,
                "cv_auroc_sd": res.cv_auroc_sd,
                "average_precision": res.average_precision,
                "brier": res.brier,
                "odds_ratios": [
                    {
                        "predictor": o.predictor,
                        "odds_ratio": o.odds_ratio,
                        "ci_low": o.ci_low,
                        "ci_high": o.ci_high,
                        "p_value": o.p_value,
                    }
                    for o in res.odds_ratios
                ],
            }

        return self._timed("observational", _build)

    def ace_section(self):
        self.identify()

        def _build():
            table = self.analysis_table()
            config = self.config
            s1, s0 = self.intervention_levels()
            seed = stage_seed(config.seed, "estimate")
            ace = gcomp_ace(
                table, config.model, s1, s0, n_boot=config.bootstrap["gcomp"], seed=seed
            )
            lo = s1 - max(config.interventions_mmhg) - 10.0
            grid = [lo + 5.0 * i for i in range(int((s1 + 10.0 - lo) / 5.0) + 1)]
            curve = dose_response_curve(table, config.model, grid)
            naive_model = naive_contrast(
                table, config.model.treatment, config.model.outcome, s1, s0, method="model"
            )
            naive_band = naive_contrast(
                table, config.model.treatment, config.model.outcome, s1, s0, method="band"
            )
            plugin = mean_z_plugin(table, config.model, s1, s0)
            return {
                "s1": s1,
                "s0": s0,
                "risk_high": ace.risk_high,
                "risk_low": ace.risk_low,
                "ace": ace.ace,
                "rrr": ace.rrr,
                "ci_low": ace.ci_low,
                "ci_high": ace.ci_high,
                "n_bootstrap": ace.n_bootstrap,
                "seed": ace.seed,
                "naive_model": naive_model,
                "naive_band": naive_band,
                "naive_relative_inflation": naive_model / ace.ace - 1.0 if ace.ace != 0 else None,
                "mean_z_plugin": plugin,
                "dose_response": [[s, r] for s, r in curve],
            }

        return self._timed("estimate", _build)

    def triangulation_section(self):
        self.identify()

        def _build():
            table = self.analysis_table()
            config = self.config
            _, median = binary_treatment(table, config.model)
            match = psm_att(
                table,
                config.model,
                caliper=config.caliper,
                stratum=config.psm_stratum,
                n_boot=config.bootstrap["psm"],
                seed=stage_seed(config.seed, "psm"),
            )
            ipw = ipw_ate(
                table,
                config.model,
                trim_percentile=config.trim_percentile,
                n_boot=config.bootstrap["ipw"],
                seed=stage_seed(config.seed, "ipw"),
            )
            return {
                "treatment_threshold": median,
                "psm": {
                    "att": match.att,
                    "ci_low": match.ci_low,
                    "ci_high": match.ci_high,
                    "n_pairs": match.n_pairs,
                    "caliper": match.caliper,
                    "stratum": config.psm_stratum,
                    "balance": {
                        cov: {"smd_before": b, "smd_after": a}
                        for cov, (b, a) in sorted(match.balance.items())
                    },
                },
                "ipw": {
                    "ate": ipw.ate,
                    "ci_low": ipw.ci_low,
                    "ci_high": ipw.ci_high,
                    "weight_max": ipw.weight_summary[0],
                    "weight_mean": ipw.weight_summary[1],
                    "trim_threshold": ipw.weight_summary[2],
                    "effective_sample_size": ipw.effective_sample_size,
                },
            }

        return self._timed("triangulation", _build)

    def refutation_section(self):
        self.identify()

        def _build():
            table = self.analysis_table()
            config = self.config
            s1, s0 = self.intervention_levels()
            perm = permutation_refute(
                table,
                config.model,
                s1,
                s0,
                n_perm=config.permutations,
                seed=stage_seed(config.seed, "permutation"),
            )
            placebo_rows = []
            for p in config.placebos:
                res = placebo_instrument_test(table, p.instrument, p.target, p.adjust)
                placebo_rows.append(
                    {
                        "instrument": p.instrument,
                        "target": p.target,
                        "adjust": list(p.adjust),
                        "coefficient": res.coefficient,
                        "ci_low": res.ci_low,
                        "ci_high": res.ci_high,
                        "p_value": res.p_value,
                        "passed": res.passed,
                        "pre_specified_invalid": p.pre_specified_invalid,
                    }
                )
            return {
                "permutation": {
                    "observed_ace": perm.observed_ace,
                    "null_mean": perm.null_mean,
                    "null_sd": perm.null_sd,
                    "p_value": perm.p_value,
                    "n_permutations": perm.n_permutations,
                    "null_samples": [float(v) for v in perm.null_samples],
                },
                "placebos": placebo_rows,
            }

        return self._timed("refute", _build)

    def cate_section(self):
        self.identify()

        def _build():
            table = self.analysis_table()
            config = self.config
            scale = float(config.interventions_mmhg[0])
            r_est = r_learner(
                table, config.model, config.rlearner, seed=stage_seed(config.seed, "rlearner")
            )
            t_est = t_learner(
                table,
                config.model,
                boost=config.rlearner.boost,
                seed=stage_seed(config.seed, "tlearner"),
            )
            rho = spearman(r_est.tau[r_est.included], t_est.tau[r_est.included])
            groups_out = {}
            for sub in config.subgroups:
                labels = subgroup_labels(table, sub)
                rows = subgroup_summary(
                    r_est,
                    labels,
                    scale=scale,
                    n_boot=config.bootstrap["cate_subgroup"],
                    seed=stage_seed(config.seed, f"subgroup:{sub.name}"),
                )
                groups_out[sub.name] = {
                    "test_p": rows[0].test_p if rows else None,
                    "rows": [
                        {
                            "label": r.label,
                            "n": r.n,
                            "mean_tau": r.mean_tau,
                            "implied_arr": r.implied_arr,
                            "ci_low": r.ci_low,
                            "ci_high": r.ci_high,
                            "mde": minimum_detectable_effect(
                                r.n,
                                float(np.std(r_est.tau[r_est.included][labels[r_est.included] == r.label], ddof=1)),
                            )
                            if r.n >= 2
                            and np.std(r_est.tau[r_est.included][labels[r_est.included] == r.label], ddof=1) > 0
                            else None,
                        }
                        for r in rows
                    ],
                }
            return {
                "arr_scale_mmhg": scale,
                "n_included_r": int(r_est.included.sum()),
                "spearman_r_vs_t": rho,
                "subgroups": groups_out,
            }

        return self._timed("cate", _build)

    def sensitivity_section(self):
        self.identify()

        def _build():
            table = self.analysis_table()
            config = self.config
            rows = e_value_table(
                table,
                config.model,
                config.interventions_mmhg,
                n_boot=config.bootstrap["gcomp"],
                seed=stage_seed(config.seed, "evalue"),
            )
            return {
                "rows": [
                    {
                        "intervention_mmhg": r.intervention_mmhg,
                        "ace": r.ace,
                        "risk_ratio": r.risk_ratio,
                        "e_point": r.e_point,
                        "e_ci": r.e_ci,
                    }
                    for r in rows
                ]
            }

        return self._timed("sensitivity", _build)


SECTION_BUILDERS = {
    "baseline": "baseline_section",
    "dag_tests": "dag_tests_section",
    "observational_model": "observational_section",
    "ace": "ace_section",
    "triangulation": "triangulation_section",
    "refutation": "refutation_section",
    "cate": "cate_section",
    "sensitivity": "sensitivity_section",
}


def run_section(config, section):
    """Compute one report section (plus its data dependencies)."""
    runner = _Run(config)
    return getattr(runner, SECTION_BUILDERS[section])()


def run(config):
    """Execute the full pipeline and return the report dictionary."""
    runner = _Run(config)
    sections = {}
    for name in SECTION_BUILDERS:
        sections[name] = getattr(runner, SECTION_BUILDERS[name])()
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "metadata": {
            "provenance": f"causalpipe {__version__}",
            "master_seed": config.seed,
            "stage_seeds": {label: stage_seed(config.seed, label) for label in (
                "impute", "observational", "estimate", "psm", "ipw",
                "permutation", "rlearner", "tlearner", "evalue",
            )},
            "durations_s": dict(runner.durations),
        },
        "sections": sections,
    }
    return report


def strip_timing(report):
    """Copy of the report without wall-clock fields, for byte comparisons."""
    clone = json.loads(serialize_report(report))
    clone.get("metadata", {}).pop("durations_s", None)
    return clone


def serialize_report(report):
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report, out_dir):
    """Write report.json and the plot-ready CSV side tables under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(serialize_report(report))

    tables_dir = os.path.join(out_dir, "tables")
    os.makedirs(tables_dir, exist_ok=True)

    def write_csv(name, header, rows):
        with open(os.path.join(tables_dir, name), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)

    sections = report["sections"]
    write_csv(
        "dose_response.csv",
        ["treatment_value", "interventional_risk"],
        [[s, r] for s, r in sections["ace"]["dose_response"]],
    )
    write_csv(
        "balance.csv",
        ["covariate", "smd_before", "smd_after"],
        [
            [cov, vals["smd_before"], vals["smd_after"]]
            for cov, vals in sections["triangulation"]["psm"]["balance"].items()
        ],
    )
    write_csv(
        "cate_subgroups.csv",
        ["subgroup", "label", "n", "mean_tau", "implied_arr", "ci_low", "ci_high", "test_p"],
        [
            [name, row["label"], row["n"], row["mean_tau"], row["implied_arr"],
             row["ci_low"], row["ci_high"], group["test_p"]]
            for name, group in sections["cate"]["subgroups"].items()
            for row in group["rows"]
        ],
    )
    write_csv(
        "permutation_null.csv",
        ["permutation", "ace"],
        [[i, v] for i, v in enumerate(sections["refutation"]["permutation"]["null_samples"])],
    )
    logger.info("wrote %s and %s/*.csv", report_path, tables_dir)
    return report_path
