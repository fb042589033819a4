"""Command-line entry point: run simulation studies from a JSON spec,
list the built-in scenario curves, and launch the conduct service.

Output files never contain timestamps or machine-specific paths beyond
the configured output directory, so a rerun with the same seed is
byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import click

from rcrm.decisions import DesignVariant
from rcrm.engine import TrialConfig
from rcrm.model import ModelConfig, ValidationError
from rcrm.simulate import Scenario, ScenarioResult, make_scenario, reference_scenarios, run_study

__all__ = [
    "DEFAULT_MASTER_SEED",
    "OUT_DIR_ENV",
    "StudySpec",
    "parse_study_spec",
    "spec_hash",
    "emit_results",
    "main",
]

DEFAULT_MASTER_SEED = 2
DEFAULT_N_TRIALS = 1000
OUT_DIR_ENV = "RCRM_OUT_DIR"

_MODEL_FIELDS = ("skeleton", "target", "prior_mean", "prior_sd", "grid_lo", "grid_hi", "grid_points")
_TRIAL_FIELDS = ("cohort_size", "max_subjects", "pi")
_TOP_FIELDS = _MODEL_FIELDS + _TRIAL_FIELDS + (
    "designs", "scenarios", "n_trials", "master_seed", "out_dir",
)


@dataclass(frozen=True)
class StudySpec:
    """A fully resolved simulation study: model, trial rules, scenarios,
    designs, replication count, and seed."""

    model: ModelConfig
    cohort_size: int
    max_subjects: int
    pi: float
    designs: tuple[DesignVariant, ...]
    scenarios: tuple[Scenario, ...]
    n_trials: int
    master_seed: int
    out_dir: str | None = None

    def __post_init__(self):
        if len(self.designs) == 0:
            raise ValidationError("designs must be nonempty")
        if len(set(self.designs)) != len(self.designs):
            raise ValidationError("designs must be unique")
        if len(self.scenarios) == 0:
            raise ValidationError("scenarios must be nonempty")
        if self.n_trials < 1:
            raise ValidationError("n_trials must be at least 1")
        if self.master_seed < 0:
            raise ValidationError("master_seed must be a nonnegative integer")
        for s in self.scenarios:
            if len(s.true_probs) != self.model.n_doses:
                raise ValidationError(
                    f"scenario {s.name!r} has {len(s.true_probs)} doses, skeleton has {self.model.n_doses}"
                )
        # constructing it validates divisibility and pi bounds
        self.trial_config(self.designs[0])

    def trial_config(self, variant: DesignVariant) -> TrialConfig:
        return TrialConfig(
            model=self.model,
            variant=variant,
            cohort_size=self.cohort_size,
            max_subjects=self.max_subjects,
            pi=self.pi,
        )

    def to_dict(self) -> dict:
        d = {
            "skeleton": list(self.model.skeleton),
            "target": self.model.target,
            "prior_mean": self.model.prior_mean,
            "prior_sd": self.model.prior_sd,
            "grid_lo": self.model.grid_lo,
            "grid_hi": self.model.grid_hi,
            "grid_points": self.model.grid_points,
            "cohort_size": self.cohort_size,
            "max_subjects": self.max_subjects,
            "pi": self.pi,
            "designs": [v.value for v in self.designs],
            "scenarios": [
                {"name": s.name, "true_probs": list(s.true_probs), "true_mtd": s.true_mtd}
                for s in self.scenarios
            ],
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
        }
        if self.out_dir is not None:
            d["out_dir"] = self.out_dir
        return d


def default_study_spec() -> StudySpec:
    return StudySpec(
        model=ModelConfig(),
        cohort_size=3,
        max_subjects=45,
        pi=0.90,
        designs=tuple(DesignVariant),
        scenarios=reference_scenarios(),
        n_trials=DEFAULT_N_TRIALS,
        master_seed=DEFAULT_MASTER_SEED,
    )


def _parse_scenario(entry, index: int, target: float) -> Scenario:
    if not isinstance(entry, dict):
        raise ValidationError(f"scenario #{index + 1} must be an object")
    unknown = set(entry) - {"name", "true_probs", "true_mtd"}
    if unknown:
        raise ValidationError(f"scenario #{index + 1} has unknown field {sorted(unknown)[0]!r}")
    if "true_probs" not in entry:
        raise ValidationError(f"scenario #{index + 1} is missing true_probs")
    name = str(entry.get("name", f"scenario{index + 1}"))
    scenario = make_scenario(name, entry["true_probs"], target=target)
    if "true_mtd" in entry and int(entry["true_mtd"]) != scenario.true_mtd:
        raise ValidationError(
            f"scenario {name!r}: true_mtd must be the dose closest to the target "
            f"(expected {scenario.true_mtd})"
        )
    return scenario


def parse_study_spec(text: str) -> StudySpec:
    """Parse and validate a JSON study spec, filling defaults for every
    omitted field. An empty object yields the full built-in study."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"parse error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ValidationError("study spec must be a JSON object")
    unknown = set(raw) - set(_TOP_FIELDS)
    if unknown:
        raise ValidationError(f"unknown field {sorted(unknown)[0]!r} in study spec")

    base = default_study_spec()
    model_kwargs = {k: raw[k] for k in _MODEL_FIELDS if k in raw}
    if "skeleton" in model_kwargs:
        model_kwargs["skeleton"] = tuple(model_kwargs["skeleton"])
    model = replace(base.model, **model_kwargs) if model_kwargs else base.model
    target = model.target

    if "designs" in raw:
        if not isinstance(raw["designs"], (list, tuple)):
            raise ValidationError("designs must be a list")
        designs = tuple(DesignVariant.parse(v) for v in raw["designs"])
    else:
        designs = base.designs
    if "scenarios" in raw:
        if not isinstance(raw["scenarios"], (list, tuple)):
            raise ValidationError("scenarios must be a list")
        scenarios = tuple(
            _parse_scenario(e, i, target) for i, e in enumerate(raw["scenarios"])
        )
    else:
        scenarios = tuple(make_scenario(s.name, s.true_probs, target) for s in base.scenarios)

    return StudySpec(
        model=model,
        cohort_size=int(raw.get("cohort_size", base.cohort_size)),
        max_subjects=int(raw.get("max_subjects", base.max_subjects)),
        pi=float(raw.get("pi", base.pi)),
        designs=designs,
        scenarios=scenarios,
        n_trials=int(raw.get("n_trials", base.n_trials)),
        master_seed=int(raw.get("master_seed", base.master_seed)),
        out_dir=str(raw["out_dir"]) if "out_dir" in raw else None,
    )


def spec_hash(spec: StudySpec) -> str:
    """Hash of the resolved spec minus the output directory, so moving the
    output location never changes provenance."""
    d = spec.to_dict()
    d.pop("out_dir", None)
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _provenance_lines(spec: StudySpec) -> str:
    return f"# master_seed={spec.master_seed}\n# spec_hash={spec_hash(spec)}\n"


def emit_results(results: dict, spec: StudySpec, out_dir: Path) -> list[Path]:
    """Write the study outputs: resolved spec, selection table, allocation
    histogram, and machine summary. Returns the paths written."""
    for s in spec.scenarios:
        for v in spec.designs:
            if (s.name, v.value) not in results:
                raise ValidationError(f"results missing cell ({s.name}, {v.value})")
    out_dir.mkdir(parents=True, exist_ok=True)
    n_doses = spec.model.n_doses
    written = []

    spec_path = out_dir / "study_spec.json"
    resolved = replace(spec, out_dir=str(out_dir))
    spec_path.write_text(json.dumps(resolved.to_dict(), indent=2, sort_keys=True) + "\n")
    written.append(spec_path)

    sel_path = out_dir / "selection_table.csv"
    header = ["scenario", "design"]
    header += [f"sel_dose_{d}" for d in range(1, n_doses + 1)]
    header += ["overtoxic_prob", "avg_dlts"]
    lines = [_provenance_lines(spec) + ",".join(header)]
    for s in spec.scenarios:
        for v in spec.designs:
            r: ScenarioResult = results[(s.name, v.value)]
            row = [s.name, v.value]
            row += [f"{p:.4f}" for p in r.selection_probs]
            row += [f"{r.overtoxic_prob:.4f}", f"{r.avg_dlts:.4f}"]
            lines.append(",".join(row))
    sel_path.write_text("\n".join(lines) + "\n")
    written.append(sel_path)

    hist_path = out_dir / "cohorts_at_mtd.csv"
    lines = [_provenance_lines(spec) + "scenario,design,cohorts_at_mtd,trial_count"]
    for s in spec.scenarios:
        for v in spec.designs:
            r = results[(s.name, v.value)]
            for value, count in enumerate(r.cohorts_at_mtd_hist):
                lines.append(f"{s.name},{v.value},{value},{count}")
    hist_path.write_text("\n".join(lines) + "\n")
    written.append(hist_path)

    summary_path = out_dir / "summary.json"
    summary = {
        "master_seed": spec.master_seed,
        "spec_hash": spec_hash(spec),
        "n_trials": spec.n_trials,
        "results": [
            {
                "scenario": s.name,
                "design": v.value,
                "true_mtd": s.true_mtd,
                "selection_probs": [round(p, 4) for p in results[(s.name, v.value)].selection_probs],
                "selection_counts": list(results[(s.name, v.value)].selection_counts),
                "overtoxic_prob": round(results[(s.name, v.value)].overtoxic_prob, 4),
                "overtoxic_count": results[(s.name, v.value)].overtoxic_count,
                "avg_dlts": round(results[(s.name, v.value)].avg_dlts, 4),
                "total_dlts": results[(s.name, v.value)].total_dlts,
                "mean_cohorts_at_mtd": round(results[(s.name, v.value)].mean_cohorts_at_mtd, 4),
                "sd_cohorts_at_mtd": round(results[(s.name, v.value)].sd_cohorts_at_mtd, 4),
                "cohorts_at_mtd_hist": list(results[(s.name, v.value)].cohorts_at_mtd_hist),
            }
            for s in spec.scenarios
            for v in spec.designs
        ],
    }
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    written.append(summary_path)
    return written


def _human_table(results: dict, spec: StudySpec) -> str:
    n_doses = spec.model.n_doses
    out = []
    dose_hdr = "  ".join(f"  d{d}" for d in range(1, n_doses + 1))
    for s in spec.scenarios:
        out.append(f"{s.name} (true MTD {s.true_mtd}): " + " ".join(f"{p:.2f}" for p in s.true_probs))
        out.append(f"  {'design':6s} {dose_hdr}  overtox  avgDLT  mean@MTD  sd@MTD")
        for v in spec.designs:
            r = results[(s.name, v.value)]
            cells = "  ".join(f"{p:.2f}" for p in r.selection_probs)
            out.append(
                f"  {v.value:6s} {cells}   {r.overtoxic_prob:5.2f}  {r.avg_dlts:6.2f}"
                f"  {r.mean_cohorts_at_mtd:8.2f}  {r.sd_cohorts_at_mtd:6.2f}"
            )
    return "\n".join(out)


@click.group()
def main():
    """Dose-escalation designs: simulation studies and live trial conduct."""


@main.command("run")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON study spec; {} runs the full built-in study.")
@click.option("--out", "out_opt", type=click.Path(file_okay=False), default=None,
              help=f"Output directory (default: spec out_dir, then ${OUT_DIR_ENV}).")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Override master seed.")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Override trials per cell.")
@click.option("--designs", default=None, help="Comma-separated subset: crm,rcrm1,rcrm2.")
def run_command(spec_path, out_opt, seed, trials, designs):
    """Run the simulation study described by a spec file."""
    try:
        spec = parse_study_spec(Path(spec_path).read_text())
        if seed is not None:
            spec = replace(spec, master_seed=seed)
        if trials is not None:
            spec = replace(spec, n_trials=trials)
        if designs is not None:
            parsed = tuple(DesignVariant.parse(v) for v in designs.split(","))
            spec = replace(spec, designs=parsed)
        out_dir = out_opt or spec.out_dir or os.environ.get(OUT_DIR_ENV)
        if not out_dir:
            raise ValidationError(f"no output directory: pass --out or set ${OUT_DIR_ENV}")

        results = {}
        for s in spec.scenarios:
            for v in spec.designs:
                results[(s.name, v.value)] = run_study(
                    spec.trial_config(v), s, spec.n_trials, spec.master_seed
                )
        written = emit_results(results, spec, Path(out_dir))
    except ValidationError as e:
        raise click.ClickException(str(e)) from None
    click.echo(_human_table(results, spec))
    click.echo(f"\nmaster_seed={spec.master_seed} spec_hash={spec_hash(spec)}")
    for p in written:
        click.echo(f"wrote {p}")


@main.command("scenarios")
@click.option("--paper", is_flag=True, default=False,
              help="Print the six built-in reference scenario curves.")
def scenarios_command(paper):
    """Print the built-in scenario curves and their true MTDs."""
    for s in reference_scenarios():
        probs = ", ".join(f"{p:.2f}" for p in s.true_probs)
        click.echo(f"{s.name}: true_probs=({probs}) true_mtd={s.true_mtd}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address.")
@click.option("--port", type=int, default=8000, show_default=True, help="Listen port.")
@click.option("--state-dir", type=click.Path(file_okay=False), default="./rcrm_sessions",
              show_default=True, help="Directory for per-session event logs.")
def serve_command(host, port, state_dir):
    """Launch the HTTP trial-conduct service."""
    import uvicorn

    from rcrm.service import create_app

    app = create_app(Path(state_dir))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
