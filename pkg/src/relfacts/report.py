"""Canonical report documents.

One report schema serves every subcommand: a command echo, the effective
config, a results tree, a PASS/FAIL verdict, and a timing block. Timing is
deterministic operation counting, never wall-clock, so that identical
(command, flags) produce byte-identical output; wall-clock belongs on
stderr. JSON is emitted with sorted keys and floats normalized to 12
significant digits.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

SCHEMA_VERSION = "1"


def round_float(x: float) -> float:
    """Normalize to 12 significant digits; kills representation jitter
    without hiding real signal at the certified tolerances."""
    return float(f"{float(x):.12g}")


def canonicalize(value):
    """Recursively convert to canonical JSON-ready primitives."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (np.floating, float)):
        return round_float(float(value))
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, complex):
        return [round_float(value.real), round_float(value.imag)]
    if isinstance(value, str) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): canonicalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonicalize(v) for v in value]
    raise TypeError(f"cannot canonicalize {type(value).__name__}")


@dataclass(frozen=True)
class ReportDocument:
    command: str
    config: dict
    results: dict
    verdict: str
    timing: dict

    def as_dict(self) -> dict:
        return canonicalize({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "verdict": self.verdict,
            "timing": self.timing,
        })

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


def from_scenario(command: str, report) -> ReportDocument:
    body = report.as_dict()
    config = body.pop("config")
    timing = body.pop("counters")
    passed = body.pop("passed")
    return ReportDocument(
        command=command, config=config, results=body,
        verdict="PASS" if passed else "FAIL", timing=timing)


def from_cdr_suite(command: str, reports: Sequence) -> ReportDocument:
    experiments = []
    timing: dict = {}
    all_passed = True
    config = None
    for rep in reports:
        body = rep.as_dict()
        rep_config = body.pop("config")
        if config is None:
            config = dict(rep_config, experiment_id="all")
        counters = body.pop("counters")
        for key, val in counters.items():
            timing[key] = timing.get(key, 0) + val
        all_passed = all_passed and body.pop("passed")
        experiments.append(body)
    return ReportDocument(
        command=command, config=config or {},
        results={"experiments": experiments},
        verdict="PASS" if all_passed else "FAIL", timing=timing)


def from_parity(command: str, analysis: dict, config: dict) -> ReportDocument:
    results = dict(analysis)
    consistent = results.pop("consistent")
    timing = results.pop("timing")
    return ReportDocument(
        command=command, config=config, results=results,
        verdict="PASS" if consistent else "FAIL", timing=timing)


def from_verify(command: str, rows: Sequence[dict]) -> ReportDocument:
    all_passed = all(r["passed"] for r in rows)
    return ReportDocument(
        command=command, config={},
        results={"checks": list(rows), "all_passed": all_passed},
        verdict="PASS" if all_passed else "FAIL",
        timing={"checks_run": len(rows)})


def build_run_document(scenario: str, experiment: Optional[str], shots: int,
                       seed: int, tolerance: float) -> ReportDocument:
    """Run a scenario from primitive flags and wrap it as a document. The
    command echo is rebuilt from the flags, so identical flags always yield
    identical documents."""
    from .scenarios import ScenarioConfig, run_cdr, run_cdr_suite, run_lmz

    if scenario == "lmz":
        command = f"run lmz --shots {shots} --seed {seed} --tolerance {tolerance:g}"
        report = run_lmz(ScenarioConfig(
            shots=shots, master_seed=seed, tolerance=tolerance))
        return from_scenario(command, report)
    if scenario != "cdr":
        raise ValueError(f"unknown scenario {scenario!r}")
    if experiment == "all":
        command = (f"run cdr --experiment all --shots {shots} "
                   f"--seed {seed} --tolerance {tolerance:g}")
        return from_cdr_suite(
            command,
            run_cdr_suite(shots=shots, master_seed=seed, tolerance=tolerance))
    exp = int(experiment)
    command = (f"run cdr --experiment {exp} --shots {shots} "
               f"--seed {seed} --tolerance {tolerance:g}")
    report = run_cdr(ScenarioConfig(
        bob_mode="cdr-reversal", experiment_id=exp, shots=shots,
        master_seed=seed, tolerance=tolerance))
    return from_scenario(command, report)


def build_check_document(command: str, system, config: dict) -> ReportDocument:
    from .parity import analyze

    return from_parity(command, analyze(system), config)


# -- text rendering -----------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:+.10g}" if value or value == 0 else str(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _table(headers: Sequence[str], rows: Sequence[Sequence]) -> list:
    cells = [[_fmt(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, c in enumerate(row):
            widths[i] = max(widths[i], len(c))
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return lines


def _render_scenario_body(results: dict) -> list:
    lines = []
    constraints = results.get("constraints", [])
    if constraints:
        lines.append("constraint certifications:")
        lines.extend(_table(
            ["id", "kind", "product", "stage", "expected", "expectation",
             "shots", "violations", "certified"],
            [[c["constraint_id"], c["kind"], "*".join(c["labels"]), c["stage"],
              f"{c['expected']:+d}", c["expectation"], c["shots"],
              c["violations"], c["certified"]] for c in constraints]))
        lines.append("")
    commutation = results.get("commutation") or {}
    if commutation:
        lines.append(
            "commutation: products pairwise "
            + _fmt(commutation["all_products_commute"])
            + ", triples "
            + _fmt(all(commutation["triples_commute"].values()))
            + ", same-pair direct/record anticommute "
            + _fmt(all(r["anticommute"] for r in commutation["same_pair_anticommute"]))
            + ", cross-pair commute "
            + _fmt(commutation["cross_pair_commute"]))
        lines.append("")
    final_certificate = results.get("final_certificate") or []
    if final_certificate:
        lines.append("final-state transported certificate:")
        lines.extend(_table(
            ["id", "observable", "expected", "expectation", "certified"],
            [[e["constraint_id"], e["observable"], f"{e['expected']:+d}",
              e["expectation"], e["certified"]] for e in final_certificate]))
        lines.append("")
    diag = results.get("disturbed_diagnostic")
    if diag:
        lines.append(
            f"disturbed records: {'*'.join(diag['records'])} went from "
            f"{_fmt(diag['early_expectation'])} at {diag['early_stage']} to "
            f"{_fmt(diag['final_expectation'])} at the final stage "
            f"(gap {_fmt(diag['gap'])}, exceeds 0.5: {_fmt(diag['gap_exceeds_half'])})")
        lines.append("")
    restoration = results.get("restoration")
    if restoration:
        if restoration["kind"] == "full":
            lines.append(
                f"restoration: full register, fidelity {_fmt(restoration['fidelity'])},"
                f" restored {_fmt(restoration['restored'])}")
        else:
            lines.append(
                f"restoration: memory qubit {restoration['memory_qubit']},"
                f" purity {_fmt(restoration['purity'])},"
                f" excitation {_fmt(restoration['excitation'])},"
                f" restored {_fmt(restoration['restored'])}")
        lines.append("")
    coexisting = results.get("coexisting_records")
    if coexisting:
        lines.append(
            "coexisting records: " + ",".join(coexisting["current"])
            + " (match constraint: "
            + _fmt(coexisting["records_match_constraint"]) + ")")
        lines.append("")
    cpl = results.get("cpl")
    if cpl:
        lines.append("record-agreement premise:")
        lines.append(
            f"  intact: expectation {_fmt(cpl['intact_expectation'])},"
            f" matches {cpl['intact_matches']}/{cpl['shots']}")
        lines.append(
            f"  after {cpl['disturbance_label']}:"
            f" expectation {_fmt(cpl['disturbed_expectation'])},"
            f" matches {cpl['disturbed_matches']}/{cpl['shots']}")
        lines.append(
            f"  same-time product stays {_fmt(cpl['operator_product_after'])};"
            f" premise certified {_fmt(cpl['premise_certified'])},"
            f" violation demonstrated {_fmt(cpl['violation_demonstrated'])}")
        lines.append("")
    sampling = results.get("sampling", [])
    if sampling:
        lines.append("sampled record products:")
        lines.extend(_table(
            ["target", "stage", "records", "expected", "shots", "violations",
             "marginals in band"],
            [[t["target"], t["stage"], "*".join(t["record_labels"]),
              f"{t['expected_product']:+d}", t["shots"], t["violations"],
              all(m["within_band"] for m in t["marginals"])] for t in sampling]))
        lines.append("")
    return lines


def render_text(doc: ReportDocument) -> str:
    data = doc.as_dict()
    lines = [
        f"command: {data['command']}",
        f"verdict: {data['verdict']}",
    ]
    if data["config"]:
        config_items = ", ".join(
            f"{k}={_fmt(v)}" for k, v in sorted(data["config"].items()))
        lines.append(f"config: {config_items}")
    lines.append("")
    results = data["results"]
    if "experiments" in results:
        for body in results["experiments"]:
            lines.append(
                f"=== experiment {body['experiment_id']} ===")
            lines.extend(_render_scenario_body(body))
    elif "checks" in results:
        lines.append("acceptance checks:")
        lines.extend(_table(
            ["#", "claim", "status"],
            [[r["id"], r["claim"], "PASS" if r["passed"] else "FAIL"]
             for r in results["checks"]]))
        lines.append("")
        for r in results["checks"]:
            if r.get("detail"):
                lines.append(f"  [{r['id']}] {r['detail']}")
        lines.append("")
    elif "solve" in results:
        lines.append("constraints:")
        for i, text in enumerate(results["system"]["constraints"], 1):
            lines.append(f"  ({i}) {text}")
        solve = results["solve"]
        lines.append("")
        if solve["satisfiable"]:
            witness = " ".join(
                f"{k}={v:+d}" for k, v in sorted(solve["witness"].items()))
            lines.append(
                f"satisfiable: yes ({solve['num_solutions']} of "
                f"{results['enumeration']['tested'] if results.get('enumeration') else 2 ** len(results['system']['universe'])}"
                f" assignments)")
            lines.append(f"witness: {witness}")
        else:
            subset = ",".join(str(i) for i in solve["certificate"])
            lines.append("satisfiable: no")
            lines.append(
                f"certificate: constraints {{{subset}}} multiply to the "
                "contradiction 1 = -1")
        identity = results["product_identity"]
        residual = "*".join(identity["residual_variables"]) or "1"
        lines.append(
            f"product of all constraints: {residual} = "
            f"{'+1' if identity['rhs'] == 1 else '-1'}"
            + ("  <- contradiction" if identity["is_contradiction"] else ""))
        enumeration = results.get("enumeration")
        if enumeration:
            lines.append(
                f"enumeration: {enumeration['count']} of {enumeration['tested']}"
                " assignments satisfy every constraint")
        lines.append("")
    else:
        lines.extend(_render_scenario_body(results))
    timing_items = ", ".join(
        f"{k}={v}" for k, v in sorted(data["timing"].items()))
    lines.append(f"timing: {timing_items}")
    return "\n".join(lines) + "\n"
