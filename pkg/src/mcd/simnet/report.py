"""Scenario reports: JSON, delimited summary, and rendered figures."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Report:
    scenario: str
    seed: int
    variant: str
    valid: bool = True
    assertions: list[dict] = field(default_factory=list)
    divergences: list[dict] = field(default_factory=list)
    outputs: dict[str, list[str]] = field(default_factory=dict)
    oracle: dict[str, list[str]] = field(default_factory=dict)
    server_stats: dict = field(default_factory=dict)
    expected_stats: dict = field(default_factory=dict)
    wire: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.assertions.append({"name": name, "passed": bool(passed), "detail": detail})
        return passed

    def note(self, text: str) -> None:
        self.notes.append(text)

    @property
    def passed(self) -> bool:
        return (
            self.valid
            and not self.divergences
            and all(a["passed"] for a in self.assertions)
        )

    def failures(self) -> list[str]:
        out = [a["name"] for a in self.assertions if not a["passed"]]
        if self.divergences:
            out.append(f"{len(self.divergences)} output divergences")
        if not self.valid:
            out.append("run invalid (infrastructure failure)")
        return out

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "variant": self.variant,
            "valid": self.valid,
            "passed": self.passed,
            "assertions": self.assertions,
            "divergences": self.divergences,
            "outputs": self.outputs,
            "oracle": self.oracle,
            "server_stats": self.server_stats,
            "expected_stats": self.expected_stats,
            "wire": self.wire,
            "notes": self.notes,
        }


def write_report(report: Report, out_path, figures: bool = True) -> list[str]:
    """Write the JSON report plus the CSV summary and figures beside it."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written = [str(out_path)]
    written.append(write_csv(report, out_path.with_suffix(".csv")))
    if figures:
        written.extend(render_figures(report, out_path))
    return written


def write_csv(report: Report, path) -> str:
    """Per-member summary rows: expected vs observed discovery counts."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["member", "expected", "observed", "missing", "extra"])
        for member in sorted(set(report.oracle) | set(report.outputs)):
            expected = set(report.oracle.get(member, ()))
            observed = set(report.outputs.get(member, ()))
            writer.writerow([
                member,
                len(expected),
                len(observed),
                len(expected - observed),
                len(observed - expected),
            ])
    return str(path)


def render_figures(report: Report, out_path) -> list[str]:
    """Discovery-count and wire-traffic figures next to the report."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_path = Path(out_path)
    stem = out_path.with_suffix("")
    paths = []

    expected = [len(v) for _, v in sorted(report.oracle.items())]
    observed = [len(v) for _, v in sorted(report.outputs.items())]
    fig, ax = plt.subplots(figsize=(7, 4))
    bins = range(0, max(expected + observed + [1]) + 2)
    ax.hist([expected, observed], bins=bins, label=["oracle", "observed"])
    ax.set_xlabel("discovered mutual contacts per member")
    ax.set_ylabel("members")
    ax.set_title(f"{report.scenario} (seed {report.seed}): discovery distribution")
    ax.legend()
    fig.tight_layout()
    discovery_png = f"{stem}_discovery.png"
    fig.savefig(discovery_png, dpi=110)
    plt.close(fig)
    paths.append(discovery_png)

    ops = report.wire.get("per_op", {})
    fig, ax = plt.subplots(figsize=(7, 4))
    names = sorted(ops)
    ax.bar(names, [ops[k] for k in names])
    ax.set_ylabel("messages")
    ax.set_title(
        f"{report.scenario}: wire traffic "
        f"({report.wire.get('messages', 0)} msgs, {report.wire.get('bytes', 0)} bytes)"
    )
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    fig.tight_layout()
    wire_png = f"{stem}_wire.png"
    fig.savefig(wire_png, dpi=110)
    plt.close(fig)
    paths.append(wire_png)
    return paths
