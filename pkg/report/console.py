from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from report.views import METRIC_LABELS, REPORT_METRICS, Comparison, MetricsReport

_RISK_STYLE = {"Low": "green", "Medium": "yellow", "High": "red"}


def _fmt(value: float | None) -> str:
    if value is None:
        return "n/a"
    return f"{value:.4g}"


def _delta(value: float | None) -> str:
    if value is None:
        return "[dim]n/a[/dim]"
    if value > 0:
        return f"[green]{value:+.1f}%[/green]"
    if value < 0:
        return f"[red]{value:+.1f}%[/red]"
    return "0.0%"


def render_report(report: MetricsReport, console: Console | None = None) -> None:
    """Summary panel plus the metric table of one policy."""
    console = console or Console()
    risk = report.privacy_risk
    console.print(Panel(
        f"📦 Scenario: {report.scenario or '-'}\n"
        f"🔁 Replications: {report.replications} × {report.duration_s:g} s "
        f"({report.tasks_per_replication:g} tasks each)\n"
        f"🔒 Privacy risk: [{_RISK_STYLE[risk]}]{risk}[/{_RISK_STYLE[risk]}]",
        title=f"📊 {report.policy}",
        border_style="green",
    ))

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Metric")
    table.add_column("Mean", justify="right")
    table.add_column("Std", justify="right", style="dim")
    for name in REPORT_METRICS:
        table.add_row(METRIC_LABELS[name], _fmt(report.value(name)), _fmt(report.std.get(name)))
    console.print(table)


def render_comparison(comparison: Comparison, console: Console | None = None) -> None:
    console = console or Console()
    candidates = [p for p in comparison.policies if p != comparison.baseline]

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Metric")
    for policy in comparison.policies:
        table.add_column(policy, justify="right")
    for policy in candidates:
        table.add_column(f"{policy} vs {comparison.baseline}", justify="right")

    for row in comparison.rows:
        table.add_row(
            row.label,
            *(_fmt(row.values[p]) for p in comparison.policies),
            *(_delta(row.deltas[p]) for p in candidates),
        )
    console.print(Panel(table, title=f"⚖️ Reduction vs {comparison.baseline}", border_style="blue"))
