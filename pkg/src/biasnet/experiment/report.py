"""CSV, console and SVG renderings of evaluation and posterior results."""

from pathlib import Path

from jinja2 import Environment, FileSystemLoader
import pandas as pd
from rich.console import Console
from rich.table import Table

from biasnet.experiment.importance import ImportanceReport
from biasnet.experiment.runner import EvalReport
from biasnet.prevision.model import PosteriorSummary

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"

# orange (most important on average) to blue (least)
_PALETTE = ("#e76f51", "#f4a261", "#e9c46a", "#8ab17d", "#2a9d8f", "#287271", "#264653")


def _environment(template_dir: Path | None = None) -> Environment:
    return Environment(loader=FileSystemLoader(str(template_dir or TEMPLATE_DIR)), autoescape=True)


def write_report(report: EvalReport, directory: Path) -> list[Path]:
    """Write ``metrics.csv`` and, when present, ``importance.csv`` and ``mean_ranks.csv``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [directory / "metrics.csv"]
    report.to_frame().to_csv(written[0], index=False, float_format="%.6g")
    if report.importance is not None:
        written.append(directory / "importance.csv")
        report.importance.to_frame().to_csv(written[-1], index=False, float_format="%.6g")
        written.append(directory / "mean_ranks.csv")
        ranks = pd.Series(report.importance.mean_ranks(), name="mean_rank").rename_axis("feature")
        ranks.to_csv(written[-1], float_format="%.4g")
    return written


def metrics_table(report: EvalReport) -> Table:
    table = Table(title="Frequentist properties of the posterior estimates")
    table.add_column("Parameter", style="cyan")
    table.add_column("Model class")
    table.add_column("Bias", justify="right")
    table.add_column("MAE", justify="right")
    table.add_column("Coverage", justify="right")
    table.add_column("n", justify="right")
    for m in report.metrics:
        coverage_style = "green" if m.coverage >= 0.9 else "yellow"
        table.add_row(
            m.parameter,
            m.model_class,
            f"{m.bias:+.4f}",
            f"{m.mae:.4f}",
            f"[{coverage_style}]{m.coverage:.3f}[/{coverage_style}]",
            str(m.replicates),
        )
    return table


def importance_table(importance: ImportanceReport, top: int = 5) -> Table:
    table = Table(title="Most important statistics")
    table.add_column("Target", style="cyan")
    for k in range(top):
        table.add_column(f"#{k + 1}")
    for target in importance.targets:
        table.add_row(target, *importance.top(target, top))
    return table


def posterior_table(summary: PosteriorSummary, title: str | None = None) -> Table:
    table = Table(title=title or f"Posterior ({summary.model_class})")
    table.add_column("Parameter", style="cyan")
    table.add_column("Mean", justify="right")
    table.add_column("SD", justify="right")
    for level in summary.quantile_levels:
        table.add_column(f"q{level:g}", justify="right")
    for name, post in summary.parameters.items():
        table.add_row(name, f"{post.mean:.4f}", f"{post.sd:.4f}", *(f"{q:.4f}" for q in post.quantiles))
    return table


def print_report(report: EvalReport, console: Console | None = None) -> None:
    console = console or Console()
    console.print(metrics_table(report))
    if report.importance is not None:
        console.print(importance_table(report.importance))


def importance_svg(
    importance: ImportanceReport, target: str, template_dir: Path | None = None
) -> str:
    """Horizontal bar chart of one target's scores, bars coloured by mean rank."""
    width, margin_left, bar_height, gap, top = 520, 110, 12, 4, 28
    scores = importance.scores[target]
    mean_ranks = importance.mean_ranks()
    order = sorted(range(len(scores)), key=lambda k: (-scores[k], k))
    lo = min(0.0, min(scores))
    hi = max(0.0, max(scores))
    span = (hi - lo) or 1.0
    plot_width = width - margin_left - 20

    def xpos(v: float) -> float:
        return margin_left + (v - lo) / span * plot_width

    zero_x = xpos(0.0)
    bars = []
    for row, k in enumerate(order):
        feature = importance.feature_names[k]
        shade = int((mean_ranks[feature] - 1) / max(len(scores) - 1, 1) * (len(_PALETTE) - 1))
        x_end = xpos(scores[k])
        bars.append(
            {
                "label": feature,
                "x": round(min(zero_x, x_end), 2),
                "y": top + row * (bar_height + gap),
                "width": round(abs(x_end - zero_x), 2),
                "colour": _PALETTE[shade],
            }
        )
    height = top + len(order) * (bar_height + gap) + 10
    template = _environment(template_dir).get_template("importance_bars.svg.j2")
    return template.render(
        target=target, bars=bars, width=width, height=height, margin_left=margin_left,
        bar_height=bar_height, zero_x=round(zero_x, 2), top=top - 4,
    )


def posterior_svg(summary: PosteriorSummary, label: str = "", template_dir: Path | None = None) -> str:
    """Interval plot on [0, 1]: outermost quantile pair, the 25-75% band and the mean."""
    width, margin_left, row_gap, top = 420, 70, 26, 34
    plot_width = width - margin_left - 20

    def xpos(v: float) -> float:
        return round(margin_left + min(max(v, 0.0), 1.0) * plot_width, 2)

    levels = summary.quantile_levels
    inner = (levels.index(0.25), levels.index(0.75)) if {0.25, 0.75} <= set(levels) else (0, -1)
    rows = []
    for r, (name, post) in enumerate(summary.parameters.items()):
        rows.append(
            {
                "name": name,
                "y": top + r * row_gap,
                "outer": (xpos(post.quantiles[0]), xpos(post.quantiles[-1])),
                "inner": (xpos(post.quantiles[inner[0]]), xpos(post.quantiles[inner[1]])),
                "mean": xpos(post.mean),
            }
        )
    height = top + len(rows) * row_gap + 20
    ticks = [{"x": xpos(t / 4), "label": f"{t / 4:g}"} for t in range(5)]
    template = _environment(template_dir).get_template("posterior_intervals.svg.j2")
    return template.render(
        rows=rows, ticks=ticks, width=width, height=height, margin_left=margin_left,
        top=top - 12, label=label,
    )


def write_importance_svgs(importance: ImportanceReport, directory: Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for target in importance.targets:
        path = directory / f"importance_{target.replace('/', '_')}.svg"
        path.write_text(importance_svg(importance, target), encoding="utf-8")
        written.append(path)
    return written
