"""Main CLI entry point for biasnet."""

from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
import hashlib
import json
import logging
from pathlib import Path
import sys
from typing import Any

import numpy as np
import pandas as pd
from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
import typer

from biasnet import __version__
from biasnet.config.loader import ConfigLoader
from biasnet.config.models import BiasnetConfig, RunConfig
from biasnet.config.validator import ConfigValidator
from biasnet.engine.models import PARAM_NAMES, ModelSpec, ParamVector
from biasnet.engine.rng import make_draw_streams
from biasnet.engine.sampler import sfbn_sample
from biasnet.errors import (
    AbsorbingStateError,
    ArtifactFormatError,
    EdgeListParseError,
    InvalidArgumentError,
    SchemaMismatchError,
)
from biasnet.experiment.report import (
    posterior_svg,
    posterior_table,
    print_report,
    write_importance_svgs,
    write_report,
)
from biasnet.features.vector import FEATURE_NAMES, featurize, read_feature_csv, schema_hash, write_feature_csv
from biasnet.graph.digraph import ValuedEdgeList, dyad_census, threshold
from biasnet.graph.io import read_edge_list_file, read_graph_file, write_edge_list
from biasnet.prevision.model import PosteriorSummary, PrevisionModel
from biasnet.prevision.prior import PriorSpec, sample_prior
from biasnet.workflow.batch import run_batch
from biasnet.workflow.logging import level_for, setup_logging
from biasnet.workflow.pipeline import run_experiment, train_models

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_SCHEMA = 4

EDGE_SUFFIX = ".edges"
MANIFEST_FILE = "manifest.json"

app = typer.Typer(
    name="biasnet",
    help="Biased net simulation and random forest posterior inference",
    add_completion=False,
)

console = Console()
error_console = Console(stderr=True)


def _version_callback(value: bool) -> None:
    if value:
        console.print(f"biasnet v{__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False, "--version", callback=_version_callback, is_eager=True, help="Show version and exit"
    ),
) -> None:
    """Simulate biased nets, compute network statistics and infer bias parameters."""


@contextmanager
def guarded(debug: bool) -> Iterator[None]:
    """Map exceptions onto exit codes, printing them as panels."""
    try:
        yield
    except typer.Exit:
        raise
    except SchemaMismatchError as e:
        _fail(e, "Schema mismatch", EXIT_SCHEMA, debug)
    except (InvalidArgumentError, EdgeListParseError, ArtifactFormatError, ValidationError) as e:
        _fail(e, "Invalid input", EXIT_CONFIG, debug)
    except (FileNotFoundError, NotADirectoryError) as e:
        _fail(e, "Missing input", EXIT_CONFIG, debug)
    except Exception as e:
        _fail(e, "Run failed", EXIT_RUNTIME, debug)


def _fail(error: Exception, title: str, code: int, debug: bool) -> None:
    if debug:
        error_console.print_exception()
    error_console.print(Panel(str(error), title=f"[red]{title}[/red]", border_style="red", box=box.ROUNDED))
    raise typer.Exit(code=code)


@dataclass
class Session:
    """Logging and configuration shared by every subcommand."""

    config: BiasnetConfig
    debug: bool


def _session(
    overrides: dict[str, Any],
    config_file: Path | None,
    verbose: bool,
    debug: bool,
    log_file: Path | None,
) -> Session:
    setup_logging(level=level_for(verbose, debug), log_file=log_file)
    loader = ConfigLoader(Path.cwd(), run_file=config_file)
    return Session(config=loader.apply_cli_overrides(overrides), debug=debug)


def _validate(run: RunConfig, config: BiasnetConfig) -> None:
    if not ConfigValidator().validate_run(run, config):
        raise typer.Exit(code=EXIT_CONFIG)


def _config_hash(*parts: Any) -> str:
    blob = json.dumps(parts, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _versions() -> dict[str, str]:
    import networkx
    import numba
    import scipy
    import sklearn

    return {
        "biasnet": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "numba": numba.__version__,
        "scipy": scipy.__version__,
        "networkx": networkx.__version__,
        "scikit-learn": sklearn.__version__,
    }


def _expand_inputs(inputs: list[Path]) -> list[Path]:
    """Files as given; directories expand to their sorted ``*.edges`` files."""
    files: list[Path] = []
    for path in inputs:
        if path.is_dir():
            files.extend(sorted(path.glob(f"*{EDGE_SUFFIX}")))
        else:
            files.append(path)
    return files


# ----------------------------------------------------------------------------- simulate


@dataclass(frozen=True)
class SimulationTask:
    seed: int
    draw_id: int
    spec: ModelSpec
    burnin: int
    psi: ParamVector | None
    prior: PriorSpec | None


def simulate_one(task: SimulationTask) -> tuple[list[float], str, tuple[int, int, int]]:
    streams = make_draw_streams(task.seed, task.draw_id)
    psi = task.psi if task.psi is not None else sample_prior(task.prior, streams.prior)  # type: ignore[arg-type]
    g = sfbn_sample(psi, task.spec, task.burnin, streams.chain(task.spec.dichotomized))
    return psi.as_array().tolist(), write_edge_list(ValuedEdgeList.from_graph(g)), dyad_census(g)


@app.command()
def simulate(
    n: int = typer.Option(..., "--n", help="Graph order N"),
    pi: float = typer.Option(0.0, "--pi", help="Parent bias"),
    sigma: float = typer.Option(0.0, "--sigma", help="Sibling bias"),
    rho: float = typer.Option(0.0, "--rho", help="Double-role bias"),
    d: float = typer.Option(0.0, "--d", help="Baseline formation probability"),
    delta: float = typer.Option(0.0, "--delta", help="Satiation probability"),
    from_prior: bool = typer.Option(False, "--from-prior", help="Draw psi from the prior per draw"),
    draws: int = typer.Option(1, "--draws", help="Number of independent graphs"),
    burnin_mult: int | None = typer.Option(None, "--burnin-mult", help="Burn-in steps per N^2 [default: 500]"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (recorded in the manifest)"),
    dichotomized: bool = typer.Option(False, "--dichotomized", help="Truncate closure counts at 1"),
    parent: bool = typer.Option(True, "--parent/--no-parent", help="Parent event active"),
    sibling: bool = typer.Option(True, "--sibling/--no-sibling", help="Sibling event active"),
    double_role: bool = typer.Option(True, "--double-role/--no-double-role", help="Double-role event active"),
    satiation: bool = typer.Option(True, "--satiation/--no-satiation", help="Satiation event active"),
    output: Path = typer.Option(..., "--output", "-o", help="Directory for edge lists and manifest"),
    threads: int | None = typer.Option(None, "--threads", "-t", help="Worker processes"),
    config_file: Path | None = typer.Option(None, "--config", help="key=value run file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
    log_file: Path | None = typer.Option(None, "--log-file", help="Log to file (in addition to console)"),
) -> None:
    """Simulate graphs from the biased net process, one edge-list file per draw."""
    with guarded(debug):
        session = _session(
            {"threads": threads, "simulation.burnin_multiplier": burnin_mult},
            config_file, verbose, debug, log_file,
        )
        config = session.config
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))  # type: ignore[operator]
        run = RunConfig(
            command="simulate",
            n=n,
            seed=seed,
            threads=config.threads,
            burnin_multiplier=config.simulation.burnin_multiplier,
            draws=draws,
            model_class="dichotomized" if dichotomized else "undichotomized",
            parent=parent,
            sibling=sibling,
            double_role=double_role,
            satiation=satiation,
            output=output,
        )
        _validate(run, config)

        psi = None if from_prior else ParamVector(pi=pi, sigma=sigma, rho=rho, d=d, delta=delta)
        if psi is not None and psi.d <= 0.0:
            raise AbsorbingStateError("d = 0 makes the empty starting graph absorbing; use --d > 0")
        prior = config.prior.to_spec(n) if from_prior else None
        spec = run.model_specs()[0]

        tasks = [SimulationTask(seed, k, spec, run.burnin, psi, prior) for k in range(draws)]
        results = run_batch(simulate_one, tasks, run.threads, description="Simulating graphs")

        output.mkdir(parents=True, exist_ok=True)
        files = []
        for k, (_, text, _) in enumerate(results):
            name = f"draw_{k:05d}{EDGE_SUFFIX}"
            (output / name).write_text(text, encoding="utf-8")
            files.append(name)

        manifest = {
            "command": "simulate",
            "seed": seed,
            "model_spec": spec.model_dump(mode="json"),
            "burnin": run.burnin,
            "prior": prior.model_dump(mode="json") if prior else None,
            "config_hash": _config_hash(run.model_dump(mode="json", exclude={"output", "threads"}), config.prior.model_dump()),
            "versions": _versions(),
            "draws": [
                {"file": f, "psi": dict(zip(PARAM_NAMES, p, strict=True))}
                for f, (p, _, _) in zip(files, results, strict=True)
            ],
        }
        (output / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

        table = Table(title="Simulated graphs", box=box.ROUNDED)
        table.add_column("Draws", justify="right")
        table.add_column("Mean density", justify="right")
        table.add_column("Mutual / asym / null", justify="right")
        pairs = n * (n - 1) / 2
        census = np.array([c for _, _, c in results], dtype=np.float64).mean(axis=0) / pairs
        density = (2 * census[0] + census[1]) / 2
        table.add_row(str(draws), f"{density:.4f}", " / ".join(f"{v:.3f}" for v in census))
        console.print(table)
        console.print(f"[green]Wrote {draws} edge lists and {MANIFEST_FILE} to {output}[/green]")


# ----------------------------------------------------------------------------- featurize


def featurize_file(path: Path) -> list[float]:
    return featurize(read_graph_file(path)).values.tolist()


@app.command("featurize")
def featurize_command(
    inputs: list[Path] = typer.Argument(..., help="Edge-list files or directories of *.edges files"),
    output: Path = typer.Option(..., "--output", "-o", help="Feature CSV to write"),
    threads: int | None = typer.Option(None, "--threads", "-t", help="Worker processes"),
    config_file: Path | None = typer.Option(None, "--config", help="key=value run file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
    log_file: Path | None = typer.Option(None, "--log-file", help="Log to file (in addition to console)"),
) -> None:
    """Compute the summary-statistic vector of every input graph."""
    with guarded(debug):
        session = _session({"threads": threads}, config_file, verbose, debug, log_file)
        run = RunConfig(command="featurize", threads=session.config.threads, inputs=inputs, output=output)
        _validate(run, session.config)

        files = _expand_inputs(inputs)
        if not files:
            raise InvalidArgumentError("no edge-list files found in the inputs")
        rows = run_batch(featurize_file, files, run.threads, description="Computing statistics")
        write_feature_csv(output, np.array(rows), sources=[str(f) for f in files])
        console.print(f"[green]Wrote {len(rows)} feature rows ({len(FEATURE_NAMES)} statistics) to {output}[/green]")


# ----------------------------------------------------------------------------- train


@app.command()
def train(
    n: int = typer.Option(..., "--n", help="Graph order N (must match the graphs to analyse)"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (required)"),
    draws: int | None = typer.Option(None, "--draws", "-m", help="Prior draws [default: 20000]"),
    model_class: str = typer.Option(
        "undichotomized", "--model-class", help="undichotomized, dichotomized or both"
    ),
    burnin_mult: int | None = typer.Option(None, "--burnin-mult", help="Burn-in steps per N^2 [default: 500]"),
    n_trees: int | None = typer.Option(None, "--n-trees", help="Trees per forest [default: 500]"),
    target_mean_degree: float | None = typer.Option(None, "--target-mean-degree", help="Prior mean degree for d"),
    spike_probability: float | None = typer.Option(None, "--spike-probability", help="Prior spike weight"),
    output: Path = typer.Option(..., "--output", "-o", help="Model directory to write"),
    threads: int | None = typer.Option(None, "--threads", "-t", help="Worker processes and tree threads"),
    config_file: Path | None = typer.Option(None, "--config", help="key=value run file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
    log_file: Path | None = typer.Option(None, "--log-file", help="Log to file (in addition to console)"),
) -> None:
    """Simulate a training set from the prior and fit the posterior forests."""
    with guarded(debug):
        session = _session(
            {
                "threads": threads,
                "simulation.burnin_multiplier": burnin_mult,
                "forest.n_trees": n_trees,
                "training.draws": draws,
                "prior.target_mean_degree": target_mean_degree,
                "prior.spike_probability": spike_probability,
            },
            config_file, verbose, debug, log_file,
        )
        config = session.config
        run = RunConfig(
            command="train",
            n=n,
            seed=seed,
            threads=config.threads,
            burnin_multiplier=config.simulation.burnin_multiplier,
            draws=config.training.draws,
            model_class=model_class,  # type: ignore[arg-type]
            output=output,
        )
        _validate(run, config)
        assert run.seed is not None

        trained = train_models(run.model_specs(), config, run.draws, run.seed, show_progress=True)
        written = trained.save(output)

        table = Table(title="Trained prevision models", box=box.ROUNDED)
        table.add_column("Model class", style="cyan")
        table.add_column("Directory")
        table.add_column("Rows", justify="right")
        for (cls, _), path in zip(trained.models.items(), written, strict=True):
            table.add_row(cls, str(path), str(trained.training.m))
        console.print(table)
        if trained.selector_accuracy:
            console.print(
                f"Class selector OOB accuracy: {trained.selector_accuracy['selector_oob_accuracy']:.3f} "
                f"(restricted: {trained.selector_accuracy['selector_oob_accuracy_restricted']:.3f})"
            )


# ----------------------------------------------------------------------------- infer / select-model


def _parse_levels(text: str | None, max_level: int) -> list[int]:
    if text is None:
        return [1]
    if text.strip().lower() == "all":
        return list(range(1, max_level + 1))
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise InvalidArgumentError(f"threshold levels must be integers or 'all', got {text!r}") from e


def _load_observations(inputs: list[Path], levels: str | None) -> tuple[list[str], list[int], np.ndarray, list[int]]:
    """Feature rows for every (input, threshold level); feature CSVs pass through unchanged."""
    labels: list[str] = []
    level_of: list[int] = []
    orders: list[int] = []
    rows: list[np.ndarray] = []
    for path in inputs:
        if path.suffix == ".csv":
            matrix, sources = read_feature_csv(path)
            for r in range(matrix.shape[0]):
                labels.append(sources[r] if sources else f"{path}#{r}")
                level_of.append(1)
                orders.append(0)
                rows.append(matrix[r])
            continue
        for file in _expand_inputs([path]):
            v = read_edge_list_file(file)
            for s in _parse_levels(levels, v.max_level):
                g = threshold(v, s)
                labels.append(str(file))
                level_of.append(s)
                orders.append(g.n)
                rows.append(featurize(g).values)
    if not rows:
        raise InvalidArgumentError("no graphs found in the inputs")
    return labels, level_of, np.vstack(rows), orders


def _summary_frame(labels: list[str], levels: list[int], summaries: list[PosteriorSummary]) -> pd.DataFrame:
    records = []
    for label, level, summary in zip(labels, levels, summaries, strict=True):
        for name, post in summary.parameters.items():
            record: dict[str, Any] = {
                "source": label, "level": level, "parameter": name, "mean": post.mean, "sd": post.sd,
            }
            for q, value in zip(summary.quantile_levels, post.quantiles, strict=True):
                record[f"q{q:g}"] = value
            record["p_undichotomized"] = summary.undichotomized_probability
            records.append(record)
    return pd.DataFrame(records)


@app.command()
def infer(
    inputs: list[Path] = typer.Argument(..., help="Edge-list files, directories or feature CSVs"),
    model_dir: Path = typer.Option(..., "--model", help="Model directory written by train"),
    threshold_levels: str | None = typer.Option(
        None, "--threshold-levels", help="Comma-separated strength thresholds, or 'all'"
    ),
    output: Path | None = typer.Option(None, "--output", "-o", help="Posterior CSV to write"),
    svg_dir: Path | None = typer.Option(None, "--svg-dir", help="Write one interval plot per graph here"),
    config_file: Path | None = typer.Option(None, "--config", help="key=value run file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
    log_file: Path | None = typer.Option(None, "--log-file", help="Log to file (in addition to console)"),
) -> None:
    """Posterior mean, sd and quantiles of the bias parameters for each input network."""
    with guarded(debug):
        session = _session({}, config_file, verbose, debug, log_file)
        run = RunConfig(command="infer", inputs=[*inputs, model_dir], output=output)
        _validate(run, session.config)

        model = PrevisionModel.load(model_dir, expected_schema_hash=schema_hash())
        labels, levels, x, orders = _load_observations(inputs, threshold_levels)
        for label, order in zip(labels, orders, strict=True):
            if order and order != model.model_spec.n:
                logger.warning(f"{label}: order {order} differs from the training order {model.model_spec.n}")
        summaries, _ = model.summarize(x)

        for label, level, summary in zip(labels, levels, summaries, strict=True):
            title = f"{label} (level {level})" if threshold_levels else label
            console.print(posterior_table(summary, title=title))
            if summary.undichotomized_probability is not None:
                console.print(
                    f"P(undichotomized) = {summary.undichotomized_probability:.3f} "
                    f"-> prefer [bold]{summary.preferred_model}[/bold]"
                )
        if output is not None:
            _summary_frame(labels, levels, summaries).to_csv(output, index=False, float_format="%.6g")
            console.print(f"[green]Wrote posterior table to {output}[/green]")
        if svg_dir is not None:
            svg_dir.mkdir(parents=True, exist_ok=True)
            for k, (label, level, summary) in enumerate(zip(labels, levels, summaries, strict=True)):
                name = f"posterior_{k:04d}.svg"
                (svg_dir / name).write_text(posterior_svg(summary, f"{Path(label).name} level {level}"), encoding="utf-8")


@app.command("select-model")
def select_model(
    inputs: list[Path] = typer.Argument(..., help="Edge-list files, directories or feature CSVs"),
    model_dir: Path = typer.Option(..., "--model", help="Model directory carrying a class selector"),
    threshold_levels: str | None = typer.Option(
        None, "--threshold-levels", help="Comma-separated strength thresholds, or 'all'"
    ),
    output: Path | None = typer.Option(None, "--output", "-o", help="CSV of class probabilities"),
    config_file: Path | None = typer.Option(None, "--config", help="key=value run file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
    log_file: Path | None = typer.Option(None, "--log-file", help="Log to file (in addition to console)"),
) -> None:
    """Probability that each network came from the undichotomized rather than the dichotomized model."""
    with guarded(debug):
        session = _session({}, config_file, verbose, debug, log_file)
        run = RunConfig(command="select-model", inputs=[*inputs, model_dir], output=output)
        _validate(run, session.config)

        model = PrevisionModel.load(model_dir, expected_schema_hash=schema_hash())
        if model.selector is None:
            raise InvalidArgumentError(f"model in {model_dir} has no class selector (train with --model-class both)")
        labels, levels, x, _ = _load_observations(inputs, threshold_levels)
        probabilities = model.undichotomized_probability(x)

        table = Table(title="Model class selection", box=box.ROUNDED)
        table.add_column("Network", style="cyan")
        table.add_column("Level", justify="right")
        table.add_column("P(undichotomized)", justify="right")
        table.add_column("Preferred")
        for label, level, p in zip(labels, levels, probabilities, strict=True):
            table.add_row(label, str(level), f"{p:.3f}", "undichotomized" if p >= 0.5 else "dichotomized")
        console.print(table)
        if output is not None:
            pd.DataFrame(
                {"source": labels, "level": levels, "p_undichotomized": probabilities}
            ).to_csv(output, index=False, float_format="%.6g")


# ----------------------------------------------------------------------------- experiment


@app.command()
def experiment(
    n: int = typer.Option(..., "--n", help="Graph order N"),
    seed: int | None = typer.Option(None, "--seed", help="Master seed (required)"),
    draws: int | None = typer.Option(None, "--draws", "-m", help="Training draws [default: 20000]"),
    replications: int | None = typer.Option(None, "--replications", "-r", help="Replicates per cell [default: 5]"),
    model_class: str = typer.Option(
        "undichotomized", "--model-class", help="undichotomized, dichotomized or both"
    ),
    burnin_mult: int | None = typer.Option(None, "--burnin-mult", help="Burn-in steps per N^2 [default: 500]"),
    n_trees: int | None = typer.Option(None, "--n-trees", help="Trees per forest [default: 500]"),
    importance: bool = typer.Option(True, "--importance/--no-importance", help="Compute variable importance"),
    svg: bool = typer.Option(False, "--svg", help="Write importance bar charts"),
    save_models: bool = typer.Option(False, "--save-models", help="Also save the trained models"),
    output: Path = typer.Option(..., "--output", "-o", help="Report directory"),
    threads: int | None = typer.Option(None, "--threads", "-t", help="Worker processes and tree threads"),
    config_file: Path | None = typer.Option(None, "--config", help="key=value run file"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
    debug: bool = typer.Option(False, "--debug", help="Enable debug logging"),
    log_file: Path | None = typer.Option(None, "--log-file", help="Log to file (in addition to console)"),
) -> None:
    """Train on the prior, then measure bias, MAE and coverage on the factorial design."""
    with guarded(debug):
        session = _session(
            {
                "threads": threads,
                "simulation.burnin_multiplier": burnin_mult,
                "forest.n_trees": n_trees,
                "training.draws": draws,
                "experiment.replications": replications,
            },
            config_file, verbose, debug, log_file,
        )
        config = session.config
        run = RunConfig(
            command="experiment",
            n=n,
            seed=seed,
            threads=config.threads,
            burnin_multiplier=config.simulation.burnin_multiplier,
            draws=config.training.draws,
            model_class=model_class,  # type: ignore[arg-type]
            output=output,
        )
        _validate(run, config)
        assert run.seed is not None

        trained = train_models(run.model_specs(), config, run.draws, run.seed, show_progress=True)
        report = run_experiment(trained, config, run.seed, config.experiment.replications, importance)

        written = write_report(report, output)
        if svg and report.importance is not None:
            written.extend(write_importance_svgs(report.importance, output / "svg"))
        if save_models:
            written.extend(trained.save(output / "models"))
        summary = {
            "seed": run.seed,
            "n": n,
            "draws": run.draws,
            "replications": config.experiment.replications,
            "config_hash": _config_hash(run.model_dump(mode="json", exclude={"output", "threads"}), config.model_dump(exclude={"threads"})),
            "versions": _versions(),
            **trained.selector_accuracy,
        }
        (output / "experiment.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")

        print_report(report, console)
        console.print(f"[green]Wrote {len(written) + 1} report artifacts to {output}[/green]")
