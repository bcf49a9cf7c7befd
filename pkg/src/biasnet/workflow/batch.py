"""Ordered execution of independent tasks on a process pool."""

from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
import logging
from typing import TypeVar

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

console = Console(stderr=True)


def run_batch(
    fn: Callable[[T], R],
    tasks: Sequence[T],
    threads: int = 1,
    description: str | None = None,
) -> list[R]:
    """Apply ``fn`` to every task and return results in task order.

    With ``threads > 1`` the tasks run on a process pool, so ``fn`` and the
    tasks must be picklable. Each task is expected to carry its own seed;
    the worker count never changes the results.

    Args:
        fn: Module-level function run once per task
        tasks: Task payloads
        threads: Worker processes (1 runs in-process)
        description: Show a progress bar with this label
    """
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")

    results: list[R | None] = [None] * len(tasks)
    progress = _progress() if description else None

    if progress is not None:
        progress.start()
    try:
        bar = progress.add_task(description or "", total=len(tasks)) if progress else None
        if threads == 1 or len(tasks) <= 1:
            for k, task in enumerate(tasks):
                results[k] = fn(task)
                if progress is not None and bar is not None:
                    progress.advance(bar)
        else:
            workers = min(threads, len(tasks))
            logger.debug(f"Running {len(tasks)} tasks on {workers} worker processes")
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(fn, task): k for k, task in enumerate(tasks)}
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
                    if progress is not None and bar is not None:
                        progress.advance(bar)
    finally:
        if progress is not None:
            progress.stop()

    return results  # type: ignore[return-value]


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )
