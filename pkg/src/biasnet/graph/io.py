"""Edge-list reading and writing.

Format: the first non-comment line holds the vertex count ``N``; every further
line is ``i j strength`` with 0-based vertices. Lines starting with ``#`` are
comments. A line with only ``i j`` is read as strength 1.
"""

from pathlib import Path

from pydantic import ValidationError

from biasnet.errors import EdgeListParseError
from biasnet.graph.digraph import DiGraph, ValuedEdgeList


def _parse_int(token: str, what: str, line_number: int, source: str | None) -> int:
    try:
        return int(token)
    except ValueError:
        raise EdgeListParseError(f"{what} is not an integer: {token!r}", line_number, source)


def read_edge_list(
    text: str, levels: int | None = None, source: str | None = None
) -> ValuedEdgeList:
    """Parse edge-list text.

    Args:
        text: File contents
        levels: Declared number of strength levels (optional)
        source: Name used in error messages

    Raises:
        EdgeListParseError: On malformed lines, self-loops, duplicate pairs,
            out-of-range vertices or non-positive strengths.
    """
    n: int | None = None
    entries: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int]] = set()

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()

        if n is None:
            if len(tokens) != 1:
                raise EdgeListParseError("first line must hold the vertex count", line_number, source)
            n = _parse_int(tokens[0], "vertex count", line_number, source)
            if n < 1:
                raise EdgeListParseError(f"vertex count must be positive, got {n}", line_number, source)
            continue

        if len(tokens) not in (2, 3):
            raise EdgeListParseError(
                f"expected 'i j strength', got {len(tokens)} fields", line_number, source
            )
        i = _parse_int(tokens[0], "source vertex", line_number, source)
        j = _parse_int(tokens[1], "target vertex", line_number, source)
        strength = _parse_int(tokens[2], "strength", line_number, source) if len(tokens) == 3 else 1

        if i == j:
            raise EdgeListParseError(f"self-loop ({i}, {j})", line_number, source)
        if not (0 <= i < n and 0 <= j < n):
            raise EdgeListParseError(f"vertex out of range for N={n}: ({i}, {j})", line_number, source)
        if strength < 1:
            raise EdgeListParseError(f"strength must be positive, got {strength}", line_number, source)
        if levels is not None and strength > levels:
            raise EdgeListParseError(
                f"strength {strength} exceeds declared levels {levels}", line_number, source
            )
        if (i, j) in seen:
            raise EdgeListParseError(f"duplicate ordered pair ({i}, {j})", line_number, source)
        seen.add((i, j))
        entries.append((i, j, strength))

    if n is None:
        raise EdgeListParseError("missing vertex count line", 1, source)

    try:
        return ValuedEdgeList(n=n, entries=entries, levels=levels)
    except ValidationError as e:
        raise EdgeListParseError(str(e), 1, source)


def write_edge_list(v: ValuedEdgeList) -> str:
    """Serialize with entries in canonical (i, j) order."""
    lines = [str(v.n)]
    lines.extend(f"{i} {j} {s}" for i, j, s in sorted(v.entries))
    return "\n".join(lines) + "\n"


def read_edge_list_file(path: Path, levels: int | None = None) -> ValuedEdgeList:
    return read_edge_list(Path(path).read_text(encoding="utf-8"), levels=levels, source=str(path))


def write_edge_list_file(v: ValuedEdgeList, path: Path) -> None:
    Path(path).write_text(write_edge_list(v), encoding="utf-8")


def read_graph_file(path: Path) -> DiGraph:
    """Read a file as a binary network (any recorded strength counts as a tie)."""
    v = read_edge_list_file(path)
    return DiGraph.from_edges(v.n, ((i, j) for i, j, _ in v.entries))


def write_graph_file(g: DiGraph, path: Path) -> None:
    write_edge_list_file(ValuedEdgeList.from_graph(g), path)
