# graph/io.py - Line-oriented text format for graphs and demand pairs
import logging
from pathlib import Path as FilePath
from typing import Iterable, List, Tuple, Union

from congroute.errors import MalformedInputError
from congroute.graph.models import MultiGraph

logger = logging.getLogger(__name__)

PathLike = Union[str, FilePath]


def _records(lines: Iterable[str]) -> Iterable[Tuple[int, List[str]]]:
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line[0] in "c#":
            continue
        yield lineno, line.split()


def _ints(fields: List[str], lineno: int) -> List[int]:
    try:
        return [int(x) for x in fields]
    except ValueError:
        raise MalformedInputError(f"line {lineno}: expected integers, got {' '.join(fields)}") from None


def parse_graph(lines: Iterable[str]) -> MultiGraph:
    """Parse `p <n> <m>` followed by `e <u> <v>` lines; vertices are 1..n, edge ids 0..m-1"""
    header = None
    edge_list: List[Tuple[int, int]] = []
    for lineno, fields in _records(lines):
        tag = fields[0]
        if tag == "p":
            if header is not None or len(fields) != 3:
                raise MalformedInputError(f"line {lineno}: bad or repeated header")
            header = _ints(fields[1:], lineno)
        elif tag == "e":
            if header is None:
                raise MalformedInputError(f"line {lineno}: edge before header")
            if len(fields) != 3:
                raise MalformedInputError(f"line {lineno}: edge needs two endpoints")
            u, v = _ints(fields[1:], lineno)
            if not (1 <= u <= header[0] and 1 <= v <= header[0]):
                raise MalformedInputError(f"line {lineno}: endpoint outside 1..{header[0]}")
            if u == v:
                raise MalformedInputError(f"line {lineno}: self-loop on {u}")
            edge_list.append((u, v))
        elif tag == "d":
            continue
        else:
            raise MalformedInputError(f"line {lineno}: unknown record '{tag}'")
    if header is None:
        raise MalformedInputError("missing `p <n> <m>` header")
    n, m = header
    if m != len(edge_list):
        raise MalformedInputError(f"header announces {m} edges, found {len(edge_list)}")
    return MultiGraph.from_edge_list(range(1, n + 1), edge_list)


def parse_demands(lines: Iterable[str]) -> List[Tuple[int, int]]:
    pairs: List[Tuple[int, int]] = []
    for lineno, fields in _records(lines):
        if fields[0] != "d":
            continue
        if len(fields) != 3:
            raise MalformedInputError(f"line {lineno}: demand needs two endpoints")
        s, t = _ints(fields[1:], lineno)
        if s == t:
            raise MalformedInputError(f"line {lineno}: demand pair with identical endpoints {s}")
        pairs.append((s, t))
    return pairs


def read_graph(path: PathLike) -> MultiGraph:
    with open(path, "r", encoding="utf-8") as handle:
        graph = parse_graph(handle)
    logger.info(f"Loaded graph {path}: n={graph.num_vertices}, m={graph.num_edges}")
    return graph


def read_demands(path: PathLike) -> List[Tuple[int, int]]:
    with open(path, "r", encoding="utf-8") as handle:
        pairs = parse_demands(handle)
    logger.info(f"Loaded {len(pairs)} demand pairs from {path}")
    return pairs


def format_graph(graph: MultiGraph) -> str:
    """Inverse of parse_graph for graphs whose vertices are exactly 1..n"""
    n = graph.num_vertices
    if graph.vertices != frozenset(range(1, n + 1)):
        raise MalformedInputError("only graphs on vertices 1..n can be written")
    lines = [f"p {n} {graph.num_edges}"]
    lines.extend(f"e {u} {v}" for u, v in graph.edges.values())
    return "\n".join(lines) + "\n"


def format_demands(pairs: Iterable[Tuple[int, int]]) -> str:
    return "".join(f"d {s} {t}\n" for s, t in pairs)


def write_graph(graph: MultiGraph, path: PathLike) -> None:
    FilePath(path).write_text(format_graph(graph), encoding="utf-8")


def write_demands(pairs: Iterable[Tuple[int, int]], path: PathLike) -> None:
    FilePath(path).write_text(format_demands(pairs), encoding="utf-8")
