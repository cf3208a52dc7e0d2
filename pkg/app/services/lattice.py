"""Aztec rectangles with defects on the horizontal symmetry axis.

The region AR_{2n,W} (W = 2n+k-l) is drawn on a board of 4n+1 rows and 2W+1
columns. Its vertices are the squares with odd row+column, joined when they touch
diagonally. Row 2n is the axis, and axis label j sits in column 2j-1. A hole
deletes its vertex. A separation splits it into an "up" copy, which keeps the
edges into row 2n-1, and a "down" copy, which keeps the edges into row 2n+1.
"""

import logging
from typing import Dict, List, Optional, Tuple

from app.models.schemas import AxisGraph, DefectConfig, DefectKind, Vertex

logger = logging.getLogger(__name__)

_Key = Tuple[int, int, Optional[str]]


def _axis_label(col: int) -> int:
    return (col + 1) // 2


def build_graph(config: DefectConfig) -> AxisGraph:
    """Build the explicit graph of AR_{2n,2n+k-l}(holes, seps)."""
    n, width = config.n, config.width
    axis_row = 2 * n
    holes, seps = set(config.holes), set(config.seps)

    vertices: List[Vertex] = []
    index: Dict[_Key, int] = {}
    axis: Dict[int, List[int]] = {}

    def add(row: int, col: int, label: Optional[int] = None, tag: Optional[str] = None) -> None:
        index[(row, col, tag)] = len(vertices)
        vertices.append(Vertex(row=row, col=col, parity="even" if row % 2 == 0 else "odd", label=label, tag=tag))
        if label is not None:
            axis.setdefault(label, []).append(index[(row, col, tag)])

    for row in range(4 * n + 1):
        for col in range(2 * width + 1):
            if (row + col) % 2 == 0:
                continue
            if row != axis_row:
                add(row, col)
                continue
            label = _axis_label(col)
            if label in holes:
                continue
            if label in seps:
                add(row, col, label, "up")
                add(row, col, label, "down")
            else:
                add(row, col, label)

    def resolve(row: int, col: int, from_row: int) -> Optional[int]:
        if row == axis_row and _axis_label(col) in seps:
            tag = "up" if from_row < axis_row else "down"
            return index.get((row, col, tag))
        return index.get((row, col, None))

    adjacency: List[List[int]] = [[] for _ in vertices]
    for v, vertex in enumerate(vertices):
        row, col = vertex.row, vertex.col
        for dr in (-1, 1):
            target_row = row + dr
            if vertex.tag == "up" and dr == 1 or vertex.tag == "down" and dr == -1:
                continue
            # only edges towards the next column; the reverse direction is added alongside
            w = resolve(target_row, col + 1, row)
            if w is not None:
                adjacency[v].append(w)
                adjacency[w].append(v)

    graph = AxisGraph(n=n, width=width, vertices=vertices, adjacency=adjacency, axis=axis)
    logger.debug(f"Built AR_{{{2 * n},{width}}} with {len(vertices)} vertices, balanced={graph.balanced}")
    return graph


def rotate_180(config: DefectConfig) -> DefectConfig:
    """Rotate the region by 180 degrees; axis label j goes to W+1-j."""
    width = config.width
    return DefectConfig(
        n=config.n,
        holes=sorted(width + 1 - h for h in config.holes),
        seps=sorted(width + 1 - s for s in config.seps),
    )


def region_name(config: DefectConfig) -> str:
    defects = ", ".join(f"{'o' if kind == DefectKind.HOLE else 'x'}{pos}" for pos, kind in config.defects())
    return f"AR_{{{2 * config.n},{config.width}}}({defects})"
