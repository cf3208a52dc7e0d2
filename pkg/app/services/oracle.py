"""Brute-force perfect matching counts by a column-sweep transfer DP.

Every edge of an Aztec rectangle joins column c to column c+1, so a sweep over
columns only needs to remember which vertices of the current column were
already matched from the left. The state is that bitmask. Column heights are
at most 2n+2, so the state space stays small for the instances we check.
"""

import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List

from app.config import get_settings
from app.models.schemas import AxisGraph, DefectConfig, MatchCount
from app.services.lattice import build_graph, region_name
from app.utils.errors import InstanceTooLargeError
from app.utils.exact import ExactValue

logger = logging.getLogger(__name__)


class OracleService:
    def __init__(self):
        self._diamond_counts: Dict[int, int] = {}

    def count_matchings(self, g: AxisGraph) -> MatchCount:
        """Exact number of perfect matchings of a small balanced graph.

        Columns are swept left to right. The state is the set of vertices in the
        current column already matched from the left, kept as a bitmask, and each
        state maps to the number of partial matchings that reach it. Graphs above
        the configured vertex cap raise InstanceTooLargeError. An unbalanced graph
        returns 0 without a sweep.
        """
        cap = get_settings().oracle_vertex_cap
        if len(g.vertices) > cap:
            raise InstanceTooLargeError(f"graph has {len(g.vertices)} vertices, oracle cap is {cap}")
        if not g.balanced:
            logger.warning(f"Unbalanced graph with {len(g.vertices)} vertices has no perfect matching")
            return MatchCount(value=0, path="oracle", balanced=False)

        columns = self._columns(g)
        slot = {}
        for col in columns:
            for i, v in enumerate(col):
                slot[v] = i
        # bit positions of right-hand neighbours, per column and slot
        right: List[List[List[int]]] = []
        for c, col in enumerate(columns):
            right.append([[slot[w] for w in g.adjacency[v] if g.vertices[w].col == c + 1] for v in col])

        states: Dict[int, int] = {0: 1}
        for c, col in enumerate(columns):
            nxt: Dict[int, int] = defaultdict(int)
            options = right[c]
            for mask, ways in states.items():
                free = [i for i in range(len(col)) if not mask >> i & 1]

                def assign(pos: int, used: int) -> None:
                    if pos == len(free):
                        nxt[used] += ways
                        return
                    for bit in options[free[pos]]:
                        if not used >> bit & 1:
                            assign(pos + 1, used | 1 << bit)

                assign(0, 0)
            states = nxt
            if not states:
                break

        value = states.get(0, 0)
        logger.debug(f"Oracle counted {value} matchings over {len(columns)} columns")
        return MatchCount(value=value, path="oracle")

    def count_config(self, config: DefectConfig) -> MatchCount:
        return self.count_matchings(build_graph(config))

    def diamond_count(self, n: int) -> int:
        """M(AD_{2n}) by the oracle."""
        if n not in self._diamond_counts:
            self._diamond_counts[n] = self.count_config(DefectConfig(n=n)).value
        return self._diamond_counts[n]

    def corr_finite(self, config: DefectConfig) -> ExactValue:
        """omega_{2n}(H,S) = M(AD_{2n}(H,S)) / M(AD_{2n})."""
        if config.k != config.l:
            raise ValueError(f"finite correlation needs k = l, got k={config.k}, l={config.l}")
        count = self.count_config(config).value
        logger.info(f"{region_name(config)}: {count} matchings")
        return ExactValue(Fraction(count, self.diamond_count(config.n)))

    def _columns(self, g: AxisGraph) -> List[List[int]]:
        width = max(v.col for v in g.vertices) + 1 if g.vertices else 0
        columns: List[List[int]] = [[] for _ in range(width)]
        for idx, v in enumerate(g.vertices):
            columns[v.col].append(idx)
        return columns


oracle_service = OracleService()
