"""Exact bulk ratios for clusters near a fixed relative position alpha on the axis.

Fix a point at relative position (1+alpha)/2 along the axis, with -1 < alpha < 1,
and let the diamond grow. Moving one defect of a cluster a unit to the left then
changes the correlation by a limit ratio that depends only on the cluster. That
ratio is a product of Gamma kernels over the other defects. Chaining the moves
gives exact ratios between any two clusters with the same sequence of kinds.
"""

import logging
from fractions import Fraction
from typing import List, Optional, Set, Tuple

from app.models.schemas import DefectCluster, DefectKind
from app.utils.exact import ExactValue, GammaProduct, eval_gamma_product

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


def _free_between(x: int, y: int, occupied: Set[int]) -> int:
    lo, hi = sorted((x, y))
    return sum(1 for z in range(lo + 1, hi) if z not in occupied)


def _kernel(x: int, y: int, occupied: Set[int], likes: bool) -> ExactValue:
    if x == y:
        raise ValueError(f"kernel needs distinct points, got {x} twice")
    delta = Fraction(abs(x - y))
    even = _free_between(x, y, occupied) % 2 == 0
    if even == likes:
        gp = GammaProduct([(delta - 1) / 2, (delta + 1) / 2], [delta / 2, delta / 2])
    else:
        gp = GammaProduct([delta / 2, delta / 2 + 1], [(delta + 1) / 2, (delta + 1) / 2])
    return eval_gamma_product(gp)


def _check_alpha(alpha) -> Fraction:
    alpha = Fraction(alpha)
    if not -1 < alpha < 1:
        raise ValueError(f"alpha {alpha} outside (-1, 1)")
    return alpha


class AlphaWindowService:
    def likes_kernel(self, x: int, y: int, occupied: Set[int]) -> ExactValue:
        """Kernel between two defects of the same kind; raises on Gamma(0) at distance one."""
        return _kernel(x, y, set(occupied), likes=True)

    def unlikes_kernel(self, x: int, y: int, occupied: Set[int]) -> ExactValue:
        """Kernel between a hole and a separation."""
        return _kernel(x, y, set(occupied), likes=False)

    def alpha_move_ratio(self, alpha, cluster: DefectCluster, index: int, kind: Optional[DefectKind] = None) -> ExactValue:
        """Limit of omega(cluster) / omega(cluster with defect ``index`` one unit left)."""
        alpha = _check_alpha(alpha)
        pos, moving = cluster.offsets[index]
        if kind is not None and DefectKind(kind) != moving:
            raise ValueError(f"defect at {pos} is a {moving.value}, not a {DefectKind(kind).value}")
        before = {o for o, _ in cluster.offsets}
        if pos - 1 in before:
            raise ValueError(f"move of defect at {pos} is blocked by the defect at {pos - 1}")
        after = (before - {pos}) | {pos - 1}

        if moving == DefectKind.HOLE:
            value = ExactValue.sqrt_of((1 - alpha) / (1 + alpha))
        else:
            value = ExactValue.sqrt_of((1 + alpha) / (1 - alpha))
        for other, other_kind in cluster.offsets:
            if other == pos:
                continue
            same = other_kind == moving
            if other < pos:
                value = value * _kernel(pos, other, before, likes=same)
            else:
                value = value / _kernel(pos - 1, other, after, likes=same)
        return value

    def alpha_corr_ratio(self, alpha, source: DefectCluster, target: DefectCluster) -> ExactValue:
        """Limit of omega(target) / omega(source) in the alpha window."""
        alpha = _check_alpha(alpha)
        if source.kinds != target.kinds:
            raise ValueError("clusters must have the same left-to-right sequence of kinds")
        if not source.offsets:
            return ExactValue(1)
        size = len(source.offsets)
        base = min(source.offsets[0][0], target.offsets[0][0]) - size - 1
        ratio = self._ratio_to_packed(alpha, target, base) / self._ratio_to_packed(alpha, source, base)
        logger.debug(f"alpha={alpha}: ratio {ratio}")
        return ratio

    def translation_factor(self, alpha, charge: int) -> ExactValue:
        """omega of a cluster shifted one unit right over omega of the cluster: ((1-a)/(1+a))^{q/2}.

        Pair kernels cancel along the shift, so only the per-defect radicals survive.
        """
        alpha = _check_alpha(alpha)
        return ExactValue.sqrt_of((1 - alpha) / (1 + alpha)) ** charge

    def _ratio_to_packed(self, alpha: Fraction, cluster: DefectCluster, base: int) -> ExactValue:
        """omega(cluster) / omega(same kinds packed at base, base+1, ...)."""
        offsets: List[Tuple[int, DefectKind]] = list(cluster.offsets)
        value = ExactValue(1)
        for i in range(len(offsets)):
            while offsets[i][0] > base + i:
                value = value * self.alpha_move_ratio(alpha, DefectCluster(offsets=offsets), i)
                offsets[i] = (offsets[i][0] - 1, offsets[i][1])
        return value


alpha_window_service = AlphaWindowService()
