from fractions import Fraction

import pytest

from app.models.schemas import DefectCluster, DefectKind
from app.services.alpha_window import alpha_window_service as aw
from app.utils.exact import ExactValue

HOLE, SEP = DefectKind.HOLE, DefectKind.SEPARATION


def test_kernels():
    assert aw.likes_kernel(1, 3, set()) == ExactValue(4, -2)
    assert aw.likes_kernel(0, 3, {0, 3}) == ExactValue(4, -2)
    assert aw.unlikes_kernel(0, 1, {0, 1}) == ExactValue(Fraction(1, 2), 2)
    with pytest.raises(ValueError):
        aw.likes_kernel(0, 1, {0, 1})
    with pytest.raises(ValueError):
        aw.unlikes_kernel(2, 2, set())


def test_single_defect_move_ratios():
    hole = DefectCluster(offsets=[(0, HOLE)])
    sep = DefectCluster(offsets=[(0, SEP)])
    assert aw.alpha_move_ratio(Fraction(3, 5), hole, 0) == Fraction(1, 2)
    assert aw.alpha_move_ratio(Fraction(3, 5), sep, 0) == 2
    assert aw.alpha_move_ratio(0, hole, 0, kind=HOLE) == 1
    with pytest.raises(ValueError):
        aw.alpha_move_ratio(0, hole, 0, kind=SEP)
    with pytest.raises(ValueError):
        aw.alpha_move_ratio(1, hole, 0)


def test_blocked_move():
    with pytest.raises(ValueError):
        aw.alpha_move_ratio(0, DefectCluster(offsets=[(0, HOLE), (1, SEP)]), 1)


def test_chained_moves_at_the_center():
    start = DefectCluster(offsets=[(0, HOLE), (1, SEP), (3, HOLE), (4, SEP)])
    middle = DefectCluster(offsets=[(0, HOLE), (1, SEP), (2, HOLE), (4, SEP)])
    first = aw.alpha_move_ratio(0, start, 2)
    second = aw.alpha_move_ratio(0, middle, 3)
    assert first == ExactValue(Fraction(3, 8), 2)
    assert second == ExactValue(Fraction(9, 128), 6)
    assert first * second == ExactValue(Fraction(27, 1024), 8)


def test_corr_ratio_two_holes():
    source = DefectCluster(offsets=[(0, HOLE), (2, HOLE)])
    target = DefectCluster(offsets=[(0, HOLE), (3, HOLE)])
    assert aw.alpha_corr_ratio(0, source, target) == ExactValue(4, -2)
    assert aw.alpha_corr_ratio(0, target, source) == ExactValue(Fraction(1, 4), 2)


def test_corr_ratio_needs_same_kinds():
    with pytest.raises(ValueError):
        aw.alpha_corr_ratio(0, DefectCluster(offsets=[(0, HOLE)]), DefectCluster(offsets=[(0, SEP)]))
    assert aw.alpha_corr_ratio(0, DefectCluster(offsets=[]), DefectCluster(offsets=[])) == 1


@pytest.mark.parametrize("alpha", [Fraction(0), Fraction(1, 3), Fraction(-1, 2)])
@pytest.mark.parametrize("offsets", [
    [(0, HOLE)],
    [(0, SEP), (3, SEP)],
    [(0, HOLE), (1, SEP), (4, HOLE)],
])
def test_unit_translation(alpha, offsets):
    cluster = DefectCluster(offsets=offsets)
    ratio = aw.alpha_corr_ratio(alpha, cluster, cluster.translated(1))
    assert ratio == aw.translation_factor(alpha, cluster.charge)


def test_translation_factor_values():
    assert aw.translation_factor(Fraction(1, 3), 2) == Fraction(1, 2)
    assert aw.translation_factor(Fraction(1, 3), -2) == 2
    assert aw.translation_factor(Fraction(1, 2), 0) == 1
