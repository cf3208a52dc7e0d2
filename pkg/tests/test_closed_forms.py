import math
from fractions import Fraction

import mpmath
import pytest

from app.models.schemas import BarConfig, DefectConfig, DefectKind, Dipole, DipoleKind, PairOrientation, SlitSpec
from app.services.closed_forms import closed_form_service as cf
from app.services.oracle import oracle_service as oracle
from app.utils.errors import UnsupportedInstanceError
from app.utils.exact import ExactValue


def test_diamond_count_matches_oracle():
    for n in (1, 2, 3):
        assert cf.diamond_count(n) == oracle.diamond_count(n)


@pytest.mark.parametrize("kind, s, expected", [
    (DipoleKind.XO_ODD, 1, Fraction(1, 4)),
    (DipoleKind.OX_EVEN, 1, Fraction(1, 4)),
    (DipoleKind.XO_EVEN, 1, Fraction(1, 4)),
    (DipoleKind.OX_ODD, 0, Fraction(1, 4)),
    (DipoleKind.OX_ODD, 1, Fraction(3, 4)),
    (DipoleKind.XO_EVEN, 0, Fraction(3, 4)),
])
def test_single_dipole_formula(kind, s, expected):
    d = Dipole(kind=kind, s=s)
    assert cf.dipole_corr(2, d) == expected
    assert cf.dipole_corr(2, d) == oracle.corr_finite(DefectConfig(n=2, holes=[d.hole], seps=[d.sep]))


def test_dipole_must_fit():
    with pytest.raises(ValueError):
        cf.dipole_corr(1, Dipole(kind=DipoleKind.OX_ODD, s=1))


def test_dipole_family_against_oracle(dipole_pair_config):
    dipoles = cf.dipole_decomposition(dipole_pair_config)
    assert cf.dipole_family_corr(2, dipoles) == Fraction(1, 4)
    assert cf.dipole_family_corr(2, dipoles) == oracle.corr_finite(dipole_pair_config)


def test_opposite_flavors_do_not_interact():
    d1, d2 = Dipole.from_positions(1, 2), Dipole.from_positions(4, 5)
    assert d1.is_odd and not d2.is_odd
    gap = cf.dipole_gap(3, d1, d2)
    assert gap.is_zero()
    assert gap == 0


def test_overlapping_dipoles_rejected():
    with pytest.raises(ValueError):
        cf.dipole_family_corr(2, [Dipole.from_positions(1, 2), Dipole.from_positions(3, 2)])


def test_center_pair_factor_is_e_squared():
    d1, d2 = Dipole.from_positions(1, 2), Dipole.from_positions(5, 6)
    ratio = cf.center_dipole_corr([d1, d2]) / (cf.center_dipole_corr([d1]) * cf.center_dipole_corr([d2]))
    assert ratio == cf.e_squared([1, 5], [2, 6]) == cf.center_pair_factor(4) == Fraction(16, 15)


def test_bulk_dipoles_at_center_reduce_to_center_formula():
    ds = [Dipole.from_positions(1, 2), Dipole.from_positions(4, 3)]
    assert cf.bulk_dipole_corr([1], [ds]) == cf.center_dipole_corr(ds)
    with pytest.raises(ValueError):
        cf.bulk_dipole_corr([2], [ds])


def test_bulk_dipole_orientation_factor():
    value = cf.bulk_dipole_corr([Fraction(1, 2)], [[Dipole.from_positions(1, 2)]])
    assert value == ExactValue(1, -2, Fraction(1, 3))


def test_p_and_slit_values():
    assert cf.p_product(0, 1) == ExactValue(2, -2)
    assert cf.slit_corr(1) == ExactValue(1, -2)
    assert cf.slit_corr(2) == ExactValue(Fraction(4, 3), -4)
    with pytest.raises(ValueError):
        cf.p_product(Fraction(1, 3), 2)


@pytest.mark.parametrize("a, b, d, orientation, expected", [
    (1, 1, 1, PairOrientation.SAME, Fraction(4, 5)),
    (1, 2, 1, PairOrientation.SAME, Fraction(27, 35)),
    (1, 1, 0, PairOrientation.OPPOSITE, Fraction(2, 3)),
])
def test_slit_ratio_values(a, b, d, orientation, expected):
    assert cf.slit_ratio(a, b, d, orientation) == expected


def test_slit_ratio_by_dipole_products():
    assert cf.multi_slit_corr(SlitSpec(lengths=[1, 1], gaps=[2])) == ExactValue(Fraction(16, 15), -4)
    assert cf.slit_ratio(1, 1, 1) == cf.slit_pair_corr(1, 1, 2) / cf.slit_corr(2)
    assert cf.slit_ratio(1, 1, 0, PairOrientation.OPPOSITE) == (
        cf.slit_pair_corr(1, 1, 1, PairOrientation.OPPOSITE) / cf.slit_pair_corr(1, 1, 0))


def test_slit_ratio_symmetric_in_length_and_gap():
    for a in range(1, 4):
        for b in range(1, 5):
            for d in range(1, 5):
                assert cf.slit_ratio(a, b, d) == cf.slit_ratio(a, d, b)


def test_parity_mismatched_slits_factor():
    assert cf.slit_pair_corr(1, 2, 1) == cf.slit_corr(1) * cf.slit_corr(2)


def test_giant_slit_exact():
    assert cf.giant_slit_exact(1, 1, 1) == Fraction(16, 15)
    assert cf.giant_slit_exact(1, 1, 1) == cf.slit_pair_corr(1, 1, 2) / cf.slit_corr(1) ** 2
    with pytest.raises(ValueError):
        cf.giant_slit_exact(0, 1, 1)


def test_q_squared_hyperfactorial_form():
    assert cf.q_squared_hyperfactorial(1, 2) == Fraction(9, 4)
    assert cf.q_squared_hyperfactorial(1, 1) == 1
    for n in range(1, 6):
        for s in range(0, n + 1):
            assert cf.q_squared_hyperfactorial(s, n) == cf.q_product(s, Fraction(2 * n + 3, 2)) ** 2


@pytest.mark.parametrize("n, s_list, expected", [
    (2, (1,), Fraction(9, 4)),
    (2, (1, 1), Fraction(4)),
    (2, (0, 1), Fraction(9, 4)),
    (2, (1, 2), Fraction(9, 4)),
    (1, (1,), Fraction(1)),
])
def test_monomer_even_count_ratio(n, s_list, expected):
    assert cf.monomer_even_count_ratio(n, s_list, "rows") == expected
    assert cf.monomer_even_count_ratio(n, s_list, "pq") == expected
    holes = cf.monomer_even_positions(s_list)
    assert oracle.count_config(DefectConfig(n=n, holes=holes)).value == expected * cf.diamond_count(n)


def test_monomer_even_log_ratio():
    assert float(cf.monomer_even_log_ratio(2, (1,))) == pytest.approx(math.log(2.25), rel=1e-12)


def test_monomer_even_rejects_bad_input():
    with pytest.raises(ValueError):
        cf.monomer_even_count_ratio(3, (2, 1))
    with pytest.raises(ValueError):
        cf.monomer_even_count_ratio(2, (3,))
    with pytest.raises(ValueError):
        cf.monomer_even_count_ratio(2, (1,), method="other")


def test_jump_sets():
    cfg = DefectConfig(n=14, holes=[5, 9, 14, 20, 26], seps=[6, 12, 17, 18])
    assert cfg.width == 29
    assert cf.hole_jump_set(cfg, 1) == [2, 4, 6, 11, 12, 15, 17, 18, 19, 22, 24, 27, 29]
    assert cf.sep_jump_set(cfg, 1) == [1, 3, 6, 7, 10, 13, 16, 17, 18, 21, 23, 25, 28]


def test_jump_set_of_second_hole_among_six():
    cfg = DefectConfig(n=11, holes=[6, 13, 18, 20, 21, 25])
    assert cfg.width == 28
    assert cf.hole_jump_set(cfg, 1) == [1, 3, 5, 8, 10, 15, 17, 22, 24, 27]
    assert cf.move_hole_ratio(cfg, 1) == Fraction(15, 16)


@pytest.mark.parametrize("a, expected", [(2, Fraction(3, 2)), (3, Fraction(3, 2)), (4, Fraction(2, 3)), (5, Fraction(2, 3))])
def test_single_hole_move_ratio(a, expected):
    assert cf.move_hole_ratio(DefectConfig(n=2, holes=[a]), 0) == expected


def test_moves_agree_with_oracle():
    cfg = DefectConfig(n=2, holes=[2, 5], seps=[3])
    moved = cf.shifted(cfg, DefectKind.HOLE, 1)
    assert cf.move_hole_ratio(cfg, 1) == Fraction(oracle.count_config(cfg).value, oracle.count_config(moved).value)
    cfg = DefectConfig(n=2, holes=[1, 2], seps=[4])
    moved = cf.shifted(cfg, DefectKind.SEPARATION, 0)
    assert cf.move_sep_ratio(cfg, 0) == Fraction(oracle.count_config(cfg).value, oracle.count_config(moved).value)


def test_blocked_moves():
    with pytest.raises(ValueError):
        cf.move_hole_ratio(DefectConfig(n=2, holes=[2, 3]), 1)
    with pytest.raises(ValueError):
        cf.move_hole_ratio(DefectConfig(n=2, holes=[1]), 0)


@pytest.mark.parametrize("n, max_defects", [(1, 4), (2, 3)])
def test_every_separation_move_agrees_with_oracle(axis_configs, n, max_defects):
    moves = 0
    for cfg in axis_configs(n, max_defects):
        for i, b in enumerate(cfg.seps):
            if b == 1 or cfg.kind_at(b - 1) is not None:
                continue
            moved = cf.shifted(cfg, DefectKind.SEPARATION, i)
            assert cf.move_sep_ratio(cfg, i) * oracle.count_config(moved).value == oracle.count_config(cfg).value, cfg
            moves += 1
    assert moves > 0


@pytest.mark.parametrize("n, max_defects", [(1, 3), (2, 2)])
def test_every_hole_to_separation_agrees_with_oracle(axis_configs, n, max_defects):
    def count(cfg, kind=None):
        return oracle.count_config(cfg if kind is None else cf.shifted(cfg, kind, 0)).value

    checked = 0
    for cfg in axis_configs(n, max_defects):
        if not cfg.holes or cfg.holes[0] < 2 or (cfg.seps and cfg.seps[0] < cfg.holes[0]):
            continue
        other = cf.hole_to_sep_config(cfg)
        lhs = cf.hole_to_sep_ratio(cfg) * count(cfg, DefectKind.HOLE) * count(other)
        assert lhs == count(cfg) * count(other, DefectKind.SEPARATION), cfg
        checked += 1
    assert checked > 0


def test_hole_to_separation():
    assert cf.hole_to_sep_ratio(DefectConfig(n=1, holes=[3])) == Fraction(1, 2)
    assert cf.hole_to_sep_ratio(DefectConfig(n=1, holes=[2])) == 2
    converted = cf.hole_to_sep_config(DefectConfig(n=1, holes=[2]))
    assert (converted.n, converted.holes, converted.seps, converted.width) == (2, [], [2], 3)


def test_hole_to_separation_against_oracle():
    cfg = DefectConfig(n=1, holes=[3])
    other = cf.hole_to_sep_config(cfg)
    ratio_c = Fraction(oracle.count_config(cfg).value, oracle.count_config(cf.shifted(cfg, DefectKind.HOLE, 0)).value)
    ratio_o = Fraction(oracle.count_config(other).value,
                       oracle.count_config(cf.shifted(other, DefectKind.SEPARATION, 0)).value)
    assert cf.hole_to_sep_ratio(cfg) == ratio_c / ratio_o


def test_bars():
    bar = BarConfig(n=2, k=1, l=0, p=1, q=1)
    assert cf.bars_count(bar, "gamma").value == 9216
    assert cf.bars_count(bar, "hyperfactorial").value == 9216
    assert oracle.count_config(bar.to_defect_config()).value == 9216
    assert cf.bars_count(bar).path == "bars-gamma"


def test_bars_forms_agree():
    for n in range(1, 5):
        for k in range(0, n + 1):
            for l in range(0, n - k + 1):  # noqa: E741
                for p in range(3):
                    for q in range(3):
                        bar = BarConfig(n=n, k=k, l=l, p=p, q=q)
                        assert cf.bars_ratio(bar, "gamma") == cf.bars_ratio(bar, "hyperfactorial")


def test_bars_log_count():
    bar = BarConfig(n=2, k=1, l=0, p=1, q=1)
    assert float(cf.bars_log_count(bar)) == pytest.approx(math.log(9216), rel=1e-12)


def test_bars_log_count_at_n_40():
    bar = BarConfig(n=40, k=10, l=10, p=10, q=10)
    exact = mpmath.log(cf.bars_count(bar).value)
    assert abs(cf.bars_log_count(bar) - exact) < mpmath.mpf(10) ** -20
    assert float(cf.monomer_even_log_ratio(40, (10, 20))) == pytest.approx(
        math.log(cf.monomer_even_count_ratio(40, (10, 20)).as_fraction()), rel=1e-12)


def test_as_bar_config():
    assert cf.as_bar_config(DefectConfig(n=3, holes=[3, 4, 7, 8])) == BarConfig(n=3, k=1, l=1, p=1, q=1)
    assert cf.as_bar_config(DefectConfig(n=3, holes=[2, 3])) is None
    assert cf.as_bar_config(DefectConfig(n=3, holes=[3])) is None


@pytest.mark.parametrize("cfg, value, path", [
    (DefectConfig(n=1), 8, "diamond"),
    (DefectConfig(n=2, holes=[3]), 2304, "hole-moves"),
    (DefectConfig(n=2, holes=[1, 3], seps=[2, 4]), 256, "dipoles"),
    (DefectConfig(n=2, holes=[3, 4, 5, 6]), 9216, "bars-gamma"),
    (DefectConfig(n=2, holes=[1], seps=[3]), None, "oracle"),
])
def test_count_exact_paths(cfg, value, path):
    count = cf.count_exact(cfg)
    assert count.path == path
    assert count.value == oracle.count_config(cfg).value
    if value is not None:
        assert count.value == value


def test_count_exact_beyond_cap(small_cap):
    with pytest.raises(UnsupportedInstanceError):
        cf.count_exact(DefectConfig(n=2, holes=[1], seps=[3]))
    assert cf.count_exact(DefectConfig(n=2, holes=[3])).value == 2304


def _step_by_step_ratio(config):
    """M(config)/M(holes at 1..k), moving every hole one unit per round."""
    holes = list(config.holes)
    ratio = Fraction(1)
    while holes != list(range(1, len(holes) + 1)):
        for i in range(len(holes)):
            if holes[i] > i + 1 and (i == 0 or holes[i - 1] < holes[i] - 1):
                ratio *= cf.move_hole_ratio(DefectConfig(n=config.n, holes=holes), i).as_fraction()
                holes[i] -= 1
    return ratio


@pytest.mark.parametrize("n", [1, 2, 3])
def test_count_exact_independent_of_move_order(axis_configs, n):
    for cfg in axis_configs(n, 3):
        if cfg.seps or not cfg.holes:
            continue
        assert cf.count_exact(cfg).value == _step_by_step_ratio(cfg) * cf.diamond_count(n), cfg


def test_detour_through_a_right_move():
    cfg = DefectConfig(n=2, holes=[2, 4])
    right = DefectConfig(n=2, holes=[2, 5])
    through_right = cf.count_exact(right).value / cf.move_hole_ratio(right, 1).as_fraction()
    assert through_right == cf.count_exact(cfg).value == oracle.count_config(cfg).value


def test_count_exact_rejects_non_integral_hole_chain(monkeypatch):
    monkeypatch.setattr(cf, "_hole_chain_ratio", lambda config: Fraction(1, 3))
    with pytest.raises(ValueError, match="not an integer"):
        cf.count_exact(DefectConfig(n=2, holes=[3]))


def test_count_exact_rejects_non_integral_dipole_product(monkeypatch, dipole_pair_config):
    monkeypatch.setattr(cf, "dipole_family_corr", lambda n, ds: ExactValue(Fraction(1, 3)))
    with pytest.raises(ValueError, match="not an integer"):
        cf.count_exact(dipole_pair_config)
