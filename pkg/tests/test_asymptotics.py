import math
from fractions import Fraction

import mpmath
import pytest

from app.models.schemas import BarConfig, DefectCluster, DefectConfig, DefectKind, Dipole, PairOrientation
from app.services.asymptotics import asymptotic_service as asym
from app.services.closed_forms import closed_form_service
from app.utils.exact import even_superfactorial_int, log_value


def test_constants():
    consts = asym.constants()
    assert consts["A"] == pytest.approx(1.2824271291, rel=1e-10)
    assert set(consts) == {"A", "2^(1/12) e^(1/4) A^-3", "e^(1/4) 2^(-5/12) A^-3", "e^(1/3) A^-4"}
    assert float(asym.glaisher_from_hyperfactorial(1000)) == pytest.approx(consts["A"], rel=1e-5)


def test_p_n_decay():
    small, large = asym.p_n_asym(100), asym.p_n_asym(1000)
    assert abs(large.rel_error) < 0.01
    assert abs(large.rel_error) < abs(small.rel_error)
    assert large.exponent == "-1/4"


def test_p_a_at_zero_is_p_n():
    assert asym.p_a_asym(0, 500).log_value == pytest.approx(asym.p_n_asym(500).log_value, rel=1e-12)
    with pytest.raises(ValueError):
        asym.p_a_asym(Fraction(1, 3), 10)


@pytest.mark.parametrize("a", [Fraction(1, 2), 1, Fraction(3, 2), 2, Fraction(5, 2)])
def test_p_a_decay_away_from_zero(a):
    result = asym.p_a_asym(a, 2000)
    assert abs(result.rel_error) < 0.01
    assert result.exponent == "-1/4"


def test_p_a_exact_side_matches_closed_form():
    a = Fraction(3, 2)
    expected = log_value(closed_form_service.p_product(a, 20))
    assert asym.p_a_asym(a, 20).exact_log == pytest.approx(float(expected), rel=1e-12)


def test_hyper_and_even_superfactorial_asymptotics():
    assert abs(asym.hyperfactorial_asym(50).rel_error) < 1e-3
    assert abs(asym.even_superfactorial_asym(50).rel_error) < 1e-2
    for n in (1, 5, 12):
        exact = mpmath.log(even_superfactorial_int(n))
        assert abs(asym.log_even_superfactorial_barnes(n) - exact) < mpmath.mpf(10) ** -20


def test_slit_limit():
    assert asym.slit_limit(0).rel_error == 0
    assert abs(asym.slit_limit(400).rel_error) < 0.01
    assert abs(asym.slit_limit(400, PairOrientation.OPPOSITE).rel_error) < 0.01
    with pytest.raises(ValueError):
        asym.slit_limit(-1)


def test_multi_slit_limit_has_one_factor_per_gap():
    single = asym.slit_limit(50)
    double = asym.multi_slit_limit([50, 50])
    assert double.log_value == pytest.approx(2 * single.log_value, rel=1e-12)
    assert double.exact_log == pytest.approx(2 * single.exact_log, rel=1e-12)
    assert double.details["slits"] == 3


def test_finite_slit_tail():
    result = asym.finite_slit_tail(2, 1, 200)
    assert abs(result.rel_error) < 0.05
    assert result.details["sign"] == 1


def test_mixed_parity_slits_are_exactly_independent():
    for orientation in PairOrientation:
        assert asym.finite_slit_difference(2, 1, 3, orientation, mixed=True).is_zero()


def test_casimir_limits():
    same = asym.casimir_ratio(1, 1, 1)
    assert same.value == pytest.approx((4 / 3) ** 0.25, rel=1e-12)
    opposite = asym.casimir_ratio(1, 1, 1, orientation=PairOrientation.OPPOSITE)
    assert opposite.value == pytest.approx(0.75 ** 0.25, rel=1e-12)
    assert abs(asym.casimir_ratio(1, 1, 1, n=1000).rel_error) < 0.01
    assert abs(asym.casimir_ratio(1, 1, 1, n=1000, orientation=PairOrientation.OPPOSITE).rel_error) < 0.01
    halves = asym.casimir_ratio(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), n=1000)
    assert halves.value == pytest.approx(same.value, rel=1e-12)
    assert abs(halves.rel_error) < 0.02


def test_casimir_normalization_rules():
    with pytest.raises(ValueError):
        asym.casimir_ratio(1, 1, 1, normalization="merged")
    with pytest.raises(ValueError):
        asym.casimir_ratio(1, 1, 1, n=10, orientation=PairOrientation.OPPOSITE, normalization="merged")
    with pytest.raises(ValueError):
        asym.casimir_ratio(1, 0, 1)


def test_giant_slit_dipole():
    result = asym.giant_slit_dipole(1000, 1, 1000)
    assert result.details["excess_predicted"] == pytest.approx(1.25e-4)
    assert result.details["excess_exact"] == pytest.approx(1.25e-4, rel=0.05)


@pytest.mark.parametrize("eps, expected", [(0.5, 1 / (4 * 1000 ** 0.5)), (1, 1 / 8000), (1.5, 1 / (4 * 1000 ** 2))])
def test_giant_slit_regimes(eps, expected):
    result = asym.giant_slit_regime(1, eps, 1000)
    assert result.value == pytest.approx(expected, rel=1e-9)
    assert abs(result.rel_error) < 0.1


def test_boundary_move_ratio():
    for alpha in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        assert abs(asym.boundary_move_ratio(alpha, 500).rel_error) < 0.01
    assert asym.boundary_move_ratio(Fraction(1, 2), 500).value == pytest.approx(math.sqrt(3))


def test_boundary_shift_limit():
    assert asym.boundary_shift_limit(Fraction(1, 3), 2).value == pytest.approx(0.5)
    assert asym.boundary_shift_limit(0, 5).value == pytest.approx(1.0)
    assert asym.boundary_shift_limit(Fraction(-1, 2), 1).value == pytest.approx(math.sqrt(3))


def test_neutral_shift_limit():
    hole, sep = DefectKind.HOLE, DefectKind.SEPARATION
    o1 = DefectCluster(offsets=[(0, hole), (1, sep)])
    o2 = DefectCluster(offsets=[(2, hole), (3, sep)])
    assert asym.neutral_shift_limit(o1, o2) == Fraction(3, 4)
    with pytest.raises(ValueError):
        asym.neutral_shift_limit(DefectCluster(offsets=[(0, hole)]), o2)


def test_defect_field_single_hole():
    result = asym.defect_field_asym([501], [], 500)
    assert result.exact_log == pytest.approx(346.9, rel=1e-2)
    assert abs(result.rel_error) < 0.01
    with pytest.raises(ValueError):
        asym.defect_field_asym([1000], [], 500)


def test_defect_field_with_a_separation_against_exact_count():
    n, hole, sep = 150, 100, 201
    # start from the adjacent pair, then walk the separation to the right
    log_exact = math.log(closed_form_service.dipole_corr(n, Dipole.from_positions(hole, hole + 1)).as_fraction())
    for b in range(hole + 2, sep + 1):
        cfg = DefectConfig(n=n, holes=[hole], seps=[b])
        log_exact += math.log(closed_form_service.move_sep_ratio(cfg, 0).as_fraction())
    result = asym.defect_field_asym([hole], [sep], n)
    assert result.exact_log is None
    assert result.log_value == pytest.approx(log_exact, abs=0.03)

    moved = asym.defect_field_asym([hole - 1], [sep], n)
    step = closed_form_service.move_hole_ratio(DefectConfig(n=n, holes=[hole], seps=[sep]), 0).as_fraction()
    assert result.log_value - moved.log_value == pytest.approx(math.log(step), abs=0.01)


def test_simultaneous_approximation():
    assert asym.simultaneous_approximation([mpmath.sqrt(2)], q_min=10) == (12, [17])
    with pytest.raises(ValueError):
        asym.simultaneous_approximation([])


def test_interaction_terms():
    assert asym.interaction_terms([0, 1, 3]) == [(1, 1), (3, -1), (2, 1)]


def test_free_energy_per_site():
    n = 40
    per_site = closed_form_service.bars_log_count(BarConfig(n=n, k=10, l=10, p=10, q=10)) / (4 * n * (2 * n + 1))
    assert abs(float(per_site) - asym.free_energy(0.25, 0.25, 0.25, 0.25)) < 1e-2


def test_convergence_probe():
    record = asym.convergence_probe(
        "toy", lambda n: mpmath.log(1 + mpmath.mpf(1) / n), lambda n: mpmath.mpf(0), [10, 20, 40])
    assert record.n_grid == [10, 20, 40]
    assert record.rel_error == pytest.approx([0.1, 0.05, 0.025])
    assert record.monotone
    bumpy = asym.convergence_probe("toy", lambda n: mpmath.mpf(1) / n if n != 20 else 1, lambda n: 0, [10, 20])
    assert not bumpy.monotone


def test_convergence_probe_keeps_failed_rows():
    def exact(n):
        if n == 20:
            raise ValueError("out of range")
        return mpmath.mpf(1) / n
    record = asym.convergence_probe("toy", exact, lambda n: 0, [10, 20, 40])
    assert record.n_grid == [10, 20, 40]
    assert record.errors[0] is None and record.errors[2] is None
    assert "grid index 1" in record.errors[1] and "out of range" in record.errors[1]
    assert math.isnan(record.exact_log[1]) and math.isnan(record.rel_error[1])
    assert record.rel_error[2] == pytest.approx(math.expm1(1 / 40))
    assert record.monotone


def test_convergence_probe_reports_missing_exact_value():
    record = asym.convergence_probe("toy", lambda n: None, lambda n: 0, [10])
    assert record.errors[0].startswith("grid index 0")


def test_law_evaluators():
    exact, predicted = asym.law_evaluators("p-asym", {})
    assert float(exact(100)) == pytest.approx(asym.p_n_asym(100).exact_log)
    assert float(predicted(100)) == pytest.approx(asym.p_n_asym(100).log_value)
    with pytest.raises(ValueError):
        asym.law_evaluators("unknown", {})


def test_gamma_ratio_asym():
    assert asym.gamma_ratio_asym(50, 1, 0) == pytest.approx(50.0)
    assert asym.gamma_ratio_asym(50, 0.5, 0.5) == pytest.approx(1.0)
    exact = float(mpmath.exp(mpmath.loggamma(101) - mpmath.loggamma(100.5)))
    assert abs(asym.gamma_ratio_asym(100, 1, 0.5) - exact) < 1e-4
