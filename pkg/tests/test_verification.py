import pytest

from app.models.schemas import CheckResult
from app.services.verification import Battery, dipole_families, verification_service as verification
from app.utils.errors import InvariantViolation


def test_dipole_families_of_ad_2():
    families = list(dipole_families(1))
    assert len(families) == 2
    assert {(ds[0].hole, ds[0].sep) for ds in families} == {(1, 2), (2, 1)}


def test_dipole_families_are_disjoint():
    for ds in dipole_families(3):
        points = [p for d in ds for p in (d.hole, d.sep)]
        assert len(points) == len(set(points))


def test_oracle_battery_small():
    results = verification.run_suite("oracle", max_n=2)
    assert results and all(r.passed for r in results)
    verification.ensure_passed(results)


def test_oracle_battery_up_to_ad_6():
    results = verification.run_suite("oracle", max_n=3)
    assert all(r.passed for r in results), [r for r in results if not r.passed]
    by_name = {r.name: r for r in results}
    assert by_name["diamond count 2^{n(2n+1)}"].cases == 3
    assert by_name["dipole families"].cases == sum(1 for n in (1, 2, 3) for _ in dipole_families(n))


def test_identities_battery_small():
    results = verification.run_suite("identities", max_n=3)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_identities_battery_covers_mixed_slits():
    results = verification.run_suite("identities", max_n=2)
    zero = next(r for r in results if r.name == "exact zero interaction across flavors")
    assert zero.passed
    # 3 * 3 * 4 gaps, both orientations
    assert zero.cases >= 72


def test_asymptotics_battery():
    results = verification.run_suite("asymptotics")
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_battery_records_crashing_case():
    def crash() -> bool:
        raise AttributeError("no such formula")

    battery = Battery("identities")
    battery.run("toy", [("fine", lambda: True), ("broken", crash), ("also broken", lambda: 1 / 0 == 0)])
    row = battery.results[0]
    assert row.cases == 3
    assert row.failures == 2
    assert row.counterexample == "broken: AttributeError: no such formula"


def test_ensure_passed_lists_counterexample():
    rows = [CheckResult(suite="oracle", name="toy", cases=2, failures=1, counterexample="AR_{2,2}()")]
    with pytest.raises(InvariantViolation, match="AR_"):
        verification.ensure_passed(rows)


def test_unknown_suite():
    with pytest.raises(ValueError):
        verification.run_suite("everything")
