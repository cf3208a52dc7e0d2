"""Invariant batteries behind ``verify``.

Each battery walks a family of instances and records, per named check, how
many cases ran and the first counterexample. ``ensure_passed`` turns a failed
battery into an ``InvariantViolation``.
"""

import logging
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

import mpmath

from app.models.schemas import (
    BarConfig,
    CheckResult,
    DefectCluster,
    DefectConfig,
    DefectKind,
    Dipole,
    PairOrientation,
    SlitSpec,
)
from app.services.alpha_window import alpha_window_service
from app.services.asymptotics import asymptotic_service
from app.services.closed_forms import closed_form_service
from app.services.oracle import oracle_service
from app.services.lattice import region_name
from app.utils.errors import InvariantViolation
from app.utils.exact import ExactValue, log_even_superfactorial

logger = logging.getLogger(__name__)

SUITES = ("oracle", "identities", "asymptotics")
DEFAULT_MAX_N = {"oracle": 3, "identities": 8, "asymptotics": 0}

Case = Tuple[str, Callable[[], bool]]


class Battery:
    """Collects one CheckResult per named check."""

    def __init__(self, suite: str):
        self.suite = suite
        self.results: List[CheckResult] = []

    def run(self, name: str, cases: Iterable[Case]) -> None:
        total, failures, first = 0, 0, None
        for label, predicate in cases:
            total += 1
            try:
                ok = bool(predicate())
            except Exception as e:
                ok, label = False, f"{label}: {type(e).__name__}: {e}"
            if not ok:
                failures += 1
                if first is None:
                    first = label
                    logger.warning(f"{self.suite}/{name}: counterexample {label}")
        self.results.append(CheckResult(
            suite=self.suite, name=name, cases=total, failures=failures, counterexample=first,
        ))
        logger.info(f"{self.suite}/{name}: {total - failures}/{total} passed")


# ---------------------------------------------------------------------------
# Instance families
# ---------------------------------------------------------------------------

def dipole_families(n: int) -> Iterator[List[Dipole]]:
    """Every non-empty set of disjoint dipoles inside AD_{2n}."""
    width = 2 * n

    def extend(start: int, chosen: List[Dipole]) -> Iterator[List[Dipole]]:
        if chosen:
            yield list(chosen)
        for x in range(start, width):
            for hole, sep in ((x, x + 1), (x + 1, x)):
                chosen.append(Dipole.from_positions(hole, sep))
                yield from extend(x + 2, chosen)
                chosen.pop()

    yield from extend(1, [])


def family_config(n: int, ds: List[Dipole]) -> DefectConfig:
    return DefectConfig(n=n, holes=sorted(d.hole for d in ds), seps=sorted(d.sep for d in ds))


def monomer_configs(n: int, max_k: int = 3) -> Iterator[DefectConfig]:
    for k in range(1, max_k + 1):
        for holes in combinations(range(1, 2 * n + k + 1), k):
            yield DefectConfig(n=n, holes=list(holes))


def bar_configs(n: int, max_param: int) -> Iterator[BarConfig]:
    for k in range(0, min(n, max_param) + 1):
        for l in range(0, min(n - k, max_param) + 1):  # noqa: E741
            for p in range(max_param + 1):
                for q in range(max_param + 1):
                    yield BarConfig(n=n, k=k, l=l, p=p, q=q)


def s_lists(n: int, max_k: int = 3) -> Iterator[Tuple[int, ...]]:
    for k in range(1, max_k + 1):
        yield from combinations_with_replacement(range(n + 1), k)


def _alpha_clusters() -> List[DefectCluster]:
    h, s = DefectKind.HOLE, DefectKind.SEPARATION
    return [
        DefectCluster(offsets=[(0, h)]),
        DefectCluster(offsets=[(0, s), (3, s)]),
        DefectCluster(offsets=[(0, h), (1, s), (4, h)]),
        DefectCluster(offsets=[(0, s), (2, h), (5, h), (6, s)]),
    ]


def _within(result_fn: Callable[[], float], bound: float) -> Callable[[], bool]:
    return lambda: abs(result_fn()) < bound


class VerificationService:
    """Runs the invariant batteries and turns failures into errors."""

    def run_suite(self, suite: str, max_n: Optional[int] = None) -> List[CheckResult]:
        """Run one battery and return its rows in a fixed order."""
        if suite not in SUITES:
            raise ValueError(f"unknown suite '{suite}', expected one of {', '.join(SUITES)}")
        max_n = DEFAULT_MAX_N[suite] if max_n is None else max_n
        if suite != "asymptotics" and max_n < 1:
            raise ValueError(f"max_n must be positive, got {max_n}")
        logger.info(f"Running {suite} battery (max_n={max_n})")
        battery = Battery(suite)
        if suite == "oracle":
            self._oracle_suite(battery, max_n)
        elif suite == "identities":
            self._identities_suite(battery, max_n)
        else:
            self._asymptotics_suite(battery)
        return battery.results

    def ensure_passed(self, results: List[CheckResult]) -> None:
        failed = [r for r in results if r.failures]
        if failed:
            listing = "; ".join(f"{r.name}: {r.counterexample}" for r in failed)
            raise InvariantViolation(f"{len(failed)} check(s) failed: {listing}")

    def _oracle_suite(self, battery: Battery, max_n: int) -> None:
        ns = range(1, max_n + 1)

        battery.run("diamond count 2^{n(2n+1)}", (
            (f"AD_{2 * n}", lambda n=n: oracle_service.count_config(DefectConfig(n=n)).value == closed_form_service.diamond_count(n))
            for n in ns
        ))

        def dipole_cases() -> Iterator[Case]:
            for n in ns:
                for ds in dipole_families(n):
                    cfg = family_config(n, ds)
                    yield region_name(cfg), lambda cfg=cfg: closed_form_service.count_exact(cfg).value == oracle_service.count_config(cfg).value
        battery.run("dipole families", dipole_cases())

        def factorization_cases() -> Iterator[Case]:
            for n in ns:
                for ds in dipole_families(n):
                    odd = [d for d in ds if d.is_odd]
                    even = [d for d in ds if not d.is_odd]
                    if not odd or not even:
                        continue
                    cfg = family_config(n, ds)
                    yield region_name(cfg), lambda n=n, ds=ds, odd=odd, even=even: (
                        oracle_service.corr_finite(family_config(n, ds))
                        == oracle_service.corr_finite(family_config(n, odd)) * oracle_service.corr_finite(family_config(n, even))
                    )
        battery.run("odd/even flavor factorization", factorization_cases())

        battery.run("monomer-only configurations", (
            (region_name(cfg), lambda cfg=cfg: closed_form_service.count_exact(cfg).value == oracle_service.count_config(cfg).value)
            for n in ns for cfg in monomer_configs(n)
        ))

        def bar_cases() -> Iterator[Case]:
            for n in ns:
                for bar in bar_configs(n, 2):
                    def case(bar=bar) -> bool:
                        expected = oracle_service.count_config(bar.to_defect_config()).value
                        return (closed_form_service.bars_count(bar, "gamma").value == expected
                                and closed_form_service.bars_count(bar, "hyperfactorial").value == expected)
                    yield f"n={bar.n} k={bar.k} l={bar.l} p={bar.p} q={bar.q}", case
        battery.run("bars of monomers", bar_cases())

    def _identities_suite(self, battery: Battery, max_n: int) -> None:
        ns = range(1, max_n + 1)
        small_ns = range(1, min(max_n, 4) + 1)

        def factor_cases() -> Iterator[Case]:
            for n in small_ns:
                for ds in dipole_families(n):
                    odd = [d for d in ds if d.is_odd]
                    even = [d for d in ds if not d.is_odd]
                    yield region_name(family_config(n, ds)), lambda n=n, ds=ds, odd=odd, even=even: (
                        closed_form_service.dipole_family_corr(n, ds)
                        == closed_form_service.dipole_family_corr(n, odd) * closed_form_service.dipole_family_corr(n, even)
                    )
        battery.run("odd/even flavor factorization", factor_cases())

        def zero_cases() -> Iterator[Case]:
            for n in small_ns:
                for d1, d2 in combinations([d for ds in dipole_families(n) if len(ds) == 1 for d in ds], 2):
                    if d1.is_odd == d2.is_odd or {d1.hole, d1.sep} & {d2.hole, d2.sep}:
                        continue
                    yield f"n={n} {d1.kind.value}({d1.s}) {d2.kind.value}({d2.s})", \
                        lambda n=n, d1=d1, d2=d2: closed_form_service.dipole_gap(n, d1, d2).is_zero()
            for a in range(1, 4):
                for b in range(1, 4):
                    for d in range(0, 4):
                        for orientation in PairOrientation:
                            yield f"slits a={a} b={b} d={d} {orientation.value}", \
                                lambda a=a, b=b, d=d, o=orientation: asymptotic_service.finite_slit_difference(
                                    a, b, d, o, mixed=True).is_zero()
        battery.run("exact zero interaction across flavors", zero_cases())

        def pair_factor_cases() -> Iterator[Case]:
            for x in range(2, 13, 2):
                d1, d2 = Dipole.from_positions(1, 2), Dipole.from_positions(1 + x, 2 + x)

                def case(x=x, d1=d1, d2=d2) -> bool:
                    ratio = (closed_form_service.center_dipole_corr([d1, d2])
                             / (closed_form_service.center_dipole_corr([d1]) * closed_form_service.center_dipole_corr([d2])))
                    return ratio == closed_form_service.e_squared([1, 1 + x], [2, 2 + x]) == closed_form_service.center_pair_factor(x)
                yield f"x={x}", case
        battery.run("center pair factor equals e_squared", pair_factor_cases())

        battery.run("slit ratio 4/5 by two routes", [(
            "a=1 b=1 d=1",
            lambda: closed_form_service.slit_ratio(1, 1, 1) == ExactValue(Fraction(4, 5))
            == closed_form_service.multi_slit_corr(SlitSpec(lengths=[1, 1], gaps=[2])) / closed_form_service.slit_corr(2),
        )])

        battery.run("normalized slit symmetry in b and d", (
            (f"a={a} b={b} d={d}", lambda a=a, b=b, d=d: closed_form_service.slit_ratio(a, b, d) == closed_form_service.slit_ratio(a, d, b))
            for a in range(1, 7) for b in range(1, 7) for d in range(1, 7) if b < d
        ))

        def slit_route_cases() -> Iterator[Case]:
            for a in range(1, 4):
                for b in range(1, 4):
                    for d in range(0, 4):
                        yield f"same a={a} b={b} d={d}", lambda a=a, b=b, d=d: (
                            closed_form_service.slit_ratio(a, b, d)
                            == closed_form_service.slit_pair_corr(a, b, 2 * d) / closed_form_service.slit_corr(a + b)
                        )
                        yield f"opposite a={a} b={b} d={d}", lambda a=a, b=b, d=d: (
                            closed_form_service.slit_ratio(a, b, d, PairOrientation.OPPOSITE)
                            == closed_form_service.slit_pair_corr(a, b, 2 * d + 1, PairOrientation.OPPOSITE)
                            / closed_form_service.slit_pair_corr(a, b, 2 * d)
                        )
        battery.run("slit ratios against dipole products", slit_route_cases())

        battery.run("monomer rows product equals P/Q form", (
            (f"n={n} s={list(s)}", lambda n=n, s=s: (
                closed_form_service.monomer_even_count_ratio(n, s, "rows") == closed_form_service.monomer_even_count_ratio(n, s, "pq")))
            for n in ns for s in s_lists(n)
        ))

        battery.run("Q squared through hyperfactorials", (
            (f"s={s} n={n}", lambda s=s, n=n: (
                closed_form_service.q_squared_hyperfactorial(s, n) == closed_form_service.q_product(s, Fraction(2 * n + 3, 2)) ** 2))
            for n in ns for s in range(0, n + 1)
        ))

        battery.run("bars Gamma product equals hyperfactorial form", (
            (f"n={bar.n} k={bar.k} l={bar.l} p={bar.p} q={bar.q}", lambda bar=bar: (
                closed_form_service.bars_ratio(bar, "gamma") == closed_form_service.bars_ratio(bar, "hyperfactorial")))
            for n in ns for bar in bar_configs(n, 3)
        ))

        alphas = [Fraction(0), Fraction(1, 3), Fraction(-1, 2)]
        battery.run("alpha-window unit translation", (
            (f"alpha={alpha} cluster={c.offsets}", lambda alpha=alpha, c=c: (
                alpha_window_service.alpha_corr_ratio(alpha, c, c.translated(1)) == alpha_window_service.translation_factor(alpha, c.charge)))
            for alpha in alphas for c in _alpha_clusters()
        ))

        def path_cases() -> Iterator[Case]:
            for alpha in alphas:
                for c in _alpha_clusters():
                    offsets = c.offsets
                    spread = DefectCluster(offsets=[(o + 2 * i, kind) for i, (o, kind) in enumerate(offsets)])
                    middle = DefectCluster(offsets=[(o + i, kind) for i, (o, kind) in enumerate(offsets)])
                    yield f"alpha={alpha} cluster={offsets}", lambda alpha=alpha, c=c, m=middle, t=spread: (
                        alpha_window_service.alpha_corr_ratio(alpha, c, t)
                        == alpha_window_service.alpha_corr_ratio(alpha, c, m) * alpha_window_service.alpha_corr_ratio(alpha, m, t)
                    )
        battery.run("alpha-window path independence", path_cases())

    def _asymptotics_suite(self, battery: Battery) -> None:
        def p_decay() -> bool:
            small, large = asymptotic_service.p_n_asym(100).rel_error, asymptotic_service.p_n_asym(1000).rel_error
            return abs(large) < 0.01 and abs(large) < abs(small)
        battery.run("P_n ~ 2^{1/12} e^{1/4} A^{-3} n^{-1/4}", [("n=100,1000", p_decay)])

        battery.run("Casimir limit of two giant slits", [
            (f"alpha=beta=delta=1 n=1000 {o.value}",
             _within(lambda o=o: asymptotic_service.casimir_ratio(1, 1, 1, n=1000, orientation=o).rel_error, 0.01))
            for o in PairOrientation
        ])

        battery.run("boundary move ratio sqrt((2-alpha)/alpha)", [
            (f"alpha={alpha} n=500", _within(lambda alpha=alpha: asymptotic_service.boundary_move_ratio(alpha, 500).rel_error, 0.01))
            for alpha in (Fraction(1, 2), Fraction(1), Fraction(3, 2))
        ])

        battery.run("slit limit at large gap", [
            ("d=400 same", _within(lambda: asymptotic_service.slit_limit(400).rel_error, 0.01)),
            ("d=400 opposite", _within(lambda: asymptotic_service.slit_limit(400, PairOrientation.OPPOSITE).rel_error, 0.01)),
        ])

        battery.run("finite slit tail ab/(4d^2)", [
            ("a=2 b=1 d=200", _within(lambda: asymptotic_service.finite_slit_tail(2, 1, 200).rel_error, 0.05)),
        ])

        def free_energy_case() -> bool:
            n = 40
            per_site = closed_form_service.bars_log_count(BarConfig(n=n, k=10, l=10, p=10, q=10)) / (4 * n * (2 * n + 1))
            return abs(float(per_site) - asymptotic_service.free_energy(0.25, 0.25, 0.25, 0.25)) < 1e-2
        battery.run("bar free energy per site", [("n=40 k=l=p=q=10", free_energy_case)])

        def even_superfactorial_forms() -> Iterator[Case]:
            for n in range(1, 21):
                yield f"n={n}", lambda n=n: abs(log_even_superfactorial(n) - asymptotic_service.log_even_superfactorial_barnes(n)) < mpmath.mpf(10) ** -20
        battery.run("E(n) through Barnes G", even_superfactorial_forms())

        battery.run("Glaisher constant from H(n)", [
            ("n=1000", lambda: abs(asymptotic_service.glaisher_from_hyperfactorial(1000) / asymptotic_service.glaisher() - 1) < 1e-4),
        ])


verification_service = VerificationService()
