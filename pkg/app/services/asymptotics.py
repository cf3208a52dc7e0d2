"""Asymptotic laws for axis defect correlations and their convergence sweeps.

Predictions are formed in log space with mpmath; exact counterparts come from
the closed forms (also in log space once n is large). Each law returns an
``AsymResult`` carrying both, so callers can check the relative error.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath

from app.config import get_settings
from app.models.schemas import (
    AsymResult,
    BarConfig,
    ConvergenceRecord,
    DefectCluster,
    DefectConfig,
    PairOrientation,
)
from app.services.closed_forms import closed_form_service
from app.utils.exact import (
    ExactValue,
    log_even_superfactorial,
    log_gamma_product,
    log_hyperfactorial,
    log_value,
    to_mpf,
)

logger = logging.getLogger(__name__)
settings = get_settings()

_FLOAT_LOG_MAX = 700

Evaluator = Callable[[int], mpmath.mpf]


def _result(
    law: str,
    log_pred,
    leading_constant,
    exponent: str = "0",
    exact_log=None,
    details: Optional[Dict[str, float]] = None,
) -> AsymResult:
    log_pred = to_mpf(log_pred)
    value = float(mpmath.exp(log_pred)) if log_pred < _FLOAT_LOG_MAX else float("inf")
    rel_error = None
    if exact_log is not None:
        rel_error = float(mpmath.expm1(to_mpf(exact_log) - log_pred))
        exact_log = float(exact_log)
    return AsymResult(
        law=law,
        value=value,
        log_value=float(log_pred),
        leading_constant=float(leading_constant),
        exponent=exponent,
        exact_log=exact_log,
        rel_error=rel_error,
        details=details or {},
    )


def _abs(v: ExactValue) -> ExactValue:
    return -v if v.sign() < 0 else v


def _boundary_log(x: mpmath.mpf, left: int, right: int) -> mpmath.mpf:
    return (left + mpmath.mpf(1) / 2) * mpmath.log(x / 2) / 2 + (right + mpmath.mpf(1) / 2) * mpmath.log(1 - x / 2) / 2


def _x2logx(x) -> mpmath.mpf:
    x = to_mpf(x)
    return mpmath.mpf(0) if x == 0 else x * x * mpmath.log(x)


class AsymptoticService:
    """Asymptotic laws, each paired with its exact counterpart when one is computable."""

    # -- constants --------------------------------------------------------

    def glaisher(self) -> mpmath.mpf:
        """The Glaisher-Kinkelin constant A at the working precision."""
        return +mpmath.glaisher

    def glaisher_from_hyperfactorial(self, n: int) -> mpmath.mpf:
        """A from H(n) through the defining limit, evaluated at a finite n."""
        n_mp = mpmath.mpf(n)
        log_h = log_hyperfactorial(n)
        rest = (n_mp ** 2 / 2 - mpmath.mpf(1) / 12) * mpmath.log(n_mp) + n_mp / 2 * mpmath.log(2 * mpmath.pi) - 3 * n_mp ** 2 / 4
        return mpmath.exp(mpmath.mpf(1) / 12 - (log_h - rest))

    def p_constant(self) -> mpmath.mpf:
        """2^{1/12} e^{1/4} / A^3."""
        return mpmath.power(2, mpmath.mpf(1) / 12) * mpmath.exp(mpmath.mpf(1) / 4) / self.glaisher() ** 3

    def q_constant(self) -> mpmath.mpf:
        return mpmath.exp(mpmath.mpf(1) / 4) * mpmath.power(2, -mpmath.mpf(5) / 12) / self.glaisher() ** 3

    def bars_constant(self) -> mpmath.mpf:
        return mpmath.exp(mpmath.mpf(1) / 3) / self.glaisher() ** 4

    def constants(self) -> Dict[str, float]:
        return {
            "A": float(self.glaisher()),
            "2^(1/12) e^(1/4) A^-3": float(self.p_constant()),
            "e^(1/4) 2^(-5/12) A^-3": float(self.q_constant()),
            "e^(1/3) A^-4": float(self.bars_constant()),
        }

    def gamma_ratio_asym(self, x, a, b) -> float:
        """Gamma(x+a)/Gamma(x+b) ~ x^{a-b} (1 + (a-b)(a+b-1)/(2x)), error O(x^-2)."""
        x, a, b = to_mpf(x), to_mpf(a), to_mpf(b)
        return float(x ** (a - b) * (1 + (a - b) * (a + b - 1) / (2 * x)))

    # -- products P, Q, H, E ------------------------------------------------

    def p_n_asym(self, n: int) -> AsymResult:
        """P_n ~ 2^{1/12} e^{1/4} A^{-3} n^{-1/4}."""
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        c = self.p_constant()
        log_pred = mpmath.log(c) - mpmath.log(n) / 4
        return _result("p-asym", log_pred, c, "-1/4", exact_log=self._log_p(n))

    def p_a_asym(self, a, s: int) -> AsymResult:
        """P_a(s) for a a non-negative multiple of 1/2, with its finite Gamma prefactor."""
        a = Fraction(a)
        if a < 0 or (2 * a).denominator != 1:
            raise ValueError(f"a must be a non-negative multiple of 1/2, got {a}")
        if s < 1:
            raise ValueError(f"s must be positive, got {s}")
        half = mpmath.mpf(1) / 2
        if a.denominator == 1:
            c = self.p_constant()
            for i in range(1, int(a) + 1):
                c *= mpmath.gamma(i - half) * mpmath.gamma(i + half) / mpmath.gamma(i) ** 2
        else:
            c = 1 / (self.p_constant() * mpmath.sqrt(mpmath.pi))
            for i in range(1, int(a - Fraction(1, 2)) + 1):
                c *= mpmath.gamma(i) * mpmath.gamma(i + 1) / mpmath.gamma(i + half) ** 2
        log_pred = mpmath.log(c) - mpmath.log(s) / 4
        return _result("p-a-asym", log_pred, c, "-1/4", exact_log=closed_form_service.log_p_product(a, s))

    def q_squared_asym(self, s: int, n: int, k: int = 3) -> AsymResult:
        """[Q(s, n+k/2)]^2 with s = alpha n, 0 < alpha < 1."""
        if not 0 < s < n:
            raise ValueError(f"need 0 < s < n, got s={s}, n={n}")
        alpha = mpmath.mpf(s) / n
        c = self.q_constant()
        log_pred = (
            mpmath.log(c) - mpmath.log(n) / 4
            - (alpha * n + mpmath.mpf(1) / 4) * mpmath.log(alpha)
            - ((1 - alpha) * n + mpmath.mpf(1) / 4 + mpmath.mpf(k - 3) / 2) * mpmath.log(1 - alpha)
        )
        exact = 2 * closed_form_service.log_q_product(s, Fraction(2 * n + k, 2))
        return _result("q-squared", log_pred, c, "-1/4", exact_log=exact, details={"alpha": float(alpha)})

    def hyperfactorial_asym(self, n: int) -> AsymResult:
        """H(n) ~ e^{1/12} A^{-1} n^{n^2/2 - 1/12} (2 pi)^{n/2} e^{-3n^2/4}."""
        n_mp = mpmath.mpf(n)
        c = mpmath.exp(mpmath.mpf(1) / 12) / self.glaisher()
        log_pred = (
            mpmath.log(c) + (n_mp ** 2 / 2 - mpmath.mpf(1) / 12) * mpmath.log(n_mp)
            + n_mp / 2 * mpmath.log(2 * mpmath.pi) - 3 * n_mp ** 2 / 4
        )
        return _result("hyperfactorial", log_pred, c, "n^2/2-1/12", exact_log=log_hyperfactorial(n))

    def even_superfactorial_asym(self, n: int) -> AsymResult:
        """E(n) from E^2(n) ~ pi^{n+1} 2^{2n^2+4n+17/12} n^{2n^2+3n+11/12} / (A e^{3n^2+3n-1/12})."""
        n_mp = mpmath.mpf(n)
        log_sq = (
            (n_mp + 1) * mpmath.log(mpmath.pi)
            + (2 * n_mp ** 2 + 4 * n_mp + mpmath.mpf(17) / 12) * mpmath.log(2)
            + (2 * n_mp ** 2 + 3 * n_mp + mpmath.mpf(11) / 12) * mpmath.log(n_mp)
            - mpmath.log(self.glaisher()) - (3 * n_mp ** 2 + 3 * n_mp - mpmath.mpf(1) / 12)
        )
        c = mpmath.sqrt(mpmath.pi * mpmath.power(2, mpmath.mpf(17) / 12) * mpmath.exp(mpmath.mpf(1) / 12) / self.glaisher())
        return _result("even-superfactorial", log_sq / 2, c, "n^2+3n/2+11/24", exact_log=log_even_superfactorial(n))

    def log_even_superfactorial_barnes(self, n: int) -> mpmath.mpf:
        """log E(n) through Barnes G: (2k)! = 4^k Gamma(k+1/2) Gamma(k+1) / sqrt(pi)."""
        half = mpmath.mpf(1) / 2
        return (
            n * (n + 1) * mpmath.log(2) - mpmath.mpf(n) / 2 * mpmath.log(mpmath.pi)
            + mpmath.log(mpmath.barnesg(n + 2))
            + mpmath.log(mpmath.barnesg(n + 1 + half)) - mpmath.log(mpmath.barnesg(1 + half))
        )

    # -- slits ------------------------------------------------------------

    def slit_limit(self, d: int, orientation: PairOrientation = PairOrientation.SAME) -> AsymResult:
        """Limit of two giant slits at gap 2d (same) or 2d+1 (opposite), with its large-d law."""
        orientation = PairOrientation(orientation)
        if d < 0:
            raise ValueError(f"gap must be non-negative, got {d}")
        exact = self._log_p(d)
        if orientation == PairOrientation.OPPOSITE:
            exact += mpmath.log(mpmath.pi) / 2 + mpmath.loggamma(d + 1) - mpmath.loggamma(mpmath.mpf(d) + mpmath.mpf(1) / 2)
            c = mpmath.sqrt(mpmath.pi) * mpmath.exp(mpmath.mpf(1) / 4) * mpmath.power(2, -mpmath.mpf(1) / 6) / self.glaisher() ** 3
            log_pred = mpmath.log(c) + mpmath.log(2 * d + 1) / 4
            return _result("slit-limit-opposite", log_pred, c, "1/4", exact_log=exact)
        if d == 0:
            return _result("slit-limit", 0, 1, "0", exact_log=exact)
        c = mpmath.cbrt(2) * mpmath.exp(mpmath.mpf(1) / 4) / self.glaisher() ** 3
        log_pred = mpmath.log(c) - mpmath.log(2 * d) / 4
        return _result("slit-limit", log_pred, c, "-1/4", exact_log=exact)

    def multi_slit_limit(self, gaps: Sequence[int]) -> AsymResult:
        """Limit of a chain of giant slits at gaps 2d_1, ..., 2d_{k-1}: one slit-limit factor per gap."""
        if not gaps or any(d < 1 for d in gaps):
            raise ValueError("multi-slit limit needs at least one positive gap")
        c = (mpmath.cbrt(2) * mpmath.exp(mpmath.mpf(1) / 4) / self.glaisher() ** 3) ** len(gaps)
        log_pred = mpmath.log(c) - mpmath.fsum(mpmath.log(2 * d) for d in gaps) / 4
        exact = mpmath.fsum(self._log_p(d) for d in gaps)
        return _result("multi-slit-limit", log_pred, c, "-1/4", exact_log=exact, details={"slits": len(gaps) + 1})

    def finite_slit_difference(self, a: int, b: int, d: int, orientation: PairOrientation = PairOrientation.SAME,
                               mixed: bool = False) -> ExactValue:
        """omega(slit a, slit b; gap) - omega(slit a) omega(slit b).

        Same orientation uses gap 2d and opposite uses 2d+1. ``mixed`` flips the gap
        parity, which puts the slits in different flavors and gives exactly zero.
        """
        orientation = PairOrientation(orientation)
        gap = 2 * d + (1 if (orientation == PairOrientation.OPPOSITE) != mixed else 0)
        joint = closed_form_service.slit_pair_corr(a, b, gap, orientation)
        return joint - closed_form_service.slit_corr(a) * closed_form_service.slit_corr(b)

    def finite_slit_tail(self, a: int, b: int, d: int,
                         orientation: PairOrientation = PairOrientation.SAME) -> AsymResult:
        """Leading term +-omega(a) omega(b) ab/(4d^2) of the finite slit interaction."""
        if min(a, b, d) < 1:
            raise ValueError("finite slit tail needs a, b, d >= 1")
        orientation = PairOrientation(orientation)
        sign = 1 if orientation == PairOrientation.SAME else -1
        singles = log_value(closed_form_service.slit_corr(a) * closed_form_service.slit_corr(b))
        log_pred = singles + mpmath.log(mpmath.mpf(a * b) / (4 * d * d))
        exact = self.finite_slit_difference(a, b, d, orientation)
        if exact.sign() != sign:
            raise ValueError(f"exact difference {exact} has the wrong sign for {orientation.value} slits")
        return _result(
            f"finite-slit-{orientation.value}", log_pred, mpmath.exp(singles) * a * b / 4, "-2",
            exact_log=log_value(_abs(exact)), details={"sign": float(sign)},
        )

    def casimir_ratio(self, alpha, beta, delta, n: Optional[int] = None,
                      orientation: PairOrientation = PairOrientation.SAME,
                      normalization: str = "single") -> AsymResult:
        """Two giant slits of lengths alpha n, beta n at gap 2 delta n (2 delta n + 1 when opposite).

        ``normalization="single"`` divides by omega(a) omega(b) and has an n-free limit;
        ``"merged"`` divides by omega(a+b) and decays like n^{-1/4}.
        """
        orientation = PairOrientation(orientation)
        if min(alpha, beta, delta) <= 0:
            raise ValueError("alpha, beta and delta must be positive")
        if normalization not in ("single", "merged"):
            raise ValueError(f"unknown normalization '{normalization}'")
        if normalization == "merged" and orientation == PairOrientation.OPPOSITE:
            raise ValueError("merged normalization is defined for same-orientation slits")
        al, be, de = to_mpf(alpha), to_mpf(beta), to_mpf(delta)
        bracket = (al + de) * (be + de) / (de * (al + be + de))
        sign = 1 if orientation == PairOrientation.SAME else -1
        if normalization == "single":
            c = mpmath.power(bracket, mpmath.mpf(sign) / 4)
            log_pred, exponent = mpmath.log(c), "0"
        else:
            c = self.p_constant() * mpmath.power(bracket * (al + be) / (al * be), mpmath.mpf(1) / 4)
            if n is None:
                raise ValueError("merged normalization needs n")
            log_pred, exponent = mpmath.log(c) - mpmath.log(n) / 4, "-1/4"

        exact = None
        if n is not None:
            a, b, d = (int(round(float(x) * n)) for x in (alpha, beta, delta))
            if min(a, b, d) < 1:
                raise ValueError(f"n={n} is too small for the given fractions")
            exact = self._log_p(d) + self._log_p(a + b + d) - self._log_p(a + d) - self._log_p(b + d)
            if normalization == "merged":
                exact += self._log_p(a) + self._log_p(b) - self._log_p(a + b)
            if orientation == PairOrientation.OPPOSITE:
                exact += log_gamma_product(closed_form_service.slit_ratio_gamma(a, b, d, orientation))
        return _result(f"casimir-{orientation.value}-{normalization}", log_pred, c, exponent, exact_log=exact)

    def giant_slit_dipole(self, a: int, b: int, d: int) -> AsymResult:
        """Giant slit a against a short slit b at gap 2d: ratio ~ 1 + (b/4) a/(d(a+d))."""
        if min(a, b, d) < 1:
            raise ValueError("giant slit needs a, b, d >= 1")
        excess = mpmath.mpf(b) / 4 * a / (d * (a + d))
        exact = log_gamma_product(closed_form_service.giant_slit_gamma(a, b, d))
        return _result(
            "giant-slit", mpmath.log1p(excess), 1, "0", exact_log=exact,
            details={"excess_predicted": float(excess), "excess_exact": float(mpmath.expm1(exact))},
        )

    def giant_slit_regime(self, delta, eps, n: int) -> AsymResult:
        """Leading term of ratio - 1 for a = n, b = 1 and d = delta n^eps.

        The three regimes are 1/(4 delta n^eps) below eps = 1, 1/(4 delta (1+delta) n)
        at eps = 1 and 1/(4 delta^2 n^{2 eps - 1}) above.
        """
        if delta <= 0 or eps <= 0:
            raise ValueError("delta and eps must be positive")
        de, ep, n_mp = to_mpf(delta), to_mpf(eps), mpmath.mpf(n)
        if eps < 1:
            c, power = 1 / (4 * de), -ep
        elif eps == 1:
            c, power = 1 / (4 * de * (1 + de)), mpmath.mpf(-1)
        else:
            c, power = 1 / (4 * de ** 2), 1 - 2 * ep
        log_pred = mpmath.log(c) + power * mpmath.log(n_mp)
        d = int(round(float(de * n_mp ** ep)))
        exact_excess = mpmath.expm1(log_gamma_product(closed_form_service.giant_slit_gamma(n, 1, max(d, 1))))
        return _result(
            "giant-slit-regime", log_pred, c, mpmath.nstr(power, 6), exact_log=mpmath.log(exact_excess),
            details={"d": float(d)},
        )

    # -- boundary effects ---------------------------------------------------

    def boundary_shift_limit(self, alpha, charge: int) -> AsymResult:
        """d -> infinity limit of omega(O1, d+1+O2)/omega(O1, d+O2): ((1-alpha)/(1+alpha))^{q/2}."""
        alpha = Fraction(alpha)
        if not -1 < alpha < 1:
            raise ValueError(f"alpha {alpha} outside (-1, 1)")
        base = to_mpf(1 - alpha) / to_mpf(1 + alpha)
        log_pred = mpmath.mpf(charge) / 2 * mpmath.log(base)
        return _result("boundary-shift", log_pred, 1, f"{charge}/2")

    def neutral_shift_limit(self, o1: DefectCluster, o2: DefectCluster) -> ExactValue:
        """omega(O1) omega(O2) / omega(O1, O2) at the center, for neutral dipole clusters."""
        joint = DefectCluster(offsets=sorted(o1.offsets + o2.offsets))
        parts = [closed_form_service.cluster_dipoles(c) for c in (o1, o2, joint)]
        if any(p is None for p in parts):
            raise ValueError("neutral shift limit needs neutral clusters made of adjacent dipoles")
        one, two, both = (closed_form_service.center_dipole_corr(p) for p in parts)
        return one * two / both

    def boundary_move_ratio(self, alpha, n: int) -> AsymResult:
        """Single hole at a = alpha n in AR_{2n,2n+1}: M(a)/M(a-1) -> sqrt((2-alpha)/alpha)."""
        a = int(round(float(alpha) * n))
        if not 2 <= a <= 2 * n + 1:
            raise ValueError(f"hole position {a} cannot move left inside AR_{{{2 * n},{2 * n + 1}}}")
        al = mpmath.mpf(a) / n
        ratio = closed_form_service.move_hole_ratio(DefectConfig(n=n, holes=[a]), 0)
        log_pred = (mpmath.log(2 - al) - mpmath.log(al)) / 2
        return _result("boundary", log_pred, mpmath.exp(log_pred), "0", exact_log=log_value(ratio),
                       details={"position": float(a)})

    def defect_field_asym(self, hole_positions: Sequence[int], sep_positions: Sequence[int], n: int) -> AsymResult:
        """Count ratio of AR_{2n,2n+k-l} with holes and separations at fixed fractions of n.

        Positions are integer labels; their fractions alpha = position/n lie in (0, 2).
        The exact value is attached when the configuration is monomer-only with holes
        at labels 2s_i + i.
        """
        holes, seps = sorted(hole_positions), sorted(sep_positions)
        if len(set(holes) | set(seps)) != len(holes) + len(seps):
            raise ValueError("defect positions must be distinct")
        k, l = len(holes), len(seps)  # noqa: E741
        width = 2 * n + k - l
        for p in holes + seps:
            if not 1 <= p < 2 * n:
                raise ValueError(f"position {p} outside [1, {2 * n - 1}]")
        alphas = [mpmath.mpf(p) / n for p in holes]
        betas = [mpmath.mpf(p) / n for p in seps]

        c = self.q_constant()
        terms = [(k + l) * (mpmath.log(c) - mpmath.log(n) / 4)]
        for p, b in zip(seps, betas):
            terms.append(_boundary_log(b, p - 1, width - p))
        for p, a in zip(holes, alphas):
            terms.append(-_boundary_log(a, p - 1, width - p))
        for group in (alphas, betas):
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    terms.append(mpmath.log(abs(group[j] - group[i]) / 2) / 2)
        for a in alphas:
            for b in betas:
                terms.append(-mpmath.log(abs(a - b) / 2) / 2)
        log_pred = mpmath.fsum(terms)

        exact = None
        s_list = [(p - i) // 2 for i, p in enumerate(holes, start=1)]
        if not seps and all(2 * s + i == p for i, (s, p) in enumerate(zip(s_list, holes), start=1)):
            exact = closed_form_service.monomer_even_log_ratio(n, s_list)
        return _result("defect-field", log_pred, c ** (k + l), f"-{k + l}/4", exact_log=exact)

    def simultaneous_approximation(self, values: Sequence, q_min: int = 1,
                                   q_cap: Optional[int] = None) -> Tuple[int, List[int]]:
        """Smallest q >= q_min with |x_i - p_i/q| < q^{-1-1/k} for all k values."""
        q_cap = q_cap or settings.diophantine_q_cap
        xs = [to_mpf(x) for x in values]
        if not xs:
            raise ValueError("need at least one value to approximate")
        power = 1 + mpmath.mpf(1) / len(xs)
        for q in range(max(q_min, 1), q_cap + 1):
            bound = mpmath.power(q, -power)
            numerators = [int(mpmath.nint(x * q)) for x in xs]
            if all(abs(x - mpmath.mpf(p) / q) < bound for x, p in zip(xs, numerators)):
                return q, numerators
        raise ValueError(f"no denominator in [{q_min}, {q_cap}] approximates {[float(x) for x in xs]}")

    # -- bars of charge -----------------------------------------------------

    def interaction_terms(self, points: Sequence[float]) -> List[Tuple[float, int]]:
        """(|i-j|, sign) for every pair of the sorted point set; the sign alternates with
        the number of points strictly between the pair."""
        pts = sorted(points)
        out = []
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                out.append((pts[j] - pts[i], 1 if (j - i - 1) % 2 == 0 else -1))
        return out

    def bar_points(self, alpha, beta, gamma, delta) -> List[float]:
        return [0, alpha, alpha + gamma, alpha + beta + gamma, alpha + beta + gamma + delta, 1 + gamma + delta]

    def free_energy(self, alpha, beta, gamma, delta) -> float:
        """Free energy per site: (1/4) ln 2 + (1/8) sum eps |i-j|^2 ln|i-j|."""
        if min(alpha, beta, gamma, delta) < 0 or alpha + beta >= 1:
            raise ValueError("need non-negative fractions with alpha + beta < 1")
        pairs = self.interaction_terms(self.bar_points(alpha, beta, gamma, delta))
        total = mpmath.fsum(eps * _x2logx(x) for x, eps in pairs)
        return float(mpmath.log(2) / 4 + total / 8)

    def bars_asym(self, alpha, beta, gamma, delta, n: int) -> AsymResult:
        """Count ratio of two macroscopic bars: e^{1/3} A^{-4} n^{-1/3} prod |i-j|^{eps(|i-j|^2 n^2 - 1/6)}."""
        if min(alpha, beta, gamma, delta) <= 0 or alpha + beta >= 1:
            raise ValueError("need positive fractions with alpha + beta < 1")
        c = self.bars_constant()
        terms = [mpmath.log(c) - mpmath.log(n) / 3]
        points = self.bar_points(*(to_mpf(v) for v in (alpha, beta, gamma, delta)))
        for x, eps in self.interaction_terms(points):
            terms.append(eps * (x * x * n * n - mpmath.mpf(1) / 6) * mpmath.log(x))
        log_pred = mpmath.fsum(terms)
        k, l, p, q = (int(round(float(v) * n)) for v in (alpha, beta, gamma, delta))  # noqa: E741
        exact = closed_form_service.bars_log_ratio(BarConfig(n=n, k=k, l=l, p=p, q=q))
        return _result("bars", log_pred, c, "-1/3", exact_log=exact)

    # -- sweeps -----------------------------------------------------------

    def convergence_probe(self, law: str, exact: Evaluator, predicted: Evaluator,
                          grid: Sequence[int]) -> ConvergenceRecord:
        """Tabulate exact against predicted log values along a grid.

        A grid point whose evaluation fails keeps its row with NaN values, and
        ``errors`` holds the message for that row.
        """
        nan = float("nan")
        exact_logs, predicted_logs, rel_errors, row_errors = [], [], [], []
        for i, x in enumerate(grid):
            try:
                e, p = to_mpf(exact(x)), to_mpf(predicted(x))
            except Exception as err:
                logger.warning(f"{law}: evaluation failed at grid index {i} (n={x}): {err}")
                exact_logs.append(nan)
                predicted_logs.append(nan)
                rel_errors.append(nan)
                row_errors.append(f"grid index {i} (n={x}): {err}")
                continue
            exact_logs.append(float(e))
            predicted_logs.append(float(p))
            rel_errors.append(float(mpmath.expm1(e - p)))
            row_errors.append(None)

        evaluated = [r for r, err in zip(rel_errors, row_errors) if err is None]
        monotone = all(abs(b) <= abs(a) for a, b in zip(evaluated, evaluated[1:]))
        if not monotone:
            logger.warning(f"{law}: relative error is not monotone along {list(grid)}")
        failed = len(grid) - len(evaluated)
        final = evaluated[-1] if evaluated else nan
        logger.info(f"{law}: {len(grid)} points, {failed} failed, final rel_error {final:.3e}")
        return ConvergenceRecord(
            law=law, n_grid=list(grid), exact_log=exact_logs, predicted_log=predicted_logs,
            rel_error=rel_errors, errors=row_errors, monotone=monotone,
        )

    def law_evaluators(self, law: str, params: Dict[str, float]) -> Tuple[Evaluator, Evaluator]:
        """Exact and predicted log evaluators of a sweep law, keyed by the grid variable."""
        def pair(fn: Callable[[int], AsymResult]) -> Tuple[Evaluator, Evaluator]:
            fn = lru_cache(maxsize=None)(fn)
            return (lambda x: fn(x).exact_log), (lambda x: fn(x).log_value)

        opposite = PairOrientation.OPPOSITE if params.get("opposite") else PairOrientation.SAME
        if law == "p-asym":
            return pair(self.p_n_asym)
        if law == "slit-limit":
            return pair(lambda d: self.slit_limit(d, opposite))
        if law == "casimir":
            return pair(lambda n: self.casimir_ratio(params.get("alpha", 1), params.get("beta", 1),
                                                     params.get("delta", 1), n=n, orientation=opposite))
        if law == "giant-slit":
            return pair(lambda n: self.giant_slit_regime(params.get("delta", 1), params.get("eps", 1), n))
        if law == "boundary":
            return pair(lambda n: self.boundary_move_ratio(params.get("alpha", 1), n))
        if law == "defect-field":
            def field(n: int) -> AsymResult:
                s = int(round(params.get("alpha", 1) * n / 2))
                return self.defect_field_asym([2 * s + 1], [], n)
            return pair(field)
        if law == "bars":
            return pair(lambda n: self.bars_asym(params.get("alpha", 0.25), params.get("beta", 0.25),
                                                 params.get("gamma", 0.25), params.get("delta", 0.25), n))
        raise ValueError(f"unknown law '{law}'")

    def _log_p(self, x: int) -> mpmath.mpf:
        return closed_form_service.log_p_product(0, x)


asymptotic_service = AsymptoticService()
