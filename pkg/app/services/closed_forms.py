"""Exact correlation and counting formulas for defects on the axis.

Counts are tied together by elementary moves. Moving one defect a single unit
to the left changes the count by an explicit finite product. Chaining moves
from a configuration whose count is known (2^{n(2n+1)} for the Aztec diamond)
gives exact counts. Those counts are checked against the oracle in tests.
"""

import logging
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

import mpmath

from app.models.schemas import (
    BarConfig,
    DefectCluster,
    DefectConfig,
    DefectKind,
    Dipole,
    DipoleKind,
    MatchCount,
    PairOrientation,
    SlitOrientation,
    SlitSpec,
)
from app.services.lattice import region_name
from app.services.oracle import oracle_service
from app.utils.errors import InstanceTooLargeError, UnsupportedInstanceError
from app.utils.exact import (
    ExactValue,
    GammaProduct,
    eval_gamma_product,
    even_superfactorial_int,
    hyperfactorial_int,
    log_gamma_product,
    pochhammer,
    to_mpf,
)

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
ONE_OVER_PI = ExactValue(1, -2)


def _poch(a, m: int) -> Fraction:
    return pochhammer(a, m).as_fraction()


def _integral(value: Fraction, what: str) -> int:
    if value.denominator != 1:
        raise ValueError(f"{what} is not an integer: {value}")
    return value.numerator


def _check_disjoint(ds: Sequence[Dipole]) -> None:
    points = [p for d in ds for p in (d.hole, d.sep)]
    if len(set(points)) != len(points):
        raise ValueError(f"overlapping dipoles at positions {sorted(points)}")


def _p_gamma(a: Fraction, s: int) -> GammaProduct:
    num, den = [], []
    for i in range(1, s + 1):
        num += [i + a, i + a]
        den += [i + a - HALF, i + a + HALF]
    return GammaProduct(num, den)


def _q_gamma(s: int, n: Fraction) -> GammaProduct:
    num, den = [], []
    for i in range(1, s + 1):
        num += [i, n - i]
        den += [i + HALF, n - i - HALF]
    return GammaProduct(num, den)


def _check_s_list(n: int, s_list: Sequence[int]) -> None:
    if any(x > y for x, y in zip(s_list, s_list[1:])):
        raise ValueError(f"s values {list(s_list)} must be weakly increasing")
    if s_list and (s_list[0] < 0 or s_list[-1] > n):
        raise ValueError(f"s values {list(s_list)} must lie in [0, {n}]")


def _rows_ratio(n: int, s: Sequence[int]) -> Fraction:
    k = len(s)
    total = Fraction(1)
    for r in range(k, 0, -1):
        m = k - r
        for i in range(1, s[r - 1] + 1):
            t = [i] + [s[r - 1 + j] for j in range(1, m + 1)] + [n]
            factor = _poch(1, i - 1) / _poch(3 * HALF, i - 1)
            for j in range(1, m + 2):
                base, length = t[j - 1] - i, t[j] - t[j - 1]
                factor *= _poch(base + 1 + Fraction(j, 2), length) / _poch(base + Fraction(j + 1, 2), length)
            total *= factor ** 2
    return total


def _pq_gamma(n: int, s: Sequence[int]) -> GammaProduct:
    k = len(s)
    gp = GammaProduct()
    for r in range(1, k + 1):
        gp = gp * _q_gamma(s[r - 1], n + Fraction(k - r + 3, 2))
        for m in range(1, k - r + 1):
            half_m = Fraction(m, 2)
            gp = gp * _p_gamma(half_m, s[r - 1 + m]) * _p_gamma(half_m, s[r - 1 + m] - s[r - 1]).inverse()
    return gp ** 2


def _axis_nodes(config: DefectConfig) -> List[int]:
    """Free positions once, separations twice, holes never; 2n nodes in all."""
    holes, seps = set(config.holes), set(config.seps)
    nodes: List[int] = []
    for p in range(1, config.width + 1):
        if p in holes:
            continue
        nodes.append(p)
        if p in seps:
            nodes.append(p)
    return nodes


def _check_left_free(config: DefectConfig, position: int) -> None:
    if position <= 1:
        raise ValueError(f"defect at {position} cannot move left")
    if config.kind_at(position - 1) is not None:
        raise ValueError(f"move of defect at {position} is blocked by the defect at {position - 1}")


def _bars_gamma(cfg: BarConfig) -> GammaProduct:
    n, k, l, p, q = cfg.n, cfg.k, cfg.l, cfg.p, cfg.q
    num, den = [], []
    for i in range(1, k + 1):
        num += [i, n + p + q - i + 1, p + l + i, q + l + i]
        den += [p + i, n + q - i + 1, l + i, p + q + l + i]
    for i in range(1, k + l + 1):
        num += [i, n + q - i + 1]
        den += [q + i, n - i + 1]
    return GammaProduct(num, den) ** 2


def _bars_hyperfactorial(cfg: BarConfig) -> Fraction:
    n, k, l, p, q = cfg.n, cfg.k, cfg.l, cfg.p, cfg.q
    H = hyperfactorial_int
    num = (H(k) * H(l) * H(p) * H(q) * H(n - k - l) * H(k + l + p) * H(l + p + q)
           * H(n + q - k) * H(n + p + q))
    den = (H(n) * H(k + p) * H(l + p) * H(l + q) * H(n + q - k - l) * H(k + l + p + q)
           * H(n + p + q - k))
    return Fraction(num, den) ** 2


def _runs(positions: Sequence[int]) -> List[List[int]]:
    runs: List[List[int]] = []
    for p in positions:
        if runs and runs[-1][-1] == p - 1:
            runs[-1].append(p)
        else:
            runs.append([p])
    return runs


def _pair_dipoles(defects: Sequence[Tuple[int, DefectKind]]) -> Optional[List[Dipole]]:
    kinds = dict(defects)
    dipoles: List[Dipole] = []
    for run in _runs(sorted(kinds)):
        if len(run) % 2:
            return None
        for x, y in zip(run[::2], run[1::2]):
            if kinds[x] == kinds[y]:
                return None
            hole, sep = (x, y) if kinds[x] == DefectKind.HOLE else (y, x)
            dipoles.append(Dipole.from_positions(hole, sep))
    return dipoles


class ClosedFormService:
    def diamond_count(self, n: int) -> int:
        """M(AD_{2n}) = 2^{n(2n+1)}."""
        return 2 ** (n * (2 * n + 1))

    # -- dipoles ----------------------------------------------------------

    def e_squared(self, holes: Iterable[int], seps: Iterable[int]) -> ExactValue:
        """Square of the interaction factor: like distances over unlike distances."""
        holes, seps = list(holes), list(seps)
        points = holes + seps
        if len(set(points)) != len(points):
            raise ValueError(f"coincident defect positions in {sorted(points)}")
        num = 1
        for x, y in combinations(holes, 2):
            num *= abs(x - y)
        for x, y in combinations(seps, 2):
            num *= abs(x - y)
        den = 1
        for x in holes:
            for y in seps:
                den *= abs(x - y)
        return ExactValue(Fraction(num, den))

    def e_value(self, holes: Iterable[int], seps: Iterable[int]) -> ExactValue:
        return self.e_squared(holes, seps).sqrt()

    def dipole_corr(self, n: int, d: Dipole) -> ExactValue:
        """Finite-size correlation of a single dipole in AD_{2n}."""
        if max(d.hole, d.sep) > 2 * n:
            raise ValueError(f"dipole at {d.hole},{d.sep} does not fit in AD_{2 * n}")
        s = d.s
        if d.kind == DipoleKind.OX_ODD:
            value = _poch(HALF, s + 1) * _poch(HALF, n - s - 1) / (_poch(1, s) * _poch(1, n - s - 1))
        elif d.kind == DipoleKind.OX_EVEN:
            value = _poch(HALF, s) * _poch(HALF, n - s) / (_poch(1, s - 1) * _poch(1, n - s))
        else:
            value = _poch(HALF, s) * _poch(HALF, n - s) / (_poch(1, s) * _poch(1, n - s - 1))
        return ExactValue(value)

    def dipole_family_corr(self, n: int, ds: Sequence[Dipole]) -> ExactValue:
        """Correlation of a dipole family; odd and even flavors do not interact."""
        _check_disjoint(ds)
        value = ExactValue(1)
        for d in ds:
            value = value * self.dipole_corr(n, d)
        return value * self._flavor_e_squared(ds)

    def dipole_gap(self, n: int, d1: Dipole, d2: Dipole) -> ExactValue:
        """omega(D1,D2) - omega(D1) omega(D2); exactly zero for opposite flavors."""
        _check_disjoint([d1, d2])
        if d1.is_odd != d2.is_odd:
            return ExactValue.zero()
        return self.dipole_family_corr(n, [d1, d2]) - self.dipole_corr(n, d1) * self.dipole_corr(n, d2)

    def bulk_dipole_corr(self, alphas: Sequence, collections: Sequence[Sequence[Dipole]]) -> ExactValue:
        """Joint bulk correlation of dipole collections placed near axis points alpha_i in (0,2)."""
        alphas = [Fraction(a) for a in alphas]
        if len(alphas) != len(collections):
            raise ValueError("one alpha per dipole collection is required")
        for a in alphas:
            if not 0 < a < 2:
                raise ValueError(f"alpha {a} outside (0, 2)")
        if any(x >= y for x, y in zip(alphas, alphas[1:])):
            raise ValueError("alphas must be strictly increasing")
        value = ExactValue(1)
        for alpha, ds in zip(alphas, collections):
            _check_disjoint(ds)
            ratio = alpha / (2 - alpha)
            for d in ds:
                value = value * ONE_OVER_PI * ExactValue.sqrt_of(ratio if d.sign > 0 else 1 / ratio)
            value = value * self._flavor_e_squared(ds)
        return value

    def center_dipole_corr(self, ds: Sequence[Dipole]) -> ExactValue:
        """Correlation of a dipole family at the center of the diamond."""
        _check_disjoint(ds)
        return ONE_OVER_PI ** len(ds) * self._flavor_e_squared(ds)

    def center_pair_factor(self, x: int) -> ExactValue:
        return ExactValue(Fraction(x * x, (x - 1) * (x + 1)))

    def _flavor_e_squared(self, ds: Sequence[Dipole]) -> ExactValue:
        odd = [d for d in ds if d.is_odd]
        even = [d for d in ds if not d.is_odd]
        return (self.e_squared([d.hole for d in odd], [d.sep for d in odd])
                * self.e_squared([d.hole for d in even], [d.sep for d in even]))

    # -- slits ------------------------------------------------------------

    def p_product(self, a, s: int) -> ExactValue:
        """P_a(s) = prod_{i=1}^s Gamma(i+a)^2 / (Gamma(i+a-1/2) Gamma(i+a+1/2))."""
        a = Fraction(a)
        if a < 0 or (2 * a).denominator != 1:
            raise ValueError(f"P_a needs a non-negative multiple of 1/2, got {a}")
        return eval_gamma_product(_p_gamma(a, s))

    def log_p_product(self, a, s: int) -> mpmath.mpf:
        a = to_mpf(a)
        half = mpmath.mpf(1) / 2
        return mpmath.fsum(
            2 * mpmath.loggamma(i + a) - mpmath.loggamma(i + a - half) - mpmath.loggamma(i + a + half)
            for i in range(1, s + 1)
        )

    def q_product(self, s: int, n) -> ExactValue:
        """Q(s,n) = prod_{i=1}^s Gamma(i) Gamma(n-i) / (Gamma(i+1/2) Gamma(n-i-1/2))."""
        return eval_gamma_product(_q_gamma(s, Fraction(n)))

    def log_q_product(self, s: int, n) -> mpmath.mpf:
        return log_gamma_product(_q_gamma(s, Fraction(n)))

    def q_squared_hyperfactorial(self, s: int, n: int) -> ExactValue:
        """[Q(s, n+3/2)]^2 through hyperfactorials and even superfactorials."""
        H, E = hyperfactorial_int, even_superfactorial_int
        inner = Fraction(
            H(s + 1) * H(n - s + 1) * H(s) * H(n - s) * E(n),
            H(n + 1) * H(n) * E(s) * E(n - s),
        )
        return ExactValue(inner ** 2 / Fraction(2) ** (4 * s * (n - s)))

    def slit_corr(self, a: int) -> ExactValue:
        """Correlation of the fluctuating slit [ox]_a at the center."""
        if a < 0:
            raise ValueError(f"slit length must be non-negative, got {a}")
        return self.p_product(0, a) / 2 ** a

    def slit_ratio_gamma(self, a: int, b: int, d: int,
                         orientation: PairOrientation = PairOrientation.SAME) -> GammaProduct:
        if min(a, b, d) < 0:
            raise ValueError("slit lengths and gap must be non-negative")
        if PairOrientation(orientation) == PairOrientation.OPPOSITE:
            return GammaProduct(
                [a + b + d + 1, a + d + HALF, b + d + HALF, d + 1],
                [a + b + d + HALF, a + d + 1, b + d + 1, d + HALF],
            )
        num, den = [], []
        for i in range(1, a + 1):
            num += [a + b + d - i + 1] * 2 + [a - i + 1] * 2
            den += [a + b - i + 1] * 2 + [a + d - i + 1] * 2
            num += [a + d - i + HALF, a + d - i + 3 * HALF, a + b - i + HALF, a + b - i + 3 * HALF]
            den += [a + b + d - i + HALF, a + b + d - i + 3 * HALF, a - i + HALF, a - i + 3 * HALF]
        return GammaProduct(num, den)

    def slit_ratio(self, a: int, b: int, d: int, orientation: PairOrientation = PairOrientation.SAME) -> ExactValue:
        """Same: omega(a,b;2d)/omega(a+b). Opposite: omega(a,b reversed;2d+1)/omega(a,b;2d)."""
        return eval_gamma_product(self.slit_ratio_gamma(a, b, d, orientation))

    def slit_dipoles(self, spec: SlitSpec) -> List[Dipole]:
        """Dipoles making up a slit chain, with the first slit starting at label 1."""
        dipoles: List[Dipole] = []
        pos = 1
        gaps = list(spec.gaps) + [0]
        for length, orientation, gap in zip(spec.lengths, spec.orientation_list(), gaps):
            for _ in range(length):
                if orientation == SlitOrientation.OX:
                    dipoles.append(Dipole.from_positions(pos, pos + 1))
                else:
                    dipoles.append(Dipole.from_positions(pos + 1, pos))
                pos += 2
            pos += gap
        return dipoles

    def multi_slit_corr(self, spec: SlitSpec) -> ExactValue:
        return self.center_dipole_corr(self.slit_dipoles(spec))

    def slit_pair_corr(self, a: int, b: int, gap: int,
                       orientation: PairOrientation = PairOrientation.SAME) -> ExactValue:
        """Two slits with any raw gap; parity-mismatched placements factor exactly."""
        second = SlitOrientation.OX if PairOrientation(orientation) == PairOrientation.SAME else SlitOrientation.XO
        spec = SlitSpec(lengths=[a, b], gaps=[gap], orientations=[SlitOrientation.OX, second])
        return self.multi_slit_corr(spec)

    def giant_slit_gamma(self, a: int, b: int, d: int) -> GammaProduct:
        if min(a, b) < 1 or d < 0:
            raise ValueError("giant slit needs a, b >= 1 and d >= 0")
        num, den = [], []
        for i in range(1, b + 1):
            num += [d + i - HALF, d + i + HALF] + [a + d + i] * 2
            den += [d + i] * 2 + [a + d + i - HALF, a + d + i + HALF]
        return GammaProduct(num, den)

    def giant_slit_exact(self, a: int, b: int, d: int) -> ExactValue:
        """omega([ox]_a,[ox]_b;2d) / (omega([ox]_a) omega([ox]_b))."""
        return eval_gamma_product(self.giant_slit_gamma(a, b, d))

    # -- monomers at even-spaced positions ---------------------------------

    def monomer_even_positions(self, s_list: Sequence[int]) -> List[int]:
        return [2 * s + i for i, s in enumerate(s_list, start=1)]

    def monomer_even_log_ratio(self, n: int, s_list: Sequence[int]) -> mpmath.mpf:
        """log of monomer_even_count_ratio, for n too large for exact rationals."""
        _check_s_list(n, s_list)
        return log_gamma_product(_pq_gamma(n, s_list))

    def monomer_even_count_ratio(self, n: int, s_list: Sequence[int], method: str = "rows") -> ExactValue:
        """M(AR_{2n,2n+k}(2s_1+1, ..., 2s_k+k)) / 2^{n(2n+1)}.

        ``method="rows"`` multiplies the row-by-row Pochhammer factors, and
        ``method="pq"`` uses the P/Q product form. The two must agree.
        """
        _check_s_list(n, s_list)
        if method == "rows":
            return ExactValue(_rows_ratio(n, s_list))
        if method == "pq":
            return eval_gamma_product(_pq_gamma(n, s_list))
        raise ValueError(f"unknown method '{method}'")

    # -- elementary moves -------------------------------------------------

    def hole_jump_set(self, config: DefectConfig, i: int) -> List[int]:
        """Positions interacting with hole i when it steps one unit left."""
        a = config.holes[i]
        _check_left_free(config, a)
        nodes = _axis_nodes(config)
        m = nodes.index(a - 1)
        return [p for idx, p in enumerate(nodes) if idx % 2 == m % 2 and idx != m]

    def sep_jump_set(self, config: DefectConfig, i: int) -> List[int]:
        b = config.seps[i]
        _check_left_free(config, b)
        nodes = _axis_nodes(config)
        moved = nodes.index(b - 1) + 1
        return [p for idx, p in enumerate(nodes) if idx % 2 == moved % 2 and idx != moved]

    def move_hole_ratio(self, config: DefectConfig, i: int) -> ExactValue:
        """M(config) / M(config with hole i moved one unit left)."""
        a = config.holes[i]
        ratio = Fraction(1)
        for j in self.hole_jump_set(config, i):
            ratio *= Fraction(abs(a - 1 - j), abs(a - j))
        return ExactValue(ratio)

    def move_sep_ratio(self, config: DefectConfig, i: int) -> ExactValue:
        """M(config) / M(config with separation i moved one unit left)."""
        b = config.seps[i]
        ratio = Fraction(1)
        for j in self.sep_jump_set(config, i):
            ratio *= Fraction(abs(b - j), abs(b - 1 - j))
        return ExactValue(ratio)

    def shifted(self, config: DefectConfig, kind: DefectKind, i: int, step: int = -1) -> DefectConfig:
        holes, seps = list(config.holes), list(config.seps)
        target = holes if kind == DefectKind.HOLE else seps
        target[i] += step
        return DefectConfig(n=config.n, holes=holes, seps=seps)

    def hole_to_sep_config(self, config: DefectConfig) -> DefectConfig:
        """AR_{2n+2,W} with the leftmost hole turned into a separation."""
        if not config.holes:
            raise ValueError("configuration has no hole to convert")
        return DefectConfig(n=config.n + 1, holes=config.holes[1:], seps=sorted([config.holes[0]] + config.seps))

    def hole_to_sep_ratio(self, config: DefectConfig) -> ExactValue:
        """[M(C)/M(C, a1 -> a1-1)] / [M(C')/M(C', a1 -> a1-1)], C' with a1 turned into a separation."""
        if not config.holes:
            raise ValueError("configuration has no hole to convert")
        a1 = config.holes[0]
        if config.seps and config.seps[0] < a1:
            raise ValueError(f"hole {a1} is not the leftmost defect")
        if a1 < 2:
            raise ValueError("the leftmost hole must be able to move left")
        ratio = Fraction(config.width - a1 + 1, a1 - 1)
        for a in config.holes[1:]:
            ratio *= Fraction(a - a1, a - a1 + 1)
        for b in config.seps:
            ratio *= Fraction(b - a1 + 1, b - a1)
        return ExactValue(ratio)

    # -- bars of monomers -------------------------------------------------

    def bars_ratio(self, cfg: BarConfig, method: str = "gamma") -> ExactValue:
        """Count of the two-bar region divided by M(AD_{2n})."""
        if method == "gamma":
            return eval_gamma_product(_bars_gamma(cfg))
        if method == "hyperfactorial":
            return ExactValue(_bars_hyperfactorial(cfg))
        raise ValueError(f"unknown method '{method}'")

    def bars_count(self, cfg: BarConfig, method: str = "gamma") -> MatchCount:
        value = self.bars_ratio(cfg, method).as_fraction() * self.diamond_count(cfg.n)
        return MatchCount(value=_integral(value, f"bar count for {cfg}"), path=f"bars-{method}")

    def bars_log_ratio(self, cfg: BarConfig) -> mpmath.mpf:
        """log of bars_ratio, evaluated through log-Gamma for large n."""
        return log_gamma_product(_bars_gamma(cfg))

    def bars_log_count(self, cfg: BarConfig) -> mpmath.mpf:
        return self.bars_log_ratio(cfg) + cfg.n * (2 * cfg.n + 1) * mpmath.log(2)

    # -- chained exact counting ---------------------------------------------

    def as_bar_config(self, config: DefectConfig) -> Optional[BarConfig]:
        """Recognize one or two even bars of holes starting at odd labels."""
        if config.seps or not config.holes:
            return None
        runs = _runs(config.holes)
        if len(runs) > 2 or any(len(r) % 2 or r[0] % 2 == 0 for r in runs):
            return None
        k, p = (runs[0][0] - 1) // 2, len(runs[0]) // 2
        if len(runs) == 1:
            return BarConfig(n=config.n, k=k, p=p)
        l = (runs[1][0] - 1) // 2 - k - p  # noqa: E741
        return BarConfig(n=config.n, k=k, l=l, p=p, q=len(runs[1]) // 2)

    def dipole_decomposition(self, config: DefectConfig) -> Optional[List[Dipole]]:
        """Split a k = l configuration into adjacent hole-separation pairs, if possible."""
        if config.k != config.l:
            return None
        return _pair_dipoles(config.defects())

    def cluster_dipoles(self, cluster: DefectCluster) -> Optional[List[Dipole]]:
        """Dipoles of a neutral cluster, after an even shift that makes every offset positive."""
        if not cluster.offsets or cluster.charge != 0:
            return None
        first = cluster.offsets[0][0]
        shift = 0 if first >= 1 else 2 * ((2 - first) // 2)
        return _pair_dipoles(cluster.translated(shift).offsets)

    def count_exact(self, config: DefectConfig) -> MatchCount:
        """Exact count through the first closed-form family that covers the configuration."""
        base = self.diamond_count(config.n)
        bar = self.as_bar_config(config)
        name = region_name(config)
        if not config.holes and not config.seps:
            count = MatchCount(value=base, path="diamond")
        elif bar is not None:
            count = self.bars_count(bar)
        elif not config.seps:
            value = self._hole_chain_ratio(config) * base
            count = MatchCount(value=_integral(value, f"hole-move count of {name}"), path="hole-moves")
        else:
            dipoles = self.dipole_decomposition(config)
            if dipoles is not None:
                value = self.dipole_family_corr(config.n, dipoles).as_fraction() * base
                count = MatchCount(value=_integral(value, f"dipole count of {name}"), path="dipoles")
            else:
                try:
                    count = oracle_service.count_config(config)
                except InstanceTooLargeError as e:
                    raise UnsupportedInstanceError(
                        f"{name} is outside every closed-form family and too large for the oracle: {e}"
                    ) from e
        logger.debug(f"{name}: {count.value} via {count.path}")
        return count

    def _hole_chain_ratio(self, config: DefectConfig) -> Fraction:
        """Move holes down to 1..k, leftmost first; returns M(config)/M(base)."""
        holes = list(config.holes)
        ratio = Fraction(1)
        for i in range(len(holes)):
            while holes[i] > i + 1:
                current = DefectConfig(n=config.n, holes=holes)
                ratio *= self.move_hole_ratio(current, i).as_fraction()
                holes[i] -= 1
        return ratio


closed_form_service = ClosedFormService()
