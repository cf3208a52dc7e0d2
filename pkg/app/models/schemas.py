"""Pydantic schemas for defect configurations, results and reports."""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


def _strictly_increasing(values: List[int]) -> bool:
    return all(a < b for a, b in zip(values, values[1:]))


class DefectKind(str, Enum):
    HOLE = "hole"
    SEPARATION = "sep"


class DefectConfig(BaseModel):
    """Holes and separations on the axis of AR_{2n,2n+k-l}."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Half-height; the region is AR_{2n,2n+k-l}")
    holes: List[int] = Field(default_factory=list, description="Axis labels of monomers (holes)")
    seps: List[int] = Field(default_factory=list, description="Axis labels of separations")

    @model_validator(mode="after")
    def validate_labels(self):
        if not _strictly_increasing(self.holes):
            raise ValueError('holes must be strictly increasing')
        if not _strictly_increasing(self.seps):
            raise ValueError('seps must be strictly increasing')
        overlap = set(self.holes) & set(self.seps)
        if overlap:
            raise ValueError(f'labels {sorted(overlap)} are both hole and separation')
        if self.width < 1:
            raise ValueError(f'width 2n+k-l = {self.width} must be at least 1')
        for label in self.holes + self.seps:
            if not 1 <= label <= self.width:
                raise ValueError(f'label {label} outside [1, {self.width}]')
        return self

    @property
    def k(self) -> int:
        return len(self.holes)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.seps)

    @property
    def width(self) -> int:
        return 2 * self.n + len(self.holes) - len(self.seps)

    def defects(self) -> List[Tuple[int, DefectKind]]:
        """All defects sorted by axis label."""
        items = [(h, DefectKind.HOLE) for h in self.holes] + [(s, DefectKind.SEPARATION) for s in self.seps]
        return sorted(items)

    def kind_at(self, label: int) -> Optional[DefectKind]:
        if label in self.holes:
            return DefectKind.HOLE
        if label in self.seps:
            return DefectKind.SEPARATION
        return None


class DefectCluster(BaseModel):
    """Defects at integer offsets, not tied to a particular region."""
    model_config = ConfigDict(frozen=True)

    offsets: List[Tuple[int, DefectKind]] = Field(..., description="(offset, kind) pairs, strictly increasing")

    @field_validator('offsets')
    @classmethod
    def validate_offsets(cls, v):
        if not _strictly_increasing([o for o, _ in v]):
            raise ValueError('cluster offsets must be strictly increasing')
        return v

    @computed_field
    @property
    def charge(self) -> int:
        return sum(1 if kind == DefectKind.HOLE else -1 for _, kind in self.offsets)

    @property
    def holes(self) -> List[int]:
        return [o for o, kind in self.offsets if kind == DefectKind.HOLE]

    @property
    def seps(self) -> List[int]:
        return [o for o, kind in self.offsets if kind == DefectKind.SEPARATION]

    @property
    def kinds(self) -> List[DefectKind]:
        return [kind for _, kind in self.offsets]

    def translated(self, d: int) -> "DefectCluster":
        return DefectCluster(offsets=[(o + d, kind) for o, kind in self.offsets])

    @classmethod
    def from_sets(cls, holes: List[int], seps: List[int]) -> "DefectCluster":
        items = [(h, DefectKind.HOLE) for h in holes] + [(s, DefectKind.SEPARATION) for s in seps]
        return cls(offsets=sorted(items))


class DipoleKind(str, Enum):
    OX_ODD = "ox_odd"    # hole 2s+1, separation 2s+2
    OX_EVEN = "ox_even"  # hole 2s,   separation 2s+1
    XO_EVEN = "xo_even"  # separation 2s+1, hole 2s+2
    XO_ODD = "xo_odd"    # separation 2s,   hole 2s+1


class Dipole(BaseModel):
    """Adjacent hole-separation pair on the axis."""
    model_config = ConfigDict(frozen=True)

    kind: DipoleKind
    s: int = Field(..., ge=0, description="Position parameter")

    @model_validator(mode="after")
    def validate_position(self):
        if self.kind in (DipoleKind.OX_EVEN, DipoleKind.XO_ODD) and self.s < 1:
            raise ValueError(f'{self.kind.value} dipoles need s >= 1')
        return self

    @property
    def hole(self) -> int:
        return {
            DipoleKind.OX_ODD: 2 * self.s + 1,
            DipoleKind.OX_EVEN: 2 * self.s,
            DipoleKind.XO_EVEN: 2 * self.s + 2,
            DipoleKind.XO_ODD: 2 * self.s + 1,
        }[self.kind]

    @property
    def sep(self) -> int:
        return {
            DipoleKind.OX_ODD: 2 * self.s + 2,
            DipoleKind.OX_EVEN: 2 * self.s + 1,
            DipoleKind.XO_EVEN: 2 * self.s + 1,
            DipoleKind.XO_ODD: 2 * self.s,
        }[self.kind]

    @property
    def sign(self) -> int:
        """+1 when the hole is on the left."""
        return 1 if self.hole < self.sep else -1

    @property
    def is_odd(self) -> bool:
        return self.hole % 2 == 1

    @classmethod
    def from_positions(cls, hole: int, sep: int) -> "Dipole":
        if abs(hole - sep) != 1:
            raise ValueError(f'hole {hole} and separation {sep} are not adjacent')
        if sep == hole + 1:
            if hole % 2:
                return cls(kind=DipoleKind.OX_ODD, s=(hole - 1) // 2)
            return cls(kind=DipoleKind.OX_EVEN, s=hole // 2)
        if sep % 2:
            return cls(kind=DipoleKind.XO_EVEN, s=(sep - 1) // 2)
        return cls(kind=DipoleKind.XO_ODD, s=sep // 2)


class Vertex(BaseModel):
    row: int
    col: int
    parity: str = Field(..., description="'even' or 'odd' row class (the bipartition)")
    label: Optional[int] = Field(None, description="Axis label for vertices on the symmetry axis")
    tag: Optional[str] = Field(None, description="'up' or 'down' for split separation vertices")


class AxisGraph(BaseModel):
    """Explicit bipartite graph of AR_{2n,2n+k-l}(H,S)."""
    n: int
    width: int
    vertices: List[Vertex]
    adjacency: List[List[int]]
    axis: Dict[int, List[int]] = Field(..., description="Axis label -> vertex indices (two for a separation)")

    @computed_field
    @property
    def balanced(self) -> bool:
        even = sum(1 for v in self.vertices if v.parity == "even")
        return 2 * even == len(self.vertices)


class MatchCount(BaseModel):
    """Number of perfect matchings."""
    value: int = Field(..., ge=0)
    path: str = Field("oracle", description="Evaluation path that produced the count")
    balanced: bool = Field(True, description="False when the graph was not balanced (value is then 0)")


class SlitOrientation(str, Enum):
    OX = "ox"
    XO = "xo"


class PairOrientation(str, Enum):
    SAME = "same"
    OPPOSITE = "opposite"


class SlitSpec(BaseModel):
    """Chain of fluctuating slits separated by runs of unaffected sites."""
    lengths: List[int] = Field(..., min_length=1, description="Slit lengths a_i")
    gaps: List[int] = Field(default_factory=list, description="Unaffected sites between consecutive slits")
    orientations: Optional[List[SlitOrientation]] = Field(None, description="Per-slit orientation, default all ox")

    @model_validator(mode="after")
    def validate_shape(self):
        if any(a < 1 for a in self.lengths):
            raise ValueError('slit lengths must be positive')
        if len(self.gaps) != len(self.lengths) - 1:
            raise ValueError(f'{len(self.lengths)} slits need {len(self.lengths) - 1} gaps, got {len(self.gaps)}')
        if any(d < 0 for d in self.gaps):
            raise ValueError('gaps must be non-negative')
        if self.orientations is not None and len(self.orientations) != len(self.lengths):
            raise ValueError('one orientation per slit is required')
        return self

    def orientation_list(self) -> List[SlitOrientation]:
        return list(self.orientations) if self.orientations is not None else [SlitOrientation.OX] * len(self.lengths)


class BarConfig(BaseModel):
    """Two bars of monomers C_{k,p} and C_{k+p+l,q} in AR_{2n,2n+2p+2q}."""
    n: int = Field(..., ge=1)
    k: int = Field(0, ge=0, description="Half the gap before the first bar")
    l: int = Field(0, ge=0, description="Half the gap between the bars")  # noqa: E741
    p: int = Field(0, ge=0, description="Half the length of the first bar")
    q: int = Field(0, ge=0, description="Half the length of the second bar")

    @model_validator(mode="after")
    def validate_fit(self):
        if self.k + self.l > self.n:
            raise ValueError(f'k+l = {self.k + self.l} exceeds n = {self.n}')
        return self

    def to_defect_config(self) -> DefectConfig:
        first = list(range(2 * self.k + 1, 2 * self.k + 2 * self.p + 1))
        start = 2 * (self.k + self.p + self.l)
        second = list(range(start + 1, start + 2 * self.q + 1))
        return DefectConfig(n=self.n, holes=first + second)


class AsymResult(BaseModel):
    """Prediction of an asymptotic law, optionally paired with the exact value."""
    law: str = Field(..., description="Identifier of the asymptotic law")
    value: float = Field(..., description="Predicted value (inf when it overflows a float)")
    log_value: float = Field(..., description="Natural log of the predicted value")
    leading_constant: float
    exponent: str = Field("0", description="Power of the size parameter, as a rational string")
    exact_log: Optional[float] = None
    rel_error: Optional[float] = None
    details: Dict[str, float] = Field(default_factory=dict)


class ConvergenceRecord(BaseModel):
    """Exact-versus-predicted table along a grid."""
    law: str
    n_grid: List[int]
    exact_log: List[float]
    predicted_log: List[float]
    rel_error: List[float]
    errors: List[Optional[str]] = Field(default_factory=list, description="Per-row evaluation failure; None when the row evaluated")
    monotone: bool = Field(..., description="True when |rel_error| never increases over the rows that evaluated")


SWEEP_LAWS = ("p-asym", "slit-limit", "casimir", "giant-slit", "boundary", "defect-field", "bars")


class SweepSpec(BaseModel):
    law: str
    params: Dict[str, float] = Field(default_factory=dict)
    grid: str = Field(..., description="start:stop:step, inclusive")
    output: Optional[str] = None
    format: str = Field("csv", pattern="^(csv|xlsx)$")

    @field_validator('law')
    @classmethod
    def validate_law(cls, v):
        if v not in SWEEP_LAWS:
            raise ValueError(f"unknown law '{v}', expected one of {', '.join(SWEEP_LAWS)}")
        return v

    @field_validator('grid')
    @classmethod
    def validate_grid(cls, v):
        parts = v.split(":")
        if len(parts) not in (1, 3) or not all(p.strip().lstrip("-").isdigit() for p in parts):
            raise ValueError(f"grid '{v}' is not start:stop:step")
        if len(parts) == 3 and int(parts[2]) <= 0:
            raise ValueError('grid step must be positive')
        if len(parts) == 3 and int(parts[1]) < int(parts[0]):
            raise ValueError('grid is empty')
        return v

    def grid_values(self) -> List[int]:
        parts = [int(p) for p in self.grid.split(":")]
        if len(parts) == 1:
            return parts
        start, stop, step = parts
        return list(range(start, stop + 1, step))


class BarSystem(BaseModel):
    """Macroscopic bars: length fractions gammas and the gaps alphas before each bar."""
    gammas: List[float] = Field(..., min_length=1)
    alphas: List[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_system(self):
        if len(self.gammas) != len(self.alphas):
            raise ValueError('one gap per bar is required')
        if any(g <= 0 for g in self.gammas) or any(a <= 0 for a in self.alphas):
            raise ValueError('bar lengths and gaps must be positive')
        if sum(self.alphas) >= 1:
            raise ValueError(f'gaps sum to {sum(self.alphas)}, must be below 1')
        return self


class EquilibriumReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: str = Field("1", alias="schema")
    gammas: List[float]
    alphas: List[float]
    F: float
    grad_norm: float
    hessian_eigs: List[float]
    starts: int
    multistart_spread: float
    agreement: bool
    displaced_alphas: Optional[List[float]] = None
    lambda_gap: Optional[float] = Field(None, description="F(equilibrium) - F(displaced)")


class CheckResult(BaseModel):
    """One row of a verification battery."""
    suite: str
    name: str
    cases: int = Field(..., ge=0, description="Number of instances checked")
    failures: int = Field(0, ge=0)
    counterexample: Optional[str] = Field(None, description="First failing instance, if any")

    @computed_field
    @property
    def passed(self) -> bool:
        return self.failures == 0
