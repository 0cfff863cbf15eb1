from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple
from .table import CellIndex
from ..config import EVIDENCE_THRESHOLDS


class EvidenceClass(str, Enum):
    """Jeffreys scale for the evidence against QI."""
    SUPPORTS_QI = 'supports QI'
    POOR = 'poor'
    SUBSTANTIAL = 'substantial'
    STRONG = 'strong'
    DECISIVE = 'decisive'

    @staticmethod
    def from_log10(value: float) -> 'EvidenceClass':
        """Classify log10 BF(SZ:QI); right-closed intervals."""
        if value <= 0:
            return EvidenceClass.SUPPORTS_QI
        elif value <= EVIDENCE_THRESHOLDS['poor']:
            return EvidenceClass.POOR
        elif value <= EVIDENCE_THRESHOLDS['substantial']:
            return EvidenceClass.SUBSTANTIAL
        elif value <= EVIDENCE_THRESHOLDS['strong']:
            return EvidenceClass.STRONG
        else:
            return EvidenceClass.DECISIVE


@dataclass(frozen=True)
class DirichletPrior:
    """Dirichlet hyperparameters on an ordered subset of the free cells."""
    support: Tuple[CellIndex, ...]
    alpha: Dict[CellIndex, float]

    def __post_init__(self):
        object.__setattr__(self, 'support', tuple(self.support))
        object.__setattr__(self, 'alpha', {cell: float(self.alpha[cell]) for cell in self.support})

    @property
    def total(self) -> float:
        return sum(self.alpha.values())

    def values(self) -> List[float]:
        return [self.alpha[cell] for cell in self.support]


@dataclass(frozen=True)
class LogMarginal:
    """Natural-log marginal likelihood of the counts under one instance."""
    value: float
    model_label: str
    method: str = 'saturated'


@dataclass(frozen=True)
class InstanceContribution:
    label: str
    z: int
    weight: float
    log_marginal: float
    method: str


@dataclass(frozen=True)
class BfReport:
    mode: str
    bf_qi_vs_sz: float
    bf_conventional: float
    log10_against_qi: float
    evidence_class: EvidenceClass
    posterior_prob_qi: float
    posterior_prob_qi_conventional: float
    model_prior_qi: float
    xi: float
    alpha_bar: Optional[float]
    log_bf_qi_vs_sz: float
    weights_used: Dict[str, List[Dict]] = field(default_factory=dict)
    qi_terms: Tuple[InstanceContribution, ...] = ()
    sz_terms: Tuple[InstanceContribution, ...] = ()


@dataclass(frozen=True)
class CalibrationPoint:
    alpha_bar: float
    bf_sz_vs_qi: float
    bf_qi_vs_sz: float


@dataclass(frozen=True)
class CalibrationReport:
    xi: float
    points: Tuple[CalibrationPoint, ...]
    best_alpha: float
    imaginary_counts: int

    def as_mapping(self) -> Dict[float, float]:
        return {point.alpha_bar: point.bf_sz_vs_qi for point in self.points}


@dataclass(frozen=True)
class ModelSummary:
    model_name: str
    generator_count: int
    instance_count: int
    consistent_count: int
    by_zero_cells: Dict[int, int]
    normalizer: float
    weights: Tuple[InstanceContribution, ...] = ()


@dataclass
class AnalysisReport:
    """Everything the `analyze` command reports, in presentation order."""
    table: Dict
    cell_order: List[str]
    basis_vectors: List[List[int]]
    hnf_vectors: List[List[int]]
    binomials: List[str]
    zero_sum_kernel: bool
    hilbert_generators: List[List[int]]
    hilbert_verified: bool
    models: Dict[str, ModelSummary]
    weight_row: Dict[str, float]
    bayes_factor: BfReport
    provenance: Dict = field(default_factory=dict)
