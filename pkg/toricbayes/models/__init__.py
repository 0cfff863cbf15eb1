from .table import CellIndex, ContingencyTable
from .lattice import BinomialEquation, DesignMatrix, HilbertBasis, KernelBasis, VerificationReport
from .instance import InstanceFamily, ModelInstance
from .report import AnalysisReport, BfReport, CalibrationReport, DirichletPrior, EvidenceClass, LogMarginal

__all__ = [
    'CellIndex', 'ContingencyTable',
    'BinomialEquation', 'DesignMatrix', 'HilbertBasis', 'KernelBasis', 'VerificationReport',
    'InstanceFamily', 'ModelInstance',
    'AnalysisReport', 'BfReport', 'CalibrationReport', 'DirichletPrior', 'EvidenceClass', 'LogMarginal',
]
