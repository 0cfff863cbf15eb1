from dataclasses import dataclass
from importlib import metadata
from typing import Dict, List, Optional, Sequence
from .. import __version__
from ..config import HILBERT_VERIFY_BOUND, QI_MODEL, SZ_MODEL
from ..models.table import ContingencyTable
from ..models.lattice import DesignMatrix, HilbertBasis, KernelBasis, VerificationReport
from ..models.instance import ModelInstance
from ..models.report import AnalysisReport, CalibrationReport, ModelSummary
from ..utils.config_manager import config_manager
from ..utils.intmath import primitive
from ..utils.logger import get_logger
from .bayes import calibrate_alpha, mixture_bayes_factor, table_prior, weights_by_label
from .hilbert import hilbert_basis, maximal_design, verify_hilbert
from .instances import (consistent_instances, count_by_zero_cells, enumerate_instances,
                        instance_prior_weights, prior_weight_table)
from .lattice import (binomial_basis, build_qi_design, build_saturated_design, format_binomial,
                      integer_kernel, kernel_binomials)
from .tables import table_document

logger = get_logger('pipeline')


@dataclass
class ModelRun:
    """Intermediate results of one model: design -> kernel -> Hilbert basis -> instances."""
    name: str
    design: DesignMatrix
    kernel: KernelBasis
    basis: HilbertBasis
    instances: List[ModelInstance]
    verification: Optional[VerificationReport] = None


def model_design(table: ContingencyTable, model_name: str) -> DesignMatrix:
    if model_name == QI_MODEL:
        return build_qi_design(table)
    if model_name == SZ_MODEL:
        return build_saturated_design(table)
    raise ValueError(f"Unknown model {model_name!r}, expected {QI_MODEL} or {SZ_MODEL}")


def build_model(design: DesignMatrix, model_name: str, verify_bound: Optional[int] = None) -> ModelRun:
    kernel = integer_kernel(design)
    basis = hilbert_basis(kernel)
    verification = verify_hilbert(basis, kernel, verify_bound) if verify_bound else None
    if verification is not None and not verification.passed:
        failed = [check.name for check in verification.checks if not check.passed]
        logger.warning(f"{model_name}: Hilbert basis failed {', '.join(failed)}")
    instances = enumerate_instances(maximal_design(basis), model_name=model_name)
    return ModelRun(name=model_name, design=design, kernel=kernel, basis=basis,
                    instances=instances, verification=verification)


def _versions() -> Dict[str, str]:
    versions = {'toric-bayes': __version__}
    for package in ('numpy', 'scipy'):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = 'unknown'
    return versions


def run_analysis(table: ContingencyTable, xi: Optional[float] = None, alpha: Optional[float] = None,
                 model_prior: Optional[float] = None, mode: str = 'mixture',
                 verify_bound: int = HILBERT_VERIFY_BOUND) -> AnalysisReport:
    """Full pipeline on an observed table; unset arguments come from the stored configuration."""
    xi = config_manager.get_setting('xi') if xi is None else xi
    alpha = config_manager.get_setting('alpha') if alpha is None else alpha
    model_prior = config_manager.get_setting('model_prior') if model_prior is None else model_prior
    logger.info(f"Analysis: xi={xi}, alpha={alpha}, model prior={model_prior}, mode={mode}")

    qi = build_model(model_design(table, QI_MODEL), QI_MODEL, verify_bound)
    sz = build_model(model_design(table, SZ_MODEL), SZ_MODEL)

    families = {}
    consistent = {}
    for run in (qi, sz):
        consistent[run.name] = consistent_instances(run.instances, table)
        family = instance_prior_weights(run.instances, xi, model_name=run.name)
        families[run.name] = family.restricted_to(consistent[run.name])

    prior = table_prior(table, alpha)
    bf = mixture_bayes_factor(table, families[QI_MODEL], families[SZ_MODEL], prior, mode=mode,
                              model_prior=model_prior, alpha_bar=alpha)

    terms = {QI_MODEL: bf.qi_terms, SZ_MODEL: bf.sz_terms}
    models = {
        run.name: ModelSummary(
            model_name=run.name,
            generator_count=run.basis.size,
            instance_count=len(run.instances),
            consistent_count=len(consistent[run.name]),
            by_zero_cells=count_by_zero_cells(run.instances),
            normalizer=families[run.name].normalizer,
            weights=terms[run.name],
        )
        for run in (qi, sz)
    }

    kernel = kernel_fields(qi.kernel)
    return AnalysisReport(
        table={**table_document(table), 'N': table.N},
        cell_order=[cell.name for cell in qi.design.cells],
        basis_vectors=kernel['basis_vectors'],
        hnf_vectors=kernel['hnf_vectors'],
        binomials=kernel['binomials_as_strings'],
        zero_sum_kernel=qi.kernel.zero_sum,
        hilbert_generators=[list(g) for g in qi.basis.generators],
        hilbert_verified=bool(qi.verification and qi.verification.passed),
        models=models,
        weight_row={'xi': xi, **weights_by_label(families.values())},
        bayes_factor=bf,
        provenance={
            'xi': xi,
            'alpha_bar': alpha,
            'model_prior_qi': model_prior,
            'mode': mode,
            'cell_order': [cell.as_list() for cell in qi.design.cells],
            'verify_bound': verify_bound,
            'versions': _versions(),
        },
    )


def kernel_fields(kernel: KernelBasis) -> Dict:
    """Binomial strings next to the lattice basis they are written from, plus the canonical HNF rows."""
    return {
        'basis_vectors': [list(primitive(v)) for v in binomial_basis(kernel)],
        'hnf_vectors': [list(v) for v in kernel.vectors],
        'binomials_as_strings': [format_binomial(eq) for eq in kernel_binomials(kernel)],
    }


def kernel_document(design: DesignMatrix) -> Dict:
    kernel = integer_kernel(design)
    return {
        'cells': [cell.as_list() for cell in design.cells],
        'rank': kernel.rank,
        'zero_sum': kernel.zero_sum,
        **kernel_fields(kernel),
    }


def hilbert_document(design: DesignMatrix, verify_bound: int = HILBERT_VERIFY_BOUND) -> Dict:
    kernel = integer_kernel(design)
    basis = hilbert_basis(kernel)
    maximal = maximal_design(basis)
    doc = {
        'cell_order': [cell.as_list() for cell in basis.cells],
        'param_names': list(maximal.param_names),
        'generators': [list(g) for g in basis.generators],
    }
    if verify_bound:
        verification = verify_hilbert(basis, kernel, verify_bound)
        doc['verified'] = verification.passed
        doc['checks'] = [
            {'name': check.name, 'passed': check.passed,
             'witness': [list(w) for w in check.witness] if check.witness else None}
            for check in verification.checks
        ]
    return doc


def instances_document(design: DesignMatrix, model_name: str,
                       consistent_with: Optional[ContingencyTable] = None) -> Dict:
    run = build_model(design, model_name)
    instances = run.instances
    if consistent_with is not None:
        instances = consistent_instances(instances, consistent_with)
    return {
        'model': model_name,
        'generators': run.basis.size,
        'total': len(run.instances),
        'count': len(instances),
        'by_zero_cells': {str(z): n for z, n in count_by_zero_cells(instances).items()},
        'instances': [
            {'label': inst.label, 'z': inst.zero_cell_count,
             'support': [cell.as_list() for cell in inst.cells]}
            for inst in instances
        ],
    }


def run_calibration(table: ContingencyTable, xi: Optional[float] = None,
                    alphas: Optional[Sequence[float]] = None, use_reference: bool = True) -> CalibrationReport:
    """Imaginary-sample calibration of alpha_bar on the layout of ``table``."""
    xi = config_manager.get_setting('xi') if xi is None else xi
    alphas = config_manager.get_setting('calibration_alphas') if alphas is None else alphas
    qi = build_model(model_design(table, QI_MODEL), QI_MODEL)
    sz = build_model(model_design(table, SZ_MODEL), SZ_MODEL)
    return calibrate_alpha(table, xi, alphas, qi.instances, sz.instances,
                           reference=table if use_reference else None)


def calibration_document(report: CalibrationReport) -> Dict:
    return {
        'xi': report.xi,
        'imaginary_counts': report.imaginary_counts,
        'bf_sz_vs_qi': {str(p.alpha_bar): p.bf_sz_vs_qi for p in report.points},
        'bf_qi_vs_sz': {str(p.alpha_bar): p.bf_qi_vs_sz for p in report.points},
        'best_alpha': report.best_alpha,
    }


def run_weights(table: ContingencyTable, xis: Sequence[float]) -> List[Dict[str, float]]:
    """Prior weights of the data-consistent instances over a grid of xi."""
    runs = [build_model(model_design(table, name), name) for name in (SZ_MODEL, QI_MODEL)]
    return prior_weight_table(
        {run.name: run.instances for run in runs},
        {run.name: consistent_instances(run.instances, table) for run in runs},
        xis,
    )
