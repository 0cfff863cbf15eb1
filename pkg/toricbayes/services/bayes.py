"""Multinomial-Dirichlet marginals and Bayes factors over instance mixtures.

All marginals are natural logs. Instance mixtures are combined with
log-sum-exp, so nothing is exponentiated except the final ratio.
"""
import math
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import numpy as np
from scipy.special import betaln, gammaln, logsumexp
from ..config import QI_MODEL
from ..models.table import CellIndex, ContingencyTable
from ..models.instance import InstanceFamily, ModelInstance
from ..models.report import (BfReport, CalibrationPoint, CalibrationReport, DirichletPrior,
                             EvidenceClass, InstanceContribution, LogMarginal)
from ..utils.errors import InconsistentInstanceError, NumericError, UnsupportedPatternError
from ..utils.logger import get_logger
from .instances import consistent_instances, instance_prior_weights
from .tables import free_cells, imaginary_table, restrict_counts

logger = get_logger('bayes')

MODES = ('mixture', 'conventional')


def log_h(y: Sequence[float]) -> float:
    """log H(y) = log Gamma(sum y) - sum log Gamma(y_t)."""
    values = np.asarray(list(y), dtype=float)
    if values.size == 0:
        raise NumericError("log_h needs at least one argument")
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise NumericError(f"log_h arguments must be positive and finite, got {values.tolist()}")
    if values.size == 2:
        return float(-betaln(values[0], values[1]))
    return float(gammaln(values.sum()) - gammaln(values).sum())


def make_prior(cells: Iterable[CellIndex], alpha: Union[float, Mapping[CellIndex, float]]) -> DirichletPrior:
    """Shared alpha_bar on every cell, or a per-cell mapping."""
    cells = tuple(cells)
    if not cells:
        raise InconsistentInstanceError("A Dirichlet prior needs a nonempty support")
    if isinstance(alpha, Mapping):
        missing = [cell for cell in cells if cell not in alpha]
        if missing:
            raise NumericError(f"No alpha given for cell ({missing[0].row},{missing[0].col})")
        values = {cell: float(alpha[cell]) for cell in cells}
    else:
        values = {cell: float(alpha) for cell in cells}
    for cell, a in values.items():
        if not (math.isfinite(a) and a > 0):
            raise NumericError(f"alpha at ({cell.row},{cell.col}) must be positive, got {a}")
    return DirichletPrior(support=cells, alpha=values)


def table_prior(table: ContingencyTable, alpha: Union[float, Mapping[CellIndex, float]]) -> DirichletPrior:
    return make_prior(free_cells(table), alpha)


def restrict_prior(prior: DirichletPrior, support: Iterable[CellIndex]) -> DirichletPrior:
    """Dirichlet conditioned on a face: keep the alphas of ``support``, in prior order."""
    keep = set(support)
    if not keep:
        raise InconsistentInstanceError("Cannot restrict a prior to an empty support")
    outside = keep - set(prior.support)
    if outside:
        cell = min(outside)
        raise InconsistentInstanceError(f"Cell ({cell.row},{cell.col}) is not in the prior support")
    cells = tuple(cell for cell in prior.support if cell in keep)
    return DirichletPrior(support=cells, alpha={cell: prior.alpha[cell] for cell in cells})


def aggregate_alpha(prior: DirichletPrior, partition: Sequence[Iterable[CellIndex]]) -> List[float]:
    """alpha*_b = sum of alpha over block b; blocks must partition the support."""
    blocks = [list(block) for block in partition]
    seen = set()
    for block in blocks:
        if not block:
            raise ValueError("Empty block in partition")
        for cell in block:
            if cell in seen:
                raise ValueError(f"Cell ({cell.row},{cell.col}) appears in more than one block")
            if cell not in prior.alpha:
                raise ValueError(f"Cell ({cell.row},{cell.col}) is outside the prior support")
            seen.add(cell)
    if seen != set(prior.support):
        cell = min(set(prior.support) - seen)
        raise ValueError(f"Partition does not cover cell ({cell.row},{cell.col})")
    return [sum(prior.alpha[cell] for cell in block) for block in blocks]


def _support_counts(table: ContingencyTable, prior: DirichletPrior) -> np.ndarray:
    support = set(prior.support)
    stray = sorted(cell for cell, n in table.counts.items() if n > 0 and cell not in support)
    if stray:
        names = ', '.join(f'({c.row},{c.col})' for c in stray)
        raise InconsistentInstanceError(f"Positive counts outside the instance support at {names}")
    return np.array([table.count(cell) for cell in prior.support], dtype=float)


def _log_coefficient(counts: np.ndarray) -> float:
    return float(gammaln(counts.sum() + 1) - gammaln(counts + 1).sum())


def _h_ratio(alpha: Sequence[float], counts: Sequence[float]) -> float:
    """log H(alpha) - log H(alpha + n)."""
    alpha = np.asarray(alpha, dtype=float)
    return log_h(alpha) - log_h(alpha + np.asarray(counts, dtype=float))


def marginal_saturated(table: ContingencyTable, prior: DirichletPrior,
                       include_coefficient: bool = True, label: str = '') -> LogMarginal:
    """Multinomial-Dirichlet marginal of the counts on ``prior.support``."""
    counts = _support_counts(table, prior)
    value = _h_ratio(prior.values(), counts)
    if include_coefficient:
        value += _log_coefficient(counts)
    return LogMarginal(value=value, model_label=label, method='saturated')


def qi_decomposition(cells: Sequence[CellIndex]) -> Tuple[List[CellIndex], List[int], List[int], List[CellIndex]]:
    """Split a support into isolated cells and one full product block.

    Cells alone in their row or column are peeled off repeatedly. What is
    left must fill R' x C' exactly.

    Returns (isolated, block_rows, block_cols, block_cells).
    """
    remaining = list(cells)
    isolated: List[CellIndex] = []
    while True:
        per_row = defaultdict(int)
        per_col = defaultdict(int)
        for cell in remaining:
            per_row[cell.row] += 1
            per_col[cell.col] += 1
        peeled = [cell for cell in remaining if per_row[cell.row] == 1 or per_col[cell.col] == 1]
        if not peeled:
            break
        isolated.extend(peeled)
        remaining = [cell for cell in remaining if cell not in peeled]

    rows = sorted({cell.row for cell in remaining})
    cols = sorted({cell.col for cell in remaining})
    present = set(remaining)
    missing = [CellIndex(i, j) for i in rows for j in cols if CellIndex(i, j) not in present]
    if missing:
        raise UnsupportedPatternError(missing, "Support is not isolated cells plus one product block; missing")
    return isolated, rows, cols, remaining


def marginal_qi(table: ContingencyTable, prior: DirichletPrior,
                include_coefficient: bool = True, label: str = '') -> LogMarginal:
    """Quasi-independence marginal through the lambda, row and column factors.

    lambda has one category per isolated cell plus one for the block total;
    inside the block the row and column shares get independent Dirichlets
    with the aggregated alphas.
    """
    counts = _support_counts(table, prior)
    n = dict(zip(prior.support, counts))
    isolated, rows, cols, block = qi_decomposition(prior.support)

    lam_blocks = [[cell] for cell in isolated] + ([block] if block else [])
    lam_alpha = aggregate_alpha(prior, lam_blocks)
    lam_counts = [sum(n[cell] for cell in b) for b in lam_blocks]
    value = _h_ratio(lam_alpha, lam_counts)

    if block:
        for key, levels in ((lambda c: c.row, rows), (lambda c: c.col, cols)):
            groups = [[cell for cell in block if key(cell) == level] for level in levels]
            alpha = [sum(prior.alpha[cell] for cell in g) for g in groups]
            value += _h_ratio(alpha, [sum(n[cell] for cell in g) for g in groups])

    if include_coefficient:
        value += _log_coefficient(counts)
    return LogMarginal(value=value, model_label=label, method='qi')


def instance_log_marginal(table: ContingencyTable, instance: ModelInstance, prior: DirichletPrior,
                          include_coefficient: bool = True) -> LogMarginal:
    """Marginal of one instance: factorised for QI, saturated otherwise.

    A restricted QI instance without the block structure falls back to the
    saturated marginal on its support. The full QI instance never does.
    """
    local = restrict_prior(prior, instance.cells)
    if instance.model_name != QI_MODEL:
        return marginal_saturated(table, local, include_coefficient, label=instance.label)
    try:
        return marginal_qi(table, local, include_coefficient, label=instance.label)
    except UnsupportedPatternError as e:
        if instance.zero_cell_count == 0:
            raise
        logger.warning(f"{instance.label}: {e}; using the saturated marginal on its support")
        return marginal_saturated(table, local, include_coefficient, label=instance.label)


def _family_terms(table: ContingencyTable, family: InstanceFamily, prior: DirichletPrior,
                  include_coefficient: bool, project: bool) -> List[InstanceContribution]:
    terms = []
    for inst in family.instances:
        data = restrict_counts(table, inst.cells) if project else table
        marginal = instance_log_marginal(data, inst, prior, include_coefficient)
        logger.debug(f"{inst.label}: q={family.weight(inst):.6g} log m={marginal.value:.10g} ({marginal.method})")
        terms.append(InstanceContribution(label=inst.label, z=inst.zero_cell_count,
                                          weight=family.weight(inst), log_marginal=marginal.value,
                                          method=marginal.method))
    return terms


def _log_mixture(terms: Sequence[InstanceContribution]) -> float:
    with np.errstate(divide='ignore'):
        logs = np.log([t.weight for t in terms]) + np.array([t.log_marginal for t in terms])
    return float(logsumexp(logs))


def _full_support_term(terms: Sequence[InstanceContribution], model_name: str) -> InstanceContribution:
    for term in terms:
        if term.z == 0:
            return term
    raise InconsistentInstanceError(f"The {model_name} family has no full-support instance")


def posterior_model_prob(bf: float, prior_prob_qi: float) -> float:
    """Pr(QI | n) = p BF / (p BF + 1 - p)."""
    if not 0 <= prior_prob_qi <= 1:
        raise NumericError(f"Model prior must lie in [0, 1], got {prior_prob_qi}")
    if not (math.isfinite(bf) and bf > 0):
        raise NumericError(f"Bayes factor must be positive and finite, got {bf}")
    return prior_prob_qi * bf / (prior_prob_qi * bf + (1 - prior_prob_qi))


def jeffreys_class(bf_qi_vs_sz: float) -> EvidenceClass:
    if not bf_qi_vs_sz > 0:
        raise NumericError(f"Bayes factor must be positive, got {bf_qi_vs_sz}")
    return EvidenceClass.from_log10(-math.log10(bf_qi_vs_sz))


def mixture_bayes_factor(table: ContingencyTable, qi_family: InstanceFamily, sz_family: InstanceFamily,
                         prior: DirichletPrior, mode: str = 'mixture', model_prior: float = 0.5,
                         include_coefficient: bool = True, alpha_bar: Optional[float] = None,
                         project: bool = False) -> BfReport:
    """BF(QI:SZ) = sum_h q_h m_h over QI instances / the same sum over SZ instances.

    ``project`` evaluates each instance on the counts restricted to its
    support, which is how an imaginary sample is scored against instances
    that drop cells.
    """
    if mode not in MODES:
        raise ValueError(f"Unknown mode {mode!r}, expected one of {MODES}")
    for family in (qi_family, sz_family):
        if not family.instances:
            raise InconsistentInstanceError(f"No {family.model_name} instance is consistent with the data")

    qi_terms = _family_terms(table, qi_family, prior, include_coefficient, project)
    sz_terms = _family_terms(table, sz_family, prior, include_coefficient, project)

    log_bf_mixture = _log_mixture(qi_terms) - _log_mixture(sz_terms)
    log_bf_conventional = (_full_support_term(qi_terms, qi_family.model_name).log_marginal
                           - _full_support_term(sz_terms, sz_family.model_name).log_marginal)
    log_bf = log_bf_mixture if mode == 'mixture' else log_bf_conventional

    bf = math.exp(log_bf) if log_bf < 709 else math.inf
    bf_conventional = math.exp(log_bf_conventional) if log_bf_conventional < 709 else math.inf
    if not (math.isfinite(bf) and bf > 0 and math.isfinite(bf_conventional) and bf_conventional > 0):
        raise NumericError(f"Bayes factor is not representable (log BF = {log_bf:.6g})")

    report = BfReport(
        mode=mode,
        bf_qi_vs_sz=bf,
        bf_conventional=bf_conventional,
        log10_against_qi=-log_bf / math.log(10),
        evidence_class=jeffreys_class(bf),
        posterior_prob_qi=posterior_model_prob(bf, model_prior),
        posterior_prob_qi_conventional=posterior_model_prob(bf_conventional, model_prior),
        model_prior_qi=model_prior,
        xi=qi_family.xi,
        alpha_bar=alpha_bar,
        log_bf_qi_vs_sz=log_bf,
        weights_used={family.model_name: family.summary() for family in (qi_family, sz_family)},
        qi_terms=tuple(qi_terms),
        sz_terms=tuple(sz_terms),
    )
    logger.info(f"BF(QI:SZ) {mode} = {bf:.6g}, conventional = {bf_conventional:.6g}, "
                f"evidence against QI: {report.evidence_class.value}")
    return report


def calibrate_alpha(table: ContingencyTable, xi: float, candidates: Sequence[float],
                    qi_instances: Sequence[ModelInstance], sz_instances: Sequence[ModelInstance],
                    reference: Optional[ContingencyTable] = None) -> CalibrationReport:
    """Score an imaginary sample of one count per free cell for each alpha_bar.

    The instance sets are those consistent with ``reference`` (the observed
    table), or with the imaginary sample itself when no reference is given.
    Each instance sees the imaginary counts on its own support and the
    multinomial coefficients are left out. The winner is the candidate whose
    BF(SZ:QI) is closest to 1; ties go to the earlier candidate.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("Calibration needs at least one candidate alpha")

    imaginary = imaginary_table(table)
    reference = reference if reference is not None else imaginary
    qi_family = instance_prior_weights(qi_instances, xi)
    sz_family = instance_prior_weights(sz_instances, xi)
    qi_family = qi_family.restricted_to(consistent_instances(qi_instances, reference))
    sz_family = sz_family.restricted_to(consistent_instances(sz_instances, reference))

    points = []
    for alpha_bar in candidates:
        prior = table_prior(imaginary, alpha_bar)
        result = mixture_bayes_factor(imaginary, qi_family, sz_family, prior, include_coefficient=False,
                                      alpha_bar=alpha_bar, project=True)
        points.append(CalibrationPoint(alpha_bar=alpha_bar, bf_sz_vs_qi=1 / result.bf_qi_vs_sz,
                                       bf_qi_vs_sz=result.bf_qi_vs_sz))
        logger.info(f"Calibration alpha={alpha_bar}: BF(SZ:QI) = {points[-1].bf_sz_vs_qi:.6g}")

    best = min(points, key=lambda p: abs(p.bf_sz_vs_qi - 1))
    return CalibrationReport(xi=xi, points=tuple(points), best_alpha=best.alpha_bar,
                             imaginary_counts=imaginary.N)


def weights_by_label(families: Iterable[InstanceFamily]) -> Dict[str, float]:
    """Flat label -> q_h mapping over the (already restricted) families."""
    row = {}
    for family in families:
        for inst in family.instances:
            row[inst.label] = family.weight(inst)
    return row
