import math
from dataclasses import replace
import numpy as np
import pytest
from scipy.special import gammaln
from toricbayes.models.lattice import DesignMatrix
from toricbayes.models.instance import ModelInstance
from toricbayes.models.report import EvidenceClass
from toricbayes.models.table import CellIndex, ContingencyTable
from toricbayes.services.bayes import (aggregate_alpha, calibrate_alpha, instance_log_marginal, jeffreys_class,
                                       log_h, make_prior, marginal_qi, marginal_saturated, mixture_bayes_factor,
                                       posterior_model_prob, qi_decomposition, restrict_prior, table_prior)
from toricbayes.services.instances import consistent_instances, instance_prior_weights
from toricbayes.services.tables import free_cells, load_table_file
from toricbayes.utils.errors import InconsistentInstanceError, NumericError, UnsupportedPatternError

C = CellIndex


def families(table, qi_run, sz_run, xi):
    return tuple(
        instance_prior_weights(run.instances, xi).restricted_to(consistent_instances(run.instances, table))
        for run in (qi_run, sz_run)
    )


def with_counts(layout, counts):
    return ContingencyTable(row_labels=layout.row_labels, col_labels=layout.col_labels,
                            counts=counts, structural_zeros=layout.structural_zeros)


def compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


# log_h

def test_log_h_closed_forms():
    assert log_h([1, 1]) == pytest.approx(0.0, abs=1e-15)
    assert log_h([0.5, 0.5]) == pytest.approx(-math.log(math.pi), rel=1e-12)
    assert log_h([1, 1, 1]) == pytest.approx(math.log(2), rel=1e-12)


@pytest.mark.parametrize('y', [[0.1, 0.2], [3.5, 7.25, 11.0], [1e6, 1e6]])
def test_log_h_accuracy(y):
    expected = math.lgamma(sum(y)) - sum(math.lgamma(v) for v in y)
    assert log_h(y) == pytest.approx(expected, rel=1e-12, abs=1e-9)


def test_log_h_small_against_large():
    # lgamma(1e6 + 0.1) - lgamma(1e6) = 0.1 log(1e6) - 0.045e-6 up to O(1e-14)
    expected = 0.1 * 6 * math.log(10) - 4.5e-8 - 2.252712651734206
    assert log_h([0.1, 1e6]) == pytest.approx(expected, abs=5e-12)
    assert log_h([1e6, 0.1]) == log_h([0.1, 1e6])


@pytest.mark.parametrize('y', [[1, 0], [-1, 2], [], [float('nan'), 1]])
def test_log_h_rejects(y):
    with pytest.raises(NumericError):
        log_h(y)


# Marginals

def test_single_cell_marginal_is_one():
    table = ContingencyTable(row_labels=['a'], col_labels=['x'], counts={C(1, 1): 17})
    assert marginal_saturated(table, table_prior(table, 2.5)).value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize('n1, n2', [(0, 4), (3, 2), (10, 0), (7, 7)])
def test_beta_binomial_is_uniform(n1, n2):
    table = ContingencyTable(row_labels=['a'], col_labels=['x', 'y'], counts={C(1, 1): n1, C(1, 2): n2})
    value = marginal_saturated(table, table_prior(table, 1.0)).value
    assert math.exp(value) == pytest.approx(1 / (n1 + n2 + 1), rel=1e-12)


@pytest.mark.parametrize('N', range(1, 6))
def test_saturated_marginal_normalises(N):
    cells = [C(1, 1), C(1, 2), C(1, 3)]
    prior = make_prior(cells, {C(1, 1): 0.5, C(1, 2): 1.5, C(1, 3): 2.0})
    total = 0.0
    for n in compositions(N, 3):
        table = ContingencyTable(row_labels=['a'], col_labels=['x', 'y', 'z'], counts=dict(zip(cells, n)))
        total += math.exp(marginal_saturated(table, prior).value)
    assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize('N', range(1, 5))
def test_qi_marginal_normalises(N):
    cells = [C(1, 1), C(1, 2), C(2, 1), C(2, 2)]
    prior = make_prior(cells, 0.7)
    total = 0.0
    for n in compositions(N, 4):
        table = ContingencyTable(row_labels=['a', 'b'], col_labels=['x', 'y'], counts=dict(zip(cells, n)))
        total += math.exp(marginal_qi(table, prior).value)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_cancer_conventional_ratio(cancer_table):
    prior = table_prior(cancer_table, 1.0)
    ratio = math.exp(marginal_qi(cancer_table, prior).value - marginal_saturated(cancer_table, prior).value)
    assert ratio == pytest.approx(0.54987, abs=1e-4)
    assert round(ratio, 2) == 0.55


def test_cancer_decomposition(cancer_table):
    isolated, rows, cols, block = qi_decomposition(free_cells(cancer_table))
    assert isolated == [C(3, 1), C(4, 2)]
    assert rows == [1, 2, 5]
    assert cols == [1, 2]
    assert len(block) == 6


def test_qi_marginal_matches_monte_carlo(cancer_table):
    """Integrate the factorised QI likelihood against its Dirichlet priors."""
    counts = {C(1, 1): 1, C(1, 2): 0, C(2, 1): 1, C(2, 2): 0, C(3, 1): 1, C(4, 2): 1, C(5, 1): 0, C(5, 2): 1}
    table = with_counts(cancer_table, counts)
    exact = math.exp(marginal_qi(table, table_prior(table, 1.0)).value)

    rng = np.random.default_rng(20240521)
    cells = free_cells(table)
    n = np.array([counts[cell] for cell in cells], dtype=float)
    log_coef = gammaln(n.sum() + 1) - gammaln(n + 1).sum()
    row_index = {1: 0, 2: 1, 5: 2}
    samples = []
    for _ in range(10):
        size = 100_000
        lam = rng.dirichlet([1, 1, 6], size)
        rows = rng.dirichlet([2, 2, 2], size)
        cols = rng.dirichlet([3, 3], size)
        theta = np.empty((size, len(cells)))
        for k, cell in enumerate(cells):
            if cell == C(3, 1):
                theta[:, k] = lam[:, 0]
            elif cell == C(4, 2):
                theta[:, k] = lam[:, 1]
            else:
                theta[:, k] = lam[:, 2] * rows[:, row_index[cell.row]] * cols[:, cell.col - 1]
        samples.append(np.exp(log_coef + (n * np.log(theta)).sum(axis=1)))
    values = np.concatenate(samples)
    standard_error = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean() - exact) <= 3 * standard_error


def test_positive_count_outside_support(cancer_table):
    prior = restrict_prior(table_prior(cancer_table, 1.0), [cell for cell in free_cells(cancer_table)
                                                           if cell != C(1, 1)])
    with pytest.raises(InconsistentInstanceError, match=r'\(1,1\)'):
        marginal_saturated(cancer_table, prior)


def test_unsupported_pattern(data_dir):
    table = load_table_file(data_dir / 'diagonal_3x3.json')
    with pytest.raises(UnsupportedPatternError) as excinfo:
        marginal_qi(table, table_prior(table, 1.0))
    assert excinfo.value.cells == [C(1, 1), C(2, 2), C(3, 3)]
    assert excinfo.value.exit_code == 4


def test_restricted_qi_instance_falls_back_to_saturated():
    zeros = {C(1, 1), C(2, 2)}
    counts = {C(1, 2): 4, C(1, 3): 2, C(2, 1): 3, C(2, 3): 5, C(3, 1): 1, C(3, 2): 6, C(3, 3): 0}
    table = ContingencyTable(row_labels='abc', col_labels='xyz', counts=counts, structural_zeros=zeros)
    support = [cell for cell in free_cells(table) if cell != C(3, 3)]
    instance = ModelInstance(support=0b0111111, zero_cell_count=1,
                             restricted_design=DesignMatrix(cells=support, param_names=['t'],
                                                            entries=[[1]] * len(support)),
                             label='QI_1_1', model_name='QI')
    prior = table_prior(table, 1.0)
    marginal = instance_log_marginal(table, instance, prior)
    assert marginal.method == 'saturated'
    assert marginal.value == pytest.approx(marginal_saturated(table, restrict_prior(prior, support)).value)

    with pytest.raises(UnsupportedPatternError):
        instance_log_marginal(table, replace(instance, zero_cell_count=0), restrict_prior(prior, support))


def test_marginals_stay_finite_for_large_counts():
    counts = {C(1, 1): 250_000, C(1, 2): 250_000, C(2, 1): 250_000, C(2, 2): 250_000}
    table = ContingencyTable(row_labels='ab', col_labels='xy', counts=counts)
    prior = table_prior(table, 1.0)
    for marginal in (marginal_qi(table, prior), marginal_saturated(table, prior)):
        assert math.isfinite(marginal.value)
        assert marginal.value < 0


# Prior algebra

def test_restrict_prior(cancer_table):
    prior = table_prior(cancer_table, 1.0)
    sz1 = restrict_prior(prior, [cell for cell in prior.support if cell != C(5, 1)])
    assert len(sz1.support) == 7 and sz1.values() == [1.0] * 7
    assert restrict_prior(prior, prior.support) == prior

    small = make_prior([C(1, 1), C(1, 2), C(1, 3)], {C(1, 1): 2, C(1, 2): 3, C(1, 3): 5})
    assert restrict_prior(small, [C(1, 2), C(1, 1)]).values() == [2.0, 3.0]
    with pytest.raises(InconsistentInstanceError):
        restrict_prior(small, [])


def test_aggregate_alpha(cancer_table):
    prior = table_prior(cancer_table, 1.0)
    block_rows = [[cell for cell in prior.support if cell.row == r] for r in (1, 2, 5)]
    rest = [C(3, 1), C(4, 2)]
    assert aggregate_alpha(prior, block_rows + [rest]) == [2, 2, 2, 2]

    others = [cell for cell in prior.support if cell not in rest]
    assert aggregate_alpha(prior, [[C(3, 1)], [C(4, 2)], others]) == [1, 1, 6]

    halves = make_prior(prior.support, 0.5)
    assert aggregate_alpha(halves, [prior.support[:4], prior.support[4:]]) == [2, 2]


@pytest.mark.parametrize('blocks', [
    [[C(1, 1), C(1, 2)], [C(1, 2), C(2, 1)]],
    [[C(1, 1)]],
    [[C(1, 1), C(1, 2), C(2, 1)], [C(9, 9)]],
])
def test_aggregate_alpha_rejects_bad_partitions(blocks):
    prior = make_prior([C(1, 1), C(1, 2), C(2, 1)], 1.0)
    with pytest.raises(ValueError):
        aggregate_alpha(prior, blocks)


def test_aggregated_block_means(cancer_table):
    prior = make_prior(free_cells(cancer_table), {cell: 0.5 + k for k, cell in enumerate(free_cells(cancer_table))})
    blocks = [prior.support[:3], prior.support[3:5], prior.support[5:]]
    aggregated = aggregate_alpha(prior, blocks)
    assert sum(aggregated) == pytest.approx(prior.total)

    draws = np.random.default_rng(7).dirichlet(prior.values(), 200_000)
    sums = [draws[:, :3].sum(axis=1), draws[:, 3:5].sum(axis=1), draws[:, 5:].sum(axis=1)]
    for block_sum, alpha_b in zip(sums, aggregated):
        assert block_sum.mean() == pytest.approx(alpha_b / prior.total, abs=3e-3)


# Bayes factors

def test_headline_bayes_factors(cancer_table, qi_run, sz_run):
    qi, sz = families(cancer_table, qi_run, sz_run, 0.1)
    prior = table_prior(cancer_table, 1.0)

    mixture = mixture_bayes_factor(cancer_table, qi, sz, prior, alpha_bar=1.0)
    assert mixture.bf_qi_vs_sz == pytest.approx(0.17293, abs=1e-4)
    assert round(mixture.bf_qi_vs_sz, 2) == 0.17
    assert mixture.log10_against_qi == pytest.approx(math.log10(1 / mixture.bf_qi_vs_sz), rel=1e-12)
    # 0.77 only comes out after rounding the factor to 0.17 first
    assert round(mixture.log10_against_qi, 2) == 0.76
    assert mixture.weights_used['SZ'] == [
        {'label': 'SZ_0', 'z': 0, 'weight': pytest.approx(0.4305, abs=1e-4)},
        {'label': 'SZ_1', 'z': 1, 'weight': pytest.approx(0.0478, abs=1e-4)},
    ]
    assert [w['label'] for w in mixture.weights_used['QI']] == ['QI_0']
    assert mixture.evidence_class is EvidenceClass.SUBSTANTIAL
    assert [t.label for t in mixture.sz_terms] == ['SZ_0', 'SZ_1']

    conventional = mixture_bayes_factor(cancer_table, qi, sz, prior, mode='conventional')
    assert conventional.bf_qi_vs_sz == pytest.approx(0.54987, abs=1e-4)
    assert round(conventional.log10_against_qi, 2) == 0.26
    assert conventional.evidence_class is EvidenceClass.POOR
    assert conventional.bf_conventional == mixture.bf_conventional


def test_sz1_to_sz0_marginal_ratio(cancer_table, qi_run, sz_run):
    qi, sz = families(cancer_table, qi_run, sz_run, 0.1)
    report = mixture_bayes_factor(cancer_table, qi, sz, table_prior(cancer_table, 1.0))
    sz0, sz1 = report.sz_terms
    assert math.exp(sz1.log_marginal - sz0.log_marginal) == pytest.approx(299 / 7, rel=1e-10)


def test_tiny_xi_recovers_conventional(cancer_table, qi_run, sz_run):
    qi, sz = families(cancer_table, qi_run, sz_run, 1e-9)
    report = mixture_bayes_factor(cancer_table, qi, sz, table_prior(cancer_table, 1.0))
    assert report.bf_qi_vs_sz == pytest.approx(report.bf_conventional, rel=1e-6)


def test_multinomial_coefficients_cancel(cancer_table, qi_run, sz_run):
    qi, sz = families(cancer_table, qi_run, sz_run, 0.1)
    prior = table_prior(cancer_table, 1.0)
    with_coef = mixture_bayes_factor(cancer_table, qi, sz, prior)
    without = mixture_bayes_factor(cancer_table, qi, sz, prior, include_coefficient=False)
    assert without.bf_qi_vs_sz == pytest.approx(with_coef.bf_qi_vs_sz, rel=1e-12)


def test_empty_family_is_rejected(cancer_table, qi_run, sz_run):
    qi, sz = families(cancer_table, qi_run, sz_run, 0.1)
    with pytest.raises(InconsistentInstanceError):
        mixture_bayes_factor(cancer_table, replace(qi, instances=()), sz, table_prior(cancer_table, 1.0))


def test_unknown_mode(cancer_table, qi_run, sz_run):
    qi, sz = families(cancer_table, qi_run, sz_run, 0.1)
    with pytest.raises(ValueError, match='Unknown mode'):
        mixture_bayes_factor(cancer_table, qi, sz, table_prior(cancer_table, 1.0), mode='bic')


# Posterior and Jeffreys scale

def test_posterior_model_prob():
    assert posterior_model_prob(1.0, 0.5) == 0.5
    assert posterior_model_prob(0.17, 1.0) == 1.0
    assert posterior_model_prob(0.17, 0.5) == pytest.approx(0.17 / 1.17)
    assert posterior_model_prob(3.0, 0.0) == 0.0


def test_posterior_is_increasing():
    grid = [0.05, 0.2, 0.5, 0.8, 0.95]
    for p in grid:
        values = [posterior_model_prob(bf, p) for bf in (0.01, 0.17, 1.0, 5.0, 100.0)]
        assert values == sorted(values) and len(set(values)) == len(values)
    for bf in (0.17, 1.0, 4.0):
        values = [posterior_model_prob(bf, p) for p in grid]
        assert values == sorted(values) and len(set(values)) == len(values)


@pytest.mark.parametrize('bf, p', [(0.0, 0.5), (-1.0, 0.5), (1.0, 1.5)])
def test_posterior_rejects(bf, p):
    with pytest.raises(NumericError):
        posterior_model_prob(bf, p)


@pytest.mark.parametrize('bf, expected', [
    (0.17, EvidenceClass.SUBSTANTIAL),
    (0.55, EvidenceClass.POOR),
    (0.05, EvidenceClass.STRONG),
    (0.005, EvidenceClass.DECISIVE),
    (1.0, EvidenceClass.SUPPORTS_QI),
    (2.0, EvidenceClass.SUPPORTS_QI),
])
def test_jeffreys_class(bf, expected):
    assert jeffreys_class(bf) is expected


def test_jeffreys_boundaries_are_right_closed():
    assert EvidenceClass.from_log10(0.5) is EvidenceClass.POOR
    assert EvidenceClass.from_log10(1.0) is EvidenceClass.SUBSTANTIAL
    assert EvidenceClass.from_log10(2.0) is EvidenceClass.STRONG
    assert EvidenceClass.from_log10(0.0) is EvidenceClass.SUPPORTS_QI


# Calibration

def test_calibration_reproduces_published_values(cancer_table, qi_run, sz_run):
    report = calibrate_alpha(cancer_table, 0.1, [0.5, 1.0], qi_run.instances, sz_run.instances,
                             reference=cancer_table)
    bf = report.as_mapping()
    assert bf[1.0] == pytest.approx(1.02578, abs=1e-4)
    assert bf[0.5] == pytest.approx(0.67484, abs=1e-4)
    assert round(bf[1.0], 2) == 1.03 and round(bf[0.5], 2) == 0.67
    assert report.best_alpha == 1.0
    assert report.imaginary_counts == 8


def test_calibration_single_candidate(cancer_table, qi_run, sz_run):
    report = calibrate_alpha(cancer_table, 0.1, [1.0], qi_run.instances, sz_run.instances, reference=cancer_table)
    assert report.best_alpha == 1.0


def test_calibration_grid_does_not_worsen(cancer_table, qi_run, sz_run):
    grid = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
    report = calibrate_alpha(cancer_table, 0.1, grid, qi_run.instances, sz_run.instances, reference=cancer_table)
    best = report.as_mapping()[report.best_alpha]
    assert abs(best - 1) <= abs(1.02578 - 1) + 1e-4


def test_calibration_without_reference(cancer_table, qi_run, sz_run):
    report = calibrate_alpha(cancer_table, 0.1, [1.0], qi_run.instances, sz_run.instances)
    conventional = 2.33767
    weight_ratio = (1 - 0.1 ** 8) / 0.55336599
    assert report.points[0].bf_qi_vs_sz == pytest.approx(conventional * weight_ratio, rel=1e-4)


def test_calibration_needs_candidates(cancer_table, qi_run, sz_run):
    with pytest.raises(ValueError):
        calibrate_alpha(cancer_table, 0.1, [], qi_run.instances, sz_run.instances)


def test_make_prior_rejects_nonpositive_alpha(cancer_table):
    with pytest.raises(NumericError):
        table_prior(cancer_table, 0.0)
    with pytest.raises(NumericError):
        make_prior([C(1, 1)], {})
