import json
from dataclasses import asdict
from typing import Dict, List
import jsonschema
from rich.console import Console
from rich.table import Table
from ..config import JSON_INDENT
from ..models.report import AnalysisReport, BfReport, CalibrationReport

_NUMBER = {'type': 'number'}
_TERM = {
    'type': 'object',
    'required': ['label', 'z', 'weight', 'log_marginal', 'method'],
    'properties': {
        'label': {'type': 'string'},
        'z': {'type': 'integer', 'minimum': 0},
        'weight': {'type': 'number', 'minimum': 0},
        'log_marginal': _NUMBER,
        'method': {'enum': ['saturated', 'qi']},
    },
}
_WEIGHT = {
    'type': 'object',
    'required': ['label', 'z', 'weight'],
    'properties': {
        'label': {'type': 'string'},
        'z': {'type': 'integer', 'minimum': 0},
        'weight': {'type': 'number', 'minimum': 0},
    },
}

REPORT_SCHEMA = {
    'type': 'object',
    'required': ['table', 'cell_order', 'kernel', 'hilbert', 'models', 'weights', 'bayes_factor', 'provenance'],
    'properties': {
        'table': {'type': 'object', 'required': ['rows', 'cols', 'counts', 'structural_zeros', 'N']},
        'cell_order': {'type': 'array', 'items': {'type': 'string'}},
        'kernel': {
            'type': 'object',
            'required': ['basis_vectors', 'hnf_vectors', 'binomials_as_strings', 'zero_sum'],
            'properties': {
                'basis_vectors': {'type': 'array', 'items': {'type': 'array', 'items': {'type': 'integer'}}},
                'hnf_vectors': {'type': 'array', 'items': {'type': 'array', 'items': {'type': 'integer'}}},
                'binomials_as_strings': {'type': 'array', 'items': {'type': 'string'}},
                'zero_sum': {'type': 'boolean'},
            },
        },
        'hilbert': {
            'type': 'object',
            'required': ['size', 'generators', 'verified'],
            'properties': {
                'size': {'type': 'integer', 'minimum': 1},
                'generators': {'type': 'array',
                               'items': {'type': 'array', 'items': {'type': 'integer', 'minimum': 0}}},
                'verified': {'type': 'boolean'},
            },
        },
        'models': {
            'type': 'object',
            'additionalProperties': {
                'type': 'object',
                'required': ['generators', 'instances', 'consistent', 'by_zero_cells', 'normalizer', 'terms'],
                'properties': {
                    'generators': {'type': 'integer', 'minimum': 1},
                    'instances': {'type': 'integer', 'minimum': 1},
                    'consistent': {'type': 'integer', 'minimum': 1},
                    'by_zero_cells': {'type': 'object', 'additionalProperties': {'type': 'integer'}},
                    'normalizer': {'type': 'number', 'exclusiveMinimum': 0},
                    'terms': {'type': 'array', 'items': _TERM},
                },
            },
        },
        'weights': {'type': 'object', 'required': ['xi'], 'additionalProperties': _NUMBER},
        'bayes_factor': {
            'type': 'object',
            'required': ['mode', 'bf_qi_vs_sz', 'bf_conventional', 'log10_against_qi', 'evidence_class',
                         'posterior_prob_qi', 'posterior_prob_qi_conventional', 'model_prior_qi', 'xi',
                         'alpha_bar', 'log_bf_qi_vs_sz', 'weights_used'],
            'properties': {
                'mode': {'enum': ['mixture', 'conventional']},
                'bf_qi_vs_sz': {'type': 'number', 'exclusiveMinimum': 0},
                'bf_conventional': {'type': 'number', 'exclusiveMinimum': 0},
                'log10_against_qi': _NUMBER,
                'evidence_class': {'enum': ['supports QI', 'poor', 'substantial', 'strong', 'decisive']},
                'posterior_prob_qi': {'type': 'number', 'minimum': 0, 'maximum': 1},
                'posterior_prob_qi_conventional': {'type': 'number', 'minimum': 0, 'maximum': 1},
                'model_prior_qi': {'type': 'number', 'minimum': 0, 'maximum': 1},
                'xi': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 1},
                'alpha_bar': {'type': ['number', 'null']},
                'log_bf_qi_vs_sz': _NUMBER,
                'weights_used': {
                    'type': 'object',
                    'additionalProperties': {'type': 'array', 'items': _WEIGHT},
                },
            },
        },
        'provenance': {'type': 'object', 'required': ['xi', 'alpha_bar', 'mode', 'versions']},
    },
}


def bayes_factor_document(bf: BfReport) -> Dict:
    doc = asdict(bf)
    doc['evidence_class'] = bf.evidence_class.value
    del doc['qi_terms'], doc['sz_terms']
    return doc


def report_document(report: AnalysisReport) -> Dict:
    """JSON-ready mapping of an analysis; key order is fixed."""
    return {
        'table': report.table,
        'cell_order': report.cell_order,
        'kernel': {
            'basis_vectors': report.basis_vectors,
            'hnf_vectors': report.hnf_vectors,
            'binomials_as_strings': report.binomials,
            'zero_sum': report.zero_sum_kernel,
        },
        'hilbert': {
            'size': len(report.hilbert_generators),
            'generators': report.hilbert_generators,
            'verified': report.hilbert_verified,
        },
        'models': {
            name: {
                'generators': summary.generator_count,
                'instances': summary.instance_count,
                'consistent': summary.consistent_count,
                'by_zero_cells': {str(z): n for z, n in summary.by_zero_cells.items()},
                'normalizer': summary.normalizer,
                'terms': [asdict(term) for term in summary.weights],
            }
            for name, summary in report.models.items()
        },
        'weights': report.weight_row,
        'bayes_factor': bayes_factor_document(report.bayes_factor),
        'provenance': report.provenance,
    }


def validate_report(doc: Dict) -> None:
    """Raise jsonschema.ValidationError when ``doc`` is not a valid analysis report."""
    jsonschema.validate(instance=doc, schema=REPORT_SCHEMA)


def to_json(doc) -> str:
    return json.dumps(doc, indent=JSON_INDENT, ensure_ascii=False)


def _counts_table(doc: Dict) -> Table:
    table = Table(title=f"Observed table (N={doc['N']})")
    table.add_column('')
    for label in doc['cols']:
        table.add_column(label, justify='right')
    for label, line in zip(doc['rows'], doc['counts']):
        table.add_row(label, *['-' if n is None else str(n) for n in line])
    return table


def render_text(report: AnalysisReport, console: Console) -> None:
    """Human-readable report: table, binomials, Hilbert basis, instances, weights, verdict."""
    console.print(_counts_table(report.table))

    console.print("\n[bold cyan]Kernel binomials:[/bold cyan]")
    if not report.binomials:
        console.print("  none (saturated model)")
    for binomial in report.binomials:
        console.print(f"  {binomial} = 0")

    verified = 'verified' if report.hilbert_verified else '[red]not verified[/red]'
    console.print(f"\n[bold cyan]Hilbert basis:[/bold cyan] u = {len(report.hilbert_generators)} generators ({verified})")

    instances = Table(title="Model instances")
    for column in ('model', 'generators', 'instances', 'consistent', 'C(xi)'):
        instances.add_column(column, justify='right')
    for name, summary in report.models.items():
        instances.add_row(name, str(summary.generator_count), str(summary.instance_count),
                          str(summary.consistent_count), f"{summary.normalizer:.6f}")
    console.print(instances)

    weights = Table(title="Prior weights of the consistent instances")
    for label in report.weight_row:
        weights.add_column(label, justify='right')
    weights.add_row(*[f"{value:.4f}" for value in report.weight_row.values()])
    console.print(weights)

    bf = report.bayes_factor
    console.print(f"\n[bold cyan]Bayes factor ({bf.mode}):[/bold cyan] BF(QI:SZ) = {bf.bf_qi_vs_sz:.4f}")
    console.print(f"[green]Conventional BF:[/green] {bf.bf_conventional:.4f}")
    console.print(f"[green]log10 BF(SZ:QI):[/green] {bf.log10_against_qi:.4f}")
    console.print(f"[green]Evidence against QI:[/green] {bf.evidence_class.value}")
    console.print(f"[green]Pr(QI | n):[/green] {bf.posterior_prob_qi:.4f} "
                  f"(conventional {bf.posterior_prob_qi_conventional:.4f}, prior {bf.model_prior_qi})")


def render_calibration(report: CalibrationReport, console: Console) -> None:
    table = Table(title=f"Imaginary-sample calibration (xi={report.xi}, {report.imaginary_counts} counts)")
    table.add_column('alpha', justify='right')
    table.add_column('BF(SZ:QI)', justify='right')
    table.add_column('BF(QI:SZ)', justify='right')
    for point in report.points:
        marker = ' *' if point.alpha_bar == report.best_alpha else ''
        table.add_row(f"{point.alpha_bar}{marker}", f"{point.bf_sz_vs_qi:.4f}", f"{point.bf_qi_vs_sz:.4f}")
    console.print(table)


def render_weights(rows: List[Dict[str, float]], console: Console) -> None:
    table = Table(title="Prior weights of the data-consistent instances")
    labels = list(rows[0]) if rows else []
    for label in labels:
        table.add_column(label, justify='right')
    for row in rows:
        table.add_row(*[f"{row[label]:.4f}" if label != 'xi' else str(row[label]) for label in labels])
    console.print(table)
