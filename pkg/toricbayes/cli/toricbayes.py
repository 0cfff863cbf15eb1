#!/usr/bin/env python3

import argparse
import sys
from rich.console import Console
from rich.markup import escape
from toricbayes.config import EXIT_CODES, HILBERT_VERIFY_BOUND, QI_MODEL, SZ_MODEL, TABLE1_XI_GRID
from toricbayes.services.lattice import load_design
from toricbayes.services.pipeline import (calibration_document, hilbert_document, instances_document,
                                          kernel_document, model_design, run_analysis, run_calibration,
                                          run_weights)
from toricbayes.services.report import (render_calibration, render_text, render_weights,
                                        report_document, to_json)
from toricbayes.services.tables import load_table_file
from toricbayes.utils.config_manager import config_manager
from toricbayes.utils.errors import TableFormatError, ToricBayesError
from toricbayes.utils.logger import get_logger

console = Console()
err_console = Console(stderr=True)
logger = get_logger('cli')

MODELS = {'qi': QI_MODEL, 'sz': SZ_MODEL}


def float_list(raw):
    """Parse '0.5,1.0,...' into a list of floats"""
    try:
        values = [float(item) for item in raw.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def emit_json(doc):
    print(to_json(doc))


def design_from_args(args):
    """Design given with --design, else the chosen model's design on --input"""
    if args.design:
        try:
            with open(args.design, 'rb') as f:
                return load_design(f)
        except OSError as e:
            raise TableFormatError(f"Cannot read design {args.design}: {e}") from e
    return model_design(load_table_file(args.input), MODELS[args.model])


def show_config():
    """Display current configuration"""
    config = config_manager.get_config()
    console.print("\n[bold cyan]Current Configuration:[/bold cyan]")
    console.print(f"[green]xi:[/green] {config.get('xi', 'Not set')}")
    console.print(f"[green]alpha:[/green] {config.get('alpha', 'Not set')}")
    console.print(f"[green]Model prior (QI):[/green] {config.get('model_prior', 'Not set')}")
    console.print(f"[green]Calibration alphas:[/green] {config.get('calibration_alphas', 'Not set')}")
    console.print("\n[bold cyan]Capacity budgets:[/bold cyan]")
    for key, value in config_manager.get_budgets().items():
        console.print(f"[green]{key}:[/green] {value}")
    console.print()


def update_config(args):
    """Update configuration with new values"""
    current_config = config_manager.get_config()
    changes_made = False

    if args.xi is not None:
        if 0 < args.xi < 1:
            current_config['xi'] = args.xi
            changes_made = True
        else:
            err_console.print("[red]Error: xi must lie strictly between 0 and 1.[/red]")
            return EXIT_CODES['numeric']

    if args.alpha is not None:
        if args.alpha > 0:
            current_config['alpha'] = args.alpha
            changes_made = True
        else:
            err_console.print("[red]Error: alpha must be positive.[/red]")
            return EXIT_CODES['numeric']

    if args.model_prior is not None:
        if 0 <= args.model_prior <= 1:
            current_config['model_prior'] = args.model_prior
            changes_made = True
        else:
            err_console.print("[red]Error: model prior must lie between 0 and 1.[/red]")
            return EXIT_CODES['numeric']

    if args.calibration_alphas is not None:
        if all(a > 0 for a in args.calibration_alphas):
            current_config['calibration_alphas'] = args.calibration_alphas
            changes_made = True
        else:
            err_console.print("[red]Error: calibration alphas must be positive.[/red]")
            return EXIT_CODES['numeric']

    if changes_made:
        console.print("[yellow]Updating configuration...[/yellow]")
        config_manager.update_config(current_config)
        console.print("[green]Configuration updated successfully![/green]")
        show_config()
    else:
        console.print("[yellow]No changes specified. Use --help to see available options.[/yellow]")
    return 0


def analyze(args):
    table = load_table_file(args.input)
    report = run_analysis(table, xi=args.xi, alpha=args.alpha, model_prior=args.model_prior,
                          mode=args.mode, verify_bound=args.verify_bound)
    if args.format == 'text':
        render_text(report, console)
    else:
        emit_json(report_document(report))


def kernel(args):
    emit_json(kernel_document(design_from_args(args)))


def hilbert(args):
    emit_json(hilbert_document(design_from_args(args), verify_bound=args.verify_bound))


def instances(args):
    consistent_with = load_table_file(args.consistent_with) if args.consistent_with else None
    emit_json(instances_document(design_from_args(args), MODELS[args.model], consistent_with))


def calibrate(args):
    table = load_table_file(args.input)
    report = run_calibration(table, xi=args.xi, alphas=args.alphas, use_reference=not args.no_reference)
    if args.format == 'text':
        render_calibration(report, console)
    else:
        emit_json(calibration_document(report))


def weights(args):
    rows = run_weights(load_table_file(args.input), args.xis)
    if args.format == 'text':
        render_weights(rows, console)
    else:
        emit_json(rows)


def add_design_source(parser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--input', help='Table file (.json or .csv)')
    source.add_argument('--design', help='Design matrix JSON file')
    parser.add_argument('--model', choices=sorted(MODELS), default='qi',
                        help='Model whose design is built from --input (default: qi)')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='toric-bayes',
        description='toric-bayes - Bayesian analysis of contingency tables with structural zeros'
    )
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    subparsers.add_parser('show', help='Display current configuration')

    set_parser = subparsers.add_parser('set', help='Update configuration values')
    set_parser.add_argument('--xi', type=float, help='Chance that a free cell has zero probability (0-1)')
    set_parser.add_argument('--alpha', type=float, help='Shared Dirichlet hyperparameter')
    set_parser.add_argument('--model-prior', type=float, help='Prior probability of QI (0-1)')
    set_parser.add_argument('--calibration-alphas', type=float_list, help='Default calibration grid, e.g. 0.5,1.0')

    analyze_parser = subparsers.add_parser('analyze', help='Full analysis of a table')
    analyze_parser.add_argument('--input', required=True, help='Table file (.json or .csv)')
    analyze_parser.add_argument('--xi', type=float, help='Instance prior parameter (default from config)')
    analyze_parser.add_argument('--alpha', type=float, help='Shared Dirichlet hyperparameter (default from config)')
    analyze_parser.add_argument('--model-prior', type=float, help='Prior probability of QI (default from config)')
    analyze_parser.add_argument('--mode', choices=['mixture', 'conventional'], default='mixture')
    analyze_parser.add_argument('--format', choices=['json', 'text'], default='json')
    analyze_parser.add_argument('--verify-bound', type=int, default=HILBERT_VERIFY_BOUND,
                                help='Degree up to which the Hilbert basis is checked (0 skips)')

    kernel_parser = subparsers.add_parser('kernel', help='Integer kernel and binomials of a design')
    add_design_source(kernel_parser)

    hilbert_parser = subparsers.add_parser('hilbert', help='Minimal Hilbert basis of a design')
    add_design_source(hilbert_parser)
    hilbert_parser.add_argument('--verify-bound', type=int, default=HILBERT_VERIFY_BOUND,
                                help='Degree up to which the basis is checked (0 skips)')

    instances_parser = subparsers.add_parser('instances', help='Enumerate model instances')
    add_design_source(instances_parser)
    instances_parser.add_argument('--consistent-with', help='Keep only instances consistent with this table')

    calibrate_parser = subparsers.add_parser('calibrate', help='Imaginary-sample calibration of alpha')
    calibrate_parser.add_argument('--input', required=True, help='Table file giving the layout and reference data')
    calibrate_parser.add_argument('--xi', type=float, help='Instance prior parameter (default from config)')
    calibrate_parser.add_argument('--alphas', type=float_list, help='Candidates, e.g. 0.5,1.0')
    calibrate_parser.add_argument('--no-reference', action='store_true',
                                  help="Use the imaginary sample's own consistent instances")
    calibrate_parser.add_argument('--format', choices=['json', 'text'], default='json')

    weights_parser = subparsers.add_parser('weights', help='Prior weights of the consistent instances over xi')
    weights_parser.add_argument('--input', required=True, help='Table file (.json or .csv)')
    weights_parser.add_argument('--xis', type=float_list, default=TABLE1_XI_GRID, help='Grid, e.g. 0.1,0.2')
    weights_parser.add_argument('--format', choices=['json', 'text'], default='json')

    return parser


COMMANDS = {
    'analyze': analyze,
    'kernel': kernel,
    'hilbert': hilbert,
    'instances': instances,
    'calibrate': calibrate,
    'weights': weights,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == 'show':
        show_config()
        return 0
    if args.command == 'set':
        return update_config(args)
    if args.command not in COMMANDS:
        parser.print_help()
        return 0

    try:
        COMMANDS[args.command](args)
    except ToricBayesError as e:
        logger.error(f"{args.command} failed: {e}")
        err_console.print(f"[red]Error: {escape(str(e))}[/red]")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error in {args.command}")
        err_console.print(f"[red]Unexpected error: {escape(str(e))}[/red]")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
