from squares.management.commands._base import SquaresCommand
from squares.serializers import ComplexityReportSerializer
from squares.utils.complexity import i_complexity, row_reduce_nontrivial, system_complexity
from squares.utils.magic_forms import build_system
from squares.utils.polytope import format_rational


class Command(SquaresCommand):
    help = 'Cauchy-Schwarz complexity of the magic-square form system, with partition certificates'
    subcommand = 'complexity'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--confirm',
            action='store_true',
            help='Exhaustively confirm that the witness form has no partition with one block fewer',
        )
        parser.add_argument(
            '--reduction',
            action='store_true',
            help='Also print the row-reduced nontrivial block (n >= 5)',
        )

    def run(self, config, options):
        system = build_system(config.n)
        report = system_complexity(system, config.jobs)
        confirmation = None
        if options.get('confirm') and report.s and report.mode == 'exhaustive':
            below = i_complexity(system, report.lower_bound_witness, report.s - 1)
            confirmation = below is None
        reduction = row_reduce_nontrivial(system) if options.get('reduction') else None
        return report, confirmation, reduction

    def as_json(self, result, config):
        report, confirmation, reduction = result
        data = dict(ComplexityReportSerializer(report).data)
        if confirmation is not None:
            data['minimal_confirmed'] = confirmation
        if reduction is not None:
            data['reduction'] = {
                'pivot_columns': list(reduction.pivot_columns),
                'integral': reduction.integral,
                'matrix': [[format_rational(v) for v in row] for row in reduction.matrix.to_rows()],
            }
        return data

    def as_rows(self, result, config):
        report, _, _ = result
        rows = [['form_index', 's', 'blocks']]
        for cert in report.certificates:
            rows.append([cert.form_index, cert.s, ' | '.join(' '.join(str(j) for j in block) for block in cert.blocks)])
        return rows

    def as_pretty(self, result, config):
        report, confirmation, reduction = result
        value = 'infinite' if report.is_infinite else str(report.s)
        lines = [f"n={config.n}: complexity {value} ({report.mode} mode, {len(report.certificates)} certificates)"]
        if report.lower_bound_witness is not None:
            lines.append(f"lower bound witness: form {report.lower_bound_witness}")
        if confirmation is not None:
            lines.append(f"no partition with {report.s} blocks for the witness: {confirmation}")
        if reduction is not None:
            lines.append(f"nontrivial block: rank {reduction.rank}, pivots {list(reduction.pivot_columns)}, integral {reduction.integral}")
        return "\n".join(lines)
