import logging

from squares.exceptions import GuardViolation
from squares.management.commands._base import SquaresCommand
from squares.serializers import CountTableSerializer, QuasipolynomialSerializer
from squares.utils.ehrhart import CountTable, DIRECT, count_points, direct_table, interpolate_quasipolynomial, required_values
from squares.utils.magic_forms import build_system
from squares.utils.polytope import EXHAUSTIVE_MAX_DIMENSION, enumerate_vertices, format_rational

logger = logging.getLogger(__name__)

# K_5(1) has vertex denominators 3, 5, 7 and 8
PERIOD_LOWER_BOUND = 840


def format_branch(coefficients):
    terms = []
    for power in range(len(coefficients) - 1, -1, -1):
        c = coefficients[power]
        if c == 0:
            continue
        monomial = '' if power == 0 else ('N' if power == 1 else f"N^{power}")
        terms.append(f"({format_rational(c)}){monomial}" if monomial else format_rational(c))
    return ' + '.join(terms) or '0'


class Command(SquaresCommand):
    help = 'Ehrhart quasipolynomial E_n(N) counting magic squares with entries in [0, N]'
    subcommand = 'ehrhart'

    def add_command_arguments(self, parser):
        parser.add_argument('--period', type=int, help='Period to interpolate with (default: vertex denominator lcm)')
        parser.add_argument('--values-only', action='store_true', help='Print direct counts instead of interpolating')
        parser.add_argument('--to', type=int, default=8, help='Largest N for --values-only')
        parser.add_argument(
            '--direct-table',
            type=int,
            metavar='N_MAX',
            help='Cross-check: direct counts for every N in 0..N_MAX, then the interpolated values beside them',
        )
        parser.add_argument('--max-direct-n', type=int, help='Largest direct count interpolation may use')

    def run(self, config, options):
        system = build_system(config.n)
        if options.get('values_only'):
            table = CountTable(n=config.n)
            for N in range(options['to'] + 1):
                table.add(N, count_points(system, N, config.jobs), DIRECT)
            return table, None

        if system.d > EXHAUSTIVE_MAX_DIMENSION and not options.get('period'):
            needed = required_values(system.d, PERIOD_LOWER_BOUND)
            raise GuardViolation(
                f"the Ehrhart quasipolynomial of K_{config.n} is out of reach: degree {system.d} with period at least "
                f"{PERIOD_LOWER_BOUND} needs ({system.d} + 1)·{PERIOD_LOWER_BOUND} = {needed} values; "
                "use --values-only for direct counts"
            )
        period = options.get('period') or enumerate_vertices(system, config.jobs).denominator_lcm
        table = direct_table(system, options['direct_table'], config.jobs) if options.get('direct_table') is not None else CountTable(n=config.n)
        qp = interpolate_quasipolynomial(system, period, config.jobs, options.get('max_direct_n'), table)
        if options.get('direct_table') is not None:
            mismatches = [N for N in range(options['direct_table'] + 1) if qp(N) != table.get(N)]
            if mismatches:
                logger.warning(f"Interpolated values differ from direct counts at N={mismatches}")
                self.stderr.write(self.style.WARNING(f"Interpolated values differ from direct counts at N={mismatches}"))
        return table, qp

    def as_json(self, result, config):
        table, qp = result
        if qp is None:
            return CountTableSerializer(table).data
        return {'quasipolynomial': QuasipolynomialSerializer(qp).data, 'counts': CountTableSerializer(table).data}

    def as_rows(self, result, config):
        table, qp = result
        if qp is None:
            return [['N', 'count', 'provenance']] + [[e.N, e.count, e.provenance] for e in table.sorted_entries()]
        rows = [['residue', 'power', 'coefficient']]
        for r, branch in enumerate(qp.coefficients):
            rows.extend([r, k, format_rational(c)] for k, c in enumerate(branch))
        return rows

    def as_pretty(self, result, config):
        table, qp = result
        if qp is None:
            return "\n".join(f"E_{config.n}({e.N}) = {e.count}" for e in table.sorted_entries())
        lines = [f"E_{config.n}(N), degree {qp.degree}, period {qp.period}:"]
        for r, branch in enumerate(qp.coefficients):
            lines.append(f"  N ≡ {r} (mod {qp.period}): {format_branch(branch)}")
        return "\n".join(lines)
