import logging

from django.core.management.base import CommandError

from squares.management.commands._base import SquaresCommand
from squares.serializers import CensusResultSerializer
from squares.utils.prime_census import census
from squares.utils.singular_series import singular_constant

logger = logging.getLogger(__name__)


class Command(SquaresCommand):
    help = 'Count magic squares whose entries are all primes in [0, N]'
    subcommand = 'census'

    def add_command_arguments(self, parser):
        parser.add_argument('--N', type=int, help='Bound on the entries')
        parser.add_argument('--range', help="Several bounds, as '100,1000,10000' or '2..20'")
        parser.add_argument('--budget', type=float, help='Wall-clock budget in seconds per census (default MAGIC_CENSUS_BUDGET_SECONDS)')
        parser.add_argument('--resume', help='Resume token printed by a census that ran out of budget')
        parser.add_argument('--with-prediction', action='store_true', help='Add the predicted count and the ratio to it')
        parser.add_argument('--method', choices=['centre', 'walk'], help='Enumeration method (centre is n = 3 only)')

    def run(self, config, options):
        bounds = config.N_values or ([config.N] if config.N is not None else [])
        if not bounds:
            raise CommandError('census needs --N or --range', returncode=2)
        if options.get('resume') and len(bounds) != 1:
            raise CommandError('--resume applies to a single --N', returncode=2)
        constant = singular_constant(config.n).value if options.get('with_prediction') else None
        results = []
        for N in bounds:
            result = census(
                config.n, N, options.get('budget'), options.get('resume'), constant, options.get('method'), jobs=config.jobs
            )
            results.append(result)
        return results

    def as_json(self, result, config):
        return CensusResultSerializer(result, many=True).data

    def as_rows(self, result, config):
        rows = [['N', 'total', 'distinct', 'predicted', 'ratio']]
        for item in CensusResultSerializer(result, many=True).data:
            rows.append([item['N'], item['total_count'], item['distinct_entries_count'], item['predicted'] or '', item['ratio'] or ''])
        return rows

    def as_pretty(self, result, config):
        lines = []
        for item in result:
            line = f"N={item.N}: {item.total_count} prime magic squares, {item.distinct_entries_count} with distinct entries"
            if item.ratio is not None:
                line += f", ratio to prediction {float(item.ratio):.4f}"
            lines.append(line)
        return "\n".join(lines)
