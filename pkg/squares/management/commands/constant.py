import mpmath

from squares.management.commands._base import SquaresCommand
from squares.serializers import SingularSeriesResultSerializer
from squares.utils.polytope import format_rational
from squares.utils.singular_series import singular_constant


class Command(SquaresCommand):
    help = 'The singular series constant for n×n magic squares of primes (n = 3, 4)'
    subcommand = 'constant'

    def add_command_arguments(self, parser):
        parser.add_argument('--p-max', type=int, help='Largest prime in the Euler product (default MAGIC_P_MAX)')
        parser.add_argument('--precision', type=int, help='Decimal digits (default MAGIC_PRECISION)')
        parser.add_argument('--tolerance', type=float, help='Warn if the tail estimate exceeds this absolute error')

    def run(self, config, options):
        return singular_constant(config.n, config.P_max, config.precision, options.get('tolerance'), jobs=config.jobs)

    def as_json(self, result, config):
        return SingularSeriesResultSerializer(result, context={'digits': config.precision}).data

    def as_rows(self, result, config):
        data = self.as_json(result, config)
        return [list(data.keys()), list(data.values())]

    def as_pretty(self, result, config):
        return "\n".join([
            f"S_{result.n} ≈ {mpmath.nstr(result.value, config.precision)}",
            f"  volume of K_{result.n}(1): {format_rational(result.volume)}",
            f"  exceptional prefactor (p < {result.p0}): {format_rational(result.exceptional_prefactor)}",
            f"  Euler product over {result.p0} <= p <= {result.P_max}: {mpmath.nstr(result.truncated_product, config.precision)}",
            f"  relative tail bound: {mpmath.nstr(result.tail_relative, 3)}",
        ])
