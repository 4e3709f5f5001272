from sympy import isprime

from squares.config import parse_range
from squares.management.commands._base import SquaresCommand
from squares.serializers import LocalFactorSerializer, RankSpectrumSerializer, StableLocalPolynomialSerializer
from squares.utils.local_factors import SUBSET_MAX_FORMS, local_factor_table, rank_spectrum, stable_polynomial
from squares.utils.magic_forms import build_system
from squares.utils.polytope import format_rational


class Command(SquaresCommand):
    help = 'Local factors beta_p of the singular series for a range of primes'
    subcommand = 'local_factors'

    def add_command_arguments(self, parser):
        parser.add_argument('--p', default='2..13', help="Primes as a range '2..13' or a list '2,3,7'; non-primes are skipped")
        parser.add_argument('--spectrum', action='store_true', help='Also report the rank spectrum over Q')

    def run(self, config, options):
        system = build_system(config.n)
        primes = [p for p in parse_range(options['p']) if isprime(p)]
        factors = local_factor_table(system, primes)
        stable = stable_polynomial(system) if system.t <= SUBSET_MAX_FORMS else None
        spectrum = rank_spectrum(system) if options.get('spectrum') else None
        return factors, stable, spectrum

    def as_json(self, result, config):
        factors, stable, spectrum = result
        data = {'factors': LocalFactorSerializer(factors, many=True).data}
        if stable is not None:
            data['stable_polynomial'] = StableLocalPolynomialSerializer(stable).data
        if spectrum is not None:
            data['rank_spectrum'] = RankSpectrumSerializer(spectrum).data
        return data

    def as_rows(self, result, config):
        factors, _, _ = result
        rows = [['p', 'count', 'beta', 'beta_decimal']]
        for item in LocalFactorSerializer(factors, many=True).data:
            rows.append([item['p'], item['nonvanishing_count'], item['beta'], item['beta_decimal']])
        return rows

    def as_pretty(self, result, config):
        factors, stable, spectrum = result
        lines = []
        if stable is not None:
            lines.append(f"stable count for p >= {stable.p0}: {stable}")
        for factor in factors:
            lines.append(f"  p={factor.p}: count {factor.nonvanishing_count}, beta = {format_rational(factor.beta)} ≈ {float(factor.beta):.10g}")
        if spectrum is not None:
            for size in sorted(spectrum.counts):
                ranks = ', '.join(f"rank {r}: {c}" for r, c in spectrum.at(size).items())
                lines.append(f"  size {size}: {ranks}")
        return "\n".join(lines)
