from squares.management.commands._base import SquaresCommand
from squares.serializers import VertexSetSerializer
from squares.utils.magic_forms import build_system
from squares.utils.polytope import enumerate_vertices, sample_vertices, volume_lower_bound, format_rational


class Command(SquaresCommand):
    help = 'Vertices of the polytope K_n(1) of magic squares with entries in [0, 1]'
    subcommand = 'vertices'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--sample',
            type=int,
            help='Sample this many random tight sets instead of enumerating exhaustively',
        )
        parser.add_argument('--seed', type=int, default=0, help='Seed for --sample')

    def run(self, config, options):
        system = build_system(config.n)
        if options.get('sample') is not None:
            vertex_set = sample_vertices(system, options['sample'], options.get('seed'))
        else:
            vertex_set = enumerate_vertices(system, config.jobs)
        return vertex_set, volume_lower_bound(system)

    def as_json(self, result, config):
        vertex_set, lower = result
        data = dict(VertexSetSerializer(vertex_set).data)
        data['volume_lower_bound'] = format_rational(lower)
        return data

    def as_rows(self, result, config):
        vertex_set, _ = result
        d = len(vertex_set.vertices[0].coordinates) if len(vertex_set) else 0
        return [[f"x{j + 1}" for j in range(d)]] + [v.to_strings() for v in vertex_set.vertices]

    def as_pretty(self, result, config):
        vertex_set, _ = result
        lines = [','.join(v.to_strings()) for v in vertex_set.vertices]
        lines.append(f"{len(vertex_set)} vertices, denominator lcm {vertex_set.denominator_lcm}")
        return "\n".join(lines)
