import logging

from django.core.management.base import CommandError

from squares.management.commands._base import EXIT_FAILURE, SquaresCommand
from squares.serializers import FormSystemSerializer
from squares.utils.magic_forms import build_system, pairwise_independence_check, verify_z_basis

logger = logging.getLogger(__name__)


def format_form(coefficients):
    terms = []
    for j, a in enumerate(coefficients):
        if a == 0:
            continue
        sign = '-' if a < 0 else '+'
        body = f"x{j + 1}" if abs(a) == 1 else f"{abs(a)}·x{j + 1}"
        terms.append((sign, body))
    if not terms:
        return '0'
    text = ('-' if terms[0][0] == '-' else '') + terms[0][1]
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text


class Command(SquaresCommand):
    help = 'Print the Z-basis linear-form system for n×n magic squares and verify it'
    subcommand = 'basis'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--pairwise',
            action='store_true',
            help='Also check that no two cells are forced equal by the magic constraints',
        )

    def run(self, config, options):
        system = build_system(config.n)
        if not verify_z_basis(system):
            self.stderr.write(self.style.ERROR(f"The generated system for n={config.n} is not a Z-basis"))
            raise CommandError(f"basis verification failed for n={config.n}", returncode=EXIT_FAILURE)
        logger.info(f"Verified Z-basis for n={config.n}: t={system.t}, d={system.d}")
        pairwise = pairwise_independence_check(config.n) if options.get('pairwise') else None
        return system, pairwise

    def as_json(self, result, config):
        system, pairwise = result
        data = dict(FormSystemSerializer(system).data)
        data['verified'] = True
        if pairwise is not None:
            data['pairwise_independent'] = pairwise
        return data

    def as_rows(self, result, config):
        system, _ = result
        rows = [['cell', 'trivial'] + [f"x{j + 1}" for j in range(system.d)]]
        for form in system.forms:
            rows.append([form.cell_index, int(form.is_trivial)] + list(form.coefficients))
        return rows

    def as_pretty(self, result, config):
        system, pairwise = result
        lines = [
            f"n={system.n}: {system.t} forms in d={system.d} variables, {len(system.trivial_cells)} trivial",
            f"skeleton cells: {', '.join(str(c) for c in system.skeleton)}",
        ]
        width = len(str(system.t))
        for form in system.forms:
            lines.append(f"  cell {form.cell_index:>{width}}: {format_form(form.coefficients)}")
        lines.append("verified: Z-basis")
        if pairwise is not None:
            lines.append(f"pairwise independent cells: {pairwise}")
        return "\n".join(lines)
