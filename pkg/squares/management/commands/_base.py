"""
Shared plumbing for the squares management commands.

Every command accepts --n, --format, --jobs and --output, builds a RunConfig
and renders its result as json, csv or pretty text. Library errors become
CommandError with exit code 2 (validation) or 3 (budget).
"""
import csv
import io
import json
import logging

from django.core.management.base import BaseCommand, CommandError

from squares.config import OUTPUT_FORMATS, RunConfig
from squares.exceptions import BudgetExceeded, MagicSquaresError, PrecisionError, ValidationError

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


class SquaresCommand(BaseCommand):
    subcommand = None

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True, help='Side length of the magic squares')
        parser.add_argument('--format', choices=OUTPUT_FORMATS, help='Output format (default MAGIC_OUTPUT_FORMAT)')
        parser.add_argument('--jobs', type=int, help='Worker threads for sharded work (default MAGIC_JOBS)')
        parser.add_argument('--output', help='Write the report to this file instead of stdout')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, config: RunConfig, options: dict):
        raise NotImplementedError

    def as_json(self, result, config: RunConfig):
        raise NotImplementedError

    def as_rows(self, result, config: RunConfig):
        """Header row followed by data rows."""
        raise NotImplementedError

    def as_pretty(self, result, config: RunConfig) -> str:
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = RunConfig.from_options(self.subcommand, options)
            result = self.run(config, options)
        except BudgetExceeded as e:
            logger.error(f"{self.subcommand}: budget exceeded: {str(e)}")
            self.stderr.write(self.style.ERROR(f"Budget exceeded: {str(e)}"))
            if e.partial is not None:
                self.stderr.write(f"Partial result: {e.partial}")
            if e.resume_token is not None:
                self.stderr.write(f"Resume token: {e.resume_token}")
            raise CommandError(str(e), returncode=EXIT_BUDGET)
        except (ValidationError, PrecisionError) as e:
            logger.error(f"{self.subcommand}: {str(e)}")
            self.stderr.write(self.style.ERROR(f"Error: {str(e)}"))
            raise CommandError(str(e), returncode=EXIT_VALIDATION)
        except MagicSquaresError as e:
            logger.error(f"{self.subcommand} failed: {str(e)}")
            self.stderr.write(self.style.ERROR(f"Error: {str(e)}"))
            raise CommandError(str(e), returncode=EXIT_FAILURE)

        self.emit(self.render(result, config), config)

    def render(self, result, config: RunConfig) -> str:
        if config.output_format == 'json':
            return json.dumps(self.as_json(result, config), indent=2)
        if config.output_format == 'csv':
            buffer = io.StringIO()
            csv.writer(buffer, lineterminator='\n').writerows(self.as_rows(result, config))
            return buffer.getvalue().rstrip('\n')
        return self.as_pretty(result, config)

    def emit(self, text: str, config: RunConfig) -> None:
        if config.output:
            with open(config.output, 'w') as f:
                f.write(text + '\n')
            self.stdout.write(self.style.SUCCESS(f"Wrote {config.subcommand} report to {config.output}"))
            logger.info(f"Wrote {config.subcommand} report to {config.output}")
        else:
            self.stdout.write(text)
