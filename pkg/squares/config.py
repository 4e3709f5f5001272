"""
Run configuration shared by the management commands.

Command-line options override the MAGIC_* settings. Validation happens here,
before any computation is dispatched.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

from django.conf import settings

from squares.exceptions import ConfigError

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('basis', 'complexity', 'vertices', 'ehrhart', 'local_factors', 'constant', 'census')
OUTPUT_FORMATS = ('json', 'csv', 'pretty')


def parse_range(text: str) -> List[int]:
    """
    '2..13' → [2, ..., 13]; '2,3,7' → [2, 3, 7]; '5' → [5].

    Raises:
        ConfigError: On anything else
    """
    text = str(text).strip()
    try:
        if '..' in text:
            low, high = text.split('..', 1)
            low, high = int(low), int(high)
            if high < low:
                raise ConfigError(f"empty range {text!r}")
            return list(range(low, high + 1))
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as an integer range")


@dataclass
class RunConfig:
    subcommand: str
    n: int
    N: Optional[int] = None
    N_values: List[int] = field(default_factory=list)
    P_max: int = 100000
    precision: int = 20
    cache_dir: str = ''
    output_format: str = 'pretty'
    jobs: int = 1
    output: Optional[str] = None

    @classmethod
    def from_options(cls, subcommand: str, options: dict) -> "RunConfig":
        """
        Build a validated RunConfig from management command options.

        Raises:
            ConfigError: If any option is out of range
        """
        N_option = options.get('N')
        N_values = parse_range(options['range']) if options.get('range') else []
        config = cls(
            subcommand=subcommand,
            n=options.get('n'),
            N=None if N_option is None else int(N_option),
            N_values=N_values,
            P_max=options.get('p_max') or settings.MAGIC_P_MAX,
            precision=options.get('precision') or settings.MAGIC_PRECISION,
            cache_dir=settings.MAGIC_CACHE_DIR,
            output_format=options.get('format') or settings.MAGIC_OUTPUT_FORMAT,
            jobs=options.get('jobs') or settings.MAGIC_JOBS,
            output=options.get('output'),
        )
        config.validate()
        logger.debug(f"RunConfig: {config}")
        return config

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.n is None or self.n < 3:
            raise ConfigError(f"--n must be at least 3, got {self.n}")
        if self.N is not None and self.N < 0:
            raise ConfigError(f"N must be non-negative, got {self.N}")
        if any(v < 0 for v in self.N_values):
            raise ConfigError(f"N range must be non-negative, got {self.N_values}")
        if self.P_max < 2:
            raise ConfigError(f"P_max must be at least 2, got {self.P_max}")
        if self.precision < 1:
            raise ConfigError(f"precision must be positive, got {self.precision}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")
