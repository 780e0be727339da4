import logging
import sys
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError, CommandParser

from gpia.config import load_experiment_config
from gpia.exceptions import ArgumentError, ConfigError, NumericalError
from gpia.experiments import COMMANDS

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

HELP_TEXT = {
    "iterate": "Run gPIA and write value, policy, diffs and report CSVs.",
    "verify-mc": "Compare Monte-Carlo payoffs with the final gPIA value.",
    "coupling": "Estimate mirror-coupling separation probabilities.",
    "check": "Sample the standing assumptions on the coefficients.",
}


class UsageErrorParser(CommandParser):
    """Usage errors exit with EXIT_CONFIG instead of argparse's 2."""

    def error(self, message):
        if not self.called_from_command_line:
            super().error(message)
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed(value: str | None) -> int | None:
    if value is None:
        return None
    try:
        seed = int(value)
    except ValueError:
        seed = -1
    if not 0 <= seed < 2**64:
        raise CommandError(
            f"--seed deve ser um inteiro de 64 bits sem sinal (recebido: {value}).",
            returncode=EXIT_CONFIG,
        )
    return seed


class Command(BaseCommand):
    help = "Generalized policy iteration experiments for 1-D controlled diffusions."

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # same state as CommandParser, only error() differs
        parser.__class__ = UsageErrorParser
        return parser

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(
            dest="subcommand", required=True, parser_class=UsageErrorParser
        )
        for name, text in HELP_TEXT.items():
            sub = subparsers.add_parser(name, help=text)
            sub.add_argument("--config", required=True, help="JSON experiment file.")
            sub.add_argument("--out", default=None, help="Output directory.")
            sub.add_argument(
                "--seed",
                default=None,
                help="Unsigned 64-bit seed overriding the config seeds.",
            )

    def handle(self, *args, **options):
        name = options["subcommand"]
        seed = _seed(options["seed"])
        try:
            config = load_experiment_config(
                options["config"], seed=seed, output_dir=options["out"]
            )
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=EXIT_CONFIG) from exc
        except OSError as exc:
            raise CommandError(
                f"Falha ao ler {options['config']}: {exc}", returncode=EXIT_IO
            ) from exc

        out_dir = Path(config.output_dir)
        try:
            result = COMMANDS[name](config, out_dir)
        except (ConfigError, ArgumentError) as exc:
            raise CommandError(str(exc), returncode=EXIT_CONFIG) from exc
        except NumericalError as exc:
            raise CommandError(f"Falha numerica: {exc}", returncode=EXIT_NUMERICAL) from exc
        except OSError as exc:
            raise CommandError(f"Falha de escrita em {out_dir}: {exc}", returncode=EXIT_IO) from exc

        for path in result.files:
            self.stdout.write(f"  {path}")
        style = self.style.SUCCESS if result.ok else self.style.WARNING
        self.stdout.write(style(result.summary))
