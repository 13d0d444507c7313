from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from pydantic import ValidationError as SchemaError

from cli.choices import ExitCode, Subcommand
from cli.reports import describe_failures
from cli.runner import execute
from common.exceptions import PreconditionError, SetclashError


class Command(BaseCommand):
    help = "Run a setclash scenario (or a builtin demo) and write its JSON report and CSV trace"

    def add_arguments(self, parser):
        parser.add_argument(
            "subcommand",
            type=str,
            help=f"One of: {', '.join(Subcommand.values)}",
        )
        parser.add_argument(
            "target",
            type=str,
            help="Scenario JSON file, or the demo name for 'demo'",
        )
        parser.add_argument(
            "--out",
            type=str,
            help="Output directory (default: SETCLASH_OUT)",
        )
        parser.add_argument(
            "--tol",
            type=float,
            help="Override params.tol",
        )
        parser.add_argument(
            "--max-iter",
            type=int,
            help="Override params.max_iter",
        )
        parser.add_argument(
            "--seed",
            type=int,
            help="Override params.seed",
        )

    def handle(self, *args, **options):
        try:
            result = execute(
                options["subcommand"],
                options["target"],
                out=options["out"],
                tol=options["tol"],
                max_iter=options["max_iter"],
                seed=options["seed"],
            )
        except PreconditionError as exc:
            raise CommandError(f"Precondition failed: {exc}", returncode=int(ExitCode.PRECONDITION)) from exc
        except (SchemaError, ValidationError, OSError, SetclashError) as exc:
            raise CommandError(f"Invalid input: {exc}", returncode=int(ExitCode.INPUT)) from exc

        for path in result.files:
            self.stdout.write(f"Wrote {path}")
        if result.failures:
            raise CommandError(describe_failures(result.failures), returncode=int(ExitCode.VERIFY_FAILED))
        status = f", status {result.status}" if result.status else ""
        self.stdout.write(self.style.SUCCESS(f"✅ {result.subcommand} {result.name}{status}"))
