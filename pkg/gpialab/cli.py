"""Console entry point: ``gpia <subcommand> ...`` is ``manage.py gpia <subcommand> ...``."""
import os
import sys


def main(argv: list[str] | None = None) -> None:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "gpialab.settings")
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    args = sys.argv[1:] if argv is None else argv
    execute_from_command_line(["gpia", "gpia", *args])


if __name__ == "__main__":
    main()
