# File: satharm/main.py
import logging
from typing import Optional, Sequence

from dotenv import load_dotenv

from satharm.config import parse_arguments, scenario_from_args, setup_logging
from satharm.errors import (
    CapabilityError, ConfigError, ConvergenceError, InvalidParameterError, SignalFormatError, VerificationError,
)
from satharm.processing import ScenarioRunner

# --- Exit codes ---
EXIT_OK: int = 0
EXIT_CONFIG: int = 2
EXIT_CONVERGENCE: int = 3
EXIT_VERIFICATION: int = 4


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point of the application logic. Returns the process exit code."""
    load_dotenv()
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    setup_logging(args.log_file)

    try:
        config = scenario_from_args(args)
        runner = ScenarioRunner(config, plots=args.plots)
        if args.command == "simulate":
            runner.simulate()
        elif args.command == "decompose":
            runner.decompose()
        elif args.command == "cancel":
            runner.cancel(args.m, args.n, args.model)
        elif args.command == "compare":
            runner.compare(args.m, args.n)
        elif args.command == "verify":
            runner.verify(args.suite)
    except (ConfigError, InvalidParameterError, CapabilityError, SignalFormatError) as e:
        logging.critical(f"Configuration error: {e}")
        return EXIT_CONFIG
    except ConvergenceError as e:
        logging.critical(f"Numerical convergence failure: {e}")
        return EXIT_CONVERGENCE
    except VerificationError as e:
        logging.error(f"Verification failed: {e}")
        return EXIT_VERIFICATION
    except OSError as e:
        logging.critical(f"Could not write artifacts: {e}")
        return EXIT_CONFIG
    except KeyboardInterrupt:
        logging.warning("--- SHUTDOWN REQUESTED (Ctrl+C) ---")
        logging.info("Artifacts written so far are complete; partial files were not moved into place.")
        return EXIT_OK

    logging.info(f"Command '{args.command}' finished.")
    return EXIT_OK
