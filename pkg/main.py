#!/usr/bin/env python3
"""
Hyperdimensional computing toolkit - command-line entry point.

Usage:
    python main.py run set-decode-uniform --seed 7
    python main.py list
    python main.py codebook gen --kind bipolar --m 1000 --d 8192 --seed 1 --out cb.hdc

Settings are read from hdc.ini when present; see README.md.
"""
import logging
import sys


def main():
    """Configure logging from the settings file and hand off to the CLI."""
    try:
        from src.config import config
        config.load_config()

        logging.basicConfig(
            filename=config.LOG_FILE,
            level=getattr(logging, config.LOG_LEVEL, logging.INFO),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S',
            encoding='utf-8'
        )
        logger = logging.getLogger(__name__)
        logger.info(f"Starting hdc with arguments {sys.argv[1:]}")

        from src.cli import main as cli_main
        code = cli_main(sys.argv[1:])
        logger.info(f"hdc finished with exit code {code}")
        sys.exit(code)

    except ImportError as e:
        print("=" * 60)
        print("ERROR: Failed to import required modules")
        print("=" * 60)
        print(f"\nDetails: {e}")
        print("\nPossible solutions:")
        print("  1. Make sure you're running from the project root directory")
        print("  2. Install required dependencies: pip install -r requirements.txt")
        print()
        logging.getLogger(__name__).error(f"Import error: {e}", exc_info=True)
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nInterrupted")
        sys.exit(130)
    except Exception as e:
        print("=" * 60)
        print("ERROR: An unexpected error occurred")
        print("=" * 60)
        print(f"\nDetails: {e}")
        print("\nPlease check the log file (hdc.log by default) for more information.")
        print()
        logging.getLogger(__name__).error(f"Unexpected error: {e}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
