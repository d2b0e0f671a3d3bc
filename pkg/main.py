from copula_app import cli
import logging
import sys


def main() -> int:
    logging.basicConfig(level=logging.INFO)
    logging.info("Starting TailCopula...")
    return cli.main()


if __name__ == "__main__":
    sys.exit(main())
