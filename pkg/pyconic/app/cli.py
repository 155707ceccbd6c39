import sys

from pyconic import logger
from pyconic.exceptions import ConicValidationError, NumericalFailure
from pyconic.variables import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, LZ_SCATTER


def main(argv=None):
    """
    Entry point of the pyconic command.
    :param argv: Arguments without the program name, sys.argv[1:] by default
    :return: 0 on success, 2 on invalid input and 3 on numerical failures or failed checks
    """
    from pyconic.arguments import parser
    from pyconic.conic_loguru import logger_manager
    args = parser.parse_args(argv)
    lid = logger_manager.add_default_logger(level=args.log_level)
    try:
        return _run(args)
    finally:
        logger_manager.remove(lid)


def _run(args):
    from pyconic.app.runner import run
    from pyconic.model.config import default_config, load_config
    try:
        if args.config is None and args.command == LZ_SCATTER:
            config = default_config()
        else:
            config = load_config(args.config)
        report = run(args.command, config, out=args.out, n_jobs=args.threads,
                     eigenframe=getattr(args, "eigenframe", False), eta2_grid=getattr(args, "eta2_grid", None))
    except ConicValidationError as e:
        logger.error("Invalid input: {}".format(e))
        return EXIT_VALIDATION
    except NumericalFailure as e:
        logger.error("Numerical failure: {}".format(e))
        return EXIT_NUMERICAL
    if report.failed:
        logger.error("Run {} failed the checks {}".format(args.command, ", ".join(report.flags) or "of an eps entry"))
        return EXIT_NUMERICAL
    logger.info("Finished {} with outputs {}".format(args.command, report.files))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
