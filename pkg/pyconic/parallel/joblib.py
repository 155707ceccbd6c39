from typing import Callable, Iterable, List

from joblib import Parallel, delayed

from pyconic import logger


def run_parallel(fn: Callable, items: Iterable, n_jobs: int = 1) -> List:
    """
    Call fn on every item with joblib workers. Results are returned in the order of the items.
    :param fn: Function of one item
    :param items: Inputs, e.g. the eps values of a sweep
    :param n_jobs: Number of workers, 1 runs sequentially in the calling thread
    :return: List of results
    """
    items = list(items)
    if n_jobs is None or n_jobs == 1 or len(items) < 2:
        return [fn(item) for item in items]
    from pyconic.conic_loguru import logger_manager
    logger.info("Running {} entries on {} workers".format(len(items), n_jobs))
    logger_manager.temporary_remove()
    try:
        out = Parallel(n_jobs=n_jobs, backend="threading")(delayed(fn)(item) for item in items)
    finally:
        logger_manager.add_loggers_from_history()
    logger.info("Finished {} parallel entries".format(len(items)))
    return list(out)
