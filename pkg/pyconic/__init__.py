from pyconic.conic_loguru import logger

__version__ = '0.1.0'
