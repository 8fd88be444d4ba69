from .config import config
from .log_setup import setup_logging

__all__ = ['config',
           'setup_logging']
