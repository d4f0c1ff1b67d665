from sys import exit as sys_exit
from time import time
from platform import python_version

from numpy import __version__ as numpy_version
from numpy.random import SeedSequence
from psutil import Process

from settings import THREADS


def derive_seed(root: int, *keys: int):
    '''
        Returns a 32-bit seed derived deterministically from root and a path
        of integer keys (one key per component, cell, repeat, ...).
    '''

    return int(SeedSequence(int(root), spawn_key=tuple(
        int(key) for key in keys)).generate_state(1)[0])


def workers(requested: int = None):
    '''
        Returns the number of worker slots to use, capped by ATMFG_THREADS.
    '''

    if not requested or requested < 1:
        return THREADS
    return min(requested, THREADS)


def rss_mb():
    '''
        Returns the resident memory of this process in MB.
    '''

    return Process().memory_info().rss / 1048576


def runtime_info():
    '''
        Returns the interpreter and library versions (for run manifests).
    '''

    from pandas import __version__ as pandas_version
    from scipy import __version__ as scipy_version
    return {'python': python_version(), 'numpy': numpy_version,
            'scipy': scipy_version, 'pandas': pandas_version,
            'timestamp': time()}


def all_exit(code: int = 0):
    sys_exit(code)
