'''
    Process-wide configuration read from the environment at import time.
    Invalid or missing values are reported on both loggers and replaced by
    their defaults.

    Parameters:
    -----------
    THREADS: ATMFG_THREADS, cap on worker parallelism (bench worker slots
    and ANN query threads). Default is the number of logical CPUs.

    EXACT_FALLBACK: ATMFG_EXACT_FALLBACK, number of rows at or below which
    the ANN index is replaced by a brute-force scan. Default is 2048.

    EXACT_LIMIT: ATMFG_EXACT_LIMIT, largest N the exact TMFG accepts
    without --force. Default is 30000.
'''


from os import getenv

from psutil import cpu_count

from logger import console, file
from consts import DEFAULT_EXACT_FALLBACK, DEFAULT_EXACT_LIMIT


_cpus = cpu_count() or 1

_threads = getenv('ATMFG_THREADS', None)
if _threads is None:
    THREADS = _cpus
else:
    try:
        THREADS = int(_threads)
        if THREADS < 1:
            raise ValueError(_threads)
    except ValueError:
        console.warning('ATMFG_THREADS parameter invalid. '
                        'Defaulting to %d', _cpus)
        file.warning('ATMFG_THREADS parameter (%s) invalid', _threads,
                     exc_info=True)
        THREADS = _cpus

try:
    EXACT_FALLBACK = int(getenv('ATMFG_EXACT_FALLBACK',
                                str(DEFAULT_EXACT_FALLBACK)))
    if EXACT_FALLBACK < 0:
        raise ValueError(EXACT_FALLBACK)
except ValueError:
    console.warning('ATMFG_EXACT_FALLBACK parameter invalid. '
                    'Defaulting to %d', DEFAULT_EXACT_FALLBACK)
    file.warning('ATMFG_EXACT_FALLBACK parameter invalid', exc_info=True)
    EXACT_FALLBACK = DEFAULT_EXACT_FALLBACK

try:
    EXACT_LIMIT = int(getenv('ATMFG_EXACT_LIMIT', str(DEFAULT_EXACT_LIMIT)))
    if EXACT_LIMIT < 4:
        raise ValueError(EXACT_LIMIT)
except ValueError:
    console.warning('ATMFG_EXACT_LIMIT parameter invalid. '
                    'Defaulting to %d', DEFAULT_EXACT_LIMIT)
    file.warning('ATMFG_EXACT_LIMIT parameter invalid', exc_info=True)
    EXACT_LIMIT = DEFAULT_EXACT_LIMIT


def as_dict():
    '''
        Returns the resolved settings (for run manifests).
    '''

    return {'threads': THREADS, 'exact_fallback': EXACT_FALLBACK,
            'exact_limit': EXACT_LIMIT}
