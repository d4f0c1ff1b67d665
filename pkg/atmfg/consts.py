from os.path import dirname, abspath


# exit codes
EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PARAMETER = 2
EXIT_SIZE_GUARD = 3
EXIT_INPUT = 4

# binary matrix format
MATRIX_MAGIC = b'ATMF'
MATRIX_VERSION = 1
FORMAT_CSV = 'csv'
FORMAT_BINARY = 'binary'
BINARY_SUFFIXES = ('.atmf', '.bin')

# index modes
MODE_AUTO = 'auto'
MODE_EXACT = 'exact'
MODE_APPROXIMATE = 'approximate'

# builders
BUILDER_ATMFG = 'atmfg'
BUILDER_EXACT = 'exact'

# ann index defaults
DEFAULT_MAX_DEGREE = 16
DEFAULT_EF_CONSTRUCTION = 200
DEFAULT_EF_SEARCH_FLOOR = 64
DEFAULT_EXACT_FALLBACK = 2048
DEFAULT_SKETCH_DIM = 384
MIN_OVERFETCH = 16

# engine defaults
DEFAULT_K = 50
DEFAULT_CLIQUE_SIZE = 4
DEFAULT_RESCUE_K = 8
DEFAULT_UNIVERSE_FLOOR = 1000
DEFAULT_UNIVERSE_FRACTION = 0.3
MIN_UNIVERSE_LIMIT = 4
SEEDING_PROFILE = 'profile'
SEEDING_KNN = 'knn'

# exact tmfg
DEFAULT_EXACT_LIMIT = 30000
DENSE_FLOAT64_LIMIT = 8192

# synthetic data
DEFAULT_SAMPLES = 2000
ALPHA_WARNING = 2.0

# metrics
DEFAULT_MAX_PAIRS = 10000
BFS_CHUNK = 256

# misc.
WEIGHT_DECIMALS = 6
HIST_BINS = 20
UNBOUNDED = 'inf'
ROOT_PATH = dirname(dirname(abspath(__file__)))
