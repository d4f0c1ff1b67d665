'''
    Command-line interface of the toolkit. It can be launched through CLI
    (python atmfg/cli.py <command> ...) or used programmatically through the
    run(argv) method, which returns the exit code instead of exiting.

    Commands:
    ---------
    build: Build the a-TMFG of a matrix. Writes the TSV edge list, the JSON
    engine stats and, with --trace, the expansion log.

    build-exact: Build the exact TMFG of a matrix (refused above
    ATMFG_EXACT_LIMIT nodes unless --force). Writes the TSV edge list, the
    construction trace and the face location histogram.

    gen factor|gmrf|planar: Generate 1-factor data with its labels, GMRF data
    over a TSV graph, or a random planar ground-truth graph.

    eval: Score edge lists against a ground truth and/or a partition, audit
    their structure, compare them pairwise (--pairwise) or test the window
    overlap of a matrix (--matrix, --windows).

    bench: Run a benchmark preset and write its CSV table.

    Every command writes a JSON manifest with the resolved parameters
    (--manifest, by default next to the main output). Verbosity can be
    activated using the -v/--verbose option.

    Exit codes: 0 success, 1 internal error, 2 parameter error, 3 size
    guard, 4 input inconsistency.
'''


from sys import argv as sys_argv
from math import inf
from time import perf_counter
from json import dumps
from os.path import splitext
from argparse import ArgumentParser
from logging import INFO, WARNING

from dataset import load_matrix, znormalize
from engine import Engine
from exact_tmfg import (build_exact_tmfg, face_location_stats,
                        face_location_histogram, validate_tmfg)
from synthgen import gen_factor_model, gen_gmrf, gen_planar_ground_truth
from metrics import (jaccard, pairwise_jaccard, weighted_intra_cluster_path,
                     graph_audit, temporal_overlap)
from bench import run_bench
from model import AtmfgConfig, FactorModelParams, GmrfParams
from iolib import (write_edgelist, read_edgelist, write_matrix, write_trace,
                   write_histogram, write_insertions, write_table,
                   read_labels, write_labels, write_json, write_manifest)
from exception import AtmfgError, ParameterError, InputMismatchError
from consts import (EXIT_OK, EXIT_INTERNAL, MODE_AUTO, MODE_EXACT,
                    MODE_APPROXIMATE, BUILDER_ATMFG, BUILDER_EXACT, DEFAULT_K,
                    DEFAULT_RESCUE_K, DEFAULT_MAX_DEGREE,
                    DEFAULT_EF_CONSTRUCTION, DEFAULT_SAMPLES,
                    DEFAULT_MAX_PAIRS, DEFAULT_SKETCH_DIM, SEEDING_PROFILE,
                    SEEDING_KNN, HIST_BINS, UNBOUNDED)
from utils import all_exit
from logger import console, file


CMD_BUILD = 'build'
CMD_BUILD_EXACT = 'build-exact'
CMD_GEN = 'gen'
CMD_EVAL = 'eval'
CMD_BENCH = 'bench'

GEN_FACTOR = 'factor'
GEN_GMRF = 'gmrf'
GEN_PLANAR = 'planar'


def _build_parser():
    parser = ArgumentParser(prog='atmfg')
    subparsers = parser.add_subparsers(dest='command')

    # a-TMFG
    b_parser = subparsers.add_parser(CMD_BUILD, help='Build the a-TMFG.')
    _add_io(b_parser)
    b_parser.add_argument('-k', '--k', metavar='k', type=int,
                          default=DEFAULT_K, help='kNN neighborhood size.')
    b_parser.add_argument('-u', '--universe-limit', metavar='limit',
                          type=_limit, default=None,
                          help='Maximum active faces (inf for no limit).')
    b_parser.add_argument('--rescue-k', metavar='rescue_k', type=int,
                          default=DEFAULT_RESCUE_K,
                          help='Neighbors per face in a global rescue.')
    b_parser.add_argument('--index-mode', metavar='mode', default=MODE_AUTO,
                          choices=(MODE_AUTO, MODE_EXACT, MODE_APPROXIMATE),
                          help='auto, exact or approximate.')
    b_parser.add_argument('--max-degree', metavar='M', type=int,
                          default=DEFAULT_MAX_DEGREE, help='HNSW M.')
    b_parser.add_argument('--ef-construction', metavar='ef', type=int,
                          default=DEFAULT_EF_CONSTRUCTION,
                          help='HNSW efConstruction.')
    b_parser.add_argument('--ef-search', metavar='ef', type=int,
                          default=None, help='HNSW ef at query time.')
    b_parser.add_argument('--sketch-dim', metavar='width', type=int,
                          default=DEFAULT_SKETCH_DIM,
                          help='Sketch width navigated by HNSW (0 for full '
                               'rows).')
    b_parser.add_argument('--seeding', metavar='seeding',
                          default=SEEDING_PROFILE,
                          choices=(SEEDING_PROFILE, SEEDING_KNN),
                          help='profile or knn seed clique.')
    b_parser.add_argument('--clique', metavar='a,b,c,d', type=_ints,
                          default=None, help='Explicit seed clique.')
    b_parser.add_argument('--stats', metavar='stats', default=None,
                          help='Engine stats JSON path.')
    b_parser.add_argument('--trace', metavar='trace', default=None,
                          help='Expansion log CSV path.')
    b_parser.add_argument('--seed', metavar='seed', type=int, default=0,
                          help='Root seed.')

    # exact TMFG
    e_parser = subparsers.add_parser(CMD_BUILD_EXACT,
                                     help='Build the exact TMFG.')
    _add_io(e_parser)
    e_parser.add_argument('--force', default=False, action='store_true',
                          help='Bypass the exact size guard.')
    e_parser.add_argument('--clique', metavar='a,b,c,d', type=_ints,
                          default=None, help='Explicit seed clique.')
    e_parser.add_argument('--trace', metavar='trace', default=None,
                          help='Construction trace CSV path.')
    e_parser.add_argument('--histogram', metavar='histogram', default=None,
                          help='Face location histogram CSV path.')
    e_parser.add_argument('--bins', metavar='bins', type=int,
                          default=HIST_BINS, help='Histogram bins.')

    # generators
    g_parser = subparsers.add_parser(CMD_GEN, help='Generate data.')
    g_subparsers = g_parser.add_subparsers(dest='kind')
    f_parser = g_subparsers.add_parser(GEN_FACTOR, help='1-factor data.')
    f_parser.add_argument('--n', metavar='n', type=int, required=True,
                          help='Number of nodes.')
    f_parser.add_argument('--k', metavar='K', type=int, required=True,
                          help='Number of clusters.')
    f_parser.add_argument('--g', metavar='g', type=_floats, default=[0.5],
                          help='Loading (one, or one per cluster).')
    f_parser.add_argument('--labels', metavar='labels', default=None,
                          help='Labels output path.')
    _add_gen(f_parser, samples=True)
    m_parser = g_subparsers.add_parser(GEN_GMRF, help='GMRF data.')
    m_parser.add_argument('--graph', metavar='graph', required=True,
                          help='TSV ground-truth graph.')
    m_parser.add_argument('--n', metavar='n', type=int, default=None,
                          help='Node count (default: largest id + 1).')
    m_parser.add_argument('--alpha', metavar='alpha', type=float,
                          required=True, help='Coupling strength.')
    _add_gen(m_parser, samples=True)
    p_parser = g_subparsers.add_parser(GEN_PLANAR, help='Planar graph.')
    p_parser.add_argument('--n', metavar='n', type=int, required=True,
                          help='Number of nodes.')
    _add_gen(p_parser, samples=False)

    # evaluation
    v_parser = subparsers.add_parser(CMD_EVAL, help='Evaluate edge lists.')
    v_parser.add_argument('graphs', metavar='graph', nargs='*',
                          help='TSV edge lists.')
    v_parser.add_argument('--truth', metavar='truth', default=None,
                          help='Ground-truth TSV edge list.')
    v_parser.add_argument('--labels', metavar='labels', default=None,
                          help='Cluster labels file.')
    v_parser.add_argument('--max-pairs', metavar='pairs', type=int,
                          default=DEFAULT_MAX_PAIRS,
                          help='Sampled pairs per cluster.')
    v_parser.add_argument('--induced', default=False, action='store_true',
                          help='Distances on cluster-induced subgraphs.')
    v_parser.add_argument('--pairwise', default=False, action='store_true',
                          help='Pairwise Jaccard of all edge lists.')
    v_parser.add_argument('--matrix', metavar='matrix', default=None,
                          help='Matrix for the window overlap test.')
    v_parser.add_argument('--windows', metavar='windows', type=int,
                          default=2, help='Number of column windows.')
    v_parser.add_argument('--builder', metavar='builder',
                          default=BUILDER_EXACT,
                          choices=(BUILDER_EXACT, BUILDER_ATMFG),
                          help='Builder of the window overlap test.')
    v_parser.add_argument('--seed', metavar='seed', type=int, default=0,
                          help='Pair sampling seed.')
    v_parser.add_argument('-o', '--out', metavar='out', required=True,
                          help='Metrics JSON path.')
    _add_common(v_parser)

    # benchmarks
    h_parser = subparsers.add_parser(CMD_BENCH, help='Run a preset.')
    h_parser.add_argument('--preset', metavar='preset', required=True,
                          help='alpha-heatmap, k-sweep, universe-sweep or '
                          'runtime.')
    h_parser.add_argument('--sizes', metavar='sizes', type=_ints,
                          default=None, help='Comma-separated N values.')
    h_parser.add_argument('--alphas', metavar='alphas', type=_floats,
                          default=None, help='Comma-separated alphas.')
    h_parser.add_argument('--ks', metavar='ks', type=_ints, default=None,
                          help='Comma-separated k values.')
    h_parser.add_argument('--limits', metavar='limits', type=_limits,
                          default=None,
                          help='Universe limits (counts, fractions or inf).')
    h_parser.add_argument('--repeats', metavar='repeats', type=int,
                          default=1, help='Repeats per cell.')
    h_parser.add_argument('--samples', metavar='T', type=int,
                          default=DEFAULT_SAMPLES, help='Samples per node.')
    h_parser.add_argument('--threads', metavar='threads', type=int,
                          default=None, help='Worker slots.')
    h_parser.add_argument('--index-mode', metavar='mode', default=MODE_AUTO,
                          choices=(MODE_AUTO, MODE_EXACT, MODE_APPROXIMATE),
                          help='auto, exact or approximate.')
    h_parser.add_argument('--seed', metavar='seed', type=int, default=0,
                          help='Root seed.')
    h_parser.add_argument('-o', '--out', metavar='out', required=True,
                          help='CSV output path.')
    _add_common(h_parser)
    return parser


# ====================
#     MAIN METHODS
# ====================


def run(argv: list = None):
    '''
        Parse argv (sys.argv[1:] if None) and run the command.

        Returns the exit code.
    '''

    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None or (args.command == CMD_GEN
                                and args.kind is None):
        parser.print_help()
        return EXIT_OK
    console.setLevel(INFO if args.verbose else WARNING)
    commands = {CMD_BUILD: cmd_build, CMD_BUILD_EXACT: cmd_build_exact,
                CMD_GEN: cmd_gen, CMD_EVAL: cmd_eval, CMD_BENCH: cmd_bench}
    try:
        commands[args.command](args)
    except AtmfgError as e:
        console.error('%s %s', e.__class__.__name__, str(e))
        file.exception(e.__class__.__name__)
        return e.exit_code
    except Exception as e:
        console.error('%s %s', e.__class__.__name__, str(e))
        file.exception(e.__class__.__name__)
        return EXIT_INTERNAL
    return EXIT_OK


def cmd_build(args):
    cfg = AtmfgConfig(k=args.k, universe_limit=args.universe_limit,
                      rescue_k=args.rescue_k, seed=args.seed,
                      index_mode=args.index_mode, max_degree=args.max_degree,
                      ef_construction=args.ef_construction,
                      ef_search=args.ef_search,
                      sketch_dim=args.sketch_dim, seeding=args.seeding)
    m = znormalize(load_matrix(args.input, args.format))
    start = perf_counter()
    engine = Engine(m, cfg, args.clique)
    edges = engine.run()
    engine.stats.wall_seconds = round(perf_counter() - start, 6)

    write_edgelist(edges, args.out)
    write_json(engine.stats.as_json(), args.stats or _beside(args.out,
                                                              '.stats.json'))
    if args.trace:
        write_insertions(engine.insertions, args.trace)
    _manifest(args, {'config': cfg.as_dict(), 'k_used': engine.k,
                     'universe_limit_used': _u(engine.universe.limit),
                     'n': m.n_rows, 'd': m.n_cols,
                     'degenerate_rows': len(m.degenerate)})


def cmd_build_exact(args):
    m = znormalize(load_matrix(args.input, args.format))
    edges, trace = build_exact_tmfg(m, args.clique, args.force)
    report = validate_tmfg(edges, trace)
    if not report.passed:
        console.warning('Structural checks failed: %s', str(report.details))
    stats = face_location_stats(trace)

    write_edgelist(edges, args.out)
    write_trace(trace, args.trace or _beside(args.out, '.trace.csv'))
    write_histogram(face_location_histogram(stats, args.bins),
                    args.histogram or _beside(args.out, '.hist.csv'))
    _manifest(args, {'n': m.n_rows, 'd': m.n_cols, 'clique': trace.clique,
                     'force': args.force, 'bins': args.bins,
                     'checks': report.checks})


def cmd_gen(args):
    if args.kind == GEN_FACTOR:
        loading = args.g[0] if len(args.g) == 1 else args.g
        p = FactorModelParams(args.n, args.k, loading, args.samples,
                              args.seed)
        m, partition = gen_factor_model(p)
        write_matrix(m, args.out)
        write_labels(partition.labels,
                     args.labels or _beside(args.out, '.labels'))
        params = p.as_dict()
    elif args.kind == GEN_GMRF:
        truth = read_edgelist(args.graph, args.n)
        p = GmrfParams(truth.adjacency(), args.alpha, args.samples,
                       args.seed)
        write_matrix(gen_gmrf(p), args.out)
        params = p.as_dict()
        params['graph'] = args.graph
    else:
        write_edgelist(gen_planar_ground_truth(args.n, args.seed), args.out)
        params = {'n': args.n, 'seed': args.seed}
    _manifest(args, params)


def cmd_eval(args):
    graphs = [read_edgelist(path) for path in args.graphs]
    if not graphs and not args.matrix:
        raise ParameterError('Nothing to evaluate')
    n_nodes = {g.n_nodes for g in graphs}
    if len(n_nodes) > 1:
        raise InputMismatchError('Edge lists have different node counts: %s'
                                 % str(sorted(n_nodes)))
    doc = {}
    truth = None
    if args.truth:
        truth = read_edgelist(args.truth)
        if graphs and truth.n_nodes != graphs[0].n_nodes:
            raise InputMismatchError('Truth has %d nodes, graphs have %d'
                                     % (truth.n_nodes, graphs[0].n_nodes))
        doc['jaccard'] = [jaccard(g, truth) for g in graphs]
    elif len(graphs) == 2 and not args.pairwise:
        doc['jaccard'] = [jaccard(graphs[0], graphs[1])]
    if len(doc.get('jaccard', ())) == 1:
        doc['jaccard'] = doc['jaccard'][0]

    if args.labels and graphs:
        partition = read_labels(args.labels)
        if partition.n_nodes != graphs[0].n_nodes:
            raise InputMismatchError('%d labels for %d nodes'
                                     % (partition.n_nodes, graphs[0].n_nodes))
        paths = [weighted_intra_cluster_path(g, partition, args.max_pairs,
                                             args.seed, args.induced)
                 for g in graphs]
        doc['l_weighted'] = [value for value, _ in paths]
        doc['per_cluster'] = [clusters for _, clusters in paths]
        if len(paths) == 1:
            doc['l_weighted'] = doc['l_weighted'][0]
            doc['per_cluster'] = doc['per_cluster'][0]

    if graphs:
        audits = [graph_audit(g).as_dict() for g in graphs]
        doc['audit'] = audits[0] if len(audits) == 1 else audits
    if args.pairwise:
        doc['pairwise'] = pairwise_jaccard(graphs)
    if args.matrix:
        m = load_matrix(args.matrix)
        doc['temporal_overlap'] = temporal_overlap(m, args.windows,
                                                   args.builder)

    write_json(doc, args.out)
    print(dumps({key: doc[key] for key in ('jaccard', 'l_weighted')
                 if key in doc}))
    _manifest(args, {'graphs': args.graphs, 'truth': args.truth,
                     'labels': args.labels, 'max_pairs': args.max_pairs,
                     'induced': args.induced, 'seed': args.seed,
                     'matrix': args.matrix, 'windows': args.windows,
                     'builder': args.builder})


def cmd_bench(args):
    df = run_bench(args.preset, sizes=args.sizes, alphas=args.alphas,
                   ks=args.ks, limits=args.limits, repeats=args.repeats,
                   seed=args.seed, samples=args.samples,
                   threads=args.threads, index_mode=args.index_mode)
    write_table(df, args.out)
    params = {'preset': args.preset, 'sizes': args.sizes,
              'alphas': args.alphas, 'ks': args.ks,
              'limits': None if args.limits is None else
              [_u(u) for u in args.limits],
              'repeats': args.repeats, 'seed': args.seed,
              'samples': args.samples, 'threads': args.threads,
              'index_mode': args.index_mode, 'rows': len(df)}
    if args.preset == 'runtime':
        params['reference_runtime'] = {'n': 100000, 'seconds': 500}
    _manifest(args, params)


# ====================
#    OTHER METHODS
# ====================


def _add_common(parser):
    parser.add_argument('--manifest', metavar='manifest', default=None,
                        help='Manifest JSON path.')
    parser.add_argument('-v', '--verbose', metavar='verbose', default=False,
                        nargs='?', const=True,
                        help='Detailed output on the console.')


def _add_io(parser):
    parser.add_argument('-i', '--input', metavar='input', required=True,
                        help='Matrix file (CSV or binary).')
    parser.add_argument('-f', '--format', metavar='format', default=None,
                        choices=('csv', 'binary'),
                        help='Matrix format (default: from the suffix).')
    parser.add_argument('-o', '--out', metavar='out', required=True,
                        help='TSV edge list path.')
    _add_common(parser)


def _add_gen(parser, samples: bool):
    if samples:
        parser.add_argument('--samples', metavar='T', type=int,
                            default=DEFAULT_SAMPLES, help='Samples per node.')
    parser.add_argument('--seed', metavar='seed', type=int, default=0,
                        help='Generator seed.')
    parser.add_argument('-o', '--out', metavar='out', required=True,
                        help='Output path.')
    _add_common(parser)


def _manifest(args, params: dict):
    command = args.command if args.command != CMD_GEN else \
        '%s %s' % (args.command, args.kind)
    params = dict(params, out=args.out)
    write_manifest(args.manifest or _beside(args.out, '.manifest.json'),
                   command, params)


def _beside(path: str, suffix: str):
    return splitext(path)[0] + suffix


def _u(limit):
    return UNBOUNDED if limit == inf else limit


def _ints(value: str):
    return [int(v) for v in value.split(',') if v.strip()]


def _floats(value: str):
    return [float(v) for v in value.split(',') if v.strip()]


def _limit(value: str):
    if value.strip().lower() in (UNBOUNDED, 'none', 'unbounded'):
        return inf
    return int(value)


def _limits(value: str):
    return [inf if v.strip().lower() == UNBOUNDED else float(v)
            for v in value.split(',') if v.strip()]


if __name__ == '__main__':
    all_exit(run(sys_argv[1:]))
