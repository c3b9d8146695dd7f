"""
Command-line front end.

Every subcommand writes one JSON document to stdout: the primary `result`
and a separate `metadata` block that holds the only run-dependent fields
(version, timing). Failures are written to stderr as structured JSON and
mapped to exit codes 2 (validation), 3 (budget) and 1 (internal).
"""

import argparse
import dataclasses
import json
import sys
import time
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .checks import verify_construction, verify_max_m1_club
from .constructions import CONSTRUCTIONS, S_MODES, ConstructionSpec, build
from .error_handling import (
    EXIT_OK,
    EXIT_VALIDATION,
    ParseError,
    ValidationError,
    error_payload,
    exit_code_for,
)
from .linset import STRATEGIES, SubspaceU, analyze, dual_perp, restricted_dual
from .logging_utils import get_logger, log_run_context, set_log_level
from .models import WeightDistribution, get_cached_config, set_cached_config
from .rmcode import (
    METHODS,
    RankMetricCode,
    b2_admissibility,
    b2_value,
    club_rank_bound,
    dual_code,
    genbound,
    is_mrd,
    k2_club_bound,
    m_club_bound,
    macwilliams_transform,
    singleton_club_bound,
    three_weight_classify,
    weight_distribution,
)
from .search import (
    SEARCH_STRATEGIES,
    SearchSpec,
    anchored_cross_check,
    run_search,
    spectrum_compare,
)

logger = get_logger(__name__)


class JSONArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises ParseError instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ParseError(message, usage=self.format_usage().strip())


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(',') if v.strip() != '']
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}")


def _load_json(path: str) -> Any:
    try:
        if path == '-':
            return json.load(sys.stdin)
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")


def _load_subspace(path: str) -> SubspaceU:
    doc = _load_json(path)
    if isinstance(doc, dict) and 'result' in doc:
        doc = doc['result']
    if isinstance(doc, dict) and 'subspace' in doc:
        doc = doc['subspace']
    return SubspaceU.from_dict(doc)


def _load_code(path: str) -> RankMetricCode:
    doc = _load_json(path)
    if isinstance(doc, dict) and 'result' in doc:
        doc = doc['result']
    if isinstance(doc, dict) and 'code' in doc:
        doc = doc['code']
    if isinstance(doc, dict) and 'G' in doc:
        return RankMetricCode.from_dict(doc)
    if isinstance(doc, dict) and 'subspace' in doc:
        doc = doc['subspace']
    return RankMetricCode.from_system(SubspaceU.from_dict(doc))


def _add_field_args(parser: argparse.ArgumentParser, m_required: bool = True) -> None:
    parser.add_argument('--p', type=int, default=2, help='characteristic (default: 2)')
    parser.add_argument('--e', type=int, default=1, help='q = p^e (default: 1)')
    parser.add_argument('--m', type=int, required=m_required, help='extension degree')


def _add_construction_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('name', help=f"one of {', '.join(CONSTRUCTIONS)} (kebab-case accepted)")
    _add_field_args(parser)
    parser.add_argument('--k', type=int, help='ambient dimension')
    parser.add_argument('--i', type=int, help='dimension of S')
    parser.add_argument('--s', type=int, help='Frobenius exponent')
    parser.add_argument('--n0', type=int, help='subfield degree of the trace')
    parser.add_argument('--delta', type=int, help='delta encoding (default: smallest admissible)')
    parser.add_argument('--xi', type=int, help='xi encoding (default: smallest admissible)')
    parser.add_argument('--mu', type=_int_list, help='comma-separated mu encodings')
    parser.add_argument('--s-mode', choices=S_MODES, help='how S is chosen')
    parser.add_argument('--s-data', help='basis (comma-separated) or seed for S')
    parser.add_argument('--scattered-part', help='subspace JSON file for the scattered part')
    parser.add_argument('--params', help='extra parameters as a JSON object')


def _construction_spec(args: argparse.Namespace) -> ConstructionSpec:
    params: Dict[str, Any] = {'p': args.p, 'e': args.e, 'm': args.m}
    for key in ('k', 'i', 's', 'n0', 'delta', 'xi', 'mu'):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    if args.s_mode is not None:
        data: Any = None
        if args.s_data is not None:
            values = _int_list(args.s_data)
            data = values if args.s_mode == 'ExplicitBasis' else values[0]
        dim = args.i if args.i is not None else (len(data) if isinstance(data, list) else 1)
        params['S'] = {'mode': args.s_mode, 'dim': dim, 'data': data}
    if args.scattered_part is not None:
        params['scattered_part'] = _load_subspace(args.scattered_part).to_dict()
    if args.params:
        try:
            extra = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise ParseError(f"--params is not valid JSON: {exc}")
        if not isinstance(extra, dict):
            raise ParseError("--params must be a JSON object")
        params.update(extra)
    return ConstructionSpec(args.name, params)


def cmd_construct(args: argparse.Namespace) -> Dict[str, Any]:
    U, report = build(_construction_spec(args))
    return {'subspace': U.to_dict(), 'report': report.to_dict()}


def cmd_analyze(args: argparse.Namespace) -> Dict[str, Any]:
    U = _load_subspace(args.input)
    if U.rank == 0:
        raise ValidationError("the zero subspace defines no linear set")
    if args.compare:
        return spectrum_compare(U, _load_subspace(args.compare)).to_dict()
    return analyze(U, with_hyperplanes=args.hyperplanes, strategy=args.strategy).to_dict()


def cmd_dual(args: argparse.Namespace) -> Dict[str, Any]:
    U = _load_subspace(args.input)
    if args.within:
        try:
            rows = np.array(json.loads(args.within), dtype=np.int64)
        except (json.JSONDecodeError, ValueError) as exc:
            raise ParseError(f"--within must be a JSON list of vectors: {exc}")
        return restricted_dual(U, rows).to_dict()
    return dual_perp(U).to_dict()


def cmd_code(args: argparse.Namespace) -> Dict[str, Any]:
    code = _load_code(args.input)
    if args.action == 'build':
        return code.to_dict()
    if args.action == 'dual':
        return dual_code(code).to_dict()
    distribution = weight_distribution(code, args.method)
    return {
        'n': code.n,
        'k': code.k,
        'A': distribution.counts,
        'method': distribution.method,
        'd': distribution.min_distance,
        'mrd': is_mrd(code, distribution),
        'classification': three_weight_classify(code, distribution).to_dict(),
    }


def cmd_macwilliams(args: argparse.Namespace) -> Dict[str, Any]:
    if args.input:
        doc = _load_json(args.input)
        A = WeightDistribution.from_dict(doc).counts
        n, k, m, q = (int(doc.get(key, getattr(args, key)) or 0) for key in ('n', 'k', 'm', 'q'))
    else:
        if args.A is None:
            raise ValidationError("give the distribution with --A or --input")
        A, n, k, m, q = args.A, args.n, args.k, args.m, args.q
    if not all((n, k, m, q)):
        raise ValidationError("n, k, m and q are all required")
    B = macwilliams_transform(A, n, k, m, q)
    return {'B': B.counts, 'dual': {'n': n, 'k': n - k}, 'm': m, 'q': q}


def cmd_bounds(args: argparse.Namespace) -> Dict[str, Any]:
    q, m, k, i = args.q, args.m, args.k, args.i
    bound, case = club_rank_bound(q, m, k, i)
    result: Dict[str, Any] = {'bound': bound, 'case': case, 'genbound': genbound(m, k)}
    if i <= m - 1:
        result['singleton'] = str(singleton_club_bound(m, k, i))
    if k == 2:
        result['k2'] = k2_club_bound(m, i)
    if i == m and k >= 3:
        result['m_club'] = m_club_bound(m, k)
    if args.n is not None:
        result['n'] = args.n
        result['b2'] = str(b2_value(q, m, k, i, args.n))
        result['b2_admissible'] = b2_admissibility(q, m, k, i, args.n)
    return result


def cmd_search(args: argparse.Namespace) -> Dict[str, Any]:
    spec = SearchSpec.from_dict({
        'p': args.p, 'e': args.e, 'm': args.m, 'k': args.k, 'n': args.n,
        'target': args.target, 'anchor': args.anchor, 'strategy': args.strategy,
        'big': args.big, 'jobs': args.jobs,
    })
    if args.cross_check:
        if spec.anchor is None:
            raise ValidationError("--cross-check needs --anchor")
        return anchored_cross_check(spec.tower, spec.k, spec.n, spec.anchor, jobs=args.jobs)
    result = run_search(spec)
    if args.jsonl:
        for hit in result.found:
            print(json.dumps({'hit': hit}, sort_keys=True))
    payload = result.to_dict()
    if not args.jsonl:
        payload['found'] = result.found
    return payload


def cmd_verify(args: argparse.Namespace) -> Dict[str, Any]:
    spec = _construction_spec(args)
    report = verify_construction(spec)
    result: Dict[str, Any] = {'construction': report.to_dict()}
    passed = report.passed
    if args.max_m1_club and report.subspace is not None:
        club = verify_max_m1_club(report.subspace)
        result['max_m1_club'] = club.to_dict()
        passed = passed and club.passed
    result['passed'] = passed
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = JSONArgumentParser(prog='clubforge',
                                description='Linear sets, i-clubs and rank-metric codes')
    parser.add_argument('--version', action='version', version=f'clubforge {__version__}')
    parser.add_argument('--jobs', type=int, help='worker processes (default: CLUBFORGE_JOBS)')
    parser.add_argument('--budget', type=int, help='iteration budget (default: CLUBFORGE_BUDGET)')
    parser.add_argument('--log-level', help='DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('--output', help='also write the result document to this file')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=JSONArgumentParser)

    construct = sub.add_parser('construct', help='generate a named construction')
    _add_construction_args(construct)
    construct.set_defaults(handler=cmd_construct)

    analyze_p = sub.add_parser('analyze', help='census, size and classification of a subspace')
    analyze_p.add_argument('input', help="subspace JSON file, '-' for stdin")
    analyze_p.add_argument('--hyperplanes', action='store_true', help='add the hyperplane spectrum')
    analyze_p.add_argument('--strategy', choices=STRATEGIES, default='auto')
    analyze_p.add_argument('--compare', help='second subspace: compare weight invariants')
    analyze_p.set_defaults(handler=cmd_analyze)

    dual = sub.add_parser('dual', help='trace dual of a subspace')
    dual.add_argument('input')
    dual.add_argument('--within', help='JSON list of vectors spanning W (restricted dual)')
    dual.set_defaults(handler=cmd_dual)

    code = sub.add_parser('code', help='rank-metric codes')
    code.add_argument('action', choices=('build', 'weights', 'dual'))
    code.add_argument('input', help='code or subspace JSON file')
    code.add_argument('--method', choices=METHODS, default='enumerate')
    code.set_defaults(handler=cmd_code)

    mw = sub.add_parser('macwilliams', help='dual distribution by the MacWilliams identities')
    mw.add_argument('--A', type=_int_list, help='comma-separated A_0..A_m')
    mw.add_argument('--input', help="JSON {'A': [...], 'n', 'k', 'm', 'q'}")
    mw.add_argument('--n', type=int)
    mw.add_argument('--k', type=int)
    mw.add_argument('--m', type=int)
    mw.add_argument('--q', type=int)
    mw.set_defaults(handler=cmd_macwilliams)

    bounds = sub.add_parser('bounds', help='rank bounds for i-clubs')
    for flag in ('--q', '--m', '--k', '--i'):
        bounds.add_argument(flag, type=int, required=True)
    bounds.add_argument('--n', type=int, help='rank to test for B_2 admissibility')
    bounds.set_defaults(handler=cmd_bounds)

    search = sub.add_parser('search', help='exhaustive subspace enumeration')
    _add_field_args(search)
    search.add_argument('--k', type=int, required=True)
    search.add_argument('--n', type=int, required=True)
    search.add_argument('--target', default='Census', help="AnyClub, Club(i), Scattered, Census")
    search.add_argument('--anchor', type=_int_list, help='basis of S fixed at <e_0>')
    search.add_argument('--strategy', choices=SEARCH_STRATEGIES, default='vectors')
    search.add_argument('--big', action='store_true', help='lift the iteration budget')
    search.add_argument('--jsonl', action='store_true', help='stream hits one per line')
    search.add_argument('--cross-check', action='store_true',
                        help='compare anchored and unanchored Club(i) counts')
    search.set_defaults(handler=cmd_search)

    verify = sub.add_parser('verify', help='full verification battery of a construction')
    _add_construction_args(verify)
    verify.add_argument('--max-m1-club', action='store_true',
                        help='also check the maximum-rank (m-1)-club consequences')
    verify.set_defaults(handler=cmd_verify)
    return parser


def _configure(args: argparse.Namespace) -> None:
    if args.log_level:
        set_log_level(args.log_level)
    config = get_cached_config()
    overrides: Dict[str, Any] = {}
    if args.jobs is not None:
        overrides['jobs'] = args.jobs
    if args.budget is not None:
        overrides['iteration_budget'] = args.budget
    if overrides:
        set_cached_config(dataclasses.replace(config, **overrides))


def _default(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, Fraction):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        _configure(args)
        log_run_context(args.command, jobs=get_cached_config().jobs,
                        budget=get_cached_config().iteration_budget)
        result = args.handler(args)
    except Exception as exc:
        if not isinstance(exc, (ValueError, ParseError)):
            logger.error("Command failed", error=str(exc), error_type=type(exc).__name__)
        print(json.dumps(error_payload(exc), default=_default, sort_keys=True), file=sys.stderr)
        return exit_code_for(exc)

    if args.output:
        with open(args.output, 'w', encoding='utf-8') as handle:
            json.dump(result, handle, default=_default, sort_keys=True, indent=2)
    document = {
        'result': result,
        'metadata': {
            'command': args.command,
            'version': __version__,
            'wall_time_s': round(time.perf_counter() - started, 6),
        },
    }
    print(json.dumps(document, default=_default, sort_keys=True))

    if args.command == 'verify' and not result['passed']:
        return EXIT_VALIDATION
    return EXIT_OK
