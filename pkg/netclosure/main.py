# Copyright (C) 2024 netclosure contributors. All rights reserved.

import json
import logging
import os
import sys
from argparse import ArgumentParser, Namespace
from typing import Any, Callable, Dict, List, Optional, Sequence, Text

import torch

from . import closure as closure_module
from .closure import ClosureOp, from_digraph, is_matroid, is_separable, load_closure, verify_axioms, verify_derived
from .config import Limits, load_limits
from .digraph import (
    Digraph,
    girth,
    load_digraph,
    mias,
    members,
    to_text as digraph_to_text,
)
from .errors import FormatError, NetClosureError
from .netcode import NetworkInstance, load_network, solve_network, to_guessing_digraph, verify_network_solution
from .partition import to_text as coding_to_text
from .reduce import remove_useless_part
from .solvegraph import LogValue, build, certify, chi_bounds, code_bounds, product_check

__all__ = [
    'COMMANDS',
    'run',
    'cli_main',
]

logger = logging.getLogger(__name__)

COMMANDS = [
    'closure',
    'rank',
    'reduce',
    'guess',
    'solve',
    'convert',
    'check-axioms',
    'product-check',
    'bounds',
]


class _Parser(ArgumentParser):
    def error(self, message: Text) -> None:
        raise FormatError(message)


def _extension(path: Text) -> Text:
    return os.path.splitext(path)[1].lower()


def _read(loader: Callable[..., Any], path: Text, *args: Any) -> Any:
    """Runs ``loader`` on an input file; unreadable inputs are format errors."""
    try:
        return loader(path, *args)
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror or e}")
    except UnicodeDecodeError as e:
        raise FormatError(f"{path} is not UTF-8 text: {e.reason}")


def _load_digraph(path: Text, limits: Limits) -> Digraph:
    ext = _extension(path)
    if ext == '.digraph':
        return _read(load_digraph, path, limits)
    if ext == '.json':
        return to_guessing_digraph(_read(load_network, path), limits)
    raise FormatError(f"expected a .digraph or .json input, got {path!r}")


def _load_closure(path: Text, limits: Limits) -> ClosureOp:
    if _extension(path) == '.closure':
        return _read(load_closure, path, limits)
    return from_digraph(_load_digraph(path, limits), limits)


def _load_network(path: Text) -> NetworkInstance:
    if _extension(path) != '.json':
        raise FormatError(f"expected a .json network, got {path!r}")
    return _read(load_network, path)


def _write(path: Text, text: Text) -> None:
    with open(path, 'w') as f:
        f.write(text)
    logger.info("Wrote %s", path)


def run_closure(args: Namespace, limits: Limits) -> Dict[str, Any]:
    cl = _load_closure(args.inputs[0], limits)
    text = closure_module.to_text(cl)
    result: Dict[str, Any] = {'n': cl.n, 'rank': cl.rank}
    if args.output:
        _write(args.output, text)
        result['output'] = args.output
    else:
        result['closure'] = text
    return result


def run_rank(args: Namespace, limits: Limits) -> Dict[str, Any]:
    D = _load_digraph(args.inputs[0], limits)
    cl = from_digraph(D, limits)
    return {
        'n': D.n,
        'rank': cl.rank,
        'mias': mias(D),
        'girth': girth(D),
        'closure_girth': closure_module.closure_girth(cl),
        'min_degree': closure_module.min_degree(cl),
    }


def run_reduce(args: Namespace, limits: Limits) -> Dict[str, Any]:
    D = _load_digraph(args.inputs[0], limits)
    reduced, trace = remove_useless_part(D, limits)
    if args.output:
        _write(args.output, digraph_to_text(reduced))
    return trace.to_json()


def run_guess(args: Namespace, limits: Limits) -> Dict[str, Any]:
    cl = _load_closure(args.inputs[0], limits)
    certificate = certify(cl, args.q, limits)
    data = certificate.to_json()
    return {k: data[k] for k in ('alpha', 'rank', 'q', 'solvable', 'guessing_number')}


def run_solve(args: Namespace, limits: Limits) -> Dict[str, Any]:
    path = args.inputs[0]
    if _extension(path) == '.json':
        N = _load_network(path)
        solution = solve_network(N, args.q, limits)
        result = solution.to_json()
        f = solution.coding_function
        if f is not None:
            result['verified'] = verify_network_solution(N, f, args.q, exact=args.exact_decoding)
    else:
        certificate = certify(_load_closure(path, limits), args.q, limits)
        result = certificate.to_json()
        f = certificate.coding_function
    if args.emit_certificate:
        if f is None:
            logger.warning("No certificate to write to %s", args.emit_certificate)
        else:
            _write(args.emit_certificate, coding_to_text(f))
    return result


def run_convert(args: Namespace, limits: Limits) -> Dict[str, Any]:
    D = to_guessing_digraph(_load_network(args.inputs[0]), limits)
    text = digraph_to_text(D)
    result: Dict[str, Any] = {'n': D.n, 'arcs': len(D.arcs)}
    if args.output:
        _write(args.output, text)
        result['output'] = args.output
    else:
        result['digraph'] = text
    return result


def _violations(report: Sequence[closure_module.AxiomViolation]) -> List[Dict[str, Any]]:
    return [
        {'axiom': v.axiom, 'subset': members(v.subset), 'other': members(v.other)}
        for v in report
    ]


def run_check_axioms(args: Namespace, limits: Limits) -> Dict[str, Any]:
    cl = _load_closure(args.inputs[0], limits)
    axioms = verify_axioms(cl)
    result: Dict[str, Any] = {'axioms': _violations(axioms)}
    if axioms:
        # the remaining checks assume a closure operator
        result.update(derived=None, matroid=None, separable=None)
        return result
    result['derived'] = _violations(verify_derived(cl))
    result['matroid'] = is_matroid(cl)
    result['separable'] = is_separable(cl)
    return result


def run_product_check(args: Namespace, limits: Limits) -> Dict[str, Any]:
    cl1 = _load_closure(args.inputs[0], limits)
    cl2 = _load_closure(args.inputs[1], limits)
    return product_check(cl1, cl2, args.q, limits)


def run_bounds(args: Namespace, limits: Limits) -> Dict[str, Any]:
    cl = _load_closure(args.inputs[0], limits)
    lower, upper = code_bounds(cl, args.q, limits)
    chi_lower, chi_upper, _ = chi_bounds(build(cl, args.q, limits), limits)
    certificate = certify(cl, args.q, limits)
    return {
        'lower': str(lower),
        'upper': str(upper),
        'alpha': certificate.alpha,
        'guessing_number': str(LogValue(certificate.alpha, args.q)),
        'min_degree': closure_module.min_degree(cl),
        'closure_girth': closure_module.closure_girth(cl),
        'chi_lower': chi_lower,
        'chi_upper': chi_upper,
    }


HANDLERS: Dict[Text, Callable[[Namespace, Limits], Dict[str, Any]]] = {
    'closure': run_closure,
    'rank': run_rank,
    'reduce': run_reduce,
    'guess': run_guess,
    'solve': run_solve,
    'convert': run_convert,
    'check-axioms': run_check_axioms,
    'product-check': run_product_check,
    'bounds': run_bounds,
}


def _make_parser() -> ArgumentParser:
    parser = _Parser(prog='netclosure', description="Closure operators and network coding solvability")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("inputs", nargs='+', help=".digraph, .json (network) or .closure file")
    parser.add_argument("--q", type=int, default=2, help="alphabet size")
    parser.add_argument("--config", type=str, help="YAML file with a limits section")
    parser.add_argument("--jobs", type=int, help="number of torch threads")
    parser.add_argument("--output", type=str)
    parser.add_argument("--emit-certificate", type=str, help="write the coding function here")
    parser.add_argument("--exact-decoding", action="store_true", help="sinks must output the source message itself")
    parser.add_argument("--verbose", action="store_true")
    return parser


def _error(e: Exception) -> Dict[str, Any]:
    return {'error': {'type': type(e).__name__, 'message': str(e)}}


def run(argv: Optional[Sequence[Text]] = None) -> int:
    """Runs one command and prints its JSON result; returns the exit status."""
    try:
        args = _make_parser().parse_args(argv)
        expected = 2 if args.command == 'product-check' else 1
        if len(args.inputs) != expected:
            raise FormatError(f"{args.command} takes {expected} input file(s), got {len(args.inputs)}")
        if args.q < 2:
            raise FormatError(f"--q must be at least 2, got {args.q}")
    except FormatError as e:
        print(json.dumps(_error(e), sort_keys=True))
        return 2

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s:%(name)s:%(message)s")
    if args.jobs:
        torch.set_num_threads(args.jobs)

    try:
        limits = _read(load_limits, args.config)
        result = HANDLERS[args.command](args, limits)
    except FormatError as e:
        logger.error("%s", e)
        print(json.dumps(_error(e), sort_keys=True))
        return 2
    except (NetClosureError, OSError) as e:
        logger.error("%s", e)
        print(json.dumps(_error(e), sort_keys=True))
        return 1
    print(json.dumps(result, sort_keys=True))
    return 0


def cli_main():
    sys.exit(run())


if __name__ == "__main__":
    cli_main()
