"""Command-line interface.

Subcommands: ``validate`` (trace-preservation check), ``decompose`` (full
structure report), ``build`` (channel files for classical Markov chains and
truncated open quantum random walks), and ``query`` (enclosure generated by
a vector, irreducibility certificate, fixed points, peripheral spectrum).

All results are canonical JSON on standard output (and optionally ``--out``).
Exit codes: 0 success, 1 domain failure, 2 input/parse failure.
"""

import argparse
import json
import sys

import numpy as np

from .channels import (
    from_markov_chain,
    from_oqrw,
    oqrw_transition_map,
    validate,
)
from .errors import ArgumentError, ChanstructError, DecompositionError, ParseError
from .linalg import Tolerance
from .serialize import (
    _matrix_to_lists,
    _pair_to_complex,
    canonical_dumps,
    channel_to_dict,
    load_channel,
    report_file_from_report,
    report_file_to_dict,
    validation_to_dict,
)
from .spectral import (
    fixed_space,
    peripheral_spectrum,
    perron_frobenius_certificate,
)
from .structure import decompose, enclosure_generated

__all__ = ["main"]


def _add_tol_flags(parser):
    parser.add_argument(
        "--tol-rank", type=float, default=None, metavar="X",
        help="relative singular-value cutoff for rank decisions",
    )
    parser.add_argument(
        "--tol-eig", type=float, default=None, metavar="X",
        help="eigenvalue clustering distance",
    )
    parser.add_argument(
        "--tol-psd", type=float, default=None, metavar="X",
        help="allowed negative-eigenvalue magnitude in PSD checks",
    )


def _add_out_flag(parser):
    parser.add_argument(
        "--out", default=None, metavar="PATH",
        help="also write the JSON output to this file",
    )


def _tolerance(args):
    kwargs = {}
    if args.tol_rank is not None:
        kwargs["rank_tol"] = args.tol_rank
    if args.tol_eig is not None:
        kwargs["eig_cluster_tol"] = args.tol_eig
    if args.tol_psd is not None:
        kwargs["psd_tol"] = args.tol_psd
    return Tolerance(**kwargs)


def _emit(doc, out_path=None):
    text = canonical_dumps(doc)
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_validate(args):
    tol = _tolerance(args)
    ch = load_channel(args.channel, tol=tol, unchecked=True)
    vr = validate(ch, tol)
    _emit(validation_to_dict(ch, vr), args.out)
    return 0 if vr.trace_preserving else 1


def cmd_decompose(args):
    tol = _tolerance(args)
    ch = load_channel(args.channel, tol=tol, unchecked=args.unchecked)
    report = decompose(ch, rng_seed=args.seed, tol=tol)
    rf = report_file_from_report(report)
    _emit(report_file_to_dict(rf), args.out)
    return 0


def _load_real_matrix(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: malformed JSON ({err})") from err
    if not isinstance(data, list) or not data:
        raise ParseError(f"{path}: expected a nonempty array of rows")
    for i, row in enumerate(data):
        if not isinstance(row, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in row
        ):
            raise ParseError(f"{path}: row {i} must be an array of numbers")
    try:
        return np.array(data, dtype=float)
    except ValueError as err:
        raise ParseError(f"{path}: ragged matrix ({err})") from err


def cmd_build(args):
    tol = _tolerance(args)
    if args.family == "markov":
        matrix = _load_real_matrix(args.matrix)
        ch = from_markov_chain(matrix, tol=tol)
        metadata = {
            "name": "markov",
            "description": f"classical Markov-chain channel on {ch.dim} states",
        }
    else:
        transitions = oqrw_transition_map(args.p, args.q, args.sites)
        ch = from_oqrw(transitions, args.sites, tol=tol)
        metadata = {
            "name": "oqrw",
            "description": (
                f"open quantum random walk, p={args.p}, q={args.q}, "
                f"sites 0..{args.sites}, reflecting truncation"
            ),
        }
    _emit(channel_to_dict(ch, metadata), args.out)
    return 0


def _parse_vector(text, dim):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"--vector: malformed JSON ({err})") from err
    if not isinstance(data, list):
        raise ParseError("--vector: expected a JSON array")
    if len(data) != dim:
        raise ParseError(
            f"--vector: expected length {dim}, got {len(data)}"
        )
    return np.array(
        [_pair_to_complex(z, f"--vector[{i}]") for i, z in enumerate(data)],
        dtype=complex,
    )


def cmd_query(args):
    tol = _tolerance(args)
    ch = load_channel(args.channel, tol=tol, unchecked=args.unchecked)
    if args.what == "enclosure":
        vector = _parse_vector(args.vector, ch.dim)
        space = enclosure_generated(ch, vector, tol)
        doc = {
            "dimension": space.dimension,
            "frame": _matrix_to_lists(space.frame),
        }
    elif args.what == "irreducible":
        cert = perron_frobenius_certificate(ch, tol)
        doc = {
            "irreducible": cert.simple_and_faithful,
            "certificate": {
                "eigenvalue_1_multiplicity": cert.eigenvalue_1_multiplicity,
                "invariant_state_rank": cert.invariant_state_rank,
                "simple_and_faithful": cert.simple_and_faithful,
            },
        }
    elif args.what == "fixed-points":
        fs = fixed_space(ch, tol)
        doc = {
            "dimension": fs.dimension,
            "hermitian_basis": [_matrix_to_lists(h) for h in fs.hermitian_basis],
        }
    else:
        spectrum = peripheral_spectrum(ch, tol)
        doc = {
            "peripheral_spectrum": [
                [float(z.real), float(z.imag)] for z in spectrum
            ]
        }
    _emit(doc, args.out)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="chanstruct",
        description="Structure analysis of quantum channels in Kraus form.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check trace preservation")
    p_val.add_argument("channel", help="channel JSON file")
    _add_tol_flags(p_val)
    _add_out_flag(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_dec = sub.add_parser("decompose", help="full structure report")
    p_dec.add_argument("channel", help="channel JSON file")
    p_dec.add_argument("--seed", type=int, default=0, help="sampling seed")
    p_dec.add_argument(
        "--unchecked", action="store_true",
        help="skip channel validation on load",
    )
    _add_tol_flags(p_dec)
    _add_out_flag(p_dec)
    p_dec.set_defaults(func=cmd_decompose)

    p_build = sub.add_parser("build", help="construct channel files")
    family = p_build.add_subparsers(dest="family", required=True)
    p_markov = family.add_parser("markov", help="classical Markov-chain channel")
    p_markov.add_argument(
        "--matrix", required=True,
        help="JSON file with a column-stochastic matrix",
    )
    _add_tol_flags(p_markov)
    _add_out_flag(p_markov)
    p_markov.set_defaults(func=cmd_build, family="markov")
    p_oqrw = family.add_parser(
        "oqrw", help="truncated open quantum random walk"
    )
    p_oqrw.add_argument("--p", type=float, required=True, help="hop-up probability")
    p_oqrw.add_argument("--q", type=float, required=True, help="boundary-lane rate")
    p_oqrw.add_argument(
        "--sites", type=int, required=True,
        help="last retained site index N (sites 0..N)",
    )
    _add_tol_flags(p_oqrw)
    _add_out_flag(p_oqrw)
    p_oqrw.set_defaults(func=cmd_build, family="oqrw")

    p_query = sub.add_parser("query", help="single-object queries")
    what = p_query.add_subparsers(dest="what", required=True)
    specs = {
        "enclosure": "smallest enclosure containing a vector",
        "irreducible": "irreducibility certificate",
        "fixed-points": "Hermitian basis of the fixed points",
        "spectrum": "peripheral eigenvalues of the superoperator",
    }
    for name, help_text in specs.items():
        p_what = what.add_parser(name, help=help_text)
        p_what.add_argument("channel", help="channel JSON file")
        if name == "enclosure":
            p_what.add_argument(
                "--vector", required=True,
                help="JSON array; entries are numbers or [re, im] pairs",
            )
        p_what.add_argument(
            "--unchecked", action="store_true",
            help="skip channel validation on load",
        )
        _add_tol_flags(p_what)
        _add_out_flag(p_what)
        p_what.set_defaults(func=cmd_query, what=name)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        _emit({"error": {"type": "ParseError", "message": str(err)}})
        print(f"error: {err}", file=sys.stderr)
        return 2
    except DecompositionError as err:
        doc = {
            "error": {
                "type": "DecompositionError",
                "stage": err.stage,
                "message": str(err),
            }
        }
        if err.diagnostics:
            doc["error"]["diagnostics"] = err.diagnostics
        _emit(doc)
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ChanstructError as err:
        _emit({"error": {"type": type(err).__name__, "message": str(err)}})
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
