"""Command-line interface: save, load, roundtrip, inspect, verify."""

from __future__ import annotations

import argparse
import sys

from . import errors
from .checkpoint import CheckpointFile
from .element import LagrangeElement
from .fieldexpr import parse_field
from .harness import (
    DEFAULT_FUNC,
    DEFAULT_MESH,
    DEFAULT_SPACE,
    MeshSpec,
    SimComm,
    load_state,
    max_deviation,
    run_roundtrip,
    save_state,
)

_EXIT_CODES = {
    errors.VersionMismatch: 3,
    errors.MissingDataset: 4,
    errors.RankCountMismatch: 5,
    errors.FieldSyntaxError: 6,
    errors.UnsupportedShape: 7,
    errors.UnsupportedElement: 7,
    errors.SizeMismatch: 8,
    errors.TooFewCells: 9,
}


def _exit_code(exc: errors.NmckError) -> int:
    for cls, code in _EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return 2


def _add_names(p):
    p.add_argument("--name", default=DEFAULT_MESH, help="mesh name in the file")
    p.add_argument("--space", default=DEFAULT_SPACE, help="function space name")
    p.add_argument("--func", default=DEFAULT_FUNC, help="function name")


def _add_problem(p):
    p.add_argument("--mesh", required=True, help="mesh spec, e.g. unit-square:8")
    p.add_argument("--family", choices=["P", "DP"], default="P")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--field", required=True, help="polynomial in x,y,z, e.g. 'x^2 - y'")


def _check_degree(field, element):
    if field.degree > element.degree:
        print(
            f"warning: field degree {field.degree} exceeds element degree "
            f"{element.degree}; the stored function is the interpolant only",
            file=sys.stderr,
        )


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmck",
        description="Save and reload distributed finite-element state "
        "with independent rank counts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("save", help="interpolate a field and write a checkpoint")
    p.add_argument("--ranks", type=int, required=True)
    _add_problem(p)
    p.add_argument("--out", required=True)
    _add_names(p)

    p = sub.add_parser("load", help="reload a checkpoint and print a summary")
    p.add_argument("--ranks", type=int, required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--exact-distribution", action="store_true")
    _add_names(p)

    p = sub.add_parser("roundtrip", help="save on N ranks, load on M, verify")
    p.add_argument("--save-ranks", type=int, required=True)
    p.add_argument("--load-ranks", type=int, required=True)
    _add_problem(p)
    p.add_argument("--out", default=None, help="checkpoint path (default: temporary)")
    p.add_argument("--threads", action="store_true", help="run ranks on threads")
    p.add_argument("--exact-distribution", action="store_true")
    _add_names(p)

    p = sub.add_parser("inspect", help="list the datasets in a checkpoint")
    p.add_argument("file")

    p = sub.add_parser("verify", help="compare stored DoFs against a fresh interpolation")
    p.add_argument("file")
    p.add_argument("--field", required=True)
    p.add_argument("--ranks", type=int, default=1)
    p.add_argument("--exact-distribution", action="store_true")
    _add_names(p)

    return parser


def cmd_save(args) -> int:
    spec = MeshSpec.parse(args.mesh)
    element = LagrangeElement(args.family, args.degree)
    fld = parse_field(args.field)
    _check_degree(fld, element)
    comm = SimComm(args.ranks)
    save_state(comm, spec, element, fld, args.out, args.name, args.space, args.func)
    print(f"saved {args.mesh} {element.tag()} field '{args.field}' "
          f"from {args.ranks} ranks to {args.out}")
    return 0


def cmd_load(args) -> int:
    comm = SimComm(args.ranks)
    state = load_state(
        comm, args.file, args.name, args.space, args.func,
        exact_distribution=args.exact_distribution,
    )
    print(f"entities={state.mesh.numbering.total}")
    print(f"element={state.element.tag()}")
    print(f"dofs={sum(state.sf_dofs.nroots)}")
    for r, plex in enumerate(state.mesh.plexes):
        print(
            f"rank{r}: points={plex.npoints} cells={len(plex.cells())} "
            f"local_dofs={state.section.ndofs(r)}"
        )
    return 0


def cmd_roundtrip(args) -> int:
    import os
    import tempfile

    spec = MeshSpec.parse(args.mesh)
    element = LagrangeElement(args.family, args.degree)
    fld = parse_field(args.field)
    _check_degree(fld, element)
    path = args.out
    temporary = path is None
    if temporary:
        tmp = tempfile.NamedTemporaryFile(suffix=".nmck", delete=False)
        tmp.close()
        path = tmp.name
    try:
        report = run_roundtrip(
            spec, element, args.field, args.save_ranks, args.load_ranks, path,
            mode="threads" if args.threads else "sequential",
            exact_distribution=args.exact_distribution,
        )
    finally:
        if temporary:
            os.unlink(path)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def cmd_inspect(args) -> int:
    with CheckpointFile(args.file, "r") as f:
        for name in f.dataset_names():
            shape = f.dataset_shape(name)
            dims = "x".join(str(d) for d in shape) if shape else "scalar"
            print(f"{name}  [{dims}]")
    return 0


def cmd_verify(args) -> int:
    fld = parse_field(args.field)
    comm = SimComm(args.ranks)
    state = load_state(
        comm, args.file, args.name, args.space, args.func,
        exact_distribution=args.exact_distribution,
    )
    _check_degree(fld, state.element)
    dev = max_deviation(comm, state, fld)
    print(f"max_deviation={dev!r}")
    return 0 if dev == 0.0 else 1


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    handler = {
        "save": cmd_save,
        "load": cmd_load,
        "roundtrip": cmd_roundtrip,
        "inspect": cmd_inspect,
        "verify": cmd_verify,
    }[args.command]
    try:
        return handler(args)
    except errors.NmckError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
