"""Command-line front end.

Exit codes are stable:

    0  success (check: the structure is a net)
    1  negative answer (not a net, not sequentializable, step mismatch)
    2  a limit or budget was hit
    3  the input parsed but is not a valid proof structure / proof
    4  usage errors, unreadable or syntactically malformed input
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import ndtm
from .correctness import DEFAULT_LIMIT, is_proof_net
from .reduction import DEFAULT_STEP_BUDGET, NotANet, normalize_all
from .sequent import (
    DEFAULT_BUDGET,
    DesequentializationError,
    ProofRuleError,
    ProofSyntaxError,
    SearchBudgetExceeded,
    SequentializationFailed,
    check_proof,
    desequentialize,
    parse_proof,
    print_proof,
    sequentialize,
)
from .structure import StructureParseError, parse_structure, serialize_structure, validate

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_LIMIT = 2
EXIT_INVALID = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class InputError(Exception):
    """Malformed or unreadable input, already formatted with file/line context."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: cannot read: {e.strerror}") from None


def _write(path: Optional[str], text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise InputError(f"{path}: cannot write: {e.strerror}") from None


def _located(path: str, e) -> InputError:
    msg = str(e).split(": ", 1)[-1] if str(e).startswith("line ") else str(e)
    return InputError(f"{path}:{e.line}: {msg}" if e.line else f"{path}: {msg}")


def _load_structure(path: str):
    try:
        return parse_structure(_read(path))
    except StructureParseError as e:
        raise _located(path, e) from None


def _load_proof(path: str):
    text = _read(path)
    try:
        return parse_proof(text)
    except ProofSyntaxError as e:
        raise _located(path, e) from None


def _load_machine(path: str):
    try:
        return ndtm.parse_machine(_read(path))
    except ndtm.MachineParseError as e:
        raise _located(path, e) from None


def _report_invalid(path: str, report, err) -> None:
    for v in report.violations:
        print(f"{path}: {v}", file=err)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# --------------------------------------------------------------------- verbs


def cmd_check(args, out, err) -> int:
    s = _load_structure(args.file)
    report = validate(s)
    if not report.ok:
        if args.json:
            print(_dump({"verdict": "INVALID", "violations": [
                {"condition": v.condition, "message": v.message, "ids": list(v.ids)} for v in report.violations
            ]}), file=out)
        else:
            print("INVALID", file=out)
        _report_invalid(args.file, report, err)
        return EXIT_INVALID
    verdict = is_proof_net(s, args.max_switchings, check_valid=False)
    if args.json:
        print(_dump(verdict.to_json()), file=out)
    elif verdict.outcome == "NET":
        print(f"NET ({verdict.count} switchings)", file=out)
    elif verdict.outcome == "NOT_NET":
        print(f"NOT_NET {verdict.defect}", file=out)
        print(f"witness: {verdict.witness}", file=out)
    else:
        print(f"LIMIT_EXCEEDED (more than {args.max_switchings} switchings)", file=out)
    return {"NET": EXIT_OK, "NOT_NET": EXIT_NEGATIVE}.get(verdict.outcome, EXIT_LIMIT)


def cmd_deseq(args, out, err) -> int:
    try:
        p = parse_proof(_read(args.proof))
    except ProofRuleError as e:
        print(_located(args.proof, e), file=err)
        return EXIT_INVALID
    except ProofSyntaxError as e:
        raise _located(args.proof, e) from None
    res = check_proof(p)
    if not res:
        for d in res.diagnostics:
            print(f"{args.proof}: {d}", file=err)
        return EXIT_INVALID
    try:
        s = desequentialize(p)
    except DesequentializationError as e:
        print(f"{args.proof}: {e}", file=err)
        return EXIT_INVALID
    _write(args.output, serialize_structure(s), out)
    return EXIT_OK


def cmd_seq(args, out, err) -> int:
    s = _load_structure(args.file)
    report = validate(s)
    if not report.ok:
        _report_invalid(args.file, report, err)
        return EXIT_INVALID
    try:
        p = sequentialize(s, args.budget)
    except SequentializationFailed as e:
        print(f"{args.file}: not sequentializable", file=err)
        for line in e.trace:
            print(f"  {line}", file=err)
        return EXIT_NEGATIVE
    except SearchBudgetExceeded as e:
        print(f"{args.file}: {e}", file=err)
        return EXIT_LIMIT
    _write(args.output, print_proof(p), out)
    return EXIT_OK


def cmd_normalize(args, out, err) -> int:
    if (args.strategy == "random") != (args.seed is not None):
        raise UsageError("--seed is required with --strategy random and only allowed with it")
    s = _load_structure(args.file)
    report = validate(s)
    if not report.ok:
        _report_invalid(args.file, report, err)
        return EXIT_INVALID
    try:
        tree = normalize_all(s, args.strategy, args.seed, args.budget, check=not args.no_check, limit=args.max_switchings)
    except NotANet as e:
        print(f"{args.file}: {e}", file=err)
        return EXIT_LIMIT if "LIMIT_EXCEEDED" in str(e) else EXIT_NEGATIVE
    leaves = tree.leaves()
    if args.trace:
        for line in tree.trace:
            print(line, file=out)
    stem = Path(args.file).stem
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    summary = []
    for k, leaf in enumerate(leaves):
        status = "complete" if leaf.complete else "incomplete"
        print(f"leaf {k} branch {leaf.path} steps {leaf.depth} {status}", file=out)
        text = serialize_structure(leaf.structure)
        path = None
        if args.out_dir:
            path = str(Path(args.out_dir) / f"{stem}-leaf{k}.net")
            _write(path, text, out)
        else:
            out.write(text)
        summary.append({"branch": leaf.path, "steps": leaf.depth, "complete": leaf.complete, "file": path})
    print(f"total steps {tree.total_steps} leaves {len(leaves)}", file=out)
    if args.json:
        print(_dump({"total_steps": tree.total_steps, "leaves": summary, "complete": tree.complete}), file=out)
    return EXIT_OK if tree.complete else EXIT_LIMIT


def cmd_ndtm_encode(args, out, err) -> int:
    m = _load_machine(args.machine)
    try:
        pm = ndtm.pad_with_halt(m)
    except ndtm.MachineError as e:
        print(f"{args.machine}: {e}", file=err)
        return EXIT_INVALID
    _write(args.output, serialize_structure(ndtm.encode_move_relation(pm)), out)
    return EXIT_OK


def _multiset_lines(ms) -> list[str]:
    return [f"{n} {y} {t} {d}" for (y, t, d), n in sorted(ms.items())]


def _multiset_json(ms) -> list[dict]:
    return [{"symbol": y, "state": t, "direction": d, "count": n} for (y, t, d), n in sorted(ms.items())]


def cmd_ndtm_step(args, out, err) -> int:
    m = _load_machine(args.machine)
    if args.symbol not in m.symbols or args.state not in m.states:
        raise UsageError(f"({args.symbol}, {args.state}) is not a declared symbol/state pair of {args.machine}")
    try:
        ndtm.branching_factor(m)
    except ndtm.MachineError as e:
        print(f"{args.machine}: {e}", file=err)
        return EXIT_INVALID
    results = {}
    if args.via in ("net", "verify"):
        results["net"] = ndtm.run_step(m, args.symbol, args.state)
    if args.via in ("oracle", "verify"):
        results["oracle"] = ndtm.oracle_step(m, args.symbol, args.state)
    match = results["net"] == results["oracle"] if args.via == "verify" else None
    if args.json:
        obj = {k: _multiset_json(v) for k, v in results.items()}
        if match is not None:
            obj["match"] = match
        print(_dump(obj), file=out)
    else:
        for name, ms in results.items():
            if len(results) > 1:
                print(f"{name}:", file=out)
            for line in _multiset_lines(ms):
                print(line, file=out)
        if match is not None:
            print("MATCH" if match else "MISMATCH", file=out)
    return EXIT_NEGATIVE if match is False else EXIT_OK


def _sniff(path: str, text: str) -> str:
    suffix = Path(path).suffix
    if suffix in (".net", ".tm", ".proof"):
        return suffix[1:]
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("("):
            return "proof"
        if line.split()[0] in ("occ", "link"):
            return "net"
        if line.split()[0] in ("symbols", "states", "trans"):
            return "tm"
        break
    raise InputError(f"{path}: cannot tell whether this is a proof, a structure or a machine")


def cmd_fmt(args, out, err) -> int:
    kind = _sniff(args.file, _read(args.file))
    if kind == "net":
        text = serialize_structure(_load_structure(args.file))
    elif kind == "tm":
        text = ndtm.serialize_machine(_load_machine(args.file))
    else:
        text = print_proof(_load_proof(args.file))
    _write(args.output, text, out)
    return EXIT_OK


# --------------------------------------------------------------------- parser


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ndmall", description="Nondeterministic MALL proof nets: checking, sequentialization, cut elimination.")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    p = sub.add_parser("check", help="run the correctness criterion on a structure file")
    p.add_argument("file")
    p.add_argument("--max-switchings", type=_positive, default=DEFAULT_LIMIT, metavar="N")
    p.add_argument("--json", action="store_true", help="print a JSON object instead of text")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("deseq", help="compile a sequent proof into a proof structure")
    p.add_argument("proof")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_deseq)

    p = sub.add_parser("seq", help="recover a sequent proof from a proof structure")
    p.add_argument("file")
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET, metavar="N")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_seq)

    p = sub.add_parser("normalize", help="lazy cut elimination with branching")
    p.add_argument("file")
    p.add_argument("--strategy", choices=("first", "random"), default="first")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=_positive, default=DEFAULT_STEP_BUDGET, metavar="N")
    p.add_argument("--trace", action="store_true", help="print one line per reduction step")
    p.add_argument("--out-dir", metavar="D", help="write leaves as <stem>-leaf<k>.net into D")
    p.add_argument("--no-check", action="store_true", help="skip the proof-net check of the input")
    p.add_argument("--max-switchings", type=_positive, default=DEFAULT_LIMIT, metavar="N")
    p.add_argument("--json", action="store_true", help="append a JSON summary line")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("ndtm", help="machine encoding and one-step execution")
    nsub = p.add_subparsers(dest="ndtm_verb", required=True, metavar="ACTION")
    e = nsub.add_parser("encode", help="write the move-relation net of a machine")
    e.add_argument("machine")
    e.add_argument("-o", "--output", help="output file (default: stdout)")
    e.set_defaults(func=cmd_ndtm_encode)
    s = nsub.add_parser("step", help="one machine step from (symbol, state)")
    s.add_argument("machine")
    s.add_argument("--symbol", required=True)
    s.add_argument("--state", required=True)
    s.add_argument("--via", choices=("net", "oracle", "verify"), default="verify")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_ndtm_step)

    p = sub.add_parser("fmt", help="print a proof, structure or machine file in canonical form")
    p.add_argument("file")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_fmt)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.func(args, out, err)
    except UsageError as e:
        print(f"ndmall: error: {e}", file=err)
        return EXIT_USAGE
    except InputError as e:
        print(str(e), file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
