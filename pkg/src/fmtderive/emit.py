"""Documentation emission: group I/O events by target file and serialize one
data-format XML document per file, plus the fmtderive command line tool."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import diagnostics as diag
from .diagnostics import AnalysisError, Diagnostic
from .fmtengine import (
    DescriptorError, canonical_text as descriptor_text, data_format_of,
    describe, expand, layout_table, parse_descriptors,
)
from .ioflow import AnalyzeOptions, IoEvent, analyze, dump_events
from .lexer import FIXED_FORM, FREE_FORM, SourceUnit, describe_token, tokenize
from .symbols import build_tables, doc_name, dump_symbols
from .syntax import ListDirected, attach_formats, dump_ast, parse


@dataclass(frozen=True)
class FieldEntry:
    type_name: str  # integer, real, double, character, ...
    format: str  # canonical descriptor text, or "*" for list-directed
    separators_before: tuple[str, ...] = ()


@dataclass(frozen=True)
class RecordGroup:
    number: int | str
    entries: tuple[FieldEntry, ...]
    separator_mode: str  # "list-directed" or "explicit"
    resolved_default: int | None = None  # set when number is symbolic
    conditional: bool = False


@dataclass
class DataFormatDoc:
    file_name: str
    direction: str  # input, output or both
    groups: tuple[RecordGroup, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()


def build_docs(events: list[IoEvent]) -> list[DataFormatDoc]:
    """Fold events into one document per target file, groups in source order."""
    order: list[str] = []
    per_file: dict[str, list[IoEvent]] = {}
    for event in events:
        name = event.binding.file_name
        if name not in per_file:
            per_file[name] = []
            order.append(name)
        per_file[name].append(event)

    docs = []
    for name in order:
        file_events = per_file[name]
        directions = {e.direction for e in file_events}
        if directions == {"READ"}:
            direction = "input"
        elif directions == {"WRITE"}:
            direction = "output"
        else:
            direction = "both"

        groups: list[RecordGroup] = []
        notes: list[Diagnostic] = []
        seen_bindings: set[int] = set()
        for event in file_events:
            if id(event.binding) not in seen_bindings:
                seen_bindings.add(id(event.binding))
                notes.extend(event.binding.diagnostics)
            notes.extend(event.diagnostics)
            if not event.items:
                continue
            mult = event.multiplicity
            if mult.resolved == 0:
                notes.append(Diagnostic(
                    diag.ZERO_MULTIPLICITY,
                    f"the group from line {event.source_line} never executes",
                    event.source_line,
                ))
            number: int | str = mult.resolved
            resolved_default = None
            if mult.defaulted:
                number = mult.symbolic
                resolved_default = mult.resolved
            entries = tuple(
                FieldEntry(
                    doc_name(item.data_type),
                    data_format_of(item.data_type, item.descriptor),
                    tuple(descriptor_text([sep]) for sep in item.separators),
                )
                for item in event.items
            )
            separator_mode = (
                "list-directed" if isinstance(event.format, ListDirected) else "explicit"
            )
            groups.append(RecordGroup(
                number, entries, separator_mode, resolved_default, mult.conditional))

        deduped: list[Diagnostic] = []
        for note in notes:
            if note not in deduped:
                deduped.append(note)
        docs.append(DataFormatDoc(name, direction, tuple(groups), tuple(deduped)))
    return docs


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def serialize(doc: DataFormatDoc) -> str:
    """Render a document as well-formed XML with two-space indentation."""
    open_tag = f'<dataformat file="{_esc(doc.file_name)}" direction="{doc.direction}">'
    children: list[str] = []
    for group in doc.groups:
        attrs = [f'number="{_esc(str(group.number))}"']
        if group.resolved_default is not None:
            attrs.append(f'resolved="{group.resolved_default}"')
            attrs.append('resolution="default"')
        attrs.append(f'separator="{group.separator_mode}"')
        if group.conditional:
            attrs.append('conditional="true"')
        children.append(f'  <group {" ".join(attrs)}>')
        for entry in group.entries:
            for sep in entry.separators_before:
                children.append(f'    <sep format="{_esc(sep)}"/>')
            children.append(
                f'    <{entry.type_name} format="{_esc(entry.format)}"/>')
        children.append("  </group>")
    for note in doc.diagnostics:
        attrs = f' kind="{_esc(note.kind)}"'
        if note.line is not None:
            attrs += f' line="{note.line}"'
        children.append(f"  <note{attrs}>{_esc(note.message)}</note>")
    if not children:
        return f"{open_tag}</dataformat>\n"
    return "\n".join([open_tag, *children, "</dataformat>"]) + "\n"


# ---------------------------------------------------------------------------
# Command line tool
# ---------------------------------------------------------------------------


def _doc_file_name(target: str) -> str:
    name = target.strip("<>").replace("/", "_").replace("\\", "_")
    return f"{name}.format.xml"


@dataclass
class _ParseFlags:
    dialect: str = FIXED_FORM
    default_loop_count: int = 1
    dump_tokens: bool = False
    dump_ast: bool = False
    dump_symbols: bool = False
    dump_events: bool = False


def process_source(
    path: str,
    text: str,
    out_dir: Path,
    flags: _ParseFlags,
    out=None,
) -> list[Path]:
    """Run the full pipeline on one source file and write its documents."""
    if out is None:
        out = sys.stdout
    unit = SourceUnit(path, text, flags.dialect)
    tokens = tokenize(unit)
    if flags.dump_tokens:
        for tok in tokens:
            print(f"{tok.line}:{tok.column} {describe_token(tok)} {tok.lexeme}", file=out)
    program = parse(tokens)
    if flags.dump_ast:
        print(dump_ast(program), file=out)
    formats = attach_formats(program)
    tables = build_tables(program)
    if flags.dump_symbols:
        print(dump_symbols(tables), file=out)
    events = analyze(program, tables, formats,
                     AnalyzeOptions(flags.default_loop_count))
    if flags.dump_events:
        print(dump_events(events), file=out)

    written = []
    for doc in build_docs(events):
        target = out_dir / _doc_file_name(doc.file_name)
        target.write_text(serialize(doc), encoding="ascii")
        print(f"{doc.file_name}: {doc.direction}, {len(doc.groups)} group(s)"
              f" -> {target}", file=out)
        written.append(target)
    return written


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmtderive",
        description="Derive data-format documentation for the files a"
                    " FORTRAN program reads and writes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="analyze source files and emit format docs")
    p_parse.add_argument("sources", nargs="+", help="FORTRAN source files")
    p_parse.add_argument("-o", "--output-dir", default=".", help="directory for emitted docs")
    p_parse.add_argument("--dialect", choices=["fixed", "free"], default="fixed")
    p_parse.add_argument("--default-loop-count", type=int, default=1, metavar="N",
                         help="trip count assumed for loops with variable bounds")
    p_parse.add_argument("--dump-tokens", action="store_true")
    p_parse.add_argument("--dump-ast", action="store_true")
    p_parse.add_argument("--dump-symbols", action="store_true")
    p_parse.add_argument("--dump-events", action="store_true")

    p_desc = sub.add_parser("descriptor", help="expand one format descriptor text")
    p_desc.add_argument("text", help="descriptor list, without the outer parentheses")
    return parser


def run_cli(argv: list[str] | None = None) -> int:
    """Entry point; returns 0 on success, 1 on analysis errors, 2 on usage."""
    parser = _build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    if args.command == "descriptor":
        try:
            descriptors = parse_descriptors(args.text)
        except DescriptorError as err:
            print(f"error: {err}", file=sys.stderr)
            return 1
        layout = expand(descriptors)
        print(layout_table(layout))
        print(describe(layout))
        return 0

    flags = _ParseFlags(
        dialect=FIXED_FORM if args.dialect == "fixed" else FREE_FORM,
        default_loop_count=args.default_loop_count,
        dump_tokens=args.dump_tokens,
        dump_ast=args.dump_ast,
        dump_symbols=args.dump_symbols,
        dump_events=args.dump_events,
    )
    out_dir = Path(args.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        print(f"error: cannot create output directory: {err}", file=sys.stderr)
        return 1

    status = 0
    for source in args.sources:
        try:
            text = Path(source).read_text(encoding="ascii", errors="strict")
        except (OSError, UnicodeError) as err:
            print(f"error: {source}: {err}", file=sys.stderr)
            status = 1
            continue
        try:
            process_source(source, text, out_dir, flags)
        except AnalysisError as err:
            print(f"error: {source}: {err}", file=sys.stderr)
            status = 1
    return status


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
