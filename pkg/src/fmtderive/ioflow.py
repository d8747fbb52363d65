"""Per-file I/O event extraction: unit binding, item typing, format pairing
and loop-multiplicity computation."""

from __future__ import annotations

from dataclasses import dataclass

from . import diagnostics as diag
from .diagnostics import AnalysisError, Diagnostic
from .fmtengine import EditDescriptor, data_format_of, pair_items, parse_descriptors
from .symbols import (
    DataType, INTEGER, REAL, SymbolTables, Unresolved, character, eval_int,
    lookup_type,
)
from .syntax import (
    CloseStmt, DoStmt, Inline, IntExpr, Label, ListDirected, Literal,
    OpenStmt, ProgramUnit, ReadStmt, StarUnit, Stmt, WriteStmt, expr_text,
)

STDIN_NAME = "<stdin>"
STDOUT_NAME = "<stdout>"


class MissingFormatLabel(AnalysisError):
    def __init__(self, label: int, line: int):
        super().__init__(f"line {line}: FORMAT label {label} is never defined")
        self.label = label
        self.line = line


@dataclass
class UnitBinding:
    unit: int | str
    file_name: str
    status: str | None = None
    opened_at: int = 0
    closed_at: int | None = None
    diagnostics: tuple[Diagnostic, ...] = ()


@dataclass(frozen=True)
class Multiplicity:
    symbolic: str
    resolved: int
    conditional: bool = False
    defaulted: bool = False


@dataclass(frozen=True)
class EventItem:
    name: str
    data_type: DataType
    descriptor: EditDescriptor | None
    separators: tuple[EditDescriptor, ...] = ()


@dataclass(frozen=True)
class IoEvent:
    direction: str  # READ or WRITE
    binding: UnitBinding
    format: ListDirected | Label | Inline
    items: tuple[EventItem, ...]
    multiplicity: Multiplicity
    source_line: int
    diagnostics: tuple[Diagnostic, ...] = ()


@dataclass
class AnalyzeOptions:
    default_loop_count: int = 1


def _walk(unit: ProgramUnit) -> list[tuple[Stmt, tuple[DoStmt, ...]]]:
    out: list[tuple[Stmt, tuple[DoStmt, ...]]] = []

    def visit(stmts: list[Stmt], path: tuple[DoStmt, ...]):
        for stmt in stmts:
            out.append((stmt, path))
            if isinstance(stmt, DoStmt):
                visit(stmt.body, path + (stmt,))

    visit(unit.statements, ())
    return out


def _eval_unit(expr: IntExpr, tables: SymbolTables | None) -> int | None:
    if isinstance(expr, Literal):
        return expr.value
    if tables is None:
        return None
    value = eval_int(tables, expr)
    return value if isinstance(value, int) else None


def bind_units(unit: ProgramUnit, tables: SymbolTables | None = None) -> list[UnitBinding]:
    """Derive unit-to-file bindings from OPEN/CLOSE statements.

    CLOSE closes the most recent live binding of its unit; bindings still
    live at the end of the program are closed at the unit's last line, so
    live ranges never overlap.
    """
    bindings: list[UnitBinding] = []
    for stmt, _ in _walk(unit):
        if isinstance(stmt, OpenStmt):
            number = _eval_unit(stmt.unit, tables)
            key: int | str = number if number is not None else expr_text(stmt.unit)
            notes: list[Diagnostic] = []
            if stmt.file_name is not None:
                name = stmt.file_name
            elif stmt.file_symbol is not None:
                constant = tables.find_constant(stmt.file_symbol) if tables else None
                if constant is not None and isinstance(constant.value, str):
                    name = constant.value
                else:
                    name = f"<unit-{key}>"
                    notes.append(Diagnostic(
                        diag.SYMBOLIC_FILE_NAME,
                        f"unit {key} is opened with a variable file name ({stmt.file_symbol})",
                        stmt.line,
                    ))
            else:
                name = f"<unit-{key}>"
            for binding in bindings:
                if binding.unit == key and binding.closed_at is None:
                    binding.closed_at = stmt.line
            bindings.append(UnitBinding(
                key, name, stmt.status, stmt.line, None, tuple(notes)))
        elif isinstance(stmt, CloseStmt):
            number = _eval_unit(stmt.unit, tables)
            key = number if number is not None else expr_text(stmt.unit)
            for binding in reversed(bindings):
                if binding.unit == key and binding.closed_at is None:
                    binding.closed_at = stmt.line
                    break
    for binding in bindings:
        if binding.closed_at is None:
            binding.closed_at = unit.end_line
    return bindings


# ---------------------------------------------------------------------------
# Loop multiplicity
# ---------------------------------------------------------------------------


def _trunc_div(numerator: int, denominator: int) -> int:
    q, r = divmod(numerator, denominator)
    if r != 0 and (numerator < 0) != (denominator < 0):
        q += 1
    return q


def _trip_count(do: DoStmt, tables: SymbolTables) -> int | None:
    start = eval_int(tables, do.start)
    stop = eval_int(tables, do.stop)
    step = eval_int(tables, do.step) if do.step is not None else 1
    if isinstance(start, Unresolved) or isinstance(stop, Unresolved) or isinstance(step, Unresolved):
        return None
    if step == 0:
        return None
    return max(0, _trunc_div(stop - start + step, step))


def _trip_symbolic(do: DoStmt) -> str:
    start = expr_text(do.start)
    stop = expr_text(do.stop)
    step = expr_text(do.step) if do.step is not None else "1"
    if step == "1":
        if start == "1":
            return stop
        return f"{stop}-{start}+1"
    return f"({stop}-{start})/{step}+1"


def _wrap(term: str) -> str:
    return f"({term})" if any(op in term for op in "+-/") else term


def loop_multiplicity(
    path: tuple[DoStmt, ...] | list[DoStmt],
    tables: SymbolTables,
    default_count: int = 1,
) -> Multiplicity:
    """Multiply trip counts along a DO-nesting chain.

    A loop whose bounds cannot be resolved through the constant table
    contributes the caller-supplied default count and flags the result as
    defaulted; the symbolic product always keeps the full expression.
    """
    if not path:
        return Multiplicity("1", 1)
    parts: list[str] = []
    total = 1
    defaulted = False
    for do in path:
        parts.append(_trip_symbolic(do))
        trips = _trip_count(do, tables)
        if trips is None:
            defaulted = True
            trips = default_count
        total *= trips
    if len(parts) == 1:
        symbolic = parts[0]
    else:
        symbolic = "*".join(_wrap(p) for p in parts)
    return Multiplicity(symbolic, total, defaulted=defaulted)


# ---------------------------------------------------------------------------
# Event extraction
# ---------------------------------------------------------------------------


def _literal_item_type(name: str) -> DataType:
    if name[:1] in "'\"":
        return character(max(1, len(name) - 2))
    if any(c in name for c in ".eEdD"):
        return REAL
    return INTEGER


def analyze(
    unit: ProgramUnit,
    tables: SymbolTables,
    formats: dict[int, str],
    options: AnalyzeOptions | None = None,
) -> list[IoEvent]:
    """Produce one IoEvent per READ/WRITE statement, in source order."""
    options = options or AnalyzeOptions()
    process = unit.name or "<main>"
    bindings = bind_units(unit, tables)
    pseudo: dict[str, UnitBinding] = {}
    placeholders: dict[int | str, UnitBinding] = {}
    events: list[IoEvent] = []

    def pseudo_binding(name: str, number: int) -> UnitBinding:
        if name not in pseudo:
            pseudo[name] = UnitBinding(number, name, None, 0, unit.end_line)
        return pseudo[name]

    def live_binding(key: int | str, line: int) -> UnitBinding | None:
        best = None
        for binding in bindings:
            if binding.unit != key:
                continue
            if binding.opened_at <= line and (binding.closed_at is None or line <= binding.closed_at):
                if best is None or binding.opened_at >= best.opened_at:
                    best = binding
        return best

    for stmt, path in _walk(unit):
        if not isinstance(stmt, (ReadStmt, WriteStmt)):
            continue
        direction = "READ" if isinstance(stmt, ReadStmt) else "WRITE"
        notes: list[Diagnostic] = []

        if isinstance(stmt.unit, StarUnit):
            binding = pseudo_binding(
                STDIN_NAME if direction == "READ" else STDOUT_NAME,
                5 if direction == "READ" else 6,
            )
        else:
            number = _eval_unit(stmt.unit, tables)
            key: int | str = number if number is not None else expr_text(stmt.unit)
            binding = live_binding(key, stmt.line)
            if binding is None:
                if number == 5 and direction == "READ":
                    binding = pseudo_binding(STDIN_NAME, 5)
                elif number == 6 and direction == "WRITE":
                    binding = pseudo_binding(STDOUT_NAME, 6)
                else:
                    notes.append(Diagnostic(
                        diag.UNKNOWN_UNIT,
                        f"unit {key} has no live binding at line {stmt.line}",
                        stmt.line,
                    ))
                    if key not in placeholders:
                        placeholders[key] = UnitBinding(
                            key, f"<unit-{key}>", None, 0, unit.end_line)
                    binding = placeholders[key]

        if isinstance(stmt.format, ListDirected):
            pairs = [(None, ())] * len(stmt.items)
        else:
            if isinstance(stmt.format, Label):
                text = formats.get(stmt.format.value)
                if text is None:
                    raise MissingFormatLabel(stmt.format.value, stmt.line)
            else:
                text = stmt.format.descriptor_text
            try:
                descriptors = parse_descriptors(text, notes)
            except AnalysisError as err:
                err.line = stmt.line
                raise
            pairs, reverted = pair_items(descriptors, len(stmt.items))
            if reverted:
                notes.append(Diagnostic(
                    diag.DESCRIPTOR_ARITY,
                    f"{len(stmt.items)} items exceed the format's data descriptors;"
                    " format reversion applied",
                    stmt.line,
                ))

        items = []
        for io_item, (leaf, seps) in zip(stmt.items, pairs):
            if io_item.literal:
                dtype = _literal_item_type(io_item.name)
            else:
                dtype = lookup_type(tables, io_item, process, notes)
            if leaf is not None:
                data_format_of(dtype, leaf, notes)
            items.append(EventItem(io_item.name, dtype, leaf, tuple(seps)))

        if not stmt.items:
            notes.append(Diagnostic(
                diag.EMPTY_ITEM_LIST,
                f"{direction} at line {stmt.line} transfers no items",
                stmt.line,
            ))

        mult = loop_multiplicity(path, tables, options.default_loop_count)
        if mult.defaulted:
            notes.append(Diagnostic(
                diag.DEFAULT_LOOP_COUNT,
                f"loop count {mult.symbolic} is not constant; default"
                f" {options.default_loop_count} used per loop",
                stmt.line,
            ))
        if stmt.conditional:
            mult = Multiplicity(mult.symbolic, mult.resolved, True, mult.defaulted)

        events.append(IoEvent(
            direction, binding, stmt.format, tuple(items), mult,
            stmt.line, tuple(notes),
        ))
    return events


def dump_events(events: list[IoEvent]) -> str:
    """One line per event for --dump-events."""
    lines = []
    for e in events:
        items = ", ".join(
            f"{i.name}:{i.data_type.name.lower()}:{data_format_of(i.data_type, i.descriptor)}"
            for i in e.items
        )
        flags = ""
        if e.multiplicity.conditional:
            flags += " conditional"
        if e.multiplicity.defaulted:
            flags += " defaulted"
        lines.append(
            f"line {e.source_line}: {e.direction} {e.binding.file_name}"
            f" x{e.multiplicity.resolved} ({e.multiplicity.symbolic}){flags} [{items}]"
        )
    return "\n".join(lines)
