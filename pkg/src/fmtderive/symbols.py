"""Process, variable and constant tables, plus type and constant resolution.

Implicit typing is always in force: an undeclared name starting with I-N is
INTEGER, anything else REAL.  An IMPLICIT NONE statement in the source turns
the fallback into an UndeclaredName error instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import diagnostics as diag
from .diagnostics import AnalysisError, Diagnostic
from .syntax import (
    DeclStmt, IntExpr, IoItem, Literal, OtherStmt, ParameterStmt, Product,
    ProgramUnit, Sum, SymbolRef, expr_text, flatten,
)


@dataclass(frozen=True)
class DataType:
    name: str  # INTEGER, REAL, DOUBLE_PRECISION, CHARACTER, LOGICAL, COMPLEX
    char_len: int | None = None


INTEGER = DataType("INTEGER")
REAL = DataType("REAL")
DOUBLE_PRECISION = DataType("DOUBLE_PRECISION")
LOGICAL = DataType("LOGICAL")
COMPLEX = DataType("COMPLEX")


def character(length: int = 1) -> DataType:
    return DataType("CHARACTER", length)


_DOC_NAMES = {
    "INTEGER": "integer",
    "REAL": "real",
    "DOUBLE_PRECISION": "double",
    "CHARACTER": "character",
    "LOGICAL": "logical",
    "COMPLEX": "complex",
}


def doc_name(data_type: DataType) -> str:
    """Lowercase element name used in emitted documentation."""
    return _DOC_NAMES[data_type.name]


@dataclass(frozen=True)
class Unresolved:
    """A constant expression that could not be reduced to an integer."""

    text: str


class ConflictingDeclaration(AnalysisError):
    def __init__(self, name: str):
        super().__init__(f"conflicting declarations for {name}")
        self.name = name


class VariableConstantClash(AnalysisError):
    def __init__(self, name: str):
        super().__init__(f"{name} is used as both a variable and a constant")
        self.name = name


class UndeclaredName(AnalysisError):
    def __init__(self, name: str):
        super().__init__(f"{name} is not declared and IMPLICIT NONE is in force")
        self.name = name


@dataclass
class VariableEntry:
    name: str  # case-folded
    data_type: DataType
    dimensions: tuple[IntExpr, ...]
    process: str


@dataclass
class ConstantEntry:
    name: str  # case-folded
    data_type: DataType
    value: int | float | str


@dataclass
class ProcessEntry:
    name: str
    kind: str


@dataclass
class SymbolTables:
    processes: list[ProcessEntry] = field(default_factory=list)
    variables: list[VariableEntry] = field(default_factory=list)
    constants: list[ConstantEntry] = field(default_factory=list)
    implicit_none: bool = False
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def find_variable(self, name: str, process: str | None = None) -> VariableEntry | None:
        key = name.upper()
        for entry in self.variables:
            if entry.name == key and (process is None or entry.process == process):
                return entry
        return None

    def find_constant(self, name: str) -> ConstantEntry | None:
        key = name.upper()
        for entry in self.constants:
            if entry.name == key:
                return entry
        return None


def implicit_type(name: str) -> DataType:
    """FORTRAN implicit rule: first letter I-N is INTEGER, the rest REAL."""
    return INTEGER if name[:1].upper() in "IJKLMN" else REAL


def _decl_type(stmt: DeclStmt, entity_len: int | None) -> DataType:
    if stmt.base_type == "CHARACTER":
        length = entity_len if entity_len is not None else stmt.char_len
        return character(length if length is not None else 1)
    return DataType(stmt.base_type)


def _is_implicit_none(stmt: OtherStmt) -> bool:
    return stmt.raw.upper().replace(" ", "") == "IMPLICITNONE"


def build_tables(unit: ProgramUnit) -> SymbolTables:
    """Populate the three symbol tables from a parsed program unit."""
    process = unit.name or "<main>"
    tables = SymbolTables(processes=[ProcessEntry(process, unit.kind)])

    statements = list(flatten(unit.statements))
    tables.implicit_none = any(
        isinstance(s, OtherStmt) and _is_implicit_none(s) for s in statements
    )

    for stmt in statements:
        if isinstance(stmt, DeclStmt):
            for entity in stmt.entities:
                name = entity.name.upper()
                dtype = _decl_type(stmt, entity.char_len)
                existing = tables.find_variable(name, process)
                if existing is not None:
                    if existing.data_type != dtype:
                        raise ConflictingDeclaration(entity.name)
                    continue
                constant = tables.find_constant(name)
                if constant is not None:
                    if entity.dimensions:
                        raise VariableConstantClash(entity.name)
                    constant.data_type = dtype
                    continue
                tables.variables.append(
                    VariableEntry(name, dtype, entity.dimensions, process))
        elif isinstance(stmt, ParameterStmt):
            for raw_name, value in stmt.assignments:
                name = raw_name.upper()
                if tables.find_constant(name) is not None:
                    raise ConflictingDeclaration(raw_name)
                declared = tables.find_variable(name, process)
                if declared is not None:
                    if declared.dimensions:
                        raise VariableConstantClash(raw_name)
                    dtype = declared.data_type
                    tables.variables.remove(declared)
                elif isinstance(value, str):
                    dtype = character(len(value))
                else:
                    dtype = implicit_type(name)

                if not isinstance(value, (int, float, str)):
                    resolved = eval_int(tables, value)
                    if isinstance(resolved, Unresolved):
                        tables.diagnostics.append(Diagnostic(
                            diag.UNRESOLVED_CONSTANT,
                            f"constant {raw_name} = {resolved.text} cannot be resolved",
                            stmt.line,
                        ))
                        continue
                    value = resolved
                if dtype.name == "INTEGER" and isinstance(value, float):
                    value = int(value)
                elif dtype.name in ("REAL", "DOUBLE_PRECISION") and isinstance(value, int):
                    value = float(value)
                tables.constants.append(ConstantEntry(name, dtype, value))
    return tables


def lookup_type(
    tables: SymbolTables,
    item: IoItem,
    process: str,
    diagnostics: list[Diagnostic] | None = None,
) -> DataType:
    """Resolve the data type of one I/O item.

    Declared types win; otherwise the implicit rule applies and an
    implicitly-typed diagnostic is recorded so emitted docs can flag the
    inference.
    """
    variable = tables.find_variable(item.name, process)
    if variable is not None:
        return variable.data_type
    constant = tables.find_constant(item.name)
    if constant is not None:
        return constant.data_type
    if tables.implicit_none:
        raise UndeclaredName(item.name)
    inferred = implicit_type(item.name)
    if diagnostics is not None:
        diagnostics.append(Diagnostic(
            diag.IMPLICITLY_TYPED,
            f"{item.name} is undeclared; implicitly typed {doc_name(inferred)}",
        ))
    return inferred


def eval_int(tables: SymbolTables, expr: IntExpr) -> int | Unresolved:
    """Evaluate an integer expression against the constant table."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, SymbolRef):
        constant = tables.find_constant(expr.name)
        if constant is None:
            return Unresolved(expr.name)
        value = constant.value
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        return Unresolved(expr.name)
    if isinstance(expr, (Product, Sum)):
        left = eval_int(tables, expr.left)
        right = eval_int(tables, expr.right)
        if isinstance(left, Unresolved) or isinstance(right, Unresolved):
            return Unresolved(expr_text(expr))
        return left * right if isinstance(expr, Product) else left + right
    raise TypeError(f"not an IntExpr: {expr!r}")


def dump_symbols(tables: SymbolTables) -> str:
    """Readable rendering of the three tables for --dump-symbols."""
    lines = ["processes:"]
    for p in tables.processes:
        lines.append(f"  {p.name} ({p.kind})")
    lines.append("variables:")
    for v in tables.variables:
        dims = f"({', '.join(expr_text(d) for d in v.dimensions)})" if v.dimensions else ""
        lines.append(f"  {v.name}{dims}: {doc_name(v.data_type)} [{v.process}]")
    lines.append("constants:")
    for c in tables.constants:
        lines.append(f"  {c.name} = {c.value!r}: {doc_name(c.data_type)}")
    if tables.implicit_none:
        lines.append("implicit none: yes")
    return "\n".join(lines)
