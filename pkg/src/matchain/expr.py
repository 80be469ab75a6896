"""Expression data model, parser, and semantic validation.

The input language is a chain of factors joined by ``*``. A factor is a
declared symbol, optionally indexed (``A[i]``, ``d[j]``), with at most one
unary suffix: ``^T`` (transpose), ``^-1`` (inverse), or ``^-T``
(inverse-transpose). A statement assigns the chain to a target::

    X[i,j] = A[i] * B^T * C * d[j]

All model types are immutable; parsing is a pure function of the text and
the declarations.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from collections.abc import Iterable

from .errors import (
    DimensionPropertyMismatchError,
    ExprSyntaxError,
    InconsistentPropertiesError,
    NestedUnaryError,
    ProblemFileError,
    UndeclaredSymbolError,
)
from .properties import PROPERTY_NAMES, Property, close


class UnaryTag(enum.Enum):
    ID = ""
    T = "^T"
    INV = "^-1"
    INVT = "^-T"


#: Effective-dimension swap table: T and INVT exchange rows and columns.
_SWAPS = frozenset({UnaryTag.T, UnaryTag.INVT})


def effective_dims(rows: int, cols: int, tag: UnaryTag) -> tuple[int, int]:
    """Dimensions of an operand after applying its unary tag."""
    return (cols, rows) if tag in _SWAPS else (rows, cols)


@dataclass(frozen=True)
class IndexDecl:
    """A declared index set with its cardinality."""

    name: str
    range: int

    def __post_init__(self):
        if self.range < 1:
            raise ValueError(f"index {self.name!r} needs range >= 1, got {self.range}")


@dataclass(frozen=True)
class Operand:
    """A named matrix or vector, its dimensions, properties, and indices.

    ``properties`` is normalized to its implication closure on construction,
    which also rejects inconsistent or dimension-incompatible sets.
    """

    name: str
    rows: int
    cols: int
    properties: frozenset[Property] = frozenset()
    indices: tuple[IndexDecl, ...] = ()

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(
                f"operand {self.name!r} needs positive dims, got {self.rows}x{self.cols}"
            )
        object.__setattr__(
            self, "properties", close(self.properties, self.rows, self.cols)
        )
        names = [ix.name for ix in self.indices]
        if len(names) != len(set(names)):
            raise ValueError(f"operand {self.name!r} repeats an index: {names}")

    @property
    def display(self) -> str:
        """Source form of the operand reference, e.g. ``A[i,j]``."""
        if not self.indices:
            return self.name
        return f"{self.name}[{','.join(ix.name for ix in self.indices)}]"


def matrix(
    name: str,
    rows: int,
    cols: int,
    properties: Iterable[Property] = (),
    indices: tuple[IndexDecl, ...] = (),
) -> Operand:
    return Operand(name, rows, cols, frozenset(properties), tuple(indices))


def vector(
    name: str,
    rows: int,
    properties: Iterable[Property] = (),
    indices: tuple[IndexDecl, ...] = (),
) -> Operand:
    props = frozenset(properties) | {Property.VECTOR}
    return Operand(name, rows, 1, props, tuple(indices))


@dataclass(frozen=True)
class Factor:
    """An operand occurrence with its unary tag."""

    operand: Operand
    tag: UnaryTag = UnaryTag.ID

    @property
    def eff_rows(self) -> int:
        return effective_dims(self.operand.rows, self.operand.cols, self.tag)[0]

    @property
    def eff_cols(self) -> int:
        return effective_dims(self.operand.rows, self.operand.cols, self.tag)[1]

    @property
    def display(self) -> str:
        return self.operand.display + self.tag.value


@dataclass(frozen=True)
class Chain:
    """A product of factors assigned to a (possibly indexed) target."""

    target: str
    target_indices: tuple[IndexDecl, ...]
    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a chain needs at least one factor")

    @property
    def target_display(self) -> str:
        if not self.target_indices:
            return self.target
        return f"{self.target}[{','.join(ix.name for ix in self.target_indices)}]"


def unparse(chain: Chain) -> str:
    """Render a chain back to its source form."""
    rhs = " * ".join(f.display for f in chain.factors)
    return f"{chain.target_display} = {rhs}"


# --------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<suffix>\^T|\^-1|\^-T)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[*=\[\],()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unrecognized character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


_SUFFIX_TAGS = {"^T": UnaryTag.T, "^-1": UnaryTag.INV, "^-T": UnaryTag.INVT}


class _Parser:
    def __init__(self, text: str, declarations: Iterable[Operand | IndexDecl]):
        self.text = text
        self.tokens = _tokenize(text)
        self.at = 0
        self.operands: dict[str, Operand] = {}
        self.indexes: dict[str, IndexDecl] = {}
        for decl in declarations:
            if isinstance(decl, Operand):
                self.operands[decl.name] = decl
            elif isinstance(decl, IndexDecl):
                self.indexes[decl.name] = decl
            else:
                raise TypeError(f"unsupported declaration {decl!r}")

    def peek(self):
        return self.tokens[self.at]

    def take(self):
        tok = self.tokens[self.at]
        self.at += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value:
            raise ExprSyntaxError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def index_list(self) -> tuple[IndexDecl, ...]:
        """Parse ``[ i, j, ... ]`` resolving each name to its declaration."""
        self.expect("[")
        out = []
        while True:
            kind, text, pos = self.take()
            if kind != "ident":
                raise ExprSyntaxError("expected an index name", pos)
            decl = self.indexes.get(text)
            if decl is None:
                raise UndeclaredSymbolError(f"undeclared index {text!r}", pos)
            out.append(decl)
            kind, text, pos = self.take()
            if text == "]":
                return tuple(out)
            if text != ",":
                raise ExprSyntaxError("expected ',' or ']' in index list", pos)

    def factor(self) -> Factor:
        kind, text, pos = self.peek()
        if text == "(":
            # Grouping is not part of the grammar; recognize it only to give a
            # targeted error when it is used to stack unary operators.
            open_pos = pos
            self.take()
            inner = self.factor()
            self.expect(")")
            kind, text, suffix_pos = self.peek()
            if kind == "suffix":
                if inner.tag is not UnaryTag.ID:
                    raise NestedUnaryError(
                        "unary operators cannot be nested", suffix_pos
                    )
                raise ExprSyntaxError(
                    "parentheses are not part of the chain grammar", open_pos
                )
            raise ExprSyntaxError(
                "parentheses are not part of the chain grammar", open_pos
            )

        if kind != "ident":
            raise ExprSyntaxError("expected an operand name", pos)
        self.take()
        operand = self.operands.get(text)
        if operand is None:
            raise UndeclaredSymbolError(f"undeclared symbol {text!r}", pos)

        use_indices: tuple[IndexDecl, ...] = ()
        if self.peek()[1] == "[":
            use_indices = self.index_list()
        if use_indices != operand.indices:
            used = ",".join(ix.name for ix in use_indices)
            declared = ",".join(ix.name for ix in operand.indices)
            raise ExprSyntaxError(
                f"indices [{used}] on {operand.name!r} do not match its "
                f"declaration [{declared}]",
                pos,
            )

        tag = UnaryTag.ID
        kind, text, suffix_pos = self.peek()
        if kind == "suffix":
            self.take()
            tag = _SUFFIX_TAGS[text]
            kind, text, next_pos = self.peek()
            if kind == "suffix":
                raise NestedUnaryError("unary operators cannot be nested", next_pos)
        return Factor(operand, tag)

    def statement(self) -> Chain:
        kind, target, pos = self.take()
        if kind != "ident":
            raise ExprSyntaxError("expected a target name", pos)
        target_indices: tuple[IndexDecl, ...] = ()
        if self.peek()[1] == "[":
            target_indices = self.index_list()
        self.expect("=")
        factors = [self.factor()]
        while self.peek()[1] == "*":
            self.take()
            factors.append(self.factor())
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r} after chain", pos)
        return Chain(target, target_indices, tuple(factors))


def parse(text: str, declarations: Iterable[Operand | IndexDecl]) -> Chain:
    """Parse an assignment statement against the given declarations.

    Raises :class:`ExprSyntaxError`, :class:`UndeclaredSymbolError`, or
    :class:`NestedUnaryError`; all carry the source position.
    """
    return _Parser(text, declarations).statement()


# --------------------------------------------------------------------------
# Validation

class DiagnosticKind(enum.Enum):
    DIMENSION_MISMATCH = "DimensionMismatch"
    NON_SQUARE_INVERSE = "NonSquareInverse"
    INDEX_MISMATCH = "IndexMismatch"


@dataclass(frozen=True)
class Diagnostic:
    kind: DiagnosticKind
    position: int | None
    message: str

    def __str__(self):
        where = "" if self.position is None else f" at position {self.position}"
        return f"{self.kind.value}{where}: {self.message}"


def validate(chain: Chain) -> list[Diagnostic]:
    """Check chain invariants; an empty list means the chain is solvable.

    Positions are factor indices (0-based). A dimension mismatch is reported
    at the right-hand factor of the offending adjacent pair.
    """
    out: list[Diagnostic] = []
    for t, f in enumerate(chain.factors):
        if f.tag in (UnaryTag.INV, UnaryTag.INVT):
            operand = f.operand
            if operand.rows != operand.cols or Property.VECTOR in operand.properties:
                out.append(
                    Diagnostic(
                        DiagnosticKind.NON_SQUARE_INVERSE,
                        t,
                        f"inverse of non-square operand {operand.name!r} "
                        f"({operand.rows}x{operand.cols})",
                    )
                )
    for t in range(len(chain.factors) - 1):
        left, right = chain.factors[t], chain.factors[t + 1]
        if left.eff_cols != right.eff_rows:
            out.append(
                Diagnostic(
                    DiagnosticKind.DIMENSION_MISMATCH,
                    t + 1,
                    f"{left.display} has {left.eff_cols} columns but "
                    f"{right.display} has {right.eff_rows} rows",
                )
            )
    bound = {ix.name for f in chain.factors for ix in f.operand.indices}
    declared = [ix.name for ix in chain.target_indices]
    if len(declared) != len(set(declared)):
        out.append(
            Diagnostic(
                DiagnosticKind.INDEX_MISMATCH,
                None,
                f"target repeats an index: {declared}",
            )
        )
    elif set(declared) != bound:
        missing = bound - set(declared)
        unused = set(declared) - bound
        parts = []
        if missing:
            parts.append(f"factor indices {sorted(missing)} missing from target")
        if unused:
            parts.append(f"target indices {sorted(unused)} unused by any factor")
        out.append(Diagnostic(DiagnosticKind.INDEX_MISMATCH, None, "; ".join(parts)))
    return out


# --------------------------------------------------------------------------
# Problem files

@dataclass(frozen=True)
class ComputeStatement:
    lineno: int
    source: str
    chain: Chain


@dataclass(frozen=True)
class Problem:
    indices: tuple[IndexDecl, ...]
    operands: tuple[Operand, ...]
    computes: tuple[ComputeStatement, ...]


def _parse_optional_tokens(tokens, lineno, indexes):
    """Split trailing matrix/vector tokens into properties and indices.

    Both groups may be wrapped in literal square brackets, which are
    stripped; the indices group is recognized by its ``indices=`` prefix.
    """
    props: list[Property] = []
    indices: tuple[IndexDecl, ...] = ()
    for raw in tokens:
        tok = raw.strip("[]")
        if not tok:
            continue
        if tok.startswith("indices="):
            names = [s for s in tok[len("indices="):].split(",") if s]
            resolved = []
            for name in names:
                decl = indexes.get(name)
                if decl is None:
                    raise ProblemFileError(lineno, f"undeclared index {name!r}")
                resolved.append(decl)
            indices = tuple(resolved)
        else:
            for name in tok.split(","):
                if not name:
                    continue
                prop = PROPERTY_NAMES.get(name)
                if prop is None:
                    raise ProblemFileError(lineno, f"unknown property {name!r}")
                props.append(prop)
    return props, indices


def load_problem(text: str) -> Problem:
    """Read a problem description (declarations plus compute statements).

    Line-oriented; ``#`` starts a comment. Raises :class:`ProblemFileError`
    with the offending line number.
    """
    indexes: dict[str, IndexDecl] = {}
    operands: dict[str, Operand] = {}
    computes: list[ComputeStatement] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive = tokens[0]
        try:
            if directive == "index":
                if len(tokens) != 3:
                    raise ProblemFileError(lineno, "expected: index <name> <range>")
                name = tokens[1]
                if name in indexes:
                    raise ProblemFileError(lineno, f"duplicate index {name!r}")
                try:
                    rng = int(tokens[2])
                except ValueError:
                    raise ProblemFileError(lineno, f"bad index range {tokens[2]!r}")
                indexes[name] = IndexDecl(name, rng)
            elif directive in ("matrix", "vector"):
                want = 4 if directive == "matrix" else 3
                if len(tokens) < want:
                    raise ProblemFileError(
                        lineno, f"expected: {directive} <name> <dims...> [...]"
                    )
                name = tokens[1]
                if name in operands:
                    raise ProblemFileError(lineno, f"duplicate operand {name!r}")
                try:
                    dims = [int(t) for t in tokens[2:want]]
                except ValueError:
                    raise ProblemFileError(lineno, "bad dimension")
                props, indices = _parse_optional_tokens(tokens[want:], lineno, indexes)
                if directive == "matrix":
                    operands[name] = matrix(name, dims[0], dims[1], props, indices)
                else:
                    operands[name] = vector(name, dims[0], props, indices)
            elif directive == "compute":
                stmt = line[len("compute"):].strip()
                decls = list(indexes.values()) + list(operands.values())
                try:
                    chain = parse(stmt, decls)
                except Exception as exc:
                    pos = getattr(exc, "position", None)
                    at = "" if pos is None else f" (column {pos + 1} of statement)"
                    raise ProblemFileError(lineno, f"{exc}{at}")
                computes.append(ComputeStatement(lineno, stmt, chain))
            else:
                raise ProblemFileError(lineno, f"unknown directive {directive!r}")
        except ProblemFileError:
            raise
        except (
            ValueError,
            InconsistentPropertiesError,
            DimensionPropertyMismatchError,
        ) as exc:
            raise ProblemFileError(lineno, str(exc))

    return Problem(tuple(indexes.values()), tuple(operands.values()), tuple(computes))
