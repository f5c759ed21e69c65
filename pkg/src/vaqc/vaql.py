"""Parser and canonical printer for the ``.vaql`` circuit language.

Grammar::

    program := header instr*
    header  := "qubits" INT ";" "cbits" INT ";"
    instr   := MNEMONIC ["(" FLOAT ")"] INT ["," INT] ";"
             | "measure" INT "->" INT ";"

``#`` starts a comment running to end of line. Whitespace between tokens is
insignificant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .circuit import Circuit, CircuitError, Gate, GateKind, Measure, validate


class SourceError(ValueError):
    """A lex, syntax or semantic error at a 1-based line/column."""

    def __init__(self, line: int, column: int, message: str, kind: str = "syntax"):
        super().__init__(f"{line}:{column}: {kind} error: {message}")
        self.line = line
        self.column = column
        self.message = message
        self.kind = kind

    def to_dict(self) -> dict:
        return {"error": self.message, "kind": self.kind, "line": self.line, "column": self.column}


@dataclass(frozen=True)
class _Token:
    kind: str  # "word", "number", "punct", "eof"
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>->|[;,()])
""", re.VERBOSE)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SourceError(line, pos - line_start + 1, f"unexpected character {text[pos]!r}", "lex")
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind in ("number", "word", "punct"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, tok: _Token, expected: str):
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise SourceError(tok.line, tok.column, f"expected {expected}, found {found}")

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text or tok.kind == "eof":
            self.fail(tok, repr(text))
        return tok

    def integer(self) -> int:
        tok = self.next()
        if tok.kind != "number" or not tok.text.isdigit():
            self.fail(tok, "a non-negative integer")
        return int(tok.text)

    def angle(self) -> float:
        tok = self.next()
        if tok.kind != "number":
            self.fail(tok, "a numeric angle")
        return float(tok.text)

    def parse(self) -> Circuit:
        self.expect("qubits")
        nq_tok = self.peek()
        nq = self.integer()
        self.expect(";")
        self.expect("cbits")
        nc = self.integer()
        self.expect(";")
        if nq < 1:
            raise SourceError(nq_tok.line, nq_tok.column, "a circuit needs at least one qubit", "semantic")
        circuit = Circuit(nq, nc)
        while self.peek().kind != "eof":
            start = self.peek()
            instr = self.instruction()
            try:
                circuit.append(instr)
            except CircuitError as exc:
                raise SourceError(start.line, start.column, str(exc), "semantic") from None
        return circuit

    def instruction(self):
        tok = self.next()
        if tok.kind != "word":
            self.fail(tok, "an instruction mnemonic")
        if tok.text == "measure":
            q = self.integer()
            self.expect("->")
            c = self.integer()
            self.expect(";")
            return Measure(q, c)
        try:
            kind = GateKind(tok.text)
        except ValueError:
            raise SourceError(tok.line, tok.column, f"unknown mnemonic {tok.text!r}") from None
        param = None
        if kind.num_params:
            self.expect("(")
            param = self.angle()
            self.expect(")")
        qubits = [self.integer()]
        for _ in range(kind.arity - 1):
            self.expect(",")
            qubits.append(self.integer())
        self.expect(";")
        return Gate(kind, tuple(qubits), param)


def parse_vaql(text: str) -> Circuit:
    """Parse ``.vaql`` source into a valid :class:`Circuit`."""
    return _Parser(text).parse()


def format_angle(theta: float) -> str:
    """17 significant digits; round-trips every finite double exactly."""
    return format(float(theta), ".17g")


def print_vaql(circuit: Circuit) -> str:
    """Render ``circuit`` in canonical form (one instruction per line)."""
    if validate(circuit):
        raise CircuitError("cannot print an invalid circuit")
    lines = [f"qubits {circuit.num_qubits}; cbits {circuit.num_cbits};"]
    for ins in circuit:
        if isinstance(ins, Measure):
            lines.append(f"measure {ins.qubit} -> {ins.cbit};")
            continue
        head = ins.kind.mnemonic
        if ins.param is not None:
            head += f"({format_angle(ins.param)})"
        lines.append(f"{head} {', '.join(map(str, ins.qubits))};")
    return "\n".join(lines) + "\n"
