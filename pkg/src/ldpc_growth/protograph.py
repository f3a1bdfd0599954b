"""Protographs, convolutional protographs and the block matrices derived from them."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np


class FormatError(ValueError):
    """Raised when a protograph file or literal cannot be parsed."""


def _as_int_matrix(entries) -> np.ndarray:
    arr = np.array(entries, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError(f"base matrix must be 2-dimensional, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BaseMatrix:
    """Biadjacency matrix of a protograph; entry (x, y) counts edges from check x to variable y.

    Columns at index ``n_vars`` and beyond are auxiliary: they were appended by
    :func:`augment_for_trapping` and are excluded from the transmitted length.
    """

    entries: np.ndarray
    n_aux: int = 0

    def __post_init__(self):
        arr = _as_int_matrix(self.entries)
        object.__setattr__(self, "entries", arr)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("base matrix needs at least one check and one variable")
        if (arr < 0).any():
            raise ValueError("edge multiplicities must be nonnegative")
        if not 0 <= self.n_aux < arr.shape[1]:
            raise ValueError("auxiliary column count out of range")
        if (arr.sum(axis=0) == 0).any():
            raise ValueError(f"variable nodes {np.flatnonzero(arr.sum(axis=0) == 0).tolist()} have no edges")
        if (arr.sum(axis=1) == 0).any():
            raise ValueError(f"check nodes {np.flatnonzero(arr.sum(axis=1) == 0).tolist()} have no edges")

    @property
    def n_checks(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n_vars(self) -> int:
        """Number of transmitted (original) variable nodes."""
        return int(self.entries.shape[1]) - self.n_aux

    @property
    def n_cols(self) -> int:
        return int(self.entries.shape[1])

    @property
    def augmented(self) -> bool:
        return self.n_aux > 0

    @property
    def check_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @property
    def var_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    @property
    def n_edges(self) -> int:
        return int(self.entries.sum())

    def __eq__(self, other):
        if not isinstance(other, BaseMatrix):
            return NotImplemented
        return self.n_aux == other.n_aux and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes(), self.n_aux))

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()

    def __repr__(self):
        aux = f", n_aux={self.n_aux}" if self.n_aux else ""
        return f"BaseMatrix({self.tolist()}{aux})"


@dataclass(frozen=True, eq=False)
class ConvolutionalProtograph:
    """Component matrices B_0..B_ms of a convolutional protograph.

    B_i connects the variables of time t to the checks of time t + i.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple(_as_int_matrix(c) for c in self.components)
        if len(comps) < 2:
            raise ValueError("need at least two components (memory >= 1)")
        shape = comps[0].shape
        if any(c.shape != shape for c in comps):
            raise ValueError("all components must share one b_c x b_v shape")
        if any((c < 0).any() for c in comps):
            raise ValueError("edge multiplicities must be nonnegative")
        if not comps[0].any() or not comps[-1].any():
            raise ValueError("B_0 and B_ms must be nonzero, otherwise the memory is misdeclared")
        total = sum(comps)
        if (total.sum(axis=0) == 0).any() or (total.sum(axis=1) == 0).any():
            raise ValueError("every variable and check position needs an edge in some component")
        object.__setattr__(self, "components", comps)

    @property
    def memory(self) -> int:
        return len(self.components) - 1

    @property
    def b_checks(self) -> int:
        return int(self.components[0].shape[0])

    @property
    def b_vars(self) -> int:
        return int(self.components[0].shape[1])

    @property
    def rate(self) -> Fraction:
        return 1 - Fraction(self.b_checks, self.b_vars)

    def block_sum(self) -> BaseMatrix:
        return BaseMatrix(sum(self.components))

    def constraint_length(self, N: int) -> int:
        """Decoding constraint length N (m_s + 1) b_v."""
        return N * (self.memory + 1) * self.b_vars

    def __eq__(self, other):
        if not isinstance(other, ConvolutionalProtograph):
            return NotImplemented
        return len(self.components) == len(other.components) and all(
            np.array_equal(a, b) for a, b in zip(self.components, other.components)
        )

    def __hash__(self):
        return hash(tuple(c.tobytes() for c in self.components) + (self.components[0].shape,))


def terminate(conv: ConvolutionalProtograph, L: int) -> BaseMatrix:
    """Band matrix B_[0,L-1] with L variable blocks and L + m_s check blocks.

    Check rows that receive no edge (possible only when a component has zero
    rows at the band edges) are dropped.
    """
    if L < 1:
        raise ValueError(f"termination factor must be >= 1, got {L}")
    bc, bv, ms = conv.b_checks, conv.b_vars, conv.memory
    out = np.zeros(((L + ms) * bc, L * bv), dtype=np.int64)
    for t in range(L):
        for i, comp in enumerate(conv.components):
            out[(t + i) * bc:(t + i + 1) * bc, t * bv:(t + 1) * bv] = comp
    return BaseMatrix(out[out.sum(axis=1) > 0])


def tailbite(conv: ConvolutionalProtograph, lam: int) -> BaseMatrix:
    """Tail-biting matrix B_tb with lam block rows and columns (wrapped band)."""
    ms = conv.memory
    if lam <= ms:
        raise ValueError(f"tail-biting factor must be >= m_s + 1 = {ms + 1}, got {lam}")
    bc, bv = conv.b_checks, conv.b_vars
    out = np.zeros((lam * bc, lam * bv), dtype=np.int64)
    for t in range(lam):
        for i, comp in enumerate(conv.components):
            r = (t + i) % lam
            out[r * bc:(r + 1) * bc, t * bv:(t + 1) * bv] = comp
    return BaseMatrix(out)


def design_rate(b: BaseMatrix) -> Fraction:
    return 1 - Fraction(b.n_checks, b.n_vars)


def augment_for_trapping(b: BaseMatrix) -> BaseMatrix:
    """Append one degree-1 auxiliary variable per check, giving [B | I].

    An (a, b) general trapping set of the original graph is then exactly a
    codeword of split weight (a, b) of the augmented graph.
    """
    if b.augmented:
        raise ValueError("matrix is already augmented")
    eye = np.eye(b.n_checks, dtype=np.int64)
    return BaseMatrix(np.hstack([b.entries, eye]), n_aux=b.n_checks)


@dataclass(frozen=True)
class EnsembleDescriptor:
    name: str
    conv: ConvolutionalProtograph
    block_proto: BaseMatrix
    notes: str = ""

    def __post_init__(self):
        if self.conv.block_sum() != self.block_proto:
            raise ValueError("component matrices must sum to the block protograph")


def _regular(name: str, b_vars: int, memory: int, note: str) -> EnsembleDescriptor:
    row = [[1] * b_vars]
    conv = ConvolutionalProtograph(tuple([row] * (memory + 1)))
    return EnsembleDescriptor(name, conv, conv.block_sum(), note)


_BUILTINS = {
    "3-6": lambda: _regular("3-6", 2, 2, "(3,6)-regular, B_0 = B_1 = B_2 = [1 1], rate 1/2"),
    "4-8": lambda: _regular("4-8", 2, 3, "(4,8)-regular, B_0 = .. = B_3 = [1 1], rate 1/2"),
    "3-9": lambda: _regular("3-9", 3, 2, "(3,9)-regular, B_0 = B_1 = B_2 = [1 1 1], rate 2/3"),
}


def available_ensembles() -> list[str]:
    return sorted(_BUILTINS)


def registry(name: str) -> EnsembleDescriptor:
    """Look up a built-in ensemble, or load a convolutional protograph file."""
    if name in _BUILTINS:
        return _BUILTINS[name]()
    path = Path(name)
    if path.is_file():
        conv = load_protograph(path)
        if not isinstance(conv, ConvolutionalProtograph):
            raise FormatError(f"{path} holds a block protograph, expected a convolutional one")
        return EnsembleDescriptor(path.stem, conv, conv.block_sum(), f"loaded from {path}")
    raise KeyError(f"unknown ensemble {name!r}; available: {', '.join(available_ensembles())}")


# ---------------------------------------------------------------------------
# text format

def _parse_row(line: str, width: int, lineno: int) -> list[int]:
    toks = line.split()
    if len(toks) != width:
        raise FormatError(f"line {lineno}: expected {width} integers, got {len(toks)}")
    try:
        vals = [int(t) for t in toks]
    except ValueError:
        raise FormatError(f"line {lineno}: non-integer token in {line.strip()!r}") from None
    if any(v < 0 for v in vals):
        raise FormatError(f"line {lineno}: negative multiplicity")
    return vals


def parse_protograph(text: str) -> BaseMatrix | ConvolutionalProtograph:
    """Parse the ``B``/``C`` text format.

    Block: ``B <n_checks> <n_vars>`` then n_checks rows.  Convolutional:
    ``C <b_c> <b_v> <m_s>`` then m_s + 1 stanzas of b_c rows separated by
    blank lines.  Lines starting with ``#`` are ignored.
    """
    lines = [(i + 1, ln.rstrip("\n")) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if not ln.lstrip().startswith("#")]
    while lines and not lines[0][1].strip():
        lines.pop(0)
    if not lines:
        raise FormatError("empty protograph file")
    lineno, header = lines[0]
    toks = header.split()
    body = lines[1:]
    try:
        dims = [int(t) for t in toks[1:]]
    except ValueError:
        raise FormatError(f"line {lineno}: bad header {header!r}") from None
    if toks[0] == "B" and len(dims) == 2:
        nc, nv = dims
        rows = [(i, ln) for i, ln in body if ln.strip()]
        if len(rows) != nc or any(not ln.strip() for _, ln in body[:nc]):
            raise FormatError(f"expected exactly {nc} matrix rows after the header")
        try:
            return BaseMatrix([_parse_row(ln, nv, i) for i, ln in rows])
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    if toks[0] == "C" and len(dims) == 3:
        bc, bv, ms = dims
        stanzas: list[list[list[int]]] = []
        current: list[list[int]] = []
        for i, ln in body:
            if not ln.strip():
                if current:
                    stanzas.append(current)
                    current = []
                continue
            current.append(_parse_row(ln, bv, i))
        if current:
            stanzas.append(current)
        if len(stanzas) != ms + 1 or any(len(s) != bc for s in stanzas):
            raise FormatError(f"expected {ms + 1} stanzas of {bc} rows")
        try:
            return ConvolutionalProtograph(tuple(stanzas))
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    raise FormatError(f"line {lineno}: header must be 'B n_checks n_vars' or 'C b_c b_v m_s'")


def load_protograph(path) -> BaseMatrix | ConvolutionalProtograph:
    return parse_protograph(Path(path).read_text())


def format_protograph(obj: BaseMatrix | ConvolutionalProtograph) -> str:
    if isinstance(obj, BaseMatrix):
        lines = [f"B {obj.n_checks} {obj.n_cols}"]
        lines += [" ".join(str(v) for v in row) for row in obj.tolist()]
        return "\n".join(lines) + "\n"
    lines = [f"C {obj.b_checks} {obj.b_vars} {obj.memory}"]
    for k, comp in enumerate(obj.components):
        if k:
            lines.append("")
        lines += [" ".join(str(v) for v in row) for row in comp.tolist()]
    return "\n".join(lines) + "\n"


def parse_matrix_literal(text: str) -> BaseMatrix:
    """Parse a literal such as ``[[3,3]]`` or ``[[1,1],[1,1]]``."""
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad matrix literal {text!r}: {exc}") from None
    if not (isinstance(rows, list) and rows and all(isinstance(r, list) for r in rows)):
        raise FormatError(f"matrix literal must be a list of rows: {text!r}")
    if any(not isinstance(v, int) or isinstance(v, bool) for r in rows for v in r):
        raise FormatError(f"matrix literal must hold integers: {text!r}")
    if len({len(r) for r in rows}) != 1:
        raise FormatError(f"ragged matrix literal: {text!r}")
    try:
        return BaseMatrix(rows)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def block_window_supports(b_vars: int, n_blocks: int, widths: Sequence[int]) -> list[tuple[int, ...]]:
    """Column sets covering ``w`` consecutive variable blocks, starting at block 0."""
    return [tuple(range(w * b_vars)) for w in widths if 1 <= w <= n_blocks]
