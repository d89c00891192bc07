"""Cycle-level behavioural model of a power-gated bit-truncation SRAM.

Each of the 32 columns has a truncation manager driven by a ``head`` input
and a ``tail`` input chained from the column above. Gated columns lose their
contents (cells become ``X``) and the manager drives the read-out instead.
"""
from __future__ import annotations

import csv
import enum
import io
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .bitcore import Mode, TruncationSpec

WIDTH = 32
_SYMBOLS = np.frombuffer(b"01X", dtype=np.uint8)
BYTE_MSB_COLUMNS = (23, 15, 7)


class CellState(enum.IntEnum):
    ZERO = 0
    ONE = 1
    UNKNOWN = 2

    @property
    def symbol(self) -> str:
        return "01X"[self]


class ColumnState(enum.Enum):
    NORMAL = "normal"
    MSB_TRUNC = "msb_trunc"
    LESSER_TRUNC = "lesser_trunc"


class Rails(enum.Enum):
    CONNECTED = "connected"
    HIGH_Z = "high_z"


class UnknownBitError(ValueError):
    """Raised when a value containing X is consumed as a number."""


class ScriptError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class ManagerState:
    head: int
    tail_in: int
    tail_out: int
    state: ColumnState
    rails: Rails


@dataclass(frozen=True)
class TimingConfig:
    clock_period_ns: float = 100.0
    gating_delay_ns: float = 44.0

    def __post_init__(self):
        if not 0 <= self.gating_delay_ns < self.clock_period_ns:
            raise ValueError("gating delay must be shorter than the clock period")


def encode_truncation(spec: TruncationSpec) -> tuple[int, int, int]:
    """(trunc_enable, byte_mode_enb, trunc_code) for a spec; k=0 disables truncation."""
    byte_mode_enb = 0 if spec.mode is Mode.BYTE else 1
    if spec.k == 0:
        return 0, byte_mode_enb, 0
    return 1, byte_mode_enb, spec.k - 1


def decode_truncation(trunc_enable: int, byte_mode_enb: int, trunc_code: int) -> int:
    """Head vector as a 32-bit mask. The code holds ``k - 1``."""
    if not 0 <= trunc_code < 32:
        raise ValueError(f"trunc_code is 5 bits, got {trunc_code}")
    if not trunc_enable:
        return 0
    if byte_mode_enb:
        return 1 << trunc_code
    if trunc_code > 7:
        raise ValueError(f"byte mode supports at most 8 truncated bits, code {trunc_code} implies {trunc_code + 1}")
    return sum(1 << (8 * b + trunc_code) for b in range(4))


def propagate_chain(head: int, byte_mode: bool) -> list[ManagerState]:
    """Resolve every column's manager, walking the tail chain from column 31 down.

    ``byte_mode`` is the logical mode (the active-low pin inverted). The
    returned list is indexed by column.
    """
    states: list[ManagerState | None] = [None] * WIDTH
    tail = 0  # Tail<m-1> tied to ground
    for col in range(WIDTH - 1, -1, -1):
        if byte_mode and col in BYTE_MSB_COLUMNS:
            tail = 0
        h = (head >> col) & 1
        if h:
            st = ManagerState(1, tail, 1, ColumnState.MSB_TRUNC, Rails.HIGH_Z)
        elif tail:
            st = ManagerState(0, 1, 1, ColumnState.LESSER_TRUNC, Rails.HIGH_Z)
        else:
            st = ManagerState(0, 0, 0, ColumnState.NORMAL, Rails.CONNECTED)
        states[col] = st
        tail = st.tail_out
    # Tail<0> output is left floating
    return states


def symbols_to_int(symbols: str) -> int:
    """Convert an MSB-first 0/1/X string; any X raises :class:`UnknownBitError`."""
    if "X" in symbols:
        raise UnknownBitError(f"word contains unknown bits: {symbols}")
    return int(symbols, 2)


def int_to_symbols(value: int) -> str:
    return format(value & 0xFFFFFFFF, "032b")


@dataclass(frozen=True)
class CycleRecord:
    cycle: int
    command: str
    word_enable: int
    readen: int
    writeen: int
    trunc_enable: int
    byte_mode_enb: int
    trunc_code: int
    trunc_mode: str
    k: int
    data_in: str
    data_out: str


@dataclass
class CycleTrace:
    records: list[CycleRecord] = field(default_factory=list)

    def append(self, record: CycleRecord) -> None:
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def reads(self) -> list[str]:
        return [r.data_out for r in self.records if r.readen]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["cycle", "command", "trunc_mode", "k", "data_out"])
        for r in self.records:
            w.writerow([r.cycle, r.command, r.trunc_mode, r.k, r.data_out])
        return buf.getvalue()

    def render_text(self) -> str:
        cols = [
            ("cyc", lambda r: str(r.cycle)),
            ("command", lambda r: r.command),
            ("WE", lambda r: str(r.word_enable)),
            ("RD", lambda r: str(r.readen)),
            ("WR", lambda r: str(r.writeen)),
            ("TEN", lambda r: str(r.trunc_enable)),
            ("BMENB", lambda r: str(r.byte_mode_enb)),
            ("Trunc<4:0>", lambda r: format(r.trunc_code, "05b")),
            ("Data_in<31:0>", lambda r: r.data_in or "-"),
            ("Data_out<31:0>", lambda r: r.data_out or "-"),
            ("hex", lambda r: _hex_or_dash(r.data_out)),
        ]
        rows = [[name for name, _ in cols]] + [[fn(r) for _, fn in cols] for r in self.records]
        widths = [max(len(row[i]) for row in rows) for i in range(len(cols))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        return "\n".join(lines) + "\n"


def _hex_or_dash(symbols: str) -> str:
    if not symbols:
        return "-"
    nibbles = (symbols[i:i + 4] for i in range(0, WIDTH, 4))
    return "".join("X" if "X" in nib else format(int(nib, 2), "X") for nib in nibbles)


class MemoryArray:
    """``n_words`` x 32 array of three-valued cells with a truncation manager per column.

    Set ``lint=True`` to get a :class:`RuntimeWarning` when a write lands on
    gated columns (the hardware silently drops those bits).
    """

    def __init__(self, n_words: int = 1024, timing: TimingConfig | None = None, lint: bool = False):
        if n_words < 1:
            raise ValueError("n_words must be positive")
        self.n_words = n_words
        self.timing = timing or TimingConfig()
        self.lint = lint
        self.cells = np.full((n_words, WIDTH), CellState.UNKNOWN, dtype=np.int8)
        self.trunc_enable = 0
        self.byte_mode_enb = 1
        self.trunc_code = 0
        self.cycle = 0
        self.managers = propagate_chain(0, byte_mode=False)

    # -- control ----------------------------------------------------------------

    @property
    def gated_mask(self) -> int:
        return sum(1 << c for c, st in enumerate(self.managers) if st.rails is Rails.HIGH_Z)

    @property
    def spec(self) -> TruncationSpec:
        mode = Mode.WORD if self.byte_mode_enb else Mode.BYTE
        return TruncationSpec(mode, self.trunc_code + 1 if self.trunc_enable else 0)

    def set_control(self, trunc_enable: int, byte_mode_enb: int, trunc_code: int) -> None:
        head = decode_truncation(trunc_enable, byte_mode_enb, trunc_code)
        new = propagate_chain(head, byte_mode=not byte_mode_enb)
        for col, (old_st, new_st) in enumerate(zip(self.managers, new)):
            if old_st.rails is Rails.CONNECTED and new_st.rails is Rails.HIGH_Z:
                # gating delay < clock period: contents are gone by end of cycle
                self.cells[:, col] = CellState.UNKNOWN
        self.managers = new
        self.trunc_enable, self.byte_mode_enb, self.trunc_code = trunc_enable, byte_mode_enb, trunc_code

    def set_truncation(self, spec: TruncationSpec) -> None:
        self.set_control(*encode_truncation(spec))

    # -- data -------------------------------------------------------------------

    def _check_addr(self, addr: int) -> None:
        if not 0 <= addr < self.n_words:
            raise IndexError(f"address {addr:#x} outside 0..{self.n_words - 1:#x}")

    def _drive(self) -> np.ndarray:
        """Per-column read-out override: 1 or 0 when truncated, -1 when the cell drives."""
        drive = np.full(WIDTH, -1, dtype=np.int8)
        for col, st in enumerate(self.managers):
            if st.state is ColumnState.MSB_TRUNC:
                drive[col] = 1
            elif st.state is ColumnState.LESSER_TRUNC:
                drive[col] = 0
        return drive

    def write_word(self, addr: int, value: int) -> None:
        self._check_addr(addr)
        if not 0 <= value <= 0xFFFFFFFF:
            raise ValueError(f"value out of 32-bit range: {value:#x}")
        self.write_words([addr], [value])

    def write_words(self, addrs, values) -> None:
        """Write several words in one go; same per-column rules as :meth:`write_word`."""
        addrs = np.asarray(addrs, dtype=np.int64)
        values = np.asarray(values, dtype=np.uint64)
        if addrs.size and (addrs.min() < 0 or addrs.max() >= self.n_words):
            raise IndexError(f"address outside 0..{self.n_words - 1:#x}")
        if values.size and values.max() > 0xFFFFFFFF:
            raise ValueError("value out of 32-bit range")
        gated = self.gated_mask
        if self.lint and gated:
            warnings.warn(f"write drops gated columns {gated:#010x}", RuntimeWarning, stacklevel=2)
        powered = np.array([not (gated >> c) & 1 for c in range(WIDTH)])
        bits = ((values[:, None] >> np.arange(WIDTH, dtype=np.uint64)) & np.uint64(1)).astype(np.int8)
        block = self.cells[addrs]
        block[:, powered] = bits[:, powered]
        self.cells[addrs] = block

    def read_word(self, addr: int) -> str:
        """32 symbols over ``0``/``1``/``X``, MSB (column 31) first."""
        self._check_addr(addr)
        return self.read_words([addr])[0]

    def read_words(self, addrs) -> list[str]:
        addrs = np.asarray(addrs, dtype=np.int64)
        if addrs.size and (addrs.min() < 0 or addrs.max() >= self.n_words):
            raise IndexError(f"address outside 0..{self.n_words - 1:#x}")
        drive = self._drive()
        out = np.where(drive >= 0, drive, self.cells[addrs])
        chars = _SYMBOLS[out[:, ::-1]]
        return [row.tobytes().decode("ascii") for row in chars]

    def read_value(self, addr: int) -> int:
        return symbols_to_int(self.read_word(addr))

    # -- scripting ----------------------------------------------------------------

    def step(self, command: "Command") -> CycleRecord:
        data_in = data_out = ""
        we = rd = wr = 0
        if command.op == "TRUNC":
            self.set_truncation(TruncationSpec(command.mode, command.k))
        elif command.op == "WRITE":
            we, wr = 1, 1
            data_in = int_to_symbols(command.data)
            self.write_word(command.addr, command.data)
        elif command.op == "READ":
            we, rd = 1, 1
            data_out = self.read_word(command.addr)
        spec = self.spec
        rec = CycleRecord(
            cycle=self.cycle,
            command=command.text,
            word_enable=we,
            readen=rd,
            writeen=wr,
            trunc_enable=self.trunc_enable,
            byte_mode_enb=self.byte_mode_enb,
            trunc_code=self.trunc_code,
            trunc_mode=spec.mode.value,
            k=spec.k,
            data_in=data_in,
            data_out=data_out,
        )
        self.cycle += 1
        return rec


@dataclass(frozen=True)
class Command:
    op: str
    text: str
    addr: int = 0
    data: int = 0
    mode: Mode = Mode.WORD
    k: int = 0
    line: int = 0


def _parse_hex(token: str, line_no: int, what: str) -> int:
    try:
        return int(token, 16)
    except ValueError:
        raise ScriptError(line_no, f"bad {what} {token!r}") from None


def parse_script(text: str) -> list[Command]:
    commands = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        op = tokens[0].upper()
        args = tokens[1:]
        norm = " ".join([op] + args)
        if op == "NOP":
            if args:
                raise ScriptError(line_no, "NOP takes no arguments")
            commands.append(Command("NOP", norm, line=line_no))
        elif op == "READ":
            if len(args) != 1:
                raise ScriptError(line_no, "READ expects <addr-hex>")
            commands.append(Command("READ", norm, addr=_parse_hex(args[0], line_no, "address"), line=line_no))
        elif op == "WRITE":
            if len(args) != 2:
                raise ScriptError(line_no, "WRITE expects <addr-hex> <data-hex>")
            addr = _parse_hex(args[0], line_no, "address")
            data = _parse_hex(args[1], line_no, "data")
            if not 0 <= data <= 0xFFFFFFFF:
                raise ScriptError(line_no, f"data {args[1]!r} exceeds 32 bits")
            commands.append(Command("WRITE", norm, addr=addr, data=data, line=line_no))
        elif op == "TRUNC":
            if len(args) != 2 or args[0].upper() not in ("BYTE", "WORD"):
                raise ScriptError(line_no, "TRUNC expects <BYTE|WORD> <k-decimal>")
            try:
                spec = TruncationSpec(Mode(args[0].lower()), int(args[1], 10))
            except ValueError as exc:
                raise ScriptError(line_no, str(exc)) from None
            commands.append(Command("TRUNC", norm, mode=spec.mode, k=spec.k, line=line_no))
        else:
            raise ScriptError(line_no, f"unknown opcode {tokens[0]!r}")
    return commands


def run_script(
    script: str | Iterable[Command],
    memory: MemoryArray | None = None,
    strict: bool = False,
) -> CycleTrace:
    """Execute a script (text or parsed commands), one command per clock cycle.

    With ``strict=True`` a read returning any ``X`` raises :class:`UnknownBitError`.
    """
    commands = parse_script(script) if isinstance(script, str) else list(script)
    mem = memory or MemoryArray()
    trace = CycleTrace()
    for cmd in commands:
        if cmd.op in ("READ", "WRITE") and not 0 <= cmd.addr < mem.n_words:
            raise ScriptError(cmd.line, f"address {cmd.addr:#x} outside 0..{mem.n_words - 1:#x}")
        rec = mem.step(cmd)
        trace.append(rec)
        if strict and "X" in rec.data_out:
            raise UnknownBitError(f"cycle {rec.cycle} ({rec.command}) read {rec.data_out}")
    return trace


def load_script(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def fig4_script() -> str:
    """Bundled timing scenario: byte-mode reads at 0/2/3/4 bits, word-mode at 0/2/3/16."""
    return resources.files("bittrunc").joinpath("data/fig4.tmscript").read_text(encoding="utf-8")
