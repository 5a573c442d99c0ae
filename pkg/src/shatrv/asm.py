"""Two-pass assembler and disassembler for the RV64I + Zicsr + shatr subset.

Source syntax, one statement per line:

    label:  mnemonic op1, op2, op3   # comment
    .text | .data | .org ADDR | .dword V[, V...] | .byte V[, V...]
    .align N | .word V[, V...]

Registers may be written x0..x31 or by ABI name (zero, ra, sp, a0..a7,
s0..s11, t0..t6, fp).  Loads and stores take an offset(reg) operand.
Branch and jal targets are labels or numeric byte offsets relative to the
instruction itself; the disassembler always emits the numeric form, so
disassembling and reassembling reproduces the original code bytes.

Pseudo-instructions: li (deterministic lui/addiw/slli/addi expansion),
mv, j, ret, nop.  .org chooses the placement address for what follows in
.data and is required before the first data byte.  .word emits a raw
32-bit code word and is what the disassembler falls back to for words it
cannot decode.
"""

import re
from dataclasses import dataclass, field

from . import isa
from .emulator import CODE_BASE

__all__ = [
    "AsmError", "AssembledProgram", "assemble", "disassemble",
    "encode_instruction", "format_instruction",
]

_M64 = (1 << 64) - 1


class AsmError(Exception):
    """Bad assembly source; the message names the offending line."""


@dataclass
class AssembledProgram:
    """Output of assemble(), in the shape the machine loader accepts."""

    code: bytes
    data_segments: list = field(default_factory=list)
    entry_offset: int = 0
    symbols: dict = field(default_factory=dict)


_REG_NAMES = {f"x{i}": i for i in range(32)}
for _i, _n in enumerate(
        "zero ra sp gp tp t0 t1 t2 s0 s1 a0 a1 a2 a3 a4 a5 a6 a7 "
        "s2 s3 s4 s5 s6 s7 s8 s9 s10 s11 t3 t4 t5 t6".split()):
    _REG_NAMES[_n] = _i
_REG_NAMES["fp"] = 8

_LABEL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)\s*:")
_MEM_RE = re.compile(r"^(.+)\((\w+)\)$")


def _parse_int(tok):
    try:
        return int(tok, 0)
    except ValueError:
        raise ValueError(f"expected an integer, got {tok!r}") from None


def _parse_reg(tok):
    try:
        return _REG_NAMES[tok]
    except KeyError:
        raise ValueError(f"unknown register {tok!r}") from None


def _parse_mem(tok):
    m = _MEM_RE.match(tok)
    if not m:
        raise ValueError(f"expected offset(reg), got {tok!r}")
    return _parse_int(m.group(1).strip()), _parse_reg(m.group(2))


def _split_statement(line):
    parts = line.split(None, 1)
    name = parts[0]
    if len(parts) == 1:
        return name, []
    ops = [p.strip() for p in parts[1].split(",")]
    if any(not p for p in ops):
        raise ValueError("empty operand")
    return name, ops


def _arity(name, ops, n):
    if len(ops) != n:
        raise ValueError(f"{name} expects {n} operand(s), got {len(ops)}")


def _target_offset(tok, addr, symbols):
    if tok in symbols:
        return symbols[tok] - addr
    try:
        return int(tok, 0)
    except ValueError:
        raise ValueError(f"unknown label {tok!r}") from None


def _encode_statement(name, ops, addr, symbols):
    """Encode one parsed instruction at a known address. Labels in branch
    and jal operands resolve through symbols; raises ValueError on any
    malformed operand."""
    if name in isa._OP or name in isa._OP_32:
        _arity(name, ops, 3)
        return isa.encode(name, rd=_parse_reg(ops[0]), rs1=_parse_reg(ops[1]),
                          rs2=_parse_reg(ops[2]))
    if name in isa._OP_IMM or name == "addiw" or name in isa._SHIFT_IMM \
            or name in isa._SHIFT_IMM_32:
        _arity(name, ops, 3)
        return isa.encode(name, rd=_parse_reg(ops[0]), rs1=_parse_reg(ops[1]),
                          imm=_parse_int(ops[2]))
    if name in isa._LOADS:
        _arity(name, ops, 2)
        off, base = _parse_mem(ops[1])
        return isa.encode(name, rd=_parse_reg(ops[0]), rs1=base, imm=off)
    if name in isa._STORES:
        _arity(name, ops, 2)
        off, base = _parse_mem(ops[1])
        return isa.encode(name, rs2=_parse_reg(ops[0]), rs1=base, imm=off)
    if name in isa._BRANCHES:
        _arity(name, ops, 3)
        return isa.encode(name, rs1=_parse_reg(ops[0]), rs2=_parse_reg(ops[1]),
                          imm=_target_offset(ops[2], addr, symbols))
    if name == "jal":
        _arity(name, ops, 2)
        return isa.encode(name, rd=_parse_reg(ops[0]),
                          imm=_target_offset(ops[1], addr, symbols))
    if name == "jalr":
        _arity(name, ops, 3)
        return isa.encode(name, rd=_parse_reg(ops[0]), rs1=_parse_reg(ops[1]),
                          imm=_parse_int(ops[2]))
    if name in ("lui", "auipc"):
        _arity(name, ops, 2)
        return isa.encode(name, rd=_parse_reg(ops[0]), imm=_parse_int(ops[1]))
    if name in isa._CSR_REG:
        _arity(name, ops, 3)
        return isa.encode(name, rd=_parse_reg(ops[0]), csr=_parse_int(ops[1]),
                          rs1=_parse_reg(ops[2]))
    if name in isa._CSR_IMM:
        _arity(name, ops, 3)
        return isa.encode(name, rd=_parse_reg(ops[0]), csr=_parse_int(ops[1]),
                          imm=_parse_int(ops[2]))
    if name == "ecall":
        _arity(name, ops, 0)
        return isa.ECALL_WORD
    if name == isa.SHATR_MNEMONIC:
        _arity(name, ops, 1)
        return isa.encode(name, rs1=_parse_reg(ops[0]))
    raise ValueError(f"unknown mnemonic {name!r}")


def _rewrite_pseudo(name, ops):
    """Rewrite single-word pseudo-instructions to their base form.
    li is handled separately because it expands to several words."""
    if name == "nop":
        _arity(name, ops, 0)
        return "addi", ["x0", "x0", "0"]
    if name == "mv":
        _arity(name, ops, 2)
        return "addi", [ops[0], ops[1], "0"]
    if name == "j":
        _arity(name, ops, 1)
        return "jal", ["x0", ops[0]]
    if name == "ret":
        _arity(name, ops, 0)
        return "jalr", ["x0", "x1", "0"]
    return name, ops


def _li_sequence(rd, value):
    """Deterministic expansion of li as (mnemonic, kwargs) pairs.
    Accepts any 64-bit value, signed or unsigned spelling."""
    if not -(1 << 63) <= value < (1 << 64):
        raise ValueError(f"li value out of 64-bit range: {value:#x}")
    v = value & _M64
    if v >= 1 << 63:
        v -= 1 << 64
    return _li_signed(rd, v)


def _li_signed(rd, v):
    if -2048 <= v <= 2047:
        return [("addi", dict(rd=rd, rs1=0, imm=v))]
    lo = isa.sign_extend(v & 0xFFF, 12)
    if -(1 << 31) <= v <= (1 << 31) - 1:
        # addiw's 32-bit wrap keeps this exact across the whole range
        seq = [("lui", dict(rd=rd, imm=((v - lo) >> 12) & 0xFFFFF))]
        if lo:
            seq.append(("addiw", dict(rd=rd, rs1=rd, imm=lo)))
        return seq
    seq = _li_signed(rd, (v - lo) >> 12)
    seq.append(("slli", dict(rd=rd, rs1=rd, imm=12)))
    if lo:
        seq.append(("addi", dict(rd=rd, rs1=rd, imm=lo)))
    return seq


_NOP_WORD = 0x00000013


class _Assembler:
    def __init__(self):
        self.symbols = {}
        self.items = []          # (line_no, addr, kind, payload)
        self.text_addr = CODE_BASE
        self.section = "text"
        self.segments = []       # [address, bytearray] pairs
        self.data_addr = None

    def fail(self, line_no, msg):
        raise AsmError(f"line {line_no}: {msg}")

    def data_buffer(self, line_no):
        if self.data_addr is None:
            self.fail(line_no, "data emitted before any .org address")
        return self.segments[-1][1]

    def emit_data(self, line_no, blob):
        self.data_buffer(line_no).extend(blob)
        self.data_addr += len(blob)

    def emit_word(self, line_no, word):
        self.items.append((line_no, self.text_addr, "raw", word))
        self.text_addr += 4

    def define_label(self, line_no, name):
        if name in self.symbols:
            self.fail(line_no, f"duplicate label {name!r}")
        if self.section == "text":
            self.symbols[name] = self.text_addr
        else:
            if self.data_addr is None:
                self.fail(line_no, "data label before any .org address")
            self.symbols[name] = self.data_addr

    def directive(self, line_no, name, ops):
        if name == ".text":
            self.section = "text"
        elif name == ".data":
            self.section = "data"
        elif name == ".org":
            if self.section != "data":
                self.fail(line_no, ".org is only valid in the .data section")
            if len(ops) != 1:
                self.fail(line_no, ".org expects one address")
            self.data_addr = _parse_int(ops[0])
            self.segments.append([self.data_addr, bytearray()])
        elif name in (".dword", ".byte"):
            if self.section != "data":
                self.fail(line_no, f"{name} is only valid in the .data section")
            size = 8 if name == ".dword" else 1
            for tok in ops:
                value = _parse_int(tok) & ((1 << (8 * size)) - 1)
                self.emit_data(line_no, value.to_bytes(size, "little"))
        elif name == ".word":
            if self.section != "text":
                self.fail(line_no, ".word is only valid in the .text section")
            for tok in ops:
                self.emit_word(line_no, _parse_int(tok) & 0xFFFFFFFF)
        elif name == ".align":
            if len(ops) != 1:
                self.fail(line_no, ".align expects one power-of-two exponent")
            step = 1 << _parse_int(ops[0])
            if self.section == "text":
                while self.text_addr % step:
                    self.emit_word(line_no, _NOP_WORD)
            else:
                pad = -self.data_addr % step if self.data_addr is not None else 0
                self.emit_data(line_no, bytes(pad))
        else:
            self.fail(line_no, f"unknown directive {name!r}")

    def instruction(self, line_no, name, ops):
        if self.section != "text":
            self.fail(line_no, "instruction outside the .text section")
        if name == "li":
            _arity(name, ops, 2)
            rd = _parse_reg(ops[0])
            for mnemonic, kwargs in _li_sequence(rd, _parse_int(ops[1])):
                self.emit_word(line_no, isa.encode(mnemonic, **kwargs))
            return
        name, ops = _rewrite_pseudo(name, ops)
        self.items.append((line_no, self.text_addr, "inst", (name, ops)))
        self.text_addr += 4

    def first_pass(self, source):
        for line_no, raw in enumerate(source.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            while True:
                m = _LABEL_RE.match(line)
                if not m:
                    break
                self.define_label(line_no, m.group(1))
                line = line[m.end():].strip()
            if not line:
                continue
            try:
                name, ops = _split_statement(line)
                if name.startswith("."):
                    self.directive(line_no, name, ops)
                else:
                    self.instruction(line_no, name, ops)
            except AsmError:
                raise
            except ValueError as e:
                self.fail(line_no, str(e))

    def second_pass(self):
        code = bytearray()
        for line_no, addr, kind, payload in self.items:
            if kind == "raw":
                word = payload
            else:
                name, ops = payload
                try:
                    word = _encode_statement(name, ops, addr, self.symbols)
                except ValueError as e:
                    self.fail(line_no, str(e))
            code += word.to_bytes(4, "little")
        return bytes(code)


def assemble(source):
    """Assemble source text into an AssembledProgram. Code is placed at the
    machine's fixed code base; data goes wherever .org directives say."""
    a = _Assembler()
    a.first_pass(source)
    code = a.second_pass()
    segments = [(addr, bytes(buf)) for addr, buf in a.segments if buf]
    return AssembledProgram(code=code, data_segments=segments,
                            entry_offset=0, symbols=dict(a.symbols))


def encode_instruction(text):
    """Assemble a single label-free instruction to its 32-bit word."""
    try:
        name, ops = _split_statement(text.strip())
        if name == "li":
            raise ValueError("li may expand to several words; use assemble()")
        name, ops = _rewrite_pseudo(name, ops)
        return _encode_statement(name, ops, 0, {})
    except ValueError as e:
        raise AsmError(str(e)) from None


def format_instruction(inst):
    """Render a decoded instruction in the canonical text the assembler
    accepts. Branch and jump targets come out as numeric offsets."""
    n = inst.mnemonic
    if n in isa._OP or n in isa._OP_32:
        return f"{n} x{inst.rd}, x{inst.rs1}, x{inst.rs2}"
    if n in isa._OP_IMM or n == "addiw" or n == "jalr" \
            or n in isa._SHIFT_IMM or n in isa._SHIFT_IMM_32:
        return f"{n} x{inst.rd}, x{inst.rs1}, {inst.imm}"
    if n in isa._LOADS:
        return f"{n} x{inst.rd}, {inst.imm}(x{inst.rs1})"
    if n in isa._STORES:
        return f"{n} x{inst.rs2}, {inst.imm}(x{inst.rs1})"
    if n in isa._BRANCHES:
        return f"{n} x{inst.rs1}, x{inst.rs2}, {inst.imm}"
    if n == "jal":
        return f"jal x{inst.rd}, {inst.imm}"
    if n in ("lui", "auipc"):
        return f"{n} x{inst.rd}, {inst.imm:#x}"
    if n in isa._CSR_REG:
        return f"{n} x{inst.rd}, {inst.csr:#x}, x{inst.rs1}"
    if n in isa._CSR_IMM:
        return f"{n} x{inst.rd}, {inst.csr:#x}, {inst.imm}"
    if n == "ecall":
        return "ecall"
    if n == isa.SHATR_MNEMONIC:
        return f"shatr x{inst.rs1}"
    raise ValueError(f"no canonical form for {n!r}")


def disassemble(program):
    """Disassemble an AssembledProgram or raw code bytes, one instruction
    per line. Words that do not decode come out as .word literals so the
    output always reassembles to the same bytes."""
    code = program.code if hasattr(program, "code") else bytes(program)
    if len(code) % 4:
        raise ValueError(f"code length {len(code)} is not a multiple of 4")
    lines = []
    for i in range(0, len(code), 4):
        word = int.from_bytes(code[i:i + 4], "little")
        try:
            lines.append(format_instruction(isa.decode(word)))
        except isa.DecodeError:
            lines.append(f".word {word:#010x}")
    return "".join(line + "\n" for line in lines)
