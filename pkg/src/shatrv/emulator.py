"""Deterministic RV64I+Zicsr interpreter with instruction accounting.

The machine is single-hart, machine-mode only, flat little-endian memory,
code loaded at CODE_BASE. Guests talk to the harness through an ecall
hypercall ABI selected by a7:

    0: exit        status in a0
    1: region_begin  region id in a0
    2: region_end    region id in a0
    3: emit_digest   guest address in a0, byte length in a1

Hypercall ecalls count globally (category "other") but never toward open
region counters. Decoded instructions are cached by pc, so self-modifying
code is not supported.
"""

from dataclasses import dataclass

from . import isa
from .isa import (
    CATEGORIES, CATEGORY_INDEX, CUSTOM, DecodeError, DecodedInstruction,
)

__all__ = [
    "CODE_BASE", "DEFAULT_MEMORY_SIZE", "CostModel", "ExecutionStats",
    "Machine", "EmulatorError", "DecodeError", "MemoryFault", "CsrFault",
    "HypercallFault", "IllegalOperand", "RegistrationError", "LoadError",
    "BudgetExceeded",
]

CODE_BASE = 0x1000
DEFAULT_MEMORY_SIZE = 16 * 1024 * 1024

_M64 = (1 << 64) - 1
_OTHER_IDX = CATEGORY_INDEX["other"]


class EmulatorError(Exception):
    """Base for everything the machine can raise while running."""


class MemoryFault(EmulatorError):
    pass


class CsrFault(EmulatorError):
    pass


class HypercallFault(EmulatorError):
    pass


class IllegalOperand(EmulatorError):
    pass


class RegistrationError(EmulatorError):
    pass


class LoadError(EmulatorError):
    pass


class BudgetExceeded(EmulatorError):
    pass


@dataclass
class CostModel:
    base_cycles_per_instruction: int = 1
    extra_mem_access_cycles: int = 0
    shatr_cycles: int = 1


class ExecutionStats:
    """Retired-instruction counters, per category and per open region."""

    def __init__(self):
        self._counts = [0] * len(CATEGORIES)
        self._regions = {}
        self.region_entry_count = {}
        self.total_cycles = 0

    @property
    def counts(self):
        return dict(zip(CATEGORIES, self._counts))

    @property
    def regions(self):
        return {rid: dict(zip(CATEGORIES, c)) for rid, c in self._regions.items()}

    @property
    def total_retired(self):
        return sum(self._counts)


def _signed(v):
    return v - (1 << 64) if v & (1 << 63) else v


def _signed32(v):
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v & (1 << 31) else v


def _wrap32(v):
    # two's-complement 64-bit image of the sign-extended low 32 bits
    v &= 0xFFFFFFFF
    return (v | 0xFFFFFFFF00000000) if v & (1 << 31) else v


_ALU_REG = {
    "add": lambda a, b: (a + b) & _M64,
    "sub": lambda a, b: (a - b) & _M64,
    "sll": lambda a, b: (a << (b & 63)) & _M64,
    "slt": lambda a, b: 1 if _signed(a) < _signed(b) else 0,
    "sltu": lambda a, b: 1 if a < b else 0,
    "xor": lambda a, b: a ^ b,
    "srl": lambda a, b: a >> (b & 63),
    "sra": lambda a, b: (_signed(a) >> (b & 63)) & _M64,
    "or": lambda a, b: a | b,
    "and": lambda a, b: a & b,
    "addw": lambda a, b: _wrap32(a + b),
    "subw": lambda a, b: _wrap32(a - b),
    "sllw": lambda a, b: _wrap32(a << (b & 31)),
    "srlw": lambda a, b: _wrap32((a & 0xFFFFFFFF) >> (b & 31)),
    "sraw": lambda a, b: _wrap32(_signed32(a) >> (b & 31)),
}

_ALU_IMM = {
    "addi": lambda a, imm: (a + imm) & _M64,
    "slti": lambda a, imm: 1 if _signed(a) < imm else 0,
    "sltiu": lambda a, imm: 1 if a < (imm & _M64) else 0,
    "xori": lambda a, imm: (a ^ imm) & _M64,
    "ori": lambda a, imm: (a | imm) & _M64,
    "andi": lambda a, imm: (a & imm) & _M64,
    "slli": lambda a, imm: (a << imm) & _M64,
    "srli": lambda a, imm: a >> imm,
    "srai": lambda a, imm: (_signed(a) >> imm) & _M64,
    "addiw": lambda a, imm: _wrap32(a + imm),
    "slliw": lambda a, imm: _wrap32(a << imm),
    "srliw": lambda a, imm: _wrap32((a & 0xFFFFFFFF) >> imm),
    "sraiw": lambda a, imm: _wrap32(_signed32(a) >> imm),
}

_BRANCH_COND = {
    "beq": lambda a, b: a == b,
    "bne": lambda a, b: a != b,
    "blt": lambda a, b: _signed(a) < _signed(b),
    "bge": lambda a, b: _signed(a) >= _signed(b),
    "bltu": lambda a, b: a < b,
    "bgeu": lambda a, b: a >= b,
}

_LOAD_SIGNED = {"lb", "lh", "lw", "ld"}


def _build_executor(inst):
    """Compile one decoded instruction to a closure mutating the machine."""
    name = inst.mnemonic
    rd, rs1, rs2, imm = inst.rd, inst.rs1, inst.rs2, inst.imm

    op = _ALU_REG.get(name)
    if op is not None:
        def ex(m, rd=rd, rs1=rs1, rs2=rs2, op=op):
            r = m.regs
            v = op(r[rs1], r[rs2])
            if rd:
                r[rd] = v
            m.pc += 4
        return ex

    op = _ALU_IMM.get(name)
    if op is not None:
        def ex(m, rd=rd, rs1=rs1, imm=imm, op=op):
            r = m.regs
            v = op(r[rs1], imm)
            if rd:
                r[rd] = v
            m.pc += 4
        return ex

    if name in isa._LOADS:
        size = isa.load_size(name)
        signed = name in _LOAD_SIGNED
        sbit = 1 << (size * 8 - 1)
        def ex(m, rd=rd, rs1=rs1, imm=imm, size=size, signed=signed, sbit=sbit):
            addr = (m.regs[rs1] + imm) & _M64
            if addr % size:
                raise MemoryFault(
                    f"misaligned {size}-byte load at {addr:#x} (pc={m.pc:#x})")
            mem = m.memory
            if addr + size > len(mem):
                raise MemoryFault(
                    f"load outside memory at {addr:#x} (pc={m.pc:#x})")
            v = int.from_bytes(mem[addr:addr + size], "little")
            if signed and v & sbit:
                v = (v - (sbit << 1)) & _M64
            if rd:
                m.regs[rd] = v
            m.pc += 4
        return ex

    if name in isa._STORES:
        size = isa.store_size(name)
        def ex(m, rs1=rs1, rs2=rs2, imm=imm, size=size):
            addr = (m.regs[rs1] + imm) & _M64
            if addr % size:
                raise MemoryFault(
                    f"misaligned {size}-byte store at {addr:#x} (pc={m.pc:#x})")
            mem = m.memory
            if addr + size > len(mem):
                raise MemoryFault(
                    f"store outside memory at {addr:#x} (pc={m.pc:#x})")
            mem[addr:addr + size] = (m.regs[rs2] & ((1 << (size * 8)) - 1)) \
                .to_bytes(size, "little")
            m.pc += 4
        return ex

    cond = _BRANCH_COND.get(name)
    if cond is not None:
        def ex(m, rs1=rs1, rs2=rs2, imm=imm, cond=cond):
            r = m.regs
            m.pc = (m.pc + imm) & _M64 if cond(r[rs1], r[rs2]) else m.pc + 4
        return ex

    if name == "jal":
        def ex(m, rd=rd, imm=imm):
            if rd:
                m.regs[rd] = (m.pc + 4) & _M64
            m.pc = (m.pc + imm) & _M64
        return ex

    if name == "jalr":
        def ex(m, rd=rd, rs1=rs1, imm=imm):
            target = (m.regs[rs1] + imm) & _M64 & ~1
            if rd:
                m.regs[rd] = (m.pc + 4) & _M64
            m.pc = target
        return ex

    if name == "lui":
        value = (isa.sign_extend(imm, 20) << 12) & _M64
        def ex(m, rd=rd, value=value):
            if rd:
                m.regs[rd] = value
            m.pc += 4
        return ex

    if name == "auipc":
        offset = isa.sign_extend(imm, 20) << 12
        def ex(m, rd=rd, offset=offset):
            if rd:
                m.regs[rd] = (m.pc + offset) & _M64
            m.pc += 4
        return ex

    if name == "ecall":
        def ex(m):
            m._hypercall()
            m.pc += 4
        return ex

    if name in isa._CSR_REG or name in isa._CSR_IMM:
        csr_op = {"csrrw": "swap", "csrrs": "set", "csrrc": "clear",
                  "csrrwi": "swap", "csrrsi": "set", "csrrci": "clear"}[name]
        reg_form = name in isa._CSR_REG
        addr = inst.csr
        def ex(m, rd=rd, rs1=rs1, imm=imm, addr=addr, csr_op=csr_op, reg_form=reg_form):
            operand = m.regs[rs1] if reg_form else imm
            old = m._csr_access(addr, csr_op, operand)
            if rd:
                m.regs[rd] = old
            m.pc += 4
        return ex

    raise DecodeError(f"no executor for mnemonic {name!r}")


class Machine:
    def __init__(self, memory_size=DEFAULT_MEMORY_SIZE, cost_model=None):
        if memory_size < CODE_BASE + 4:
            raise ValueError(f"memory too small: {memory_size}")
        self.memory = bytearray(memory_size)
        self.regs = [0] * 32
        self.pc = CODE_BASE
        self.halted = False
        self.exit_status = None
        self.cost_model = cost_model if cost_model is not None else CostModel()
        self.stats = ExecutionStats()
        self.emitted = []
        self.csrs = {}
        self._extensions = []
        self._custom = {}
        self._csr_ranges = []
        self._icache = {}
        self._open_regions = {}
        self._active = []

    # -- construction ------------------------------------------------------

    def register_extension(self, extension):
        """Attach an execution-unit extension. The extension must expose
        custom_opcode, csr_range (inclusive lo/hi or None), decode(word),
        execute(machine, inst), and csr_access(machine, addr, op, operand)."""
        opcode = extension.custom_opcode
        if opcode in self._custom:
            raise RegistrationError(f"opcode {opcode:#04x} already claimed")
        csr_range = extension.csr_range
        if csr_range is not None:
            lo, hi = csr_range
            for xlo, xhi, _ in self._csr_ranges:
                if lo <= xhi and xlo <= hi:
                    raise RegistrationError(
                        f"csr range {lo:#x}..{hi:#x} overlaps {xlo:#x}..{xhi:#x}")
            self._csr_ranges.append((lo, hi, extension))
        self._custom[opcode] = extension
        self._extensions.append(extension)

    def load_program(self, image, entry_offset=None):
        """Place an assembled image (or raw code bytes) into memory, point pc
        at the entry, and set sp to the 16-byte aligned top of memory."""
        if isinstance(image, (bytes, bytearray)):
            code, segments, entry = bytes(image), [], 0
        else:
            code, segments, entry = image.code, image.data_segments, image.entry_offset
        if entry_offset is not None:
            entry = entry_offset
        mem = self.memory
        if CODE_BASE + len(code) > len(mem):
            raise LoadError(f"code ({len(code)} bytes) exceeds memory")
        mem[CODE_BASE:CODE_BASE + len(code)] = code
        for addr, blob in segments:
            if addr < 0 or addr + len(blob) > len(mem):
                raise LoadError(f"data segment at {addr:#x} exceeds memory")
            mem[addr:addr + len(blob)] = blob
        if not 0 <= entry < len(code):
            raise LoadError(f"entry offset {entry:#x} outside code")
        self.pc = CODE_BASE + entry
        self.regs[2] = len(mem) & ~0xF
        self.halted = False
        self._icache.clear()

    # -- decode ------------------------------------------------------------

    def decode(self, word):
        """Decode against the base ISA plus whatever extensions are attached;
        unclaimed custom opcodes are decode errors."""
        ext = self._custom.get(word & 0x7F)
        if ext is not None:
            return ext.decode(word)
        return isa.decode(word, allow_custom=False)

    def _build(self, pc):
        if pc & 3:
            raise MemoryFault(f"misaligned instruction fetch at {pc:#x}")
        if pc + 4 > len(self.memory):
            raise MemoryFault(f"instruction fetch outside memory at {pc:#x}")
        word = int.from_bytes(self.memory[pc:pc + 4], "little")
        try:
            inst = self.decode(word)
        except DecodeError as e:
            raise DecodeError(f"at pc={pc:#x}: {e}") from None
        cost = self.cost_model.base_cycles_per_instruction
        if inst.category == CUSTOM:
            ext = self._custom[word & 0x7F]
            def ex(m, ext=ext, inst=inst):
                ext.execute(m, inst)
                m.pc += 4
            cost = self.cost_model.shatr_cycles
        else:
            ex = _build_executor(inst)
            if inst.category in ("mem_read", "mem_write"):
                cost += self.cost_model.extra_mem_access_cycles
        entry = (ex, CATEGORY_INDEX[inst.category], cost)
        self._icache[pc] = entry
        return entry

    # -- hypercalls --------------------------------------------------------

    def _hypercall(self):
        fn = self.regs[17]
        a0 = self.regs[10]
        if fn == 0:
            self.halted = True
            self.exit_status = a0
        elif fn == 1:
            if a0 in self._open_regions:
                raise HypercallFault(
                    f"region {a0} begun twice without end (pc={self.pc:#x})")
            counts = self.stats._regions.setdefault(a0, [0] * len(CATEGORIES))
            entries = self.stats.region_entry_count
            entries[a0] = entries.get(a0, 0) + 1
            self._open_regions[a0] = counts
            self._active = list(self._open_regions.values())
        elif fn == 2:
            if a0 not in self._open_regions:
                raise HypercallFault(
                    f"region {a0} ended without begin (pc={self.pc:#x})")
            del self._open_regions[a0]
            self._active = list(self._open_regions.values())
        elif fn == 3:
            addr, length = a0, self.regs[11]
            if length < 0 or addr + length > len(self.memory):
                raise HypercallFault(
                    f"emit of {length} bytes at {addr:#x} outside memory")
            self.emitted.append(bytes(self.memory[addr:addr + length]))
        else:
            raise HypercallFault(f"unknown hypercall {fn} (pc={self.pc:#x})")

    # -- execution ---------------------------------------------------------

    def step(self):
        """Fetch, decode, execute, and account exactly one instruction."""
        if self.halted:
            raise EmulatorError("machine is halted")
        entry = self._icache.get(self.pc)
        if entry is None:
            entry = self._build(self.pc)
        ex, cat, cost = entry
        ex(self)
        stats = self.stats
        stats._counts[cat] += 1
        stats.total_cycles += cost
        if self._active and cat != _OTHER_IDX:
            for counts in self._active:
                counts[cat] += 1

    def run(self, max_instructions=None):
        """Run until the guest exits; returns the exit status. Raises
        BudgetExceeded once max_instructions have retired without an exit."""
        icache = self._icache
        stats = self.stats
        counts = stats._counts
        retired = 0
        while not self.halted:
            if max_instructions is not None and retired >= max_instructions:
                raise BudgetExceeded(
                    f"budget of {max_instructions} instructions exhausted "
                    f"(pc={self.pc:#x})")
            entry = icache.get(self.pc)
            if entry is None:
                entry = self._build(self.pc)
            ex, cat, cost = entry
            ex(self)
            counts[cat] += 1
            stats.total_cycles += cost
            retired += 1
            if self._active and cat != _OTHER_IDX:
                for rc in self._active:
                    rc[cat] += 1
        return self.exit_status

    # -- csr routing -------------------------------------------------------

    def _csr_access(self, addr, op, operand):
        for lo, hi, ext in self._csr_ranges:
            if lo <= addr <= hi:
                return ext.csr_access(self, addr, op, operand)
        if addr in self.csrs:
            old = self.csrs[addr]
            if op == "swap":
                self.csrs[addr] = operand
            elif op == "set":
                self.csrs[addr] = old | operand
            elif op == "clear":
                self.csrs[addr] = old & ~operand & _M64
            return old
        raise CsrFault(f"unclaimed csr {addr:#x} (pc={self.pc:#x})")
