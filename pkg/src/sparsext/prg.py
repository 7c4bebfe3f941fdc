"""Block construction, per-block extraction, and XOR-chain locality reduction.

A local function f is applied to a grid of input strings; its outputs and
inputs are concatenated, cut to a fixed window at a per-block offset, and
transposed so that column j collects bit j of every block.  Each column is
then compressed by one weak-family member, giving a generator circuit whose
outputs are XORs of block bits and seed bits.  The chain transform rewrites
every long XOR as a cascade of 3-term XORs over fresh auxiliary inputs whose
fold reproduces the original bit, capping output locality at three times the
locality of f.  No cryptographic hardness is claimed; the deliverables are
the structural identities (window lengths, reconstruction, locality and
sparsity accounting).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .families import FamilyInstance
from .rng import generator

__all__ = [
    "AccountingReport",
    "Atom",
    "BlockLayout",
    "Gate",
    "LocalFunction",
    "PrgCircuit",
    "ReducedCircuit",
    "accounting",
    "bits_from_hex",
    "bits_to_hex",
    "build_G",
    "build_blocks",
    "circuit_from_json",
    "circuit_to_json",
    "evaluate_circuit",
    "evaluate_circuit_batch",
    "locality_reduce",
    "random_local_function",
    "transpose_blocks",
]

Atom = tuple[str, int]  # ("in", input_index) or ("gate", gate_index)


@dataclass(frozen=True)
class Gate:
    """A truth-table gate: bit a of ``table`` is the output on assignment a,
    where bit j of a is the value of ``inputs[j]``."""

    inputs: tuple[int, ...]
    table: int

    def __post_init__(self):
        if not 0 <= self.table < (1 << (1 << len(self.inputs))):
            raise ValueError("truth table does not match gate arity")

    def eval(self, x: int) -> int:
        a = 0
        for j, idx in enumerate(self.inputs):
            a |= ((x >> idx) & 1) << j
        return (self.table >> a) & 1

    def relevant_inputs(self) -> tuple[int, ...]:
        """Inputs the table genuinely depends on (dummy indices dropped)."""
        arity = len(self.inputs)
        out = []
        for j in range(arity):
            for a in range(1 << arity):
                if a >> j & 1:
                    continue
                if (self.table >> a) & 1 != (self.table >> (a | 1 << j)) & 1:
                    out.append(self.inputs[j])
                    break
        return tuple(out)


@dataclass(frozen=True)
class LocalFunction:
    """An n_in -> n_out bit function where output j is gates[j]."""

    n_in: int
    n_out: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if len(self.gates) != self.n_out:
            raise ValueError("gate count must equal n_out")
        for g in self.gates:
            if any(not 0 <= i < self.n_in for i in g.inputs):
                raise ValueError("gate input out of range")

    @property
    def locality(self) -> int:
        return max(len(g.inputs) for g in self.gates)

    def eval(self, x: int) -> int:
        out = 0
        for j, g in enumerate(self.gates):
            out |= g.eval(x) << j
        return out


def random_local_function(n: int, ell: int, seed) -> LocalFunction:
    """n -> n function with ell-input gates at uniform positions and tables."""
    path = tuple(seed) if isinstance(seed, tuple) else (int(seed),)
    rng = generator(*path)
    gates = []
    for _ in range(n):
        inputs = tuple(int(i) for i in rng.choice(n, size=ell, replace=False))
        table_bits = rng.integers(0, 2, size=1 << ell)
        table = 0
        for a, b in enumerate(table_bits):
            table |= int(b) << a
        gates.append(Gate(inputs, table))
    return LocalFunction(n, n, tuple(gates))


@dataclass(frozen=True)
class BlockLayout:
    """Geometry of the block construction.

    Each block concatenates k_blocks pairs (f(x), x) of n bits each and keeps
    the window of length ``m_cols`` = 2 (k_blocks - 1) n starting at its
    offset, so every block has the same length for any offset in [1, n].
    """

    t: int
    k_blocks: int
    n: int
    offsets: tuple[int, ...]

    def __post_init__(self):
        if self.k_blocks < 2:
            raise ValueError("need k_blocks >= 2 for a nonempty window")
        if self.t < 1:
            raise ValueError("need at least one block")
        if len(self.offsets) != self.t:
            raise ValueError("one offset per block required")
        if any(not 1 <= o <= self.n for o in self.offsets):
            raise ValueError(f"offsets must lie in [1, {self.n}]")

    @property
    def m_cols(self) -> int:
        return 2 * (self.k_blocks - 1) * self.n

    @classmethod
    def random(cls, t: int, k_blocks: int, n: int, seed) -> "BlockLayout":
        path = tuple(seed) if isinstance(seed, tuple) else (int(seed),)
        rng = generator(*path)
        offsets = tuple(int(o) for o in rng.integers(1, n + 1, size=t))
        return cls(t, k_blocks, n, offsets)


def build_blocks(f: LocalFunction, layout: BlockLayout,
                 x_strings: Sequence[Sequence[int]]) -> list[int]:
    """Blocks z_i: the m_cols-bit window at offset o_i of
    f(x_i1) . x_i1 . ... . f(x_ik) . x_ik."""
    n = layout.n
    if f.n_in != n or f.n_out != n:
        raise ValueError("local function shape must be n -> n")
    if len(x_strings) != layout.t or any(len(row) != layout.k_blocks
                                         for row in x_strings):
        raise ValueError("x_strings must be a t x k_blocks grid")
    window = (1 << layout.m_cols) - 1
    blocks = []
    for i, row in enumerate(x_strings):
        concat = 0
        pos = 0
        for x in row:
            concat |= f.eval(x) << pos
            concat |= x << (pos + n)
            pos += 2 * n
        blocks.append((concat >> layout.offsets[i]) & window)
    return blocks


def transpose_blocks(blocks: Sequence[int], length: int) -> list[int]:
    """Column strings X_j (bit i of X_j is bit j of block i)."""
    if any(z >> length for z in blocks):
        raise ValueError(f"block longer than the declared length {length}")
    out = []
    for j in range(length):
        v = 0
        for i, z in enumerate(blocks):
            v |= ((z >> j) & 1) << i
        out.append(v)
    return out


class AccountingReport(NamedTuple):
    total_sparsity: int
    max_locality: int
    stretch: int


@dataclass(frozen=True)
class PrgCircuit:
    """Dependency-explicit circuit: every output is an XOR of atoms.

    An atom is either a raw input bit or a gate applied to input bits; the
    per-output dependency lists and the locality/sparsity metadata are fixed
    at build time and re-derivable from the atoms (see :func:`accounting`).
    """

    segments: tuple[tuple[str, int], ...]
    gates: tuple[Gate, ...]
    outputs: tuple[tuple[Atom, ...], ...]
    deps: tuple[tuple[int, ...], ...]
    ell: int
    max_locality: int
    total_sparsity: int

    @property
    def input_length(self) -> int:
        return sum(length for _, length in self.segments)

    @property
    def output_length(self) -> int:
        return len(self.outputs)

    def segment_offset(self, name: str) -> int:
        pos = 0
        for seg, length in self.segments:
            if seg == name:
                return pos
            pos += length
        raise KeyError(name)


def _atom_dependencies(atoms: Sequence[Atom], gates: Sequence[Gate]
                       ) -> tuple[int, ...]:
    deps: set[int] = set()
    for kind, idx in atoms:
        if kind == "in":
            deps.add(idx)
        elif kind == "gate":
            deps.update(gates[idx].relevant_inputs())
        else:
            raise ValueError(f"unknown atom kind {kind!r}")
    return tuple(sorted(deps))


def _cancel_atoms(atoms: Sequence[Atom]) -> tuple[Atom, ...]:
    """Drop atoms appearing an even number of times (they XOR away)."""
    counts = Counter(atoms)
    return tuple(a for a in dict.fromkeys(atoms) if counts[a] % 2 == 1)


def _make_circuit(segments, gates, outputs, ell) -> PrgCircuit:
    gates = tuple(gates)
    outputs = tuple(_cancel_atoms(a) for a in outputs)
    deps = tuple(_atom_dependencies(a, gates) for a in outputs)
    localities = [len(d) for d in deps]
    return PrgCircuit(
        segments=tuple(segments), gates=gates, outputs=outputs, deps=deps,
        ell=ell, max_locality=max(localities, default=0),
        total_sparsity=sum(localities))


def build_G(f: LocalFunction, layout: BlockLayout,
            weak_instances: Sequence[FamilyInstance]) -> PrgCircuit:
    """Circuit computing the concatenated per-column extractions.

    Column j of the transposed blocks feeds weak instance j together with its
    own s-bit seed segment; every output bit is the XOR of the selected block
    bits (each a raw x bit or an f-gate bit, depending on window position)
    and the selected seed bits.
    """
    n, t, kb, m_cols = layout.n, layout.t, layout.k_blocks, layout.m_cols
    if len(weak_instances) != m_cols:
        raise ValueError(f"need one weak instance per column: {m_cols}")
    specs = {(inst.spec.n, inst.spec.s, inst.spec.m) for inst in weak_instances}
    if len(specs) != 1:
        raise ValueError("weak instances must share one shape")
    spec_n, s, m_out = specs.pop()
    if spec_n != t:
        raise ValueError(f"weak instances read {spec_n} bits, blocks give {t}")

    x_len = t * kb * n
    segments = [("x", x_len), ("seed", m_cols * s)]

    def x_global(i: int, a: int, bit: int) -> int:
        return (i * kb + a) * n + bit

    gates: list[Gate] = []
    gate_ids: dict[tuple[int, int, int], int] = {}

    def block_atom(i: int, j: int) -> Atom:
        pos = layout.offsets[i] + j  # position in the 2 k n concatenation
        a, off = divmod(pos, 2 * n)
        if off < n:  # f-output half of the pair
            key = (i, a, off)
            if key not in gate_ids:
                g = f.gates[off]
                gates.append(Gate(tuple(x_global(i, a, b) for b in g.inputs),
                                  g.table))
                gate_ids[key] = len(gates) - 1
            return ("gate", gate_ids[key])
        return ("in", x_global(i, a, off - n))

    outputs: list[list[Atom]] = []
    for j, inst in enumerate(weak_instances):
        seed_base = x_len + j * s
        for out_r in range(m_out):
            atoms: list[Atom] = []
            m_row = inst.M.row_masks[out_r]
            for i in range(t):
                if (m_row >> i) & 1:
                    atoms.append(block_atom(i, j))
            b_row = inst.B.row_masks[out_r]
            for b in range(s):
                if (b_row >> b) & 1:
                    atoms.append(("in", seed_base + b))
            outputs.append(atoms)
    return _make_circuit(segments, gates, outputs, f.locality)


@dataclass(frozen=True)
class ReducedCircuit:
    """A chained circuit plus the output groups that fold back to the original."""

    circuit: PrgCircuit
    groups: tuple[tuple[int, ...], ...]


def locality_reduce(G: PrgCircuit) -> ReducedCircuit:
    """Replace every XOR of T >= 4 atoms by a cascade of 3-atom entries.

    An output A1 + ... + AT becomes the tuple
    (A1 + A2 + r1, r1 + A3 + r2, ..., r_{T-3} + A_{T-1} + A_T) over T - 3
    fresh chain inputs; XORing the tuple telescopes back to the original
    output, and each entry touches at most three atoms, so the reduced
    circuit has locality at most 3 ell.
    """
    chain_base = G.input_length
    n_chain = sum(max(len(a) - 3, 0) for a in G.outputs)
    segments = (*G.segments, ("chain", n_chain))
    outputs: list[tuple[Atom, ...]] = []
    groups: list[tuple[int, ...]] = []
    next_chain = chain_base
    for atoms in G.outputs:
        T = len(atoms)
        start = len(outputs)
        if T < 4:
            outputs.append(atoms)
        else:
            aux = list(range(next_chain, next_chain + T - 3))
            next_chain += T - 3
            outputs.append((atoms[0], atoms[1], ("in", aux[0])))
            for k in range(1, T - 3):
                outputs.append((("in", aux[k - 1]), atoms[k + 1], ("in", aux[k])))
            outputs.append((("in", aux[-1]), atoms[T - 2], atoms[T - 1]))
        groups.append(tuple(range(start, len(outputs))))
    reduced = _make_circuit(segments, G.gates, outputs, G.ell)
    return ReducedCircuit(reduced, tuple(groups))


def accounting(G: PrgCircuit) -> AccountingReport:
    """Recount sparsity and locality from the dependency structure."""
    deps = [_atom_dependencies(a, G.gates) for a in G.outputs]
    localities = [len(d) for d in deps]
    return AccountingReport(sum(localities), max(localities, default=0),
                            G.output_length - G.input_length)


def evaluate_circuit(G: PrgCircuit, x: int) -> int:
    if not 0 <= x < (1 << G.input_length):
        raise ValueError("input has bits beyond the circuit's input length")
    gate_vals = [g.eval(x) for g in G.gates]
    out = 0
    for j, atoms in enumerate(G.outputs):
        acc = 0
        for kind, idx in atoms:
            acc ^= gate_vals[idx] if kind == "gate" else (x >> idx) & 1
        out |= acc << j
    return out


def evaluate_circuit_batch(G: PrgCircuit, bits: np.ndarray) -> np.ndarray:
    """Vectorized evaluation: (N, input_length) 0/1 -> (N, output_length)."""
    bits = np.asarray(bits, dtype=np.uint8)
    gate_vals = []
    for g in G.gates:
        a = np.zeros(bits.shape[0], dtype=np.int64)
        for j, idx in enumerate(g.inputs):
            a |= bits[:, idx].astype(np.int64) << j
        table = np.array([(g.table >> v) & 1 for v in range(1 << len(g.inputs))],
                         dtype=np.uint8)
        gate_vals.append(table[a])
    out = np.zeros((bits.shape[0], G.output_length), dtype=np.uint8)
    for j, atoms in enumerate(G.outputs):
        acc = np.zeros(bits.shape[0], dtype=np.uint8)
        for kind, idx in atoms:
            acc ^= gate_vals[idx] if kind == "gate" else bits[:, idx]
        out[:, j] = acc
    return out


def bits_to_hex(value: int, n_bits: int) -> str:
    """Little-endian byte hex of an n_bits-wide value (bit i = byte i//8)."""
    return value.to_bytes((n_bits + 7) // 8, "little").hex()


def bits_from_hex(s: str, n_bits: int) -> int:
    value = int.from_bytes(bytes.fromhex(s), "little")
    if value >> n_bits:
        raise ValueError(f"hex input has bits beyond length {n_bits}")
    return value


def circuit_to_json(G: PrgCircuit) -> str:
    doc = {
        "segments": [[name, length] for name, length in G.segments],
        "ell": G.ell,
        "gates": [{"inputs": list(g.inputs), "table": g.table} for g in G.gates],
        "outputs": [{"atoms": [[k, i] for k, i in atoms],
                     "dependencies": list(deps)}
                    for atoms, deps in zip(G.outputs, G.deps)],
        "metadata": {"max_locality": G.max_locality,
                     "total_sparsity": G.total_sparsity},
    }
    return json.dumps(doc, sort_keys=True)


def circuit_from_json(s: str) -> PrgCircuit:
    doc = json.loads(s)
    gates = [Gate(tuple(g["inputs"]), g["table"]) for g in doc["gates"]]
    outputs = [tuple((k, i) for k, i in o["atoms"]) for o in doc["outputs"]]
    G = _make_circuit([tuple(seg) for seg in doc["segments"]], gates, outputs,
                      doc["ell"])
    stored = [tuple(o["dependencies"]) for o in doc["outputs"]]
    if list(G.deps) != stored:
        raise ValueError("stored dependency lists disagree with the atoms")
    if (G.max_locality != doc["metadata"]["max_locality"]
            or G.total_sparsity != doc["metadata"]["total_sparsity"]):
        raise ValueError("stored metadata disagrees with the atoms")
    return G
