"""Achievable schemes: placement, delivery, decode, worst-case load.

Memory sharing splits every file into contiguous segments with exact
rational fractions, one segment per constituent scheme. Delivery and
decoding run segment-by-segment and independently of each other. For the
bit-exact path the file size B (in bytes) must make every subfile a whole
number of bytes; `min_file_size` returns the smallest such B.

Subfiles are addressed by (segment index, file index, node mask). Within a
coded segment the mask names the single node caching the subfile and the
subfile occupies the mask-node's chunk of the segment (K equal chunks in
node order).
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import lcm

from ringcache.model import (
    BudgetExceededError,
    DemandError,
    DemandStructure,
    InvalidInstanceError,
    ProblemInstance,
    cyclic_mod,
    mask_of,
)

WORST_CASE_BUDGET = 10**7


class PlacementError(ValueError):
    """A placement violates the partition or memory invariants."""


class SubpacketizationError(ValueError):
    """File size not divisible by the scheme's subpacketization."""


class DecodeError(RuntimeError):
    """A user failed to reconstruct its file; always a scheme bug."""


class SegmentKind(enum.Enum):
    UNCODED_DIRECT = "uncoded_direct"
    MAN_T1 = "man_t1"
    LOCAL_FULL = "local_full"
    MULTIACCESS_LOCAL = "multiaccess_local"

    def memory_cost(self, inst: ProblemInstance) -> Fraction:
        """Per-node cache units consumed per unit of segment fraction."""
        if self is SegmentKind.UNCODED_DIRECT:
            return Fraction(0)
        if self is SegmentKind.MAN_T1:
            return Fraction(inst.a + inst.b)
        if self is SegmentKind.LOCAL_FULL:
            return Fraction(2 * inst.a + inst.b)
        return Fraction(inst.a + inst.b)


@dataclass(frozen=True)
class UncodedPlacement:
    """Map (file, node mask) -> fraction of the file cached exactly there."""

    sizes: dict

    def size(self, i: int, mask: int) -> Fraction:
        return self.sizes.get((i, mask), Fraction(0))

    def file_total(self, i: int) -> Fraction:
        return sum((v for (f, _), v in self.sizes.items() if f == i), Fraction(0))

    def node_usage(self, k: int) -> Fraction:
        bit = 1 << (k - 1)
        return sum((v for (_, m), v in self.sizes.items() if m & bit), Fraction(0))

    def validate(self, inst: ProblemInstance) -> None:
        """Exact partition, memory and non-negativity checks."""
        totals = {i: Fraction(0) for i in range(1, inst.N + 1)}
        for (i, mask), v in self.sizes.items():
            if v < 0:
                raise PlacementError(f"negative fraction for file {i}, mask {mask}")
            if not 0 <= mask < (1 << inst.K):
                raise PlacementError(f"mask {mask} outside [0, 2^K)")
            totals[i] += v
        for i, tot in totals.items():
            if tot != 1:
                raise PlacementError(f"file {i} fractions sum to {tot}, not 1")
        for k in range(1, inst.K + 1):
            used = self.node_usage(k)
            if used > inst.M:
                raise PlacementError(f"node {k} uses {used} > M = {inst.M}")


def place_local_full(inst: ProblemInstance, ds: DemandStructure) -> UncodedPlacement:
    """Cache at node k every file demandable in region k, in full.

    Shared files live at both adjacent nodes, unique files at one; each
    node stores exactly 2a+b file-units.
    """
    sizes = {}
    for i in range(1, inst.N + 1):
        sizes[(i, mask_of(ds.demand_regions(i)))] = Fraction(1)
    return UncodedPlacement(sizes=sizes)


def place_man(inst: ProblemInstance, t: int) -> UncodedPlacement:
    """Canonical coded-caching placement: equal split over all t-subsets."""
    if not 0 <= t <= inst.K:
        raise InvalidInstanceError(f"t must lie in [0, K], got {t}")
    sizes = {}
    if t == 0:
        for i in range(1, inst.N + 1):
            sizes[(i, 0)] = Fraction(1)
        return UncodedPlacement(sizes=sizes)
    n_subsets = 0
    masks = []
    for combo in combinations(range(1, inst.K + 1), t):
        masks.append(mask_of(combo))
        n_subsets += 1
    frac = Fraction(1, n_subsets)
    for i in range(1, inst.N + 1):
        for m in masks:
            sizes[(i, m)] = frac
    return UncodedPlacement(sizes=sizes)


def place_man_t1(inst: ProblemInstance, ds: DemandStructure) -> UncodedPlacement:
    """Every file split into K equal subfiles, one per node; usage a+b."""
    return place_man(inst, 1)


def place_multiaccess(inst: ProblemInstance, ds: DemandStructure) -> UncodedPlacement:
    """Cache each file in full at its home node; needs L >= 2 to decode."""
    if inst.L < 2:
        raise InvalidInstanceError("multiaccess placement requires L >= 2")
    sizes = {}
    for i in range(1, inst.N + 1):
        sizes[(i, 1 << (ds.home_region(i) - 1))] = Fraction(1)
    return UncodedPlacement(sizes=sizes)


@dataclass(frozen=True)
class Segment:
    fraction: Fraction
    kind: SegmentKind


@dataclass(frozen=True)
class SchemeSpec:
    """A memory-sharing mixture of segment schemes; fractions sum to 1."""

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if sum((s.fraction for s in self.segments), Fraction(0)) != 1:
            raise InvalidInstanceError("segment fractions must sum to 1")
        if any(s.fraction <= 0 for s in self.segments):
            raise InvalidInstanceError("segment fractions must be positive")

    def memory_used(self, inst: ProblemInstance) -> Fraction:
        return sum((s.fraction * s.kind.memory_cost(inst) for s in self.segments), Fraction(0))

    def fraction_of(self, kind: SegmentKind) -> Fraction:
        return sum((s.fraction for s in self.segments if s.kind is kind), Fraction(0))

    def placement(self, inst: ProblemInstance, ds: DemandStructure) -> UncodedPlacement:
        """Combine the per-segment placements, scaled by segment fraction."""
        sizes: dict = {}
        for seg in self.segments:
            if seg.kind is SegmentKind.UNCODED_DIRECT:
                part = {(i, 0): Fraction(1) for i in range(1, inst.N + 1)}
            elif seg.kind is SegmentKind.MAN_T1:
                part = place_man_t1(inst, ds).sizes
            elif seg.kind is SegmentKind.LOCAL_FULL:
                part = place_local_full(inst, ds).sizes
            else:
                part = place_multiaccess(inst, ds).sizes
            for key, v in part.items():
                sizes[key] = sizes.get(key, Fraction(0)) + seg.fraction * v
        return UncodedPlacement(sizes=sizes)


def make_scheme(inst: ProblemInstance, ds: DemandStructure) -> SchemeSpec:
    """Memory-share the bracketing corner points for the instance's regime.

    With one cache per user and b(K-1) < 2a the corners are (0, K),
    (a+b, (K-1)/2) and (2a+b, 0); with b(K-1) >= 2a the middle corner is
    skipped. With L >= 2 the corners are (0, K) and (a+b, 0), and any
    M > a+b collapses to the pure local scheme.
    """
    K, a, b, M = inst.K, inst.a, inst.b, inst.M
    if not 0 <= M <= inst.m_max:
        raise InvalidInstanceError(f"M={M} outside [0, {inst.m_max}]")

    def mix(f: Fraction, kind: SegmentKind, other: SegmentKind) -> SchemeSpec:
        segs = []
        if f < 1:
            segs.append(Segment(1 - f, other))
        if f > 0:
            segs.append(Segment(f, kind))
        return SchemeSpec(segments=tuple(segs))

    if inst.L >= 2:
        if M >= a + b:
            return SchemeSpec(segments=(Segment(Fraction(1), SegmentKind.MULTIACCESS_LOCAL),))
        return mix(M / (a + b), SegmentKind.MULTIACCESS_LOCAL, SegmentKind.UNCODED_DIRECT)
    if b * (K - 1) >= 2 * a:
        return mix(M / (2 * a + b), SegmentKind.LOCAL_FULL, SegmentKind.UNCODED_DIRECT)
    if M <= a + b:
        return mix(M / (a + b), SegmentKind.MAN_T1, SegmentKind.UNCODED_DIRECT)
    lam = (M - (a + b)) / a
    return mix(lam, SegmentKind.LOCAL_FULL, SegmentKind.MAN_T1)


@dataclass(frozen=True)
class Message:
    """One multicast message: XOR of the named component subfiles."""

    components: tuple
    size: Fraction
    payload: bytes | None = None


@dataclass(frozen=True)
class BroadcastTranscript:
    messages: tuple[Message, ...]

    @property
    def total_size(self) -> Fraction:
        """Broadcast size in units of the file size B."""
        return sum((m.size for m in self.messages), Fraction(0))

    @property
    def total_bits(self) -> int:
        if any(m.payload is None for m in self.messages):
            raise ValueError("transcript has no payloads (symbolic mode)")
        return 8 * sum(len(m.payload) for m in self.messages)

    def to_bytes(self) -> bytes:
        """Deterministic binary dump.

        Layout (big-endian): u32 message count; per message a u16
        component count, then per component u8 segment / u32 file /
        u32 mask, then u32 payload length and the payload bytes.
        """
        out = [struct.pack(">I", len(self.messages))]
        for m in self.messages:
            if m.payload is None:
                raise ValueError("cannot dump a symbolic transcript")
            out.append(struct.pack(">H", len(m.components)))
            for seg, i, mask in m.components:
                out.append(struct.pack(">BII", seg, i, mask))
            out.append(struct.pack(">I", len(m.payload)))
            out.append(m.payload)
        return b"".join(out)


def _segment_plan(inst: ProblemInstance, ds: DemandStructure, scheme: SchemeSpec, d):
    """Yield (message components, size) pairs in canonical order.

    Canonical order: segments as listed in the scheme; inside a direct
    segment one message per user in region order; inside a coded segment
    one message per node pair in ascending lexicographic order.
    """
    K = inst.K
    for seg_idx, seg in enumerate(scheme.segments):
        if seg.kind is SegmentKind.UNCODED_DIRECT:
            for k in range(1, K + 1):
                yield ((seg_idx, d[k - 1], 0),), seg.fraction
        elif seg.kind is SegmentKind.MAN_T1:
            size = seg.fraction / K
            for j, k in combinations(range(1, K + 1), 2):
                yield (
                    (seg_idx, d[j - 1], 1 << (k - 1)),
                    (seg_idx, d[k - 1], 1 << (j - 1)),
                ), size
        # LOCAL_FULL and MULTIACCESS_LOCAL segments send nothing.


def deliver(inst: ProblemInstance, ds: DemandStructure, scheme: SchemeSpec, d) -> BroadcastTranscript:
    """Symbolic delivery: the multicast messages with exact rational sizes."""
    dv = ds.validate_demand(tuple(d))
    msgs = tuple(
        Message(components=comps, size=size)
        for comps, size in _segment_plan(inst, ds, scheme, dv.files)
    )
    return BroadcastTranscript(messages=msgs)


def min_file_size(inst: ProblemInstance, scheme: SchemeSpec) -> int:
    """Smallest file size in bytes with whole-byte subfiles everywhere."""
    dens = [seg.fraction.denominator for seg in scheme.segments]
    return inst.K * lcm(*dens) if dens else inst.K


def _segment_layout(inst: ProblemInstance, scheme: SchemeSpec, size_b: int):
    """Byte offset and length of each segment; error on indivisibility."""
    layout = []
    offset = Fraction(0)
    for seg in scheme.segments:
        length = seg.fraction * size_b
        if length.denominator != 1 or (seg.kind is SegmentKind.MAN_T1 and (int(length) % inst.K)):
            raise SubpacketizationError(
                f"file size {size_b} not divisible for segment {seg.kind.value}"
            )
        layout.append((int(offset), int(length)))
        offset += length
    return layout


def _check_library(inst: ProblemInstance, library) -> int:
    if len(library) != inst.N:
        raise ValueError(f"library must hold {inst.N} files")
    sizes = {len(f) for f in library}
    if len(sizes) != 1:
        raise ValueError("library files must have identical length")
    return sizes.pop()


def _xor(parts) -> bytes:
    out = bytearray(parts[0])
    for p in parts[1:]:
        for idx, byte in enumerate(p):
            out[idx] ^= byte
    return bytes(out)


def _subfile_bytes(inst, scheme, layout, library, sub) -> bytes:
    seg_idx, i, mask = sub
    off, length = layout[seg_idx]
    data = library[i - 1][off : off + length]
    if scheme.segments[seg_idx].kind is SegmentKind.MAN_T1:
        chunk = length // inst.K
        node = mask.bit_length()  # single-node mask
        return data[(node - 1) * chunk : node * chunk]
    return data


def deliver_bits(
    inst: ProblemInstance,
    ds: DemandStructure,
    scheme: SchemeSpec,
    d,
    library,
) -> BroadcastTranscript:
    """Bit-exact delivery: payloads are XORs of the component subfiles."""
    dv = ds.validate_demand(tuple(d))
    size_b = _check_library(inst, library)
    layout = _segment_layout(inst, scheme, size_b)
    msgs = []
    for comps, size in _segment_plan(inst, ds, scheme, dv.files):
        payload = _xor([_subfile_bytes(inst, scheme, layout, library, c) for c in comps])
        msgs.append(Message(components=comps, size=size, payload=payload))
    return BroadcastTranscript(messages=tuple(msgs))


def fill_caches(
    inst: ProblemInstance,
    ds: DemandStructure,
    scheme: SchemeSpec,
    library,
) -> dict:
    """Cache contents per node: node -> {(segment, file, mask): bytes}."""
    size_b = _check_library(inst, library)
    layout = _segment_layout(inst, scheme, size_b)
    caches: dict[int, dict] = {k: {} for k in range(1, inst.K + 1)}
    for seg_idx, seg in enumerate(scheme.segments):
        if seg.kind is SegmentKind.UNCODED_DIRECT:
            continue
        for i in range(1, inst.N + 1):
            if seg.kind is SegmentKind.MAN_T1:
                holders = {k: 1 << (k - 1) for k in range(1, inst.K + 1)}
            elif seg.kind is SegmentKind.LOCAL_FULL:
                mask = mask_of(ds.demand_regions(i))
                holders = {k: mask for k in ds.demand_regions(i)}
            else:
                home = ds.home_region(i)
                holders = {home: 1 << (home - 1)}
            for k, mask in holders.items():
                sub = (seg_idx, i, mask)
                caches[k][sub] = _subfile_bytes(inst, scheme, layout, library, sub)
    return caches


def accessible_nodes(inst: ProblemInstance, k: int) -> tuple[int, ...]:
    """The L consecutive cache nodes user k can read, starting at its own."""
    return tuple(cyclic_mod(k + j, inst.K) for j in range(inst.L))


def decode(
    inst: ProblemInstance,
    ds: DemandStructure,
    scheme: SchemeSpec,
    d,
    k: int,
    caches: dict,
    transcript: BroadcastTranscript,
) -> bytes:
    """Reconstruct user k's file from the broadcast and its reachable caches.

    ``caches`` maps node index to that node's subfile store and needs to
    cover exactly the nodes `accessible_nodes` returns. Any missing piece
    raises DecodeError: decoding failure is a scheme bug, never expected.
    """
    dv = ds.validate_demand(tuple(d))
    reachable = accessible_nodes(inst, k)
    want = dv.files[k - 1]
    by_components = {}
    for m in transcript.messages:
        by_components.setdefault(m.components, m)

    def cached(node: int, sub) -> bytes:
        try:
            return caches[node][sub]
        except KeyError as exc:
            raise DecodeError(f"user {k}: subfile {sub} missing from cache {node}") from exc

    parts = []
    for seg_idx, seg in enumerate(scheme.segments):
        if seg.kind is SegmentKind.UNCODED_DIRECT:
            msg = by_components.get(((seg_idx, want, 0),))
            if msg is None or msg.payload is None:
                raise DecodeError(f"user {k}: direct message for file {want} missing")
            parts.append(msg.payload)
        elif seg.kind is SegmentKind.MAN_T1:
            chunks = []
            for j in range(1, inst.K + 1):
                if j == k:
                    chunks.append(cached(k, (seg_idx, want, 1 << (k - 1))))
                    continue
                lo, hi = min(j, k), max(j, k)
                comps = (
                    (seg_idx, dv.files[lo - 1], 1 << (hi - 1)),
                    (seg_idx, dv.files[hi - 1], 1 << (lo - 1)),
                )
                msg = by_components.get(comps)
                if msg is None or msg.payload is None:
                    raise DecodeError(f"user {k}: pair message {comps} missing")
                side = cached(k, (seg_idx, dv.files[j - 1], 1 << (k - 1)))
                chunks.append(_xor([msg.payload, side]))
            parts.append(b"".join(chunks))
        elif seg.kind is SegmentKind.LOCAL_FULL:
            parts.append(cached(k, (seg_idx, want, mask_of(ds.demand_regions(want)))))
        else:
            home = ds.home_region(want)
            if home not in reachable:
                raise DecodeError(f"user {k}: home cache {home} of file {want} unreachable")
            parts.append(cached(home, (seg_idx, want, 1 << (home - 1))))
    return b"".join(parts)


def transcript_size(inst: ProblemInstance, ds: DemandStructure, scheme: SchemeSpec, d) -> Fraction:
    """Total symbolic size of the delivery for demand d, in units of B.

    Kept in lockstep with `deliver` (tested to agree message-by-message);
    this avoids materialising message tuples inside the worst-case sweep.
    """
    total = Fraction(0)
    K = inst.K
    pairs = K * (K - 1) // 2
    for seg in scheme.segments:
        if seg.kind is SegmentKind.UNCODED_DIRECT:
            total += seg.fraction * K
        elif seg.kind is SegmentKind.MAN_T1:
            total += seg.fraction * pairs / K
    return total


def worst_case_load(inst: ProblemInstance, ds: DemandStructure, scheme: SchemeSpec) -> Fraction:
    """Exhaustive max of the symbolic delivery size over all demand vectors."""
    n_vectors = 1
    for s in ds.demands:
        n_vectors *= len(s)
    if n_vectors > WORST_CASE_BUDGET:
        raise BudgetExceededError(f"{n_vectors} demand vectors exceed {WORST_CASE_BUDGET}")
    worst = None
    for d in product(*ds.demands):
        load = transcript_size(inst, ds, scheme, d)
        if worst is None or load > worst:
            worst = load
    if worst is None:
        raise DemandError("instance has no demand vectors")
    return worst
