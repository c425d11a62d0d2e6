"""Bit-exact genome wire format and corpus file I/O.

A genome is a lowercase hex string: an 8-byte big-endian generation counter
followed by the retained differentiae in ascending-rank order, packed
most-significant-bit first and zero-padded to a whole byte.  Which ranks the
payload covers is not stored per genome; it is implied by the generation
counter plus the corpus-level retention policy, so decoding always needs the
policy in hand.

Corpus files are RFC-4180 CSV with columns ``genome_hex, origin_time,
taxon_label`` plus any extra metadata columns, with the shared policy kind,
capacity, and differentia bit width in a companion ``<path>.meta.json`` file.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .annotations import Annotation, validate_annotation
from .errors import CodecError, FormatError
from .retention import RetentionPolicy, retained_ranks

_HEADER_BYTES = 8
_BASE_COLUMNS = ("genome_hex", "origin_time", "taxon_label")


def encode_genome(a: Annotation, policy: RetentionPolicy) -> str:
    """Encode ``a`` as a hex genome string under ``policy``."""
    validate_annotation(a, policy)
    w = a.differentia_bitwidth
    total_bits = len(a.differentiae) * w
    value = 0
    for d in a.differentiae:
        value = (value << w) | d
    pad_bits = -total_bits % 8
    value <<= pad_bits
    payload = value.to_bytes((total_bits + pad_bits) // 8, "big")
    header = a.generations_elapsed.to_bytes(_HEADER_BYTES, "big")
    return (header + payload).hex()


def decode_genome(hex_str: str, policy: RetentionPolicy, w: int) -> Annotation:
    """Decode a hex genome string back into an annotation."""
    try:
        raw = bytes.fromhex(hex_str)
    except ValueError as exc:
        raise CodecError(f"genome is not valid hex: {exc}") from None
    if len(raw) < _HEADER_BYTES:
        raise CodecError("genome shorter than its generation header")
    g = int.from_bytes(raw[:_HEADER_BYTES], "big")
    ranks = retained_ranks(policy, g)
    total_bits = len(ranks) * w
    expected_payload = (total_bits + 7) // 8
    payload = raw[_HEADER_BYTES:]
    if len(payload) != expected_payload:
        raise CodecError(
            f"payload is {len(payload)} bytes, expected {expected_payload} "
            f"for generation {g} under {policy.kind}/{policy.capacity}"
        )
    value = int.from_bytes(payload, "big") >> (-total_bits % 8)
    mask = (1 << w) - 1
    n = len(ranks)
    diffs = tuple((value >> ((n - 1 - i) * w)) & mask for i in range(n))
    return Annotation(ranks, diffs, g, w)


def decode_chunk(
    rows: Sequence[tuple[str, dict]], policy: RetentionPolicy, w: int
) -> list[tuple[Annotation, dict]]:
    """Decode a batch of (hex, metadata) rows, preserving order.

    Rows are independent; failures are collected and reported together with
    their row indices rather than aborting at the first bad genome.
    """
    out = []
    failures = []
    for i, (hex_str, metadata) in enumerate(rows):
        try:
            out.append((decode_genome(hex_str, policy, w), metadata))
        except CodecError as exc:
            failures.append((i, str(exc)))
    if failures:
        shown = "; ".join(f"row {i}: {msg}" for i, msg in failures[:5])
        more = f" (+{len(failures) - 5} more)" if len(failures) > 5 else ""
        raise CodecError(f"{len(failures)} rows failed to decode: {shown}{more}")
    return out


@dataclass(frozen=True)
class CorpusMeta:
    """Corpus-level configuration shared by every genome in a file."""

    policy_kind: str
    capacity: int
    differentia_bitwidth: int

    @property
    def policy(self) -> RetentionPolicy:
        return RetentionPolicy(self.policy_kind, self.capacity)


class CorpusRow(NamedTuple):
    genome_hex: str
    origin_time: int
    taxon_label: str
    metadata: dict


def corpus_meta_path(corpus_path) -> Path:
    return Path(str(corpus_path) + ".meta.json")


def write_corpus(
    path,
    meta: CorpusMeta,
    rows: Iterable[tuple[str, int, str, dict]],
    metadata_fields: Sequence[str] = (),
) -> int:
    """Write genome rows and the companion metadata file; returns row count."""
    path = Path(path)
    fields = list(_BASE_COLUMNS) + list(metadata_fields)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for hex_str, origin_time, label, metadata in rows:
            writer.writerow(
                [hex_str, origin_time, label]
                + [metadata.get(k, "") for k in metadata_fields]
            )
            count += 1
    corpus_meta_path(path).write_text(
        json.dumps(
            {
                "policy_kind": meta.policy_kind,
                "capacity": meta.capacity,
                "differentia_bitwidth": meta.differentia_bitwidth,
            }
        )
        + "\n",
        encoding="utf-8",
    )
    return count


def read_corpus_meta(path) -> CorpusMeta:
    meta_path = corpus_meta_path(path)
    try:
        raw = json.loads(meta_path.read_text(encoding="utf-8"))
        return CorpusMeta(
            str(raw["policy_kind"]),
            int(raw["capacity"]),
            int(raw["differentia_bitwidth"]),
        )
    except FileNotFoundError:
        raise FormatError(f"missing corpus metadata file {meta_path}") from None
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"bad corpus metadata file {meta_path}: {exc}") from None


def read_corpus(path) -> tuple[CorpusMeta, list[CorpusRow]]:
    """Read a corpus CSV plus its metadata sidecar."""
    meta = read_corpus_meta(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty corpus file") from None
        if tuple(header[:3]) != _BASE_COLUMNS:
            raise FormatError(
                f"{path}: expected leading columns {_BASE_COLUMNS}, got {header[:3]}"
            )
        extra = header[3:]
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(header):
                raise FormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}"
                )
            try:
                origin = int(record[1])
            except ValueError:
                raise FormatError(
                    f"{path}:{lineno}: origin_time {record[1]!r} is not an integer"
                ) from None
            metadata = {k: v for k, v in zip(extra, record[3:]) if v != ""}
            rows.append(CorpusRow(record[0], origin, record[2], metadata))
    return meta, rows
