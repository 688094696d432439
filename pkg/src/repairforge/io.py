"""
File formats: code specs, shards and message striping.

Spec files are JSON.  Bit matrices are stored as hex strings of the row-major
flattened bits, packed little-endian within each byte, alongside their shape.
A transformed spec also embeds its lineage (the base spec and transform
config) so the structural procedures can be rebuilt on load.

Shard files are one JSON header line followed by the packed payload bits.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from . import transform
from .codes import Matrices, Naive, RowSelect, SystematicCodeSpec
from .errors import FormatError

SPEC_FORMAT = "repairforge-spec/1"
SHARD_FORMAT = "repairforge-shard/1"


def pack_bits(bits: np.ndarray) -> str:
    return np.packbits(np.asarray(bits, dtype=np.uint8).ravel(), bitorder="little").tobytes().hex()


def unpack_bits(text: str, shape) -> np.ndarray:
    size = int(np.prod(shape))
    try:
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
    except ValueError as exc:
        raise FormatError(f"bad hex bit string: {exc}") from None
    bits = np.unpackbits(raw, bitorder="little")
    if bits.size < size or bits.size - size >= 8:
        raise FormatError(f"bit string holds {bits.size} bits, expected {size}")
    return bits[:size].reshape(shape)


def _strategy_to_dict(s) -> dict:
    if isinstance(s, RowSelect):
        return {"kind": "rows", "rows": list(s.rows)}
    if isinstance(s, Matrices):
        return {"kind": "matrices",
                "mats": {str(y): {"shape": list(m.shape), "bits": pack_bits(m)} for y, m in sorted(s.mats.items())}}
    return {"kind": "naive"}


def _strategy_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "naive":
        return Naive()
    if kind == "rows":
        return RowSelect(tuple(d["rows"]))
    if kind == "matrices":
        return Matrices({int(y): unpack_bits(m["bits"], tuple(m["shape"])) for y, m in d["mats"].items()})
    raise FormatError(f"unknown repair strategy kind {kind!r}")


def _json_safe(obj: Any) -> Any:
    return json.loads(json.dumps(obj, default=str))


def spec_to_dict(spec: SystematicCodeSpec, lineage: dict | None = None) -> dict:
    d = {
        "format": SPEC_FORMAT,
        "n": spec.n, "k": spec.k, "alpha": spec.alpha, "name": spec.name,
        "coding": {"shape": list(spec.coding.shape), "bits": pack_bits(spec.coding)},
        "repair": [_strategy_to_dict(s) for s in spec.repair],
        "meta": _json_safe(spec.meta),
    }
    if lineage is not None:
        d["lineage"] = lineage
    return d


def spec_from_dict(d: dict) -> SystematicCodeSpec:
    if d.get("format") != SPEC_FORMAT:
        raise FormatError(f"not a {SPEC_FORMAT} document (format={d.get('format')!r})")
    try:
        coding = unpack_bits(d["coding"]["bits"], tuple(d["coding"]["shape"]))
        repair = tuple(_strategy_from_dict(s) for s in d["repair"])
        return SystematicCodeSpec(int(d["n"]), int(d["k"]), int(d["alpha"]), coding, repair,
                                  d.get("name", ""), dict(d.get("meta", {})))
    except KeyError as exc:
        raise FormatError(f"spec file missing field {exc}") from None


def spec_sha256(spec: SystematicCodeSpec) -> str:
    """Hash of the bit-level content (shape, coding matrices, repair strategies)."""
    d = spec_to_dict(spec)
    core = {key: d[key] for key in ("n", "k", "alpha", "coding", "repair")}
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()


def lineage_of(tc: transform.TransformedCode) -> dict:
    return {"base": spec_to_dict(tc.base), "config": tc.config.to_dict()}


def save_spec(path, code, lineage: dict | None = None) -> None:
    """Write a spec (or a transformed code, with its lineage) to ``path``."""
    if isinstance(code, transform.TransformedCode):
        lineage = lineage_of(code)
        code = code.spec
    Path(path).write_text(json.dumps(spec_to_dict(code, lineage), indent=1) + "\n")


def read_spec_document(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not JSON ({exc})") from None


def load_spec(path) -> SystematicCodeSpec:
    return spec_from_dict(read_spec_document(path))


def load_code(path):
    """Load a spec; if it carries lineage, rebuild and return the transformed code."""
    d = read_spec_document(path)
    spec = spec_from_dict(d)
    lineage = d.get("lineage")
    if not lineage:
        return spec
    return transformed_from_lineage(spec, lineage)


def transformed_from_lineage(spec: SystematicCodeSpec, lineage: dict) -> transform.TransformedCode:
    base = spec_from_dict(lineage["base"])
    config = transform.TransformConfig.from_dict(lineage["config"])
    tc = transform.apply_transform(base, config, name=spec.name)
    if not np.array_equal(tc.spec.coding, spec.coding) or tc.spec.repair != spec.repair:
        raise FormatError("stored coding matrices disagree with the recorded transform lineage")
    return transform.TransformedCode(tc.base, tc.config, spec, tc.to_params,
                                     tc.structural_generator, tc.fallbacks)


# -- messages and shards -----------------------------------------------------

def message_to_stripes(data: bytes, symbols: int) -> tuple[np.ndarray, int]:
    """Bits of ``data`` (little-endian per byte) as columns of ``symbols`` bits.

    Returns the ``symbols x stripes`` matrix and the number of zero padding bits.
    """
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    stripes = max(1, -(-bits.size // symbols))
    pad = stripes * symbols - bits.size
    padded = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return padded.reshape(stripes, symbols).T.copy(), pad


def stripes_to_message(stripes: np.ndarray, message_bytes: int) -> bytes:
    bits = np.asarray(stripes, dtype=np.uint8).T.ravel()[:message_bytes * 8]
    return np.packbits(bits, bitorder="little").tobytes()


def write_shard(path, node: int, payload: np.ndarray, **header) -> None:
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.ndim == 1:
        payload = payload[:, None]
    head = {"format": SHARD_FORMAT, "node": int(node), "alpha": payload.shape[0],
            "stripes": payload.shape[1], **header}
    body = np.packbits(payload.ravel(), bitorder="little").tobytes()
    Path(path).write_bytes(json.dumps(head, sort_keys=True).encode() + b"\n" + body)


def read_shard(path) -> tuple[dict, np.ndarray]:
    raw = Path(path).read_bytes()
    line, _, body = raw.partition(b"\n")
    try:
        head = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: bad shard header ({exc})") from None
    if head.get("format") != SHARD_FORMAT:
        raise FormatError(f"{path}: not a shard file")
    shape = (head["alpha"], head["stripes"])
    bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8), bitorder="little")
    if bits.size < shape[0] * shape[1]:
        raise FormatError(f"{path}: truncated payload")
    return head, bits[:shape[0] * shape[1]].reshape(shape)


def shard_name(node: int) -> str:
    return f"node{node:03d}.shard"
