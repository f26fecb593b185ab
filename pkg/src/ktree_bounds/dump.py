"""
Binary dump of one solver run: its input lists and the resulting trace.

Layout, all little-endian:

    b"KTRE" | version u32 | len u32 | m magnitude bytes | k u32 | n u64 | mode u8
    k*n values, each a signed integer of width ceil((bits(m) + 1) / 8)
    len u32 | RunTrace as JSON
"""

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .errors import ParameterError
from .models import RunTrace, SumMode
from .params import ProblemParams
from .solver import InputLists

__all__ = [
    "DUMP_MAGIC",
    "DUMP_VERSION",
    "RunDump",
    "encode_run",
    "decode_run",
    "dump_run",
    "load_run",
]

DUMP_MAGIC = b"KTRE"
DUMP_VERSION = 1

_MODES = {SumMode.INTEGER: 0, SumMode.CENTERED_MOD: 1}


@dataclass(frozen=True)
class RunDump:
    m: int
    k: int
    n: int
    mode: SumMode
    lists: InputLists
    trace: RunTrace


def _value_width(m: int) -> int:
    return (m.bit_length() + 1 + 7) // 8


def encode_run(params: ProblemParams, lists: InputLists, trace: RunTrace) -> bytes:
    lists.check(params)
    m_bytes = params.m.to_bytes((params.m.bit_length() + 7) // 8, "little")
    width = _value_width(params.m)

    parts = [
        DUMP_MAGIC,
        struct.pack("<I", DUMP_VERSION),
        struct.pack("<I", len(m_bytes)),
        m_bytes,
        struct.pack("<IQB", params.k, params.n, _MODES[params.mode]),
    ]
    for lst in lists.lists:
        parts.extend(v.to_bytes(width, "little", signed=True) for v in lst)
    body = trace.model_dump_json(by_alias=True).encode()
    parts.append(struct.pack("<I", len(body)))
    parts.append(body)
    return b"".join(parts)


def decode_run(data: bytes) -> RunDump:
    view = memoryview(data)
    if bytes(view[:4]) != DUMP_MAGIC:
        raise ParameterError("not a KTRE dump")
    try:
        version, m_len = struct.unpack_from("<II", view, 4)
        if version != DUMP_VERSION:
            raise ParameterError(f"unsupported dump version {version}")
        pos = 12
        m = int.from_bytes(view[pos:pos + m_len], "little")
        pos += m_len
        k, n, mode_byte = struct.unpack_from("<IQB", view, pos)
        pos += struct.calcsize("<IQB")

        width = _value_width(m)
        lists = []
        for _ in range(k):
            lst = []
            for _ in range(n):
                lst.append(int.from_bytes(view[pos:pos + width], "little", signed=True))
                pos += width
            lists.append(lst)
        (body_len,) = struct.unpack_from("<I", view, pos)
        pos += 4
        body = bytes(view[pos:pos + body_len])
        if len(body) != body_len or pos + body_len != len(data):
            raise ParameterError("truncated or padded KTRE dump")
    except struct.error as exc:
        raise ParameterError(f"truncated KTRE dump: {exc}") from exc

    mode = {v: key for key, v in _MODES.items()}.get(mode_byte)
    if mode is None:
        raise ParameterError(f"unknown mode byte {mode_byte}")
    return RunDump(
        m=m,
        k=k,
        n=n,
        mode=mode,
        lists=InputLists.of(lists),
        trace=RunTrace.model_validate_json(body),
    )


def dump_run(path: Union[str, Path], params: ProblemParams, lists: InputLists, trace: RunTrace) -> None:
    """Write one run to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_run(params, lists, trace))


def load_run(path: Union[str, Path]) -> RunDump:
    return decode_run(Path(path).read_bytes())
