"""Line-based exact coefficient cache.

Format::

    # oddborel-coeffs v1 k=1 j=0 S=40
    0 1/1
    1 0/1
    ...
    checksum sha256 <hex digest of every preceding line, newline-terminated>
"""

from __future__ import annotations

import hashlib
import os
import re
from fractions import Fraction
from pathlib import Path

from .series import OscillatorSpec, RSExpansion

VERSION = 1
_HEADER = re.compile(r"^# oddborel-coeffs v(\d+) k=(\d+) j=(\d+) S=(\d+)$")


class CacheError(ValueError):
    pass


class ChecksumError(CacheError):
    pass


class HeaderMismatchError(CacheError):
    pass


def serialize(exp: RSExpansion) -> str:
    lines = [f"# oddborel-coeffs v{VERSION} k={exp.spec.k} j={exp.spec.j} S={exp.order}"]
    for s, a in enumerate(exp.a):
        lines.append(f"{s} {a.numerator}/{a.denominator}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("ascii")).hexdigest()
    return body + f"checksum sha256 {digest}\n"


def deserialize(text: str, expect: OscillatorSpec | None = None) -> RSExpansion:
    """Parse and verify a cache file.

    Raises :class:`ChecksumError` for truncated or edited files and
    :class:`HeaderMismatchError` when ``expect`` names a different ``(k, j)``.
    """
    lines = text.splitlines(keepends=True)
    if not lines or not lines[-1].startswith("checksum "):
        raise ChecksumError("missing checksum line (file truncated?)")
    parts = lines[-1].split()
    if len(parts) != 3 or parts[1] != "sha256":
        raise ChecksumError(f"malformed checksum line: {lines[-1].strip()!r}")
    body = "".join(lines[:-1])
    if hashlib.sha256(body.encode("ascii")).hexdigest() != parts[2]:
        raise ChecksumError("checksum mismatch")

    m = _HEADER.match(lines[0].rstrip("\n"))
    if not m:
        raise CacheError(f"bad header: {lines[0].strip()!r}")
    version, k, j, S = map(int, m.groups())
    if version != VERSION:
        raise CacheError(f"unsupported cache version {version}")
    if expect is not None and (expect.k, expect.j) != (k, j):
        raise HeaderMismatchError(f"cache holds k={k}, j={j}; requested k={expect.k}, j={expect.j}")

    a = []
    for n, line in enumerate(lines[1:-1]):
        idx, frac = line.split()
        if int(idx) != n:
            raise CacheError(f"coefficient index {idx} out of sequence")
        num, den = frac.split("/")
        a.append(Fraction(int(num), int(den)))
    if len(a) != S + 1:
        raise CacheError(f"header says S={S} but {len(a) - 1} orders are present")
    return RSExpansion(OscillatorSpec(k, j), S, a)


def write_cache(exp: RSExpansion, path) -> Path:
    """Write atomically (temp file plus rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(serialize(exp), encoding="ascii")
    os.replace(tmp, path)
    return path


def read_cache(path, expect: OscillatorSpec | None = None) -> RSExpansion:
    return deserialize(Path(path).read_text(encoding="ascii"), expect)


def cache_roundtrip(exp: RSExpansion, path) -> RSExpansion:
    write_cache(exp, path)
    return read_cache(path, exp.spec)
