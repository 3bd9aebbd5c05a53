#!/usr/bin/env python3
# Copyright 2026 The Verijar Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Independent cross-check of generated fixtures: archives are validated with
# Python's zipfile (a serializer this project does not share code with), and
# class-file entries are walked by a minimal structural reader written here.
# Run against a directory of fixture jars, e.g.:
#
#   build/tools/verijar fixtures --pattern P6 --seed 1 --count 5 --out-dir /tmp/fx
#   python3 scripts/crosscheck.py /tmp/fx

import struct
import sys
import zipfile
from pathlib import Path

CP_WIDTHS = {
    # tag: fixed payload size; None means variable (Utf8)
    1: None, 3: 4, 4: 4, 5: 8, 6: 8, 7: 2, 8: 2, 9: 4, 10: 4, 11: 4,
    12: 4, 15: 3, 16: 2, 17: 4, 18: 4, 19: 2, 20: 2,
}


class ClassReadError(Exception):
    pass


def walk_class(data: bytes) -> dict:
    """Structural walk of a class file; raises ClassReadError on any
    inconsistency. Returns summary counts."""
    off = 0

    def need(n):
        nonlocal off
        if off + n > len(data):
            raise ClassReadError(f"truncated at offset {off}, need {n} bytes")
        chunk = data[off:off + n]
        off += n
        return chunk

    def u1():
        return need(1)[0]

    def u2():
        return struct.unpack(">H", need(2))[0]

    def u4():
        return struct.unpack(">I", need(4))[0]

    if u4() != 0xCAFEBABE:
        raise ClassReadError("bad magic")
    u2()  # minor
    major = u2()
    if not 45 <= major <= 61:
        raise ClassReadError(f"unsupported major version {major}")

    cp_count = u2()
    i = 1
    pool_tags = {}
    while i < cp_count:
        tag = u1()
        if tag not in CP_WIDTHS:
            raise ClassReadError(f"unknown constant tag {tag} at index {i}")
        pool_tags[i] = tag
        if tag == 1:
            need(u2())
        else:
            need(CP_WIDTHS[tag])
        i += 2 if tag in (5, 6) else 1

    u2()  # access flags
    this_class = u2()
    if pool_tags.get(this_class) != 7:
        raise ClassReadError("this_class does not reference a Class constant")
    super_class = u2()
    if super_class and pool_tags.get(super_class) != 7:
        raise ClassReadError("super_class does not reference a Class constant")
    for _ in range(u2()):
        if pool_tags.get(u2()) != 7:
            raise ClassReadError("interface index is not a Class constant")

    def attrs():
        for _ in range(u2()):
            name_idx = u2()
            if pool_tags.get(name_idx) != 1:
                raise ClassReadError("attribute name is not a Utf8 constant")
            need(u4())

    counts = {"fields": u2()}
    for _ in range(counts["fields"]):
        u2(), u2(), u2()
        attrs()
    counts["methods"] = u2()
    for _ in range(counts["methods"]):
        u2(), u2(), u2()
        attrs()
    attrs()
    if off != len(data):
        raise ClassReadError(f"{len(data) - off} trailing bytes")
    counts["pool"] = cp_count - 1
    return counts


def check_archive(path: Path) -> tuple[int, int]:
    classes = 0
    with zipfile.ZipFile(path) as zf:
        bad = zf.testzip()  # CRC check over every entry
        if bad is not None:
            raise SystemExit(f"{path}: CRC failure in entry {bad}")
        for info in zf.infolist():
            payload = zf.read(info)
            if payload[:4] == b"\xca\xfe\xba\xbe":
                try:
                    walk_class(payload)
                except ClassReadError as e:
                    raise SystemExit(f"{path}:{info.filename}: {e}")
                classes += 1
        return len(zf.infolist()), classes


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__ or "usage: crosscheck.py <dir-of-archives>", file=sys.stderr)
        return 2
    root = Path(sys.argv[1])
    archives = sorted(
        p for p in root.rglob("*") if p.suffix in (".jar", ".zip", ".war"))
    if not archives:
        print(f"no archives under {root}", file=sys.stderr)
        return 2
    total_entries = total_classes = 0
    for path in archives:
        entries, classes = check_archive(path)
        total_entries += entries
        total_classes += classes
    print(f"cross-checked {len(archives)} archives: "
          f"{total_entries} entries, {total_classes} class files OK")
    return 0


if __name__ == "__main__":
    sys.exit(main())
