#!/usr/bin/env python3
"""Prepend the Apache-2.0 header to C++ sources that lack it."""

import pathlib
import sys

HEADER = """// {path}

// Copyright 2026  hereval authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

"""

DIRS = ("include", "src", "tools", "tests", "bench")


def main() -> int:
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".").resolve()
    changed = 0
    for d in DIRS:
        for p in sorted((root / d).rglob("*")):
            if p.suffix not in (".cpp", ".hpp") or not p.is_file():
                continue
            text = p.read_text()
            if "Licensed under the Apache License" in text[:2000]:
                continue
            p.write_text(HEADER.format(path=p.relative_to(root).as_posix()) + text)
            changed += 1
    print(f"{changed} file(s) updated")
    return 0


if __name__ == "__main__":
    sys.exit(main())
