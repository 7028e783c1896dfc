"""Builds the extension with cargo and copies it next to this script as `rfim.so`."""

import shutil
import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parent.parent
subprocess.run(
    ["cargo", "build", "--release", "-p", "rfim-py", "--features", "extension-module"],
    cwd=root,
    check=True,
)
lib = {"darwin": "librfim.dylib", "win32": "rfim.dll"}.get(sys.platform, "librfim.so")
target = Path(__file__).resolve().parent / ("rfim.pyd" if sys.platform == "win32" else "rfim.so")
shutil.copyfile(root / "target" / "release" / lib, target)
print(f"wrote {target}")
