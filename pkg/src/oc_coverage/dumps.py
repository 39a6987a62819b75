"""Streaming access to OpenCitations CSV dumps.

A dump is a directory, a single CSV (optionally gzipped), a zip archive (whose
members may themselves be zips) or a tar archive. Each CSV inside it is one
``DumpFile`` work unit; nothing is ever decompressed to disk or into memory as
a whole.
"""

from __future__ import annotations

import contextlib
import csv
import gzip
import io
import logging
import tarfile
import zipfile
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

READ_ERRORS = (OSError, EOFError, zipfile.BadZipFile, tarfile.TarError, UnicodeDecodeError, csv.Error)


class UnreadableDumpFile(Exception):
    pass


class DumpLayoutError(Exception):
    """The dump header does not carry the configured columns."""


def _is_csv(name: str) -> bool:
    return name.lower().endswith((".csv", ".csv.gz"))


def _is_tar(name: str) -> bool:
    return name.lower().endswith((".tar", ".tar.gz", ".tgz"))


class _Forward(io.RawIOBase):
    """Read-only, non-seekable view of a streamed tar member (its stream cannot report seekability)."""

    def __init__(self, fileobj):
        self._f = fileobj

    def readable(self) -> bool:
        return True

    def readinto(self, buf) -> int:
        data = self._f.read(len(buf))
        buf[: len(data)] = data
        return len(data)


@dataclass(frozen=True, order=True)
class DumpFile:
    """One CSV inside a dump: ``path`` on disk plus the chain of archive members to open."""

    path: str
    members: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        return "!".join((self.path,) + self.members)

    @contextlib.contextmanager
    def open_text(self) -> Iterator[io.TextIOBase]:
        with contextlib.ExitStack() as stack:
            if _is_tar(self.path):
                # tar members are only reachable by streaming through the archive
                tar = stack.enter_context(tarfile.open(self.path, "r|*"))
                raw = None
                for info in tar:
                    if info.name == self.members[0]:
                        raw = tar.extractfile(info)
                        break
                if raw is None:
                    raise UnreadableDumpFile(f"{self.label}: member not found")
                yield stack.enter_context(self._wrap(io.BufferedReader(_Forward(raw)), self.members[0]))
                return
            raw = stack.enter_context(open(self.path, "rb"))
            name = self.path
            for member in self.members:
                zf = stack.enter_context(zipfile.ZipFile(raw))
                raw = stack.enter_context(zf.open(member))
                name = member
            yield stack.enter_context(self._wrap(raw, name))

    @staticmethod
    def _wrap(raw, name: str) -> io.TextIOWrapper:
        if name.lower().endswith(".gz"):
            raw = gzip.GzipFile(fileobj=raw)
        return io.TextIOWrapper(raw, encoding="utf-8-sig", newline="")


def _zip_members(path: str, chain: tuple[str, ...], zf: zipfile.ZipFile) -> Iterator[DumpFile]:
    for name in sorted(zf.namelist()):
        if name.endswith("/"):
            continue
        if _is_csv(name):
            yield DumpFile(path, chain + (name,))
        elif name.lower().endswith(".zip"):
            with zf.open(name) as inner_raw, zipfile.ZipFile(inner_raw) as inner:
                yield from _zip_members(path, chain + (name,), inner)


def _expand(path: Path) -> Iterator[DumpFile]:
    name = path.name.lower()
    if _is_csv(name):
        yield DumpFile(str(path))
    elif name.endswith(".zip"):
        with zipfile.ZipFile(path) as zf:
            yield from _zip_members(str(path), (), zf)
    elif _is_tar(name):
        with tarfile.open(path, "r|*") as tar:
            members = [info.name for info in tar if info.isfile() and _is_csv(info.name)]
        for member in sorted(members):
            yield DumpFile(str(path), (member,))


def list_dump_files(dump: str | Path) -> list[DumpFile]:
    """All CSV work units of a dump, in a canonical order. A missing path is an empty dump."""
    dump = Path(dump)
    if dump.is_dir():
        paths = sorted(p for p in dump.rglob("*") if p.is_file())
    elif dump.is_file():
        paths = [dump]
    else:
        logger.warning("dump path %s does not exist", dump)
        return []
    units: list[DumpFile] = []
    for p in paths:
        try:
            units.extend(_expand(p))
        except READ_ERRORS as exc:
            logger.error("cannot list %s: %s", p, exc)
    return units


def read_header(unit: DumpFile) -> list[str]:
    with unit.open_text() as fh:
        try:
            return [c.strip() for c in next(csv.reader(fh))]
        except StopIteration:
            return []


def column_indexes(header: list[str], wanted: dict[str, str], label: str) -> dict[str, int]:
    """Map logical column -> position; ``wanted`` maps logical name -> header name."""
    missing = [col for col in wanted.values() if col not in header]
    if missing:
        raise DumpLayoutError(
            f"{label}: header {header!r} lacks column(s) {missing!r}; "
            "set the column names for this dump release in the config file"
        )
    return {logical: header.index(col) for logical, col in wanted.items()}


def fingerprint(dump: str | Path) -> list[tuple[str, int, int]]:
    """Cheap identity of a dump (relative path, size, mtime) without reading its content."""
    dump = Path(dump)
    if dump.is_file():
        st = dump.stat()
        return [(dump.name, st.st_size, st.st_mtime_ns)]
    if not dump.is_dir():
        return []
    out = []
    for p in sorted(dump.rglob("*")):
        if p.is_file():
            st = p.stat()
            out.append((str(p.relative_to(dump)), st.st_size, st.st_mtime_ns))
    return out
