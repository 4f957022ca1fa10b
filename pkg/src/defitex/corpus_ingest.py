"""Discover paper sources under a corpus root and build a manifest.

The corpus root holds one directory per paper (already unpacked from the
arXiv bulk tarballs). A bare ``<id>.tex`` file directly under the root is
treated as a single-file paper.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .diagnostics import Diagnostic

log = logging.getLogger(__name__)

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
DEFAULT_CATEGORY = "math.CO"

_DOCUMENTCLASS = re.compile(r"^[^%\n]*\\documentclass", re.MULTILINE)
_BEGIN_DOCUMENT = re.compile(r"^[^%\n]*\\begin\s*\{document\}", re.MULTILINE)
_INPUT = re.compile(r"\\(input|include)\s*\{([^{}]*)\}")


class SourceDecodeError(ValueError):
    pass


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    value = value.strip()
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class PaperEntry:
    paper_id: str
    entry_tex: Path
    aux_tex: Tuple[Path, ...] = ()
    last_updated: datetime = EPOCH
    category: str = DEFAULT_CATEGORY
    timestamp_source: str = "metadata"

    def to_dict(self, root: Path) -> dict:
        return {
            "paper_id": self.paper_id,
            "entry_tex": self.entry_tex.relative_to(root).as_posix(),
            "aux_tex": [p.relative_to(root).as_posix() for p in self.aux_tex],
            "last_updated": format_timestamp(self.last_updated),
            "category": self.category,
            "timestamp_source": self.timestamp_source,
        }

    @classmethod
    def from_dict(cls, d: dict, root: Path) -> "PaperEntry":
        return cls(
            paper_id=d["paper_id"],
            entry_tex=root / d["entry_tex"],
            aux_tex=tuple(root / p for p in d.get("aux_tex", [])),
            last_updated=parse_timestamp(d["last_updated"]),
            category=d.get("category", DEFAULT_CATEGORY),
            timestamp_source=d.get("timestamp_source", "metadata"),
        )


@dataclass(frozen=True)
class CorpusManifest:
    root: Path
    scanned_at: datetime
    entries: Tuple[PaperEntry, ...]
    warnings: Tuple[Diagnostic, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "root": self.root.as_posix(),
            "scanned_at": format_timestamp(self.scanned_at),
            "entries": [e.to_dict(self.root) for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusManifest":
        root = Path(d["root"])
        return cls(
            root=root,
            scanned_at=parse_timestamp(d["scanned_at"]),
            entries=tuple(PaperEntry.from_dict(e, root) for e in d["entries"]),
        )

    @classmethod
    def load(cls, path: Path) -> "CorpusManifest":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def timestamps(self) -> Dict[str, datetime]:
        return {e.paper_id: e.last_updated for e in self.entries}


def read_metadata(path: Path) -> Dict[str, Tuple[datetime, Optional[str]]]:
    """Read the ``paper_id<TAB>timestamp`` table.

    An optional third column holds the arXiv category. Lines starting with
    ``#`` and a ``paper_id`` header row are skipped.
    """
    table = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), 1):
            if not row or not row[0].strip() or row[0].startswith("#"):
                continue
            if row[0].strip() == "paper_id":
                continue
            if len(row) < 2:
                raise ValueError("%s:%d: expected paper_id<TAB>timestamp" % (path, lineno))
            category = row[2].strip() if len(row) > 2 and row[2].strip() else None
            table[row[0].strip()] = (parse_timestamp(row[1]), category)
    return table


def _read_bytes(path: Path) -> str:
    data = path.read_bytes()
    nul = data.find(b"\x00")
    if nul >= 0:
        raise SourceDecodeError("%s: binary content (NUL byte) at offset %d" % (path, nul))
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return data.decode("latin-1")


def _pick_entry(files: List[Path], warnings: List[Diagnostic], paper_id: str) -> Optional[Path]:
    with_class, with_document = [], []
    for f in files:
        try:
            text = _read_bytes(f)
        except (OSError, SourceDecodeError) as exc:
            warnings.append(Diagnostic("unreadable-file", str(exc), None, paper_id))
            continue
        if _DOCUMENTCLASS.search(text):
            with_class.append(f)
        elif _BEGIN_DOCUMENT.search(text):
            with_document.append(f)
    candidates = with_class or with_document
    if not candidates:
        return None
    # shallowest file wins, then name order
    return min(candidates, key=lambda p: (len(p.parts), p.as_posix()))


def scan_corpus(
    root: Path,
    metadata: Optional[Path] = None,
    default_category: str = DEFAULT_CATEGORY,
) -> CorpusManifest:
    """Build a manifest of every paper under ``root``.

    Papers missing from the metadata table get their entry file's
    modification time and ``timestamp_source == "mtime"``. ``scanned_at`` is
    the newest modification time among the scanned files, so rescanning an
    unchanged tree produces an identical manifest.
    """
    root = Path(root).resolve()
    if not root.is_dir():
        raise FileNotFoundError("corpus root not found: %s" % root)
    meta = read_metadata(Path(metadata)) if metadata is not None else {}
    warnings: List[Diagnostic] = []
    entries: List[PaperEntry] = []
    newest = EPOCH

    papers = []
    for child in sorted(root.iterdir()):
        if child.is_dir():
            papers.append((child.name, sorted(child.rglob("*.tex"))))
        elif child.suffix == ".tex":
            papers.append((child.stem, [child]))

    seen = set()
    for paper_id, files in papers:
        if paper_id in seen:
            warnings.append(Diagnostic("duplicate-paper", "second source ignored", None, paper_id))
            continue
        files = [f for f in files if f.is_file()]
        entry = _pick_entry(files, warnings, paper_id) if files else None
        if entry is None:
            warnings.append(Diagnostic("no-entry-file", "no .tex file with \\documentclass or \\begin{document}", None, paper_id))
            continue
        seen.add(paper_id)
        for f in files:
            newest = max(newest, datetime.fromtimestamp(f.stat().st_mtime, timezone.utc))
        category = default_category
        if paper_id in meta:
            last_updated, cat = meta[paper_id]
            category = cat or category
            source = "metadata"
        else:
            last_updated = datetime.fromtimestamp(entry.stat().st_mtime, timezone.utc)
            source = "mtime"
            warnings.append(Diagnostic("timestamp-fallback", "no metadata row, using file mtime", None, paper_id))
        entries.append(
            PaperEntry(
                paper_id=paper_id,
                entry_tex=entry,
                aux_tex=tuple(f for f in files if f != entry),
                last_updated=last_updated,
                category=category,
                timestamp_source=source,
            )
        )
    entries.sort(key=lambda e: e.paper_id)
    for w in warnings:
        log.warning("%s: %s (%s)", w.paper_id, w.kind, w.detail)
    return CorpusManifest(root, newest, tuple(entries), tuple(warnings))


@dataclass(frozen=True)
class PaperSource:
    text: str
    inlined: Tuple[str, ...] = ()
    missing: Tuple[str, ...] = ()


def _resolve_target(entry: PaperEntry, target: str) -> Optional[Path]:
    base = entry.entry_tex.parent
    aux = {p.resolve() for p in entry.aux_tex}
    for name in (target, target + ".tex"):
        candidate = (base / name).resolve()
        if candidate in aux:
            return candidate
    return None


def resolve_inputs(text: str, entry: PaperEntry) -> PaperSource:
    """Inline ``\\input``/``\\include`` targets one level deep.

    Inlined content is not scanned again. Targets that are not among the
    paper's auxiliary files are left in place and reported as missing.
    """
    inlined, missing = [], []
    out = []
    pos = 0
    for m in _INPUT.finditer(text):
        line_start = text.rfind("\n", 0, m.start()) + 1
        if _is_commented(text[line_start : m.start()]):
            continue
        target = m.group(2).strip()
        path = _resolve_target(entry, target)
        out.append(text[pos : m.start()])
        if path is None:
            missing.append(target)
            out.append(m.group(0))
        else:
            out.append(_read_bytes(path))
            inlined.append(target)
        pos = m.end()
    out.append(text[pos:])
    return PaperSource("".join(out), tuple(inlined), tuple(missing))


def _is_commented(prefix: str) -> bool:
    i = 0
    while i < len(prefix):
        if prefix[i] == "\\":
            i += 2
            continue
        if prefix[i] == "%":
            return True
        i += 1
    return False


def read_paper_source(entry: PaperEntry) -> PaperSource:
    """Read the entry file (UTF-8, else Latin-1) with inputs inlined."""
    src = resolve_inputs(_read_bytes(entry.entry_tex), entry)
    for target in src.missing:
        log.warning("%s: \\input target %r not found", entry.paper_id, target)
    return src
