"""Warning records shared by every pipeline stage.

Warnings are collected rather than raised so that one bad paper or block
never stops a corpus run. They are written out as JSONL, one object per
line, with the keys ``paper_id``, ``kind``, ``offset`` and ``detail``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    detail: str = ""
    offset: Optional[int] = None
    paper_id: Optional[str] = None

    def with_paper(self, paper_id: str) -> "Diagnostic":
        return Diagnostic(self.kind, self.detail, self.offset, paper_id)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in ("paper_id", "kind", "offset", "detail")}


def write_diagnostics(path: Path, diagnostics: Iterable[Diagnostic]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for diag in diagnostics:
            fh.write(json.dumps(diag.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n
