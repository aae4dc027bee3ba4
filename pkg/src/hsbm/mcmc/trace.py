"""Retained MCMC samples and their JSON Lines persistence."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from ..network import Partition


@dataclass
class TraceRecord:
    iter: int
    zeta: list
    xi: list          # canonical actor labels of each network cluster, in zeta label order
    hyper: dict
    log_post: float

    def to_json(self) -> str:
        return json.dumps({"iter": self.iter, "zeta": self.zeta, "xi": self.xi,
                           "hyper": self.hyper, "log_post": self.log_post})

    def zeta_partition(self) -> Partition:
        return Partition(tuple(self.zeta))

    def xi_for_network(self, j: int) -> list:
        return self.xi[self.zeta[j] - 1]


@dataclass
class Trace:
    records: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict, compare=False)   # move counts, not persisted

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, rec: TraceRecord) -> None:
        self.records.append(rec)

    @property
    def num_networks(self) -> int:
        return len(self.records[0].zeta)

    @property
    def num_actors(self) -> int:
        return len(self.records[0].xi[0])

    def dumps(self) -> str:
        lines = [json.dumps({"meta": self.meta}, sort_keys=True)] if self.meta else []
        lines.extend(r.to_json() for r in self.records)
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def read(cls, path) -> "Trace":
        return cls.from_lines(Path(path).read_text().splitlines())

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Trace":
        trace = cls()
        for ln in lines:
            if not ln.strip():
                continue
            obj = json.loads(ln)
            if "meta" in obj and "iter" not in obj:
                trace.meta = obj["meta"]
                continue
            trace.append(TraceRecord(obj["iter"], obj["zeta"], obj["xi"], obj["hyper"],
                                     obj["log_post"]))
        return trace

    @classmethod
    def pooled(cls, traces: Iterable["Trace"], meta: Optional[dict] = None) -> "Trace":
        out = cls(meta=dict(meta or {}))
        shape = None
        for tr in traces:
            if not len(tr):
                continue
            s = (tr.num_networks, tr.num_actors)
            if shape is not None and s != shape:
                raise ValueError(f"traces disagree on (networks, actors): {shape} vs {s}")
            shape = s
            out.records.extend(tr.records)
        return out
