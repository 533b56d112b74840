"""Read-only HTTP service over the outputs of a pipeline run."""

from __future__ import annotations

import errno
import json
import socket
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException

from .explain import PROFILES, ForecastExplanation, redact
from .kg import ConceptLabel, KnowledgeGraph, Relation
from .timeutil import Month


class MissingOutputs(FileNotFoundError):
    pass


class PortInUse(OSError):
    pass


class Snapshot:
    """Explanations, predictions and the kg of one run, loaded once and never mutated."""

    def __init__(self, out_dir):
        out = Path(out_dir)
        needed = [out / n for n in ("explanations.jsonl", "predictions.jsonl", "kg.jsonl")]
        missing = [str(p) for p in needed if not p.is_file()]
        if missing:
            raise MissingOutputs("pipeline outputs not found: " + ", ".join(missing))
        self.kg: KnowledgeGraph = KnowledgeGraph.import_jsonl(needed[2]).snapshot()
        self.explanations = {}
        for line in needed[0].read_text(encoding="utf-8").splitlines():
            if line.strip():
                expl = ForecastExplanation.from_record(json.loads(line))
                self.explanations[expl.id] = expl
        self.predictions: dict[tuple[str, str], dict] = {}
        for line in needed[1].read_text(encoding="utf-8").splitlines():
            if line.strip():
                rec = json.loads(line)
                self.predictions[(rec["material"], rec["month"])] = rec
        self._check_links()

    def _check_links(self) -> None:
        for eid in self.explanations:
            node = self.kg.find(ConceptLabel.FORECAST_EXPLANATION, explanation_id=eid)
            if node is None or not any(e.relation is Relation.EXPLAINS for e in self.kg.out_edges(node.id)):
                raise ValueError(f"explanation {eid} has no explains edge in the knowledge graph")

    def materials(self) -> list[str]:
        return sorted({m for m, _ in self.predictions})


def create_app(out_dir=None, snapshot: Optional[Snapshot] = None) -> FastAPI:
    snap = snapshot if snapshot is not None else Snapshot(out_dir)
    app = FastAPI(title="semxai", version="0.1.0")

    @app.get("/health")
    def health():
        return {"status": "ok", "explanations": len(snap.explanations)}

    @app.get("/materials")
    def materials():
        return {"materials": snap.materials()}

    @app.get("/forecasts/{material}")
    def forecast(material: str, month: Optional[str] = None):
        months = sorted(m for mat, m in snap.predictions if mat == material)
        if not months:
            raise HTTPException(404, f"unknown material {material}")
        if month is None:
            month = months[-1]
        else:
            try:
                month = str(Month.parse(month))
            except ValueError:
                raise HTTPException(400, f"month must be YYYY-MM, got {month!r}") from None
        rec = snap.predictions.get((material, month))
        if rec is None:
            raise HTTPException(404, f"no forecast for {material} in {month}")
        return rec

    @app.get("/explanations/{explanation_id}")
    def explanation(explanation_id: str, profile: str = "planner"):
        if profile not in PROFILES:
            raise HTTPException(400, f"unknown profile {profile!r}; use one of {sorted(PROFILES)}")
        expl = snap.explanations.get(explanation_id)
        if expl is None:
            raise HTTPException(404, f"unknown explanation {explanation_id}")
        return {"id": expl.id, "profile": profile, **redact(expl, profile)}

    return app


def check_port(host: str, port: int) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        try:
            sock.bind((host, port))
        except OSError as exc:
            if exc.errno == errno.EADDRINUSE:
                raise PortInUse(f"port {port} on {host} is already in use") from None
            raise


def serve(out_dir, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    app = create_app(out_dir)  # load before binding so bad outputs fail fast
    check_port(host, port)
    uvicorn.run(app, host=host, port=port, log_level="info")
