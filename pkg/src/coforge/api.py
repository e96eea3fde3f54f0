"""HTTP+JSON surface over the engine.

Handlers are one-liners over :class:`~coforge.engine.Engine` methods; the
CLI wraps the same methods, so the engine is the single mutation path.
Every mutating handler persists the project (when a path is configured)
before the response goes out.
"""
from __future__ import annotations

import threading
from typing import Dict, List, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .audit import AuditCheckConfig
from .engine import Engine
from .errors import CoforgeError
from .knowledge import RetrievalResult
from .personas import PersonaSpec, StrategyReport
from .project import (
    agent_to_dict,
    audit_config_to_dict,
    message_to_dict,
    persona_to_dict,
    session_to_dict,
)


class AgentCreate(BaseModel):
    name: str
    definition: str
    kind: str = "service_agent"
    exemplars: List[List[str]] = Field(default_factory=list)
    cooklist: Dict[str, str] = Field(default_factory=dict)
    kb_id: Optional[str] = None
    enabled_rules: List[str] = Field(default_factory=list)


class AgentPatch(BaseModel):
    name: Optional[str] = None
    definition: Optional[str] = None
    kind: Optional[str] = None
    exemplars: Optional[List[List[str]]] = None
    cooklist: Optional[Dict[str, str]] = None
    kb_id: Optional[str] = None
    enabled_rules: Optional[List[str]] = None
    detach_kb: bool = False


class KbCreate(BaseModel):
    name: str


class DocIngest(BaseModel):
    title: str
    text: str


class SearchRequest(BaseModel):
    query: str
    k: Optional[int] = None


class SyncRequest(BaseModel):
    message_id: str
    boost: Optional[float] = None


class SessionCreate(BaseModel):
    participants: List[str]
    turn_policy: str = "round_robin"
    max_turns: int = 10


class TurnRequest(BaseModel):
    content: Optional[str] = None
    responder_id: Optional[str] = None


class MessagePatch(BaseModel):
    content: str
    note: Optional[str] = None


class PersonaCreate(BaseModel):
    name: str
    profile: str = ""
    tendency_clause: str = ""
    strategy: str = "explicit"


class CompareArm(BaseModel):
    persona_name: Optional[str] = None


class CompareRequest(BaseModel):
    service_agent_id: str
    arms: List[CompareArm]
    turns: int = 10
    scripts: Optional[List[List[str]]] = None


class AuditRequest(BaseModel):
    session_id: str
    configs: Optional[List[dict]] = None


def result_to_dict(result: RetrievalResult) -> dict:
    locator = result.chunk.locator
    return {
        "chunk_id": result.chunk.id,
        "doc_id": result.chunk.doc_id,
        "ordinal": result.chunk.ordinal,
        "text": result.chunk.text,
        "locator": {
            "doc_id": locator.doc_id,
            "doc_title": locator.doc_title,
            "start_char": locator.start_char,
            "end_char": locator.end_char,
            "start_line": locator.start_line,
            "page": locator.page,
        },
        "provenance": result.chunk.provenance,
        "priority_boost": result.chunk.priority_boost,
        "raw_cosine": result.raw_cosine,
        "effective_score": result.effective_score,
    }


def report_to_dict(report: StrategyReport) -> dict:
    return {
        "arms": [
            {
                "label": arm.label,
                "persona_name": arm.persona_name,
                "session_id": arm.session_id,
                "message_count": arm.message_count,
                "total_chars": arm.total_chars,
                "mean_chars_per_message": arm.mean_chars_per_message,
            }
            for arm in report.arms
        ],
        "longest_arm_index": report.longest_arm_index,
        "total_chars_delta": report.total_chars_delta,
    }


def finding_to_dict(finding) -> dict:
    return {
        "check_id": finding.check_id,
        "message_id": finding.message_id,
        "severity": finding.severity,
        "explanation": finding.explanation,
        "evidence_start": finding.evidence_start,
        "evidence_end": finding.evidence_end,
    }


def build_app(engine: Engine, ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="coforge", version="0.1.0")
    run_threads: Dict[str, threading.Thread] = {}

    def commit() -> None:
        if engine.project_path is not None:
            engine.save()

    @app.exception_handler(CoforgeError)
    async def coforge_error_handler(request: Request, exc: CoforgeError):
        return JSONResponse(status_code=exc.http_status, content=exc.as_dict())

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "invalid-request", "message": "request body is invalid",
                     "detail": exc.errors()},
        )

    # ----- agents -----

    @app.post("/agents", status_code=201)
    def create_agent(body: AgentCreate):
        agent = engine.create_agent(
            name=body.name,
            definition=body.definition,
            kind=body.kind,
            exemplars=[tuple(pair) for pair in body.exemplars],
            cooklist=body.cooklist,
            kb_id=body.kb_id,
            enabled_rules=body.enabled_rules,
        )
        commit()
        return agent_to_dict(agent)

    @app.get("/agents")
    def list_agents():
        return [agent_to_dict(a) for a in engine.list_agents()]

    @app.get("/agents/{agent_id}")
    def get_agent(agent_id: str):
        return agent_to_dict(engine.get_agent(agent_id))

    @app.patch("/agents/{agent_id}")
    def patch_agent(agent_id: str, body: AgentPatch):
        patch = {}
        for field_name in ("name", "definition", "kind", "cooklist", "enabled_rules"):
            value = getattr(body, field_name)
            if value is not None:
                patch[field_name] = value
        if body.exemplars is not None:
            patch["exemplars"] = [tuple(pair) for pair in body.exemplars]
        if body.kb_id is not None:
            patch["kb_id"] = body.kb_id
        elif body.detach_kb:
            patch["kb_id"] = None
        agent = engine.update_agent(agent_id, **patch)
        commit()
        return agent_to_dict(agent)

    @app.delete("/agents/{agent_id}", status_code=204)
    def delete_agent(agent_id: str):
        engine.delete_agent(agent_id)
        commit()

    @app.get("/rules")
    def list_rules():
        return [
            {
                "rule_id": d.rule_id,
                "display_name": d.display_name,
                "description": d.description,
                "hooks": list(d.hooks),
            }
            for d in engine.list_rules()
        ]

    @app.post("/agents/{agent_id}/rules/{rule_id}/enable")
    def enable_rule(agent_id: str, rule_id: str):
        agent = engine.enable_rule(agent_id, rule_id)
        commit()
        return agent_to_dict(agent)

    @app.post("/agents/{agent_id}/rules/{rule_id}/disable")
    def disable_rule(agent_id: str, rule_id: str):
        agent = engine.disable_rule(agent_id, rule_id)
        commit()
        return agent_to_dict(agent)

    # ----- knowledge -----

    @app.post("/kb", status_code=201)
    def create_kb(body: KbCreate):
        kb = engine.create_kb(body.name)
        commit()
        return {"id": kb.id, "name": kb.name, "embedding_dimension": kb.embedding_dimension}

    @app.get("/kb")
    def list_kbs():
        return [
            {
                "id": kb.id,
                "name": kb.name,
                "embedding_dimension": kb.embedding_dimension,
                "doc_count": len(kb.docs),
                "chunk_count": len(kb.chunks),
            }
            for kb in engine.kbs.list()
        ]

    @app.post("/kb/{kb_id}/docs", status_code=201)
    def ingest_doc(kb_id: str, body: DocIngest):
        doc_id, count = engine.ingest_document(kb_id, body.title, body.text)
        commit()
        return {"doc_id": doc_id, "chunks_added": count}

    @app.get("/kb/{kb_id}/chunks")
    def list_chunks(kb_id: str):
        kb = engine.get_kb(kb_id)
        return [
            {
                "id": c.id,
                "doc_id": c.doc_id,
                "ordinal": c.ordinal,
                "text": c.text,
                "locator": {
                    "doc_id": c.locator.doc_id,
                    "doc_title": c.locator.doc_title,
                    "start_char": c.locator.start_char,
                    "end_char": c.locator.end_char,
                    "start_line": c.locator.start_line,
                    "page": c.locator.page,
                },
                "provenance": c.provenance,
                "priority_boost": c.priority_boost,
            }
            for c in kb.chunks
        ]

    @app.post("/kb/{kb_id}/search")
    def search_kb(kb_id: str, body: SearchRequest):
        results = engine.search_kb(kb_id, body.query, body.k)
        return [result_to_dict(r) for r in results]

    @app.post("/kb/{kb_id}/sync", status_code=201)
    def sync_kb(kb_id: str, body: SyncRequest):
        chunk, exchange = engine.sync_message(kb_id, body.message_id, boost=body.boost)
        commit()
        return {
            "chunk_id": chunk.id,
            "doc_id": chunk.doc_id,
            "text": chunk.text,
            "provenance": chunk.provenance,
            "priority_boost": chunk.priority_boost,
            "exchange": {
                "question": exchange.question,
                "corrected_answer": exchange.corrected_answer,
                "source_session": exchange.source_session,
                "source_message": exchange.source_message,
                "editor_note": exchange.editor_note,
                "created_at": exchange.created_at,
            },
        }

    # ----- sessions -----

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        session = engine.create_session(
            body.participants, turn_policy=body.turn_policy, max_turns=body.max_turns
        )
        commit()
        return session_to_dict(session)

    @app.get("/sessions")
    def list_sessions():
        return [
            {
                "id": s.id,
                "participants": s.participants,
                "turn_policy": s.turn_policy,
                "status": s.status,
                "message_count": len(s.transcript),
            }
            for s in engine.sessions.list()
        ]

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_to_dict(engine.get_session(session_id))

    @app.post("/sessions/{session_id}/turns", status_code=201)
    def post_turn(session_id: str, body: TurnRequest):
        if body.content is not None:
            creator_message, agent_message = engine.post_creator_turn(
                session_id, body.content, responder_id=body.responder_id
            )
            commit()
            return {
                "creator_message": message_to_dict(creator_message),
                "message": message_to_dict(agent_message),
            }
        message = engine.advance_session(session_id)
        commit()
        return {"message": message_to_dict(message)}

    @app.post("/sessions/{session_id}/run")
    def run_session(session_id: str, background: bool = False):
        if background:
            session = engine.get_session(session_id)
            existing = run_threads.get(session_id)
            if existing is None or not existing.is_alive():
                def worker():
                    try:
                        engine.run_session(session_id)
                    except CoforgeError:
                        pass
                    finally:
                        if engine.project_path is not None:
                            engine.save()

                thread = threading.Thread(target=worker, daemon=True)
                run_threads[session_id] = thread
                thread.start()
            return {"started": True, "session_id": session_id, "status": session.status}
        session = engine.run_session(session_id)
        commit()
        return session_to_dict(session)

    @app.post("/sessions/{session_id}/stop")
    def stop_session(session_id: str):
        session = engine.stop_session(session_id)
        commit()
        return session_to_dict(session)

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str):
        return engine.export_transcript(session_id)

    @app.patch("/messages/{message_id}")
    def edit_message(message_id: str, body: MessagePatch):
        message, exchange = engine.edit_message(message_id, body.content, note=body.note)
        commit()
        return {
            "message": message_to_dict(message),
            "exchange": {
                "question": exchange.question,
                "corrected_answer": exchange.corrected_answer,
                "source_session": exchange.source_session,
                "source_message": exchange.source_message,
                "editor_note": exchange.editor_note,
                "created_at": exchange.created_at,
            },
        }

    # ----- personas -----

    @app.post("/personas", status_code=201)
    def create_persona(body: PersonaCreate):
        persona = engine.create_persona(
            name=body.name,
            profile=body.profile,
            tendency_clause=body.tendency_clause,
            strategy=body.strategy,
        )
        commit()
        return persona_to_dict(persona)

    @app.get("/personas")
    def list_personas():
        return [persona_to_dict(p) for p in engine.list_personas()]

    @app.post("/personas/{name}/instantiate", status_code=201)
    def instantiate_persona(name: str):
        agent = engine.instantiate_persona(name)
        commit()
        return agent_to_dict(agent)

    @app.post("/compare")
    def compare(body: CompareRequest):
        arms: List[Optional[PersonaSpec]] = []
        for arm in body.arms:
            arms.append(engine.get_persona(arm.persona_name) if arm.persona_name else None)
        report = engine.compare_strategies(
            body.service_agent_id, arms, turns=body.turns, scripts=body.scripts
        )
        commit()
        return report_to_dict(report)

    # ----- audit -----

    @app.post("/audit")
    def audit(body: AuditRequest):
        configs = None
        if body.configs is not None:
            configs = {
                raw["check_id"]: AuditCheckConfig(
                    check_id=raw["check_id"],
                    enabled=raw.get("enabled", True),
                    parameters=raw.get("parameters", {}),
                )
                for raw in body.configs
            }
        findings = engine.audit_session(body.session_id, configs=configs)
        return {"findings": [finding_to_dict(f) for f in findings]}

    @app.get("/audit/configs")
    def audit_configs():
        return [audit_config_to_dict(c) for c in engine.audit_configs.values()]

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(
    engine: Engine,
    host: str = "127.0.0.1",
    port: int = 8040,
    ui_dir: Optional[str] = None,
) -> None:
    import uvicorn

    uvicorn.run(build_app(engine, ui_dir=ui_dir), host=host, port=port, log_level="info")
